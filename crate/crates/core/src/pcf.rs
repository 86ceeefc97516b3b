//! Post-critically finite self-similar structures and harmonic structures.
//!
//! Letters and boundary indices are 0-based in memory and 1-based in files.
//! A point of `V_n` is addressed by a word `ω` of length `n` and a boundary
//! index `p`, denoting `F_ω(p_p)`. Only level-1 identifications are stored;
//! deeper ones follow recursively, and every boundary point `p_k` is assumed
//! to be the fixed point of the single map `F_{i_k}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::network::{ElectricNetwork, NetworkError};
use crate::report::ValidationReport;

/// Default tolerance for the level-1 compatibility check.
pub const COMPAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PcfError {
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("base network (V_0, c0) is disconnected")]
    DisconnectedBase,
    #[error("level-1 trace deviates from c0 by {deviation:e} (tolerance {tolerance:e})")]
    IncompatibleStructure { deviation: f64, tolerance: f64 },
    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),
    #[error("network at depth {depth} exceeds the node cap {cap}")]
    DepthOverflow { depth: usize, cap: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// A point of `V_n` in canonical form: `F_word(p_point)` with `word.len() = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalVertex {
    pub word: Vec<u8>,
    pub point: u8,
}

impl CanonicalVertex {
    pub fn depth(&self) -> usize {
        self.word.len()
    }
}

impl std::fmt::Display for CanonicalVertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &l in &self.word {
            write!(f, "{}", l as usize + 1)?;
        }
        write!(f, ":p{}", self.point as usize + 1)
    }
}

impl Serialize for CanonicalVertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Combinatorial IFS: alphabet, boundary points as fixed points, level-1 gluing.
#[derive(Debug, Clone, PartialEq)]
pub struct PcfStructure {
    alphabet_size: usize,
    boundary_size: usize,
    fixed_point_letter: Vec<usize>,
    glue_pairs: Vec<[(usize, usize); 2]>,
    class_of: Vec<usize>,
    class_rep: Vec<(usize, usize)>,
    class_boundary: Vec<Option<usize>>,
    boundary_of_letter: Vec<Option<usize>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl PcfStructure {
    pub fn new(
        alphabet_size: usize,
        boundary_size: usize,
        fixed_point_letter: Vec<usize>,
        glue_pairs: Vec<[(usize, usize); 2]>,
    ) -> Result<Self, PcfError> {
        let (n, q) = (alphabet_size, boundary_size);
        if n < 2 {
            return Err(PcfError::Malformed(format!("alphabet size {n} < 2")));
        }
        if n > 255 || q > 255 {
            return Err(PcfError::Malformed("alphabet and boundary sizes are limited to 255".into()));
        }
        if q < 2 {
            return Err(PcfError::Malformed(format!("boundary size {q} < 2")));
        }
        if fixed_point_letter.len() != q {
            return Err(PcfError::Malformed(format!(
                "fixed_point_letter has {} entries, expected {q}",
                fixed_point_letter.len()
            )));
        }
        let mut boundary_of_letter = vec![None; n];
        for (k, &i) in fixed_point_letter.iter().enumerate() {
            if i >= n {
                return Err(PcfError::Malformed(format!("fixed point letter {} out of range", i + 1)));
            }
            // a contraction has one fixed point, so two boundary points cannot share a letter
            if boundary_of_letter[i].replace(k).is_some() {
                return Err(PcfError::Malformed(format!("letter {} fixes two boundary points", i + 1)));
            }
        }
        let mut parent: Vec<usize> = (0..n * q).collect();
        for pair in &glue_pairs {
            let [(i, p), (j, r)] = *pair;
            if i >= n || j >= n || p >= q || r >= q {
                return Err(PcfError::Malformed(format!(
                    "glue pair ({},{})~({},{}) out of range",
                    i + 1,
                    p + 1,
                    j + 1,
                    r + 1
                )));
            }
            if i == j {
                return Err(PcfError::Malformed(format!("glue pair within cell {}", i + 1)));
            }
            let (a, b) = (find(&mut parent, i * q + p), find(&mut parent, j * q + r));
            parent[a] = b;
        }
        let mut root_to_class = HashMap::new();
        let mut class_of = vec![0; n * q];
        let mut class_rep = Vec::new();
        for x in 0..n * q {
            let root = find(&mut parent, x);
            let c = *root_to_class.entry(root).or_insert_with(|| {
                class_rep.push((x / q, x % q));
                class_rep.len() - 1
            });
            class_of[x] = c;
        }
        let mut class_boundary = vec![None; class_rep.len()];
        for (k, &i) in fixed_point_letter.iter().enumerate() {
            let c = class_of[i * q + k];
            if let Some(other) = class_boundary[c].replace(k) {
                return Err(PcfError::Malformed(format!(
                    "glue pairs identify boundary points p{} and p{}",
                    other + 1,
                    k + 1
                )));
            }
        }
        let ps = Self {
            alphabet_size: n,
            boundary_size: q,
            fixed_point_letter,
            glue_pairs,
            class_of,
            class_rep,
            class_boundary,
            boundary_of_letter,
        };
        if !ps.level_one_connected() {
            return Err(PcfError::Malformed("level-1 cell graph is disconnected".into()));
        }
        Ok(ps)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn boundary_size(&self) -> usize {
        self.boundary_size
    }

    pub fn fixed_point_letter(&self, k: usize) -> usize {
        self.fixed_point_letter[k]
    }

    /// Boundary index fixed by letter `i`, if any.
    pub fn boundary_fixed_by(&self, i: usize) -> Option<usize> {
        self.boundary_of_letter[i]
    }

    pub fn glue_pairs(&self) -> &[[(usize, usize); 2]] {
        &self.glue_pairs
    }

    /// Identifier of the `V_1` point `F_i(p_p)`; equal ids mean equal points.
    pub fn level_one_class(&self, i: usize, p: usize) -> usize {
        self.class_of[i * self.boundary_size + p]
    }

    pub fn level_one_class_count(&self) -> usize {
        self.class_rep.len()
    }

    /// All `(letter, point)` addresses of a `V_1` class.
    pub fn level_one_members(&self, class: usize) -> Vec<(usize, usize)> {
        let q = self.boundary_size;
        (0..self.alphabet_size * q)
            .filter(|&x| self.class_of[x] == class)
            .map(|x| (x / q, x % q))
            .collect()
    }

    /// Whether `F_i(p_p)` coincides with some boundary point, and which.
    pub fn level_one_boundary(&self, i: usize, p: usize) -> Option<usize> {
        self.class_boundary[self.level_one_class(i, p)]
    }

    fn level_one_connected(&self) -> bool {
        // cells are connected to each other through shared V_1 classes
        let n = self.alphabet_size;
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for p in 0..self.boundary_size {
                let c = self.level_one_class(i, p);
                for (j, _) in self.level_one_members(c) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Canonical form of `F_word(p_point)` at depth `word.len()`.
    pub fn canonicalize(&self, word: &[u8], point: usize) -> CanonicalVertex {
        self.canonicalize_at(word, point, word.len())
    }

    /// Canonical form of `F_word(p_point)` regarded as a point of `V_depth`.
    pub fn canonicalize_at(&self, word: &[u8], point: usize, depth: usize) -> CanonicalVertex {
        debug_assert!(depth >= word.len());
        // Scan right to left. `boundary` holds the V_0 index while the suffix
        // processed so far still denotes a boundary point. Padding letters
        // fix `point`, so they never need scanning.
        let mut boundary = Some(point);
        let mut pos = word.len();
        let mut tail: (usize, usize) = (0, point);
        let mut filled_from = word.len();
        while pos > 0 {
            let Some(a) = boundary else { break };
            let letter = word[pos - 1] as usize;
            pos -= 1;
            match self.level_one_boundary(letter, a) {
                Some(b) => boundary = Some(b),
                None => {
                    let rep = self.class_rep[self.level_one_class(letter, a)];
                    tail = rep;
                    filled_from = pos;
                    boundary = None;
                }
            }
        }
        let mut out = Vec::with_capacity(depth);
        match boundary {
            Some(b) => {
                out.resize(depth, self.fixed_point_letter[b] as u8);
                CanonicalVertex { word: out, point: b as u8 }
            }
            None => {
                let (i_star, a_star) = tail;
                out.extend_from_slice(&word[..filled_from]);
                out.push(i_star as u8);
                out.resize(depth, self.fixed_point_letter[a_star] as u8);
                CanonicalVertex {
                    word: out,
                    point: a_star as u8,
                }
            }
        }
    }

    /// Index `k` if the address denotes the boundary point `p_k`.
    pub fn as_boundary_point(&self, word: &[u8], point: usize) -> Option<usize> {
        let i = self.fixed_point_letter[point];
        word.iter().all(|&l| l as usize == i).then_some(point)
    }
}

/// Pair of permutations realizing a symmetry `κ` with `κ∘F_i = F_{s(i)}∘κ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub letter_perm: Vec<usize>,
    pub boundary_perm: Vec<usize>,
}

impl Symmetry {
    pub fn identity(ps: &PcfStructure) -> Self {
        Self {
            letter_perm: (0..ps.alphabet_size).collect(),
            boundary_perm: (0..ps.boundary_size).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letter_perm.iter().enumerate().all(|(i, &s)| i == s)
            && self.boundary_perm.iter().enumerate().all(|(i, &s)| i == s)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Symmetry) -> Symmetry {
        Symmetry {
            letter_perm: other.letter_perm.iter().map(|&i| self.letter_perm[i]).collect(),
            boundary_perm: other.boundary_perm.iter().map(|&p| self.boundary_perm[p]).collect(),
        }
    }

    pub fn letter(&self, i: usize) -> usize {
        self.letter_perm[i]
    }

    pub fn point(&self, p: usize) -> usize {
        self.boundary_perm[p]
    }

    /// `(ω, p) ↦ (s(ω_1)…s(ω_n), σ(p))`.
    pub fn apply(&self, word: &[u8], point: usize) -> (Vec<u8>, usize) {
        (
            word.iter().map(|&l| self.letter_perm[l as usize] as u8).collect(),
            self.boundary_perm[point],
        )
    }

    pub fn validate(&self, hs: &HarmonicStructure) -> Result<(), PcfError> {
        let ps = &hs.structure;
        let bad = |m: String| Err(PcfError::InvalidSymmetry(m));
        if !is_permutation(&self.letter_perm, ps.alphabet_size) {
            return bad("letter_perm is not a permutation of the alphabet".into());
        }
        if !is_permutation(&self.boundary_perm, ps.boundary_size) {
            return bad("boundary_perm is not a permutation of V_0".into());
        }
        let q = ps.boundary_size;
        for p in 0..q {
            for r in 0..q {
                let (a, b) = (hs.conductance(p, r), hs.conductance(self.point(p), self.point(r)));
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return bad(format!("c0 not invariant at (p{}, p{})", p + 1, r + 1));
                }
            }
        }
        for i in 0..ps.alphabet_size {
            if (hs.renorm(i) - hs.renorm(self.letter(i))).abs() > 1e-15 {
                return bad(format!("r not invariant at letter {}", i + 1));
            }
        }
        for k in 0..q {
            if ps.fixed_point_letter(self.point(k)) != self.letter(ps.fixed_point_letter(k)) {
                return bad(format!("fixed point letter of p{} not mapped consistently", k + 1));
            }
        }
        for [(i, p), (j, r)] in ps.glue_pairs().iter().copied() {
            let a = ps.level_one_class(self.letter(i), self.point(p));
            let b = ps.level_one_class(self.letter(j), self.point(r));
            if a != b {
                return bad(format!(
                    "glue pair ({},{})~({},{}) not preserved",
                    i + 1,
                    p + 1,
                    j + 1,
                    r + 1
                ));
            }
        }
        Ok(())
    }
}

fn is_permutation(v: &[usize], n: usize) -> bool {
    if v.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &x in v {
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// A regular harmonic structure `(c0, r)` on a p.c.f. structure.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicStructure {
    pub structure: PcfStructure,
    conductance: Vec<Vec<f64>>,
    renorm: Vec<f64>,
    symmetries: Vec<Symmetry>,
}

impl HarmonicStructure {
    pub fn new(
        structure: PcfStructure,
        conductance: Vec<Vec<f64>>,
        renorm: Vec<f64>,
        symmetries: Vec<Symmetry>,
    ) -> Result<Self, PcfError> {
        let q = structure.boundary_size;
        if conductance.len() != q || conductance.iter().any(|row| row.len() != q) {
            return Err(PcfError::Malformed(format!("conductance must be {q}x{q}")));
        }
        for p in 0..q {
            if conductance[p][p] != 0.0 {
                return Err(PcfError::Malformed("conductance diagonal must be zero".into()));
            }
            for r in 0..q {
                let g = conductance[p][r];
                if !(g.is_finite() && g >= 0.0) {
                    return Err(PcfError::Malformed(format!("conductance c0({},{}) invalid", p + 1, r + 1)));
                }
                if g != conductance[r][p] {
                    return Err(PcfError::Malformed("conductance must be symmetric".into()));
                }
            }
        }
        if renorm.len() != structure.alphabet_size {
            return Err(PcfError::Malformed(format!(
                "renorm has {} entries, expected {}",
                renorm.len(),
                structure.alphabet_size
            )));
        }
        if renorm.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(PcfError::Malformed("renormalization factors must lie in (0,1)".into()));
        }
        let hs = Self {
            structure,
            conductance,
            renorm,
            symmetries,
        };
        for (x, s) in hs.symmetries.iter().enumerate() {
            s.validate(&hs)
                .map_err(|e| PcfError::InvalidSymmetry(format!("symmetry {}: {e}", x + 1)))?;
        }
        Ok(hs)
    }

    pub fn conductance(&self, p: usize, q: usize) -> f64 {
        self.conductance[p][q]
    }

    pub fn conductance_matrix(&self) -> &[Vec<f64>] {
        &self.conductance
    }

    pub fn renorm(&self, i: usize) -> f64 {
        self.renorm[i]
    }

    pub fn renorms(&self) -> &[f64] {
        &self.renorm
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn alphabet_size(&self) -> usize {
        self.structure.alphabet_size
    }

    pub fn boundary_size(&self) -> usize {
        self.structure.boundary_size
    }

    /// `r_ω = r_{ω_1}⋯r_{ω_n}`.
    pub fn word_renorm(&self, word: &[u8]) -> f64 {
        word.iter().map(|&l| self.renorm[l as usize]).product()
    }

    /// Copy with a different renormalization vector, unchecked for compatibility.
    pub fn with_renorm(&self, renorm: Vec<f64>) -> Result<Self, PcfError> {
        Self::new(self.structure.clone(), self.conductance.clone(), renorm, self.symmetries.clone())
    }

    /// The network `(V_0, c0)`.
    pub fn base_network(&self) -> ElectricNetwork<usize> {
        let q = self.boundary_size();
        let mut net = ElectricNetwork::new();
        for p in 0..q {
            net.add_node(p);
        }
        for p in 0..q {
            for r in p + 1..q {
                net.add_conductance(p, r, self.conductance[p][r])
                    .expect("validated conductance");
            }
        }
        net
    }

    /// Largest entrywise deviation between `Trace_{V_0}(E_1)` and `c0`.
    pub fn compatibility_deviation(&self) -> Result<f64, PcfError> {
        let net = build_level_network(self, 1, usize::MAX)?;
        let q = self.boundary_size();
        let kept: Vec<usize> = (0..q)
            .map(|k| {
                let v = self.structure.canonicalize(&[self.structure.fixed_point_letter(k) as u8], k);
                net.index_of(&v).expect("boundary point present at level 1")
            })
            .collect();
        let t = net.trace_onto(&kept)?;
        let mut worst = 0.0f64;
        for p in 0..q {
            for r in p + 1..q {
                worst = worst.max((t.conductance(p, r) - self.conductance[p][r]).abs());
            }
        }
        Ok(worst)
    }
}

/// Checks connectivity of `(V_0, c0)`, regularity and level-1 compatibility.
pub fn validate_structure(hs: &HarmonicStructure, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new();
    report.pass("structure well-formed");
    let base_ok = hs.base_network().is_connected();
    if base_ok {
        report.pass("base network connected");
    } else {
        report.fail("base network connected", PcfError::DisconnectedBase.to_string());
    }
    report.pass("renormalization factors in (0,1)");
    if base_ok {
        match hs.compatibility_deviation() {
            Ok(d) if d <= tol => report.record("compatibility", true, format!("max deviation {d:.3e}")),
            Ok(d) => report.fail(
                "compatibility",
                PcfError::IncompatibleStructure {
                    deviation: d,
                    tolerance: tol,
                }
                .to_string(),
            ),
            Err(e) => report.fail("compatibility", e.to_string()),
        }
    }
    for (x, s) in hs.symmetries.iter().enumerate() {
        match s.validate(hs) {
            Ok(()) => report.pass(format!("symmetry {}", x + 1)),
            Err(e) => report.fail(format!("symmetry {}", x + 1), e.to_string()),
        }
    }
    report
}

/// Error form of [`validate_structure`].
pub fn check_structure(hs: &HarmonicStructure, tol: f64) -> Result<(), PcfError> {
    if !hs.base_network().is_connected() {
        return Err(PcfError::DisconnectedBase);
    }
    let deviation = hs.compatibility_deviation()?;
    if deviation > tol {
        return Err(PcfError::IncompatibleStructure {
            deviation,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Network on canonical `V_n` with `c0(p,q)/r_ω` on every cell edge.
pub fn build_level_network(
    hs: &HarmonicStructure,
    n: usize,
    node_cap: usize,
) -> Result<ElectricNetwork<CanonicalVertex>, PcfError> {
    let ps = &hs.structure;
    let q = ps.boundary_size;
    let mut net = ElectricNetwork::new();
    let mut word = vec![0u8; n];
    loop {
        let scale = 1.0 / hs.word_renorm(&word);
        let ids: Vec<usize> = (0..q).map(|p| net.add_node(ps.canonicalize(&word, p))).collect();
        if net.node_count() > node_cap {
            return Err(PcfError::DepthOverflow { depth: n, cap: node_cap });
        }
        for p in 0..q {
            for r in p + 1..q {
                let g = hs.conductance[p][r];
                if g > 0.0 {
                    net.add_conductance(ids[p], ids[r], g * scale)?;
                }
            }
        }
        if !next_word(&mut word, ps.alphabet_size) {
            break;
        }
    }
    Ok(net)
}

/// Advances `word` to the next word in lexicographic order.
pub(crate) fn next_word(word: &mut [u8], alphabet: usize) -> bool {
    for x in word.iter_mut().rev() {
        if (*x as usize) + 1 < alphabet {
            *x += 1;
            return true;
        }
        *x = 0;
    }
    false
}

/// File form of a harmonic structure, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicStructureJson {
    pub alphabet_size: usize,
    pub boundary_size: usize,
    pub fixed_point_letter: Vec<usize>,
    pub glue_pairs: Vec<[[usize; 2]; 2]>,
    pub conductance: Vec<Vec<f64>>,
    pub renorm: Vec<f64>,
    #[serde(default)]
    pub symmetries: Vec<Symmetry>,
}

fn dec(x: usize, what: &str) -> Result<usize, PcfError> {
    x.checked_sub(1)
        .ok_or_else(|| PcfError::Malformed(format!("{what} indices are 1-based, found 0")))
}

impl TryFrom<HarmonicStructureJson> for HarmonicStructure {
    type Error = PcfError;

    fn try_from(j: HarmonicStructureJson) -> Result<Self, PcfError> {
        let fixed = j
            .fixed_point_letter
            .iter()
            .map(|&i| dec(i, "letter"))
            .collect::<Result<_, _>>()?;
        let glue = j
            .glue_pairs
            .iter()
            .map(|[[i, p], [k, r]]| {
                Ok([
                    (dec(*i, "letter")?, dec(*p, "boundary")?),
                    (dec(*k, "letter")?, dec(*r, "boundary")?),
                ])
            })
            .collect::<Result<_, PcfError>>()?;
        let ps = PcfStructure::new(j.alphabet_size, j.boundary_size, fixed, glue)?;
        let symmetries = j
            .symmetries
            .iter()
            .map(|s| {
                Ok(Symmetry {
                    letter_perm: s.letter_perm.iter().map(|&x| dec(x, "letter")).collect::<Result<_, _>>()?,
                    boundary_perm: s.boundary_perm.iter().map(|&x| dec(x, "boundary")).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, PcfError>>()?;
        HarmonicStructure::new(ps, j.conductance, j.renorm, symmetries)
    }
}

impl From<&HarmonicStructure> for HarmonicStructureJson {
    fn from(hs: &HarmonicStructure) -> Self {
        let ps = &hs.structure;
        let inc = |v: &[usize]| v.iter().map(|x| x + 1).collect::<Vec<_>>();
        Self {
            alphabet_size: ps.alphabet_size,
            boundary_size: ps.boundary_size,
            fixed_point_letter: inc(&ps.fixed_point_letter),
            glue_pairs: ps
                .glue_pairs
                .iter()
                .map(|[(i, p), (j, r)]| [[i + 1, p + 1], [j + 1, r + 1]])
                .collect(),
            conductance: hs.conductance.clone(),
            renorm: hs.renorm.clone(),
            symmetries: hs
                .symmetries
                .iter()
                .map(|s| Symmetry {
                    letter_perm: inc(&s.letter_perm),
                    boundary_perm: inc(&s.boundary_perm),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    #[test]
    fn sg_midpoints_glue() {
        let hs = registry::sierpinski_gasket();
        let ps = &hs.structure;
        assert_eq!(ps.canonicalize(&[0], 1), ps.canonicalize(&[1], 0));
        assert_ne!(ps.canonicalize(&[0], 1), ps.canonicalize(&[0], 2));
    }

    #[test]
    fn fixed_points_reduce_to_boundary() {
        let hs = registry::sierpinski_gasket();
        let ps = &hs.structure;
        assert_eq!(ps.canonicalize(&[0, 0], 0), CanonicalVertex { word: vec![0, 0], point: 0 });
        assert_eq!(ps.as_boundary_point(&[0, 0, 0], 0), Some(0));
        assert_eq!(ps.as_boundary_point(&[0, 1], 0), None);
        assert_eq!(ps.canonicalize_at(&[], 2, 3), ps.canonicalize(&[2, 2, 2], 2));
    }

    #[test]
    fn canonicalize_at_pads_interior_points() {
        let hs = registry::sierpinski_gasket();
        let ps = &hs.structure;
        // F_1(p_2) at depth 3 is F_{122}(p_2) and also F_{211}(p_1)
        assert_eq!(ps.canonicalize_at(&[0], 1, 3), ps.canonicalize(&[1, 0, 0], 0));
        assert_eq!(ps.canonicalize_at(&[0], 1, 3), ps.canonicalize(&[0, 1, 1], 1));
    }

    #[test]
    fn sg_level_counts() {
        let hs = registry::sierpinski_gasket();
        for n in 0..6 {
            let net = build_level_network(&hs, n, usize::MAX).unwrap();
            assert_eq!(net.node_count(), 3 * (3usize.pow(n as u32) + 1) / 2);
        }
    }

    #[test]
    fn single_letter_rejected() {
        assert!(PcfStructure::new(1, 2, vec![0, 0], vec![]).is_err());
        assert!(PcfStructure::new(2, 2, vec![0, 0], vec![]).is_err());
    }

    #[test]
    fn glued_boundary_points_rejected() {
        let err = PcfStructure::new(2, 2, vec![0, 1], vec![[(0, 0), (1, 1)]]).unwrap_err();
        assert!(err.to_string().contains("identify boundary points"));
    }

    #[test]
    fn json_round_trip() {
        let hs = registry::vicsek();
        let j = HarmonicStructureJson::from(&hs);
        let text = serde_json::to_string(&j).unwrap();
        let back: HarmonicStructureJson = serde_json::from_str(&text).unwrap();
        assert_eq!(HarmonicStructure::try_from(back).unwrap(), hs);
    }

    #[test]
    fn display_is_one_based() {
        let v = CanonicalVertex { word: vec![0, 2], point: 1 };
        assert_eq!(v.to_string(), "13:p2");
    }
}
