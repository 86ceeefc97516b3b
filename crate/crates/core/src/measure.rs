//! Hitting measures on boundary cylinders and the quantities built from them.
//!
//! `μ_{i,k}(∂Ω_γ) = e_kᵀ M_{γ_1}⋯M_{γ_m} 1`. All depth-`m` computations walk
//! the word tree depth first, carrying the partial row product, so the cost
//! is one `Q`-vector update per word.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};
use serde_json::{json, Value};

use crate::bgd::{
    enumerate_words, parse_word_key, word_key, AdmissibleWord, BgdError, BgdSpec, DomainTrace, Expansion, ExpNode,
    FluxTransferSet,
};
use crate::json::{format_17, number};
use crate::pcf::HarmonicStructure;

/// Node cap for the expansion behind [`harmonic_energy`].
pub const ENERGY_NODE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("p{} is not a boundary point of domain {}", .k + 1, .domain + 1)]
    PointNotInDomain { domain: usize, k: usize },
    #[error("word {word:?} is not admissible from domain {}", .domain + 1)]
    WordNotAdmissibleFrom { domain: usize, word: String },
    #[error("expected depth {expected}, found {found}")]
    DepthMismatch { expected: usize, found: usize },
    #[error("domain {} has fewer than two boundary points", .0 + 1)]
    NoComparablePoints(usize),
    #[error("no potential/flux data for p{}", .0 + 1)]
    MissingV0Data(usize),
    #[error("simple function is missing the cylinder {0:?}")]
    IncompleteFunction(String),
    #[error(transparent)]
    Bgd(#[from] BgdError),
}

/// `μ_{i,k}` for a fixed spec and set of flux matrices.
#[derive(Debug, Clone, Copy)]
pub struct MeasureContext<'a> {
    pub spec: &'a BgdSpec,
    pub flux: &'a FluxTransferSet,
    pub domain: usize,
    pub k: usize,
}

impl<'a> MeasureContext<'a> {
    pub fn new(spec: &'a BgdSpec, flux: &'a FluxTransferSet, domain: usize, k: usize) -> Result<Self, MeasureError> {
        if domain >= spec.domain_count() || !spec.contains_v0(domain, k) {
            return Err(MeasureError::PointNotInDomain { domain, k });
        }
        Ok(Self { spec, flux, domain, k })
    }

    fn start_row(&self) -> RowDVector<f64> {
        let mut row = RowDVector::zeros(self.spec.hs.boundary_size());
        row[self.k] = 1.0;
        row
    }
}

/// Depth-first walk of `Γ_m(i)` carrying `row · M_γ`.
fn walk_rows(
    spec: &BgdSpec,
    flux: &FluxTransferSet,
    domain: usize,
    row: RowDVector<f64>,
    m: usize,
    visit: &mut impl FnMut(&[usize], &RowDVector<f64>),
) {
    fn go(
        spec: &BgdSpec,
        flux: &FluxTransferSet,
        at: usize,
        word: &mut Vec<usize>,
        row: &RowDVector<f64>,
        left: usize,
        visit: &mut impl FnMut(&[usize], &RowDVector<f64>),
    ) {
        if left == 0 {
            visit(word, row);
            return;
        }
        for &e in spec.edges_from(at) {
            let next = row * flux.matrix(e);
            word.push(e);
            go(spec, flux, spec.edges[e].to, word, &next, left - 1, visit);
            word.pop();
        }
    }
    go(spec, flux, domain, &mut Vec::new(), &row, m, visit);
}

/// `e_kᵀ M_{γ_1}⋯M_{γ_m} 1`; the empty word has measure 1.
pub fn cylinder_measure(ctx: &MeasureContext<'_>, word: &AdmissibleWord) -> Result<f64, MeasureError> {
    if word.initial() != ctx.domain {
        return Err(MeasureError::WordNotAdmissibleFrom {
            domain: ctx.domain,
            word: word.key(),
        });
    }
    cylinder_measure_edges(ctx, word.edges())
}

/// [`cylinder_measure`] from raw edge indices, checking admissibility.
pub fn cylinder_measure_edges(ctx: &MeasureContext<'_>, edges: &[usize]) -> Result<f64, MeasureError> {
    let mut at = ctx.domain;
    let mut row = ctx.start_row();
    for &e in edges {
        if e >= ctx.spec.edges.len() || ctx.spec.edges[e].from != at {
            return Err(MeasureError::WordNotAdmissibleFrom {
                domain: ctx.domain,
                word: word_key(edges),
            });
        }
        row = &row * ctx.flux.matrix(e);
        at = ctx.spec.edges[e].to;
    }
    Ok(row.sum())
}

/// `μ_{i,k}` on every cylinder of depth `m`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVector {
    pub domain: usize,
    pub k: usize,
    pub depth: usize,
    pub entries: Vec<(Vec<usize>, f64)>,
}

impl MeasureVector {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn get(&self, word: &[usize]) -> Option<f64> {
        self.entries.iter().find(|(w, _)| w == word).map(|&(_, p)| p)
    }

    /// `word,probability` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,probability\n");
        for (w, p) in &self.entries {
            out.push_str(&format!("{},{}\n", word_key(w), format_17(*p)));
        }
        out
    }

    /// `(cumulative index, cumulative mass)` pairs in lexicographic word order.
    pub fn cumulative(&self) -> Vec<(usize, f64)> {
        let mut acc = 0.0;
        self.entries
            .iter()
            .enumerate()
            .map(|(x, (_, p))| {
                acc += p;
                (x + 1, acc)
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "domain": self.domain + 1,
            "k": self.k + 1,
            "depth": self.depth,
            "measure": self.entries.iter().map(|(w, p)| json!({"word": word_key(w), "probability": number(*p)})).collect::<Vec<_>>(),
            "total": number(self.total()),
            "cumulative": self.cumulative().into_iter().map(|(x, c)| json!([x, number(c)])).collect::<Vec<_>>(),
        })
    }
}

pub fn measure_vector(ctx: &MeasureContext<'_>, m: usize) -> Result<MeasureVector, MeasureError> {
    let count = crate::bgd::count_words(ctx.spec, ctx.domain, m);
    if count > crate::bgd::WORD_CAP as u128 {
        return Err(BgdError::CountOverflow {
            cap: crate::bgd::WORD_CAP,
        }
        .into());
    }
    let mut entries = Vec::with_capacity(count as usize);
    walk_rows(ctx.spec, ctx.flux, ctx.domain, ctx.start_row(), m, &mut |w, row| {
        entries.push((w.to_vec(), row.sum()));
    });
    Ok(MeasureVector {
        domain: ctx.domain,
        k: ctx.k,
        depth: m,
        entries,
    })
}

/// A function on `∂Ω_i` constant on each cylinder of depth `m0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleBoundaryFunction {
    pub domain: usize,
    pub depth: usize,
    values: HashMap<Vec<usize>, f64>,
}

impl SimpleBoundaryFunction {
    pub fn from_fn(spec: &BgdSpec, domain: usize, depth: usize, f: impl Fn(&AdmissibleWord) -> f64) -> Result<Self, MeasureError> {
        let values = enumerate_words(spec, domain, depth)?
            .into_iter()
            .map(|w| (w.edges().to_vec(), f(&w)))
            .collect();
        Ok(Self { domain, depth, values })
    }

    pub fn constant(spec: &BgdSpec, domain: usize, depth: usize, c: f64) -> Result<Self, MeasureError> {
        Self::from_fn(spec, domain, depth, |_| c)
    }

    /// From `(edge word, value)` pairs; every word of `Γ_depth(domain)` must appear.
    pub fn from_values(
        spec: &BgdSpec,
        domain: usize,
        depth: usize,
        values: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self, MeasureError> {
        let values: HashMap<Vec<usize>, f64> = values.into_iter().collect();
        for w in values.keys() {
            if w.len() != depth {
                return Err(MeasureError::DepthMismatch {
                    expected: depth,
                    found: w.len(),
                });
            }
        }
        for w in enumerate_words(spec, domain, depth)? {
            if !values.contains_key(w.edges()) {
                return Err(MeasureError::IncompleteFunction(w.key()));
            }
        }
        if values.len() != crate::bgd::count_words(spec, domain, depth) as usize {
            return Err(MeasureError::WordNotAdmissibleFrom {
                domain,
                word: "extra keys".into(),
            });
        }
        Ok(Self { domain, depth, values })
    }

    /// From a JSON object mapping dotted word keys to values.
    pub fn from_json(spec: &BgdSpec, domain: usize, depth: usize, json: &Value) -> Result<Self, MeasureError> {
        let obj = json
            .as_object()
            .ok_or_else(|| MeasureError::IncompleteFunction("expected a JSON object".into()))?;
        let mut values = Vec::new();
        for (key, v) in obj {
            let w = parse_word_key(key)?;
            let x = v
                .as_f64()
                .ok_or_else(|| MeasureError::IncompleteFunction(format!("value for {key:?} is not a number")))?;
            values.push((w, x));
        }
        Self::from_values(spec, domain, depth, values)
    }

    pub fn value(&self, word: &[usize]) -> Option<f64> {
        self.values.get(word).copied()
    }

    pub fn values(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.values.iter()
    }

    pub fn scaled(&self, lambda: f64, shift: f64) -> Self {
        Self {
            domain: self.domain,
            depth: self.depth,
            values: self.values.iter().map(|(w, v)| (w.clone(), lambda * v + shift)).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        let mut it = self.values.values();
        match it.next() {
            Some(&first) => it.all(|&v| v == first),
            None => true,
        }
    }
}

fn check_domain(ctx: &MeasureContext<'_>, f: &SimpleBoundaryFunction) -> Result<(), MeasureError> {
    if f.domain != ctx.domain {
        return Err(MeasureError::WordNotAdmissibleFrom {
            domain: ctx.domain,
            word: format!("function on domain {}", f.domain + 1),
        });
    }
    Ok(())
}

/// `u(p_k) = Σ_γ f_γ μ_{i,k}(∂Ω_γ)` for the harmonic extension `u` of `f`.
pub fn poisson_value(ctx: &MeasureContext<'_>, f: &SimpleBoundaryFunction) -> Result<f64, MeasureError> {
    check_domain(ctx, f)?;
    let mut total = 0.0;
    let mut missing = None;
    walk_rows(ctx.spec, ctx.flux, ctx.domain, ctx.start_row(), f.depth, &mut |w, row| match f.value(w) {
        Some(v) => total += v * row.sum(),
        None => missing = Some(word_key(w)),
    });
    match missing {
        Some(w) => Err(MeasureError::IncompleteFunction(w)),
        None => Ok(total),
    }
}

/// `∫ f dμ_{i,k} + Σ_x v(x)(du)_x` over `x ∈ Ω_i ∩ V_0`, where `v0_data`
/// maps `x` to `(v(x), (du)_x)`.
pub fn poisson_value_extended(
    ctx: &MeasureContext<'_>,
    f: &SimpleBoundaryFunction,
    v0_data: &BTreeMap<usize, (f64, f64)>,
) -> Result<f64, MeasureError> {
    let mut total = poisson_value(ctx, f)?;
    for &x in &ctx.spec.domains[ctx.domain].in_v0 {
        let &(v, du) = v0_data.get(&x).ok_or(MeasureError::MissingV0Data(x))?;
        total += v * du;
    }
    Ok(total)
}

/// [`poisson_value_extended`] with `v` taken from the stored unit flow.
pub fn poisson_value_with_fluxes(
    ctx: &MeasureContext<'_>,
    f: &SimpleBoundaryFunction,
    fluxes: &BTreeMap<usize, f64>,
) -> Result<f64, MeasureError> {
    let flow = ctx
        .flux
        .flow(ctx.domain, ctx.k)
        .ok_or(MeasureError::MissingV0Data(ctx.k))?;
    let data = ctx.spec.domains[ctx.domain]
        .in_v0
        .iter()
        .map(|&x| {
            let v = flow.value_at(x).ok_or(MeasureError::MissingV0Data(x))?;
            Ok((x, (v, fluxes.get(&x).copied().unwrap_or(0.0))))
        })
        .collect::<Result<BTreeMap<_, _>, MeasureError>>()?;
    poisson_value_extended(ctx, f, &data)
}

/// Largest `|μ_{i,k}(γη) − Σ_ℓ M_γ(k,ℓ) μ_{T(γ),ℓ}(η)|` over `|γη| = m`.
pub fn selfsimilar_decomposition_residual(ctx: &MeasureContext<'_>, m: usize) -> Result<f64, MeasureError> {
    decomposition_residual_between(ctx, ctx.flux, m)
}

/// As [`selfsimilar_decomposition_residual`], with the left side computed
/// from `ctx.flux` and the right side from `reference`.
pub fn decomposition_residual_between(
    ctx: &MeasureContext<'_>,
    reference: &FluxTransferSet,
    m: usize,
) -> Result<f64, MeasureError> {
    if m == 0 {
        return Err(MeasureError::DepthMismatch { expected: 1, found: 0 });
    }
    let spec = ctx.spec;
    let q = spec.hs.boundary_size();
    let mut worst = 0.0f64;
    for &g in spec.edges_from(ctx.domain) {
        let j = spec.edges[g].to;
        let first = ctx.start_row() * ctx.flux.matrix(g);
        let weights = ctx.start_row() * reference.matrix(g);
        // right side: Σ_ℓ M_γ(k,ℓ) e_ℓᵀ M_η 1, one walk per ℓ collected by word
        let mut rhs: HashMap<Vec<usize>, f64> = HashMap::new();
        for l in 0..q {
            if weights[l] == 0.0 || !spec.contains_v0(j, l) {
                continue;
            }
            let mut e_l = RowDVector::zeros(q);
            e_l[l] = 1.0;
            walk_rows(spec, reference, j, e_l, m - 1, &mut |w, row| {
                *rhs.entry(w.to_vec()).or_insert(0.0) += weights[l] * row.sum();
            });
        }
        walk_rows(spec, ctx.flux, j, first, m - 1, &mut |w, row| {
            let r = rhs.get(w).copied().unwrap_or(0.0);
            worst = worst.max((row.sum() - r).abs());
        });
    }
    Ok(worst)
}

/// Extremes of `μ_{i,k}(∂Ω_γ) / μ_{i,k'}(∂Ω_γ)` over `γ ∈ Γ_m(i)` with
/// nonzero denominator.
pub fn measure_equivalence_ratio(
    spec: &BgdSpec,
    flux: &FluxTransferSet,
    i: usize,
    k: usize,
    k2: usize,
    m: usize,
) -> Result<(f64, f64), MeasureError> {
    if spec.domains[i].in_v0.len() < 2 {
        return Err(MeasureError::NoComparablePoints(i));
    }
    let a = measure_vector(&MeasureContext::new(spec, flux, i, k)?, m)?;
    let b = measure_vector(&MeasureContext::new(spec, flux, i, k2)?, m)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ((_, x), (_, y)) in a.entries.iter().zip(&b.entries) {
        if *y != 0.0 {
            lo = lo.min(x / y);
            hi = hi.max(x / y);
        }
    }
    Ok((lo, hi))
}

/// The vector `(f_{γ,p})_p` for a cylinder `γ` with `|γ| ≤ m0`.
fn mean_vector(spec: &BgdSpec, flux: &FluxTransferSet, word: &mut Vec<usize>, at: usize, f: &SimpleBoundaryFunction) -> DVector<f64> {
    let q = spec.hs.boundary_size();
    if word.len() == f.depth {
        return DVector::from_element(q, f.value(word).unwrap_or(f64::NAN));
    }
    let mut out = DVector::zeros(q);
    for &e in spec.edges_from(at) {
        word.push(e);
        let child = mean_vector(spec, flux, word, spec.edges[e].to, f);
        word.pop();
        out += flux.matrix(e) * child;
    }
    out
}

/// `f_{γ,p} = ∫ f∘θ_γ dμ_{T(γ),p}`, by the bottom-up recursion over children.
pub fn boundary_mean(
    spec: &BgdSpec,
    flux: &FluxTransferSet,
    word: &AdmissibleWord,
    p: usize,
    f: &SimpleBoundaryFunction,
) -> Result<f64, MeasureError> {
    if word.len() > f.depth {
        return Err(MeasureError::DepthMismatch {
            expected: f.depth,
            found: word.len(),
        });
    }
    if word.initial() != f.domain {
        return Err(MeasureError::WordNotAdmissibleFrom {
            domain: f.domain,
            word: word.key(),
        });
    }
    if word.len() == f.depth {
        return f
            .value(word.edges())
            .ok_or_else(|| MeasureError::IncompleteFunction(word.key()));
    }
    if !spec.contains_v0(word.terminal(), p) {
        return Err(MeasureError::PointNotInDomain {
            domain: word.terminal(),
            k: p,
        });
    }
    let v = mean_vector(spec, flux, &mut word.edges().to_vec(), word.terminal(), f);
    Ok(v[p])
}

/// `Σ_m Σ_{γ∈Γ_m(i)} r_γ⁻¹ Σ_{ξ⁻=η⁻=γ} Σ_{p,q} (f_{ξ,p} − f_{η,q})²` over
/// `m < m0`, ordered pairs `(ξ, η)` including `ξ = η`.
pub fn energy_functional(spec: &BgdSpec, flux: &FluxTransferSet, f: &SimpleBoundaryFunction) -> Result<f64, MeasureError> {
    fn go(
        spec: &BgdSpec,
        flux: &FluxTransferSet,
        word: &AdmissibleWord,
        f: &SimpleBoundaryFunction,
        total: &mut f64,
    ) -> Result<DVector<f64>, MeasureError> {
        let q = spec.hs.boundary_size();
        if word.len() == f.depth {
            let v = f
                .value(word.edges())
                .ok_or_else(|| MeasureError::IncompleteFunction(word.key()))?;
            return Ok(DVector::from_element(q, v));
        }
        let mut children = Vec::new();
        let mut mean = DVector::zeros(q);
        for &e in spec.edges_from(word.terminal()) {
            let child = word.extend(spec, e)?;
            let v = go(spec, flux, &child, f, total)?;
            mean += flux.matrix(e) * &v;
            let points: Vec<f64> = spec.domains[child.terminal()].in_v0.iter().map(|&p| v[p]).collect();
            children.push(points);
        }
        let mut s = 0.0;
        for a in &children {
            for b in &children {
                for x in a {
                    for y in b {
                        s += (x - y) * (x - y);
                    }
                }
            }
        }
        *total += s / word.renorm();
        Ok(mean)
    }
    let mut total = 0.0;
    go(spec, flux, &AdmissibleWord::empty(spec, f.domain), f, &mut total)?;
    Ok(total)
}

/// `E_{Ω_i}[u]` for the harmonic extension `u` of `f`.
///
/// The domain is expanded to depth `m0`; every boundary cylinder becomes a
/// scaled trace copy whose own boundary node is held at `f_γ`.
pub fn harmonic_energy(spec: &BgdSpec, traces: &[DomainTrace], f: &SimpleBoundaryFunction) -> Result<f64, MeasureError> {
    harmonic_energy_capped(spec, traces, f, ENERGY_NODE_CAP)
}

pub fn harmonic_energy_capped(
    spec: &BgdSpec,
    traces: &[DomainTrace],
    f: &SimpleBoundaryFunction,
    node_cap: usize,
) -> Result<f64, MeasureError> {
    if f.depth == 0 || f.is_constant() {
        return Ok(0.0);
    }
    let mut exp = Expansion::new(spec, f.domain, f.depth, node_cap)?;
    let mut pinned = vec![(exp.boundary(), 0.0)];
    for x in 0..exp.leaves().len() {
        let word = exp.leaves()[x].word.clone();
        let value = f
            .value(word.edges())
            .ok_or_else(|| MeasureError::IncompleteFunction(word.key()))?;
        let sink = exp.add_node(ExpNode::LeafBoundary(x));
        exp.attach_trace(x, &traces[word.terminal()], sink)?;
        pinned.push((sink, value));
    }
    let (net, map) = exp.finish()?;
    let pinned: Vec<(usize, f64)> = pinned.into_iter().map(|(n, v)| (map[n], v)).collect();
    let u = net.dirichlet_solve(&pinned).map_err(BgdError::from)?;
    Ok(net.energy(&u).map_err(BgdError::from)?)
}

/// Extremes over nonconstant harmonic `u` on `K` of `E[u]/Σ_{p,q}|u(p)−u(q)|²`
/// and of `E[u]/Σ_p |(du)_p|²`, as `(c1, C1, c2, C2)`.
pub fn harmonic_space_diagnostics(hs: &HarmonicStructure) -> (f64, f64, f64, f64) {
    let q = hs.boundary_size();
    let mut lap = DMatrix::zeros(q, q);
    for p in 0..q {
        for r in 0..q {
            if p != r {
                let g = hs.conductance(p, r);
                lap[(p, r)] -= g;
                lap[(p, p)] += g;
            }
        }
    }
    let pairs = (DMatrix::identity(q, q) * q as f64 - DMatrix::from_element(q, q, 1.0)) * 2.0;
    let flux2 = &lap * &lap;
    // orthonormal basis of the complement of constants
    let centering = DMatrix::identity(q, q) - DMatrix::from_element(q, q, 1.0 / q as f64);
    let eig = SymmetricEigen::new(centering);
    let cols: Vec<DVector<f64>> = (0..q)
        .filter(|&c| eig.eigenvalues[c] > 0.5)
        .map(|c| eig.eigenvectors.column(c).into_owned())
        .collect();
    let basis = DMatrix::from_columns(&cols);
    let restrict = |m: &DMatrix<f64>| basis.transpose() * m * &basis;
    let e = restrict(&lap);
    let (c1, big1) = generalized_extremes(&e, &restrict(&pairs));
    let (c2, big2) = generalized_extremes(&e, &restrict(&flux2));
    (c1, big1, c2, big2)
}

/// Extremes of `xᵀAx / xᵀBx` for symmetric `A` and positive definite `B`.
fn generalized_extremes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
    let chol = b.clone().cholesky().expect("positive definite denominator form");
    let l_inv = chol.l().try_inverse().expect("invertible factor");
    let m = &l_inv * a * l_inv.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(sym).eigenvalues;
    (ev.min(), ev.max())
}
