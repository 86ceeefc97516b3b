use super::{BgdError, BgdSpec};
use crate::pcf::Symmetry;

/// Default cap on the number of words a single enumeration may produce.
pub const WORD_CAP: usize = 5_000_000;

/// An admissible word `γ_1…γ_m` starting at domain `initial`.
///
/// Besides the edge indices it caches the composed letter word `ω` with
/// `Φ_γ = F_ω ∘ κ`, the composed symmetry `κ`, the terminal domain and `r_γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleWord {
    edges: Vec<usize>,
    initial: usize,
    terminal: usize,
    letters: Vec<u8>,
    symmetry: Symmetry,
    renorm: f64,
}

impl AdmissibleWord {
    pub fn empty(spec: &BgdSpec, initial: usize) -> Self {
        Self {
            edges: Vec::new(),
            initial,
            terminal: initial,
            letters: Vec::new(),
            symmetry: Symmetry::identity(&spec.hs.structure),
            renorm: 1.0,
        }
    }

    pub fn new(spec: &BgdSpec, initial: usize, edges: &[usize]) -> Result<Self, BgdError> {
        let mut w = Self::empty(spec, initial);
        for &e in edges {
            w = w.extend(spec, e)?;
        }
        Ok(w)
    }

    /// `γ` followed by edge `e`.
    pub fn extend(&self, spec: &BgdSpec, e: usize) -> Result<Self, BgdError> {
        let edge = spec.edges.get(e).ok_or(BgdError::WordNotAdmissible {
            domain: self.initial,
            detail: format!("edge {} does not exist", e + 1),
        })?;
        if edge.from != self.terminal {
            return Err(BgdError::WordNotAdmissible {
                domain: self.initial,
                detail: format!(
                    "edge {} starts at domain {}, previous edge ends at domain {}",
                    e + 1,
                    edge.from + 1,
                    self.terminal + 1
                ),
            });
        }
        let letter = self.symmetry.letter(edge.letter);
        let mut edges = self.edges.clone();
        edges.push(e);
        let mut letters = self.letters.clone();
        letters.push(letter as u8);
        Ok(Self {
            edges,
            initial: self.initial,
            terminal: edge.to,
            letters,
            symmetry: self.symmetry.compose(spec.edge_symmetry(e)),
            renorm: self.renorm * spec.hs.renorm(letter),
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn terminal(&self) -> usize {
        self.terminal
    }

    /// Letter word `ω` with `Φ_γ = F_ω ∘ κ_γ`.
    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn symmetry(&self) -> &Symmetry {
        &self.symmetry
    }

    /// `r_γ`, the product of the renormalization factors along the word.
    pub fn renorm(&self) -> f64 {
        self.renorm
    }

    /// Dotted 1-based key, `""` for the empty word.
    pub fn key(&self) -> String {
        word_key(&self.edges)
    }

    /// The first `n` edges.
    pub fn truncate(&self, spec: &BgdSpec, n: usize) -> Self {
        Self::new(spec, self.initial, &self.edges[..n.min(self.len())]).expect("prefix of an admissible word")
    }
}

pub fn word_key(edges: &[usize]) -> String {
    edges.iter().map(|e| (e + 1).to_string()).collect::<Vec<_>>().join(".")
}

/// Parses a dotted 1-based key into 0-based edge indices.
pub fn parse_word_key(key: &str) -> Result<Vec<usize>, BgdError> {
    let key = key.trim();
    if key.is_empty() {
        return Ok(Vec::new());
    }
    key.split('.')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .and_then(|x| x.checked_sub(1))
                .ok_or_else(|| BgdError::Malformed(format!("bad word key {key:?}")))
        })
        .collect()
}

/// All of `Γ_m(i)` in lexicographic edge order.
pub fn enumerate_words(spec: &BgdSpec, i: usize, m: usize) -> Result<Vec<AdmissibleWord>, BgdError> {
    enumerate_words_capped(spec, i, m, WORD_CAP)
}

pub fn enumerate_words_capped(spec: &BgdSpec, i: usize, m: usize, cap: usize) -> Result<Vec<AdmissibleWord>, BgdError> {
    let mut level = vec![AdmissibleWord::empty(spec, i)];
    for _ in 0..m {
        let mut next = Vec::new();
        for w in &level {
            for &e in spec.edges_from(w.terminal()) {
                if next.len() >= cap {
                    return Err(BgdError::CountOverflow { cap });
                }
                next.push(w.extend(spec, e)?);
            }
        }
        level = next;
    }
    Ok(level)
}

/// `|Γ_m(i)|` without materializing the words.
pub fn count_words(spec: &BgdSpec, i: usize, m: usize) -> u128 {
    let p = spec.domain_count();
    let mut counts = vec![0u128; p];
    counts[i] = 1;
    for _ in 0..m {
        let mut next = vec![0u128; p];
        for (j, &c) in counts.iter().enumerate() {
            for &e in spec.edges_from(j) {
                next[spec.edges[e].to] = next[spec.edges[e].to].saturating_add(c);
            }
        }
        counts = next;
    }
    counts.into_iter().fold(0u128, |a, b| a.saturating_add(b))
}
