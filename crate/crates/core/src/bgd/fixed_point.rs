//! Domain traces as the fixed point of the one-level assembly map.
//!
//! Two sequences run side by side. The short side starts with every edge
//! copy shorted into `∂` and its resistances increase; the cut side starts
//! with every edge copy replaced by its cell with the non-attachment
//! vertices grounded and its resistances decrease. Assembly and trace are
//! monotone in conductances, so the two sides bracket the limit and the gap
//! between them certifies convergence.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expand::{assemble, Assembly, CopyModel};
use super::{BgdError, BgdSpec};
use crate::network::{ElectricNetwork, NetworkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceNode {
    Boundary,
    Point(usize),
}

impl Serialize for TraceNode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TraceNode::Boundary => s.serialize_str("boundary"),
            TraceNode::Point(k) => s.collect_str(&format_args!("p{}", k + 1)),
        }
    }
}

impl<'de> Deserialize<'de> for TraceNode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "boundary" {
            return Ok(TraceNode::Boundary);
        }
        text.strip_prefix('p')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .map(|k| TraceNode::Point(k - 1))
            .ok_or_else(|| serde::de::Error::custom(format!("bad trace node {text:?}")))
    }
}

/// Reduced network of `Ω_i` on its `V_0` points and the shorted boundary.
///
/// Points listed in `shorted` coincide with `∂` (zero resistance). This only
/// occurs on the short side before the iteration has lifted them off `∂`.
#[derive(Debug, Clone)]
pub struct DomainTrace {
    pub domain: usize,
    pub network: ElectricNetwork<TraceNode>,
    pub shorted: BTreeSet<usize>,
}

impl DomainTrace {
    pub fn trivial(domain: usize) -> Self {
        let mut network = ElectricNetwork::new();
        network.add_node(TraceNode::Boundary);
        Self {
            domain,
            network,
            shorted: BTreeSet::new(),
        }
    }

    /// Traces an assembly onto `(Ω_i ∩ V_0) ∪ {∂}`.
    pub fn from_assembly(asm: &Assembly) -> Result<Self, BgdError> {
        let mut classes = vec![(TraceNode::Boundary, vec![asm.boundary])];
        let mut shorted = BTreeSet::new();
        for &(k, node) in &asm.v0_nodes {
            if node == asm.boundary {
                shorted.insert(k);
            } else {
                classes.push((TraceNode::Point(k), vec![node]));
            }
        }
        let network = asm.network.trace(&classes).map_err(|e| match e {
            NetworkError::Disconnection(_) => BgdError::DegenerateDomain(asm.domain),
            other => BgdError::Network(other),
        })?;
        Ok(Self {
            domain: asm.domain,
            network,
            shorted,
        })
    }

    fn node(&self, x: TraceNode) -> Option<usize> {
        match x {
            TraceNode::Point(k) if self.shorted.contains(&k) => self.network.index_of(&TraceNode::Boundary),
            _ => self.network.index_of(&x),
        }
    }

    /// Effective resistance between two trace nodes; `+∞` if disconnected.
    pub fn resistance(&self, a: TraceNode, b: TraceNode) -> f64 {
        match (self.node(a), self.node(b)) {
            (Some(x), Some(y)) if x == y => 0.0,
            (Some(x), Some(y)) => self
                .network
                .resistance_or_infinite(&[x], &[y])
                .unwrap_or(f64::INFINITY),
            _ => f64::NAN,
        }
    }

    /// Node list `∂, p_k…` in order; resistances over all unordered pairs.
    pub fn pair_resistances(&self, in_v0: &BTreeSet<usize>) -> Vec<f64> {
        let nodes: Vec<TraceNode> = std::iter::once(TraceNode::Boundary)
            .chain(in_v0.iter().map(|&k| TraceNode::Point(k)))
            .collect();
        let mut out = Vec::new();
        for (x, &a) in nodes.iter().enumerate() {
            for &b in &nodes[x + 1..] {
                out.push(self.resistance(a, b));
            }
        }
        out
    }

    /// `R(∂, p_k)`.
    pub fn boundary_resistance(&self, k: usize) -> f64 {
        self.resistance(TraceNode::Boundary, TraceNode::Point(k))
    }
}

/// Resistances of both sides after one iteration.
#[derive(Debug, Clone, Serialize)]
pub struct BracketStep {
    pub iteration: usize,
    pub width: f64,
    /// Per domain, pair resistances in [`DomainTrace::pair_resistances`] order.
    pub short: Vec<Vec<f64>>,
    pub cut: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct DomainTraceSet {
    /// Short-side traces, the returned approximation.
    pub traces: Vec<DomainTrace>,
    pub cut: Vec<DomainTrace>,
    pub iterations: usize,
    pub width: f64,
    pub history: Vec<BracketStep>,
}

impl DomainTraceSet {
    pub fn trace(&self, i: usize) -> &DomainTrace {
        &self.traces[i]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPointConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub record_history: bool,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            record_history: false,
        }
    }
}

fn step(spec: &BgdSpec, model: CopyModel<'_>) -> Result<Vec<DomainTrace>, BgdError> {
    (0..spec.domain_count())
        .into_par_iter()
        .map(|i| {
            if spec.domains[i].in_v0.is_empty() {
                return Ok(DomainTrace::trivial(i));
            }
            let asm = assemble(spec, i, model).map_err(|e| match e {
                BgdError::Network(NetworkError::Disconnection(_)) => BgdError::DegenerateDomain(i),
                other => other,
            })?;
            DomainTrace::from_assembly(&asm)
        })
        .collect()
}

fn bracket(spec: &BgdSpec, iteration: usize, short: &[DomainTrace], cut: &[DomainTrace]) -> BracketStep {
    let mut width = 0.0f64;
    let mut rs = Vec::new();
    let mut rc = Vec::new();
    for i in 0..spec.domain_count() {
        let a = short[i].pair_resistances(&spec.domains[i].in_v0);
        let b = cut[i].pair_resistances(&spec.domains[i].in_v0);
        for (x, y) in a.iter().zip(&b) {
            let w = if x.is_finite() && y.is_finite() {
                (x - y).abs()
            } else {
                f64::INFINITY
            };
            width = width.max(w);
        }
        rs.push(a);
        rc.push(b);
    }
    BracketStep {
        iteration,
        width,
        short: rs,
        cut: rc,
    }
}

/// Iterates the assembly map from both initializations until the
/// resistance bracket is narrower than `tol`.
pub fn domain_trace_fixed_point(spec: &BgdSpec, tol: f64, max_iter: usize) -> Result<DomainTraceSet, BgdError> {
    domain_trace_fixed_point_with(
        spec,
        FixedPointConfig {
            tol,
            max_iter,
            record_history: false,
        },
    )
}

pub fn domain_trace_fixed_point_with(spec: &BgdSpec, cfg: FixedPointConfig) -> Result<DomainTraceSet, BgdError> {
    let mut short = step(spec, CopyModel::Short)?;
    let mut cut = step(spec, CopyModel::Grounded)?;
    let mut history = Vec::new();
    let mut b = bracket(spec, 0, &short, &cut);
    let mut iterations = 0;
    loop {
        let width = b.width;
        if cfg.record_history {
            history.push(b);
        }
        if width < cfg.tol {
            return Ok(DomainTraceSet {
                traces: short,
                cut,
                iterations,
                width,
                history,
            });
        }
        if iterations >= cfg.max_iter {
            return Err(BgdError::NoConvergence {
                max_iter: cfg.max_iter,
                width,
            });
        }
        iterations += 1;
        let next_short = step(spec, CopyModel::Trace(&short))?;
        let next_cut = step(spec, CopyModel::Trace(&cut))?;
        short = next_short;
        cut = next_cut;
        b = bracket(spec, iterations, &short, &cut);
    }
}
