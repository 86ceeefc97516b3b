//! Independent checks of the flux-matrix pipeline.
//!
//! An approximate domain network expands `Ω_i` to depth `n` and closes every
//! depth-`n` boundary cylinder either by shorting its attachments into the
//! absorbing class of its depth-`m` ancestor (short mode) or by grounding
//! the rest of its cell into that class (cut mode). Full cells are exact,
//! so the only error comes from the depth-`n` cylinders. Hitting
//! probabilities are then read off by direct elimination or estimated by
//! seeded random walks.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bgd::{enumerate_words, BgdError, BgdSpec, ExpNode, Expansion, FluxTransferSet};
use crate::json::format_17;
use crate::measure::{cylinder_measure_edges, MeasureContext, MeasureError};
use crate::network::{ElectricNetwork, NetworkError};

/// Default node cap for approximate networks.
pub const NODE_CAP: usize = 2_000_000;

/// Safety cap on the length of a single walk.
pub const STEP_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("need 1 <= m <= n, got m = {m}, n = {n}")]
    InvalidDepths { m: usize, n: usize },
    #[error("approximate network at depth {depth} exceeds the node cap {cap}")]
    DepthOverflow { depth: usize, cap: usize },
    #[error("approximate network is disconnected")]
    DisconnectedApproximation,
    #[error("p{} is not a boundary point of domain {}", .k + 1, .domain + 1)]
    PointNotInDomain { domain: usize, k: usize },
    #[error("walker {walker} exceeded {cap} steps")]
    CapHit { walker: u64, cap: u64 },
    #[error("walker count must be positive")]
    NoWalkers,
    #[error("short mode is ambiguous here: {0}")]
    AmbiguousClasses(String),
    #[error(transparent)]
    Bgd(#[from] BgdError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl From<NetworkError> for OracleError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Disconnection(_) => OracleError::DisconnectedApproximation,
            other => OracleError::Bgd(BgdError::Network(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxMode {
    Short,
    Cut,
}

impl std::fmt::Display for ApproxMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ApproxMode::Short => "short",
            ApproxMode::Cut => "cut",
        })
    }
}

/// Depth-`n` network of `Ω_i` with one absorbing node per cylinder of `Γ_m(i)`.
#[derive(Debug, Clone)]
pub struct ApproxDomainNetwork {
    pub domain: usize,
    pub depth: usize,
    pub class_depth: usize,
    pub mode: ApproxMode,
    pub network: ElectricNetwork<ExpNode>,
    /// Words of `Γ_m(i)` in lexicographic order, as edge indices.
    pub classes: Vec<Vec<usize>>,
    pub class_nodes: Vec<usize>,
    pub v0_nodes: Vec<(usize, usize)>,
}

impl ApproxDomainNetwork {
    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    fn start(&self, k: usize) -> Result<usize, OracleError> {
        self.v0_nodes
            .iter()
            .find(|&&(x, _)| x == k)
            .map(|&(_, n)| n)
            .ok_or(OracleError::PointNotInDomain { domain: self.domain, k })
    }
}

pub fn build_approx_network(
    spec: &BgdSpec,
    i: usize,
    n: usize,
    m: usize,
    mode: ApproxMode,
) -> Result<ApproxDomainNetwork, OracleError> {
    build_approx_network_capped(spec, i, n, m, mode, NODE_CAP)
}

pub fn build_approx_network_capped(
    spec: &BgdSpec,
    i: usize,
    n: usize,
    m: usize,
    mode: ApproxMode,
    node_cap: usize,
) -> Result<ApproxDomainNetwork, OracleError> {
    if m == 0 || m > n {
        return Err(OracleError::InvalidDepths { m, n });
    }
    let mut exp = Expansion::new(spec, i, n, node_cap).map_err(|e| match e {
        BgdError::DepthOverflow { depth, cap } => OracleError::DepthOverflow { depth, cap },
        other => other.into(),
    })?;
    let classes: Vec<Vec<usize>> = enumerate_words(spec, i, m)?
        .into_iter()
        .map(|w| w.edges().to_vec())
        .collect();
    let index: HashMap<&[usize], usize> = classes.iter().enumerate().map(|(c, w)| (w.as_slice(), c)).collect();
    let class_nodes: Vec<usize> = (0..classes.len()).map(|c| exp.add_node(ExpNode::Class(c))).collect();
    for x in 0..exp.leaves().len() {
        let c = index[&exp.leaves()[x].word.edges()[..m]];
        match mode {
            ApproxMode::Short => exp.attach_short(x, class_nodes[c]),
            ApproxMode::Cut => exp.attach_grounded_cell(x, class_nodes[c])?,
        }
    }
    let v0: Vec<(usize, usize)> = spec.domains[i]
        .in_v0
        .iter()
        .filter_map(|&k| exp.v0_node(k).map(|n| (k, n)))
        .collect();
    if exp.node_count() > node_cap {
        return Err(OracleError::DepthOverflow { depth: n, cap: node_cap });
    }
    let (mut network, map) = exp.finish().map_err(|e| match e {
        BgdError::ClassCollision(v) => OracleError::AmbiguousClasses(v),
        other => other.into(),
    })?;
    // drop the unused global boundary node, left isolated by construction
    let boundary = map[0];
    if network.neighbors(boundary).next().is_none() {
        let labels: Vec<ExpNode> = network
            .labels()
            .iter()
            .enumerate()
            .filter(|&(x, _)| x != boundary)
            .map(|(_, l)| l.clone())
            .collect();
        let assign: Vec<usize> = (0..network.node_count())
            .map(|x| if x < boundary { x } else { x.saturating_sub(1) })
            .collect();
        // the isolated node has no edges, so its assignment is irrelevant
        network = network.quotient(&labels, &assign)?;
    }
    let relabel = |old: usize| {
        let mid = map[old];
        if mid > boundary {
            mid - 1
        } else {
            mid
        }
    };
    Ok(ApproxDomainNetwork {
        domain: i,
        depth: n,
        class_depth: m,
        mode,
        class_nodes: class_nodes.iter().map(|&c| relabel(c)).collect(),
        v0_nodes: v0.into_iter().map(|(k, x)| (k, relabel(x))).collect(),
        classes,
        network,
    })
}

/// Probability that the walk from `p_k` is absorbed in each class.
pub fn direct_hitting(approx: &ApproxDomainNetwork, k: usize) -> Result<Vec<f64>, OracleError> {
    let start = approx.start(k)?;
    if let Some(c) = approx.class_nodes.iter().position(|&x| x == start) {
        let mut out = vec![0.0; approx.classes.len()];
        out[c] = 1.0;
        return Ok(out);
    }
    let mut kept = vec![(usize::MAX, vec![start])];
    kept.extend(approx.class_nodes.iter().enumerate().map(|(c, &x)| (c, vec![x])));
    let t = approx.network.trace(&kept)?;
    let g: Vec<f64> = (1..=approx.classes.len()).map(|c| t.conductance(0, c)).collect();
    let total: f64 = g.iter().sum();
    if total <= 0.0 {
        return Err(OracleError::DisconnectedApproximation);
    }
    Ok(g.into_iter().map(|x| x / total).collect())
}

/// Value at `p_k` of the solution pinned to `class_values` on the classes
/// with prescribed Neumann data `sources` at the `V_0` points.
pub fn direct_solve(
    approx: &ApproxDomainNetwork,
    k: usize,
    class_values: &[f64],
    sources: &BTreeMap<usize, f64>,
) -> Result<f64, OracleError> {
    let start = approx.start(k)?;
    let boundary: Vec<(usize, f64)> = approx
        .class_nodes
        .iter()
        .zip(class_values)
        .map(|(&n, &v)| (n, v))
        .collect();
    let mut b = vec![0.0; approx.network.node_count()];
    for (&x, &du) in sources {
        let node = approx.start(x)?;
        b[node] += du;
    }
    let u = approx.network.dirichlet_solve_with_sources(&boundary, &b)?;
    Ok(u[start])
}

#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub seed: u64,
    pub walkers: u64,
}

/// Empirical class frequency and its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
}

/// `W` independent walks from `p_k`; walker `w` draws from the ChaCha8
/// stream `w` of `seed`, so results do not depend on scheduling.
pub fn random_walk_hitting(approx: &ApproxDomainNetwork, cfg: WalkConfig, k: usize) -> Result<Vec<WalkEstimate>, OracleError> {
    random_walk_hitting_capped(approx, cfg, k, STEP_CAP)
}

pub fn random_walk_hitting_capped(
    approx: &ApproxDomainNetwork,
    cfg: WalkConfig,
    k: usize,
    step_cap: u64,
) -> Result<Vec<WalkEstimate>, OracleError> {
    if cfg.walkers == 0 {
        return Err(OracleError::NoWalkers);
    }
    let start = approx.start(k)?;
    let net = &approx.network;
    let n = net.node_count();
    let mut absorbing = vec![usize::MAX; n];
    for (c, &x) in approx.class_nodes.iter().enumerate() {
        absorbing[x] = c;
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::new();
    let mut cumulative = Vec::new();
    offsets.push(0);
    for v in 0..n {
        let mut acc = 0.0;
        for (w, g) in net.neighbors(v) {
            acc += g;
            targets.push(w);
            cumulative.push(acc);
        }
        offsets.push(targets.len());
    }
    let classes = approx.classes.len();
    let walk = |w: u64| -> Result<usize, OracleError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(w);
        let mut at = start;
        let mut steps = 0u64;
        while absorbing[at] == usize::MAX {
            if steps >= step_cap {
                return Err(OracleError::CapHit { walker: w, cap: step_cap });
            }
            let (lo, hi) = (offsets[at], offsets[at + 1]);
            if lo == hi {
                return Err(OracleError::DisconnectedApproximation);
            }
            let u = rng.random::<f64>() * cumulative[hi - 1];
            let pick = lo + cumulative[lo..hi].partition_point(|&c| c <= u).min(hi - lo - 1);
            at = targets[pick];
            steps += 1;
        }
        Ok(absorbing[at])
    };
    let counts = (0..cfg.walkers)
        .into_par_iter()
        .map(|w| {
            walk(w).map(|c| {
                let mut v = vec![0u64; classes];
                v[c] = 1;
                v
            })
        })
        .try_reduce(
            || vec![0u64; classes],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    let total = cfg.walkers as f64;
    Ok(counts
        .into_iter()
        .map(|h| {
            let p = h as f64 / total;
            WalkEstimate {
                estimate: p,
                stderr: (p * (1.0 - p) / total).sqrt(),
                hits: h,
            }
        })
        .collect())
}

/// One row of a convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mode: ApproxMode,
    pub max_discrepancy: f64,
    pub node_count: usize,
    pub solve_ms: f64,
}

/// Per `n` and mode, the largest gap between direct hitting on the depth-`n`
/// network and the matrix-product measure over `Γ_m(i)`. A short-mode row
/// whose cylinders share an attachment across classes is reported as NaN.
pub fn richardson_report(
    spec: &BgdSpec,
    flux: &FluxTransferSet,
    i: usize,
    k: usize,
    m: usize,
    n_list: &[usize],
) -> Result<Vec<ConvergenceRow>, OracleError> {
    let ctx = MeasureContext::new(spec, flux, i, k)?;
    let mut rows = Vec::new();
    for &n in n_list {
        for mode in [ApproxMode::Short, ApproxMode::Cut] {
            let t = Instant::now();
            let approx = match build_approx_network(spec, i, n, m, mode) {
                Ok(a) => a,
                Err(OracleError::AmbiguousClasses(_)) => {
                    rows.push(ConvergenceRow {
                        n,
                        mode,
                        max_discrepancy: f64::NAN,
                        node_count: 0,
                        solve_ms: 0.0,
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let hits = direct_hitting(&approx, k)?;
            let solve_ms = t.elapsed().as_secs_f64() * 1e3;
            let mut worst = 0.0f64;
            for (w, h) in approx.classes.iter().zip(&hits) {
                worst = worst.max((h - cylinder_measure_edges(&ctx, w)?).abs());
            }
            rows.push(ConvergenceRow {
                n,
                mode,
                max_discrepancy: worst,
                node_count: approx.node_count(),
                solve_ms,
            });
        }
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,mode,max_discrepancy,node_count,solve_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.3}\n",
            r.n,
            r.mode,
            format_17(r.max_discrepancy),
            r.node_count,
            r.solve_ms
        ));
    }
    out
}
