use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::expand::{assemble_domain_network, Assembly};
use super::fixed_point::{DomainTrace, TraceNode};
use super::{BgdError, BgdSpec};
use crate::json::number;

/// Unit flow from `∂Ω_i` to `p_k`: its resistance and the normalized
/// potential `v` (with `(dv)_{p_k} = 1`) at every `V_0` point of `Ω_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitFlow {
    pub domain: usize,
    pub k: usize,
    pub resistance: f64,
    pub v0_values: Vec<(usize, f64)>,
}

impl UnitFlow {
    pub fn value_at(&self, x: usize) -> Option<f64> {
        self.v0_values.iter().find(|&&(p, _)| p == x).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxTransferSet {
    /// `M_γ`, indexed by edge.
    pub matrices: Vec<DMatrix<f64>>,
    pub flows: Vec<UnitFlow>,
}

impl FluxTransferSet {
    pub fn matrix(&self, e: usize) -> &DMatrix<f64> {
        &self.matrices[e]
    }

    pub fn flow(&self, i: usize, k: usize) -> Option<&UnitFlow> {
        self.flows.iter().find(|f| f.domain == i && f.k == k)
    }

    /// `Σ_{γ∈Γ(i)} Σ_ℓ M_γ(k,ℓ)`, which equals 1 for `p_k ∈ Ω_i`.
    pub fn row_sum(&self, spec: &BgdSpec, i: usize, k: usize) -> f64 {
        spec.edges_from(i).iter().map(|&e| self.matrices[e].row(k).sum()).sum()
    }

    /// JSON array of `{edge, from, to, letter, matrix}` with 1-based indices
    /// and 17 significant digits.
    pub fn to_json(&self, spec: &BgdSpec) -> Value {
        Value::Array(
            self.matrices
                .iter()
                .enumerate()
                .map(|(e, m)| {
                    let rows: Vec<Value> = (0..m.nrows())
                        .map(|r| Value::Array((0..m.ncols()).map(|c| number(m[(r, c)])).collect()))
                        .collect();
                    json!({
                        "edge": e + 1,
                        "from": spec.edges[e].from + 1,
                        "to": spec.edges[e].to + 1,
                        "letter": spec.edges[e].letter + 1,
                        "matrix": rows,
                    })
                })
                .collect(),
        )
    }
}

struct Entry {
    edge: usize,
    k: usize,
    l: usize,
    value: f64,
}

/// Builds every `M_γ` from converged domain traces.
///
/// For each `p_k ∈ Ω_i` the potential `φ` with `φ(∂) = 0`, `φ(p_k) = 1` is
/// solved on the one-level assembly and normalized to unit outflow at
/// `p_k`. `M_γ(k,ℓ)` is the flux of that potential out of the copy of
/// `Ω_{T(γ)}` through its attachment for `p_ℓ`, counted over the copy's own
/// conductances only.
pub fn flux_transfer_matrices(spec: &BgdSpec, traces: &[DomainTrace]) -> Result<FluxTransferSet, BgdError> {
    let q = spec.hs.boundary_size();
    let per_domain: Vec<(Vec<Entry>, Vec<UnitFlow>)> = (0..spec.domain_count())
        .into_par_iter()
        .map(|i| domain_fluxes(spec, traces, i))
        .collect::<Result<_, _>>()?;
    let mut matrices = vec![DMatrix::zeros(q, q); spec.edges.len()];
    let mut flows = Vec::new();
    for (entries, f) in per_domain {
        for x in entries {
            matrices[x.edge][(x.k, x.l)] = x.value;
        }
        flows.extend(f);
    }
    Ok(FluxTransferSet { matrices, flows })
}

fn domain_fluxes(spec: &BgdSpec, traces: &[DomainTrace], i: usize) -> Result<(Vec<Entry>, Vec<UnitFlow>), BgdError> {
    if spec.domains[i].in_v0.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let asm = assemble_domain_network(spec, i, traces)?;
    let mut entries = Vec::new();
    let mut flows = Vec::new();
    for &(k, node) in &asm.v0_nodes {
        if node == asm.boundary {
            return Err(BgdError::DegenerateDomain(i));
        }
        let phi = asm.network.dirichlet_solve(&[(asm.boundary, 0.0), (node, 1.0)])?;
        let d = asm.network.neumann_derivative(&phi, node)?;
        let v: Vec<f64> = phi.iter().map(|x| x / d).collect();
        for copy in &asm.copies {
            let t = &traces[copy.target];
            for &(l, a) in &copy.ports {
                entries.push(Entry {
                    edge: copy.edge,
                    k,
                    l,
                    value: copy_flux(&asm, copy, t, l, a, &v)?,
                });
            }
        }
        flows.push(UnitFlow {
            domain: i,
            k,
            resistance: 1.0 / d,
            v0_values: asm.v0_nodes.iter().map(|&(x, n)| (x, v[n])).collect(),
        });
    }
    Ok((entries, flows))
}

fn copy_flux(
    asm: &Assembly,
    copy: &super::expand::AssemblyCopy,
    t: &DomainTrace,
    l: usize,
    a: usize,
    v: &[f64],
) -> Result<f64, BgdError> {
    let missing = || BgdError::MissingTrace(t.domain);
    let local = t.network.index_of(&TraceNode::Point(l)).ok_or_else(missing)?;
    let mut flux = 0.0;
    for (q, g) in t.network.neighbors(local) {
        let other = match *t.network.label(q) {
            TraceNode::Boundary => asm.boundary,
            TraceNode::Point(m) => copy
                .ports
                .iter()
                .find(|&&(x, _)| x == m)
                .map(|&(_, n)| n)
                .ok_or_else(missing)?,
        };
        flux += g * copy.scale * (v[a] - v[other]);
    }
    Ok(flux)
}
