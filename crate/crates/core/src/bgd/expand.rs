//! Recursive expansion of a domain into full cells and boundary cylinders.
//!
//! Expanding `Ω_i` to depth `m` walks every admissible word of length `< m`:
//! full cells of the domain reached so far become scaled copies of `(V_0,
//! c0)` (exact, by compatibility), and words of length `m` become leaves
//! whose contents are supplied by the caller. Every vertex is addressed at
//! the common depth `m` so shared vertices coincide.

use serde::Serialize;

use super::fixed_point::{DomainTrace, TraceNode};
use super::words::AdmissibleWord;
use super::{BgdError, BgdSpec};
use crate::network::ElectricNetwork;
use crate::pcf::CanonicalVertex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExpNode {
    Vertex(CanonicalVertex),
    /// The shorted boundary `∂Ω_i`.
    Boundary,
    /// Absorbing class of a boundary cylinder, by position in the class list.
    Class(usize),
    /// Per-leaf boundary node of a trace copy.
    LeafBoundary(usize),
}

impl Serialize for ExpNode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExpNode::Vertex(v) => s.collect_str(v),
            ExpNode::Boundary => s.serialize_str("boundary"),
            ExpNode::Class(c) => s.collect_str(&format_args!("class{}", c + 1)),
            ExpNode::LeafBoundary(c) => s.collect_str(&format_args!("leaf{}", c + 1)),
        }
    }
}

/// A boundary cylinder at the expansion depth.
#[derive(Debug, Clone)]
pub struct Leaf {
    pub word: AdmissibleWord,
    /// `(ℓ, node)`: target-domain boundary index and the node it attaches to.
    pub ports: Vec<(usize, usize)>,
}

impl Leaf {
    /// Conductance multiplier `1/r_γ` for the leaf's copy.
    pub fn scale(&self) -> f64 {
        1.0 / self.word.renorm()
    }

    pub fn port(&self, l: usize) -> Option<usize> {
        self.ports.iter().find(|&&(x, _)| x == l).map(|&(_, n)| n)
    }
}

/// Network under construction plus its leaves.
pub struct Expansion<'a> {
    spec: &'a BgdSpec,
    domain: usize,
    depth: usize,
    net: ElectricNetwork<ExpNode>,
    leaves: Vec<Leaf>,
    merges: Vec<(usize, usize)>,
    node_cap: usize,
}

impl<'a> Expansion<'a> {
    /// Expands `Ω_i` to depth `m ≥ 1`.
    pub fn new(spec: &'a BgdSpec, i: usize, m: usize, node_cap: usize) -> Result<Self, BgdError> {
        assert!(m >= 1, "expansion depth must be at least 1");
        let mut exp = Self {
            spec,
            domain: i,
            depth: m,
            net: ElectricNetwork::new(),
            leaves: Vec::new(),
            merges: Vec::new(),
            node_cap,
        };
        exp.net.add_node(ExpNode::Boundary);
        exp.walk(AdmissibleWord::empty(spec, i))?;
        Ok(exp)
    }

    fn vertex(&mut self, letters: &[u8], point: usize) -> Result<usize, BgdError> {
        let v = self.spec.hs.structure.canonicalize_at(letters, point, self.depth);
        let id = self.net.add_node(ExpNode::Vertex(v));
        if self.net.node_count() > self.node_cap {
            return Err(BgdError::DepthOverflow {
                depth: self.depth,
                cap: self.node_cap,
            });
        }
        Ok(id)
    }

    fn add_cell(&mut self, letters: &[u8], scale: f64, map: impl Fn(usize) -> Option<usize>) -> Result<(), BgdError> {
        let q = self.spec.hs.boundary_size();
        let mut ids = Vec::with_capacity(q);
        for p in 0..q {
            ids.push(match map(p) {
                Some(n) => n,
                None => self.vertex(letters, p)?,
            });
        }
        for p in 0..q {
            for r in p + 1..q {
                let g = self.spec.hs.conductance(p, r);
                if g > 0.0 && ids[p] != ids[r] {
                    self.net.add_conductance(ids[p], ids[r], g * scale)?;
                }
            }
        }
        Ok(())
    }

    fn walk(&mut self, word: AdmissibleWord) -> Result<(), BgdError> {
        let spec = self.spec;
        let d = word.terminal();
        let sym = word.symmetry().clone();
        for &c in &spec.domains[d].full_cells {
            let letter = sym.letter(c);
            let mut letters = word.letters().to_vec();
            letters.push(letter as u8);
            let scale = 1.0 / (word.renorm() * spec.hs.renorm(letter));
            self.add_cell(&letters, scale, |_| None)?;
        }
        for &e in spec.edges_from(d) {
            let next = word.extend(spec, e)?;
            if next.len() == self.depth {
                let mut ports = Vec::new();
                for &l in &spec.domains[next.terminal()].in_v0 {
                    let node = self.vertex(next.letters(), next.symmetry().point(l))?;
                    ports.push((l, node));
                }
                self.leaves.push(Leaf { word: next, ports });
            } else {
                self.walk(next)?;
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &BgdSpec {
        self.spec
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn boundary(&self) -> usize {
        0
    }

    pub fn node_count(&self) -> usize {
        self.net.node_count()
    }

    pub fn add_node(&mut self, label: ExpNode) -> usize {
        self.net.add_node(label)
    }

    /// Node of the boundary point `p_k`, if present.
    pub fn v0_node(&self, k: usize) -> Option<usize> {
        let v = self.spec.hs.structure.canonicalize_at(&[], k, self.depth);
        self.net.index_of(&ExpNode::Vertex(v))
    }

    /// Fills leaf `x` with a scaled copy of a domain trace whose `∂` node is `sink`.
    pub fn attach_trace(&mut self, x: usize, trace: &DomainTrace, sink: usize) -> Result<(), BgdError> {
        let leaf = &self.leaves[x];
        let scale = leaf.scale();
        let t = &trace.network;
        let map: Vec<usize> = t
            .labels()
            .iter()
            .map(|label| match label {
                TraceNode::Boundary => Ok(sink),
                TraceNode::Point(l) => leaf.port(*l).ok_or(BgdError::MissingTrace(trace.domain)),
            })
            .collect::<Result<_, _>>()?;
        for (a, b, g) in t.edges() {
            if map[a] != map[b] {
                self.net.add_conductance(map[a], map[b], g * scale)?;
            }
        }
        for &l in &trace.shorted {
            let port = leaf.port(l).ok_or(BgdError::MissingTrace(trace.domain))?;
            self.merges.push((port, sink));
        }
        Ok(())
    }

    /// Fills leaf `x` with its whole cell, sending non-attachment vertices to `sink`.
    pub fn attach_grounded_cell(&mut self, x: usize, sink: usize) -> Result<(), BgdError> {
        let leaf = self.leaves[x].clone();
        let sym = leaf.word.symmetry();
        let by_point: Vec<Option<usize>> = (0..self.spec.hs.boundary_size())
            .map(|p| {
                leaf.ports
                    .iter()
                    .find(|&&(l, _)| sym.point(l) == p)
                    .map(|&(_, n)| n)
                    .or(Some(sink))
            })
            .collect();
        self.add_cell(leaf.word.letters(), leaf.scale(), |p| by_point[p])
    }

    /// Shorts the attachment vertices of leaf `x` into `sink`.
    pub fn attach_short(&mut self, x: usize, sink: usize) {
        for &(_, n) in &self.leaves[x].ports {
            self.merges.push((n, sink));
        }
    }

    /// Applies pending merges. Returns the network and the old→new node map.
    pub fn finish(self) -> Result<(ElectricNetwork<ExpNode>, Vec<usize>), BgdError> {
        let n = self.net.node_count();
        let mut target = vec![usize::MAX; n];
        let mut sinks: Vec<usize> = self.merges.iter().map(|&(_, s)| s).collect();
        sinks.sort_unstable();
        sinks.dedup();
        for &(node, sink) in &self.merges {
            if sinks.binary_search(&node).is_ok() && node != sink {
                return Err(BgdError::ClassCollision(self.net.label(node).clone().describe()));
            }
            if target[node] != usize::MAX && target[node] != sink {
                return Err(BgdError::ClassCollision(self.net.label(node).clone().describe()));
            }
            target[node] = sink;
        }
        let mut labels = Vec::new();
        let mut new_index = vec![usize::MAX; n];
        for v in 0..n {
            if target[v] == usize::MAX || target[v] == v {
                new_index[v] = labels.len();
                labels.push(self.net.label(v).clone());
            }
        }
        let assignment: Vec<usize> = (0..n)
            .map(|v| {
                if target[v] == usize::MAX || target[v] == v {
                    new_index[v]
                } else {
                    new_index[target[v]]
                }
            })
            .collect();
        let net = self.net.quotient(&labels, &assignment)?;
        Ok((net, assignment))
    }
}

impl ExpNode {
    fn describe(self) -> String {
        match self {
            ExpNode::Vertex(v) => format!("vertex {v}"),
            other => format!("{other:?}"),
        }
    }
}

/// How the edge copies of a one-level assembly are filled.
#[derive(Clone, Copy)]
pub enum CopyModel<'t> {
    /// Scaled copies of the given traces, their `∂` merged into the global `∂`.
    Trace(&'t [DomainTrace]),
    /// Attachments shorted into `∂`.
    Short,
    /// The whole cell, with vertices outside the attachment set grounded to `∂`.
    Grounded,
}

/// One-level decomposition of `Ω_i` with edge copies filled per `model`.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub domain: usize,
    pub network: ElectricNetwork<ExpNode>,
    pub boundary: usize,
    /// `(k, node)` for every `k ∈ in_v0(i)`.
    pub v0_nodes: Vec<(usize, usize)>,
    /// Per outgoing edge: edge index, scale `1/r`, `(ℓ, node)` attachments.
    pub copies: Vec<AssemblyCopy>,
}

#[derive(Debug, Clone)]
pub struct AssemblyCopy {
    pub edge: usize,
    pub target: usize,
    pub scale: f64,
    pub ports: Vec<(usize, usize)>,
}

pub fn assemble(spec: &BgdSpec, i: usize, model: CopyModel<'_>) -> Result<Assembly, BgdError> {
    if let CopyModel::Trace(traces) = model {
        if traces.len() != spec.domain_count() {
            return Err(BgdError::MissingTrace(traces.len()));
        }
    }
    let mut exp = Expansion::new(spec, i, 1, usize::MAX)?;
    let sink = exp.boundary();
    for x in 0..exp.leaves().len() {
        match model {
            CopyModel::Trace(traces) => {
                let j = exp.leaves()[x].word.terminal();
                exp.attach_trace(x, &traces[j], sink)?
            }
            CopyModel::Short => exp.attach_short(x, sink),
            CopyModel::Grounded => exp.attach_grounded_cell(x, sink)?,
        }
    }
    let mut v0 = Vec::new();
    for &k in &spec.domains[i].in_v0 {
        let node = exp.v0_node(k).ok_or_else(|| {
            BgdError::Malformed(format!("p{} declared in domain {} but absent from its cells", k + 1, i + 1))
        })?;
        v0.push((k, node));
    }
    let leaves: Vec<Leaf> = exp.leaves().to_vec();
    let (network, map) = exp.finish()?;
    let copies = leaves
        .iter()
        .map(|leaf| AssemblyCopy {
            edge: leaf.word.edges()[0],
            target: leaf.word.terminal(),
            scale: leaf.scale(),
            ports: leaf.ports.iter().map(|&(l, n)| (l, map[n])).collect(),
        })
        .collect();
    Ok(Assembly {
        domain: i,
        boundary: map[sink],
        v0_nodes: v0.into_iter().map(|(k, n)| (k, map[n])).collect(),
        network,
        copies,
    })
}

/// The one-level assembly with trace copies, as in the renormalization map.
pub fn assemble_domain_network(spec: &BgdSpec, i: usize, traces: &[DomainTrace]) -> Result<Assembly, BgdError> {
    assemble(spec, i, CopyModel::Trace(traces))
}
