//! Finite electric networks.
//!
//! A network is a finite set of labelled nodes with symmetric nonnegative
//! conductances. Every reduction here (trace onto a kept set, Dirichlet
//! solves, effective resistances) runs through one elimination engine: a
//! node is removed by the star-mesh transform, which is Gaussian elimination
//! on the weighted Laplacian. The transform only ever adds and multiplies
//! positive numbers, so it is free of cancellation; this is what lets the
//! renormalization fixed point reach bracket widths near machine precision.
//!
//! Elimination order is minimum neighbor count with ties broken by node
//! index, which keeps fill low on the tree-like graphs produced by
//! self-similar expansions and makes every result bit-reproducible.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// Conductances below this value after a reduction are dropped.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// Default relative residual target for Dirichlet solves.
pub const SOLVE_TOLERANCE: f64 = 1e-12;

const REFINEMENT_STEPS: usize = 3;

/// A function on the nodes of a network, indexed like the network's nodes.
pub type Potential = Vec<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("conductance {value} between nodes {a} and {b} is negative or not finite")]
    InvalidConductance { a: usize, b: usize, value: f64 },
    #[error("self-loop requested at node {0}")]
    SelfLoop(usize),
    #[error("node index {0} out of range")]
    UnknownNode(usize),
    #[error("eliminated component containing node {0} touches no kept node")]
    Disconnection(usize),
    #[error("boundary set is empty")]
    EmptyBoundary,
    #[error("node classes must be nonempty and pairwise disjoint")]
    InvalidClasses,
    #[error("relative residual {residual:e} above solver tolerance {tolerance:e}")]
    SolveFailure { residual: f64, tolerance: f64 },
    #[error("potential has {got} entries but the network has {expected} nodes")]
    PotentialLength { expected: usize, got: usize },
}

/// Weighted undirected graph with symmetric conductances and zero diagonal.
#[derive(Debug, Clone)]
pub struct ElectricNetwork<L> {
    labels: Vec<L>,
    index: HashMap<L, usize>,
    adjacency: Vec<BTreeMap<usize, f64>>,
}

impl<L: Clone + Eq + Hash> Default for ElectricNetwork<L> {
    fn default() -> Self {
        Self::new()
    }
}

impl<L: Clone + Eq + Hash> ElectricNetwork<L> {
    pub fn new() -> Self {
        Self {
            labels: Vec::new(),
            index: HashMap::new(),
            adjacency: Vec::new(),
        }
    }

    /// Adds a node, or returns the index of an existing node with this label.
    pub fn add_node(&mut self, label: L) -> usize {
        if let Some(&i) = self.index.get(&label) {
            return i;
        }
        let i = self.labels.len();
        self.index.insert(label.clone(), i);
        self.labels.push(label);
        self.adjacency.push(BTreeMap::new());
        i
    }

    /// Adds `g` to the conductance between nodes `a` and `b`.
    pub fn add_conductance(&mut self, a: usize, b: usize, g: f64) -> Result<(), NetworkError> {
        let n = self.labels.len();
        if a >= n {
            return Err(NetworkError::UnknownNode(a));
        }
        if b >= n {
            return Err(NetworkError::UnknownNode(b));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(NetworkError::InvalidConductance { a, b, value: g });
        }
        if a == b {
            return Err(NetworkError::SelfLoop(a));
        }
        if g == 0.0 {
            return Ok(());
        }
        *self.adjacency[a].entry(b).or_insert(0.0) += g;
        *self.adjacency[b].entry(a).or_insert(0.0) += g;
        Ok(())
    }

    /// Label-based convenience: adds both nodes if needed, then the conductance.
    pub fn connect(&mut self, a: L, b: L, g: f64) -> Result<(), NetworkError> {
        let i = self.add_node(a);
        let j = self.add_node(b);
        self.add_conductance(i, j, g)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &L {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &L) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn conductance(&self, a: usize, b: usize) -> f64 {
        self.adjacency[a].get(&b).copied().unwrap_or(0.0)
    }

    /// Neighbors of `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[i].iter().map(|(&j, &g)| (j, g))
    }

    /// Total conductance at node `i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.adjacency[i].values().sum()
    }

    /// Each edge once, as `(a, b, g)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, row) in self.adjacency.iter().enumerate() {
            for (&b, &g) in row.range(a + 1..) {
                out.push((a, b, g));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|r| r.len()).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.adjacency[v].keys() {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    fn check_len(&self, u: &[f64]) -> Result<(), NetworkError> {
        if u.len() != self.node_count() {
            return Err(NetworkError::PotentialLength {
                expected: self.node_count(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `½ Σ_{p,q} g(p,q) (u(p) − u(q))²`.
    pub fn energy(&self, u: &[f64]) -> Result<f64, NetworkError> {
        self.check_len(u)?;
        Ok(self
            .edges()
            .into_iter()
            .map(|(a, b, g)| g * (u[a] - u[b]).powi(2))
            .sum())
    }

    /// Neumann derivative `(du)_p = Σ_q g(p,q) (u(p) − u(q))`.
    pub fn neumann_derivative(&self, u: &[f64], p: usize) -> Result<f64, NetworkError> {
        self.check_len(u)?;
        if p >= self.node_count() {
            return Err(NetworkError::UnknownNode(p));
        }
        Ok(self.adjacency[p].iter().map(|(&q, &g)| g * (u[p] - u[q])).sum())
    }

    /// Merges nodes into classes. `assignment[v]` names the class of node
    /// `v`; conductances between nodes of the same class disappear.
    pub fn quotient<C: Clone + Eq + Hash>(
        &self,
        class_labels: &[C],
        assignment: &[usize],
    ) -> Result<ElectricNetwork<C>, NetworkError> {
        if assignment.len() != self.node_count() {
            return Err(NetworkError::PotentialLength {
                expected: self.node_count(),
                got: assignment.len(),
            });
        }
        let mut out = ElectricNetwork::new();
        for c in class_labels {
            out.add_node(c.clone());
        }
        if out.node_count() != class_labels.len() {
            return Err(NetworkError::InvalidClasses);
        }
        for (a, b, g) in self.edges() {
            let (ca, cb) = (assignment[a], assignment[b]);
            if ca >= class_labels.len() {
                return Err(NetworkError::UnknownNode(ca));
            }
            if cb >= class_labels.len() {
                return Err(NetworkError::UnknownNode(cb));
            }
            if ca != cb {
                out.add_conductance(ca, cb, g)?;
            }
        }
        Ok(out)
    }

    /// Trace onto a partition of kept nodes into shorted classes.
    ///
    /// Each entry of `classes` is a new node label together with the
    /// original nodes held at a common potential. Every node not listed is
    /// eliminated. The returned network's energy of a class potential equals
    /// the minimal energy of extensions that are constant on each class.
    pub fn trace<C: Clone + Eq + Hash>(
        &self,
        classes: &[(C, Vec<usize>)],
    ) -> Result<ElectricNetwork<C>, NetworkError> {
        let n = self.node_count();
        let k = classes.len();
        let mut slot = vec![usize::MAX; n];
        for (c, (_, members)) in classes.iter().enumerate() {
            if members.is_empty() {
                return Err(NetworkError::InvalidClasses);
            }
            for &v in members {
                if v >= n {
                    return Err(NetworkError::UnknownNode(v));
                }
                if slot[v] != usize::MAX {
                    return Err(NetworkError::InvalidClasses);
                }
                slot[v] = c;
            }
        }
        let mut next = k;
        for s in slot.iter_mut() {
            if *s == usize::MAX {
                *s = next;
                next += 1;
            }
        }
        let mut adjacency = vec![BTreeMap::new(); next];
        for (a, b, g) in self.edges() {
            let (sa, sb) = (slot[a], slot[b]);
            if sa != sb {
                *adjacency[sa].entry(sb).or_insert(0.0) += g;
                *adjacency[sb].entry(sa).or_insert(0.0) += g;
            }
        }
        let keep: Vec<bool> = (0..next).map(|s| s < k).collect();
        let reduced = eliminate(adjacency, &keep)?;

        let mut out = ElectricNetwork::new();
        for (label, _) in classes {
            out.add_node(label.clone());
        }
        if out.node_count() != k {
            return Err(NetworkError::InvalidClasses);
        }
        for a in 0..k {
            for (&b, &g) in reduced.adjacency[a].range(a + 1..k) {
                if g >= DROP_TOLERANCE {
                    out.add_conductance(a, b, g)?;
                }
            }
        }
        Ok(out)
    }

    /// Trace onto a set of kept nodes without shorting.
    pub fn trace_onto(&self, kept: &[usize]) -> Result<ElectricNetwork<L>, NetworkError> {
        let classes: Vec<(L, Vec<usize>)> = kept
            .iter()
            .map(|&v| {
                if v >= self.node_count() {
                    Err(NetworkError::UnknownNode(v))
                } else {
                    Ok((self.labels[v].clone(), vec![v]))
                }
            })
            .collect::<Result<_, _>>()?;
        self.trace(&classes)
    }

    /// Effective resistance between two disjoint node classes.
    pub fn effective_resistance(&self, a: &[usize], b: &[usize]) -> Result<f64, NetworkError> {
        let reduced = self.trace(&[(0u8, a.to_vec()), (1u8, b.to_vec())])?;
        let g = reduced.conductance(0, 1);
        if g > 0.0 {
            Ok(1.0 / g)
        } else {
            Err(NetworkError::Disconnection(a[0]))
        }
    }

    /// Like [`effective_resistance`](Self::effective_resistance), but a
    /// disconnected pair yields `+∞` instead of an error.
    pub fn resistance_or_infinite(&self, a: &[usize], b: &[usize]) -> Result<f64, NetworkError> {
        match self.effective_resistance(a, b) {
            Ok(r) => Ok(r),
            Err(NetworkError::Disconnection(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    /// Harmonic extension of boundary values.
    pub fn dirichlet_solve(&self, boundary: &[(usize, f64)]) -> Result<Potential, NetworkError> {
        self.dirichlet_solve_with_sources(boundary, &vec![0.0; self.node_count()])
    }

    /// Solves `(du)_p = sources[p]` at interior nodes with `u` fixed on the
    /// boundary. Interior nodes with zero source are harmonic.
    pub fn dirichlet_solve_with_sources(
        &self,
        boundary: &[(usize, f64)],
        sources: &[f64],
    ) -> Result<Potential, NetworkError> {
        self.dirichlet_solve_to(boundary, sources, SOLVE_TOLERANCE)
    }

    pub fn dirichlet_solve_to(
        &self,
        boundary: &[(usize, f64)],
        sources: &[f64],
        tolerance: f64,
    ) -> Result<Potential, NetworkError> {
        let n = self.node_count();
        self.check_len(sources)?;
        if boundary.is_empty() {
            return Err(NetworkError::EmptyBoundary);
        }
        let mut keep = vec![false; n];
        let mut u = vec![0.0; n];
        for &(v, value) in boundary {
            if v >= n {
                return Err(NetworkError::UnknownNode(v));
            }
            keep[v] = true;
            u[v] = value;
        }
        let reduced = eliminate(self.adjacency.clone(), &keep)?;
        substitute(&reduced.records, &mut u, sources.to_vec());

        for _ in 0..=REFINEMENT_STEPS {
            let (residual, relative) = self.residual(&u, sources, &keep);
            if relative <= tolerance {
                return Ok(u);
            }
            let mut correction = vec![0.0; n];
            substitute(&reduced.records, &mut correction, residual);
            for (x, d) in u.iter_mut().zip(&correction) {
                *x += d;
            }
        }
        let (_, relative) = self.residual(&u, sources, &keep);
        if relative <= tolerance {
            Ok(u)
        } else {
            Err(NetworkError::SolveFailure {
                residual: relative,
                tolerance,
            })
        }
    }

    fn residual(&self, u: &[f64], sources: &[f64], keep: &[bool]) -> (Vec<f64>, f64) {
        let scale_u = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        let mut r = vec![0.0; u.len()];
        for p in 0..u.len() {
            if keep[p] {
                continue;
            }
            let flux: f64 = self.adjacency[p].iter().map(|(&q, &g)| g * (u[p] - u[q])).sum();
            r[p] = sources[p] - flux;
            worst = worst.max(r[p].abs());
            scale = scale.max(self.degree(p) * scale_u + sources[p].abs());
        }
        let relative = if scale > 0.0 { worst / scale } else { worst };
        (r, relative)
    }
}

impl<L: Clone + Eq + Hash + Serialize> ElectricNetwork<L> {
    /// `{"nodes": [..], "edges": [[p, q, g], ..]}` with labels as endpoints.
    pub fn to_json(&self) -> NetworkJson<L> {
        NetworkJson {
            nodes: self.labels.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b, g)| (self.labels[a].clone(), self.labels[b].clone(), g))
                .collect(),
        }
    }
}

impl<L: Clone + Eq + Hash> ElectricNetwork<L> {
    pub fn from_json(json: NetworkJson<L>) -> Result<Self, NetworkError> {
        let mut net = Self::new();
        for l in json.nodes {
            net.add_node(l);
        }
        for (a, b, g) in json.edges {
            net.connect(a, b, g)?;
        }
        Ok(net)
    }
}

/// Edge-list form of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson<L> {
    pub nodes: Vec<L>,
    pub edges: Vec<(L, L, f64)>,
}

struct Record {
    node: usize,
    neighbors: Vec<(usize, f64)>,
    degree: f64,
}

struct Reduction {
    adjacency: Vec<BTreeMap<usize, f64>>,
    records: Vec<Record>,
}

/// Star-mesh elimination of every node with `keep[v] == false`.
fn eliminate(mut adjacency: Vec<BTreeMap<usize, f64>>, keep: &[bool]) -> Result<Reduction, NetworkError> {
    let n = adjacency.len();
    let mut heap = BinaryHeap::new();
    for v in 0..n {
        if !keep[v] {
            heap.push(Reverse((adjacency[v].len(), v)));
        }
    }
    let mut done = vec![false; n];
    let mut records = Vec::new();
    while let Some(Reverse((count, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        if adjacency[v].len() != count {
            heap.push(Reverse((adjacency[v].len(), v)));
            continue;
        }
        done[v] = true;
        let neighbors: Vec<(usize, f64)> = std::mem::take(&mut adjacency[v]).into_iter().collect();
        if neighbors.is_empty() {
            return Err(NetworkError::Disconnection(v));
        }
        let degree: f64 = neighbors.iter().map(|&(_, g)| g).sum();
        for &(a, _) in &neighbors {
            adjacency[a].remove(&v);
        }
        for (x, &(a, ga)) in neighbors.iter().enumerate() {
            for &(b, gb) in &neighbors[x + 1..] {
                let w = ga * gb / degree;
                *adjacency[a].entry(b).or_insert(0.0) += w;
                *adjacency[b].entry(a).or_insert(0.0) += w;
            }
        }
        for &(a, _) in &neighbors {
            if !keep[a] && !done[a] {
                heap.push(Reverse((adjacency[a].len(), a)));
            }
        }
        records.push(Record {
            node: v,
            neighbors,
            degree,
        });
    }
    Ok(Reduction { adjacency, records })
}

/// Forward sweep of sources through the elimination, then back substitution.
fn substitute(records: &[Record], u: &mut [f64], mut sources: Vec<f64>) {
    for rec in records {
        let b = sources[rec.node];
        if b != 0.0 {
            for &(a, g) in &rec.neighbors {
                sources[a] += g * b / rec.degree;
            }
        }
    }
    for rec in records.iter().rev() {
        let s: f64 = rec.neighbors.iter().map(|&(a, g)| g * u[a]).sum();
        u[rec.node] = (s + sources[rec.node]) / rec.degree;
    }
}
