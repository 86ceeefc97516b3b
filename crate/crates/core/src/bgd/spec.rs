use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::BgdError;
use crate::pcf::{HarmonicStructure, HarmonicStructureJson, Symmetry};
use crate::report::ValidationReport;

/// One domain `Ω_i`: the boundary points it contains and its full level-1 cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub in_v0: BTreeSet<usize>,
    pub full_cells: BTreeSet<usize>,
}

/// Edge `γ` of the directed graph: `Φ_γ(Ω_to) = F_letter ∘ κ (Ω_to)` sits inside `Ω_from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgdEdge {
    pub from: usize,
    pub to: usize,
    pub letter: usize,
    pub symmetry: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BgdSpec {
    pub hs: HarmonicStructure,
    pub domains: Vec<Domain>,
    pub edges: Vec<BgdEdge>,
    edges_from: Vec<Vec<usize>>,
    symmetries: Vec<Symmetry>,
}

/// Whether a `V_1` vertex lies in a domain, judged through one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellVerdict {
    In,
    Out,
}

impl BgdSpec {
    /// Builds a spec after syntactic checks. Semantic checks live in
    /// [`validate_bgd`].
    pub fn new(hs: HarmonicStructure, domains: Vec<Domain>, edges: Vec<BgdEdge>) -> Result<Self, BgdError> {
        let p = domains.len();
        if p == 0 {
            return Err(BgdError::Malformed("at least one domain is required".into()));
        }
        let (n, q) = (hs.alphabet_size(), hs.boundary_size());
        for (i, d) in domains.iter().enumerate() {
            if let Some(&k) = d.in_v0.iter().find(|&&k| k >= q) {
                return Err(BgdError::Malformed(format!("domain {}: boundary index {} out of range", i + 1, k + 1)));
            }
            if let Some(&c) = d.full_cells.iter().find(|&&c| c >= n) {
                return Err(BgdError::Malformed(format!("domain {}: letter {} out of range", i + 1, c + 1)));
            }
        }
        let mut edges_from = vec![Vec::new(); p];
        for (e, edge) in edges.iter().enumerate() {
            if edge.from >= p || edge.to >= p {
                return Err(BgdError::Malformed(format!("edge {}: domain index out of range", e + 1)));
            }
            if edge.letter >= n {
                return Err(BgdError::Malformed(format!("edge {}: letter out of range", e + 1)));
            }
            if let Some(s) = edge.symmetry {
                if s >= hs.symmetries().len() {
                    return Err(BgdError::Malformed(format!(
                        "edge {}: symmetry {} not declared by the harmonic structure",
                        e + 1,
                        s + 1
                    )));
                }
            }
            edges_from[edge.from].push(e);
        }
        let symmetries = edges
            .iter()
            .map(|e| match e.symmetry {
                Some(s) => hs.symmetries()[s].clone(),
                None => Symmetry::identity(&hs.structure),
            })
            .collect();
        Ok(Self {
            hs,
            domains,
            edges,
            edges_from,
            symmetries,
        })
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    /// `Γ(i)` as edge indices, in declaration order.
    pub fn edges_from(&self, i: usize) -> &[usize] {
        &self.edges_from[i]
    }

    /// The symmetry `κ_γ` of an edge, identity when absent.
    pub fn edge_symmetry(&self, e: usize) -> &Symmetry {
        &self.symmetries[e]
    }

    pub fn contains_v0(&self, i: usize, k: usize) -> bool {
        self.domains[i].in_v0.contains(&k)
    }

    /// Edge of domain `i` whose letter is `k`.
    pub fn edge_with_letter(&self, i: usize, k: usize) -> Option<usize> {
        self.edges_from[i].iter().copied().find(|&e| self.edges[e].letter == k)
    }

    /// Boundary indices `q` of cell `F_letter` at which the copy of domain
    /// `to` attaches, paired with the target's own index `ℓ`.
    pub fn attachments(&self, e: usize) -> Vec<(usize, usize)> {
        let edge = &self.edges[e];
        let sym = self.edge_symmetry(e);
        self.domains[edge.to].in_v0.iter().map(|&l| (l, sym.point(l))).collect()
    }

    fn cell_verdict(&self, i: usize, cell: usize, q: usize) -> CellVerdict {
        let d = &self.domains[i];
        if d.full_cells.contains(&cell) {
            return CellVerdict::In;
        }
        // several edges may share a letter in a malformed spec; any attaching one counts
        let attached = self.edges_from[i]
            .iter()
            .filter(|&&e| self.edges[e].letter == cell)
            .any(|&e| self.attachments(e).iter().any(|&(_, a)| a == q));
        if attached {
            CellVerdict::In
        } else {
            CellVerdict::Out
        }
    }

    /// Whether the `V_1` vertex `F_cell(p_q)` lies in `Ω_i`, judged through `cell`.
    pub fn vertex_in_domain(&self, i: usize, cell: usize, q: usize) -> bool {
        self.cell_verdict(i, cell, q) == CellVerdict::In
    }

    /// Stable content hash used as a cache key.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(&SpecFile::from(self)).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Checks every structural invariant of a BGD spec; failures carry domain
/// and edge numbers (1-based).
pub fn validate_bgd(spec: &BgdSpec) -> ValidationReport {
    let mut report = ValidationReport::new();
    let ps = &spec.hs.structure;
    let q = spec.hs.boundary_size();

    for (i, d) in spec.domains.iter().enumerate() {
        let name = format!("domain {}", i + 1);
        let mut letters = BTreeSet::new();
        let mut clash = Vec::new();
        for &e in spec.edges_from(i) {
            let k = spec.edges[e].letter;
            if d.full_cells.contains(&k) {
                clash.push(format!("edge {} uses full cell letter {}", e + 1, k + 1));
            }
            if !letters.insert(k) {
                clash.push(format!("letter {} used by two edges (edge {})", k + 1, e + 1));
            }
        }
        report.record(format!("{name}: cells disjoint"), clash.is_empty(), clash.join("; "));

        report.record(
            format!("{name}: outgoing edges"),
            !spec.edges_from(i).is_empty(),
            if spec.edges_from(i).is_empty() { "Γ(i) is empty" } else { "" },
        );

        let mut closure = Vec::new();
        if !d.in_v0.is_empty() {
            for &e in spec.edges_from(i) {
                if spec.domains[spec.edges[e].to].in_v0.is_empty() {
                    closure.push(format!("edge {} leads to domain {} which meets no V_0 point", e + 1, spec.edges[e].to + 1));
                }
            }
        }
        report.record(format!("{name}: V_0 closure"), closure.is_empty(), closure.join("; "));

        let mut membership = Vec::new();
        let mut inside = vec![None; ps.level_one_class_count()];
        for class in 0..ps.level_one_class_count() {
            let members = ps.level_one_members(class);
            let verdicts: Vec<bool> = members.iter().map(|&(c, p)| spec.vertex_in_domain(i, c, p)).collect();
            if verdicts.iter().any(|&v| v != verdicts[0]) {
                let desc: Vec<String> = members
                    .iter()
                    .zip(&verdicts)
                    .map(|(&(c, p), &v)| format!("F{}(p{}) {}", c + 1, p + 1, if v { "in" } else { "out" }))
                    .collect();
                membership.push(format!("glued vertex judged inconsistently: {}", desc.join(", ")));
            }
            inside[class] = Some(verdicts.iter().any(|&v| v));
        }
        report.record(format!("{name}: level-1 membership"), membership.is_empty(), membership.join("; "));

        let mut v0 = Vec::new();
        for k in 0..q {
            let copy_in = inside[ps.level_one_class(ps.fixed_point_letter(k), k)] == Some(true);
            let declared = d.in_v0.contains(&k);
            if copy_in != declared {
                v0.push(format!(
                    "p{} is {} in_v0 but its level-1 copy is {}",
                    k + 1,
                    if declared { "in" } else { "not in" },
                    if copy_in { "inside" } else { "outside" }
                ));
            }
        }
        report.record(format!("{name}: V_0 membership"), v0.is_empty(), v0.join("; "));

        let connected = level_one_connected(spec, i, &inside);
        report.record(
            format!("{name}: level-1 connectivity"),
            connected,
            if connected { "" } else { "interior vertices not all joined to the boundary" },
        );
    }

    for (i, d) in spec.domains.iter().enumerate() {
        let stuck: Vec<String> = d
            .in_v0
            .iter()
            .filter(|&&k| !v0_point_interior(spec, i, k))
            .map(|&k| format!("p{}", k + 1))
            .collect();
        report.record(
            format!("domain {}: V_0 points interior", i + 1),
            stuck.is_empty(),
            if stuck.is_empty() {
                String::new()
            } else {
                format!("{} accumulate boundary copies at every scale", stuck.join(", "))
            },
        );
    }

    for (e, edge) in spec.edges.iter().enumerate() {
        if let Some(s) = edge.symmetry {
            let r = spec.hs.symmetries()[s].validate(&spec.hs);
            report.record(
                format!("edge {}: symmetry", e + 1),
                r.is_ok(),
                r.err().map(|x| x.to_string()).unwrap_or_default(),
            );
        }
    }
    report
}

/// Follows `p_k` through the cells fixing it: `(i, k)` steps to `(j, ℓ)`
/// when the cell of `p_k` is an edge copy of `Ω_j` attached by `p_ℓ`. The
/// point is interior once a full cell is reached; a cycle without one means
/// boundary copies accumulate at `p_k`.
fn v0_point_interior(spec: &BgdSpec, i: usize, k: usize) -> bool {
    let ps = &spec.hs.structure;
    let mut seen = BTreeSet::new();
    let (mut i, mut k) = (i, k);
    while seen.insert((i, k)) {
        let cell = ps.fixed_point_letter(k);
        if spec.domains[i].full_cells.contains(&cell) {
            return true;
        }
        let Some(e) = spec.edge_with_letter(i, cell) else {
            return false;
        };
        let Some(&(l, _)) = spec.attachments(e).iter().find(|&&(_, a)| a == k) else {
            return false;
        };
        (i, k) = (spec.edges[e].to, l);
    }
    false
}

/// Level-1 vertices of `Ω_i` plus `∂`, with full cells as cliques and every
/// edge-cell attachment joined to `∂`.
fn level_one_connected(spec: &BgdSpec, i: usize, inside: &[Option<bool>]) -> bool {
    let ps = &spec.hs.structure;
    let q = spec.hs.boundary_size();
    let boundary = ps.level_one_class_count();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut link = |a: usize, b: usize| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for &c in &spec.domains[i].full_cells {
        for p in 0..q {
            for r in p + 1..q {
                if spec.hs.conductance(p, r) > 0.0 {
                    link(ps.level_one_class(c, p), ps.level_one_class(c, r));
                }
            }
        }
    }
    for &e in spec.edges_from(i) {
        for (_, a) in spec.attachments(e) {
            link(ps.level_one_class(spec.edges[e].letter, a), boundary);
        }
    }
    let mut seen = vec![false; boundary + 1];
    seen[boundary] = true;
    let mut stack = vec![boundary];
    while let Some(v) = stack.pop() {
        for &w in adj.get(&v).into_iter().flatten() {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..boundary).all(|c| inside[c] != Some(true) || seen[c])
}

/// Domains reachable by admissible words of each length `1..=depth` that
/// contain no `V_0` point.
pub fn deep_v0_diagnostic(spec: &BgdSpec, start: usize, depth: usize) -> Vec<(usize, Vec<usize>)> {
    let mut current: BTreeSet<usize> = [start].into();
    let mut out = Vec::new();
    for m in 1..=depth {
        current = current
            .iter()
            .flat_map(|&i| spec.edges_from(i).iter().map(|&e| spec.edges[e].to))
            .collect();
        let empty: Vec<usize> = current.iter().copied().filter(|&j| spec.domains[j].in_v0.is_empty()).collect();
        out.push((m, empty));
    }
    out
}

/// File form of a domain, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainJson {
    pub in_v0: Vec<usize>,
    pub full_cells: Vec<usize>,
}

/// File form of an edge, 1-based; `symmetry` indexes the structure's list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub to: usize,
    pub letter: usize,
    #[serde(default)]
    pub symmetry: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgdJson {
    pub domains: Vec<DomainJson>,
    pub edges: Vec<EdgeJson>,
}

/// A complete input document: harmonic structure and BGD spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub harmonic_structure: HarmonicStructureJson,
    pub bgd: BgdJson,
}

fn dec(x: usize, what: &str) -> Result<usize, BgdError> {
    x.checked_sub(1)
        .ok_or_else(|| BgdError::Malformed(format!("{what} indices are 1-based, found 0")))
}

impl TryFrom<SpecFile> for BgdSpec {
    type Error = BgdError;

    fn try_from(f: SpecFile) -> Result<Self, BgdError> {
        let hs = HarmonicStructure::try_from(f.harmonic_structure)?;
        let domains = f
            .bgd
            .domains
            .iter()
            .map(|d| {
                Ok(Domain {
                    in_v0: d.in_v0.iter().map(|&k| dec(k, "boundary")).collect::<Result<_, _>>()?,
                    full_cells: d.full_cells.iter().map(|&k| dec(k, "letter")).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, BgdError>>()?;
        let edges = f
            .bgd
            .edges
            .iter()
            .map(|e| {
                Ok(BgdEdge {
                    from: dec(e.from, "domain")?,
                    to: dec(e.to, "domain")?,
                    letter: dec(e.letter, "letter")?,
                    symmetry: e.symmetry.map(|s| dec(s, "symmetry")).transpose()?,
                })
            })
            .collect::<Result<_, BgdError>>()?;
        BgdSpec::new(hs, domains, edges)
    }
}

impl From<&BgdSpec> for SpecFile {
    fn from(spec: &BgdSpec) -> Self {
        let inc = |s: &BTreeSet<usize>| s.iter().map(|x| x + 1).collect();
        SpecFile {
            harmonic_structure: HarmonicStructureJson::from(&spec.hs),
            bgd: BgdJson {
                domains: spec
                    .domains
                    .iter()
                    .map(|d| DomainJson {
                        in_v0: inc(&d.in_v0),
                        full_cells: inc(&d.full_cells),
                    })
                    .collect(),
                edges: spec
                    .edges
                    .iter()
                    .map(|e| EdgeJson {
                        from: e.from + 1,
                        to: e.to + 1,
                        letter: e.letter + 1,
                        symmetry: e.symmetry.map(|s| s + 1),
                    })
                    .collect(),
            },
        }
    }
}
