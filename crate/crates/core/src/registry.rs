//! Compiled-in example structures and domain families with reference values.

use std::collections::BTreeSet;

use crate::bgd::{BgdEdge, BgdSpec, Domain};
use crate::pcf::{HarmonicStructure, PcfStructure, Symmetry};

/// Where a reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Value printed in the literature for this example.
    Published,
    /// Value produced by this library and frozen against an independent check.
    Regression,
}

/// A reference number attached to an example.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Golden {
    /// `M_γ(k, ℓ)`, 0-based.
    MatrixEntry { edge: usize, k: usize, l: usize, value: f64, source: Source },
    /// `R(∂Ω_i, p_k)`.
    Resistance { domain: usize, k: usize, value: f64, source: Source },
    /// `μ_{i,k}` of the cylinder given by 0-based edge indices.
    Measure { domain: usize, k: usize, word: Vec<usize>, value: f64, source: Source },
}

pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> BgdSpec,
    pub golden: fn() -> Vec<Golden>,
}

impl Example {
    pub fn spec(&self) -> BgdSpec {
        (self.build)()
    }

    pub fn golden(&self) -> Vec<Golden> {
        (self.golden)()
    }
}

pub const EXAMPLES: &[Example] = &[
    Example {
        name: "sg-bottom",
        description: "Sierpinski gasket minus its bottom edge",
        build: sg_bottom,
        golden: sg_bottom_golden,
    },
    Example {
        name: "sg-cut",
        description: "Sierpinski gasket cut by the vertical line through p3",
        build: sg_cut,
        golden: sg_cut_golden,
    },
    Example {
        name: "hexagasket",
        description: "upper half of the hexagasket",
        build: hexagasket_half,
        golden: hexagasket_golden,
    },
    Example {
        name: "vicsek",
        description: "Vicsek set minus its bottom edge, and minus its bottom and right edges",
        build: vicsek_corner,
        golden: vicsek_golden,
    },
];

pub fn find(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

pub fn names() -> Vec<&'static str> {
    EXAMPLES.iter().map(|e| e.name).collect()
}

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

fn complete(q: usize, g: f64) -> Vec<Vec<f64>> {
    (0..q)
        .map(|p| (0..q).map(|r| if p == r { 0.0 } else { g }).collect())
        .collect()
}

pub fn sierpinski_gasket() -> HarmonicStructure {
    let ps = PcfStructure::new(3, 3, vec![0, 1, 2], vec![[(0, 1), (1, 0)], [(1, 2), (2, 1)], [(0, 2), (2, 0)]])
        .expect("gasket structure");
    HarmonicStructure::new(ps, complete(3, 1.0), vec![0.6; 3], Vec::new()).expect("gasket harmonic structure")
}

/// Hexagasket with vertices `p_1…p_6` counterclockwise from `(-1, 0)`.
///
/// Neighboring cells meet at `F_i(p_{i+2}) = F_{i+1}(p_{i-1})`. The base
/// conductance depends only on the hexagon distance: 1 between neighbors,
/// 2/7 at distance two, 1/7 between opposite vertices.
pub fn hexagasket() -> HarmonicStructure {
    let glue = (0..6).map(|i| [(i, (i + 2) % 6), ((i + 1) % 6, (i + 5) % 6)]).collect();
    let ps = PcfStructure::new(6, 6, (0..6).collect(), glue).expect("hexagasket structure");
    let c0 = (0..6)
        .map(|p: usize| {
            (0..6)
                .map(|r: usize| match p.abs_diff(r).min(6 - p.abs_diff(r)) {
                    0 => 0.0,
                    1 => 1.0,
                    2 => 2.0 / 7.0,
                    _ => 1.0 / 7.0,
                })
                .collect()
        })
        .collect();
    let rotation = Symmetry {
        letter_perm: (0..6).map(|i| (i + 1) % 6).collect(),
        boundary_perm: (0..6).map(|i| (i + 1) % 6).collect(),
    };
    HarmonicStructure::new(ps, c0, vec![3.0 / 7.0; 6], vec![rotation]).expect("hexagasket harmonic structure")
}

/// Vicsek set: corners `p_1…p_4` counterclockwise from bottom-left, cell 5
/// in the center. Symmetries are the rotations by π/2, π and 3π/2.
pub fn vicsek() -> HarmonicStructure {
    let ps = PcfStructure::new(
        5,
        4,
        vec![0, 1, 2, 3],
        vec![[(0, 2), (4, 0)], [(1, 3), (4, 1)], [(2, 0), (4, 2)], [(3, 1), (4, 3)]],
    )
    .expect("vicsek structure");
    let quarter = Symmetry {
        letter_perm: vec![1, 2, 3, 0, 4],
        boundary_perm: vec![1, 2, 3, 0],
    };
    let half = quarter.compose(&quarter);
    let three_quarters = half.compose(&quarter);
    HarmonicStructure::new(ps, complete(4, 1.0), vec![1.0 / 3.0; 5], vec![quarter, half, three_quarters])
        .expect("vicsek harmonic structure")
}

/// `Ω = F_1(Ω) ∪ F_2(Ω) ∪ F_3(K)`, boundary the segment `p_1 p_2`.
pub fn sg_bottom() -> BgdSpec {
    BgdSpec::new(
        sierpinski_gasket(),
        vec![Domain {
            in_v0: set(&[2]),
            full_cells: set(&[2]),
        }],
        vec![
            BgdEdge { from: 0, to: 0, letter: 0, symmetry: None },
            BgdEdge { from: 0, to: 0, letter: 1, symmetry: None },
        ],
    )
    .expect("sg-bottom spec")
}

/// Left part of the gasket cut by the vertical line through `p_3`.
pub fn sg_cut() -> BgdSpec {
    BgdSpec::new(
        sierpinski_gasket(),
        vec![
            Domain {
                in_v0: set(&[0]),
                full_cells: set(&[]),
            },
            Domain {
                in_v0: set(&[0, 2]),
                full_cells: set(&[0, 2]),
            },
        ],
        vec![
            BgdEdge { from: 0, to: 0, letter: 2, symmetry: None },
            BgdEdge { from: 0, to: 1, letter: 0, symmetry: None },
            BgdEdge { from: 1, to: 1, letter: 1, symmetry: None },
        ],
    )
    .expect("sg-cut spec")
}

/// Upper half of the hexagasket, boundary on the segment `p_1 p_4`.
pub fn hexagasket_half() -> BgdSpec {
    BgdSpec::new(
        hexagasket(),
        vec![Domain {
            in_v0: set(&[4, 5]),
            full_cells: set(&[4, 5]),
        }],
        vec![
            BgdEdge { from: 0, to: 0, letter: 0, symmetry: None },
            BgdEdge { from: 0, to: 0, letter: 3, symmetry: None },
        ],
    )
    .expect("hexagasket spec")
}

/// `Ω_1 = K ∖ D_1`, `Ω_2 = K ∖ D_2` with `D_1` the bottom edge and `D_2`
/// the bottom and right edges.
pub fn vicsek_corner() -> BgdSpec {
    BgdSpec::new(
        vicsek(),
        vec![
            Domain {
                in_v0: set(&[2, 3]),
                full_cells: set(&[2, 3, 4]),
            },
            Domain {
                in_v0: set(&[3]),
                full_cells: set(&[3, 4]),
            },
        ],
        vec![
            BgdEdge { from: 0, to: 0, letter: 0, symmetry: None },
            BgdEdge { from: 0, to: 0, letter: 1, symmetry: None },
            BgdEdge { from: 1, to: 0, letter: 0, symmetry: None },
            BgdEdge { from: 1, to: 0, letter: 2, symmetry: Some(0) },
            BgdEdge { from: 1, to: 1, letter: 1, symmetry: None },
        ],
    )
    .expect("vicsek spec")
}

fn entry(edge: usize, k: usize, l: usize, value: f64) -> Golden {
    Golden::MatrixEntry {
        edge,
        k,
        l,
        value,
        source: Source::Published,
    }
}

fn sg_bottom_golden() -> Vec<Golden> {
    vec![
        Golden::Resistance {
            domain: 0,
            k: 2,
            value: 3.0 / 7.0,
            source: Source::Published,
        },
        entry(0, 2, 2, 0.5),
        entry(1, 2, 2, 0.5),
    ]
}

fn sg_cut_golden() -> Vec<Golden> {
    let mut g = vec![
        entry(0, 0, 0, 1.0 / 3.0),
        entry(1, 0, 0, 1.0),
        entry(1, 0, 2, -1.0 / 3.0),
        entry(2, 0, 0, 2.0 / 3.0),
        entry(2, 0, 2, 1.0 / 3.0),
        entry(2, 2, 0, 1.0 / 3.0),
        entry(2, 2, 2, 2.0 / 3.0),
    ];
    // the cylinder of F_{3^n 1}(Ω_2) carries the atom at F_{3^n 1}(p_2)
    for n in 0..=8usize {
        let mut word = vec![0; n];
        word.push(1);
        g.push(Golden::Measure {
            domain: 0,
            k: 0,
            word,
            value: 2.0 / 3f64.powi(n as i32 + 1),
            source: Source::Published,
        });
    }
    g
}

fn hexagasket_golden() -> Vec<Golden> {
    vec![
        entry(0, 4, 4, 1.0 / 3.0),
        entry(0, 5, 4, 2.0 / 3.0),
        entry(1, 4, 5, 2.0 / 3.0),
        entry(1, 5, 5, 1.0 / 3.0),
        Golden::Measure {
            domain: 0,
            k: 4,
            word: vec![0],
            value: 1.0 / 3.0,
            source: Source::Published,
        },
        Golden::Measure {
            domain: 0,
            k: 4,
            word: vec![1],
            value: 2.0 / 3.0,
            source: Source::Published,
        },
        Golden::Measure {
            domain: 0,
            k: 4,
            word: vec![0, 0],
            value: 1.0 / 9.0,
            source: Source::Regression,
        },
    ]
}

fn vicsek_golden() -> Vec<Golden> {
    let s = 69f64.sqrt();
    vec![
        entry(0, 2, 2, 0.5),
        entry(0, 3, 2, 0.5),
        entry(1, 2, 3, 0.5),
        entry(1, 3, 3, 0.5),
        entry(2, 3, 2, (s - 7.0) / 4.0),
        entry(3, 3, 3, (s - 7.0) / 4.0),
        entry(4, 3, 3, (9.0 - s) / 2.0),
    ]
}
