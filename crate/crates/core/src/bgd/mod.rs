//! Boundary graph-directed domain families.
//!
//! A [`BgdSpec`] lists domains `Ω_1…Ω_P`, each described at level one by
//! the boundary points it contains, its full cells and its edge cells. An
//! edge `γ: i → j` with letter `k` says the cell `F_k(K)` meets `Ω_i` in an
//! exact copy `F_k ∘ κ(Ω_j)`.

mod expand;
mod fixed_point;
mod flux;
pub mod fuzz;
mod spec;
mod words;

pub use expand::{assemble, assemble_domain_network, Assembly, AssemblyCopy, CopyModel, ExpNode, Expansion, Leaf};
pub use fixed_point::{
    domain_trace_fixed_point, domain_trace_fixed_point_with, BracketStep, DomainTrace, DomainTraceSet,
    FixedPointConfig, TraceNode,
};
pub use flux::{flux_transfer_matrices, FluxTransferSet, UnitFlow};
pub use spec::{
    deep_v0_diagnostic, validate_bgd, BgdEdge, BgdJson, BgdSpec, Domain, DomainJson, EdgeJson, SpecFile,
};
pub use words::{
    count_words, enumerate_words, enumerate_words_capped, parse_word_key, word_key, AdmissibleWord, WORD_CAP,
};

use crate::network::NetworkError;
use crate::pcf::PcfError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BgdError {
    #[error("malformed spec: {0}")]
    Malformed(String),
    #[error("no trace supplied for domain {}", .0 + 1)]
    MissingTrace(usize),
    #[error("domain {} disconnects from its boundary", .0 + 1)]
    DegenerateDomain(usize),
    #[error("two absorbing classes share {0}")]
    ClassCollision(String),
    #[error("fixed point not reached in {max_iter} iterations, bracket width {width:e}")]
    NoConvergence { max_iter: usize, width: f64 },
    #[error("more than {cap} admissible words")]
    CountOverflow { cap: usize },
    #[error("expansion at depth {depth} exceeds the node cap {cap}")]
    DepthOverflow { depth: usize, cap: usize },
    #[error("word not admissible from domain {}: {detail}", .domain + 1)]
    WordNotAdmissible { domain: usize, detail: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Pcf(#[from] PcfError),
}
