//! Harmonic measures on boundary graph-directed domains of p.c.f. fractals.
//!
//! The pipeline runs bottom-up:
//!
//! * [`pcf`]: self-similar structure, harmonic structure, canonical `V_n` addressing.
//! * [`network`]: finite electric networks (trace, Dirichlet solves, resistance).
//! * [`bgd`]: domain families, the trace fixed point, flux transfer matrices.
//! * [`measure`]: cylinder measures, Poisson integrals, boundary energies.
//! * [`oracle`]: independent depth-`n` solves and Monte Carlo walks.
//!
//! ```
//! use bgd_harmonics::{bgd, registry};
//!
//! let spec = registry::sg_bottom();
//! let traces = bgd::domain_trace_fixed_point(&spec, 1e-10, 10_000).unwrap();
//! let r = traces.trace(0).boundary_resistance(2);
//! assert!((r - 3.0 / 7.0).abs() < 1e-9);
//! ```

pub mod bgd;
pub mod cache;
pub mod cli;
pub mod json;
pub mod measure;
pub mod network;
pub mod oracle;
pub mod pcf;
pub mod registry;
pub mod report;

pub use bgd::{BgdError, BgdSpec, DomainTraceSet, FluxTransferSet};
pub use network::{ElectricNetwork, NetworkError};
pub use pcf::{HarmonicStructure, PcfError, PcfStructure};
pub use report::ValidationReport;
