//! On-disk cache of converged domain traces.
//!
//! Set `BGD_HARMONICS_CACHE` to a directory to enable it. Entries are keyed
//! by the spec fingerprint and the bit pattern of the tolerance; a corrupt
//! or mismatched entry is ignored and recomputed.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bgd::{domain_trace_fixed_point_with, BgdError, BgdSpec, DomainTrace, DomainTraceSet, FixedPointConfig, TraceNode};
use crate::network::{ElectricNetwork, NetworkJson};

pub const CACHE_ENV: &str = "BGD_HARMONICS_CACHE";

#[derive(Debug, Clone)]
pub struct TraceCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct TraceEntry {
    domain: usize,
    shorted: BTreeSet<usize>,
    network: NetworkJson<TraceNode>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    fingerprint: String,
    tol: f64,
    iterations: usize,
    width: f64,
    traces: Vec<TraceEntry>,
    cut: Vec<TraceEntry>,
}

fn entries(traces: &[DomainTrace]) -> Vec<TraceEntry> {
    traces
        .iter()
        .map(|t| TraceEntry {
            domain: t.domain,
            shorted: t.shorted.clone(),
            network: t.network.to_json(),
        })
        .collect()
}

fn restore(entries: Vec<TraceEntry>) -> Option<Vec<DomainTrace>> {
    entries
        .into_iter()
        .map(|e| {
            Some(DomainTrace {
                domain: e.domain,
                shorted: e.shorted,
                network: ElectricNetwork::from_json(e.network).ok()?,
            })
        })
        .collect()
}

impl TraceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The cache named by `BGD_HARMONICS_CACHE`, if set and nonempty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, spec: &BgdSpec, tol: f64) -> PathBuf {
        self.dir
            .join(format!("{}-{:016x}.json", spec.fingerprint(), tol.to_bits()))
    }

    pub fn load(&self, spec: &BgdSpec, tol: f64) -> Option<DomainTraceSet> {
        let text = fs::read_to_string(self.path(spec, tol)).ok()?;
        let file: CacheFile = serde_json::from_str(&text).ok()?;
        if file.fingerprint != spec.fingerprint() || file.tol.to_bits() != tol.to_bits() {
            return None;
        }
        let traces = restore(file.traces)?;
        let cut = restore(file.cut)?;
        if traces.len() != spec.domain_count() || cut.len() != spec.domain_count() {
            return None;
        }
        Some(DomainTraceSet {
            traces,
            cut,
            iterations: file.iterations,
            width: file.width,
            history: Vec::new(),
        })
    }

    pub fn store(&self, spec: &BgdSpec, tol: f64, set: &DomainTraceSet) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let file = CacheFile {
            fingerprint: spec.fingerprint(),
            tol,
            iterations: set.iterations,
            width: set.width,
            traces: entries(&set.traces),
            cut: entries(&set.cut),
        };
        let text = serde_json::to_string(&file).map_err(io::Error::other)?;
        // write then rename so a concurrent reader never sees a partial file
        let path = self.path(spec, tol);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(tmp, path)
    }
}

/// Runs the fixed point unless the cache already holds the result. The flag
/// is `true` on a cache hit. Failing to write the cache is not an error.
pub fn cached_fixed_point(
    cache: Option<&TraceCache>,
    spec: &BgdSpec,
    cfg: FixedPointConfig,
) -> Result<(DomainTraceSet, bool), BgdError> {
    if let Some(set) = cache.and_then(|c| c.load(spec, cfg.tol)) {
        return Ok((set, true));
    }
    let set = domain_trace_fixed_point_with(spec, cfg)?;
    if let Some(c) = cache {
        let _ = c.store(spec, cfg.tol, &set);
    }
    Ok((set, false))
}
