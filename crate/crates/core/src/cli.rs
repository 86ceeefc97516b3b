//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 validation failure or
//! depth mismatch, 3 fixed point not converged, 4 crosscheck threshold
//! exceeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bgd::{
    deep_v0_diagnostic, flux_transfer_matrices, parse_word_key, validate_bgd, word_key, BgdError, BgdSpec,
    DomainTraceSet, FixedPointConfig, FluxTransferSet, SpecFile,
};
use crate::cache::{cached_fixed_point, TraceCache};
use crate::json::{format_17, number};
use crate::measure::{
    energy_functional, harmonic_energy_capped, measure_vector, poisson_value, poisson_value_with_fluxes,
    MeasureContext, MeasureError, SimpleBoundaryFunction, ENERGY_NODE_CAP,
};
use crate::oracle::{
    build_approx_network, convergence_csv, direct_hitting, random_walk_hitting, richardson_report, ApproxMode,
    OracleError, WalkConfig,
};
use crate::pcf::{validate_structure, COMPAT_TOLERANCE};
use crate::registry;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;
pub const EXIT_CROSSCHECK: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "bgd-harmonics", version, about = "Harmonic measures on boundary graph-directed domains")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Compiled-in example (sg-bottom, sg-cut, hexagasket, vicsek).
    #[arg(long, global = true, conflicts_with = "input")]
    pub example: Option<String>,
    /// Spec file with `harmonic_structure` and `bgd` sections.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Largest word or expansion depth any command may use.
    #[arg(long, global = true, default_value_t = 16)]
    pub depth_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the parallel parts; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the harmonic structure and the BGD conditions.
    Validate,
    /// Flux transfer matrices from the converged traces.
    Matrices,
    /// Cylinder measures of one depth.
    Measure {
        /// Domain, 1-based.
        #[arg(short = 'i', long, default_value_t = 1)]
        domain: usize,
        /// Starting boundary point, 1-based.
        #[arg(short = 'k', long)]
        k: usize,
        #[arg(short = 'm', long)]
        depth: usize,
        /// Also write `(index, cumulative mass)` plot data here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Poisson integral of a simple function.
    Poisson {
        #[arg(short = 'i', long, default_value_t = 1)]
        domain: usize,
        #[arg(short = 'k', long)]
        k: usize,
        /// JSON object mapping dotted edge words to values.
        #[arg(long = "f")]
        function: PathBuf,
        /// Depth of the simple function; read off the keys when omitted.
        #[arg(short = 'm', long)]
        depth: Option<usize>,
        /// JSON object `{"p3": flux, …}` of Neumann data at `V_0` points.
        #[arg(long)]
        fluxes: Option<PathBuf>,
    },
    /// Harmonic energy against the boundary energy functional.
    Energy {
        #[arg(short = 'i', long, default_value_t = 1)]
        domain: usize,
        #[arg(long = "f", conflicts_with = "batch")]
        function: Option<PathBuf>,
        #[arg(short = 'm', long = "m0")]
        depth: Option<usize>,
        /// Number of random simple functions, drawn from `--seed`.
        #[arg(long)]
        batch: Option<usize>,
    },
    /// Compare the matrix products with direct solves and random walks.
    Crosscheck {
        #[arg(short = 'i', long, default_value_t = 1)]
        domain: usize,
        /// Starting point; every boundary point of the domain when omitted.
        #[arg(short = 'k', long)]
        k: Option<usize>,
        #[arg(short = 'm', long, default_value_t = 1)]
        depth: usize,
        /// Deepest approximation; the table runs over `m..=n`.
        #[arg(short = 'n', long)]
        n: usize,
        /// Random walkers on the depth-`n` network; 0 skips the walks.
        #[arg(long, default_value_t = 0)]
        walkers: u64,
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
    },
    /// Converged domain traces and the bracket history.
    Trace,
}

/// What a command prints and how it exits.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
    stdout: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            stdout: String::new(),
        }
    }
}

impl From<BgdError> for Failure {
    fn from(e: BgdError) -> Self {
        let code = match e {
            BgdError::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            BgdError::Malformed(_) => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Bgd(b) => b.into(),
            other => Failure::new(EXIT_INVALID, other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Bgd(b) => b.into(),
            OracleError::Measure(m) => m.into(),
            other => Failure::new(EXIT_INVALID, other.to_string()),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let body = || -> Result<String, Failure> {
        match cli.global.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?
                .install(|| dispatch(cli)),
            None => dispatch(cli),
        }
    };
    match body() {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: f.stdout,
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol <= 0.0 {
        return Err(Failure::new(EXIT_IO, "--tol must be positive"));
    }
    if g.max_iter == 0 || g.depth_cap == 0 {
        return Err(Failure::new(EXIT_IO, "--max-iter and --depth-cap must be positive"));
    }
    let (name, spec) = load_spec(g)?;
    match &cli.command {
        Command::Validate => cmd_validate(g, &spec),
        Command::Matrices => cmd_matrices(g, &name, &spec),
        Command::Measure { domain, k, depth, plot } => cmd_measure(g, &spec, *domain, *k, *depth, plot.as_deref()),
        Command::Poisson {
            domain,
            k,
            function,
            depth,
            fluxes,
        } => cmd_poisson(g, &spec, *domain, *k, function, *depth, fluxes.as_deref()),
        Command::Energy {
            domain,
            function,
            depth,
            batch,
        } => cmd_energy(g, &spec, *domain, function.as_deref(), *depth, *batch),
        Command::Crosscheck {
            domain,
            k,
            depth,
            n,
            walkers,
            threshold,
        } => cmd_crosscheck(g, &spec, *domain, *k, *depth, *n, *walkers, *threshold),
        Command::Trace => cmd_trace(g, &spec),
    }
}

fn load_spec(g: &GlobalArgs) -> Result<(String, BgdSpec), Failure> {
    match (&g.example, &g.input) {
        (Some(name), _) => registry::find(name).map(|e| (name.clone(), e.spec())).ok_or_else(|| {
            Failure::new(
                EXIT_IO,
                format!("unknown example {name:?}; known: {}", registry::names().join(", ")),
            )
        }),
        (None, Some(path)) => {
            let text = read(path)?;
            let file: SpecFile = serde_json::from_str(&text)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            let spec = BgdSpec::try_from(file).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            Ok((path.display().to_string(), spec))
        }
        (None, None) => Err(Failure::new(EXIT_IO, "one of --example or --input is required")),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn check_depth(g: &GlobalArgs, depth: usize) -> Result<(), Failure> {
    if depth > g.depth_cap {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("depth {depth} exceeds --depth-cap {}", g.depth_cap),
        ));
    }
    Ok(())
}

fn domain_index(spec: &BgdSpec, domain: usize) -> Result<usize, Failure> {
    if domain == 0 || domain > spec.domain_count() {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("domain {domain} out of range 1..={}", spec.domain_count()),
        ));
    }
    Ok(domain - 1)
}

fn point_index(spec: &BgdSpec, i: usize, k: usize) -> Result<usize, Failure> {
    if k == 0 || !spec.contains_v0(i, k - 1) {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("p{k} is not a boundary point of domain {}", i + 1),
        ));
    }
    Ok(k - 1)
}

fn require_valid(spec: &BgdSpec) -> Result<(), Failure> {
    let report = validate_bgd(spec);
    if report.passed() {
        return Ok(());
    }
    let mut f = Failure::new(EXIT_INVALID, "spec fails validation");
    f.stdout = pretty(&serde_json::to_value(&report).expect("report serializes"));
    Err(f)
}

fn fixed_point(g: &GlobalArgs, spec: &BgdSpec) -> Result<(DomainTraceSet, bool), Failure> {
    require_valid(spec)?;
    let cfg = FixedPointConfig {
        tol: g.tol,
        max_iter: g.max_iter,
        record_history: false,
    };
    let cache = TraceCache::from_env();
    Ok(cached_fixed_point(cache.as_ref(), spec, cfg)?)
}

fn pipeline(g: &GlobalArgs, spec: &BgdSpec) -> Result<(DomainTraceSet, FluxTransferSet), Failure> {
    let (traces, _) = fixed_point(g, spec)?;
    let flux = flux_transfer_matrices(spec, &traces.traces)?;
    Ok((traces, flux))
}

fn cmd_validate(g: &GlobalArgs, spec: &BgdSpec) -> Result<String, Failure> {
    let mut report = validate_structure(&spec.hs, COMPAT_TOLERANCE);
    report.extend(validate_bgd(spec));
    let deep: Vec<Value> = (0..spec.domain_count())
        .filter(|&i| !spec.domains[i].in_v0.is_empty())
        .flat_map(|i| {
            deep_v0_diagnostic(spec, i, g.depth_cap.min(8))
                .into_iter()
                .filter(|(_, empty)| !empty.is_empty())
                .map(move |(m, empty)| {
                    json!({"from": i + 1, "depth": m, "domains": empty.iter().map(|j| j + 1).collect::<Vec<_>>()})
                })
        })
        .collect();
    let out = match g.format {
        Format::Json => pretty(&json!({
            "passed": report.passed(),
            "checks": report.checks,
            "domains_without_v0": deep,
        })),
        Format::Csv => {
            let mut s = String::from("check,passed,detail\n");
            for c in &report.checks {
                let _ = writeln!(s, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
            }
            s
        }
    };
    if report.passed() {
        Ok(out)
    } else {
        let mut f = Failure::new(
            EXIT_INVALID,
            format!("{} check(s) failed", report.failures().count()),
        );
        f.stdout = out;
        Err(f)
    }
}

fn cmd_matrices(g: &GlobalArgs, name: &str, spec: &BgdSpec) -> Result<String, Failure> {
    let (traces, cache_hit) = fixed_point(g, spec)?;
    let flux = flux_transfer_matrices(spec, &traces.traces)?;
    Ok(match g.format {
        Format::Json => pretty(&json!({
            "spec": name,
            "tol": number(g.tol),
            "iterations": traces.iterations,
            "bracket_width": number(traces.width),
            "cache_hit": cache_hit,
            "matrices": flux.to_json(spec),
        })),
        Format::Csv => {
            let mut s = String::from("edge,from,to,letter,row,col,value\n");
            for (e, m) in flux.matrices.iter().enumerate() {
                let edge = &spec.edges[e];
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{}",
                            e + 1,
                            edge.from + 1,
                            edge.to + 1,
                            edge.letter + 1,
                            r + 1,
                            c + 1,
                            format_17(m[(r, c)])
                        );
                    }
                }
            }
            s
        }
    })
}

fn cmd_measure(
    g: &GlobalArgs,
    spec: &BgdSpec,
    domain: usize,
    k: usize,
    depth: usize,
    plot: Option<&Path>,
) -> Result<String, Failure> {
    let i = domain_index(spec, domain)?;
    let k = point_index(spec, i, k)?;
    check_depth(g, depth)?;
    let (_, flux) = pipeline(g, spec)?;
    let ctx = MeasureContext::new(spec, &flux, i, k)?;
    let mv = measure_vector(&ctx, depth)?;
    if let Some(path) = plot {
        let mut s = String::from("index,cumulative\n");
        for (x, c) in mv.cumulative() {
            let _ = writeln!(s, "{x},{}", format_17(c));
        }
        fs::write(path, s).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    }
    Ok(match g.format {
        Format::Json => pretty(&mv.to_json()),
        Format::Csv => {
            let mut s = mv.to_csv();
            let _ = writeln!(s, "# total {} deviation {:e}", format_17(mv.total()), (mv.total() - 1.0).abs());
            s
        }
    })
}

/// `{"p3": 1.0}` or `{"3": 1.0}` to 0-based point → value.
fn parse_point_map(v: &Value) -> Result<BTreeMap<usize, f64>, Failure> {
    let obj = v
        .as_object()
        .ok_or_else(|| Failure::new(EXIT_IO, "flux data must be a JSON object"))?;
    obj.iter()
        .map(|(key, x)| {
            let k = key
                .trim_start_matches('p')
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Failure::new(EXIT_IO, format!("bad point key {key:?}")))?;
            let x = x
                .as_f64()
                .ok_or_else(|| Failure::new(EXIT_IO, format!("value for {key:?} is not a number")))?;
            Ok((k - 1, x))
        })
        .collect()
}

fn function_depth(v: &Value) -> Result<usize, Failure> {
    let obj = v
        .as_object()
        .ok_or_else(|| Failure::new(EXIT_IO, "simple function must be a JSON object"))?;
    let first = obj
        .keys()
        .next()
        .ok_or_else(|| Failure::new(EXIT_IO, "simple function has no cylinders"))?;
    Ok(parse_word_key(first)?.len())
}

fn cmd_poisson(
    g: &GlobalArgs,
    spec: &BgdSpec,
    domain: usize,
    k: usize,
    function: &Path,
    depth: Option<usize>,
    fluxes: Option<&Path>,
) -> Result<String, Failure> {
    let i = domain_index(spec, domain)?;
    let k = point_index(spec, i, k)?;
    let json = read_json(function)?;
    let depth = match depth {
        Some(d) => d,
        None => function_depth(&json)?,
    };
    check_depth(g, depth)?;
    let flux_data = fluxes.map(read_json).transpose()?.map(|v| parse_point_map(&v)).transpose()?;
    let (_, flux) = pipeline(g, spec)?;
    let f = SimpleBoundaryFunction::from_json(spec, i, depth, &json)?;
    let ctx = MeasureContext::new(spec, &flux, i, k)?;
    let base = poisson_value(&ctx, &f)?;
    let extended = flux_data
        .as_ref()
        .map(|d| poisson_value_with_fluxes(&ctx, &f, d))
        .transpose()?;
    Ok(match g.format {
        Format::Json => pretty(&json!({
            "domain": domain,
            "k": k + 1,
            "depth": depth,
            "value": number(base),
            "extended_value": extended.map(number),
        })),
        Format::Csv => {
            let mut s = String::from("domain,k,depth,value,extended_value\n");
            let _ = writeln!(
                s,
                "{domain},{},{depth},{},{}",
                k + 1,
                format_17(base),
                extended.map(format_17).unwrap_or_default()
            );
            s
        }
    })
}

fn energy_row(
    spec: &BgdSpec,
    traces: &DomainTraceSet,
    flux: &FluxTransferSet,
    f: &SimpleBoundaryFunction,
) -> Result<(f64, f64, f64), Failure> {
    let he = harmonic_energy_capped(spec, &traces.traces, f, ENERGY_NODE_CAP)?;
    let ef = energy_functional(spec, flux, f)?;
    let ratio = if ef == 0.0 { f64::NAN } else { he / ef };
    Ok((he, ef, ratio))
}

fn cmd_energy(
    g: &GlobalArgs,
    spec: &BgdSpec,
    domain: usize,
    function: Option<&Path>,
    depth: Option<usize>,
    batch: Option<usize>,
) -> Result<String, Failure> {
    let i = domain_index(spec, domain)?;
    let (traces, flux) = match (function, batch) {
        (Some(_), _) | (None, Some(_)) => pipeline(g, spec)?,
        (None, None) => return Err(Failure::new(EXIT_IO, "energy needs --f or --batch")),
    };
    if let Some(path) = function {
        let json = read_json(path)?;
        let found = function_depth(&json)?;
        let depth = depth.unwrap_or(found);
        if found != depth {
            return Err(Failure::new(
                EXIT_INVALID,
                format!("--m0 {depth} does not match the function depth {found}"),
            ));
        }
        check_depth(g, depth)?;
        let f = SimpleBoundaryFunction::from_json(spec, i, depth, &json)?;
        let (he, ef, ratio) = energy_row(spec, &traces, &flux, &f)?;
        let note = ratio.is_nan().then_some("energy functional vanishes; f is constant");
        return Ok(match g.format {
            Format::Json => pretty(&json!({
                "domain": domain,
                "m0": depth,
                "harmonic_energy": number(he),
                "energy_functional": number(ef),
                "ratio": number(ratio),
                "note": note,
            })),
            Format::Csv => format!(
                "m0,harmonic_energy,energy_functional,ratio\n{depth},{},{},{}\n",
                format_17(he),
                format_17(ef),
                format_17(ratio)
            ),
        });
    }
    let count = batch.unwrap_or(0);
    let depth = depth.ok_or_else(|| Failure::new(EXIT_IO, "--batch needs --m0"))?;
    check_depth(g, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let f = random_function(spec, i, depth, &mut rng)?;
        rows.push(energy_row(spec, &traces, &flux, &f)?);
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.2).filter(|r| r.is_finite()).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(match g.format {
        Format::Json => pretty(&json!({
            "domain": domain,
            "m0": depth,
            "seed": g.seed,
            "samples": rows.iter().map(|&(he, ef, r)| json!({
                "harmonic_energy": number(he),
                "energy_functional": number(ef),
                "ratio": number(r),
            })).collect::<Vec<_>>(),
            "ratio_min": number(lo),
            "ratio_max": number(hi),
        })),
        Format::Csv => {
            let mut s = String::from("sample,harmonic_energy,energy_functional,ratio\n");
            for (x, (he, ef, r)) in rows.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", x + 1, format_17(*he), format_17(*ef), format_17(*r));
            }
            s
        }
    })
}

/// Values uniform on `[0, 1)` on each cylinder of `Γ_depth(i)`.
pub fn random_function(
    spec: &BgdSpec,
    i: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> Result<SimpleBoundaryFunction, MeasureError> {
    let words = crate::bgd::enumerate_words(spec, i, depth)?;
    let values: Vec<(Vec<usize>, f64)> = words.into_iter().map(|w| (w.edges().to_vec(), rng.random::<f64>())).collect();
    SimpleBoundaryFunction::from_values(spec, i, depth, values)
}

#[allow(clippy::too_many_arguments)]
fn cmd_crosscheck(
    g: &GlobalArgs,
    spec: &BgdSpec,
    domain: usize,
    k: Option<usize>,
    m: usize,
    n: usize,
    walkers: u64,
    threshold: f64,
) -> Result<String, Failure> {
    let i = domain_index(spec, domain)?;
    if m == 0 || m > n {
        return Err(Failure::new(EXIT_INVALID, format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    check_depth(g, n)?;
    let points: Vec<usize> = match k {
        Some(k) => vec![point_index(spec, i, k)?],
        None => spec.domains[i].in_v0.iter().copied().collect(),
    };
    if points.is_empty() {
        return Err(Failure::new(EXIT_INVALID, format!("domain {domain} contains no boundary point")));
    }
    let (_, flux) = pipeline(g, spec)?;
    let n_list: Vec<usize> = (m..=n).collect();
    let mut tables = Vec::new();
    let mut exceeded = Vec::new();
    let mut csv = String::new();
    for &k in &points {
        let rows = richardson_report(spec, &flux, i, k, m, &n_list)?;
        let finest: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.max_discrepancy).collect();
        let best = finest.iter().copied().filter(|d| !d.is_nan()).fold(f64::INFINITY, f64::min);
        if best.is_nan() || best > threshold {
            exceeded.push(format!("p{}: {best:e}", k + 1));
        }
        let walks = if walkers > 0 {
            let approx = build_approx_network(spec, i, n, m, ApproxMode::Cut)?;
            let direct = direct_hitting(&approx, k)?;
            let est = random_walk_hitting(
                &approx,
                WalkConfig {
                    seed: g.seed,
                    walkers,
                },
                k,
            )?;
            let ctx = MeasureContext::new(spec, &flux, i, k)?;
            let mv = measure_vector(&ctx, m)?;
            Some(
                approx
                    .classes
                    .iter()
                    .zip(direct.iter().zip(&est))
                    .zip(&mv.entries)
                    .map(|((w, (d, e)), (_, mu))| (word_key(w), *mu, *d, *e))
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };
        match g.format {
            Format::Json => tables.push(json!({
                "k": k + 1,
                "convergence": rows.iter().map(|r| json!({
                    "n": r.n,
                    "mode": r.mode,
                    "max_discrepancy": number(r.max_discrepancy),
                    "node_count": r.node_count,
                    "solve_ms": number(r.solve_ms),
                })).collect::<Vec<_>>(),
                "walks": walks.as_ref().map(|ws| ws.iter().map(|(w, mu, d, e)| json!({
                    "word": w,
                    "measure": number(*mu),
                    "direct": number(*d),
                    "estimate": number(e.estimate),
                    "stderr": number(e.stderr),
                    "hits": e.hits,
                    "within_3_stderr": (e.estimate - d).abs() <= 3.0 * e.stderr,
                })).collect::<Vec<_>>()),
            })),
            Format::Csv => {
                let _ = writeln!(csv, "# k = {}", k + 1);
                csv.push_str(&convergence_csv(&rows));
                if let Some(ws) = &walks {
                    csv.push_str("word,measure,direct,estimate,stderr,hits\n");
                    for (w, mu, d, e) in ws {
                        let _ = writeln!(
                            csv,
                            "{w},{},{},{},{},{}",
                            format_17(*mu),
                            format_17(*d),
                            format_17(e.estimate),
                            format_17(e.stderr),
                            e.hits
                        );
                    }
                }
            }
        }
    }
    let out = match g.format {
        Format::Json => pretty(&json!({
            "domain": domain,
            "m": m,
            "n": n,
            "threshold": number(threshold),
            "walkers": walkers,
            "seed": g.seed,
            "points": tables,
        })),
        Format::Csv => csv,
    };
    if exceeded.is_empty() {
        Ok(out)
    } else {
        let mut f = Failure::new(
            EXIT_CROSSCHECK,
            format!("discrepancy at n = {n} above {threshold:e} ({})", exceeded.join(", ")),
        );
        f.stdout = out;
        Err(f)
    }
}

fn cmd_trace(g: &GlobalArgs, spec: &BgdSpec) -> Result<String, Failure> {
    require_valid(spec)?;
    let set = crate::bgd::domain_trace_fixed_point_with(
        spec,
        FixedPointConfig {
            tol: g.tol,
            max_iter: g.max_iter,
            record_history: true,
        },
    )?;
    Ok(match g.format {
        Format::Json => {
            let domains: Vec<Value> = set
                .traces
                .iter()
                .map(|t| {
                    let d = &spec.domains[t.domain];
                    let json = t.network.to_json();
                    json!({
                        "domain": t.domain + 1,
                        "in_v0": d.in_v0.iter().map(|k| k + 1).collect::<Vec<_>>(),
                        "boundary_resistance": d.in_v0.iter().map(|&k| (format!("p{}", k + 1), number(t.boundary_resistance(k)))).collect::<serde_json::Map<_, _>>(),
                        "nodes": json.nodes,
                        "edges": json.edges.iter().map(|(a, b, c)| json!([a, b, number(*c)])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            pretty(&json!({
                "tol": number(g.tol),
                "iterations": set.iterations,
                "bracket_width": number(set.width),
                "domains": domains,
                "history": set.history.iter().map(|h| json!({"iteration": h.iteration, "width": number(h.width)})).collect::<Vec<_>>(),
            }))
        }
        Format::Csv => {
            let mut s = String::from("domain,point,boundary_resistance\n");
            for t in &set.traces {
                for &k in &spec.domains[t.domain].in_v0 {
                    let _ = writeln!(s, "{},p{},{}", t.domain + 1, k + 1, format_17(t.boundary_resistance(k)));
                }
            }
            s.push_str("iteration,width\n");
            for h in &set.history {
                let _ = writeln!(s, "{},{}", h.iteration, format_17(h.width));
            }
            s
        }
    })
}
