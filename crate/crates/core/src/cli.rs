//! Command-line front end: run manifests, traces and method comparisons.
//!
//! A [`RunManifest`] names a registry problem, a kernel, a direction
//! provider and solver parameters. It round-trips through a flat
//! `key = value` config file whose keys mirror the command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::directions::{DirectionProvider, DirectionSpec};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::problem::{builtin_problem_with_kernel, seeded_rng, Problem};
use crate::solver::{bella_solve, SolveResult, SolveStatus, SolverConfig};

/// Environment variable naming the directory for traces without `--trace-out`.
pub const TRACE_DIR_ENV: &str = "BELLA_TRACE_DIR";

/// Trace CSV header.
pub const TRACE_COLUMNS: [&str; 10] = [
    "k",
    "tau",
    "backtracks",
    "bfbe",
    "phi_xbar",
    "bregman_residual",
    "euclid_residual",
    "gamma",
    "L",
    "direction_norm",
];

/// Above this dimension the footer reports `‖x̂‖` instead of `x̂`.
pub const FOOTER_FULL_X_MAX_DIM: usize = 20;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            other => Err(Error::Config(format!(
                "unknown trace format '{other}'; valid formats: csv, json"
            ))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }
}

/// Starting point: explicit coordinates or a seeded sample from the problem's box.
#[derive(Debug, Clone, PartialEq)]
pub enum StartPoint {
    Random,
    Values(Vec<f64>),
}

impl StartPoint {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("random") {
            return Ok(StartPoint::Random);
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad x0 component '{t}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(StartPoint::Values)
    }
}

/// Everything needed to reproduce one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub problem: String,
    pub n: usize,
    pub seed: u64,
    pub x0: StartPoint,
    /// Kernel override; `None` uses the problem's default kernel.
    pub kernel: Option<String>,
    pub direction: String,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub eps: f64,
    pub imax: Option<usize>,
    pub max_iters: usize,
    pub adaptive: bool,
    pub initial_l: Option<f64>,
    pub trace_out: Option<PathBuf>,
    pub format: TraceFormat,
    /// Moduli of `∇h` on a region containing the iterates, for the certificate.
    pub region_lh: Option<f64>,
    pub region_sigma_h: Option<f64>,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            problem: "quadratic".into(),
            n: 2,
            seed: 0,
            x0: StartPoint::Random,
            kernel: None,
            direction: "bfbs".into(),
            gamma: None,
            sigma: None,
            eps: 1e-10,
            imax: None,
            max_iters: 10_000,
            adaptive: false,
            initial_l: None,
            trace_out: None,
            format: TraceFormat::Csv,
            region_lh: None,
            region_sigma_h: None,
        }
    }
}

/// Lossless 17-significant-digit rendering.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a nonnegative integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{v}' is not a boolean"))),
    }
}

impl RunManifest {
    /// Applies one `key = value` setting; keys are the flag names without dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "problem" => self.problem = value.to_string(),
            "n" => self.n = parse_usize(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: '{value}' is not a u64")))?
            }
            "x0" => self.x0 = StartPoint::parse(value)?,
            "kernel" => {
                self.kernel = if value.is_empty() || value == "default" {
                    None
                } else {
                    Some(value.to_string())
                }
            }
            "direction" => self.direction = value.to_string(),
            "gamma" => self.gamma = Some(parse_f64(key, value)?),
            "sigma" => self.sigma = Some(parse_f64(key, value)?),
            "eps" => self.eps = parse_f64(key, value)?,
            "imax" => {
                self.imax = if value.eq_ignore_ascii_case("inf") || value == "unbounded" {
                    None
                } else {
                    Some(parse_usize(key, value)?)
                }
            }
            "max-iters" => self.max_iters = parse_usize(key, value)?,
            "adaptive" => self.adaptive = parse_bool(key, value)?,
            "initial-L" => self.initial_l = Some(parse_f64(key, value)?),
            "trace-out" => self.trace_out = Some(PathBuf::from(value)),
            "format" => self.format = TraceFormat::parse(value)?,
            "region-lh" => self.region_lh = Some(parse_f64(key, value)?),
            "region-sigma-h" => self.region_sigma_h = Some(parse_f64(key, value)?),
            other => return Err(Error::Config(format!("unknown manifest key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut m = RunManifest::default();
        m.apply_config_str(text)?;
        Ok(m)
    }

    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunManifest::from_config_str(&text)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "seed = {}", self.seed);
        match &self.x0 {
            StartPoint::Random => {
                let _ = writeln!(s, "x0 = random");
            }
            StartPoint::Values(v) => {
                let parts: Vec<String> = v.iter().map(|&c| fmt_f64(c)).collect();
                let _ = writeln!(s, "x0 = {}", parts.join(","));
            }
        }
        if let Some(k) = &self.kernel {
            let _ = writeln!(s, "kernel = {k}");
        }
        let _ = writeln!(s, "direction = {}", self.direction);
        if let Some(g) = self.gamma {
            let _ = writeln!(s, "gamma = {}", fmt_f64(g));
        }
        if let Some(g) = self.sigma {
            let _ = writeln!(s, "sigma = {}", fmt_f64(g));
        }
        let _ = writeln!(s, "eps = {}", fmt_f64(self.eps));
        match self.imax {
            Some(i) => {
                let _ = writeln!(s, "imax = {i}");
            }
            None => {
                let _ = writeln!(s, "imax = unbounded");
            }
        }
        let _ = writeln!(s, "max-iters = {}", self.max_iters);
        let _ = writeln!(s, "adaptive = {}", self.adaptive);
        if let Some(l) = self.initial_l {
            let _ = writeln!(s, "initial-L = {}", fmt_f64(l));
        }
        if let Some(p) = &self.trace_out {
            let _ = writeln!(s, "trace-out = {}", p.display());
        }
        let _ = writeln!(s, "format = {}", self.format.extension());
        if let Some(v) = self.region_lh {
            let _ = writeln!(s, "region-lh = {}", fmt_f64(v));
        }
        if let Some(v) = self.region_sigma_h {
            let _ = writeln!(s, "region-sigma-h = {}", fmt_f64(v));
        }
        s
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let kernel = self.kernel.as_deref().map(KernelSpec::parse).transpose()?;
        builtin_problem_with_kernel(&self.problem, self.n, self.seed, kernel)
    }

    pub fn build_config(&self, problem: &Problem) -> Result<SolverConfig> {
        let lipschitz = problem.lipschitz();
        let base = if self.adaptive {
            let l0 = self
                .initial_l
                .ok_or_else(|| Error::Parameter("--adaptive needs --initial-L".into()))?;
            SolverConfig::adaptive_from(l0)
        } else {
            SolverConfig::defaults_for(lipschitz)
        };
        let reference_l = if self.adaptive {
            self.initial_l.unwrap_or(lipschitz)
        } else {
            lipschitz
        };
        let gamma = self.gamma.unwrap_or(base.gamma);
        let sigma = self
            .sigma
            .unwrap_or_else(|| 0.45 * (1.0 - gamma * reference_l) / gamma);
        let config = SolverConfig {
            gamma,
            sigma,
            epsilon: self.eps,
            i_max: self.imax,
            max_iters: self.max_iters,
            ..base
        };
        config.validate(lipschitz)?;
        Ok(config)
    }

    pub fn build_x0(&self, problem: &Problem) -> Result<DVector<f64>> {
        match &self.x0 {
            StartPoint::Values(v) => {
                if v.len() != problem.dimension() {
                    return Err(Error::DimensionMismatch {
                        expected: problem.dimension(),
                        actual: v.len(),
                    });
                }
                Ok(DVector::from_column_slice(v))
            }
            StartPoint::Random => {
                // Separate stream from the one that generated the problem data.
                let mut rng = seeded_rng(self.seed ^ 0x5851_f42d_4c95_7f2d);
                Ok(problem.random_point(&mut rng))
            }
        }
    }

    pub fn build_directions(&self) -> Result<Box<dyn DirectionProvider + Send>> {
        Ok(DirectionSpec::parse(&self.direction)?.build(self.n))
    }

    /// Trace location: `trace_out`, else `$BELLA_TRACE_DIR/<name>`, else `./<name>`.
    pub fn trace_path(&self) -> PathBuf {
        if let Some(p) = &self.trace_out {
            return p.clone();
        }
        let dir = std::env::var_os(TRACE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        let name = format!(
            "{}-n{}-s{}-{}.{}",
            self.problem,
            self.n,
            self.seed,
            self.direction.replace(':', "_"),
            self.format.extension()
        );
        dir.join(name)
    }

    fn certificate_moduli(&self, problem: &Problem) -> Option<(f64, f64)> {
        match (self.region_lh, self.region_sigma_h) {
            (Some(l), Some(s)) => Some((l, s)),
            _ if problem.kernel.is_euclidean() => Some((1.0, 1.0)),
            _ => None,
        }
    }
}

/// A fully solved manifest.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub result: SolveResult,
    pub certificate: Option<f64>,
    pub dimension: usize,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.result.status)
    }
}

pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_CONVERGED,
        SolveStatus::MaxIters => EXIT_MAX_ITERS,
        SolveStatus::RangeViolation | SolveStatus::NumericalFailure => EXIT_FAILURE,
    }
}

/// Builds and solves a manifest without writing anything.
pub fn solve_manifest(manifest: &RunManifest) -> Result<RunOutcome> {
    let problem = manifest.build_problem()?;
    let config = manifest.build_config(&problem)?;
    let x0 = manifest.build_x0(&problem)?;
    let mut directions = manifest.build_directions()?;
    let result = bella_solve(&problem, &config, &x0, directions.as_mut())?;
    let certificate = match manifest.certificate_moduli(&problem) {
        Some((l, s)) => Some(result.certificate(&problem, l, s)?),
        None => None,
    };
    Ok(RunOutcome {
        manifest: manifest.clone(),
        result,
        certificate,
        dimension: problem.dimension(),
    })
}

/// Solves a manifest and writes its trace. Returns the outcome and trace path.
pub fn run(manifest: &RunManifest) -> Result<(RunOutcome, PathBuf)> {
    let outcome = solve_manifest(manifest)?;
    let path = manifest.trace_path();
    let body = render_trace(&outcome, manifest.format);
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    let mut file = fs::File::create(&path)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(body.as_bytes())
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok((outcome, path))
}

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub tau: f64,
    pub backtracks: usize,
    pub bfbe: f64,
    pub phi_xbar: f64,
    pub bregman_residual: f64,
    pub euclid_residual: f64,
    pub gamma: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub direction_norm: f64,
}

/// Trace footer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFooter {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_hat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_hat_norm: Option<f64>,
    pub total_prox_calls: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub footer: TraceFooter,
}

pub fn trace_of(outcome: &RunOutcome) -> Trace {
    let r = &outcome.result;
    let rows = r
        .iterations
        .iter()
        .map(|it| TraceRow {
            k: it.k,
            tau: it.tau,
            backtracks: it.backtracks,
            bfbe: it.bfbe_value,
            phi_xbar: it.phi_at_xbar,
            bregman_residual: it.bregman_residual,
            euclid_residual: it.euclid_residual,
            gamma: it.current_gamma,
            l: it.current_l,
            direction_norm: it.direction_norm,
        })
        .collect();
    let full = outcome.dimension <= FOOTER_FULL_X_MAX_DIM;
    let footer = TraceFooter {
        status: r.status.to_string(),
        x_hat: full.then(|| r.x_hat.iter().copied().collect()),
        x_hat_norm: (!full).then(|| r.x_hat.norm()),
        total_prox_calls: r.total_prox_calls,
        certificate: outcome.certificate,
    };
    Trace { rows, footer }
}

pub fn render_trace(outcome: &RunOutcome, format: TraceFormat) -> String {
    let trace = trace_of(outcome);
    match format {
        TraceFormat::Csv => render_csv(&trace),
        TraceFormat::Json => {
            let mut s = serde_json::to_string_pretty(&trace).expect("trace serializes");
            s.push('\n');
            s
        }
    }
}

/// CSV body: the header, one row per iteration, then a `#`-prefixed footer
/// line of `key=value` pairs separated by `;`.
pub fn render_csv(trace: &Trace) -> String {
    let mut s = TRACE_COLUMNS.join(",");
    s.push('\n');
    for r in &trace.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            fmt_f64(r.tau),
            r.backtracks,
            fmt_f64(r.bfbe),
            fmt_f64(r.phi_xbar),
            fmt_f64(r.bregman_residual),
            fmt_f64(r.euclid_residual),
            fmt_f64(r.gamma),
            fmt_f64(r.l),
            fmt_f64(r.direction_norm),
        );
    }
    let f = &trace.footer;
    let mut parts = vec![format!("status={}", f.status)];
    if let Some(x) = &f.x_hat {
        let xs: Vec<String> = x.iter().map(|&v| fmt_f64(v)).collect();
        parts.push(format!("x_hat={}", xs.join(" ")));
    }
    if let Some(nrm) = f.x_hat_norm {
        parts.push(format!("x_hat_norm={}", fmt_f64(nrm)));
    }
    parts.push(format!("total_prox_calls={}", f.total_prox_calls));
    if let Some(c) = f.certificate {
        parts.push(format!("certificate={}", fmt_f64(c)));
    }
    let _ = writeln!(s, "#{}", parts.join(";"));
    s
}

/// Parses a CSV trace written by [`render_csv`].
pub fn parse_csv_trace(text: &str) -> Result<Trace> {
    let bad = |msg: String| Error::Config(format!("malformed trace: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty".into()))?;
    if header != TRACE_COLUMNS.join(",") {
        return Err(bad(format!("unexpected header '{header}'")));
    }
    let mut rows = Vec::new();
    let mut footer = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix('#') {
            let mut kv = BTreeMap::new();
            for part in rest.split(';') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| bad(format!("footer item '{part}'")))?;
                kv.insert(k.to_string(), v.to_string());
            }
            let num = |v: &String| parse_f64("footer", v);
            footer = Some(TraceFooter {
                status: kv
                    .get("status")
                    .cloned()
                    .ok_or_else(|| bad("no status".into()))?,
                x_hat: kv
                    .get("x_hat")
                    .map(|v| v.split(' ').map(|t| parse_f64("x_hat", t)).collect())
                    .transpose()?,
                x_hat_norm: kv.get("x_hat_norm").map(num).transpose()?,
                total_prox_calls: kv
                    .get("total_prox_calls")
                    .map(|v| parse_usize("total_prox_calls", v))
                    .transpose()?
                    .ok_or_else(|| bad("no total_prox_calls".into()))?,
                certificate: kv.get("certificate").map(num).transpose()?,
            });
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != TRACE_COLUMNS.len() {
            return Err(bad(format!("row '{line}' has {} cells", cells.len())));
        }
        let f = |i: usize| parse_f64(TRACE_COLUMNS[i], cells[i]);
        rows.push(TraceRow {
            k: parse_usize("k", cells[0])?,
            tau: f(1)?,
            backtracks: parse_usize("backtracks", cells[2])?,
            bfbe: f(3)?,
            phi_xbar: f(4)?,
            bregman_residual: f(5)?,
            euclid_residual: f(6)?,
            gamma: f(7)?,
            l: f(8)?,
            direction_norm: f(9)?,
        });
    }
    let footer = footer.ok_or_else(|| bad("missing footer".into()))?;
    Ok(Trace { rows, footer })
}

/// Rows `k` whose successor violates `bfbe(k+1) ≤ bfbe(k) − σ·D(k)`, skipping
/// pairs where `γ` changed (adaptive doublings change the envelope).
///
/// `sigma_at_gamma` maps the row's `γ` to the `σ` in force at that row.
pub fn decrease_violations(
    trace: &Trace,
    sigma_at_gamma: impl Fn(f64) -> f64,
    tol: f64,
) -> Vec<usize> {
    trace
        .rows
        .windows(2)
        .filter(|w| w[0].gamma == w[1].gamma)
        .filter(|w| {
            let bound = w[0].bfbe - sigma_at_gamma(w[0].gamma) * w[0].bregman_residual;
            w[1].bfbe > bound + tol * (1.0 + w[0].bfbe.abs())
        })
        .map(|w| w[0].k)
        .collect()
}

/// One line of a [`compare`] summary.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub direction: String,
    pub status: SolveStatus,
    pub iterations: usize,
    pub prox_calls: usize,
    pub final_residual: f64,
    /// First `k` with `D_h(x̄ᵏ, xᵏ) ≤ 1e-12`.
    pub iterations_to_1e12: Option<usize>,
    /// `dist(xᵏ⁺¹, X⋆) / dist(xᵏ, X⋆)` along the run, when `X⋆` is known.
    pub distance_ratios: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CompareSummary {
    pub problem: String,
    pub rows: Vec<CompareRow>,
}

impl CompareSummary {
    pub fn render(&self) -> String {
        let mut s = format!("problem: {}\n", self.problem);
        let _ = writeln!(
            s,
            "{:<14} {:<16} {:>8} {:>10} {:>24} {:>10}",
            "direction", "status", "iters", "prox", "final_residual", "k(1e-12)"
        );
        for r in &self.rows {
            let k12 = r
                .iterations_to_1e12
                .map(|k| k.to_string())
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<14} {:<16} {:>8} {:>10} {:>24} {:>10}",
                r.direction,
                r.status.to_string(),
                r.iterations,
                r.prox_calls,
                fmt_f64(r.final_residual),
                k12
            );
        }
        for r in &self.rows {
            if r.distance_ratios.is_empty() {
                continue;
            }
            let ratios: Vec<String> = r
                .distance_ratios
                .iter()
                .map(|v| format!("{v:.3e}"))
                .collect();
            let _ = writeln!(s, "dist ratios [{}]: {}", r.direction, ratios.join(" "));
        }
        s
    }
}

/// `dist(xᵏ⁺¹, X⋆)/dist(xᵏ, X⋆)` over consecutive records with positive distance.
pub fn distance_ratios(result: &SolveResult) -> Vec<f64> {
    result
        .iterations
        .windows(2)
        .filter_map(|w| match (w[0].solution_distance, w[1].solution_distance) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        })
        .collect()
}

/// Runs every manifest on a shared problem and summarizes them.
pub fn compare(manifests: &[RunManifest]) -> Result<CompareSummary> {
    if manifests.len() < 2 {
        return Err(Error::Config(format!(
            "compare needs at least 2 manifests, got {}",
            manifests.len()
        )));
    }
    let first = &manifests[0];
    for m in &manifests[1..] {
        if m.problem != first.problem
            || m.n != first.n
            || m.seed != first.seed
            || m.kernel != first.kernel
        {
            return Err(Error::Config(format!(
                "compare needs one shared problem; got {}(n={}, seed={}) and {}(n={}, seed={})",
                first.problem, first.n, first.seed, m.problem, m.n, m.seed
            )));
        }
    }
    let mut rows = Vec::with_capacity(manifests.len());
    for m in manifests {
        let outcome = solve_manifest(m)?;
        let r = &outcome.result;
        rows.push(CompareRow {
            direction: m.direction.clone(),
            status: r.status,
            iterations: r.iterations.len().saturating_sub(1),
            prox_calls: r.total_prox_calls,
            final_residual: r.final_residual().unwrap_or(f64::NAN),
            iterations_to_1e12: r
                .iterations
                .iter()
                .find(|it| it.bregman_residual <= 1e-12)
                .map(|it| it.k),
            distance_ratios: distance_ratios(r),
        });
    }
    Ok(CompareSummary {
        problem: first.problem.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_config_text() {
        let m = RunManifest {
            problem: "circle".into(),
            n: 2,
            seed: 42,
            x0: StartPoint::Values(vec![2.0, 0.1 + 0.2]),
            kernel: Some("quartic:1:1".into()),
            direction: "lbfgs:10".into(),
            gamma: Some(0.3),
            sigma: Some(1.0 / 3.0),
            eps: 1e-12,
            imax: Some(30),
            max_iters: 500,
            adaptive: true,
            initial_l: Some(0.01),
            trace_out: Some(PathBuf::from("/tmp/t.csv")),
            format: TraceFormat::Json,
            region_lh: Some(3.0),
            region_sigma_h: Some(0.5),
        };
        let back = RunManifest::from_config_str(&m.to_config_string()).unwrap();
        assert_eq!(back, m);
        let d = RunManifest::default();
        assert_eq!(
            RunManifest::from_config_str(&d.to_config_string()).unwrap(),
            d
        );
    }

    #[test]
    fn config_errors() {
        assert!(RunManifest::from_config_str("bogus = 1").is_err());
        assert!(RunManifest::from_config_str("n = two").is_err());
        assert!(RunManifest::from_config_str("no equals sign").is_err());
        let m = RunManifest::from_config_str("# comment\n\nproblem = l1-ls\n").unwrap();
        assert_eq!(m.problem, "l1-ls");
    }

    #[test]
    fn fmt_is_lossless() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn compare_contract() {
        let m = RunManifest::default();
        assert!(compare(std::slice::from_ref(&m)).is_err());
        let other = RunManifest {
            problem: "circle".into(),
            ..m.clone()
        };
        assert!(compare(&[m, other]).is_err());
    }
}
