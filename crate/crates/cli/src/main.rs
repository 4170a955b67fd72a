//! `tauber`: command-line access to rates, operators, certification and the kernel self-test.
//!
//! Exit codes: 0 ok, 1 internal, 2 bad input, 3 singular, 4 violated or
//! self-test failure, 5 pre-asymptotic or inconclusive, 6 hypothesis refused.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod inputs;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use tauber::analysis::{certify_decay, certify_sequence, epsilon_schedule, AnalysisError, DecayVerdict};
use tauber::kernels::selftest::{run_selftest, SelfTestConfig};
use tauber::kernels::{coefficient_bounds_check, KernelError};
use tauber::operators::{fit_envelope, OperatorError};
use tauber::rates::{predicted_bound, Prediction, RateError};
use tauber::scalar::{linspace, logspace};
use tauber::{AnalysisConfig, DerivedRate, Operator};

use output::{csv, emit, num, to_json};

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }

    fn input(msg: impl Into<String>) -> Self {
        Self::new(2, msg)
    }
}

impl From<RateError> for Failure {
    fn from(e: RateError) -> Self {
        let code = if matches!(e, RateError::NoConvergence(_)) { 1 } else { 2 };
        Self::new(code, e.to_string())
    }
}

impl From<OperatorError> for Failure {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::Singular { theta } => Self::new(3, format!("singular: e^(i theta) is in the spectrum at theta = {}", num(theta))),
            OperatorError::Divergent { .. } => Self::new(6, format!("hypothesis failed (power-bounded): {e}")),
            OperatorError::Input(_) => Self::input(e.to_string()),
            OperatorError::Rate(r) => r.into(),
        }
    }
}

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Tolerance { .. } => Self::new(1, e.to_string()),
            KernelError::Rate(r) => r.into(),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Input(m) => Self::input(m),
            AnalysisError::Refused { hypothesis } => Self::new(6, format!("certification refused: {hypothesis}")),
            AnalysisError::Rate(r) => r.into(),
            AnalysisError::Operator(o) => o.into(),
            AnalysisError::Kernel(k) => k.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(1, format!("i/o error: {e}"))
    }
}

type Outcome = Result<u8, Failure>;

#[derive(Parser)]
#[command(name = "tauber", version, about = "Quantified decay rates for sequences and operator orbits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate, invert and schedule rate functions.
    #[command(subcommand)]
    Rates(RatesCmd),
    /// Resolvent profiles, orbit decay and singularity scans.
    #[command(subcommand)]
    Operator(OperatorCmd),
    /// Calibrate and validate the predicted decay of an orbit or sequence.
    Certify(CertifyArgs),
    /// Kernel identities.
    #[command(subcommand)]
    Kernel(KernelCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Spacing {
    Log,
    Lin,
}

#[derive(Args)]
struct RateArgs {
    /// poly:C,alpha | exp:alpha | const:v | floor | inline JSON | @file.json
    #[arg(long)]
    rate: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RatesCmd {
    /// m(eps) and, with --kind, the derived rate.
    Eval {
        #[command(flatten)]
        common: RateArgs,
        /// mlog | mk:K
        #[arg(long)]
        kind: Option<String>,
        /// Comma-separated; accepts pi, pi/N, Npi.
        #[arg(long)]
        eps: String,
    },
    /// Solve derived(eps) = y for eps.
    Invert {
        #[command(flatten)]
        common: RateArgs,
        #[arg(long, default_value = "mlog")]
        kind: String,
        #[arg(long)]
        y: String,
    },
    /// eps_n solving derived(eps) = c n, and the predicted bound at each n.
    Schedule {
        #[command(flatten)]
        common: RateArgs,
        /// smooth | ck:K
        #[arg(long, default_value = "smooth")]
        regime: String,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long)]
        n: String,
    },
}

#[derive(Args)]
struct OpArgs {
    /// Operator JSON file.
    #[arg(long)]
    op: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Points per sign of theta.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value = "1e-4")]
    theta_min: String,
    #[arg(long, default_value = "pi")]
    theta_max: String,
    #[arg(long, value_enum, default_value = "log")]
    spacing: Spacing,
    /// Explicit angles; overrides the generated grid.
    #[arg(long)]
    theta: Option<String>,
}

impl GridArgs {
    fn angles(&self) -> Result<Vec<f64>, Failure> {
        if let Some(list) = &self.theta {
            let mut v = inputs::float_list(list).map_err(Failure::input)?;
            if v.is_empty() || v.iter().any(|t| t.abs() > std::f64::consts::PI) {
                return Err(Failure::input("--theta needs angles in [-pi, pi]"));
            }
            v.sort_by(|a, b| a.total_cmp(b));
            return Ok(v);
        }
        let lo = inputs::float(&self.theta_min).map_err(Failure::input)?;
        let hi = inputs::float(&self.theta_max).map_err(Failure::input)?;
        if !(lo > 0.0 && lo <= hi && hi <= std::f64::consts::PI) || self.grid == 0 {
            return Err(Failure::input("grid needs 0 < theta-min <= theta-max <= pi and grid >= 1"));
        }
        let pos = match self.spacing {
            Spacing::Log => logspace(lo, hi, self.grid),
            Spacing::Lin => linspace(lo, hi, self.grid),
        };
        let mut out: Vec<f64> = pos.iter().rev().map(|t| -t).collect();
        out.extend(pos);
        Ok(out)
    }
}

#[derive(Subcommand)]
enum OperatorCmd {
    /// Resolvent norms on the unit circle and their envelope.
    Profile {
        #[command(flatten)]
        common: OpArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// d_n = ||T^n (I - T)|| for n = 0..n-max.
    Decay {
        #[command(flatten)]
        common: OpArgs,
        #[arg(long, default_value_t = 1000)]
        n_max: u64,
    },
    /// Angles where the resolvent norm exceeds the threshold.
    Scan {
        #[command(flatten)]
        common: OpArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1e6)]
        threshold: f64,
    },
}

#[derive(Args)]
struct CertifyArgs {
    /// Operator JSON file.
    #[arg(long, conflicts_with = "seq", required_unless_present = "seq")]
    op: Option<PathBuf>,
    /// ones | alternating | impulse | zeros | geometric:re[,im]
    #[arg(long)]
    seq: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    /// a:b
    #[arg(long)]
    calib: Option<String>,
    #[arg(long)]
    valid: Option<String>,
    #[arg(long)]
    slope: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    theta_min: Option<String>,
    #[arg(long)]
    theta_max: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    hypothesis_window: Option<u64>,
    /// Report path; a CSV table is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Check the kernel identities.
    Selftest {
        /// Comma-separated eps values in (0, pi/2].
        #[arg(long)]
        eps: Option<String>,
        /// closed-form-vs-quadrature | phi-identity | reconstruction | duality | coeff-bounds
        #[arg(long)]
        identity: Option<String>,
        /// With --identity coeff-bounds: the exact check at (n, k).
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const IDENTITIES: [&str; 5] = ["closed-form-vs-quadrature", "phi-identity", "reconstruction", "duality", "coeff-bounds"];

fn render(format: Format, header: &[&str], rows: Vec<Vec<String>>) -> String {
    match format {
        Format::Csv => csv(header, rows),
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .into_iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, cell)| {
                            let v = match cell.parse::<f64>() {
                                Ok(x) if x.is_finite() => json!(x),
                                _ if cell.is_empty() => serde_json::Value::Null,
                                _ => json!(cell),
                            };
                            (h.to_string(), v)
                        })
                        .collect()
                })
                .collect();
            to_json(&objs)
        }
    }
}

fn run_rates(cmd: RatesCmd) -> Outcome {
    let (common, header, rows): (RateArgs, Vec<&str>, Vec<Vec<String>>) = match cmd {
        RatesCmd::Eval { common, kind, eps } => {
            let m = inputs::rate(&common.rate).map_err(Failure::input)?;
            let eps = inputs::float_list(&eps).map_err(Failure::input)?;
            let derived = match kind {
                Some(k) => Some(DerivedRate::new(m.clone(), inputs::kind(&k).map_err(Failure::input)?)?),
                None => None,
            };
            let mut rows = Vec::new();
            for e in eps {
                let mut row = vec![num(e), num(m.eval(e)?)];
                if let Some(d) = &derived {
                    row.push(num(d.eval(e)?));
                }
                rows.push(row);
            }
            let header = if derived.is_some() { vec!["eps", "m", "derived"] } else { vec!["eps", "m"] };
            (common, header, rows)
        }
        RatesCmd::Invert { common, kind, y } => {
            let m = inputs::rate(&common.rate).map_err(Failure::input)?;
            let d = DerivedRate::new(m, inputs::kind(&kind).map_err(Failure::input)?)?;
            let mut rows = Vec::new();
            for y in inputs::float_list(&y).map_err(Failure::input)? {
                let e = d.invert(y)?;
                rows.push(vec![num(y), num(e), num(d.eval(e)?)]);
            }
            (common, vec!["y", "eps", "derived_at_eps"], rows)
        }
        RatesCmd::Schedule { common, regime, c, n } => {
            let m = inputs::rate(&common.rate).map_err(Failure::input)?;
            let regime = inputs::regime(&regime).map_err(Failure::input)?;
            regime.check_c(c)?;
            let ns = inputs::float_list(&n).map_err(Failure::input)?;
            let schedule = epsilon_schedule(&m, regime, c, &ns)?;
            let mut rows = Vec::new();
            for (&n, eps) in ns.iter().zip(schedule) {
                let pred = if n >= 0.0 && n.fract() == 0.0 { predicted_bound(&m, regime, c, n as u64)? } else { Prediction::PreAsymptotic };
                let cell = |v: Option<f64>| v.map(num).unwrap_or_default();
                rows.push(vec![num(n), cell(eps), cell(pred.value())]);
            }
            (common, vec!["n", "eps", "predicted"], rows)
        }
    };
    emit(common.out.as_deref(), &render(common.format, &header, rows))?;
    Ok(0)
}

fn load_operator(path: &Path) -> Result<Operator, Failure> {
    let spec = inputs::operator(path).map_err(Failure::input)?;
    Ok(spec.build()?)
}

fn run_operator(cmd: OperatorCmd) -> Outcome {
    match cmd {
        OperatorCmd::Profile { common, grid } => {
            let op = load_operator(&common.op)?;
            let angles = grid.angles()?;
            let mut samples = Vec::with_capacity(angles.len());
            for &th in &angles {
                samples.push((th, op.resolvent_norm(th)?));
            }
            let off_axis: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.0 != 0.0).collect();
            let envelope = if off_axis.is_empty() { None } else { Some(fit_envelope(&off_axis)?) };
            let text = match common.format {
                Format::Csv => {
                    let mut rows = Vec::new();
                    for &(th, v) in &samples {
                        let env = match &envelope {
                            Some(m) if th != 0.0 => num(m.eval(th.abs())?),
                            _ => String::new(),
                        };
                        rows.push(vec![num(th), num(v), env]);
                    }
                    csv(&["theta", "resolvent_norm", "envelope"], rows)
                }
                Format::Json => to_json(&json!({ "samples": samples, "envelope": envelope })),
            };
            emit(common.out.as_deref(), &text)?;
        }
        OperatorCmd::Decay { common, n_max } => {
            let op = load_operator(&common.op)?;
            let orbit = op.orbit_decay(n_max)?;
            let text = match common.format {
                Format::Csv => csv(&["n", "d_n"], orbit.values.iter().enumerate().map(|(i, v)| vec![(orbit.start + i as u64).to_string(), num(*v)])),
                Format::Json => to_json(&orbit),
            };
            emit(common.out.as_deref(), &text)?;
        }
        OperatorCmd::Scan { common, grid, threshold } => {
            if !(threshold > 0.0) {
                return Err(Failure::input("--threshold must be positive"));
            }
            let op = load_operator(&common.op)?;
            let flagged = op.singularity_scan(&grid.angles()?, threshold);
            let text = match common.format {
                Format::Csv => csv(&["theta"], flagged.iter().map(|t| vec![num(*t)])),
                Format::Json => to_json(&json!({ "threshold": threshold, "flagged": flagged })),
            };
            emit(common.out.as_deref(), &text)?;
            if !flagged.is_empty() {
                eprintln!("{} angle(s) above threshold", flagged.len());
            }
        }
    }
    Ok(0)
}

fn analysis_config(a: &CertifyArgs) -> Result<AnalysisConfig, Failure> {
    let mut cfg = AnalysisConfig::default();
    let win = |s: &Option<String>, d: (u64, u64)| s.as_deref().map_or(Ok(d), inputs::window).map_err(Failure::input);
    if let Some(c) = a.c {
        cfg.c = c;
    }
    cfg.calib = win(&a.calib, cfg.calib)?;
    cfg.valid = win(&a.valid, cfg.valid)?;
    cfg.slope_window = win(&a.slope, cfg.slope_window)?;
    if let Some(g) = a.grid {
        cfg.grid = g;
    }
    if let Some(t) = &a.theta_min {
        cfg.theta_min = inputs::float(t).map_err(Failure::input)?;
    }
    if let Some(t) = &a.theta_max {
        cfg.theta_max = inputs::float(t).map_err(Failure::input)?;
    }
    if let Some(t) = a.threshold {
        cfg.scan_threshold = t;
    }
    if let Some(h) = a.hypothesis_window {
        cfg.hypothesis_window = h;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_certify(a: CertifyArgs) -> Outcome {
    let cfg = analysis_config(&a)?;
    let report = match (&a.op, &a.seq) {
        (Some(path), _) => certify_decay(&inputs::operator(path).map_err(Failure::input)?, &cfg)?,
        (None, Some(s)) => {
            let (seq, boundary) = inputs::sequence(s).map_err(Failure::input)?;
            certify_sequence(&seq, &boundary, &cfg)?
        }
        (None, None) => return Err(Failure::input("give --op or --seq")),
    };
    let text = match a.format {
        Format::Json => to_json(&report),
        Format::Csv => report.to_csv(),
    };
    emit(a.out.as_deref(), &text)?;
    if let (Some(path), Format::Json) = (&a.out, a.format) {
        std::fs::write(path.with_extension("csv"), report.to_csv())?;
    }
    let verdict = report.verdict();
    let inconclusive = report.hypotheses.any_inconclusive();
    let label = match verdict {
        DecayVerdict::Certified => "certified",
        DecayVerdict::Violated => "violated",
        DecayVerdict::PreAsymptotic => "pre-asymptotic",
    };
    eprintln!("verdict: {label}");
    if let Some(c) = report.certificate.fitted_c {
        eprintln!("fitted C: {}", num(c));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(match verdict {
        DecayVerdict::Violated => 4,
        DecayVerdict::PreAsymptotic => 5,
        DecayVerdict::Certified if inconclusive => 5,
        DecayVerdict::Certified => 0,
    })
}

#[derive(Serialize)]
struct Selected<'a> {
    eps: &'a [f64],
    identities: Vec<&'a tauber::kernels::selftest::IdentityResult>,
    all_pass: bool,
}

fn run_kernel(cmd: KernelCmd) -> Outcome {
    let KernelCmd::Selftest { eps, identity, n, k, out } = cmd;
    if let Some(name) = &identity {
        if !IDENTITIES.contains(&name.as_str()) {
            return Err(Failure::input(format!("unknown identity '{name}' (expected one of {})", IDENTITIES.join(", "))));
        }
    }
    if identity.as_deref() == Some("coeff-bounds") && (n.is_some() || k.is_some()) {
        let d = SelfTestConfig::default();
        let b = coefficient_bounds_check(n.unwrap_or(d.bounds_n), k.unwrap_or(d.bounds_k))?;
        emit(out.as_deref(), &to_json(&b))?;
        if !b.bounds_ok {
            eprintln!("failed: coeff-bounds");
            return Ok(4);
        }
        return Ok(0);
    }
    let mut cfg = SelfTestConfig::default();
    if let Some(e) = eps {
        cfg.eps = inputs::float_list(&e).map_err(Failure::input)?;
    }
    if let Some(n) = n {
        cfg.bounds_n = n;
    }
    if let Some(k) = k {
        cfg.bounds_k = k;
    }
    let report = run_selftest(&cfg)?;
    let (text, failed) = match &identity {
        Some(name) => {
            let picked: Vec<_> = report.identities.iter().filter(|r| &r.name == name).collect();
            let failed: Vec<String> = picked.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
            (to_json(&Selected { eps: &cfg.eps, all_pass: failed.is_empty(), identities: picked }), failed)
        }
        None => (to_json(&report), report.failed().into_iter().map(String::from).collect()),
    };
    emit(out.as_deref(), &text)?;
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(4)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Rates(c) => run_rates(c),
        Cmd::Operator(c) => run_operator(c),
        Cmd::Certify(a) => run_certify(a),
        Cmd::Kernel(c) => run_kernel(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
