//! Command-line surface: argument parsing, flat `key=value` run
//! configuration, the five commands and their CSV/JSON output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::coupled::{coupled_threshold, wave_profile_series, CouplingSpec, IterationLimits};
use crate::ensembles::{build_system, Ensemble, ScalarSystem};
use crate::error::{Error, Result};
use crate::mc::{simulate_extrinsic, z_score, McConfig};
use crate::potential::{
    bp_threshold, potential_curve, potential_threshold_from, Probe, ThresholdResult, PREDICATE_GRID, X_TOL,
};
use crate::quadrature::DEFAULT_TOL;
use crate::transfer::{StreamProbs, TransferFunction};

/// Rate-1/2 component used by PCC and SCC when no generator is given.
pub const DEFAULT_RATE_HALF: &str = "1,5/7";
/// Rate-2/3 component used by BCC when no generator is given.
pub const DEFAULT_RATE_TWO_THIRDS: &str = "1 0 1/7; 0 1 5/7";

/// Points within this many standard errors count as agreeing.
pub const VALIDATE_SIGMAS: f64 = 4.0;
/// Fraction of agreeing points needed for a passing validation.
pub const VALIDATE_PASS_FRACTION: f64 = 0.95;

#[derive(Parser, Debug)]
#[command(
    name = "sctc",
    version,
    about = "Exact density evolution, potentials and coupled thresholds for turbo-like ensembles on the erasure channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Tabulate f(x; eps) and g(x) on a grid (CSV x,eps,f,g).
    Transfer,
    /// Potential curves for a list of channel values (CSV x,eps,U,Uprime).
    Potential,
    /// BP and potential thresholds with predicate traces (JSON).
    Thresholds,
    /// Coupled-chain thresholds per coupling memory (JSON), optional wave CSV.
    Coupled,
    /// Compare exact transfer functions with Monte-Carlo decoding (JSON).
    Validate,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// pcc, scc or bcc
    #[arg(long, global = true)]
    pub ensemble: Option<String>,
    /// Component generator matrix in octal, e.g. "1,5/7" or "1 0 1/7; 0 1 5/7"
    #[arg(long = "gen", global = true)]
    pub generator: Option<String>,
    /// Flat key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bisection tolerance in eps
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Override any configuration key, e.g. --set length=30 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

/// Every tunable of a run. Sources are applied in the order defaults,
/// configuration file, `--set` overrides, dedicated flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub ensemble: Ensemble,
    pub generator: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tol: Option<f64>,
    /// transfer: points per axis of the `(x, eps)` grid
    pub grid: usize,
    /// potential: channel values of the curves
    pub eps: Vec<f64>,
    /// potential: points per curve, `x = 0` included
    pub x_points: usize,
    /// coupled
    pub length: usize,
    pub memory: Vec<usize>,
    pub max_iter: usize,
    pub conv_tol: f64,
    pub waves: Option<PathBuf>,
    pub wave_eps: f64,
    pub every: usize,
    /// validate
    pub points: usize,
    pub probs: Option<Vec<Vec<f64>>>,
    pub sections: usize,
    pub trials: usize,
    pub window: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mc = McConfig::default();
        let limits = IterationLimits::default();
        RunConfig {
            ensemble: Ensemble::Pcc,
            generator: None,
            out: None,
            seed: 7,
            tol: None,
            grid: 11,
            eps: vec![0.6428, 0.6554],
            x_points: 201,
            length: 50,
            memory: vec![0, 1, 2, 3],
            max_iter: limits.max_iter,
            conv_tol: limits.conv_tol,
            waves: None,
            wave_eps: 0.65,
            every: 10,
            points: 50,
            probs: None,
            sections: mc.sections,
            trials: mc.trials,
            window: mc.measure_window,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl RunConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "ensemble" => self.ensemble = value.parse()?,
            "gen" | "generator" => self.generator = Some(value.to_string()),
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = parse_num(key, value)?,
            "tol" => self.tol = Some(parse_num(key, value)?),
            "grid" => self.grid = parse_num(key, value)?,
            "eps" => self.eps = parse_list(key, value)?,
            "x_points" => self.x_points = parse_num(key, value)?,
            "length" => self.length = parse_num(key, value)?,
            "memory" => self.memory = parse_list(key, value)?,
            "max_iter" => self.max_iter = parse_num(key, value)?,
            "conv_tol" => self.conv_tol = parse_num(key, value)?,
            "waves" => self.waves = Some(PathBuf::from(value)),
            "wave_eps" => self.wave_eps = parse_num(key, value)?,
            "every" => self.every = parse_num(key, value)?,
            "points" => self.points = parse_num(key, value)?,
            "probs" => {
                self.probs = Some(
                    value
                        .split(';')
                        .filter(|s| !s.trim().is_empty())
                        .map(|p| parse_list(key, p))
                        .collect::<Result<_>>()?,
                )
            }
            "sections" => self.sections = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "window" => self.window = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Apply a flat configuration text: one `key = value` per line, `#`
    /// starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        for item in &args.set {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set '{item}': expected KEY=VALUE")))?;
            cfg.set(key, value)?;
        }
        if let Some(e) = &args.ensemble {
            cfg.ensemble = e.parse()?;
        }
        if let Some(g) = &args.generator {
            cfg.generator = Some(g.clone());
        }
        if let Some(o) = &args.out {
            cfg.out = Some(o.clone());
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        if let Some(t) = args.tol {
            cfg.tol = Some(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("tol {t} must lie in (0, 1)"));
            }
        }
        if self.grid < 2 {
            return bad(format!("grid {} must be at least 2", self.grid));
        }
        if self.x_points < 2 {
            return bad(format!("x_points {} must be at least 2", self.x_points));
        }
        for &e in self.eps.iter().chain(std::iter::once(&self.wave_eps)) {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("channel value {e} is outside [0, 1]"));
            }
        }
        if self.eps.is_empty() {
            return bad("eps list is empty".into());
        }
        if self.memory.is_empty() {
            return bad("memory list is empty".into());
        }
        if let Some(&m) = self.memory.iter().find(|&&m| m > self.length) {
            return bad(format!("memory {m} exceeds length {}", self.length));
        }
        if self.length == 0 || self.every == 0 || self.max_iter == 0 {
            return bad("length, every and max_iter must be positive".into());
        }
        if !(self.conv_tol > 0.0) {
            return bad(format!("conv_tol {} must be positive", self.conv_tol));
        }
        if self.points == 0 {
            return bad("points must be positive".into());
        }
        Ok(())
    }

    pub fn generator(&self) -> &str {
        match (&self.generator, self.ensemble) {
            (Some(g), _) => g,
            (None, Ensemble::Bcc) => DEFAULT_RATE_TWO_THIRDS,
            (None, _) => DEFAULT_RATE_HALF,
        }
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig {
            sections: self.sections,
            trials: self.trials,
            seed: self.seed,
            measure_window: self.window,
        }
    }

    pub fn limits(&self) -> IterationLimits {
        IterationLimits {
            max_iter: self.max_iter,
            conv_tol: self.conv_tol,
        }
    }
}

// ---------------------------------------------------------------------------
// formatting

/// `%.12g`: twelve significant digits, trailing zeros dropped, exponent form
/// below `1e-5` and from `1e12` on. Independent of locale.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (11 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `n` evenly spaced points on `[0, 1]` with both ends.
fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

// ---------------------------------------------------------------------------
// commands

/// Text produced by a command: the main output and side files.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub main: String,
    pub files: Vec<(PathBuf, String)>,
    /// False when the command ran but its check failed.
    pub ok: bool,
}

impl CommandOutput {
    fn ok(main: String) -> Self {
        CommandOutput {
            main,
            files: Vec::new(),
            ok: true,
        }
    }
}

pub fn system_for(cfg: &RunConfig) -> Result<ScalarSystem> {
    build_system(cfg.ensemble, cfg.generator())
}

pub fn cmd_transfer(cfg: &RunConfig) -> Result<CommandOutput> {
    let sys = system_for(cfg)?;
    transfer_table(&sys, cfg.grid).map(CommandOutput::ok)
}

/// CSV `x,eps,f,g` over a `grid × grid` lattice of `[0, 1]^2`.
pub fn transfer_table(sys: &ScalarSystem, grid: usize) -> Result<String> {
    let pts = unit_grid(grid);
    let mut out = String::from("x,eps,f,g\n");
    for &x in &pts {
        let g = sys.g(x)?;
        for &e in &pts {
            let f = sys.f(x, e)?;
            writeln!(out, "{},{},{},{}", fmt_g(x), fmt_g(e), fmt_g(f), fmt_g(g)).unwrap();
        }
    }
    Ok(out)
}

pub fn cmd_potential(cfg: &RunConfig) -> Result<CommandOutput> {
    let sys = system_for(cfg)?;
    potential_table(&sys, &cfg.eps, cfg.x_points).map(CommandOutput::ok)
}

/// CSV `x,eps,U,Uprime`, one block of `x_points` rows per channel value.
pub fn potential_table(sys: &ScalarSystem, eps: &[f64], x_points: usize) -> Result<String> {
    let xs = unit_grid(x_points);
    let mut out = String::from("x,eps,U,Uprime\n");
    for &e in eps {
        for p in potential_curve(sys, e, &xs)? {
            writeln!(out, "{},{},{},{}", fmt_g(p.x), fmt_g(p.eps), fmt_g(p.u), fmt_g(p.u_prime)).unwrap();
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub ensemble: String,
    pub generator: String,
    pub eps_bp: f64,
    pub eps_star: f64,
    pub eps_bp_bracket: [f64; 2],
    pub eps_star_bracket: [f64; 2],
    pub tolerances: Tolerances,
    pub bp_trace: Vec<Probe>,
    pub star_trace: Vec<Probe>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub eps: f64,
    pub x: f64,
    pub quadrature: f64,
    pub grid: usize,
}

/// BP and potential thresholds of any scalar system.
pub fn threshold_report(sys: &ScalarSystem, generator: &str, tol: f64) -> Result<ThresholdReport> {
    let bp = bp_threshold(sys, tol)?;
    let star = potential_threshold_from(sys, bp.lower, tol)?;
    Ok(ThresholdReport {
        ensemble: sys.ensemble().to_string(),
        generator: generator.to_string(),
        eps_bp: bp.value,
        eps_star: star.value,
        eps_bp_bracket: [bp.lower, bp.upper],
        eps_star_bracket: [star.lower, star.upper],
        tolerances: Tolerances {
            eps: tol,
            x: X_TOL,
            quadrature: DEFAULT_TOL,
            grid: PREDICATE_GRID,
        },
        bp_trace: bp.trace,
        star_trace: star.trace,
    })
}

pub fn cmd_thresholds(cfg: &RunConfig) -> Result<CommandOutput> {
    let sys = system_for(cfg)?;
    let report = threshold_report(&sys, cfg.generator(), cfg.tol.unwrap_or(1e-6))?;
    Ok(CommandOutput::ok(to_json(&report)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledEntry {
    pub memory: usize,
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
    pub probes: usize,
    pub trace: Vec<Probe>,
}

impl CoupledEntry {
    fn new(memory: usize, r: ThresholdResult) -> Self {
        CoupledEntry {
            memory,
            threshold: r.value,
            lower: r.lower,
            upper: r.upper,
            probes: r.iterations,
            trace: r.trace,
        }
    }
}

/// Default bisection tolerance of coupled thresholds; each probe runs a
/// whole chain to convergence.
pub const COUPLED_DEFAULT_TOL: f64 = 1e-4;

pub fn cmd_coupled(cfg: &RunConfig) -> Result<CommandOutput> {
    let sys = system_for(cfg)?;
    let tol = cfg.tol.unwrap_or(COUPLED_DEFAULT_TOL);
    let limits = cfg.limits();
    let bp = bp_threshold(&sys, tol.min(1e-6))?;
    let mut results = Vec::new();
    for &m in &cfg.memory {
        let spec = CouplingSpec::new(cfg.length, m)?;
        results.push(CoupledEntry::new(m, coupled_threshold(&sys, &spec, tol, &limits)?));
    }
    let mut files = Vec::new();
    let mut waves = serde_json::Value::Null;
    if let Some(path) = &cfg.waves {
        let memory = *cfg.memory.iter().max().expect("validated non-empty");
        let spec = CouplingSpec::new(cfg.length, memory)?;
        let series = wave_profile_series(&sys, &spec, cfg.wave_eps, cfg.every, &limits)?;
        let mut csv = String::from("iter,t,x\n");
        for snap in &series {
            for (t, x) in snap.profile.iter().enumerate() {
                writeln!(csv, "{},{},{}", snap.iteration, t + 1, fmt_g(*x)).unwrap();
            }
        }
        waves = json!({
            "path": path.display().to_string(),
            "eps": cfg.wave_eps,
            "memory": memory,
            "every": cfg.every,
            "snapshots": series.len(),
        });
        files.push((path.clone(), csv));
    }
    let report = json!({
        "ensemble": cfg.ensemble.to_string(),
        "generator": cfg.generator(),
        "length": cfg.length,
        "tol": tol,
        "max_iter": limits.max_iter,
        "conv_tol": limits.conv_tol,
        "uncoupled_eps_bp": bp.value,
        "results": results,
        "waves": waves,
    });
    Ok(CommandOutput {
        main: to_json(&report)?,
        files,
        ok: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationPoint {
    pub probs: Vec<f64>,
    pub exact: Vec<f64>,
    pub mc: Vec<f64>,
    pub stderr: Vec<f64>,
    pub z: Vec<f64>,
    /// Every stream within [`VALIDATE_SIGMAS`] standard errors.
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub generator: String,
    pub seed: u64,
    pub mc: McConfig,
    pub points: Vec<ValidationPoint>,
    pub fraction_within: f64,
    pub pass: bool,
}

/// Exact extrinsic values against Monte-Carlo estimates at `points`.
pub fn validation_report(
    tf: &TransferFunction,
    points: &[Vec<f64>],
    mc: &McConfig,
) -> Result<ValidationReport> {
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let probs = StreamProbs::new(p.clone())?;
        let exact = tf.extrinsic(&probs)?.into_vec();
        let cfg = McConfig {
            seed: mc.seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..mc.clone()
        };
        let est = simulate_extrinsic(tf.trellis(), &probs, &cfg)?;
        let z: Vec<f64> = (0..exact.len())
            .map(|s| z_score(exact[s], est.mean[s], est.stderr[s], est.samples))
            .collect();
        out.push(ValidationPoint {
            probs: p.clone(),
            within: z.iter().all(|z| z.abs() <= VALIDATE_SIGMAS),
            exact,
            mc: est.mean,
            stderr: est.stderr,
            z,
        });
    }
    let fraction = out.iter().filter(|p| p.within).count() as f64 / out.len().max(1) as f64;
    Ok(ValidationReport {
        generator: tf.trellis().generator().text().to_string(),
        seed: mc.seed,
        mc: mc.clone(),
        points: out,
        fraction_within: fraction,
        pass: fraction >= VALIDATE_PASS_FRACTION,
    })
}

/// `count` points drawn uniformly from `[0, 1]^streams`.
pub fn random_points(streams: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..streams).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<CommandOutput> {
    let tf = Arc::new(TransferFunction::from_generator(cfg.generator())?);
    let points = match &cfg.probs {
        Some(p) => p.clone(),
        None => random_points(tf.num_streams(), cfg.points, cfg.seed),
    };
    let report = validation_report(&tf, &points, &cfg.mc_config())?;
    Ok(CommandOutput {
        main: to_json(&report)?,
        files: Vec::new(),
        ok: report.pass,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<CommandOutput> {
    match command {
        Command::Transfer => cmd_transfer(cfg),
        Command::Potential => cmd_potential(cfg),
        Command::Thresholds => cmd_thresholds(cfg),
        Command::Coupled => cmd_coupled(cfg),
        Command::Validate => cmd_validate(cfg),
    }
}

/// Write `contents` to a temporary file next to `path`, then rename it over
/// `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Parse arguments, run the command and write its outputs. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("sctc: {:?} check failed", cli.command);
            1
        }
        Err(e) => {
            eprintln!("sctc: {e}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = RunConfig::from_args(&cli.common)?;
    let output = run_command(cli.command, &cfg)?;
    for (path, text) in &output.files {
        write_atomic(path, text)?;
    }
    match &cfg.out {
        Some(path) => write_atomic(path, &output.main)?,
        None => std::io::stdout().write_all(output.main.as_bytes())?,
    }
    Ok(output.ok)
}
