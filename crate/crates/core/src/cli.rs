//! Command-line front end.
//!
//! `asymap {feasibility|sweep|eigen|check} <scenario.json> [flags]`.
//! Every command prints a human-readable report, or JSON with `--json`, and
//! returns one of the [`exit`] codes. [`run`] does the whole invocation in
//! process and hands back what would have been printed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{
    bottleneck_ranking, feasibility_check, scaling_diagnostics, sweep, BottleneckOutcome, ScalingReport, SweepResult,
    TailFit,
};
use crate::asymptotic::check_asymptotic_properties;
use crate::mappings::{
    check_standard_properties, InterferenceMapping, PropertyReport, DEFAULT_PROPERTY_SAMPLES, DEFAULT_PROPERTY_SEED,
};
use crate::scenario::{Model, Scenario};
use crate::solvers::{conditional_eigen, spectral_radius, EigenTarget, SpectralMethod};
use crate::{Error, Result};

pub mod exit {
    pub const FEASIBLE: i32 = 0;
    pub const INPUT_ERROR: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const NEAR_CRITICAL: i32 = 3;
    pub const NO_CONVERGENCE: i32 = 4;
    /// `check` found property violations.
    pub const VIOLATIONS: i32 = 2;
}

#[derive(Debug, Parser)]
#[command(
    name = "asymap",
    version,
    about = "Feasibility, sweeps and eigenpairs for interference mappings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the mapping has a fixed point.
    Feasibility(FeasibilityArgs),
    /// Sweep the power budget and write utility/efficiency CSVs.
    Sweep(SweepArgs),
    /// Conditional eigenpair of the asymptotic mapping or of the mapping itself.
    Eigen(EigenArgs),
    /// Sample the standard-interference and asymptotic properties.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    pub scenario: PathBuf,
    /// Also solve for the fixed point when one exists.
    #[arg(long)]
    pub fixed_point: bool,
    /// Rank base stations by load (load scenarios only).
    #[arg(long)]
    pub rank: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    #[arg(long, required_unless_present = "grid")]
    pub pbar_min: Option<f64>,
    #[arg(long, required_unless_present = "grid")]
    pub pbar_max: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    /// Log-spaced grid instead of linear.
    #[arg(long)]
    pub log: bool,
    /// Explicit comma-separated budgets, instead of min/max/points.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["pbar_min", "pbar_max", "log"])]
    pub grid: Option<Vec<f64>>,
    /// Output prefix: writes `<prefix>_sweep.csv` and `<prefix>_power.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Asymptotic,
    Mapping,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = Target::Asymptotic)]
    pub target: Target,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub scenario: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PROPERTY_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_PROPERTY_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

/// What an invocation printed and its exit code.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn input_error(msg: impl std::fmt::Display) -> Self {
        Output {
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
            code: exit::INPUT_ERROR,
        }
    }
}

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn to_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    code: exit::INPUT_ERROR,
                }
            } else {
                Output {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                }
            }
        }
    }
}

pub fn execute(cmd: &Command) -> Output {
    match cmd {
        Command::Feasibility(a) => cmd_feasibility(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Eigen(a) => cmd_eigen(a),
        Command::Check(a) => cmd_check(a),
    }
}

fn load(path: &Path) -> std::result::Result<(Scenario, String), Output> {
    let scenario = Scenario::read(path).map_err(|e| Output::input_error(format!("{}: {e}", path.display())))?;
    let mut warnings = String::new();
    for w in &scenario.warnings {
        let _ = writeln!(warnings, "warning: {w}");
    }
    Ok((scenario, warnings))
}

fn describe(s: &Scenario) -> String {
    match &s.model {
        Model::Affine(a) => format!("affine, N = {}", a.dim()),
        Model::Load(l) => format!("load, {} base stations, {} users", l.num_base_stations(), l.num_users()),
    }
}

fn failure(stderr: String, code: i32, e: Error) -> Output {
    Output {
        stdout: String::new(),
        stderr: format!("{stderr}error: {e}\n"),
        code,
    }
}

pub fn cmd_feasibility(args: &FeasibilityArgs) -> Output {
    let (s, mut stderr) = match load(&args.scenario) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let result = (|| -> Result<_> {
        let m = s.mapping()?;
        let a = s.asymptotic()?;
        let verdict = feasibility_check(m.as_ref(), &a, args.fixed_point, &s.solver)?;
        let ranking = match (&s.model, args.rank) {
            (Model::Load(l), true) => Some(bottleneck_ranking(l, &s.solver)?),
            _ => None,
        };
        Ok((verdict, ranking))
    })();
    let (v, ranking) = match result {
        Ok(r) => r,
        Err(e) => return failure(stderr, exit::NO_CONVERGENCE, e),
    };
    let (word, code) = if v.near_critical {
        ("near-critical", exit::NEAR_CRITICAL)
    } else if v.feasible {
        ("feasible", exit::FEASIBLE)
    } else {
        ("infeasible", exit::INFEASIBLE)
    };
    let rank_unsupported = args.rank && !matches!(s.model, Model::Load(_));
    if rank_unsupported {
        stderr.push_str("warning: --rank needs a load scenario; skipped\n");
    }

    let stdout = if args.json {
        to_json(&json!({
            "model": describe(&s),
            "rho": v.rho,
            "verdict": word,
            "margin": v.margin,
            "spectral": v.spectral,
            "fixed_point": v.fixed_point,
            "fixed_point_report": v.fixed_point_report,
            "ranking": ranking,
        }))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", describe(&s));
        let _ = writeln!(out, "rho: {}", num(v.rho));
        let _ = writeln!(out, "verdict: {word}");
        let _ = writeln!(out, "margin: {}", num(v.margin));
        let sp = &v.spectral;
        let _ = writeln!(
            out,
            "method: {} ({} iterations, bracket [{}, {}]{})",
            sp.method,
            sp.iterations,
            num(sp.lower),
            num(sp.upper),
            if sp.flagged {
                ", not converged: upper bound reported"
            } else {
                ""
            }
        );
        if args.fixed_point {
            match (&v.fixed_point, &v.fixed_point_report) {
                (Some(x), Some(r)) => {
                    let _ = writeln!(out, "fixed point: {}", vec_str(x));
                    let _ = writeln!(
                        out,
                        "fixed point solve: {} after {} iterations, residual {}",
                        if r.converged { "converged" } else { "stopped" },
                        r.iterations,
                        num(r.residual)
                    );
                }
                _ => {
                    let _ = writeln!(out, "fixed point: none");
                }
            }
        }
        match &ranking {
            Some(BottleneckOutcome::Ranked(r)) => {
                let _ = writeln!(out, "ranking (heaviest first):");
                for (k, e) in r.entries.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "  {}. base station {}: load {}{}",
                        k + 1,
                        e.base_station,
                        num(e.load),
                        if e.overloaded { " (overloaded)" } else { "" }
                    );
                }
            }
            Some(BottleneckOutcome::Unavailable(_)) => {
                let _ = writeln!(out, "ranking: unavailable, no fixed point to rank");
            }
            None => {}
        }
        out
    };
    Output { stdout, stderr, code }
}

fn build_grid(args: &SweepArgs) -> std::result::Result<Vec<f64>, String> {
    if let Some(g) = &args.grid {
        if g.is_empty() {
            return Err("--grid needs at least one budget".into());
        }
        if g.iter().any(|p| !(*p > 0.0 && p.is_finite())) || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err("--grid budgets must be positive and strictly increasing".into());
        }
        return Ok(g.clone());
    }
    let (lo, hi) = (args.pbar_min.unwrap_or(f64::NAN), args.pbar_max.unwrap_or(f64::NAN));
    if args.points < 2 {
        return Err(format!("--points must be at least 2, found {}", args.points));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(format!("need 0 < --pbar-min < --pbar-max, found {lo} and {hi}"));
    }
    let last = (args.points - 1) as f64;
    let mut grid: Vec<f64> = (0..args.points)
        .map(|k| {
            let t = k as f64 / last;
            if args.log {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect();
    grid[0] = lo;
    grid[args.points - 1] = hi;
    Ok(grid)
}

fn sweep_csv(r: &SweepResult) -> String {
    let mut s = String::from("p_bar,utility,ee,utility_bound,ee_bound,regime,status\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(row.p_bar),
            num(row.utility),
            num(row.ee),
            num(row.utility_bound),
            num(row.ee_bound),
            row.regime.name(),
            row.status()
        );
    }
    s
}

fn power_csv(r: &SweepResult) -> String {
    let mut s = String::from("p_bar,bs_index,power\n");
    for row in &r.rows {
        for (i, p) in row.power.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(row.p_bar), i, num(*p));
        }
    }
    s
}

/// Writes `contents` to a temporary file next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `<prefix>_sweep.csv` and `<prefix>_power.csv`.
pub fn sweep_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with("_sweep.csv"), with("_power.csv"))
}

fn tail_line(out: &mut String, name: &str, fit: &Option<TailFit>) {
    match fit {
        Some(f) => {
            let _ = writeln!(
                out,
                "{name} tail: {} points, utility slope {}, ee slope {}",
                f.points,
                num(f.utility_slope),
                num(f.ee_slope)
            );
        }
        None => {
            let _ = writeln!(out, "{name} tail: too few points two decades past the transition");
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Output {
    let grid = match build_grid(args) {
        Ok(g) => g,
        Err(msg) => return Output::input_error(format!("usage: {msg}")),
    };
    let (s, stderr) = match load(&args.scenario) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let result = (|| -> Result<_> {
        let m = s.mapping()?;
        let a = s.asymptotic()?;
        let spectral = spectral_radius(&a, &SpectralMethod::LinearPower, None)?;
        let r = sweep(m.as_ref(), spectral.rho, &s.norm_a, &s.norm_b, &grid, &s.solver)?;
        Ok(r)
    })();
    let r = match result {
        Ok(r) => r,
        Err(e) => return failure(stderr, exit::NO_CONVERGENCE, e),
    };
    let (sweep_path, power_path) = sweep_paths(&args.out);
    for (path, body) in [(&sweep_path, sweep_csv(&r)), (&power_path, power_csv(&r))] {
        if let Err(e) = write_atomic(path, &body) {
            return failure(stderr, exit::INPUT_ERROR, Error::Io(e));
        }
    }
    let scaling: Option<ScalingReport> = scaling_diagnostics(&r).ok();
    let ok = r.rows.iter().filter(|row| row.converged()).count();
    let code = if ok == 0 { exit::NO_CONVERGENCE } else { 0 };

    let stdout = if args.json {
        to_json(&json!({
            "model": describe(&s),
            "lambda_inf": r.lambda_inf,
            "transition_point": r.transition_point,
            "sup_utility": r.sup_utility(),
            "sup_ee": r.sup_ee(),
            "alpha": r.alpha,
            "rows": r.rows.len(),
            "converged_rows": ok,
            "scaling": scaling,
            "note": r.note,
            "sweep_csv": sweep_path,
            "power_csv": power_path,
        }))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", describe(&s));
        let _ = writeln!(out, "lambda_inf: {}", num(r.lambda_inf));
        match r.transition_point {
            Some(pt) => {
                let _ = writeln!(out, "transition point: {}", num(pt));
            }
            None => {
                let _ = writeln!(out, "transition point: none");
            }
        }
        let _ = writeln!(out, "sup utility: {}", num(r.sup_utility()));
        let _ = writeln!(out, "sup ee: {}", num(r.sup_ee()));
        let _ = writeln!(out, "rows: {} ({ok} converged)", r.rows.len());
        if let Some(sc) = &scaling {
            tail_line(&mut out, "low-power", &sc.low);
            tail_line(&mut out, "high-power", &sc.high);
        }
        if let Some(note) = &r.note {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(out, "wrote {}", sweep_path.display());
        let _ = writeln!(out, "wrote {}", power_path.display());
        out
    };
    Output { stdout, stderr, code }
}

pub fn cmd_eigen(args: &EigenArgs) -> Output {
    let (s, stderr) = match load(&args.scenario) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let result = (|| -> Result<_> {
        let m = s.mapping()?;
        let a = s.asymptotic()?;
        let target = match args.target {
            Target::Asymptotic => EigenTarget::Asymptotic(&a),
            Target::Mapping => EigenTarget::Mapping(m.as_ref()),
        };
        conditional_eigen(target, &s.norm_a, &s.solver)
    })();
    let out = match result {
        Ok(o) => o,
        Err(e) => return failure(stderr, exit::NO_CONVERGENCE, e),
    };
    let code = if out.report.converged { 0 } else { exit::NO_CONVERGENCE };
    let target = match args.target {
        Target::Asymptotic => "asymptotic",
        Target::Mapping => "mapping",
    };
    let inside = (args.target == Target::Mapping).then_some(out.pair.lambda <= 1.0);

    let stdout = if args.json {
        to_json(&json!({
            "model": describe(&s),
            "target": target,
            "norm": s.norm_a.kind().name(),
            "lambda": out.pair.lambda,
            "x": out.pair.x,
            "report": out.report,
            "zero_direction": out.zero_direction,
            "fixed_point_in_unit_ball": inside,
        }))
    } else {
        let mut o = String::new();
        let _ = writeln!(o, "model: {}", describe(&s));
        let _ = writeln!(o, "target: {target}, norm {}", s.norm_a.kind().name());
        let _ = writeln!(o, "lambda: {}", num(out.pair.lambda));
        let _ = writeln!(o, "x: {}", vec_str(&out.pair.x));
        let _ = writeln!(
            o,
            "solve: {} after {} iterations, residual {}",
            if out.report.converged {
                "converged"
            } else {
                "not converged"
            },
            out.report.iterations,
            num(out.report.residual)
        );
        if out.zero_direction {
            let _ = writeln!(o, "note: the mapping sends the iterate to zero; lambda is 0");
        }
        if let Some(inside) = inside {
            let _ = writeln!(o, "fixed point in unit ball: {}", if inside { "yes" } else { "no" });
        }
        o
    };
    let stderr = if code == 0 {
        stderr
    } else {
        format!(
            "{stderr}error: eigen iteration did not converge within {} iterations\n",
            out.report.iterations
        )
    };
    Output { stdout, stderr, code }
}

fn report_lines(out: &mut String, r: &PropertyReport) {
    let _ = writeln!(
        out,
        "{}: {} samples, seed {}, {} violations",
        r.property,
        r.samples,
        r.seed,
        r.violations.len()
    );
    for v in r.violations.iter().take(10) {
        let _ = writeln!(
            out,
            "  {:?} at coordinate {}: {} vs {} for x = {}",
            v.check,
            v.coordinate,
            num(v.observed.0),
            num(v.observed.1),
            vec_str(&v.input)
        );
    }
}

pub fn cmd_check(args: &CheckArgs) -> Output {
    if args.samples == 0 {
        return Output::input_error("usage: --samples must be at least 1");
    }
    let (s, stderr) = match load(&args.scenario) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let result = (|| -> Result<_> {
        let m = s.mapping()?;
        let a = s.asymptotic()?;
        Ok((
            check_standard_properties(m.as_ref(), args.samples, args.seed)?,
            check_asymptotic_properties(&a, args.samples, args.seed)?,
        ))
    })();
    let (standard, asym) = match result {
        Ok(r) => r,
        Err(e) => return failure(stderr, exit::INPUT_ERROR, e),
    };
    let passed = standard.passed() && asym.passed();
    let code = if passed { 0 } else { exit::VIOLATIONS };
    let stdout = if args.json {
        to_json(&json!({
            "model": describe(&s),
            "passed": passed,
            "standard": standard,
            "asymptotic": asym,
        }))
    } else {
        let mut o = String::new();
        let _ = writeln!(o, "model: {}", describe(&s));
        report_lines(&mut o, &standard);
        report_lines(&mut o, &asym);
        let _ = writeln!(o, "result: {}", if passed { "pass" } else { "fail" });
        o
    };
    Output { stdout, stderr, code }
}
