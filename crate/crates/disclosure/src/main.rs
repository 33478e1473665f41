//! Command-line front end. Every run emits a structured document (or a
//! delimiter-separated table for sweeps) embedding its manifest, to
//! standard output or to `--out`.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use disclosure::benchmarks::{self, BenchmarkSuite};
use disclosure::detector;
use disclosure::error::Error;
use disclosure::experiments::{self, FixedParam, ENHANCEMENT_LEVELS};
use disclosure::mechanisms::{SilentPathPolicy, OBEDIENCE_TOL};
use disclosure::model::ModelParams;
use disclosure::oracle;
use disclosure::report::{sig12, Doc, RunManifest, Table};
use disclosure::sim::{self, DetectorMode, SimConfig};
use disclosure::solver;

const EXIT_INTERNAL: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_SCALE: u8 = 3;

/// Largest horizon accepted by the grid-search verification modes.
const MAX_BRUTE_FORCE_HORIZON: usize = 12;

#[derive(Parser)]
#[command(
    name = "disclosure",
    version,
    about = "Optimal timed information disclosure against a quickest-change detector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal disclosure mechanism.
    Solve(SolveArgs),
    /// Evaluate the benchmark mechanisms and the optimal one.
    Benchmarks(InstanceArgs),
    /// Certify the solver and detector program against exhaustive oracles.
    Verify(VerifyArgs),
    /// Monte-Carlo simulation of the interaction under a policy.
    Simulate(SimulateArgs),
    /// Parameter sweeps emitting a plot-ready table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Probability the chain starts in the good state.
    #[arg(long)]
    mu: f64,
    /// Per-step probability of jumping to the bad state.
    #[arg(long)]
    q: f64,
    /// Detector's delay cost per period.
    #[arg(long)]
    c: f64,
    /// Horizon length in periods.
    #[arg(long = "T")]
    horizon: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the document to this file instead of standard output.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// ISO-8601 timestamp recorded in the manifest; fixed by default so
    /// identical runs emit identical bytes.
    #[arg(long)]
    timestamp: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Evaluate only the open-loop stopping period once the threshold
    /// passes it.
    #[arg(long)]
    fast: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the built-in certification grid instead of a single instance.
    #[arg(long, value_enum)]
    grid: Option<GridSize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Which agreement checks to run on the instance.
    #[arg(long, value_enum, default_value_t = VerifyMode::All)]
    mode: VerifyMode,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridSize {
    Small,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum VerifyMode {
    /// Grid search and stopping-rule enumeration.
    All,
    /// Solver versus exhaustive mechanism grid.
    Tbp,
    /// Detector program versus stopping-rule enumeration.
    Enumerate,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Number of independent episodes.
    #[arg(long)]
    episodes: usize,
    /// Master seed; episode `i` runs on stream `i` of this seed.
    #[arg(long)]
    seed: u64,
    /// Which policy the principal commits to.
    #[arg(long, value_enum, default_value_t = PolicyChoice::Optimal)]
    policy: PolicyChoice,
    /// How the detector reacts to recommendations.
    #[arg(long, value_enum, default_value_t = SimMode::Obedient)]
    mode: SimMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyChoice {
    Optimal,
    FullInfo,
    NoInfo,
    Static,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimMode {
    Obedient,
    BestResponse,
}

#[derive(Args)]
struct SweepArgs {
    /// Which sweep to run.
    #[arg(long, value_enum)]
    mode: SweepMode,
    /// Fixed parameter for the patience map, as `name=value` with name
    /// one of mu, q, c.
    #[arg(long)]
    fix: Option<String>,
    /// Grid resolution per free parameter of the patience map.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Number of delay-cost points on [0, 1].
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long = "T", default_value_t = 100)]
    horizon: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Patience,
    UtilityVsC,
}

/// A failure destined for the user, with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }

    fn scale(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SCALE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. } | Error::TimeOutOfRange { .. } => EXIT_DOMAIN,
            Error::UnsupportedPolicy(_) => EXIT_DOMAIN,
            Error::HorizonTooLarge { .. } => EXIT_SCALE,
            Error::UnreachableHistory | Error::DegenerateCap(_) => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Benchmarks(args) => cmd_benchmarks(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

impl InstanceArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        ModelParams::new(self.mu, self.q, self.horizon, self.c).map_err(|e| {
            Failure::domain(match e {
                Error::InvalidParameter { name, .. } => format!("--{name}: {e}"),
                other => other.to_string(),
            })
        })
    }

    fn manifest(&self, command: &str) -> RunManifest {
        let m = RunManifest::new(command)
            .param("mu", sig12(self.mu))
            .param("q", sig12(self.q))
            .param("c", sig12(self.c))
            .param("T", self.horizon.to_string());
        apply_timestamp(m, &self.output)
    }
}

fn apply_timestamp(manifest: RunManifest, output: &OutputArgs) -> RunManifest {
    match &output.timestamp {
        Some(ts) => manifest.timestamp(ts),
        None => manifest,
    }
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure {
            code: EXIT_INTERNAL,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let params = args.instance.params()?;
    let result = if args.fast {
        solver::solve_fast(&params)
    } else {
        solver::solve(&params)
    };
    let report = result.mechanism.obedience(&params, OBEDIENCE_TOL);
    let mut doc = Doc::new(args.instance.manifest("solve"));
    doc.section("solve");
    doc.int("n_p", result.mechanism.threshold as i64)
        .num("q_np", result.mechanism.silence_prob)
        .num("optimal_utility", result.utility)
        .int("tau_no", result.no_info_stopping_time as i64)
        .opt_int(
            "binding_constraint_time",
            result.binding_time.map(|t| t as i64),
        )
        .nums("obedience_slacks", &report.slack);
    emit(&args.instance.output, &doc.render())
}

fn cmd_benchmarks(args: InstanceArgs) -> Result<(), Failure> {
    let params = args.params()?;
    let suite = BenchmarkSuite::compute(&params);
    let optimal = solver::solve_fast(&params).utility;
    let best = suite.best();
    let mut doc = Doc::new(args.manifest("benchmarks"));
    doc.section("benchmarks");
    doc.num("no_info_utility", suite.no_info_utility)
        .num("full_info_utility", suite.full_info_utility)
        .num("static_rho_hat", suite.static_silence)
        .num("static_utility", suite.static_utility)
        .num("optimal_utility", optimal)
        .num("best_benchmark", best)
        .opt_num(
            "improvement_pct",
            (best > 0.0).then(|| 100.0 * (optimal - best) / best),
        );
    emit(&args.output, &doc.render())
}

struct VerifyOutcome {
    label: String,
    passed: bool,
    detail: String,
}

fn verify_instance(params: &ModelParams, mode: VerifyMode) -> Result<Vec<VerifyOutcome>, Failure> {
    let mut outcomes = Vec::new();
    if mode != VerifyMode::Enumerate {
        if params.horizon > MAX_BRUTE_FORCE_HORIZON {
            return Err(Failure::scale(format!(
                "--T: horizon {} too large for grid search (max {MAX_BRUTE_FORCE_HORIZON})",
                params.horizon
            )));
        }
        let solved = solver::solve(params);
        let fast = solver::solve_fast(params);
        let grid = oracle::brute_force_tbp(params, 1e-3)?;
        let same_threshold = solved.mechanism.threshold == grid.best_mechanism.threshold;
        let dq = (solved.mechanism.silence_prob - grid.best_mechanism.silence_prob).abs();
        outcomes.push(VerifyOutcome {
            label: "solver_vs_grid".into(),
            passed: same_threshold && dq <= 2e-3,
            detail: format!(
                "solver=({}, {}) grid=({}, {})",
                solved.mechanism.threshold,
                sig12(solved.mechanism.silence_prob),
                grid.best_mechanism.threshold,
                sig12(grid.best_mechanism.silence_prob)
            ),
        });
        let fast_dq = (solved.mechanism.silence_prob - fast.mechanism.silence_prob).abs();
        outcomes.push(VerifyOutcome {
            label: "fast_vs_full".into(),
            passed: solved.mechanism.threshold == fast.mechanism.threshold && fast_dq <= 1e-12,
            detail: format!("|dq| = {}", sig12(fast_dq)),
        });
        let tau_no = solver::no_info_stopping_time(params);
        outcomes.push(VerifyOutcome {
            label: "stopping_time_vs_sum".into(),
            passed: tau_no == oracle::brute_force_tau_no(params),
            detail: format!("tau_no = {tau_no}"),
        });
    }
    if mode != VerifyMode::Tbp {
        let policy = solver::solve(params)
            .mechanism
            .to_silent_path(params.horizon)?;
        let dp = detector::solve_dp(params, &policy)?;
        let enumerated = oracle::enumerate_stopping_rules(params, &policy)?;
        let gap = (dp.ex_ante_cost - enumerated).abs();
        outcomes.push(VerifyOutcome {
            label: "dp_vs_enumeration".into(),
            passed: gap <= 1e-9,
            detail: format!("|gap| = {}", sig12(gap)),
        });
    }
    Ok(outcomes)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("verify");
    let mut checks: Vec<(String, Vec<VerifyOutcome>)> = Vec::new();
    if args.grid.is_some() {
        manifest = manifest.param("grid", "\"small\"");
        for &mu in &[0.1, 0.5, 0.9] {
            for &q in &[0.1, 0.5, 0.9] {
                for &c in &[0.02, 0.3, 1.0] {
                    for &horizon in &[3usize, 5] {
                        let params = ModelParams::new(mu, q, horizon, c)?;
                        let label = format!("mu={mu} q={q} c={c} T={horizon}");
                        checks.push((label, verify_instance(&params, VerifyMode::All)?));
                    }
                }
            }
        }
    } else {
        let (Some(mu), Some(q), Some(c), Some(horizon)) = (args.mu, args.q, args.c, args.horizon)
        else {
            return Err(Failure::domain(
                "verify needs either --grid small or all of --mu --q --c --T",
            ));
        };
        manifest = manifest
            .param("mu", sig12(mu))
            .param("q", sig12(q))
            .param("c", sig12(c))
            .param("T", horizon.to_string());
        let params = ModelParams::new(mu, q, horizon, c)?;
        let label = format!("mu={mu} q={q} c={c} T={horizon}");
        checks.push((label, verify_instance(&params, args.mode)?));
    }
    manifest = apply_timestamp(manifest, &args.output);
    let all_passed = checks
        .iter()
        .all(|(_, outcomes)| outcomes.iter().all(|o| o.passed));
    let mut doc = Doc::new(manifest);
    doc.section("verify");
    doc.int("instances", checks.len() as i64);
    doc.text("result", if all_passed { "pass" } else { "fail" });
    for (label, outcomes) in &checks {
        for o in outcomes {
            doc.text(
                &format!("{} :: {label}", o.label),
                &format!("{} ({})", if o.passed { "pass" } else { "fail" }, o.detail),
            );
        }
    }
    emit(&args.output, &doc.render())?;
    if all_passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INTERNAL,
            message: "verification failed".into(),
        })
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let params = args.instance.params()?;
    let (policy, policy_name) = match args.policy {
        PolicyChoice::Optimal => (
            solver::solve_fast(&params)
                .mechanism
                .to_silent_path(params.horizon)?,
            "optimal",
        ),
        PolicyChoice::FullInfo => (
            SilentPathPolicy::full_information(params.horizon),
            "full-info",
        ),
        PolicyChoice::NoInfo => (SilentPathPolicy::no_information(params.horizon), "no-info"),
        PolicyChoice::Static => (
            SilentPathPolicy::stationary(params.horizon, benchmarks::best_static_silence(&params))?,
            "static",
        ),
    };
    let config = SimConfig {
        n_episodes: args.episodes,
        seed: args.seed,
        detector_mode: match args.mode {
            SimMode::Obedient => DetectorMode::Obedient,
            SimMode::BestResponse => DetectorMode::BestResponse,
        },
    };
    let report = sim::estimate(&params, &policy, &config)?;
    let manifest = args
        .instance
        .manifest("simulate")
        .param("episodes", args.episodes.to_string())
        .param("policy", format!("\"{policy_name}\""))
        .param(
            "detector",
            format!(
                "\"{}\"",
                match args.mode {
                    SimMode::Obedient => "obedient",
                    SimMode::BestResponse => "best-response",
                }
            ),
        )
        .param("rng", format!("\"{}\"", sim::RNG_SCHEME))
        .seed(args.seed);
    let mut doc = Doc::new(manifest);
    doc.section("simulate");
    doc.int("n_episodes", report.n_episodes as i64)
        .num("mean_principal_utility", report.mean_principal_utility)
        .opt_num("stderr_utility", report.stderr_utility)
        .num("mean_detector_cost", report.mean_detector_cost)
        .opt_num("stderr_cost", report.stderr_cost)
        .num("false_alarm_rate", report.false_alarm_rate)
        .num("mean_delay", report.mean_delay);
    emit(&args.instance.output, &doc.render())
}

fn parse_fix(fix: &str) -> Result<(FixedParam, f64), Failure> {
    let Some((name, value)) = fix.split_once('=') else {
        return Err(Failure::domain(format!(
            "--fix: expected name=value, got {fix}"
        )));
    };
    let fixed = match name {
        "mu" => FixedParam::Mu,
        "q" => FixedParam::Q,
        "c" => FixedParam::C,
        other => {
            return Err(Failure::domain(format!(
                "--fix: unknown parameter {other} (expected mu, q or c)"
            )))
        }
    };
    let value: f64 = value
        .parse()
        .map_err(|e| Failure::domain(format!("--fix: bad value {value}: {e}")))?;
    Ok((fixed, value))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    match args.mode {
        SweepMode::Patience => {
            let fix = args
                .fix
                .as_deref()
                .ok_or_else(|| Failure::domain("--fix is required for the patience sweep"))?;
            let (fixed, fixed_value) = parse_fix(fix)?;
            let sweep = experiments::patience_sweep(fixed, fixed_value, args.grid, args.horizon)?;
            let manifest = apply_timestamp(
                RunManifest::new("sweep")
                    .param("mode", "patience")
                    .param("fix", format!("{}={}", fixed.name(), sig12(fixed_value)))
                    .param("grid", args.grid.to_string())
                    .param("T", args.horizon.to_string()),
                &args.output,
            );
            let mut table = Table::new(manifest, &["mu", "q", "c", "tau_no", "n_p_star", "eta"]);
            for cell in &sweep.cells {
                table.row(vec![
                    sig12(cell.params.prior_good),
                    sig12(cell.params.hazard),
                    sig12(cell.params.delay_cost),
                    cell.stopping_time.to_string(),
                    cell.threshold.to_string(),
                    cell.enhancement.to_string(),
                ]);
            }
            table.summary("cells", sweep.cells.len().to_string());
            for (slot, level) in ENHANCEMENT_LEVELS.iter().enumerate() {
                table.summary(
                    &format!("pct_eta_ge_{level}"),
                    sig12(sweep.threshold_pcts[slot]),
                );
            }
            table.summary(
                "silent_horizon_cells",
                sweep.silent_horizon_cells.to_string(),
            );
            table.summary(
                "note",
                "cells whose open-loop stopping time exhausts the horizon report eta = 0",
            );
            emit(&args.output, &table.render())
        }
        SweepMode::UtilityVsC => {
            let (Some(mu), Some(q)) = (args.mu, args.q) else {
                return Err(Failure::domain(
                    "--mu and --q are required for the utility-vs-c sweep",
                ));
            };
            if args.points < 2 {
                return Err(Failure::domain("--points must be at least 2"));
            }
            let base = ModelParams::new(mu, q, args.horizon, 0.0)?;
            let grid: Vec<f64> = (0..args.points)
                .map(|i| i as f64 / (args.points - 1) as f64)
                .collect();
            let points = experiments::utility_vs_c(&base, &grid)?;
            let manifest = apply_timestamp(
                RunManifest::new("sweep")
                    .param("mode", "utility-vs-c")
                    .param("mu", sig12(mu))
                    .param("q", sig12(q))
                    .param("T", args.horizon.to_string())
                    .param("points", args.points.to_string()),
                &args.output,
            );
            let mut table = Table::new(
                manifest,
                &[
                    "c",
                    "optimal",
                    "no_info",
                    "full_info",
                    "static",
                    "improvement_pct",
                ],
            );
            let mut violations = 0usize;
            let mut max_improvement = f64::NEG_INFINITY;
            for p in &points {
                let best = p.no_info.max(p.full_info).max(p.static_best);
                if p.optimal < best - 1e-9 {
                    violations += 1;
                }
                if let Some(imp) = p.improvement_pct {
                    max_improvement = max_improvement.max(imp);
                }
                table.row(vec![
                    sig12(p.delay_cost),
                    sig12(p.optimal),
                    sig12(p.no_info),
                    sig12(p.full_info),
                    sig12(p.static_best),
                    p.improvement_pct.map_or("n/a".to_string(), sig12),
                ]);
            }
            table.summary("points", points.len().to_string());
            table.summary("dominance_violations", violations.to_string());
            if max_improvement.is_finite() {
                table.summary("max_improvement_pct", sig12(max_improvement));
            }
            emit(&args.output, &table.render())
        }
    }
}
