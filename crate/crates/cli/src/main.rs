use clap::{Args, Parser, Subcommand};
use eigenlab::cost::{cost_report, CostInputs};
use eigenlab::experiments::{emit_report, run_scan, ExperimentConfig, ProblemConfig};
use eigenlab::phase::{run_phase_estimation, MeasureMode, PhaseRunOptions};
use eigenlab::solver::{eig_dense, eigensolvers, SolveRequest};
use eigenlab::splitting::{product_formulas, split_operator, UnitaryStep};
use num_complex::Complex64;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "eigenlab",
    version,
    about = "Phase-estimation eigensolver laboratory"
)]
struct Cli {
    /// TOML config; subcommands other than `scan` read only its [problem] table.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report directory for `scan` (default: the config's `output`, else `out`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// -v info, -vv debug, -vvv trace.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the operator and print its structure.
    Discretize(GridArgs),
    /// Solve for one eigenpair.
    Solve(SolveArgs),
    /// Run phase estimation on an eigenvector of the operator.
    Estimate(EstimateArgs),
    /// Run the scans named by one or more config files.
    Scan { configs: Vec<PathBuf> },
    /// Print the qubit and gate counts.
    Cost(CostArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Grid dimension when no config is given.
    #[arg(long, default_value_t = 1)]
    dimension: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(short, long, default_value_t = 1)]
    f: usize,
    #[arg(long, default_value = "dense")]
    solver: String,
    /// Shift for shift-invert solvers.
    #[arg(long)]
    shift: Option<f64>,
    /// Include the eigenvector in the output.
    #[arg(long)]
    vector: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(short, long, default_value_t = 1)]
    f: usize,
    #[arg(short, long, default_value_t = 64)]
    m: usize,
    /// Step size; otherwise chosen so that λ_f τ / 2π = phase-fraction.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1.0 / 48.0)]
    phase_fraction: f64,
    #[arg(long, default_value = "strang")]
    formula: String,
    /// Draw this many samples instead of reporting the exact peak.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    n: u64,
    #[arg(short, long)]
    d: u32,
    #[arg(short, long, default_value_t = 1)]
    s: u32,
    #[arg(long, default_value_t = 2)]
    nu: u32,
    #[arg(short, long, default_value_t = 3.0)]
    c: f64,
    /// Supplied index register size instead of the derived one.
    #[arg(long)]
    log2_m: Option<u32>,
    #[arg(long, default_value_t = 2)]
    n0: u64,
    #[arg(long, default_value_t = 0)]
    ancillas: u32,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn problem(cli: &Cli, dimension: usize) -> CliResult<ProblemConfig> {
    Ok(match &cli.config {
        Some(path) => ProblemConfig::from_toml_str(&read(path)?)?,
        None => ProblemConfig::laplacian(dimension),
    })
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn print(value: serde_json::Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(&value)?) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Discretize(g) => {
            let p = problem(cli, g.dimension)?;
            let op = p.build(g.n)?;
            let plan = split_operator(&op)?;
            print(json!({
                "n": op.n(),
                "dimension": op.dimension(),
                "side": op.side(),
                "nnz": op.matrix().nnz(),
                "max_asymmetry": op.matrix().max_asymmetry(),
                "norm_estimate": op.norm_estimate(),
                "structure": op.structure(),
                "parts": plan.r(),
                "bandwidth_volume": plan.bandwidth_volume,
            }))?;
        }
        Command::Solve(a) => {
            let p = problem(cli, a.grid.dimension)?;
            let op = p.build(a.grid.n)?;
            let solver = eigensolvers().get(&a.solver)?;
            let o = solver.solve(
                &op,
                &SolveRequest {
                    index_f: a.f,
                    shift: a.shift,
                },
            )?;
            print(json!({
                "index_f": a.f,
                "value": o.pair.value,
                "solver": a.solver,
                "shift_used": o.shift_used,
                "shift_perturbed": o.shift_perturbed,
                "ops": o.ops,
                "vector": a.vector.then_some(&o.pair.vector),
            }))?;
        }
        Command::Estimate(a) => {
            let p = problem(cli, a.grid.dimension)?;
            let op = p.build(a.grid.n)?;
            let pairs = eig_dense(&op)?;
            let pair = pairs.get(a.f).ok_or("eigen index out of range")?;
            let tau = match a.tau {
                Some(t) => t,
                None if pair.value > 0.0 => {
                    2.0 * std::f64::consts::PI * a.phase_fraction / pair.value
                }
                None => return Err("eigenvalue is not positive; pass --tau".into()),
            };
            product_formulas().get(&a.formula)?;
            let step = UnitaryStep::by_name(Arc::new(split_operator(&op)?), tau, &a.formula)?;
            let guess: Vec<Complex64> = pair
                .vector
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect();
            let mode = match a.samples {
                Some(count) => MeasureMode::Sample {
                    count,
                    seed: cli.seed.unwrap_or(0),
                },
                None => MeasureMode::Exact,
            };
            let opts = PhaseRunOptions {
                m: a.m,
                mode,
                shift: 0.0,
                symmetry_hook: false,
            };
            let r = run_phase_estimation(&step, op.n(), op.dimension(), &guess, &opts)?;
            let peak = r.argmax();
            let d = &r.decoded[0];
            print(json!({
                "lambda": pair.value,
                "tau": tau,
                "m": a.m,
                "peak_bin": peak,
                "peak_probability": r.distribution[peak],
                "lambda_hat": d.lambda,
                "half_width": d.half_width,
                "samples": r.samples.len(),
                "run": r.run,
            }))?;
        }
        Command::Scan { configs } => {
            let mut paths = configs.clone();
            paths.extend(cli.config.clone());
            if paths.is_empty() {
                return Err("scan needs a config (positional or --config)".into());
            }
            let mut all = true;
            for path in &paths {
                all &= scan(cli, path)?;
            }
            return Ok(all);
        }
        Command::Cost(a) => {
            let mut inputs = CostInputs::new(a.n, a.d, a.s, a.nu);
            inputs.c = a.c;
            inputs.log2_m = a.log2_m;
            inputs.n0 = a.n0;
            inputs.ancillas = a.ancillas;
            print(serde_json::to_value(cost_report(&inputs)?)?)?;
        }
    }
    Ok(true)
}

fn scan(cli: &Cli, path: &Path) -> CliResult<bool> {
    let mut config = ExperimentConfig::from_toml_str(&read(path)?)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    log::info!("running {} ({})", config.name, config.scan.kind);
    let report = run_scan(&config)?;
    let written = emit_report(&report, &dir, &config.formats)?;
    for c in &report.checks {
        println!(
            "{} {}/{}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            report.name,
            c.name,
            c.detail
        );
    }
    for f in &report.fits {
        println!(
            "fit  {}/{}: slope {:.4} +- {:.4} over {} points",
            report.name,
            f.series,
            f.fit.slope,
            f.fit.half_width,
            f.fit.used.len()
        );
    }
    for n in &report.notes {
        println!("note {}: {n}", report.name);
    }
    for w in written {
        println!("wrote {}", w.display());
    }
    let failures = report.failures();
    if !failures.is_empty() {
        let names: Vec<&str> = failures.iter().map(|c| c.name.as_str()).collect();
        eprintln!(
            "{}: {} failing check(s): {}",
            report.name,
            failures.len(),
            names.join(", ")
        );
    }
    Ok(report.passed)
}
