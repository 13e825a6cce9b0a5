//! `ropack` command line: seeded experiments, offline optima, instance
//! generators, and the bundled verification suite.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ropack::hardgen::{self, EpsilonMode, RandomInstanceParams};
use ropack::harness::{run_trials, trial_rng, Algorithm, TrialConfig, TrialReport};
use ropack::online::PhaseParams;
use ropack::{oracle, Instance, Variant};

#[derive(Parser)]
#[command(
    name = "ropack",
    about = "Online multidimensional packing in the random-order model",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run T seeded random-order trials of one algorithm on an instance.
    Run(RunArgs),
    /// Compute the offline optimum (or LP bound) of an instance.
    Opt(OptArgs),
    /// Generate a random benchmark instance.
    Gen(GenArgs),
    /// Generate an adversarial lower-bound instance.
    Lbgen(LbgenArgs),
    /// Run the bundled acceptance suite and print a pass/fail table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Vgap,
    Zvgap,
    Vmkp,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Vgap => Algorithm::Vgap,
            AlgoArg::Zvgap => Algorithm::ZeroOneVgap,
            AlgoArg::Vmkp => Algorithm::Vmkp,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Instance JSON file.
    #[arg(long)]
    inst: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Sampling fraction q1 (vgap/zvgap); overrides the default parameters.
    #[arg(long)]
    q1: Option<f64>,
    /// Matching-phase end fraction q2 (vgap/zvgap).
    #[arg(long)]
    q2: Option<f64>,
    /// Sampling fraction q (vmkp).
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write one JSON-lines trace per trial into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Branch-and-bound node budget for the offline reference optimum.
    #[arg(long, default_value_t = oracle::DEFAULT_NODE_BUDGET)]
    node_budget: u64,
}

#[derive(Args)]
struct OptArgs {
    /// Instance JSON file.
    inst: PathBuf,
    /// bb = branch-and-bound, enum = exhaustive, lp = LP bound only.
    #[arg(long, default_value = "bb")]
    method: String,
    #[arg(long, default_value_t = oracle::DEFAULT_NODE_BUDGET)]
    node_budget: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "general")]
    variant: String,
    /// Probability that a general option is heavy.
    #[arg(long, default_value_t = 0.3)]
    heavy_frac: f64,
    /// Probability that an (item, bin) option exists.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Probability of a 1-entry in zero_one weights.
    #[arg(long, default_value_t = 0.5)]
    one_prob: f64,
    /// vmkp per-dimension weight range.
    #[arg(long, default_value_t = 0.0)]
    wlo: f64,
    #[arg(long, default_value_t = 1.0)]
    whi: f64,
    /// Profit range.
    #[arg(long, default_value_t = 0.0)]
    plo: f64,
    #[arg(long, default_value_t = 1.0)]
    phi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct LbgenArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    delta: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the double-representable epsilon 2^-40 instead of the exact
    /// 1/(4 n d^n); required when the instance must run through the online
    /// algorithms.
    #[arg(long)]
    float_safe: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Run only the criteria whose ids are listed (e.g. --only 1,6a,8).
    #[arg(long)]
    only: Option<String>,
}

fn print_summary(report: &TrialReport) {
    println!(
        "instance {} (n={}, m={}, d={}, {})",
        report.instance, report.n, report.m, report.d, report.variant
    );
    println!(
        "algorithm {}  trials {}  seed {}  params q1={:.4} q2={:.4} q={:.4}",
        report.algorithm,
        report.trials,
        report.seed,
        report.params.q1,
        report.params.q2,
        report.params.q
    );
    println!(
        "mean profit {:.6}  stddev {:.6}  99% CI [{:.6}, {:.6}]",
        report.mean, report.stddev, report.ci99[0], report.ci99[1]
    );
    println!("offline {} = {:.6}", report.opt.source, report.opt.value);
    match (report.ratio_opt_over_mean, report.ratio_mean_over_opt) {
        (Some(c), Some(r)) => println!(
            "empirical ratio OPT/mean = {:.4} (mean/OPT = {:.4}); proven guarantee {:.4}",
            c, r, report.guarantee
        ),
        _ => println!(
            "empirical ratio undefined (zero mean or optimum); proven guarantee {:.4}",
            report.guarantee
        ),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let instance = Instance::read_file(&args.inst)?;
    let algorithm: Algorithm = args.algo.into();
    let params = match (args.q1, args.q2, args.q) {
        (None, None, None) => None,
        (Some(q1), Some(q2), None) => Some(PhaseParams::two_phase(q1, q2)?),
        (None, None, Some(q)) => Some(PhaseParams::single_phase(q)?),
        _ => bail!("pass either --q1 with --q2, or --q alone"),
    };
    let mut cfg = TrialConfig::new(algorithm, args.trials, args.seed);
    cfg.params = params;
    cfg.jobs = args.jobs;
    cfg.node_budget = args.node_budget;
    cfg.trace_dir = args.trace_dir;
    let report = run_trials(&instance, &cfg)?;
    print_summary(&report);
    match &args.output {
        Some(path) => {
            std::fs::write(path, report.to_json_string())
                .with_context(|| format!("writing {}", path.display()))?;
            println!("report written to {}", path.display());
        }
        None => println!("{}", report.to_json_string()),
    }
    Ok(())
}

fn cmd_opt(args: OptArgs) -> Result<()> {
    let instance = Instance::read_file(&args.inst)?;
    let (value, packing, node_count, method, lower_bound_only) = match args.method.as_str() {
        "bb" => {
            let r = oracle::opt_branch_bound(&instance, args.node_budget)?;
            (
                r.value,
                r.packing,
                r.node_count,
                r.method,
                r.lower_bound_only,
            )
        }
        "enum" => {
            let r = oracle::opt_enumerate(&instance)?;
            (
                r.value,
                r.packing,
                r.node_count,
                r.method,
                r.lower_bound_only,
            )
        }
        "lp" => (
            oracle::lp_upper_bound(&instance)?,
            None,
            0,
            oracle::OptMethod::LpBoundOnly,
            false,
        ),
        other => bail!("unknown method {other:?} (expected bb, enum, or lp)"),
    };
    let pairs: Vec<[usize; 2]> = packing
        .as_ref()
        .map(|p| {
            p.assignments()
                .iter()
                .map(|&(i, j)| [i + 1, j + 1])
                .collect()
        })
        .unwrap_or_default();
    let doc = serde_json::json!({
        "value": value,
        "method": method.as_str(),
        "node_count": node_count,
        "lower_bound_only": lower_bound_only,
        "packing": pairs,
    });
    println!("{doc}");
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let variant = Variant::parse(&args.variant)?;
    let mut params = RandomInstanceParams::new(args.n, args.m, args.d, variant);
    params.heavy_fraction = args.heavy_frac;
    params.option_density = args.density;
    params.one_probability = args.one_prob;
    params.weight_range = (args.wlo, args.whi);
    params.profit_range = (args.plo, args.phi);
    let mut rng = trial_rng(args.seed, 0);
    let instance = hardgen::gen_random(&params, &mut rng)?;
    instance.write_file(&args.output)?;
    println!(
        "wrote {} (n={}, m={}, d={}, {})",
        args.output.display(),
        instance.n(),
        instance.m(),
        instance.d(),
        instance.variant()
    );
    Ok(())
}

fn cmd_lbgen(args: LbgenArgs) -> Result<()> {
    let mode = if args.float_safe {
        EpsilonMode::FloatSafe
    } else {
        EpsilonMode::Exact
    };
    let mut rng = trial_rng(args.seed, 0);
    let lb = hardgen::gen_lower_bound(args.d, args.delta, mode, &mut rng)?;
    let report = hardgen::verify_structure(&lb);
    if !report.is_clean() {
        for v in &report.violations {
            eprintln!("structure violation: {v}");
        }
        bail!("generated instance failed structural verification");
    }
    match mode {
        EpsilonMode::Exact => hardgen::write_exact_file(&lb, &args.output)?,
        EpsilonMode::FloatSafe => lb.instance.write_file(&args.output)?,
    }
    println!(
        "wrote {} (d={}, delta={}, n={}, {} matrices, epsilon={}; verified {} column pairs)",
        args.output.display(),
        lb.spec.d,
        lb.spec.delta,
        lb.spec.n,
        lb.spec.matrix_count,
        hardgen::exact_value_string(&lb.spec.epsilon),
        report.column_pairs_checked,
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<bool> {
    let filter: Option<Vec<String>> = args
        .only
        .map(|s| s.split(',').map(|t| t.trim().to_string()).collect());
    let selected: Vec<_> = ropack::acceptance::criteria()
        .into_iter()
        .filter(|(id, _)| {
            filter
                .as_ref()
                .map_or(true, |ids| ids.iter().any(|want| want == id))
        })
        .collect();
    if selected.is_empty() {
        bail!("no criteria matched the --only filter");
    }
    let mut outcomes = Vec::with_capacity(selected.len());
    for (_, criterion) in selected {
        let o = criterion(args.jobs);
        println!("{}", o.line());
        outcomes.push(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{}/{} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Opt(args) => cmd_opt(args).map(|()| true),
        Command::Gen(args) => cmd_gen(args).map(|()| true),
        Command::Lbgen(args) => cmd_lbgen(args).map(|()| true),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
