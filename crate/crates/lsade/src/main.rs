//! `lsade`: run replicated optimization experiments, ablations, schedule dry
//! runs, and one-off objective evaluations from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use lsade::experiment::{run_experiment, ExperimentSpec, ObjectiveSpec, RunRule};
use lsade::problems::{BenchmarkProblem, ProblemKind};
use lsade::rbf::RbfKernel;
use lsade::schedule::SchedulePolicy;
use lsade::{BoxBounds, KernelKind, VariantTriplet};

#[derive(Parser)]
#[command(
    name = "lsade",
    version,
    about = "Surrogate-assisted optimizer for expensive black-box problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment under a component schedule.
    Run(RunArgs),
    /// Run a replicated ablation with components forced constantly on/off.
    Variants(VariantsArgs),
    /// Print the evaluation counts a rule yields on a budget, without
    /// touching any objective.
    Dryrun(DryrunArgs),
    /// Evaluate a built-in problem at one point.
    Eval(EvalArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Component schedule: 'dynamic:<name>' (e.g. dynamic:1-4|8-1) or
    /// 'static:R<p>,Li<p>,Lo<p>' with periods from {0,1,2,4,8}.
    #[arg(long, default_value = "dynamic:1-4|8-1")]
    rule: String,
    #[command(flatten)]
    common: CommonRunArgs,
}

#[derive(Args)]
struct VariantsArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Component switches, e.g. R1,Li1,Lo0. All-off means pure random
    /// search over the whole budget.
    #[arg(long)]
    triplet: VariantTriplet,
    #[command(flatten)]
    common: CommonRunArgs,
}

#[derive(Args)]
struct DryrunArgs {
    /// Component schedule, as for `run`.
    #[arg(long)]
    rule: String,
    /// Initial design size.
    #[arg(long, default_value_t = 100)]
    init: usize,
    /// Objective-call budget.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// Built-in problem name.
    #[arg(long)]
    problem: ProblemKind,
    /// Comma-separated coordinates, e.g. "0.5,-1,2".
    #[arg(long, allow_hyphen_values = true)]
    point: String,
}

/// What to optimize: a built-in function or an external command.
#[derive(Args)]
struct ProblemArgs {
    /// Built-in problem (ellipsoid, rosenbrock, ackley, griewank).
    #[arg(long, required_unless_present = "plugin_cmd", conflicts_with = "plugin_cmd")]
    problem: Option<ProblemKind>,
    /// Problem dimension.
    #[arg(long)]
    dim: usize,
    /// External evaluator command speaking the line protocol (one request
    /// line in, one value line out); requires --lower and --upper.
    #[arg(long)]
    plugin_cmd: Option<String>,
    /// Lower bound applied to every coordinate.
    #[arg(long, allow_negative_numbers = true)]
    lower: Option<f64>,
    /// Upper bound applied to every coordinate.
    #[arg(long, allow_negative_numbers = true)]
    upper: Option<f64>,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Objective-call budget per run, initial design included.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    /// Initial design size.
    #[arg(long, default_value_t = 100)]
    init: usize,
    /// Interpolation kernel: multiquadric (mq), cubic, thin_plate_spline
    /// (tps), linear, or gaussian.
    #[arg(long, default_value_t = KernelKind::Multiquadric)]
    kernel: KernelKind,
    /// Kernel shape parameter, where the kernel has one.
    #[arg(long, default_value_t = 1.0)]
    kernel_c: f64,
    /// Independent runs; run i uses seed --seed + i.
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Base seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory for run_<seed>.csv files and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size; defaults to the machine's parallelism, capped by
    /// the LSADE_THREADS environment variable.
    #[arg(long)]
    threads: Option<usize>,
    /// Growth factor of the Lipschitz-constant estimation grid.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// DE difference-vector scale factor.
    #[arg(long, default_value_t = 0.5)]
    f_weight: f64,
    /// DE crossover probability.
    #[arg(long, default_value_t = 0.5)]
    cr: f64,
    /// Children generated per iteration (default: the problem dimension).
    #[arg(long)]
    children: Option<usize>,
    /// Parent pool cap.
    #[arg(long, default_value_t = 100)]
    parents: usize,
    /// The local model fits the best c_factor * dim archived points.
    #[arg(long, default_value_t = 3)]
    c_factor: usize,
    /// Spend budget on proposals that duplicate archived points instead of
    /// skipping them for free.
    #[arg(long)]
    strict_budget: bool,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut spec = build_spec(&args.problem, RunRule::Schedule, &args.common)?;
            spec.config.policy = SchedulePolicy::parse(&args.rule)?;
            report_experiment(&spec)
        }
        Command::Variants(args) => {
            let mut spec =
                build_spec(&args.problem, RunRule::Ablation(args.triplet), &args.common)?;
            // Mirror the switches into the schedule so the persisted config
            // matches what actually ran.
            spec.config.policy = SchedulePolicy::static_periods(
                args.triplet.rbf.into(),
                args.triplet.lipschitz.into(),
                args.triplet.local.into(),
            )?;
            report_experiment(&spec)
        }
        Command::Dryrun(args) => {
            let policy = SchedulePolicy::parse(&args.rule)?;
            let (rbf, lipschitz, local) = policy.dry_run_counts(args.init, args.budget)?;
            println!("rbf={rbf} lipschitz={lipschitz} local={local}");
            Ok(())
        }
        Command::Eval(args) => {
            let point: Vec<f64> = args
                .point
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow!("bad coordinate '{}'", s.trim()))
                })
                .collect::<anyhow::Result<_>>()?;
            let problem = BenchmarkProblem::new(args.problem, point.len())?;
            println!("{}", problem.value(&point));
            Ok(())
        }
    }
}

fn build_spec(
    problem: &ProblemArgs,
    rule: RunRule,
    common: &CommonRunArgs,
) -> anyhow::Result<ExperimentSpec> {
    let objective = resolve_objective(problem)?;
    let mut spec = ExperimentSpec::new(objective, rule, common.runs, common.seed);
    spec.threads = common.threads;
    spec.out_dir = common.out.clone();

    let cfg = &mut spec.config;
    cfg.nfe_max = common.budget;
    cfg.initial_points = common.init;
    cfg.kernel = RbfKernel::new(common.kernel, common.kernel_c)?;
    cfg.alpha = common.alpha;
    cfg.de.f_weight = common.f_weight;
    cfg.de.cr = common.cr;
    if let Some(children) = common.children {
        cfg.de.n_children = children;
    }
    cfg.de.n_parents = common.parents;
    cfg.local.c_factor = common.c_factor;
    cfg.strict_budget = common.strict_budget;
    Ok(spec)
}

fn resolve_objective(args: &ProblemArgs) -> anyhow::Result<ObjectiveSpec> {
    let explicit_bounds = match (args.lower, args.upper) {
        (Some(lo), Some(hi)) => Some(
            BoxBounds::uniform(lo, hi, args.dim).context("bad --lower/--upper box")?,
        ),
        (None, None) => None,
        _ => bail!("--lower and --upper must be given together"),
    };
    if let Some(command) = &args.plugin_cmd {
        let bounds =
            explicit_bounds.ok_or_else(|| anyhow!("--plugin-cmd needs --lower and --upper"))?;
        Ok(ObjectiveSpec::External {
            command: command.clone(),
            bounds,
        })
    } else {
        let kind = args
            .problem
            .ok_or_else(|| anyhow!("one of --problem or --plugin-cmd is required"))?;
        let mut problem = BenchmarkProblem::new(kind, args.dim)?;
        if let Some(bounds) = explicit_bounds {
            problem = problem.with_bounds(bounds)?;
        }
        Ok(ObjectiveSpec::Builtin { problem })
    }
}

fn report_experiment(spec: &ExperimentSpec) -> anyhow::Result<()> {
    let report = run_experiment(spec)?;
    let s = &report.summary;
    println!(
        "{} dim={} runs={} budget={} seed={}",
        spec.objective.label(),
        spec.config.bounds.dim(),
        spec.runs,
        spec.config.nfe_max,
        spec.base_seed
    );
    println!(
        "best={:.6e} mean={:.6e} worst={:.6e} std={:.6e} mean_wall_time={:.3}s",
        s.best, s.mean, s.worst, s.std, s.mean_wall_time
    );
    if let Some(dir) = &spec.out_dir {
        println!("wrote {}", dir.join("summary.json").display());
    }
    Ok(())
}
