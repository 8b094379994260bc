use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use icmaxent_bench::artifacts::{self, JointSource};
use icmaxent_bench::experiments::{self, ExperimentConfig, JOINT_SAMPLES, SELECTION_SAMPLES};
use icmaxent_bench::output::write_csv;
use icmaxent_bench::PxMode;
use icmaxent_core::{io, GraphSpec, SolverOptions, Structure};

#[derive(Parser)]
#[command(name = "icmaxent", version, about = "Maximum-entropy causal models from interventional averages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one system and write its graph, exact P(X), data and constraint files.
    Gen(ExperimentArgs),
    /// Fit one constraint file.
    Fit(FitArgs),
    /// Feature selection with all-interventional versus all-conditional constraints.
    Setting1(ExperimentArgs),
    /// Feature selection with k admissible interventional constraints.
    Setting2(ExperimentArgs),
    /// Joint interventional estimation from single-variable constraints.
    Joint(ExperimentArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence threshold on the squared residual norm.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long, default_value_t = 10)]
    max_restarts: usize,
    /// Fit interventional constraints the identifiability gate rejects.
    #[arg(long)]
    allow_unidentifiable: bool,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_restarts: self.max_restarts,
            allow_unidentifiable: self.allow_unidentifiable,
            ..SolverOptions::default()
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// `a`, `b`, `c`, or a graph file.
    #[arg(long, default_value = "a")]
    structure: String,
    #[arg(long, default_value_t = experiments::DEFAULT_GRAPHS)]
    n_graphs: usize,
    /// Records per dataset [default: 100, or 1000 for `joint`].
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How P(X) is supplied [default: both for `setting1`, exact otherwise].
    #[arg(long)]
    px: Option<PxMode>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("px_source").required(true))]
struct FitArgs {
    #[arg(long)]
    constraints: PathBuf,
    /// Full joint table of the causes.
    #[arg(long, group = "px_source")]
    joint: Option<PathBuf>,
    /// Single-variable marginals, merged by maximum entropy.
    #[arg(long, group = "px_source")]
    marginals: Option<PathBuf>,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

fn structure(arg: &str) -> anyhow::Result<GraphSpec> {
    match arg.parse::<Structure>() {
        Ok(s) => Ok(s.graph()),
        Err(_) => {
            let text = std::fs::read_to_string(arg).with_context(|| format!("reading structure file {arg}"))?;
            io::parse_graph(&text).with_context(|| format!("in {arg}"))
        }
    }
}

fn config(args: &ExperimentArgs, default_samples: usize) -> anyhow::Result<ExperimentConfig> {
    let cfg = ExperimentConfig {
        structure: structure(&args.structure)?,
        n_graphs: args.n_graphs,
        n_samples: args.n_samples.unwrap_or(default_samples),
        seed: args.seed,
        solver: args.solver.options(),
        px: args.px,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn results_file(out: &Path, name: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out.join(name))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => {
            for path in artifacts::generate(&config(&args, SELECTION_SAMPLES)?, &args.out)? {
                println!("{}", path.display());
            }
        }
        Command::Fit(args) => {
            let source = match (args.joint, args.marginals) {
                (Some(p), _) => JointSource::Joint(p),
                (None, Some(p)) => JointSource::Marginals(p),
                (None, None) => unreachable!("clap requires one P(X) source"),
            };
            let outcome =
                artifacts::fit_files(&args.constraints, &source, &args.graph, &args.solver.options(), &args.out)?;
            let r = &outcome.report;
            println!(
                "{}: residual norm {:.3e}, {} restarts, converged {}",
                outcome.model_path.display(),
                r.residual_norm,
                r.restarts,
                r.converged
            );
            if !r.converged {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Setting1(args) => {
            let rows = experiments::run_setting1(&config(&args, SELECTION_SAMPLES)?)?;
            write_csv(&results_file(&args.out, "setting1.csv")?, &rows)?;
        }
        Command::Setting2(args) => {
            let rows = experiments::run_setting2(&config(&args, SELECTION_SAMPLES)?)?;
            write_csv(&results_file(&args.out, "setting2.csv")?, &rows)?;
        }
        Command::Joint(args) => {
            let rows = experiments::run_joint(&config(&args, JOINT_SAMPLES)?)?;
            write_csv(&results_file(&args.out, "joint.csv")?, &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
