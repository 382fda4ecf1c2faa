use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ldovco::cli::{self, CliResult, Failure};
use ldovco::flows::Flow;
use ldovco::formats::{parse_seeds, RunConfig};
use ldovco::Error;

#[derive(Parser)]
#[command(name = "ldovco", version, about = "Corner-aware sizing of LDO-regulated LC oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Inputs {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem definition file (bundled problem when omitted).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Behavioral constants file (defaults when omitted).
    #[arg(long)]
    constants: Option<PathBuf>,
    /// True-evaluation budget per run.
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bundled problem, default constants and a run config.
    Init {
        #[arg(default_value = ".")]
        dir: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run one sizing flow.
    Run {
        #[command(flatten)]
        inputs: Inputs,
        /// co or seq
        #[arg(long)]
        flow: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a design file on every corner.
    Eval {
        design: PathBuf,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        constants: Option<PathBuf>,
        /// ideal or coupled
        #[arg(long, default_value = "coupled")]
        mode: String,
        /// Also write phase-noise sweep tables.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Paired co-design versus sequential runs over several seeds.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        /// Seed list, e.g. `1..10` or `1,2,5`.
        #[arg(long)]
        seeds: Option<String>,
    },
}

/// Config file values, then command-line overrides.
fn resolve(inputs: &Inputs) -> CliResult<(RunConfig, Option<PathBuf>, Option<PathBuf>)> {
    let (mut cfg, mut problem, mut constants) = match &inputs.config {
        Some(p) => {
            let c = cli::load_config(p)?;
            let (pr, co) = (Some(c.problem.clone()), c.constants.clone());
            (c, pr, co)
        }
        None => (
            RunConfig {
                out: PathBuf::from("out"),
                ..RunConfig::default()
            },
            None,
            None,
        ),
    };
    if let Some(p) = &inputs.problem {
        problem = Some(p.clone());
    }
    if let Some(p) = &inputs.constants {
        constants = Some(p.clone());
    }
    if let Some(b) = inputs.budget {
        cfg.opt.eval_budget = b;
    }
    if let Some(o) = &inputs.out {
        cfg.out = o.clone();
    }
    Ok((cfg, problem, constants))
}

fn bad(msg: String) -> Failure {
    Failure::Input(Error::InvalidArgument(msg))
}

fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Init { dir, force } => {
            for p in cli::cmd_init(&dir, force)? {
                println!("wrote {}", p.display());
            }
            Ok(0)
        }
        Command::Run { inputs, flow, seed } => {
            let (mut cfg, problem, constants) = resolve(&inputs)?;
            if let Some(f) = flow {
                cfg.flow = f.parse::<Flow>().map_err(Failure::Input)?;
            }
            let seed = seed.unwrap_or(cfg.seeds[0]);
            let setup = cli::load_setup(problem.as_deref(), constants.as_deref(), cfg.stage1_share)?;
            let opt = cfg.opt.with(seed, cfg.opt.eval_budget);
            let report = cli::cmd_run(&setup, cfg.flow, &opt, &cfg.out)?;
            print!("{}", report.summary);
            for p in &report.artifacts {
                println!("wrote {}", p.display());
            }
            Ok(report.exit_code())
        }
        Command::Eval {
            design,
            problem,
            constants,
            mode,
            sweep,
            out,
        } => {
            let mode = cli::parse_mode(&mode)?;
            let setup = cli::load_setup(problem.as_deref(), constants.as_deref(), ldovco::flows::DEFAULT_STAGE1_SHARE)?;
            let text = cli::cmd_eval(&setup, &design, mode, sweep.then_some(out.as_path()))?;
            print!("{text}");
            Ok(0)
        }
        Command::Compare { inputs, seeds } => {
            let (mut cfg, problem, constants) = resolve(&inputs)?;
            if let Some(s) = seeds {
                cfg.seeds = parse_seeds(&s).map_err(bad)?;
            }
            if cfg.seeds.len() < 2 {
                return Err(bad("compare needs at least two seeds".into()));
            }
            let setup = cli::load_setup(problem.as_deref(), constants.as_deref(), cfg.stage1_share)?;
            let (_, summary) = cli::cmd_compare(&setup, &cfg.opt, &cfg.seeds, &cfg.out)?;
            print!("{summary}");
            println!("wrote {}", cfg.out.join(cli::COMPARISON_FILE).display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ldovco: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
