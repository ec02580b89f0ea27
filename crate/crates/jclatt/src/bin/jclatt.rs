use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jclatt::runner::{self, ExperimentConfig, ExperimentId};

#[derive(Parser)]
#[command(name = "jclatt", version, about = "Jaynes-Cummings lattice experiments")]
struct Cli {
    /// Worker threads for sweeps and grids (default: all cores).
    #[arg(long, env = "JCLATT_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even if physics validation fails.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever experiment the config names.
    Run(RunArgs),
    /// Schema and physics checks only; prints a JSON report.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    Bands(RunArgs),
    Phases(RunArgs),
    Loci(RunArgs),
    EdgeSpectrum(RunArgs),
    EdgeWavefunctions(RunArgs),
    Rabi(RunArgs),
    #[command(alias = "edge")]
    EdgeDynamics(RunArgs),
    Chiral(RunArgs),
    Sweep(RunArgs),
    Synthesize(RunArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("worker pool: {e}");
        }
    }
    let (args, id) = match cli.command {
        Command::Validate { config } => return validate(&config),
        Command::Run(a) => (a, None),
        Command::Bands(a) => (a, Some(ExperimentId::Bands)),
        Command::Phases(a) => (a, Some(ExperimentId::Phases)),
        Command::Loci(a) => (a, Some(ExperimentId::Loci)),
        Command::EdgeSpectrum(a) => (a, Some(ExperimentId::EdgeSpectrum)),
        Command::EdgeWavefunctions(a) => (a, Some(ExperimentId::EdgeWavefunctions)),
        Command::Rabi(a) => (a, Some(ExperimentId::Rabi)),
        Command::EdgeDynamics(a) => (a, Some(ExperimentId::EdgeDynamics)),
        Command::Chiral(a) => (a, Some(ExperimentId::Chiral)),
        Command::Sweep(a) => (a, Some(ExperimentId::Sweep)),
        Command::Synthesize(a) => (a, Some(ExperimentId::Synthesize)),
    };
    run(&args, id)
}

fn fail(e: &jclatt::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn run(args: &RunArgs, id: Option<ExperimentId>) -> ExitCode {
    let (cfg, raw) = match ExperimentConfig::load(&args.config, id) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(id) = id {
        if cfg.experiment != id {
            return fail(&jclatt::Error::Config(format!("config is for '{}', not '{id}'", cfg.experiment)));
        }
    }
    let out = runner::output_dir(&cfg, args.out.as_deref());
    match runner::run(&cfg, &raw, &out, args.force) {
        Ok(s) => {
            for c in &s.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {} files to {}", s.files.len() + 1, out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn validate(path: &std::path::Path) -> ExitCode {
    let cfg = match ExperimentConfig::load(path, None) {
        Ok((c, _)) => c,
        Err(e) => {
            // Schema problems are part of the report, not a crash.
            let report = serde_json::json!({"passed": false, "schema_error": e.to_string()});
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            return ExitCode::SUCCESS;
        }
    };
    let report = runner::validate(&cfg);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    ExitCode::SUCCESS
}
