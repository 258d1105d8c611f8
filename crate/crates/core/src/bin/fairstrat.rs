use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fairstrat::harness::{emit_results, inspect, run_experiment, ExperimentConfig, RunOptions};
use fairstrat::ingest::{generate_synthetic, write_csv, DatasetSource};

#[derive(Parser)]
#[command(name = "fairstrat", version, about = "Minimax-fair classification against strategic agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for results.json and the CSV tables.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a budget sweep.
    Run(RunArgs),
    /// Run a fairness-slack sweep and mark the Pareto frontier.
    Pareto(RunArgs),
    /// Write a synthetic dataset spec out as CSV.
    GenSynth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print size, dimension and group sizes of dataset specs.
    Inspect {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
    },
}

fn run(args: &RunArgs, pareto: bool) -> fairstrat::Result<()> {
    let config = ExperimentConfig::from_file(&args.config)?;
    let base = args.config.parent().map(Path::to_path_buf);
    let results = run_experiment(&config, base.as_deref(), RunOptions { jobs: args.jobs, pareto })?;
    let failed = results.records.iter().filter(|r| r.error.is_some()).count();
    for path in emit_results(&results, &args.out)? {
        println!("wrote {}", path.display());
    }
    if failed > 0 {
        eprintln!("{failed} of {} record(s) failed; see the error fields", results.records.len());
    }
    Ok(())
}

fn gen_synth(spec: &Path, out: &Path) -> fairstrat::Result<()> {
    match DatasetSource::from_file(spec)? {
        DatasetSource::Synthetic(s) => {
            let data = generate_synthetic(&s)?;
            write_csv(&data, out)?;
            println!("wrote {} agents to {}", data.len(), out.display());
            Ok(())
        }
        DatasetSource::Csv(_) => Err(fairstrat::Error::Config(format!(
            "{} is not a synthetic spec",
            spec.display()
        ))),
    }
}

fn inspect_all(specs: &[PathBuf]) -> bool {
    println!("{:<16} {:>7} {:>5} {:<28} check", "dataset", "n", "d", "group sizes");
    let mut ok = true;
    for spec in specs {
        match inspect(spec) {
            Ok(stats) => {
                let sizes = format!("{:?}", stats.group_sizes);
                let check = match stats.matches_expected() {
                    Some(true) => "ok".to_string(),
                    Some(false) => {
                        ok = false;
                        format!("MISMATCH (expected {:?})", stats.expected_group_sizes.unwrap_or_default())
                    }
                    None => "-".to_string(),
                };
                println!("{:<16} {:>7} {:>5} {:<28} {}", stats.name, stats.n, stats.d, sizes, check);
            }
            Err(e) => {
                ok = false;
                println!("{:<16} error: {e}", spec.display());
            }
        }
    }
    ok
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Pareto(args) => run(args, true),
        Command::GenSynth { spec, out } => gen_synth(spec, out),
        Command::Inspect { specs } => {
            return if inspect_all(specs) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
