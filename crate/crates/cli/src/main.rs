use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use joint_select_cli::commands::{self, EvaluateInputs, FitInputs};
use joint_select_cli::config::{Overrides, RunConfig};

/// Joint Bayesian selection of probit predictors and their dependence graph.
#[derive(Parser)]
#[command(name = "jbssc", version)]
struct Cli {
    /// `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic training/test set and write it with its ground truth.
    Simulate {
        #[command(flatten)]
        flags: Overrides,
    },
    /// Run the sampler on a dataset and write results.json.
    Fit {
        /// Predictor matrix, n rows by p columns.
        #[arg(long)]
        x: PathBuf,
        /// Responses, one 0/1 value per line.
        #[arg(long)]
        y: PathBuf,
        /// The X file starts with a row of column names.
        #[arg(long)]
        header: bool,
        /// Also write the support of every kept draw to trace.csv.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Score results.json against ground truth and held-out data.
    Evaluate {
        #[arg(long)]
        results: PathBuf,
        /// Directory written by `simulate`; supplies the four files below.
        #[arg(long = "data-dir")]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        beta0: Option<PathBuf>,
        #[arg(long)]
        omega0: Option<PathBuf>,
        #[arg(long = "x-test")]
        x_test: Option<PathBuf>,
        #[arg(long = "y-test")]
        y_test: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the simulation study for one setting and scenario.
    Replicate {
        #[command(flatten)]
        flags: Overrides,
    },
}

fn run(cli: Cli) -> joint_select_cli::Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Simulate { flags } => {
            let cfg = RunConfig::load(flags, config)?;
            for path in commands::simulate(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Fit { x, y, header, trace, flags } => {
            let cfg = RunConfig::load(flags, config)?;
            let path = commands::fit(&cfg, &FitInputs { x, y, header, trace })?;
            println!("{}", path.display());
        }
        Command::Evaluate {
            results,
            data_dir,
            beta0,
            omega0,
            x_test,
            y_test,
            out,
        } => {
            let mut inputs = match &data_dir {
                Some(dir) => EvaluateInputs::from_dir(results, dir),
                None => EvaluateInputs {
                    results,
                    beta0: PathBuf::new(),
                    omega0: PathBuf::new(),
                    x_test: None,
                    y_test: None,
                },
            };
            if let Some(p) = beta0 {
                inputs.beta0 = p;
            }
            if let Some(p) = omega0 {
                inputs.omega0 = p;
            }
            inputs.x_test = x_test.or(inputs.x_test);
            inputs.y_test = y_test.or(inputs.y_test);
            if inputs.beta0.as_os_str().is_empty() || inputs.omega0.as_os_str().is_empty() {
                return Err(joint_select_cli::CliError::Config(
                    "evaluate needs --data-dir or both --beta0 and --omega0".into(),
                ));
            }
            let path = commands::evaluate(&inputs, &out)?;
            println!("{}", path.display());
        }
        Command::Replicate { flags } => {
            let cfg = RunConfig::load(flags, config)?;
            for path in commands::replicate(&cfg)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
