use clap::{Args, Parser, Subcommand, ValueEnum};
use ndc_ofdm_cli::commands::{self, Options, Outcome};
use ndc_ofdm_cli::output::{se_table_text, Format};
use ndc_ofdm_cli::{recipes, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ndcofdm", version, about = "BER simulation and analysis for NDC/DCO/ACO optical OFDM")]
struct Cli {
    /// Master seed (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for result files and manifests.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "NDCOFDM_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// No progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled recipe (see `ndcofdm recipes`).
    #[arg(long)]
    recipe: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweeps from `[[simulate]]` entries.
    Simulate(Input),
    /// Analytic NDC BER curves from `[[analyze]]` entries.
    Analyze(Input),
    /// Every section of a config or recipe.
    Run(Input),
    /// Constellation sizes at equal spectral efficiency.
    SeTable,
    /// LOS gain matrix from a link geometry file.
    ChannelGain {
        #[arg(long)]
        config: PathBuf,
    },
    /// List bundled recipes.
    Recipes,
}

fn report(outcome: &Outcome) {
    for p in &outcome.outputs {
        println!("wrote {}", p.display());
    }
    if outcome.low_confidence {
        eprintln!("some points hit the frame cap before the error target (low confidence)");
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let opts = Options {
        seed: cli.seed,
        out_dir: cli.out_dir,
        workers: cli.workers,
        format: match cli.format {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        },
        verbose: !cli.quiet,
    };
    let outcome = match cli.command {
        Command::Simulate(input) => {
            let src = commands::load_source(input.config.as_deref(), input.recipe.as_deref())?;
            commands::cmd_simulate(&src, &opts)?
        }
        Command::Analyze(input) => {
            let src = commands::load_source(input.config.as_deref(), input.recipe.as_deref())?;
            commands::cmd_analyze(&src, &opts)?
        }
        Command::Run(input) => {
            let src = commands::load_source(input.config.as_deref(), input.recipe.as_deref())?;
            let outcome = commands::cmd_run(&src, &opts)?;
            if !outcome.se_rows.is_empty() {
                print!("{}", se_table_text(&outcome.se_rows));
            }
            outcome
        }
        Command::SeTable => {
            let outcome = commands::cmd_se_table(&opts)?;
            print!("{}", se_table_text(&outcome.se_rows));
            outcome
        }
        Command::ChannelGain { config } => {
            let (outcome, text) = commands::cmd_channel_gain(&config, &opts)?;
            print!("{text}");
            outcome
        }
        Command::Recipes => {
            for name in recipes::names() {
                println!("{name}");
            }
            return Ok(0);
        }
    };
    report(&outcome);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
