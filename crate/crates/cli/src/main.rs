use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod run;

use config::{parse_config, Command};

/// Robust risk measures and option prices under optimal-transport ambiguity.
#[derive(Parser)]
#[command(name = "wassrisk", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    config: PathBuf,
    /// CSV output path; overrides `output` in the config.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classical and robust AV@R or V@R over a grid of levels and penalties.
    Risk(Common),
    /// Robust option price; `--curve` sweeps call strikes into a CSV.
    Price {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        curve: bool,
    },
    /// Certifies the dual engine against the LP oracle on the seeded corpus.
    CheckDuality(Common),
    /// Directedness check and tail identity for a family of laws.
    Directed(Common),
    /// Primal and dual robust OCE on a finite space.
    FiniteDual(Common),
    /// Runs whichever command the config names.
    Run(Common),
}

const EXIT_ERROR: u8 = 1;
const EXIT_NONCONVERGED: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WASSRISK_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let (expected, common, curve) = match cli.command {
        Cmd::Risk(c) => (Some(Command::Risk), c, false),
        Cmd::Price { common, curve } => (Some(Command::Price), common, curve),
        Cmd::CheckDuality(c) => (Some(Command::CheckDuality), c, false),
        Cmd::Directed(c) => (Some(Command::Directed), c, false),
        Cmd::FiniteDual(c) => (Some(Command::FiniteDual), c, false),
        Cmd::Run(c) => (None, c, false),
    };

    let mut config = match parse_config(&common.config) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    if let Some(cmd) = expected {
        if config.command() != cmd {
            log::error!("config is for `{}`, not `{cmd}`", config.command());
            return ExitCode::from(EXIT_ERROR);
        }
    }
    if let Some(out) = common.output {
        config.set_output(out);
    }

    match run::run(&config, curve) {
        Ok(report) => {
            match serde_json::to_string_pretty(&report.json) {
                Ok(s) => println!("{s}"),
                Err(e) => {
                    log::error!("{e}");
                    return ExitCode::from(EXIT_ERROR);
                }
            }
            if let Some(out) = config.output() {
                log::info!("wrote {}", out.display());
            }
            if report.nonconverged {
                ExitCode::from(EXIT_NONCONVERGED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
