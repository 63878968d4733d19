use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use univinf_cli::{replay, run, Command, DesignChoice, Invocation};

#[derive(Parser)]
#[command(name = "univinf", version, about = "Universal likelihood-ratio tests for incomplete discrete choice models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cross-fit test of a null grid.
    Test {
        #[command(flatten)]
        common: Common,
        /// Data file; overrides the config's `data.path`.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Confidence set for a functional by test inversion.
    Confset {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Monte Carlo size and power table.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "custom")]
        design: DesignChoice,
    },
    /// Re-runs a command from its manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn invocation(command: Command, common: Common, data: Option<PathBuf>, design: Option<DesignChoice>) -> Invocation {
    Invocation {
        command,
        config: common.config,
        data,
        out: common.out,
        design,
        workers: common.workers,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Test { common, data } => run(&invocation(Command::Test, common, data, None)),
        Cmd::Confset { common, data } => run(&invocation(Command::Confset, common, data, None)),
        Cmd::Simulate { common, design } => run(&invocation(Command::Simulate, common, None, Some(design))),
        Cmd::Replay { manifest, out, workers } => replay(&manifest, &out, workers),
    };
    match result {
        Ok(out) => {
            println!("{}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
