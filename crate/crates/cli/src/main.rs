use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use rovodef_cli::{parse_state, run, Command, Options};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Levels,
    Lines,
    Scan,
    Deflect,
    Beam,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Levels => Command::Levels,
            CommandArg::Lines => Command::Lines,
            CommandArg::Scan => Command::Scan,
            CommandArg::Deflect => Command::Deflect,
            CommandArg::Beam => Command::Beam,
        }
    }
}

/// State-selective deflection of diatomic molecules by a standing-wave laser.
#[derive(Parser, Debug)]
#[command(name = "rovodef", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,

    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Lower-state level as nu,J,M
    #[arg(long, value_parser = parse_state)]
    state: Option<rovodef_core::RovibronicLevel>,

    /// Beam RNG seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,

    /// Also write one row per simulated molecule
    #[arg(long)]
    dump_trajectories: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = Options {
        out: cli.out,
        state: cli.state,
        seed: cli.seed,
        dump_trajectories: cli.dump_trajectories,
    };
    match run(cli.command.into(), &cli.config, &options) {
        Ok(report) => {
            print!("{}", report.text);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rovodef: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
