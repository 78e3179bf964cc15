use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dilute_cli::{run, Subcommand};

#[derive(Parser)]
#[command(name = "dilute", version, about = "Dilute random-cluster and Ising workbench")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML config, or a manifest.json to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config and DILUTE_OUT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(clap::Subcommand, Clone, Copy)]
enum Cmd {
    /// Surface tension of an oriented box, exact or by thermodynamic integration.
    Tension,
    /// Maximal flows over a set of directions.
    Flow,
    /// Wulff crystal of a norm or a tension table.
    Wulff,
    /// Rate function and annealed tension of the tension's disorder law.
    Deviations,
    /// Conditioned phase-coexistence chains and droplet fits.
    Coexist,
    /// Exact-scale oracle checks.
    OracleSuite,
}

impl From<Cmd> for Subcommand {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Tension => Subcommand::Tension,
            Cmd::Flow => Subcommand::Flow,
            Cmd::Wulff => Subcommand::Wulff,
            Cmd::Deviations => Subcommand::Deviations,
            Cmd::Coexist => Subcommand::Coexist,
            Cmd::OracleSuite => Subcommand::OracleSuite,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.cmd.into(), args.config.as_deref(), args.seed, args.out) {
        Ok(m) => {
            for o in &m.outputs {
                println!("{}  {}", o.sha256, o.file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dilute: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
