use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sic_core::canceller::AlgorithmId;
use sic_harness::{run_complexity, run_convergence, run_decoding, run_sweep, Scenario};

#[derive(Parser)]
#[command(name = "sic", version, about = "Self-interference cancellation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SRINR and system distances over the frame index.
    Convergence(Common),
    /// Converged SRINR, system distance and rate over the input SINR.
    Sweep(Common),
    /// Rates with and without perfect decoding, static and time-variant.
    Decoding(Common),
    /// Per-sample operation counts over L, R and N.
    Complexity(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file; the subcommand's preset when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated algorithm ids.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<AlgorithmId>>,
}

impl Common {
    fn scenario(&self, preset: &str) -> Result<Scenario> {
        let mut s = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => Scenario::preset(preset)?,
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(r) = self.realizations {
            s.realizations = r;
        }
        if let Some(a) = &self.algo {
            s.algorithms = a.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Convergence(c) => ("convergence", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Decoding(c) => ("decoding", c),
        Command::Complexity(c) => ("complexity", c),
    };
    let s = common.scenario(name)?;
    let out = match &cli.command {
        Command::Convergence(_) => run_convergence(&s),
        Command::Sweep(_) => run_sweep(&s),
        Command::Decoding(_) => run_decoding(&s),
        Command::Complexity(_) => run_complexity(&s),
    }
    .with_context(|| format!("{name} run failed"))?;
    let files = out.write(&common.out, name, &s.hash(), s.seed)?;
    println!("wrote {} files to {}", files.len(), common.out.display());
    Ok(())
}
