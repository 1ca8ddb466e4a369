//! `dyadisc`: point sets, Haar coefficients, discrepancy norms and
//! verification from the command line.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dyadisc::pointsets::{Family, SigmaPreset, SignPattern};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "dyadisc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a point set as grid numerators over a common denominator.
    Gen(commands::GenArgs),
    /// Dump Haar coefficients of the local discrepancy.
    Coeffs(commands::CoeffsArgs),
    /// Besov norm of the local discrepancy.
    Norm(commands::NormArgs),
    /// Exact L2, even Lp and star discrepancy.
    Classic(commands::ClassicArgs),
    /// Norm ratios against the optimal order over a range of n.
    Sweep(commands::SweepArgs),
    /// Check the closed-form coefficient identities; exits 1 on any failure.
    Verify(commands::VerifyArgs),
    /// Cubature error table for a polynomial integrand.
    Qmc(commands::QmcArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Hammersley,
    Davenport,
    Symmetrized,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Hammersley => Family::Hammersley,
            FamilyArg::Davenport => Family::Davenport,
            FamilyArg::Symmetrized => Family::Symmetrized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SigmaArg {
    Identity,
    AllFlip,
    Alternating,
    Random,
}

/// Sign pattern selection shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct SigmaOpts {
    #[arg(long, value_enum, default_value = "identity")]
    pub sigma: SigmaArg,
    /// Seed for `--sigma random`.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

impl SigmaOpts {
    pub fn preset(&self) -> SigmaPreset {
        match self.sigma {
            SigmaArg::Identity => SigmaPreset::Identity,
            SigmaArg::AllFlip => SigmaPreset::AllFlip,
            SigmaArg::Alternating => SigmaPreset::Alternating,
            SigmaArg::Random => SigmaPreset::Random(self.seed),
        }
    }

    pub fn pattern(&self, n: usize) -> SignPattern {
        self.preset().pattern(n)
    }
}

/// Output selection shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct OutOpts {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutOpts {
    pub fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DYADISC_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("DYADISC_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Gen(a) => commands::gen(&a).map(|_| true),
        Command::Coeffs(a) => commands::coeffs(&a).map(|_| true),
        Command::Norm(a) => commands::norm(&a).map(|_| true),
        Command::Classic(a) => commands::classic(&a).map(|_| true),
        Command::Sweep(a) => commands::sweep(&a).map(|_| true),
        Command::Verify(a) => commands::verify(&a),
        Command::Qmc(a) => commands::qmc(&a).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
