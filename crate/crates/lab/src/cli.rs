//! Command-line surface. Every flag mirrors a [`RunConfig`] key; flags win
//! over `--config` file values.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Report};
use crate::config::RunConfig;
use crate::error::Result;
use crate::opspec::OperatorSpec;
use crate::specs;

#[derive(Debug, Parser)]
#[command(name = "wslln", version, about = "Weighted ergodic series laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Admissibility conditions for a weight pair or a registered example.
    Check,
    /// Weighted averages and series of a field sequence.
    Slln,
    /// One-sided Hilbert transforms and their bound checks.
    Hilbert,
    /// Monte Carlo statistics of randomly modulated series.
    Random,
    /// The example registry.
    ListExamples,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Slln => "slln",
            Command::Hilbert => "hilbert",
            Command::Random => "random",
            Command::ListExamples => "list-examples",
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub example: Option<String>,
    /// Normalizing weight G.
    #[arg(long = "G", global = true)]
    pub g: Option<String>,
    /// Summation weight W; `<G>` stands for G.
    #[arg(long = "W", global = true)]
    pub w: Option<String>,
    #[arg(long, global = true)]
    pub schedule: Option<String>,
    #[arg(long, global = true)]
    pub xi: Option<String>,
    #[arg(long, global = true)]
    pub modulation: Option<String>,
    #[arg(long, global = true)]
    pub law: Option<String>,
    /// characters, unit-characters, random or zero.
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// `one` or `character:M`.
    #[arg(long, global = true)]
    pub h: Option<String>,
    /// Inline JSON or a file.
    #[arg(long, global = true)]
    pub operator: Option<String>,
    #[arg(long, global = true)]
    pub check: Option<String>,
    /// Shorthand for `--check opnorm`.
    #[arg(long, global = true)]
    pub opnorm: bool,
    #[arg(long, global = true, value_delimiter = ',')]
    pub conditions: Vec<String>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// `64,128,256` or `2^6..2^12`.
    #[arg(long, global = true)]
    pub ladder: Option<String>,
    #[arg(long, global = true)]
    pub n_max: Option<u64>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub lambdas: Option<usize>,
    #[arg(long, global = true)]
    pub fields: Option<usize>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Assertions; a mismatch exits with 1.
    #[arg(long, global = true)]
    pub expect: Vec<String>,
    #[arg(long, global = true)]
    pub full_sequence: bool,
    /// Adds 1e7 to the default ladder.
    #[arg(long, global = true)]
    pub extended: bool,
    #[arg(long, global = true)]
    pub no_regime_check: bool,
    #[arg(long, global = true)]
    pub allow_coarse: bool,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Root of the run directories; nothing is written without it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn to_config(&self) -> Result<RunConfig> {
        let f = &self.flags;
        let base = match &f.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let top = RunConfig {
            command: self.command.name().to_string(),
            example: f.example.clone(),
            g: f.g.clone(),
            w: f.w.clone(),
            schedule: f.schedule.clone(),
            xi: f.xi.clone(),
            modulation: f.modulation.clone(),
            law: f.law.clone(),
            field: f.field.clone(),
            h: f.h.clone(),
            operator: f.operator.as_deref().map(OperatorSpec::parse_arg).transpose()?,
            check: if f.opnorm { Some("opnorm".into()) } else { f.check.clone() },
            conditions: f.conditions.clone(),
            p: f.p,
            beta: f.beta,
            delta: f.delta,
            eps: f.eps,
            gamma: f.gamma,
            alpha: f.alpha,
            r: f.r,
            ladder: f.ladder.as_deref().map(specs::ladder).transpose()?,
            n_max: f.n_max,
            grid: f.grid,
            points: f.points,
            samples: f.samples,
            lambdas: f.lambdas,
            fields: f.fields,
            dim: f.dim,
            seed: 0,
            expect: f.expect.clone(),
            full_sequence: f.full_sequence,
            extended: f.extended,
            no_regime_check: f.no_regime_check,
            allow_coarse: f.allow_coarse,
            threads: f.threads,
            out: f.out.clone(),
        };
        let mut cfg = base.overlay(&top)?;
        if let Some(seed) = f.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

/// Parses, runs and writes; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if report.failed() {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Report> {
    let cfg = cli.to_config()?;
    let report = commands::run_with_threads(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for line in &report.lines {
        println!("{line}");
    }
    for e in &report.expectations {
        let mark = if e.ok { "ok" } else { "MISMATCH" };
        println!("expect {:<24} {}={} (got {}) {mark}", e.token, e.label, e.wanted, e.got);
    }
    if let Some(root) = &cfg.out {
        let dir = report.output.write(root, &cfg)?;
        println!("wrote {}", dir.display());
    }
    Ok(report)
}
