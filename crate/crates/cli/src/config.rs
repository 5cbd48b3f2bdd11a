use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Moves,
    Barrier,
    Memory,
    Z4check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "spbm", version, about = "Audits, barriers and memory experiments for the symmetry-protected boundary memory")]
pub struct Args {
    #[arg(long)]
    pub cmd: Option<Command>,
    /// Linear size; sets both Lx and Lz.
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub symmetry: Option<Switch>,
    #[arg(long)]
    pub smax: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sweeps per trial.
    #[arg(long)]
    pub tmax: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Worker threads for trials; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file with any of the run settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Add a generation timestamp to output headers.
    #[arg(long)]
    pub stamp: bool,
}

/// Settings as they may appear in a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    command: Option<Command>,
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "Lx")]
    lx: Option<usize>,
    #[serde(rename = "Lz")]
    lz: Option<usize>,
    depth: Option<usize>,
    symmetry: Option<Switch>,
    s_max: Option<usize>,
    beta: Option<f64>,
    trials: Option<usize>,
    t_max: Option<u64>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "Lx")]
    pub lx: usize,
    #[serde(rename = "Lz")]
    pub lz: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    pub symmetry: Switch,
    pub s_max: usize,
    pub beta: f64,
    pub trials: usize,
    pub t_max: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub stamp: bool,
}

impl RunConfig {
    pub fn symmetric(&self) -> bool {
        self.symmetry == Switch::On
    }

    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let command = args
            .cmd
            .or(file.command)
            .ok_or_else(|| CliError::Config("no command given; use --cmd".into()))?;
        let l_file = file.l;
        let cfg = RunConfig {
            command,
            lx: args.l.or(file.lx).or(l_file).unwrap_or(3),
            lz: args.l.or(file.lz).or(l_file).unwrap_or(3),
            depth: args.depth.or(file.depth).unwrap_or(2),
            symmetry: args.symmetry.or(file.symmetry).unwrap_or(Switch::On),
            s_max: args.smax.or(file.s_max).unwrap_or(2),
            beta: args.beta.or(file.beta).unwrap_or(2.0),
            trials: args.trials.or(file.trials).unwrap_or(200),
            t_max: args.tmax.or(file.t_max).unwrap_or(4096),
            seed: args.seed.or(file.seed).unwrap_or(0),
            out_dir: args.out.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            threads: args.threads.or(file.threads),
            stamp: args.stamp,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.lx < 2 || self.lz < 2 || self.depth < 2 {
            return bad(format!("lattice {}x{}x{} too small; every extent must be at least 2", self.lx, self.lz, self.depth));
        }
        if !(1..=2).contains(&self.s_max) {
            return bad(format!("s_max must be 1 or 2, got {}", self.s_max));
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return bad(format!("beta must be nonnegative, got {}", self.beta));
        }
        if self.t_max == 0 {
            return bad("t_max must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}
