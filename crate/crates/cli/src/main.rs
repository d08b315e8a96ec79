//! `rerf`: synthesize, encode, inspect, decode, render and serve
//! residual radiance field streams.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<rerf_core::Error> for CliError {
    fn from(e: rerf_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub(crate) fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

#[derive(Debug, Parser)]
#[command(name = "rerf", version, about = "Residual radiance field codec")]
struct Cli {
    /// Cap on worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file of per-command defaults (`{"encode": {...}}`); flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic grid and motion sequence.
    Synth(SynthArgs),
    /// Encode a grid sequence at one S_q or a ladder of them.
    Encode(EncodeArgs),
    /// Decode one frame of a stream.
    Decode(DecodeArgs),
    /// Print a stream's header, GOF table and per-frame sizes.
    Info(InfoArgs),
    /// Volume-render a grid from a camera.
    Render(RenderArgs),
    /// PSNR between two grids or two images.
    Psnr(PsnrArgs),
    /// Serve a manifest's streams over HTTP.
    Serve(ServeArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    /// Scene description (JSON). Without it the built-in demo scene is used.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Demo scene grid edge.
    #[arg(long)]
    pub size: Option<usize>,
    /// Demo scene frame count.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Demo scene blob velocity in voxels per frame.
    #[arg(long, allow_negative_numbers = true)]
    pub velocity: Option<i32>,
    /// Overrides the scene's texture seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeArgs {
    /// Directory of `.rrfg` frames.
    #[arg(long)]
    pub grids: Option<PathBuf>,
    /// Directory of `.rrfm` motion fields (defaults to --grids).
    #[arg(long)]
    pub motions: Option<PathBuf>,
    /// Quantization scale(s), comma separated. Several values write a
    /// directory with one stream per value and a manifest.
    #[arg(long, value_delimiter = ',')]
    pub sq: Option<Vec<f32>>,
    #[arg(long)]
    pub tau: Option<f32>,
    #[arg(long)]
    pub gof: Option<u32>,
    /// Motion pooling kernel.
    #[arg(long)]
    pub kernel: Option<u32>,
    #[arg(long)]
    pub pca_rank: Option<u32>,
    #[arg(long)]
    pub fps: Option<f32>,
    /// Color decoder weights (`RRFD`) stored in the header; direct color
    /// if absent.
    #[arg(long)]
    pub decoder: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the encode report(s) as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub frame: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print stage times as JSON instead of text.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub json: bool,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub json: bool,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderArgs {
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Camera JSON.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    /// PNG output; a `.rrfi` extension writes raw floats instead.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Color decoder: `RRFD` weights or a stream whose header carries one.
    #[arg(long)]
    pub decoder: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsnrArgs {
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub host: Option<String>,
    /// Decoded frames kept in the cache.
    #[arg(long)]
    pub cache: Option<usize>,
    /// Largest image edge `/render` accepts.
    #[arg(long)]
    pub max_size: Option<u32>,
    #[arg(long)]
    pub samples: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Data(e.into()))?;
    }
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Synth(a) => commands::synth(cfg.resolve("synth", a)?),
        Command::Encode(a) => commands::encode(cfg.resolve("encode", a)?),
        Command::Decode(a) => commands::decode(cfg.resolve("decode", a)?),
        Command::Info(a) => commands::info(cfg.resolve("info", a)?),
        Command::Render(a) => commands::render(cfg.resolve("render", a)?),
        Command::Psnr(a) => commands::psnr(cfg.resolve("psnr", a)?),
        Command::Serve(a) => commands::serve(cfg.resolve("serve", a)?, cli.threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("rerf: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("rerf: {e:#}");
            ExitCode::from(2)
        }
    }
}
