//! `inkforge` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "inkforge", version, about = "Digital ink rendering, tokenization and derendering")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// Flat key=value config file (n, m, period, epsilon, p_lines, p_grids, p_noise, p_blur, seed)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Ink token canvas size
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Model image side in pixels
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Resampling period in seconds
    #[arg(long, global = true)]
    pub period: Option<f64>,
    /// Simplification tolerance in canvas units
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub p_lines: Option<f64>,
    #[arg(long, global = true)]
    pub p_grids: Option<f64>,
    #[arg(long, global = true)]
    pub p_noise: Option<f64>,
    #[arg(long, global = true)]
    pub p_blur: Option<f64>,
    /// RNG seed (falls back to INKFORGE_SEED)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode an InkML ink as token text
    Tokenize(commands::TokenizeArgs),
    /// Decode token text into InkML
    Detokenize(commands::DetokenizeArgs),
    /// Rasterize an InkML ink to PNG
    Render(commands::RenderArgs),
    /// Sample an augmentation spec
    Augment(commands::AugmentArgs),
    /// Derender a single word image with the geometric backend
    Derender(commands::DerenderArgs),
    /// Derender every word box of a page
    DerenderPage(commands::DerenderPageArgs),
    /// Generate training examples from ink and word-image corpora
    MakeMixture(commands::MixtureArgs),
    /// Character-level F1 between predicted and reference character boxes
    EvalF1(commands::EvalArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Backend(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Backend(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = config::Config::resolve(&cli.global, std::env::var(config::SEED_ENV).ok())
        .and_then(|cfg| commands::run(cli.command, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("inkforge: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
