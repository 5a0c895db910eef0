use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bidisk", version, about = "Julia quotients, directional derivatives and B / B+ / C points of Schur functions on the bidisk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a torus point and write the full report.
    Classify(RunArgs),
    /// Julia quotients on the cone grid of the widest aperture.
    Sweep(RunArgs),
    /// Directional derivative at a torus point.
    Derivative {
        #[command(flatten)]
        run: RunArgs,
        /// Direction `h1_re,h1_im,h2_re,h2_im` (defaults to the radial direction).
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
    },
    /// Moments, resolved coefficients, bound probe and linearity test of the
    /// homogeneous Pick function of a measure.
    Decompose {
        #[arg(long, value_name = "FILE")]
        measure_json: PathBuf,
        /// Write to this file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Build and check a function, then print its descriptor.
    Construct {
        #[command(flatten)]
        source: FunctionArgs,
        /// Write to this file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// List the built-in example functions.
    ListExamples {
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// One of phi1, phi2, phi3, phi4.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Builtin parameter `k=v`, e.g. `N=20` for phi4. Repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Function descriptor JSON.
    #[arg(long, value_name = "FILE")]
    pub function_json: Option<PathBuf>,
    /// Measure JSON; the function is built from it by the measure recipe.
    #[arg(long, value_name = "FILE")]
    pub measure_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: FunctionArgs,
    /// Run configuration JSON (`function`, `tau`, `classifier`); flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Torus point `re,im,re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    /// Cone apertures `a,b,c`, ascending.
    #[arg(long)]
    pub apertures: Option<String>,
    /// Number of schedule levels (at least 8).
    #[arg(long)]
    pub depth: Option<usize>,
    /// Schedule ratio.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Richardson levels.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Write to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format. `sweep` defaults to csv; the other commands write json only
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
