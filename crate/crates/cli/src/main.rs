mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nanophase::{Error, ErrorClass};

#[derive(Parser)]
#[command(name = "nanophase", version, about = "Mechanical phase identification from nanoindentation maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Apply a material's cleaning window and write the retained records.
    Clean(CleanArgs),
    /// Fit a mixture with a fixed number of components.
    Fit(FitArgs),
    /// Fit every component count in a range and pick the BIC minimum.
    Sweep(SweepArgs),
    /// Cross-validate a component count over growing subsamples.
    Validate(ValidateArgs),
    /// Cross-validate several component counts.
    ScanK(ScanArgs),
    /// Draw synthetic indentation records from a parameter preset.
    Synth(SynthArgs),
    /// Phase table, volume fraction and plots for a fitted dataset.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FeatureArg {
    Modulus,
    Hardness,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmArg {
    Gmm,
    Kmeans,
}

#[derive(Args, Serialize, Clone)]
pub struct Common {
    /// Directory for reports, plot tables and the run manifest.
    #[arg(long, default_value = "nanophase-out")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    #[serde(skip)]
    pub format: Format,
}

#[derive(Args, Serialize, Clone)]
pub struct InputArgs {
    /// CSV input; repeat to merge several maps.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Cleaning window to apply before analysis (cu, cr, cucr25, cucr60).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum, default_value_t = FeatureArg::Modulus)]
    pub feature: FeatureArg,
}

#[derive(Args, Serialize, Clone)]
pub struct FitOpts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Use diagonal instead of full covariance matrices.
    #[arg(long)]
    pub diagonal: bool,
}

#[derive(Args, Serialize)]
pub struct CleanArgs {
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub preset: String,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub fit: FitOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub kmin: usize,
    #[arg(long, default_value_t = 9)]
    pub kmax: usize,
    #[command(flatten)]
    pub fit: FitOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Serialize, Clone)]
pub struct CvOpts {
    /// Fold counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
    pub folds: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub step: usize,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Gmm)]
    pub algorithm: AlgorithmArg,
    /// Restarts for each fold's mixture fit (defaults to --restarts).
    #[arg(long)]
    pub fold_restarts: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    pub min_score: f64,
    #[arg(long, default_value_t = 0.05)]
    pub max_std: f64,
}

#[derive(Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub cv: CvOpts,
    #[command(flatten)]
    pub fit: FitOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Component counts to scan, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    pub klist: Vec<usize>,
    #[command(flatten)]
    pub cv: CvOpts,
    #[command(flatten)]
    pub fit: FitOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct SynthArgs {
    /// Mixture preset, e.g. cucr25-1d-E or cucr60-2d.
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Fixed component count; without it the BIC optimum over 1..=kmax is used.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 9)]
    pub kmax: usize,
    #[arg(long, default_value = "sample")]
    pub material: String,
    /// Modulus of the Cu-rich phase used to identify it, GPa.
    #[arg(long, default_value_t = nanophase::presets::CU_REFERENCE_MODULUS)]
    pub cu_ref: f64,
    #[arg(long, default_value_t = nanophase::report::DEFAULT_BINS)]
    pub bins: usize,
    #[command(flatten)]
    pub fit: FitOpts,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::InsufficientData => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
            eprintln!("error: kind={} message=\"{message}\"", e.kind());
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::InputFormat("x".into())), 2);
        assert_eq!(exit_code(&Error::AllFiltered { retention: 0.0 }), 2);
        assert_eq!(exit_code(&Error::NumericalDegeneracy("x".into())), 3);
        assert_eq!(exit_code(&Error::NotConverged("x".into())), 3);
        assert_eq!(exit_code(&Error::InsufficientData { required: 5, available: 3 }), 4);
        assert_eq!(exit_code(&Error::InsufficientSweep("x".into())), 4);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
