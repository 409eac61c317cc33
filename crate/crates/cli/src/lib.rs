//! Sweeps, caching, file outputs and figure reproduction on top of the
//! `multibarrier` library. The `multibarrier` binary is a thin clap wrapper.

pub mod error;
pub mod figures;
pub mod output;
pub mod params;
pub mod plot;
pub mod sweep;

pub use error::{CliError, CliResult};
pub use figures::{figure_spec, reproduce_figure, FigureSpec};
pub use params::{parse_ratios, ConfigFile, ModelParams};
pub use sweep::{run_sweep, Job, OutputFormat, SweepOutputs, SweepPlan};

/// Environment variable overriding the spectrum cache directory.
pub const CACHE_DIR_ENV: &str = "MULTIBARRIER_CACHE_DIR";
