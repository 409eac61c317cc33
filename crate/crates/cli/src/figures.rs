//! The seven reference curve families as sweep plans.

use std::path::PathBuf;

use multibarrier::thermo::{GridSpacing, TemperatureGrid};
use multibarrier::{BarrierCount, SpectrumConfig};

use crate::error::{CliError, CliResult};
use crate::params::{DEFAULT_HEIGHT, DEFAULT_LENGTH};
use crate::sweep::{run_sweep, Job, OutputFormat, SweepOutputs, SweepPlan};

const FIGURE_POINTS: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct FigureSpec {
    pub id: u32,
    pub barriers: BarrierCount,
    pub ratios: Vec<f64>,
    pub grid: TemperatureGrid,
}

fn integers(a: u32, b: u32) -> Vec<f64> {
    (a..=b).map(f64::from).collect()
}

/// `a/10, (a+1)/10, ..., b/10`.
fn tenths(a: u32, b: u32) -> Vec<f64> {
    (a..=b).map(|i| f64::from(i) / 10.0).collect()
}

/// Family for figure `id` (1 to 7). Ranges are taken exactly as listed,
/// so figure 1 has 38 curves and figures 3 and 4 have 39.
pub fn figure_spec(id: u32) -> CliResult<FigureSpec> {
    use BarrierCount::{Finite, Infinite};
    let (barriers, ratios, t_max) = match id {
        1 => (Finite(6), integers(2, 39), 35.0),
        2 => (Finite(6), tenths(3, 17), 100.0),
        3 => (Finite(15), integers(2, 40), 100.0),
        4 => (Finite(35), integers(2, 40), 100.0),
        5 => (Infinite, vec![200.0], 100.0),
        6 => (Infinite, tenths(3, 32), 100.0),
        7 => (Infinite, integers(2, 41), 100.0),
        _ => return Err(CliError::UnknownFigure(id)),
    };
    let grid = TemperatureGrid::new(0.1, t_max, FIGURE_POINTS, GridSpacing::Log)?;
    Ok(FigureSpec {
        id,
        barriers,
        ratios,
        grid,
    })
}

impl FigureSpec {
    pub fn plan(&self, out_dir: PathBuf, cache_dir: Option<PathBuf>, threads: Option<usize>) -> SweepPlan {
        SweepPlan {
            length: DEFAULT_LENGTH,
            height: DEFAULT_HEIGHT,
            jobs: self
                .ratios
                .iter()
                .map(|&ratio| Job {
                    barriers: self.barriers,
                    ratio,
                })
                .collect(),
            grid: self.grid,
            config: SpectrumConfig::default(),
            out_dir,
            cache_dir,
            threads,
            format: OutputFormat::Csv,
            plot: true,
        }
    }
}

pub fn reproduce_figure(id: u32, out_dir: PathBuf, cache_dir: Option<PathBuf>, threads: Option<usize>) -> CliResult<SweepOutputs> {
    run_sweep(&figure_spec(id)?.plan(out_dir, cache_dir, threads))
}
