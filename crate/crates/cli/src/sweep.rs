//! Parallel, deterministic sweeps over `(N, c)` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use multibarrier::analysis::{
    classify_family, detect_peaks, fit_critical_exponent, refine_peak_temperature, resample_window, CriticalFit, FamilyReport,
    PeakReport, DEFAULT_CLOSENESS, DEFAULT_EPSILON_MAX, DEFAULT_PROMINENCE,
};
use multibarrier::cache::SpectrumCache;
use multibarrier::spectrum::find_levels;
use multibarrier::thermo::{build_curve, c_infinity_observables, CurveLabel, TemperatureGrid, ThermoCurve};
use multibarrier::{BarrierCount, BarrierGeometry, EnergySpectrum, SpectrumConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{curve_csv, curve_stem, to_json, write_file};
use crate::plot::overlay_svg;

/// Samples per critical-exponent fit window.
const FIT_SAMPLES: usize = 40;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// One unit of work. `ratio = ∞` uses the closed-form free-ring limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Job {
    pub barriers: BarrierCount,
    pub ratio: f64,
}

impl Job {
    pub fn label(&self) -> CurveLabel {
        CurveLabel {
            barriers: Some(self.barriers),
            spacing_ratio: self.ratio.is_finite().then_some(self.ratio),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub length: f64,
    pub height: f64,
    pub jobs: Vec<Job>,
    pub grid: TemperatureGrid,
    pub config: SpectrumConfig,
    pub out_dir: PathBuf,
    /// Defaults to `<out_dir>/cache`.
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    pub format: OutputFormat,
    pub plot: bool,
}

impl SweepPlan {
    pub fn validate(&self) -> CliResult<()> {
        if self.jobs.is_empty() {
            return Err(CliError::validation("sweep has no (N, c) pairs"));
        }
        if self.threads == Some(0) {
            return Err(CliError::validation("--jobs must be at least 1"));
        }
        self.grid.validate()?;
        for job in &self.jobs {
            if job.ratio.is_finite() {
                self.config.validate(&self.geometry(job)?)?;
            }
        }
        Ok(())
    }

    fn geometry(&self, job: &Job) -> CliResult<BarrierGeometry> {
        Ok(BarrierGeometry::new(self.length, job.barriers, job.ratio, self.height)?)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.out_dir.join("cache"))
    }
}

/// A computed curve plus the spectrum it came from (absent for `c → ∞`).
#[derive(Clone, Debug)]
pub struct ComputedCurve {
    pub job: Job,
    pub curve: ThermoCurve,
    pub spectrum: Option<EnergySpectrum>,
}

/// Spectrum and curve for one job; `cache` is consulted when given.
pub fn compute_curve(
    length: f64,
    height: f64,
    job: Job,
    config: &SpectrumConfig,
    temps: &[f64],
    cache: Option<&SpectrumCache>,
) -> CliResult<ComputedCurve> {
    let (mut curve, spectrum) = if job.ratio.is_infinite() {
        let samples = temps
            .iter()
            .map(|&t| c_infinity_observables(config.boundary_half_width, t))
            .collect::<multibarrier::Result<Vec<_>>>()?;
        let curve = ThermoCurve {
            label: CurveLabel::default(),
            samples,
        };
        (curve, None)
    } else {
        let geometry = BarrierGeometry::new(length, job.barriers, job.ratio, height)?;
        let spectrum = match cache {
            Some(c) => c.get_or_compute(&geometry, config)?,
            None => find_levels(&geometry, config)?,
        };
        (build_curve(&spectrum, temps)?, Some(spectrum))
    };
    curve.label = job.label();
    Ok(ComputedCurve { job, curve, spectrum })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveAnalysis {
    pub label: String,
    #[serde(rename = "N")]
    pub barriers: BarrierCount,
    pub c: Option<f64>,
    pub levels: Option<usize>,
    pub ground_energy: Option<f64>,
    pub peaks: Result<PeakReport, String>,
    /// Fit of `A + B√ε` just above the first peak.
    pub critical_fit: Option<Result<CriticalFit, String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyAnalysis {
    pub temperatures: String,
    pub prominence_min: f64,
    pub curves: Vec<CurveAnalysis>,
    pub family: Result<FamilyReport, String>,
}

pub fn analyze(curves: &[ComputedCurve], grid: &str) -> FamilyAnalysis {
    let per_curve = curves
        .iter()
        .map(|c| {
            let peaks = detect_peaks(&c.curve, DEFAULT_PROMINENCE);
            let critical_fit = peaks.as_ref().ok().and_then(|r| r.peaks.first()).map(|p| {
                let t_c = refine_peak_temperature(&c.curve, p.index);
                match &c.spectrum {
                    Some(s) => resample_window(s, t_c, DEFAULT_EPSILON_MAX, FIT_SAMPLES)
                        .and_then(|w| fit_critical_exponent(&w, t_c, DEFAULT_EPSILON_MAX)),
                    None => fit_critical_exponent(&c.curve, t_c, DEFAULT_EPSILON_MAX),
                }
                .map_err(|e| e.to_string())
            });
            CurveAnalysis {
                label: c.curve.label.to_string(),
                barriers: c.job.barriers,
                c: c.job.ratio.is_finite().then_some(c.job.ratio),
                levels: c.spectrum.as_ref().map(|s| s.levels.len()),
                ground_energy: c.spectrum.as_ref().and_then(|s| s.ground_energy()),
                peaks: peaks.map_err(|e| e.to_string()),
                critical_fit,
            }
        })
        .collect();
    let all: Vec<ThermoCurve> = curves.iter().map(|c| c.curve.clone()).collect();
    FamilyAnalysis {
        temperatures: grid.to_string(),
        prominence_min: DEFAULT_PROMINENCE,
        curves: per_curve,
        family: classify_family(&all, DEFAULT_CLOSENESS).map_err(|e| e.to_string()),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepOutputs {
    pub curves: Vec<PathBuf>,
    pub analysis: PathBuf,
    pub plot: Option<PathBuf>,
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Runs every job (in parallel), then writes per-curve files, `analysis.json`
/// and optionally `overlay.svg`. Output depends only on the plan.
pub fn run_sweep(plan: &SweepPlan) -> CliResult<SweepOutputs> {
    plan.validate()?;
    create_dir(&plan.out_dir)?;
    let cache_dir = plan.cache_dir();
    create_dir(&cache_dir)?;
    let cache = SpectrumCache::new(&cache_dir)?;
    let temps = plan.grid.points();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads.unwrap_or(0))
        .build()?;
    let results: Vec<CliResult<ComputedCurve>> = pool.install(|| {
        plan.jobs
            .par_iter()
            .map(|&job| {
                log::info!("computing N={} c={}", job.barriers, job.ratio);
                compute_curve(plan.length, plan.height, job, &plan.config, &temps, Some(&cache))
            })
            .collect()
    });
    let curves = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let mut outputs = SweepOutputs::default();
    for c in &curves {
        let path = plan
            .out_dir
            .join(format!("{}.{}", curve_stem(&c.curve.label), plan.format.extension()));
        let text = match plan.format {
            OutputFormat::Csv => curve_csv(&c.curve),
            OutputFormat::Json => to_json(&c.curve),
        };
        write_file(&path, &text)?;
        outputs.curves.push(path);
    }

    let analysis = analyze(&curves, &plan.grid.to_string());
    outputs.analysis = plan.out_dir.join("analysis.json");
    write_file(&outputs.analysis, &to_json(&analysis))?;

    if plan.plot {
        let path = plan.out_dir.join("overlay.svg");
        let all: Vec<ThermoCurve> = curves.into_iter().map(|c| c.curve).collect();
        write_file(&path, &overlay_svg(&all, plan.grid.spacing))?;
        outputs.plot = Some(path);
    }
    Ok(outputs)
}
