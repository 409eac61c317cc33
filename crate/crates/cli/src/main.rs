use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multibarrier::cache::SpectrumCache;
use multibarrier::spectrum::find_levels_with_report;
use multibarrier::BarrierCount;
use multibarrier_cli::output::{curve_csv, emit, label_from_stem, parse_curve_csv, spectrum_csv, to_json};
use multibarrier_cli::params::ModelOverrides;
use multibarrier_cli::sweep::{analyze, compute_curve, ComputedCurve};
use multibarrier_cli::{reproduce_figure, run_sweep, CliError, CliResult, ConfigFile, Job, ModelParams, OutputFormat, SweepPlan, CACHE_DIR_ENV};

#[derive(Parser)]
#[command(name = "multibarrier", version, about = "Spectra and specific heat of a packed multi-barrier array")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels for one (N, c).
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: FileOutput,
    },
    /// Thermodynamic curve for one (N, c).
    Curve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: FileOutput,
    },
    /// Curves for a list or range of c, written to a directory.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Output directory.
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Also write overlay.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Peak, critical-exponent and family analysis as JSON. Reads curve CSVs
    /// when given, otherwise computes the curves from the model flags.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        /// Curve CSV files (as written by `sweep`).
        files: Vec<PathBuf>,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute one of the seven reference curve families (1 to 7).
    ReproduceFigure {
        id: u32,
        /// Output directory; defaults to figure-<id>.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, env = CACHE_DIR_ENV)]
        cache_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// JSON document with any of L, N, c, v, C, e_split, e_min, temps.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Total array length L.
    #[arg(long)]
    length: Option<f64>,
    /// Barrier count, an integer >= 2 or `inf`.
    #[arg(long)]
    barriers: Option<BarrierCount>,
    /// Spacing ratio c: value, comma list, start:step:end, or `inf`.
    #[arg(long, allow_hyphen_values = true)]
    ratio: Option<String>,
    /// Barrier height v.
    #[arg(long)]
    height: Option<f64>,
    /// Ring half-width C.
    #[arg(long)]
    boundary: Option<f64>,
    #[arg(long)]
    e_split: Option<f64>,
    #[arg(long)]
    e_min: Option<f64>,
    /// Temperature grid min:max:count:{lin|log}.
    #[arg(long)]
    temps: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Spectrum cache directory.
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FileOutput {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

impl ModelArgs {
    fn resolve(&self) -> CliResult<ModelParams> {
        let file = self.config.as_deref().map(ConfigFile::load).transpose()?;
        let flags = ModelOverrides {
            length: self.length,
            barriers: self.barriers,
            ratios: self.ratio.clone(),
            height: self.height,
            boundary: self.boundary,
            e_split: self.e_split,
            e_min: self.e_min,
            temps: self.temps.clone(),
        };
        ModelParams::resolve(&flags, file.as_ref())
    }

    fn cache(&self) -> CliResult<Option<SpectrumCache>> {
        Ok(self.cache_dir.as_ref().map(SpectrumCache::new).transpose()?)
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        if self.jobs == Some(0) {
            return Err(CliError::validation("--jobs must be at least 1"));
        }
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.jobs.unwrap_or(0)).build()?)
    }
}

fn spectrum(model: &ModelArgs, output: &FileOutput) -> CliResult<()> {
    let p = model.resolve()?;
    let c = p.single_ratio()?;
    if c.is_infinite() {
        return Err(CliError::validation("the c -> inf limit has no numeric spectrum; use `curve --ratio inf`"));
    }
    let geometry = p.geometry(c)?;
    let spectrum = match model.cache()? {
        Some(cache) => cache.get_or_compute(&geometry, &p.config)?,
        None => {
            let (s, report) = model.pool()?.install(|| find_levels_with_report(&geometry, &p.config))?;
            log::info!("{report:?}");
            s
        }
    };
    log::info!("{} levels, ground {:?}", spectrum.levels.len(), spectrum.ground_energy());
    let text = match output.format {
        OutputFormat::Csv => spectrum_csv(&spectrum),
        OutputFormat::Json => to_json(&spectrum),
    };
    emit(output.out.as_deref(), &text)
}

fn curves(model: &ModelArgs, p: &ModelParams) -> CliResult<Vec<ComputedCurve>> {
    let cache = model.cache()?;
    let temps = p.grid.points();
    model.pool()?.install(|| {
        p.ratios
            .iter()
            .map(|&ratio| {
                let job = Job {
                    barriers: p.barriers,
                    ratio,
                };
                compute_curve(p.length, p.height, job, &p.config, &temps, cache.as_ref())
            })
            .collect()
    })
}

fn curve(model: &ModelArgs, output: &FileOutput) -> CliResult<()> {
    let p = model.resolve()?;
    p.single_ratio()?;
    let c = curves(model, &p)?.remove(0);
    let text = match output.format {
        OutputFormat::Csv => curve_csv(&c.curve),
        OutputFormat::Json => to_json(&c.curve),
    };
    emit(output.out.as_deref(), &text)
}

fn analyze_cmd(model: &ModelArgs, files: &[PathBuf], out: Option<&Path>) -> CliResult<()> {
    let (computed, grid) = if files.is_empty() {
        let p = model.resolve()?;
        (curves(model, &p)?, p.grid.to_string())
    } else {
        let mut computed = Vec::new();
        for path in files {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let label = label_from_stem(stem);
            let curve = parse_curve_csv(&text, label)?;
            computed.push(ComputedCurve {
                job: Job {
                    barriers: label.barriers.unwrap_or(BarrierCount::Infinite),
                    ratio: label.spacing_ratio.unwrap_or(f64::INFINITY),
                },
                curve,
                spectrum: None,
            });
        }
        (computed, "from files".to_string())
    };
    emit(out, &to_json(&analyze(&computed, &grid)))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum { model, output } => spectrum(&model, &output),
        Command::Curve { model, output } => curve(&model, &output),
        Command::Sweep { model, out, format, plot } => {
            let p = model.resolve()?;
            let plan = SweepPlan {
                length: p.length,
                height: p.height,
                jobs: p
                    .ratios
                    .iter()
                    .map(|&ratio| Job {
                        barriers: p.barriers,
                        ratio,
                    })
                    .collect(),
                grid: p.grid,
                config: p.config,
                out_dir: out,
                cache_dir: model.cache_dir.clone(),
                threads: model.jobs,
                format,
                plot,
            };
            let outputs = run_sweep(&plan)?;
            eprintln!("wrote {} curves and {}", outputs.curves.len(), outputs.analysis.display());
            Ok(())
        }
        Command::Analyze { model, files, out } => analyze_cmd(&model, &files, out.as_deref()),
        Command::ReproduceFigure {
            id,
            out,
            jobs,
            cache_dir,
        } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("figure-{id}")));
            let outputs = reproduce_figure(id, out, cache_dir, jobs)?;
            eprintln!(
                "wrote {} curves, {} and {}",
                outputs.curves.len(),
                outputs.analysis.display(),
                outputs.plot.as_deref().map(Path::display).map(|d| d.to_string()).unwrap_or_default()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on bad flags; here 2 means a numerical failure.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
