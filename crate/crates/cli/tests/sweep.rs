use std::fs;
use std::path::Path;
use std::process::Command;

use multibarrier::thermo::{GridSpacing, TemperatureGrid};
use multibarrier::{BarrierCount, SpectrumConfig};
use multibarrier_cli::{figure_spec, run_sweep, CliError, Job, OutputFormat, SweepPlan};

fn plan(out: &Path, threads: Option<usize>) -> SweepPlan {
    SweepPlan {
        length: 20.0,
        height: 60.0,
        jobs: [2.0, 3.0, 5.0, f64::INFINITY]
            .into_iter()
            .map(|ratio| Job {
                barriers: BarrierCount::Finite(6),
                ratio,
            })
            .collect(),
        grid: TemperatureGrid::new(0.2, 50.0, 60, GridSpacing::Log).unwrap(),
        config: SpectrumConfig {
            e_split: 300.0,
            ..Default::default()
        },
        out_dir: out.to_path_buf(),
        cache_dir: None,
        threads,
        format: OutputFormat::Csv,
        plot: true,
    }
}

fn read_all(paths: &[impl AsRef<Path>]) -> Vec<Vec<u8>> {
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

#[test]
fn warm_cache_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let p = plan(dir.path(), Some(2));
    let cold = run_sweep(&p).unwrap();
    let cold_bytes = read_all(&cold.curves);
    let cold_analysis = fs::read(&cold.analysis).unwrap();
    let cached = fs::read_dir(p.cache_dir()).unwrap().count();
    assert_eq!(cached, 3, "one cache entry per finite c");

    let warm = run_sweep(&p).unwrap();
    assert_eq!(warm, cold);
    assert_eq!(read_all(&warm.curves), cold_bytes);
    assert_eq!(fs::read(&warm.analysis).unwrap(), cold_analysis);
}

#[test]
fn parallel_matches_serial() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let serial = run_sweep(&plan(a.path(), Some(1))).unwrap();
    let parallel = run_sweep(&plan(b.path(), Some(4))).unwrap();
    assert_eq!(serial.curves.len(), 4);
    let mut files_a = read_all(&serial.curves);
    files_a.push(fs::read(&serial.analysis).unwrap());
    files_a.push(fs::read(serial.plot.unwrap()).unwrap());
    let mut files_b = read_all(&parallel.curves);
    files_b.push(fs::read(&parallel.analysis).unwrap());
    files_b.push(fs::read(parallel.plot.unwrap()).unwrap());
    assert_eq!(files_a, files_b);
}

#[test]
fn corrupted_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let p = plan(dir.path(), Some(2));
    let first = run_sweep(&p).unwrap();
    let bytes = read_all(&first.curves);
    for entry in fs::read_dir(p.cache_dir()).unwrap() {
        fs::write(entry.unwrap().path(), b"garbage").unwrap();
    }
    let again = run_sweep(&p).unwrap();
    assert_eq!(read_all(&again.curves), bytes);
}

#[test]
fn invalid_plans_fail_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = plan(dir.path(), None);
    p.grid.count = 0;
    assert!(matches!(run_sweep(&p), Err(CliError::Model(e)) if e.is_validation()));

    let mut p = plan(dir.path(), None);
    p.jobs.clear();
    assert!(matches!(run_sweep(&p), Err(CliError::Validation(_))));

    let mut p = plan(dir.path(), None);
    p.jobs[0].barriers = BarrierCount::Finite(1);
    assert_eq!(run_sweep(&p).unwrap_err().exit_code(), 1);
}

#[test]
fn unwritable_output_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let p = plan(&blocker.join("out"), None);
    assert!(matches!(run_sweep(&p), Err(CliError::Io { .. })));
}

#[test]
fn figure_families() {
    let f1 = figure_spec(1).unwrap();
    assert_eq!((f1.barriers, f1.ratios.len()), (BarrierCount::Finite(6), 38));
    assert_eq!((f1.grid.min, f1.grid.max, f1.grid.count), (0.1, 35.0, 400));
    let f3 = figure_spec(3).unwrap();
    assert_eq!(f3.ratios, (2..=40).map(f64::from).collect::<Vec<_>>());
    let f6 = figure_spec(6).unwrap();
    assert_eq!(f6.barriers, BarrierCount::Infinite);
    assert_eq!((f6.ratios[0], *f6.ratios.last().unwrap(), f6.ratios.len()), (0.3, 3.2, 30));
    assert!(matches!(figure_spec(8), Err(CliError::UnknownFigure(8))));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multibarrier"))
}

#[test]
fn binary_exit_codes() {
    let out = bin().args(["reproduce-figure", "8"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown figure 8"));

    let out = bin().args(["curve", "--ratio", "2", "--temps", "1:10:0:log"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["curve", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["curve", "--ratio", "inf", "--temps", "1:1000:3:log"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("T,avg_energy,specific_heat,entropy,free_energy\n"));
}

#[test]
fn binary_sweep_uses_cache_env_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.json");
    fs::write(&config, r#"{"L": 20, "N": 6, "c": "2:1:3", "v": 60, "e_split": 300, "temps": "0.5:20:30:log"}"#).unwrap();
    let cache = dir.path().join("shared-cache");
    let run = |out: &str| {
        let status = bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .args(["--jobs", "2", "--out"])
            .arg(dir.path().join(out))
            .env("MULTIBARRIER_CACHE_DIR", &cache)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("a");
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);
    run("b");
    for name in ["curve_N6_c2.csv", "curve_N6_c3.csv", "analysis.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap()
        );
    }
    assert!(!dir.path().join("a").join("cache").exists());

    let out = bin()
        .arg("analyze")
        .arg(dir.path().join("a").join("curve_N6_c2.csv"))
        .arg(dir.path().join("a").join("curve_N6_c3.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["curves"].as_array().unwrap().len(), 2);
    assert_eq!(v["curves"][1]["c"], 3.0);
}
