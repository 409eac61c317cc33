//! Curve and spectrum file formats.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use multibarrier::thermo::{CurveLabel, Observables, ThermoCurve};
use multibarrier::EnergySpectrum;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const CURVE_HEADER: &str = "T,avg_energy,specific_heat,entropy,free_energy";

/// One row per temperature; `{:.16e}` keeps every double exact on reload.
pub fn curve_csv(curve: &ThermoCurve) -> String {
    let mut out = String::with_capacity(90 * (curve.samples.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for s in &curve.samples {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.temperature, s.avg_energy, s.specific_heat, s.entropy, s.free_energy
        );
    }
    out
}

pub fn parse_curve_csv(text: &str, label: CurveLabel) -> CliResult<ThermoCurve> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CURVE_HEADER => {}
        _ => return Err(CliError::validation(format!("curve CSV must start with `{CURVE_HEADER}`"))),
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::validation(format!("bad number on data row {}", i + 1)))?;
        let [temperature, avg_energy, specific_heat, entropy, free_energy] = v[..] else {
            return Err(CliError::validation(format!("data row {} has {} fields, expected 5", i + 1, v.len())));
        };
        samples.push(Observables {
            temperature,
            avg_energy,
            specific_heat,
            entropy,
            free_energy,
        });
    }
    Ok(ThermoCurve { label, samples })
}

pub fn spectrum_csv(spectrum: &EnergySpectrum) -> String {
    let mut out = String::from("index,energy\n");
    for (i, e) in spectrum.levels.iter().enumerate() {
        let _ = writeln!(out, "{i},{e:.16e}");
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// File stem for a curve, e.g. `curve_N6_c2.5` or `curve_Ninf_c200`.
pub fn curve_stem(label: &CurveLabel) -> String {
    match (label.barriers, label.spacing_ratio) {
        (Some(n), Some(c)) => format!("curve_N{n}_c{c}"),
        (Some(n), None) => format!("curve_N{n}_cinf"),
        _ => "curve_cinf".into(),
    }
}

/// Inverse of [`curve_stem`]; unknown names give an empty label.
pub fn label_from_stem(stem: &str) -> CurveLabel {
    let parse = || -> Option<CurveLabel> {
        let rest = stem.strip_prefix("curve_N")?;
        let (n, c) = rest.split_once("_c")?;
        Some(CurveLabel {
            barriers: Some(n.parse().ok()?),
            spacing_ratio: if c == "inf" { None } else { Some(c.parse().ok()?) },
        })
    };
    parse().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use multibarrier::BarrierCount;

    #[test]
    fn csv_round_trips_bit_exactly() {
        let spec = EnergySpectrum::free_ring(90.0);
        let curve = multibarrier::thermo::build_curve(&spec, &[0.37, 1.0, 12.5]).unwrap();
        let text = curve_csv(&curve);
        assert!(text.starts_with(CURVE_HEADER));
        let back = parse_curve_csv(&text, curve.label).unwrap();
        assert_eq!(back, curve);
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(parse_curve_csv("a,b\n1,2\n", CurveLabel::default()).is_err());
        let text = format!("{CURVE_HEADER}\n1,2,3\n");
        assert!(parse_curve_csv(&text, CurveLabel::default()).is_err());
    }

    #[test]
    fn stems_round_trip() {
        for label in [
            CurveLabel {
                barriers: Some(BarrierCount::Finite(6)),
                spacing_ratio: Some(0.3),
            },
            CurveLabel {
                barriers: Some(BarrierCount::Infinite),
                spacing_ratio: Some(200.0),
            },
            CurveLabel {
                barriers: Some(BarrierCount::Finite(15)),
                spacing_ratio: None,
            },
        ] {
            assert_eq!(label_from_stem(&curve_stem(&label)), label);
        }
        assert_eq!(label_from_stem("whatever"), CurveLabel::default());
    }
}
