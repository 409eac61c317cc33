//! Model parameters from flags and an optional JSON config document.

use std::fs;
use std::path::Path;

use multibarrier::thermo::TemperatureGrid;
use multibarrier::{BarrierCount, BarrierGeometry, SpectrumConfig};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_LENGTH: f64 = 20.0;
pub const DEFAULT_HEIGHT: f64 = 60.0;

/// Longest list a `start:step:end` range may expand to.
const MAX_RANGE_LEN: usize = 100_000;

/// Parses `c` as a single value, a comma list, or `start:step:end`
/// (inclusive). `inf` selects the closed-form `c → ∞` limit.
pub fn parse_ratios(s: &str) -> CliResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CliError::validation("empty --ratio"));
    }
    if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(parse_ratio).collect::<CliResult<_>>()?;
        let [start, step, end] = parts[..] else {
            return Err(CliError::validation(format!("ratio range `{s}` must be start:step:end")));
        };
        if !(start.is_finite() && end.is_finite() && step.is_finite() && step > 0.0 && end >= start) {
            return Err(CliError::validation(format!("ratio range `{s}` needs finite start <= end and step > 0")));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        if count > MAX_RANGE_LEN {
            return Err(CliError::validation(format!("ratio range `{s}` has {count} values")));
        }
        // Rounded so that 0.3:0.1:1.7 yields the same doubles as typing 0.4, 0.5, ...
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    s.split(',').map(parse_ratio).collect()
}

fn parse_ratio(s: &str) -> CliResult<f64> {
    let t = s.trim();
    if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
        return Ok(f64::INFINITY);
    }
    let c: f64 = t
        .parse()
        .map_err(|_| CliError::validation(format!("bad ratio `{s}`")))?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(CliError::validation(format!("ratio must be positive, got `{s}`")));
    }
    Ok(c)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RatioField {
    Value(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum GridField {
    Text(String),
    Grid(TemperatureGrid),
}

/// JSON config document. Every field is optional; flags win over it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[serde(rename = "N")]
    pub barriers: Option<BarrierCount>,
    pub c: Option<RatioField>,
    pub v: Option<f64>,
    #[serde(rename = "C")]
    pub boundary: Option<f64>,
    pub e_split: Option<f64>,
    pub e_min: Option<f64>,
    #[serde(alias = "grid")]
    pub temps: Option<GridField>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.into(),
            source,
        })
    }
}

/// Fully resolved inputs for one or more `(N, c)` computations.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub length: f64,
    pub barriers: BarrierCount,
    pub ratios: Vec<f64>,
    pub height: f64,
    pub config: SpectrumConfig,
    pub grid: TemperatureGrid,
}

/// Flag values before merging with a config document.
#[derive(Clone, Debug, Default)]
pub struct ModelOverrides {
    pub length: Option<f64>,
    pub barriers: Option<BarrierCount>,
    pub ratios: Option<String>,
    pub height: Option<f64>,
    pub boundary: Option<f64>,
    pub e_split: Option<f64>,
    pub e_min: Option<f64>,
    pub temps: Option<String>,
}

impl ModelParams {
    pub fn resolve(flags: &ModelOverrides, file: Option<&ConfigFile>) -> CliResult<Self> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);
        let ratios = match (&flags.ratios, &file.c) {
            (Some(s), _) => parse_ratios(s)?,
            (None, Some(RatioField::Value(c))) => vec![*c],
            (None, Some(RatioField::List(cs))) => cs.clone(),
            (None, Some(RatioField::Text(s))) => parse_ratios(s)?,
            (None, None) => return Err(CliError::validation("no spacing ratio given (use --ratio or `c` in the config)")),
        };
        if ratios.is_empty() {
            return Err(CliError::validation("empty ratio list"));
        }
        let grid = match (&flags.temps, &file.temps) {
            (Some(s), _) => s.parse()?,
            (None, Some(GridField::Text(s))) => s.parse()?,
            (None, Some(GridField::Grid(g))) => {
                g.validate()?;
                *g
            }
            (None, None) => TemperatureGrid::default(),
        };
        let base = SpectrumConfig::default();
        let config = SpectrumConfig {
            boundary_half_width: flags.boundary.or(file.boundary).unwrap_or(base.boundary_half_width),
            e_split: flags.e_split.or(file.e_split).unwrap_or(base.e_split),
            e_min: flags.e_min.or(file.e_min).unwrap_or(base.e_min),
            ..base
        };
        let params = ModelParams {
            length: flags.length.or(file.length).unwrap_or(DEFAULT_LENGTH),
            barriers: flags.barriers.or(file.barriers).unwrap_or(BarrierCount::Finite(6)),
            ratios,
            height: flags.height.or(file.v).unwrap_or(DEFAULT_HEIGHT),
            config,
            grid,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds every finite-`c` geometry once so bad input fails before any work.
    pub fn validate(&self) -> CliResult<()> {
        for &c in &self.ratios {
            if c.is_infinite() {
                continue;
            }
            let g = self.geometry(c)?;
            self.config.validate(&g)?;
        }
        self.grid.validate()?;
        Ok(())
    }

    pub fn geometry(&self, c: f64) -> CliResult<BarrierGeometry> {
        Ok(BarrierGeometry::new(self.length, self.barriers, c, self.height)?)
    }

    /// The single ratio for commands that take exactly one.
    pub fn single_ratio(&self) -> CliResult<f64> {
        match self.ratios[..] {
            [c] => Ok(c),
            _ => Err(CliError::validation(format!(
                "this command takes one ratio, got {}",
                self.ratios.len()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_forms() {
        assert_eq!(parse_ratios("1.5").unwrap(), vec![1.5]);
        assert_eq!(parse_ratios("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_ratios("2:1:5").unwrap(), vec![2.0, 3.0, 4.0, 5.0]);
        let r = parse_ratios("0.3:0.1:1.7").unwrap();
        assert_eq!(r.len(), 15);
        assert_eq!(r[1], 0.4);
        assert_eq!(r[14], 1.7);
        assert_eq!(parse_ratios("inf").unwrap(), vec![f64::INFINITY]);
        for bad in ["", "x", "-1", "0", "1:0:3", "3:1:1", "1:2", "nan"] {
            assert!(parse_ratios(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_config() {
        let file: ConfigFile = serde_json::from_str(r#"{"L": 20, "N": "inf", "c": [2, 3], "v": 50, "C": 95, "temps": "1:10:5:lin"}"#).unwrap();
        let flags = ModelOverrides {
            height: Some(60.0),
            ..Default::default()
        };
        let p = ModelParams::resolve(&flags, Some(&file)).unwrap();
        assert_eq!(p.barriers, BarrierCount::Infinite);
        assert_eq!(p.ratios, vec![2.0, 3.0]);
        assert_eq!(p.height, 60.0);
        assert_eq!(p.config.boundary_half_width, 95.0);
        assert_eq!(p.grid.count, 5);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"L": 20, "bogus": 1}"#).is_err());
    }

    #[test]
    fn invalid_geometry_is_a_validation_error() {
        let flags = ModelOverrides {
            ratios: Some("2".into()),
            barriers: Some(BarrierCount::Finite(1)),
            ..Default::default()
        };
        let err = ModelParams::resolve(&flags, None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let flags = ModelOverrides {
            ratios: Some("2".into()),
            temps: Some("1:10:0:log".into()),
            ..Default::default()
        };
        assert_eq!(ModelParams::resolve(&flags, None).unwrap_err().exit_code(), 1);
    }
}
