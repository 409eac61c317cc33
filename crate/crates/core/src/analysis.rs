//! Peak detection, critical-exponent fits and family clustering of
//! specific-heat curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::EnergySpectrum;
use crate::thermo::{build_curve, CurveLabel, ThermoCurve};

pub const DEFAULT_PROMINENCE: f64 = 0.05;
pub const MIN_PEAK_SAMPLES: usize = 20;
pub const DEFAULT_EPSILON_MAX: f64 = 0.1;
pub const MIN_FIT_SAMPLES: usize = 10;
pub const DEFAULT_CLOSENESS: f64 = 0.03;
/// Rise after a single peak, relative to the peak, still counted as monotone.
pub const DEBYE_RISE_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeakClass {
    NoPeak,
    DebyeLike,
    SinglePeak,
    DoublePeak,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub temperature: f64,
    pub specific_heat: f64,
    /// `(peak - higher bounding valley) / peak`.
    pub prominence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub classification: PeakClass,
    /// `C_h` at the largest sampled temperature.
    pub asymptote_estimate: f64,
}

/// Relative prominence of the maximum at `i`.
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if y[j] > h {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    let base = left_min.max(right_min);
    if h > 0.0 {
        (h - base) / h
    } else {
        0.0
    }
}

/// Interior local maxima; a plateau counts once, at its first sample.
fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < y.len() {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < y.len() && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < y.len() && y[j + 1] < y[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

pub fn detect_peaks(curve: &ThermoCurve, prominence_min: f64) -> Result<PeakReport> {
    let n = curve.samples.len();
    if n < MIN_PEAK_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_PEAK_SAMPLES,
            available: n,
        });
    }
    let y = curve.specific_heats();
    let peaks: Vec<Peak> = local_maxima(&y)
        .into_iter()
        .map(|i| Peak {
            index: i,
            temperature: curve.samples[i].temperature,
            specific_heat: y[i],
            prominence: prominence(&y, i),
        })
        .filter(|p| p.prominence >= prominence_min)
        .collect();
    let classification = match peaks.len() {
        0 => PeakClass::NoPeak,
        1 => {
            let p = peaks[0];
            let mut running_min = p.specific_heat;
            let mut rise: f64 = 0.0;
            for &v in &y[p.index..] {
                running_min = running_min.min(v);
                rise = rise.max(v - running_min);
            }
            if rise <= DEBYE_RISE_TOL * p.specific_heat {
                PeakClass::DebyeLike
            } else {
                PeakClass::SinglePeak
            }
        }
        _ => PeakClass::DoublePeak,
    };
    Ok(PeakReport {
        peaks,
        classification,
        asymptote_estimate: y[n - 1],
    })
}

/// Sample-grid maximum of `C_h` near `index`, refined by a parabola through
/// three neighbours (in `ln T` for log-like grids).
pub fn refine_peak_temperature(curve: &ThermoCurve, index: usize) -> f64 {
    let s = &curve.samples;
    if index == 0 || index + 1 >= s.len() {
        return s[index].temperature;
    }
    let x = [s[index - 1].temperature.ln(), s[index].temperature.ln(), s[index + 1].temperature.ln()];
    let y = [s[index - 1].specific_heat, s[index].specific_heat, s[index + 1].specific_heat];
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if !(curv < 0.0) {
        return s[index].temperature;
    }
    // vertex of the parabola through the three points
    let xv = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curv);
    xv.clamp(x[0], x[2]).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalFit {
    pub t_c: f64,
    pub a: f64,
    pub b: f64,
    pub chi: f64,
    pub epsilon_window: (f64, f64),
    /// RMS error of the `A + B√ε` fit.
    pub residual: f64,
    pub samples: usize,
}

fn least_squares_line(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Fits `C_h = A + B√ε`, `ε = (T - T_c)/T_c`, on `0 < ε ≤ epsilon_max`, and
/// estimates `χ = 1 + d ln|dC_h/dT| / d ln ε`.
pub fn fit_critical_exponent(curve: &ThermoCurve, t_c: f64, epsilon_max: f64) -> Result<CriticalFit> {
    if !(t_c > 0.0 && epsilon_max > 0.0) {
        return Err(Error::invalid("t_c", "T_c and epsilon_max must be positive"));
    }
    let pts: Vec<(f64, f64, f64)> = curve
        .samples
        .iter()
        .map(|s| (s.temperature, (s.temperature - t_c) / t_c, s.specific_heat))
        .filter(|&(_, eps, _)| eps > 0.0 && eps <= epsilon_max)
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            available: pts.len(),
        });
    }
    let root: Vec<f64> = pts.iter().map(|p| p.1.sqrt()).collect();
    let ch: Vec<f64> = pts.iter().map(|p| p.2).collect();
    let (a, b) = least_squares_line(&root, &ch).ok_or_else(|| Error::DegenerateWindow("all ε equal".into()))?;
    let residual = (root
        .iter()
        .zip(&ch)
        .map(|(r, c)| (a + b * r - c).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();

    let mut log_eps = Vec::new();
    let mut log_slope = Vec::new();
    for w in pts.windows(3) {
        let (t0, _, y0) = w[0];
        let (t1, e1, y1) = w[1];
        let (t2, _, y2) = w[2];
        let (h1, h2) = (t1 - t0, t2 - t1);
        let deriv = -h2 / (h1 * (h1 + h2)) * y0 + (h2 - h1) / (h1 * h2) * y1 + h1 / (h2 * (h1 + h2)) * y2;
        if deriv != 0.0 && deriv.is_finite() {
            log_eps.push(e1.ln());
            log_slope.push(deriv.abs().ln());
        }
    }
    if log_eps.len() < 2 {
        return Err(Error::DegenerateWindow("derivative vanishes across the window".into()));
    }
    let (_, slope) = least_squares_line(&log_eps, &log_slope)
        .ok_or_else(|| Error::DegenerateWindow("single ε value".into()))?;
    let eps_lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let eps_hi = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CriticalFit {
        t_c,
        a,
        b,
        chi: 1.0 + slope,
        epsilon_window: (eps_lo, eps_hi),
        residual,
        samples: pts.len(),
    })
}

/// Curve on `count` log-spaced `ε` values in `[epsilon_max·1e-3, epsilon_max]`
/// above `t_c`, computed directly from the spectrum.
pub fn resample_window(spec: &EnergySpectrum, t_c: f64, epsilon_max: f64, count: usize) -> Result<ThermoCurve> {
    if count < 2 {
        return Err(Error::invalid("count", "need at least two points"));
    }
    let lo = epsilon_max * 1e-3;
    let temps: Vec<f64> = (0..count)
        .map(|i| {
            let eps = lo * (epsilon_max / lo).powf(i as f64 / (count - 1) as f64);
            t_c * (1.0 + eps)
        })
        .collect();
    build_curve(spec, &temps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// Indices (into the input) of the dense Debye-like batch, sorted by `c`.
    pub dense: Vec<usize>,
    /// Remaining indices, sorted by `c`.
    pub outliers: Vec<usize>,
    /// Smallest `c` in the dense batch.
    pub threshold_c: Option<f64>,
    pub closeness: f64,
}

fn ratio_key(label: &CurveLabel) -> f64 {
    label.spacing_ratio.unwrap_or(f64::INFINITY)
}

/// Largest relative deviation between two curves over the upper half of the
/// shared temperature grid.
pub fn upper_half_deviation(a: &ThermoCurve, b: &ThermoCurve) -> f64 {
    let n = a.samples.len();
    let start = n / 2;
    a.samples[start..]
        .iter()
        .zip(&b.samples[start..])
        .map(|(x, y)| {
            let scale = 0.5 * (x.specific_heat.abs() + y.specific_heat.abs());
            if scale > 0.0 {
                (x.specific_heat - y.specific_heat).abs() / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Splits curves into the largest cluster of mutually close curves (linked
/// by deviation below `closeness`) and outliers.
pub fn classify_family(curves: &[ThermoCurve], closeness: f64) -> Result<FamilyReport> {
    if curves.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            available: curves.len(),
        });
    }
    let n0 = curves[0].label.barriers;
    if curves.iter().any(|c| c.label.barriers != n0) {
        return Err(Error::invalid("curves", "must share the barrier count"));
    }
    let temps = curves[0].temperatures();
    if curves.iter().any(|c| c.temperatures() != temps) {
        return Err(Error::invalid("curves", "must share the temperature grid"));
    }

    let m = curves.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..m {
        for j in i + 1..m {
            if upper_half_deviation(&curves[i], &curves[j]) < closeness {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..m {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let by_c = |v: &mut Vec<usize>| v.sort_by(|&a, &b| ratio_key(&curves[a].label).total_cmp(&ratio_key(&curves[b].label)).then(a.cmp(&b)));
    let best = groups
        .into_values()
        .max_by(|a, b| {
            let top = |g: &Vec<usize>| g.iter().map(|&i| ratio_key(&curves[i].label)).fold(f64::NEG_INFINITY, f64::max);
            a.len().cmp(&b.len()).then(top(a).total_cmp(&top(b)))
        })
        .unwrap_or_default();
    let mut dense = best;
    by_c(&mut dense);
    let mut outliers: Vec<usize> = (0..m).filter(|i| !dense.contains(i)).collect();
    by_c(&mut outliers);
    let threshold_c = dense.first().and_then(|&i| curves[i].label.spacing_ratio);
    Ok(FamilyReport {
        dense,
        outliers,
        threshold_c,
        closeness,
    })
}
