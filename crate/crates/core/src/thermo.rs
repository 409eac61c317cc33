//! Canonical-ensemble observables of a single particle on the ring.
//!
//! Boltzmann weights are taken relative to the ground level,
//! `w = exp(-β(e - e0))`, so that low temperatures do not underflow. The
//! reported quantities are the usual unshifted ones:
//!
//! ```text
//! ⟨e⟩ = Σ e w / Z        C_h = (⟨e²⟩ - ⟨e⟩²) / T²
//! F   = -T ln Z          S   = (⟨e⟩ - F) / T
//! ```

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BarrierCount;
use crate::numeric::CompensatedSum;
use crate::spectrum::EnergySpectrum;

/// Terms with `β(e - e0)` above this are dropped from the tail.
pub const TAIL_EXPONENT_CUTOFF: f64 = 40.0;
/// Numerical levels with `β(e - e0)` above this are dropped.
pub const WEIGHT_EXPONENT_FLOOR: f64 = 700.0;
/// Largest number of analytic tail terms summed for one temperature.
pub const MAX_TAIL_TERMS: u64 = 10_000_000;

/// Ground-shifted Boltzmann sums at one inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSums {
    pub beta: f64,
    /// Energy origin `e0` of the weights.
    pub shift: f64,
    /// `Σ w`.
    pub z: f64,
    /// `Σ e w`.
    pub e1: f64,
    /// `Σ e² w`.
    pub e2: f64,
    /// `Σ (e - ⟨e⟩)² w`, accumulated in a second pass.
    pub central2: f64,
    pub tail_terms_used: u64,
}

impl PartitionSums {
    pub fn avg_energy(&self) -> f64 {
        self.e1 / self.z
    }

    pub fn variance(&self) -> f64 {
        (self.central2 / self.z).max(0.0)
    }

    /// `ln Z` of the unshifted weights.
    pub fn ln_z(&self) -> f64 {
        self.z.ln() - self.beta * self.shift
    }
}

fn tail_index_bound(c: f64, energy: f64) -> f64 {
    c * energy.max(0.0).sqrt() / std::f64::consts::PI
}

/// All contributing levels in ascending order (so descending weight).
fn contributing_levels(spec: &EnergySpectrum, beta: f64) -> Result<(f64, Vec<f64>, u64)> {
    let shift = spec
        .ground_energy()
        .ok_or_else(|| Error::invalid("spectrum", "no levels"))?;
    let numeric_cut = shift + WEIGHT_EXPONENT_FLOOR / beta;
    let mut out: Vec<f64> = spec.levels.iter().copied().take_while(|&e| e <= numeric_cut).collect();

    let mut tail_used = 0;
    if let Some(tail) = spec.tail {
        let e_cut = shift + TAIL_EXPONENT_CUTOFF / beta;
        let last = tail_index_bound(tail.boundary_half_width, e_cut).floor();
        let first = tail.first_index as f64;
        let needed = if last >= first { last - first + 1.0 } else { 0.0 };
        if needed > MAX_TAIL_TERMS as f64 {
            return Err(Error::TailTooLong {
                beta,
                needed: needed.min(u64::MAX as f64) as u64,
                cap: MAX_TAIL_TERMS,
            });
        }
        let tail_levels: Vec<f64> = tail.iter().take_while(|&e| e <= e_cut).collect();
        tail_used = tail_levels.len() as u64;
        if out.last().is_some_and(|&l| tail_levels.first().is_some_and(|&t| t < l)) {
            out.extend(tail_levels);
            out.sort_by(|a, b| a.total_cmp(b));
        } else {
            out.extend(tail_levels);
        }
    }
    Ok((shift, out, tail_used))
}

pub fn partition_sums(spec: &EnergySpectrum, beta: f64) -> Result<PartitionSums> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be positive and finite"));
    }
    let (shift, levels, tail_terms_used) = contributing_levels(spec, beta)?;
    let (mut z, mut e1, mut e2) = (CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default());
    let mut de = CompensatedSum::default();
    for &e in &levels {
        let w = (-beta * (e - shift)).exp();
        z.add(w);
        e1.add(e * w);
        e2.add(e * e * w);
        de.add((e - shift) * w);
    }
    let z = z.value();
    let mean = shift + de.value() / z;
    let mut central = CompensatedSum::default();
    for &e in &levels {
        let w = (-beta * (e - shift)).exp();
        let d = e - mean;
        central.add(d * d * w);
    }
    Ok(PartitionSums {
        beta,
        shift,
        z,
        e1: e1.value(),
        e2: e2.value(),
        central2: central.value(),
        tail_terms_used,
    })
}

/// Thermodynamic quantities at one temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub temperature: f64,
    pub avg_energy: f64,
    pub specific_heat: f64,
    pub entropy: f64,
    pub free_energy: f64,
}

pub fn observables(spec: &EnergySpectrum, temperature: f64) -> Result<Observables> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid("temperature", "must be positive and finite"));
    }
    let beta = 1.0 / temperature;
    let sums = partition_sums(spec, beta)?;
    let avg = sums.avg_energy();
    let free_energy = sums.shift - temperature * sums.z.ln();
    Ok(Observables {
        temperature,
        avg_energy: avg,
        specific_heat: sums.variance() * beta * beta,
        entropy: sums.z.ln() + beta * (avg - sums.shift),
        free_energy,
    })
}

/// Observables of the `c → ∞` limit: all free-ring levels `(πn/C)²`, `n ≥ 0`.
pub fn c_infinity_observables(boundary_half_width: f64, temperature: f64) -> Result<Observables> {
    if !(boundary_half_width > 0.0) {
        return Err(Error::invalid("boundary_half_width", "must be positive"));
    }
    observables(&EnergySpectrum::free_ring(boundary_half_width), temperature)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    Lin,
    Log,
}

/// `count` temperatures from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: GridSpacing,
}

impl Default for TemperatureGrid {
    fn default() -> Self {
        TemperatureGrid {
            min: 0.1,
            max: 100.0,
            count: 600,
            spacing: GridSpacing::Log,
        }
    }
}

impl TemperatureGrid {
    pub fn new(min: f64, max: f64, count: usize, spacing: GridSpacing) -> Result<Self> {
        let g = TemperatureGrid { min, max, count, spacing };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("temperature grid", "empty"));
        }
        if !(self.min > 0.0 && self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::invalid("temperature grid", "bounds must be positive and finite"));
        }
        if self.count > 1 && !(self.max > self.min) {
            return Err(Error::invalid("temperature grid", "max must exceed min"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.spacing {
                    GridSpacing::Lin => self.min + t * (self.max - self.min),
                    GridSpacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }
}

impl FromStr for TemperatureGrid {
    type Err = Error;

    /// `min:max:count:{lin|log}`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::invalid("temperature grid", "expected min:max:count:{lin|log}"));
        }
        let num = |p: &str, what: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("temperature grid", format!("bad {what} `{p}`")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid("temperature grid", format!("bad count `{}`", parts[2])))?;
        let spacing = match parts[3].trim().to_ascii_lowercase().as_str() {
            "lin" | "linear" => GridSpacing::Lin,
            "log" => GridSpacing::Log,
            other => return Err(Error::invalid("temperature grid", format!("unknown spacing `{other}`"))),
        };
        TemperatureGrid::new(num(parts[0], "min")?, num(parts[1], "max")?, count, spacing)
    }
}

impl fmt::Display for TemperatureGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.spacing {
            GridSpacing::Lin => "lin",
            GridSpacing::Log => "log",
        };
        write!(f, "{}:{}:{}:{}", self.min, self.max, self.count, s)
    }
}

/// Which geometry a curve belongs to; both fields are `None` for `c → ∞`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveLabel {
    pub barriers: Option<BarrierCount>,
    pub spacing_ratio: Option<f64>,
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.barriers, self.spacing_ratio) {
            (Some(n), Some(c)) => write!(f, "N={n} c={c}"),
            _ => write!(f, "c=inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoCurve {
    pub label: CurveLabel,
    pub samples: Vec<Observables>,
}

impl ThermoCurve {
    pub fn temperatures(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.temperature).collect()
    }

    pub fn specific_heats(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.specific_heat).collect()
    }

    /// Descriptions of any broken curve invariants (`T` increasing,
    /// `C_h ≥ 0`, `S` nondecreasing up to rounding).
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for w in self.samples.windows(2) {
            if !(w[1].temperature > w[0].temperature) {
                out.push(format!("T not increasing at {}", w[1].temperature));
            }
            let tol = 1e-12 * w[0].entropy.abs().max(1.0);
            if w[1].entropy < w[0].entropy - tol {
                out.push(format!("S decreases at T={}", w[1].temperature));
            }
        }
        for s in &self.samples {
            if !(s.specific_heat >= 0.0) {
                out.push(format!("C_h = {} at T={}", s.specific_heat, s.temperature));
            }
        }
        out
    }
}

fn label_of(spec: &EnergySpectrum) -> CurveLabel {
    match spec.provenance {
        Some(p) => CurveLabel {
            barriers: Some(p.geometry.barriers()),
            spacing_ratio: Some(p.geometry.spacing_ratio()),
        },
        None => CurveLabel::default(),
    }
}

/// Observables at each temperature, computed in parallel.
pub fn build_curve(spec: &EnergySpectrum, temperatures: &[f64]) -> Result<ThermoCurve> {
    if temperatures.is_empty() {
        return Err(Error::invalid("temperatures", "empty grid"));
    }
    if temperatures.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("temperatures", "must be positive and finite"));
    }
    if temperatures.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("temperatures", "must be strictly increasing"));
    }
    let samples = temperatures
        .par_iter()
        .map(|&t| observables(spec, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThermoCurve {
        label: label_of(spec),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schottky(delta: f64, t: f64) -> f64 {
        let x = delta / t;
        x * x * x.exp() / (1.0 + x.exp()).powi(2)
    }

    #[test]
    fn single_level() {
        let s = EnergySpectrum::from_levels(vec![2.5]);
        for t in [0.01, 1.0, 1e4] {
            let o = observables(&s, t).unwrap();
            assert_eq!(o.avg_energy, 2.5);
            assert_eq!(o.specific_heat, 0.0);
            assert!((o.free_energy - 2.5).abs() < 1e-12);
            assert!(o.entropy.abs() < 1e-12);
        }
        let p = partition_sums(&s, 3.0).unwrap();
        assert!((p.ln_z() + 7.5).abs() < 1e-12);
    }

    #[test]
    fn two_level_is_schottky() {
        let s = EnergySpectrum::from_levels(vec![0.0, 1.7]);
        for t in [0.05, 0.3, 1.0, 7.0, 100.0] {
            let o = observables(&s, t).unwrap();
            let want = schottky(1.7, t);
            assert!((o.specific_heat - want).abs() <= 1e-12 * want.max(1e-300), "T={t}");
        }
    }

    #[test]
    fn cold_limit_is_ground_state() {
        let s = EnergySpectrum::from_levels(vec![1.0, 1.3, 4.0]);
        let o = observables(&s, 1e-3).unwrap();
        assert!((o.avg_energy - 1.0).abs() < 1e-100);
    }

    #[test]
    fn tail_is_negligible_at_unit_beta() {
        let s = EnergySpectrum {
            levels: vec![0.5],
            tail: Some(crate::spectrum::AnalyticTail {
                boundary_half_width: 90.0,
                first_index: 941,
            }),
            provenance: None,
        };
        let p = partition_sums(&s, 1.0).unwrap();
        assert_eq!(p.tail_terms_used, 0);
        assert_eq!(p.z, 1.0);
    }

    #[test]
    fn tail_cap_is_enforced() {
        let s = EnergySpectrum::free_ring(90.0);
        match partition_sums(&s, 1e-15) {
            Err(Error::TailTooLong { needed, cap, .. }) => assert!(needed > cap),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_ring_cold_and_hot_limits() {
        let o = c_infinity_observables(90.0, 1e-5).unwrap();
        assert!(o.avg_energy < 1e-20);
        let o = c_infinity_observables(90.0, 500.0).unwrap();
        assert!((o.specific_heat - 0.5).abs() < 0.01);
    }

    #[test]
    fn free_ring_matches_explicit_levels() {
        let levels: Vec<f64> = crate::spectrum::tail_energies(90.0, 0).take(5000).collect();
        let explicit = EnergySpectrum::from_levels(levels);
        for t in [0.01, 0.5, 20.0] {
            let a = c_infinity_observables(90.0, t).unwrap();
            let b = observables(&explicit, t).unwrap();
            assert!((a.avg_energy - b.avg_energy).abs() <= 1e-12 * b.avg_energy.abs().max(1e-300));
            assert!((a.specific_heat - b.specific_heat).abs() <= 1e-12 * b.specific_heat);
        }
    }

    #[test]
    fn grid_parsing() {
        let g: TemperatureGrid = "0.1:100:600:log".parse().unwrap();
        assert_eq!(g, TemperatureGrid::default());
        let p = g.points();
        assert_eq!(p.len(), 600);
        assert_eq!((p[0], p[599]), (0.1, 100.0));
        let lin: TemperatureGrid = "1:3:3:lin".parse().unwrap();
        assert_eq!(lin.points(), vec![1.0, 2.0, 3.0]);
        assert!("1:3:0:lin".parse::<TemperatureGrid>().is_err());
        assert!("1:3:5".parse::<TemperatureGrid>().is_err());
        assert!("3:1:5:log".parse::<TemperatureGrid>().is_err());
        assert!("1:3:5:cubic".parse::<TemperatureGrid>().is_err());
    }

    #[test]
    fn build_curve_rejects_bad_grids() {
        let s = EnergySpectrum::from_levels(vec![0.0, 1.0]);
        assert!(build_curve(&s, &[]).is_err());
        assert!(build_curve(&s, &[1.0, 1.0]).is_err());
        assert!(build_curve(&s, &[-1.0, 1.0]).is_err());
        let c = build_curve(&s, &[0.5, 1.0, 2.0]).unwrap();
        assert!(c.invariant_violations().is_empty());
    }

    fn spectrum_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..50.0, 2..40)
    }

    proptest! {
        #[test]
        fn fluctuation_form_matches_derivative(levels in spectrum_strategy(), t in 0.2f64..30.0) {
            let s = EnergySpectrum::from_levels(levels);
            let h = 1e-3 * t;
            let up = observables(&s, t + h).unwrap().avg_energy;
            let dn = observables(&s, t - h).unwrap().avg_energy;
            let fd = (up - dn) / (2.0 * h);
            let ch = observables(&s, t).unwrap().specific_heat;
            prop_assume!(ch > 1e-6);
            prop_assert!((fd - ch).abs() <= 1e-4 * ch, "fd={} ch={}", fd, ch);
        }

        #[test]
        fn entropy_derivative_matches_specific_heat(levels in spectrum_strategy(), t in 0.2f64..30.0) {
            let s = EnergySpectrum::from_levels(levels);
            let h = 1e-3 * t;
            let up = observables(&s, t + h).unwrap().entropy;
            let dn = observables(&s, t - h).unwrap().entropy;
            let lhs = t * (up - dn) / (2.0 * h);
            let ch = observables(&s, t).unwrap().specific_heat;
            prop_assume!(ch > 1e-6);
            prop_assert!((lhs - ch).abs() <= 1e-3 * ch);
        }

        #[test]
        fn cauchy_schwarz_and_positivity(levels in spectrum_strategy(), beta in 0.01f64..50.0) {
            let s = EnergySpectrum::from_levels(levels);
            let p = partition_sums(&s, beta).unwrap();
            prop_assert!(p.z > 0.0);
            prop_assert!(p.e2 * p.z >= p.e1 * p.e1 * (1.0 - 1e-12));
            prop_assert!(p.central2 >= 0.0);
        }

        #[test]
        fn curves_satisfy_invariants(levels in spectrum_strategy()) {
            let s = EnergySpectrum::from_levels(levels);
            let grid = TemperatureGrid::new(0.05, 80.0, 60, GridSpacing::Log).unwrap();
            let c = build_curve(&s, &grid.points()).unwrap();
            prop_assert!(c.invariant_violations().is_empty(), "{:?}", c.invariant_violations());
        }
    }
}
