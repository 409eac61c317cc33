//! Array shape, unit conventions and solver configuration.
//!
//! The array of `N` equal barriers of height `v` occupies `[-L/2, L/2]`. The
//! barriers have total width `a = L/(1+c)` and the `N-1` gaps between them
//! have total width `b = Lc/(1+c)`, so `b = ac` and `a + b = L`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed physical units: `ħ = 1`, `m = 1/2`, Boltzmann constant `1`.
///
/// With these values the free wavenumber is exactly `k = √e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub boltzmann: f64,
}

impl PhysicalConstants {
    pub const UNITS: PhysicalConstants = PhysicalConstants {
        hbar: 1.0,
        mass: 0.5,
        boltzmann: 1.0,
    };

    /// `√(2me)/ħ`, which is `√e` in these units.
    pub fn wavenumber(&self, energy: f64) -> f64 {
        (2.0 * self.mass * energy).sqrt() / self.hbar
    }

    pub fn beta(&self, temperature: f64) -> f64 {
        1.0 / (self.boltzmann * temperature)
    }
}

/// Number of barriers: a finite count (at least 2) or the `N → ∞` limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BarrierCount {
    Finite(u32),
    Infinite,
}

impl BarrierCount {
    pub fn finite(&self) -> Option<u32> {
        match *self {
            BarrierCount::Finite(n) => Some(n),
            BarrierCount::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BarrierCount::Infinite)
    }
}

impl fmt::Display for BarrierCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarrierCount::Finite(n) => write!(f, "{n}"),
            BarrierCount::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for BarrierCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" | "∞" => Ok(BarrierCount::Infinite),
            _ => t
                .parse::<u32>()
                .map(BarrierCount::Finite)
                .map_err(|_| Error::invalid("N", format!("expected an integer or `inf`, got `{s}`"))),
        }
    }
}

// Serialized as a JSON integer for finite counts and the string "inf" otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BarrierCountRepr {
    Count(u32),
    Text(String),
}

impl Serialize for BarrierCount {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            BarrierCount::Finite(n) => BarrierCountRepr::Count(n),
            BarrierCount::Infinite => BarrierCountRepr::Text("inf".into()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BarrierCount {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match BarrierCountRepr::deserialize(deserializer)? {
            BarrierCountRepr::Count(n) => Ok(BarrierCount::Finite(n)),
            BarrierCountRepr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Validated shape of the barrier array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryFields", into = "GeometryFields")]
pub struct BarrierGeometry {
    total_length: f64,
    barriers: BarrierCount,
    spacing_ratio: f64,
    barrier_height: f64,
}

#[derive(Serialize, Deserialize)]
struct GeometryFields {
    #[serde(rename = "L")]
    total_length: f64,
    #[serde(rename = "N")]
    barriers: BarrierCount,
    #[serde(rename = "c")]
    spacing_ratio: f64,
    #[serde(rename = "v")]
    barrier_height: f64,
}

impl TryFrom<GeometryFields> for BarrierGeometry {
    type Error = Error;

    fn try_from(g: GeometryFields) -> Result<Self> {
        BarrierGeometry::new(g.total_length, g.barriers, g.spacing_ratio, g.barrier_height)
    }
}

impl From<BarrierGeometry> for GeometryFields {
    fn from(g: BarrierGeometry) -> Self {
        GeometryFields {
            total_length: g.total_length,
            barriers: g.barriers,
            spacing_ratio: g.spacing_ratio,
            barrier_height: g.barrier_height,
        }
    }
}

impl BarrierGeometry {
    /// Validates and builds a geometry.
    ///
    /// `v = 0` is accepted so the free-particle limit can be exercised; negative
    /// heights (wells) are rejected.
    pub fn new(total_length: f64, barriers: BarrierCount, spacing_ratio: f64, barrier_height: f64) -> Result<Self> {
        if !(total_length.is_finite() && total_length > 0.0) {
            return Err(Error::invalid("L", format!("must be positive, got {total_length}")));
        }
        if !(spacing_ratio.is_finite() && spacing_ratio > 0.0) {
            return Err(Error::invalid("c", format!("must be positive, got {spacing_ratio}")));
        }
        if !(barrier_height.is_finite() && barrier_height >= 0.0) {
            return Err(Error::invalid("v", format!("must be non-negative, got {barrier_height}")));
        }
        if let BarrierCount::Finite(n) = barriers {
            if n < 2 {
                return Err(Error::TooFewBarriers(n));
            }
        }
        Ok(BarrierGeometry {
            total_length,
            barriers,
            spacing_ratio,
            barrier_height,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn barriers(&self) -> BarrierCount {
        self.barriers
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }

    pub fn barrier_height(&self) -> f64 {
        self.barrier_height
    }

    /// Total barrier width `a = L/(1+c)`.
    pub fn barrier_width_total(&self) -> f64 {
        self.total_length / (1.0 + self.spacing_ratio)
    }

    /// Total gap width `b = Lc/(1+c)`.
    pub fn gap_width_total(&self) -> f64 {
        self.total_length * self.spacing_ratio / (1.0 + self.spacing_ratio)
    }

    /// Width of one barrier, `a/N`. `None` for infinite `N`.
    pub fn cell_width(&self) -> Option<f64> {
        self.barriers
            .finite()
            .map(|n| self.barrier_width_total() / f64::from(n))
    }

    /// Width of one gap, `b/(N-1)`. `None` for infinite `N`.
    pub fn gap_width(&self) -> Option<f64> {
        self.barriers
            .finite()
            .map(|n| self.gap_width_total() / f64::from(n - 1))
    }

    pub fn with_barriers(&self, barriers: BarrierCount) -> Result<Self> {
        BarrierGeometry::new(self.total_length, barriers, self.spacing_ratio, self.barrier_height)
    }

    pub fn with_spacing_ratio(&self, c: f64) -> Result<Self> {
        BarrierGeometry::new(self.total_length, self.barriers, c, self.barrier_height)
    }
}

/// Builds a [`BarrierGeometry`]; see [`BarrierGeometry::new`].
pub fn make_geometry(total_length: f64, barriers: BarrierCount, spacing_ratio: f64, barrier_height: f64) -> Result<BarrierGeometry> {
    BarrierGeometry::new(total_length, barriers, spacing_ratio, barrier_height)
}

/// Ratio `C/L` below which the ring is considered too short for the outer
/// free regions to decouple from the array.
pub const MIN_BOUNDARY_RATIO: f64 = 4.5;

/// Ring size, energy window and numerical tolerances for the level finder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumConfig {
    /// Half-circumference `C` of the periodic ring `[-C, C]`.
    #[serde(rename = "C")]
    pub boundary_half_width: f64,
    /// Levels above this energy come from the analytic tail `(πn/C)²`.
    pub e_split: f64,
    /// Lower end of the numerically searched window.
    pub e_min: f64,
    /// Base step of the uniform `k` scan.
    pub k_step: f64,
    /// Roots closer than this in `k` are one level.
    pub dedup_radius: f64,
    /// Bisection stops once the bracket is below `root_rel_tol · k`.
    pub root_rel_tol: f64,
    /// Accepted roots need `|residual| < accept_rel · (median bracket residual)`.
    pub accept_rel: f64,
    /// Absolute floor for the acceptance threshold.
    pub accept_floor: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            boundary_half_width: 90.0,
            e_split: 1080.0,
            e_min: 0.1,
            k_step: 0.004,
            dedup_radius: 1e-6,
            root_rel_tol: 1e-12,
            accept_rel: 1e-8,
            accept_floor: 1e-10,
        }
    }
}

impl SpectrumConfig {
    /// First index of the analytic tail, `n0 = round((C/π)·√e_split)`.
    ///
    /// For `C = 90`, `e_split = 1080` this is 941.
    pub fn split_index(&self) -> u64 {
        (self.boundary_half_width / PI * self.e_split.sqrt()).round() as u64
    }

    /// Largest useful scan step: the free level spacing `π/C` sampled 8 times.
    pub fn max_k_step(&self) -> f64 {
        PI / (8.0 * self.boundary_half_width)
    }

    /// The scan step actually used, `min(k_step, π/(8C))`.
    pub fn effective_k_step(&self) -> f64 {
        self.k_step.min(self.max_k_step())
    }

    /// Checks the configuration against a geometry. Returns non-fatal warnings.
    pub fn validate(&self, geometry: &BarrierGeometry) -> Result<Vec<String>> {
        let c = self.boundary_half_width;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("C", format!("must be positive, got {c}")));
        }
        if c <= geometry.total_length() / 2.0 {
            return Err(Error::invalid(
                "C",
                format!("ring half-width {c} must exceed half the array length {}", geometry.total_length() / 2.0),
            ));
        }
        if !(self.e_min.is_finite() && self.e_min > 0.0) {
            return Err(Error::invalid("e_min", format!("must be positive, got {}", self.e_min)));
        }
        if !(self.e_split.is_finite() && self.e_split > self.e_min) {
            return Err(Error::invalid(
                "e_split",
                format!("must exceed e_min = {}, got {}", self.e_min, self.e_split),
            ));
        }
        for (name, value) in [
            ("k_step", self.k_step),
            ("dedup_radius", self.dedup_radius),
            ("root_rel_tol", self.root_rel_tol),
            ("accept_rel", self.accept_rel),
            ("accept_floor", self.accept_floor),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        let mut warnings = Vec::new();
        let ratio = c / geometry.total_length();
        if ratio < MIN_BOUNDARY_RATIO {
            warnings.push(format!(
                "C/L = {ratio:.3} is below {MIN_BOUNDARY_RATIO}; periodic boundaries sit close to the array"
            ));
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn six_barriers_ratio_three() {
        let g = make_geometry(20.0, BarrierCount::Finite(6), 3.0, 60.0).unwrap();
        assert!(close(g.barrier_width_total(), 5.0));
        assert!(close(g.gap_width_total(), 15.0));
        assert!(close(g.cell_width().unwrap(), 5.0 / 6.0));
        assert!(close(g.gap_width().unwrap(), 3.0));
    }

    #[test]
    fn symmetric_ratio_gives_equal_widths() {
        let g = make_geometry(20.0, BarrierCount::Finite(2), 1.0, 60.0).unwrap();
        assert!(close(g.barrier_width_total(), 10.0));
        assert!(close(g.gap_width_total(), 10.0));
        assert!(close(g.gap_width().unwrap(), 10.0));
    }

    #[test]
    fn rejects_single_barrier() {
        assert!(matches!(
            make_geometry(20.0, BarrierCount::Finite(1), 3.0, 60.0),
            Err(Error::TooFewBarriers(1))
        ));
        assert!(matches!(
            make_geometry(20.0, BarrierCount::Finite(0), 3.0, 60.0),
            Err(Error::TooFewBarriers(0))
        ));
    }

    #[test]
    fn rejects_bad_scalars() {
        let n = BarrierCount::Finite(4);
        assert!(make_geometry(0.0, n, 1.0, 1.0).is_err());
        assert!(make_geometry(-1.0, n, 1.0, 1.0).is_err());
        assert!(make_geometry(20.0, n, 0.0, 1.0).is_err());
        assert!(make_geometry(20.0, n, f64::NAN, 1.0).is_err());
        assert!(make_geometry(20.0, n, 1.0, -1.0).is_err());
        assert!(make_geometry(20.0, n, 1.0, 0.0).is_ok());
    }

    #[test]
    fn infinite_count_has_no_cell_widths() {
        let g = make_geometry(20.0, BarrierCount::Infinite, 3.0, 60.0).unwrap();
        assert!(g.cell_width().is_none());
        assert!(g.gap_width().is_none());
        assert!(close(g.barrier_width_total() + g.gap_width_total(), 20.0));
    }

    #[test]
    fn split_index_matches_reference_ring() {
        let cfg = SpectrumConfig::default();
        assert_eq!(cfg.split_index(), 941);
        assert!(cfg.validate(&make_geometry(20.0, BarrierCount::Finite(6), 3.0, 60.0).unwrap())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn short_ring_warns() {
        let cfg = SpectrumConfig {
            boundary_half_width: 40.0,
            ..Default::default()
        };
        let g = make_geometry(20.0, BarrierCount::Finite(6), 3.0, 60.0).unwrap();
        assert_eq!(cfg.validate(&g).unwrap().len(), 1);
        let tiny = SpectrumConfig {
            boundary_half_width: 9.0,
            ..Default::default()
        };
        assert!(tiny.validate(&g).is_err());
    }

    #[test]
    fn barrier_count_parsing() {
        assert_eq!("inf".parse::<BarrierCount>().unwrap(), BarrierCount::Infinite);
        assert_eq!(" 35 ".parse::<BarrierCount>().unwrap(), BarrierCount::Finite(35));
        assert!("x".parse::<BarrierCount>().is_err());
        let g: BarrierGeometry = serde_json::from_str(r#"{"L":20,"N":"inf","c":200,"v":60}"#).unwrap();
        assert!(g.barriers().is_infinite());
        let back = serde_json::to_string(&g).unwrap();
        assert!(back.contains("\"N\":\"inf\""));
        assert!(serde_json::from_str::<BarrierGeometry>(r#"{"L":20,"N":1,"c":2,"v":60}"#).is_err());
    }

    #[test]
    fn wavenumber_is_sqrt_energy() {
        for e in [0.1, 1.0, 60.0, 1080.0] {
            assert!(close(PhysicalConstants::UNITS.wavenumber(e), e.sqrt()));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn widths_partition_length(l in 0.1f64..1e3, c in 1e-3f64..1e3, n in 2u32..500) {
                let g = make_geometry(l, BarrierCount::Finite(n), c, 1.0).unwrap();
                let sum = g.barrier_width_total() + g.gap_width_total();
                prop_assert!((sum - l).abs() <= 4.0 * f64::EPSILON * l);
                let tiled = g.cell_width().unwrap() * f64::from(n) + g.gap_width().unwrap() * f64::from(n - 1);
                prop_assert!((tiled - l).abs() <= 1e-12 * l);
            }

            #[test]
            fn barrier_width_decreases_with_ratio(l in 0.1f64..1e3, c in 1e-3f64..1e3, dc in 1e-3f64..10.0) {
                let g1 = make_geometry(l, BarrierCount::Infinite, c, 1.0).unwrap();
                let g2 = make_geometry(l, BarrierCount::Infinite, c + dc, 1.0).unwrap();
                prop_assert!(g2.barrier_width_total() < g1.barrier_width_total());
            }
        }
    }
}
