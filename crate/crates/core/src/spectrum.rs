//! Energy levels of the array closed into a ring `[-C, C]`.
//!
//! Periodicity of `ψ` and `ψ'` at `x = ±C` gives the quantization condition
//! `det(e^{2ikC} S(k) - I) = 0`. For the unimodular, time-reversal symmetric
//! transfer matrices produced here, the eigenvalues of `S` are
//! `e^{iθ±}` with
//!
//! ```text
//! θ± = arg Q11 ± atan|Q12|
//! ```
//!
//! so the condition splits into two real equations `Φ±(k) = 2kC + θ±(k) ≡ 0
//! (mod 2π)`. `arg Q11` is evaluated as a continuous function of `k` (see
//! [`phased_scattering`]), so no unwrapping is involved and narrow tunnelling
//! resonances between grid points still register. Both phase functions are
//! sampled on a uniform `k` grid (refined wherever `arg Q11` moves by more
//! than `π/4` between neighbours), every crossing of a multiple of `2π` is
//! bracketed, and each bracket is bisected down to floating-point resolution.
//!
//! Above `e_split` the levels are taken from the free-ring formula
//! `e_n = (πn/C)²`, `n ≥ n0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BarrierGeometry, SpectrumConfig};
use crate::numeric::median;
use crate::transfer::{infinite_cell, phased_scattering, stable_s_matrix, stable_transfer_matrix, InfiniteNCell, WaveParams};

const MAX_SUBDIVISION_DEPTH: u32 = 40;
const MAX_ARG_STEP: f64 = PI / 4.0;
const RESOLUTION_FACTOR: f64 = 4.0;

/// Analytic high-energy levels `e_n = (πn/C)²` for `n ≥ first_index`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTail {
    pub boundary_half_width: f64,
    pub first_index: u64,
}

impl AnalyticTail {
    pub fn energy(&self, n: u64) -> f64 {
        (PI * n as f64 / self.boundary_half_width).powi(2)
    }

    pub fn first_energy(&self) -> f64 {
        self.energy(self.first_index)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (self.first_index..).map(move |n| self.energy(n))
    }
}

/// `(πn/C)²` for `n = n_from, n_from + 1, …`.
pub fn tail_energies(boundary_half_width: f64, n_from: u64) -> impl Iterator<Item = f64> {
    let c = boundary_half_width;
    (n_from..).map(move |n| (PI * n as f64 / c).powi(2))
}

/// Inputs that produced a numerically computed spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub geometry: BarrierGeometry,
    pub config: SpectrumConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySpectrum {
    /// Sorted, deduplicated levels in `[e_min, e_split]`.
    pub levels: Vec<f64>,
    pub tail: Option<AnalyticTail>,
    pub provenance: Option<Provenance>,
}

impl EnergySpectrum {
    /// A spectrum with explicit levels and no analytic tail.
    pub fn from_levels(mut levels: Vec<f64>) -> Self {
        levels.sort_by(|a, b| a.total_cmp(b));
        EnergySpectrum {
            levels,
            tail: None,
            provenance: None,
        }
    }

    /// The `c → ∞` spectrum: every free-ring level `(πn/C)²`, `n ≥ 0`.
    pub fn free_ring(boundary_half_width: f64) -> Self {
        EnergySpectrum {
            levels: Vec::new(),
            tail: Some(AnalyticTail {
                boundary_half_width,
                first_index: 0,
            }),
            provenance: None,
        }
    }

    /// Number of numerical levels strictly below `energy`.
    pub fn count_below(&self, energy: f64) -> usize {
        self.levels.partition_point(|&e| e < energy)
    }

    /// Number of numerical levels in `[lo, hi]`.
    pub fn count_between(&self, lo: f64, hi: f64) -> usize {
        self.levels.iter().filter(|&&e| e >= lo && e <= hi).count()
    }

    /// Lowest level, numerical or analytic.
    pub fn ground_energy(&self) -> Option<f64> {
        let numeric = self.levels.first().copied();
        let tail = self.tail.map(|t| t.first_energy());
        match (numeric, tail) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Bookkeeping from one run of the level finder.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RootFindReport {
    /// Points of the uniform base grid.
    pub grid_points: usize,
    /// Points after adaptive refinement.
    pub refined_points: usize,
    pub candidate_brackets: usize,
    pub refined_roots: usize,
    pub rejected_candidates: usize,
    pub merged_duplicates: usize,
    /// Largest `|det(e^{2ikC}S - I)|` over accepted roots.
    pub max_residual: f64,
    /// Adjacent accepted levels closer than twice the scan step in `k`.
    pub close_pairs: usize,
}

fn transfer_at(geometry: &BarrierGeometry, energy: f64) -> Result<crate::matrix::ComplexMatrix2> {
    let wp = WaveParams::for_geometry(geometry, energy)?;
    stable_transfer_matrix(geometry, &wp)
}

fn singular(energy: f64, e: Error) -> Error {
    match e {
        Error::SingularTransfer { magnitude, .. } => Error::SingularTransfer { energy, magnitude },
        other => other,
    }
}

/// The quantization residual in its expanded trigonometric form,
///
/// ```text
/// cos(4kC)/Q22² - 2cos(2kC)/Q22 + 1 + Q12·Q21·cos(4kC)/Q22²
///   + i(sin(4kC)/Q22² - 2sin(2kC)/Q22 + Q12·Q21·sin(4kC)/Q22²)
/// ```
///
/// with complex `Q`. It vanishes exactly at the allowed levels.
pub fn quantization_residual(geometry: &BarrierGeometry, config: &SpectrumConfig, energy: f64) -> Result<Complex64> {
    let q = transfer_at(geometry, energy)?;
    if !(q.m22.norm() >= crate::transfer::SINGULAR_Q22) {
        return Err(Error::SingularTransfer {
            energy,
            magnitude: q.m22.norm(),
        });
    }
    let k = energy.sqrt();
    let c = config.boundary_half_width;
    let (c2, s2) = ((2.0 * k * c).cos(), (2.0 * k * c).sin());
    let (c4, s4) = ((4.0 * k * c).cos(), (4.0 * k * c).sin());
    let inv = q.m22.inv();
    let inv2 = inv * inv;
    let mix = q.m12 * q.m21 * inv2;
    let re_part = c4 * inv2 - 2.0 * c2 * inv + 1.0 + mix * c4;
    let im_part = s4 * inv2 - 2.0 * s2 * inv + mix * s4;
    Ok(re_part + Complex64::i() * im_part)
}

/// `det(e^{2ikC}·S - I)` computed directly from the scattering matrix.
pub fn quantization_determinant(geometry: &BarrierGeometry, config: &SpectrumConfig, energy: f64) -> Result<Complex64> {
    let wp = WaveParams::for_geometry(geometry, energy)?;
    let s = stable_s_matrix(geometry, &wp).map_err(|e| singular(energy, e))?;
    let k = energy.sqrt();
    let p = Complex64::from_polar(1.0, 2.0 * k * config.boundary_half_width);
    let a = p * s.s11 - 1.0;
    let d = p * s.s22 - 1.0;
    Ok(a * d - p * p * s.s12 * s.s21)
}

/// Closed trigonometric form of `Q22² · det(e^{2ikC}S - I)` for the `N → ∞`
/// matrix, written in terms of `f`, `d`, `φ`, `z`.
pub fn infinite_quantization_closed_form(cell: &InfiniteNCell, k: f64, boundary_half_width: f64) -> Complex64 {
    let c = boundary_half_width;
    let s = cell.sinc_phi;
    let cp = cell.cos_phi;
    let tau = 1.0 + cell.d * cell.d * s * s;
    let diag = cp * cp - cell.f * cell.f * s * s;
    let (z, f) = (cell.z, cell.f);
    let w = 2.0 * k * c + z;
    let re = (4.0 * k * c).cos() * tau + (2.0 * z).cos() * diag + 2.0 * f * s * ((2.0 * z).sin() * cp - w.sin())
        - 2.0 * w.cos() * cp;
    let im = (4.0 * k * c).sin() * tau + (2.0 * z).sin() * diag + 2.0 * f * s * (w.cos() - (2.0 * z).cos() * cp)
        - 2.0 * w.sin() * cp;
    Complex64::new(re, im)
}

/// `Q22² · det(e^{2ikC}S - I)` for an `N → ∞` geometry via the closed form.
pub fn infinite_quantization_residual(geometry: &BarrierGeometry, config: &SpectrumConfig, energy: f64) -> Result<Complex64> {
    let wp = WaveParams::for_geometry(geometry, energy)?;
    let cell = infinite_cell(geometry, &wp)?;
    Ok(infinite_quantization_closed_form(&cell, wp.k, config.boundary_half_width))
}

#[derive(Clone, Copy, Debug)]
struct PhaseSample {
    k: f64,
    /// Continuous `arg Q11` (equal to `arg S11`).
    arg: f64,
    /// `atan|Q12|`.
    mix: f64,
}

fn phase_sample(geometry: &BarrierGeometry, k: f64) -> Result<PhaseSample> {
    let wp = WaveParams::for_geometry(geometry, k * k)?;
    let p = phased_scattering(geometry, &wp)?;
    Ok(PhaseSample {
        k,
        arg: p.arg_t,
        mix: p.s.s12.norm().atan2(p.s.s11.norm()),
    })
}

/// Samples on `(lo, hi]`, subdivided until `arg Q11` moves by at most
/// `MAX_ARG_STEP` between neighbours.
fn refine_interval(geometry: &BarrierGeometry, lo: PhaseSample, hi: PhaseSample, depth: u32, out: &mut Vec<PhaseSample>) -> Result<()> {
    if (hi.arg - lo.arg).abs() <= MAX_ARG_STEP || depth >= MAX_SUBDIVISION_DEPTH {
        out.push(hi);
        return Ok(());
    }
    let mid = phase_sample(geometry, 0.5 * (lo.k + hi.k))?;
    refine_interval(geometry, lo, mid, depth + 1, out)?;
    refine_interval(geometry, mid, hi, depth + 1, out)
}

#[derive(Clone, Copy, Debug)]
struct Bracket {
    lo: f64,
    hi: f64,
    /// Sign in front of `atan|Q12|`.
    branch: f64,
    /// Target multiple of `2π`.
    target: f64,
}

impl Bracket {
    fn phase(&self, geometry: &BarrierGeometry, c: f64, k: f64) -> Result<f64> {
        let s = phase_sample(geometry, k)?;
        Ok(2.0 * k * c + s.arg + self.branch * s.mix - self.target)
    }

    /// Root estimate and the final bracket, shrunk to floating-point resolution.
    fn bisect(&self, geometry: &BarrierGeometry, c: f64) -> Result<(f64, f64, f64)> {
        let (mut lo, mut hi) = (self.lo, self.hi);
        let mut f_lo = self.phase(geometry, c, lo)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.phase(geometry, c, mid)?;
            if f_mid == 0.0 {
                return Ok((mid, lo, hi));
            }
            if (f_mid < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi), lo, hi))
    }
}

/// All levels in `[e_min, e_split]`; see [`find_levels_with_report`].
pub fn find_levels(geometry: &BarrierGeometry, config: &SpectrumConfig) -> Result<EnergySpectrum> {
    find_levels_with_report(geometry, config).map(|(s, _)| s)
}

/// Runs the eigenphase scan and returns the spectrum with its bookkeeping.
pub fn find_levels_with_report(geometry: &BarrierGeometry, config: &SpectrumConfig) -> Result<(EnergySpectrum, RootFindReport)> {
    for warning in config.validate(geometry)? {
        log::warn!("{warning}");
    }
    let c = config.boundary_half_width;
    let k_min = config.e_min.sqrt();
    let k_max = config.e_split.sqrt();
    let step = config.effective_k_step();
    let n_steps = ((k_max - k_min) / step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n_steps)
        .map(|i| if i == n_steps { k_max } else { k_min + i as f64 * step })
        .collect();

    let base: Vec<PhaseSample> = grid
        .par_iter()
        .map(|&k| phase_sample(geometry, k))
        .collect::<Result<_>>()?;

    let pieces: Vec<Vec<PhaseSample>> = base
        .par_windows(2)
        .map(|w| {
            let mut out = Vec::new();
            refine_interval(geometry, w[0], w[1], 0, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(base.len() + pieces.iter().map(Vec::len).sum::<usize>());
    samples.push(base[0]);
    for p in pieces {
        samples.extend(p);
    }

    let mut brackets = Vec::new();
    for branch in [1.0, -1.0] {
        let phase: Vec<f64> = samples.iter().map(|s| 2.0 * s.k * c + s.arg + branch * s.mix).collect();
        for i in 0..samples.len() - 1 {
            let m0 = (phase[i] / (2.0 * PI)).floor();
            let m1 = (phase[i + 1] / (2.0 * PI)).floor();
            if m0 == m1 {
                continue;
            }
            let (from, to) = if m1 > m0 { (m0 + 1.0, m1) } else { (m1 + 1.0, m0) };
            let mut m = from;
            while m <= to {
                brackets.push(Bracket {
                    lo: samples[i].k,
                    hi: samples[i + 1].k,
                    branch,
                    target: 2.0 * PI * m,
                });
                m += 1.0;
            }
        }
    }

    struct Candidate {
        k: f64,
        residual: f64,
        accepted: bool,
    }
    let candidates: Vec<Candidate> = brackets
        .par_iter()
        .map(|b| {
            let (k, lo, hi) = b.bisect(geometry, c)?;
            let det = |kk: f64| quantization_determinant(geometry, config, kk * kk);
            let residual = det(k)?.norm();
            // change of the determinant across the final bracket: the
            // smallest residual resolvable at this k in double precision
            let resolution = (det(hi)? - det(lo)?).norm();
            let probes: Vec<f64> = (0..5)
                .map(|j| {
                    let kk = b.lo + (b.hi - b.lo) * j as f64 / 4.0;
                    det(kk).map(|d| d.norm())
                })
                .collect::<Result<_>>()?;
            let tol = (config.accept_rel * median(&probes)).max(config.accept_floor) + RESOLUTION_FACTOR * resolution;
            Ok(Candidate {
                k,
                residual,
                accepted: residual < tol,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = RootFindReport {
        grid_points: grid.len(),
        refined_points: samples.len(),
        candidate_brackets: brackets.len(),
        ..Default::default()
    };
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for cand in &candidates {
        if cand.accepted {
            roots.push((cand.k, cand.residual));
        } else {
            report.rejected_candidates += 1;
            log::debug!("rejected root candidate k = {} (|residual| = {:e})", cand.k, cand.residual);
        }
    }
    report.refined_roots = roots.len();
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(roots.len());
    for (k, r) in roots {
        match merged.last_mut() {
            Some(last) if k - last.0 < config.dedup_radius => {
                report.merged_duplicates += 1;
                if r < last.1 {
                    *last = (k, r);
                }
            }
            _ => merged.push((k, r)),
        }
    }

    let mut levels = Vec::with_capacity(merged.len());
    for &(k, r) in &merged {
        let e = k * k;
        if e >= config.e_min && e <= config.e_split {
            levels.push(e);
            report.max_residual = report.max_residual.max(r);
        }
    }
    report.close_pairs = merged.windows(2).filter(|w| w[1].0 - w[0].0 < 2.0 * step).count();
    if report.close_pairs > 0 {
        log::debug!(
            "{} adjacent level pairs closer than twice the scan step",
            report.close_pairs
        );
    }

    let spectrum = EnergySpectrum {
        levels,
        tail: Some(AnalyticTail {
            boundary_half_width: c,
            first_index: config.split_index(),
        }),
        provenance: Some(Provenance {
            geometry: *geometry,
            config: *config,
        }),
    };
    Ok((spectrum, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BarrierCount;

    fn geom(n: BarrierCount, c: f64, v: f64) -> BarrierGeometry {
        BarrierGeometry::new(20.0, n, c, v).unwrap()
    }

    #[test]
    fn tail_reference_values() {
        let cfg = SpectrumConfig::default();
        let n0 = cfg.split_index();
        assert_eq!(n0, 941);
        let e: Vec<f64> = tail_energies(90.0, n0).take(2).collect();
        let expect = (PI * 941.0 / 90.0).powi(2);
        assert!((e[0] - expect).abs() < 1e-9);
        assert!((e[0] - 1078.93).abs() < 0.01);
        assert!(e[1] > e[0]);
        assert_eq!(tail_energies(90.0, 0).next(), Some(0.0));
    }

    #[test]
    fn tail_reaches_split_within_one_spacing() {
        let cfg = SpectrumConfig::default();
        let tail = AnalyticTail {
            boundary_half_width: 90.0,
            first_index: cfg.split_index(),
        };
        let spacing = tail.energy(tail.first_index + 1) - tail.first_energy();
        assert!(tail.first_energy() >= cfg.e_split - spacing);
    }

    #[test]
    fn free_residual_vanishes_on_ring_levels() {
        let g = geom(BarrierCount::Finite(6), 3.0, 0.0);
        let cfg = SpectrumConfig::default();
        for n in [1u32, 17, 500] {
            let e = (PI * f64::from(n) / 90.0).powi(2);
            assert!(quantization_residual(&g, &cfg, e).unwrap().norm() < 1e-10, "n={n}");
            let mid = (PI * (f64::from(n) + 0.5) / 90.0).powi(2);
            assert!(quantization_residual(&g, &cfg, mid).unwrap().norm() > 1.0);
        }
    }

    #[test]
    fn residual_forms_agree() {
        let cfg = SpectrumConfig::default();
        let g = geom(BarrierCount::Finite(6), 15.0, 60.0);
        for e in [0.5, 13.7, 59.99, 60.0, 75.0, 400.0, 1079.0] {
            let a = quantization_residual(&g, &cfg, e).unwrap();
            let b = quantization_determinant(&g, &cfg, e).unwrap();
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()), "e={e}: {a} vs {b}");
        }
    }

    #[test]
    fn infinite_closed_form_matches_matrix_form() {
        let cfg = SpectrumConfig::default();
        for c in [0.3, 3.0, 200.0] {
            let g = geom(BarrierCount::Infinite, c, 60.0);
            for e in [0.7, 20.0, 61.0, 150.0, 900.0] {
                let wp = WaveParams::new(e, 60.0).unwrap();
                let q = crate::transfer::transfer_matrix(&g, &wp).unwrap();
                let det = quantization_determinant(&g, &cfg, e).unwrap();
                let closed = infinite_quantization_residual(&g, &cfg, e).unwrap();
                let lhs = q.m22 * q.m22 * det;
                assert!((lhs - closed).norm() < 1e-8 * (1.0 + closed.norm()), "c={c} e={e}");
            }
        }
    }

    #[test]
    fn free_levels_are_exact_and_single() {
        let g = geom(BarrierCount::Finite(6), 3.0, 0.0);
        let cfg = SpectrumConfig {
            e_split: 100.0,
            ..Default::default()
        };
        let (spec, report) = find_levels_with_report(&g, &cfg).unwrap();
        let expected: Vec<f64> = (1..)
            .map(|n| (PI * n as f64 / 90.0).powi(2))
            .skip_while(|&e| e < cfg.e_min)
            .take_while(|&e| e <= cfg.e_split)
            .collect();
        assert_eq!(spec.levels.len(), expected.len());
        for (a, b) in spec.levels.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8 * b);
        }
        assert!(report.merged_duplicates >= expected.len() - 1);
        assert_eq!(report.rejected_candidates, 0);
    }

    #[test]
    fn levels_are_sorted_unique_and_in_window() {
        let g = geom(BarrierCount::Finite(4), 2.0, 60.0);
        let cfg = SpectrumConfig {
            e_split: 200.0,
            ..Default::default()
        };
        let spec = find_levels(&g, &cfg).unwrap();
        assert!(!spec.levels.is_empty());
        for w in spec.levels.windows(2) {
            assert!(w[1].sqrt() - w[0].sqrt() >= cfg.dedup_radius);
        }
        assert!(spec.levels[0] >= cfg.e_min);
        assert!(*spec.levels.last().unwrap() <= cfg.e_split);
        for &e in spec.levels.iter().step_by(17) {
            assert!(crate::oracle::oracle_quantization_check(&g, &cfg, e).unwrap(), "e={e}");
        }
    }

    #[test]
    fn ground_energy_of_free_ring_is_zero() {
        let s = EnergySpectrum::free_ring(90.0);
        assert_eq!(s.ground_energy(), Some(0.0));
        assert_eq!(EnergySpectrum::from_levels(vec![3.0, 1.0]).ground_energy(), Some(1.0));
    }
}
