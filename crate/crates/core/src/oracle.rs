//! Brute-force verifier: scattering amplitudes and quantized levels from direct
//! matching of the piecewise wavefunction at every interface.
//!
//! Nothing here uses transfer matrices. Each region carries its own pair of
//! basis functions with a local reference point, so under-barrier exponentials
//! never exceed 1 inside their region.
//!
//! Intended for tests and cross-checks; it is slow compared with [`crate::transfer`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BarrierGeometry, SpectrumConfig};
use crate::transfer::SMatrix;

/// One piece of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_start: f64,
    pub x_end: f64,
    pub potential: f64,
    /// `√|e - V|` inside the region.
    pub wavenumber: f64,
}

/// The `2N + 1` regions of the array: outer left, barriers interleaved with
/// gaps, outer right. The outer regions extend to `±outer` (use
/// `f64::INFINITY` for the open scattering problem).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDecomposition {
    pub regions: Vec<Region>,
}

impl RegionDecomposition {
    pub fn new(geometry: &BarrierGeometry, energy: f64, outer: f64) -> Result<Self> {
        let n = geometry.barriers().finite().ok_or(Error::RequiresFiniteBarriers)?;
        let w = geometry.cell_width().expect("finite");
        let g = geometry.gap_width().expect("finite");
        let v = geometry.barrier_height();
        let half = geometry.total_length() / 2.0;
        let free_k = energy.sqrt();
        let barrier_k = (energy - v).abs().sqrt();
        let mut regions = Vec::with_capacity(2 * n as usize + 1);
        regions.push(Region {
            x_start: -outer,
            x_end: -half,
            potential: 0.0,
            wavenumber: free_k,
        });
        let mut x = -half;
        for j in 0..n {
            let end = if j + 1 == n { half } else { x + w };
            regions.push(Region {
                x_start: x,
                x_end: end,
                potential: v,
                wavenumber: barrier_k,
            });
            x = end;
            if j + 1 < n {
                regions.push(Region {
                    x_start: x,
                    x_end: x + g,
                    potential: 0.0,
                    wavenumber: free_k,
                });
                x += g;
            }
        }
        regions.push(Region {
            x_start: half,
            x_end: outer,
            potential: 0.0,
            wavenumber: free_k,
        });
        Ok(RegionDecomposition { regions })
    }
}

#[derive(Clone, Copy, Debug)]
enum Basis {
    /// `e^{±ik(x - x_ref)}`.
    Oscillating { k: f64, x_ref: f64 },
    /// `e^{κ(x - x_right)}` and `e^{-κ(x - x_left)}`.
    Evanescent { kappa: f64, x_left: f64, x_right: f64 },
    /// `1` and `x - x_ref`, for `e = V`.
    Linear { x_ref: f64 },
}

impl Basis {
    fn for_region(region: &Region, energy: f64, x_ref: f64) -> Basis {
        let width = region.x_end - region.x_start;
        let span = if width.is_finite() { width } else { 1.0 };
        if region.wavenumber * span < 1e-7 {
            Basis::Linear { x_ref }
        } else if energy > region.potential {
            Basis::Oscillating {
                k: region.wavenumber,
                x_ref,
            }
        } else {
            Basis::Evanescent {
                kappa: region.wavenumber,
                x_left: region.x_start,
                x_right: region.x_end,
            }
        }
    }

    /// `[(u1, u1'), (u2, u2')]` at `x`.
    fn eval(&self, x: f64) -> [(Complex64, Complex64); 2] {
        let i = Complex64::i();
        match *self {
            Basis::Oscillating { k, x_ref } => {
                let p = Complex64::from_polar(1.0, k * (x - x_ref));
                [(p, i * k * p), (p.conj(), -i * k * p.conj())]
            }
            Basis::Evanescent { kappa, x_left, x_right } => {
                let up = (kappa * (x - x_right)).exp();
                let down = (-kappa * (x - x_left)).exp();
                [
                    (Complex64::new(up, 0.0), Complex64::new(kappa * up, 0.0)),
                    (Complex64::new(down, 0.0), Complex64::new(-kappa * down, 0.0)),
                ]
            }
            Basis::Linear { x_ref } => [
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
                (Complex64::new(x - x_ref, 0.0), Complex64::new(1.0, 0.0)),
            ],
        }
    }
}

/// Dense-storage linear system solved by Gaussian elimination with partial
/// pivoting restricted to a band of `lower` sub- and `upper` super-diagonals.
struct BandedSystem {
    n: usize,
    lower: usize,
    upper: usize,
    a: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl BandedSystem {
    fn new(n: usize, lower: usize, upper: usize) -> Self {
        BandedSystem {
            n,
            lower,
            upper,
            a: vec![Complex64::new(0.0, 0.0); n * n],
            rhs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn at(&mut self, r: usize, c: usize) -> &mut Complex64 {
        debug_assert!(c + self.lower >= r && c <= r + self.upper, "({r},{c}) outside band");
        &mut self.a[r * self.n + c]
    }

    fn solve(mut self) -> Result<Vec<Complex64>> {
        let n = self.n;
        // Row swaps can push the upper band out to lower + upper.
        let width = self.lower + self.upper;
        for col in 0..n {
            let last = (col + self.lower).min(n - 1);
            let (mut piv, mut best) = (col, 0.0);
            for r in col..=last {
                let m = self.a[r * n + col].norm();
                if m > best {
                    best = m;
                    piv = r;
                }
            }
            if !(best > 1e-300) {
                return Err(Error::SingularSystem(best));
            }
            let hi = (col + width).min(n - 1);
            if piv != col {
                for c in col..=hi {
                    self.a.swap(piv * n + c, col * n + c);
                }
                self.rhs.swap(piv, col);
            }
            let p = self.a[col * n + col];
            for r in col + 1..=last {
                let factor = self.a[r * n + col] / p;
                if factor.norm() == 0.0 {
                    continue;
                }
                for c in col..=hi {
                    let v = self.a[col * n + c];
                    self.a[r * n + c] -= factor * v;
                }
                let v = self.rhs[col];
                self.rhs[r] -= factor * v;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for r in (0..n).rev() {
            let hi = (r + width).min(n - 1);
            let mut acc = self.rhs[r];
            for c in r + 1..=hi {
                acc -= self.a[r * n + c] * x[c];
            }
            x[r] = acc / self.a[r * n + r];
        }
        Ok(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Incidence {
    Left,
    Right,
}

/// Solves the open scattering problem. Returns `(forward outgoing, backward
/// outgoing)`: for left incidence `(t, r)`, for right incidence `(S12, S22)`.
fn scatter(geometry: &BarrierGeometry, energy: f64, incidence: Incidence) -> Result<(Complex64, Complex64)> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::invalid("e", format!("energy must be positive, got {energy}")));
    }
    let decomposition = RegionDecomposition::new(geometry, energy, f64::INFINITY)?;
    let regions = &decomposition.regions;
    let m = regions.len();
    let n_unknowns = 2 * (m - 1);
    let k = energy.sqrt();
    let scale = k.max((energy - geometry.barrier_height()).abs().sqrt()).max(1e-12);

    // Unknowns: [left outgoing, (c1, c2) per inner region, right outgoing].
    let bases: Vec<Basis> = regions
        .iter()
        .enumerate()
        .map(|(j, r)| {
            if j == 0 || j == m - 1 {
                Basis::Oscillating { k, x_ref: 0.0 }
            } else {
                Basis::for_region(r, energy, r.x_start)
            }
        })
        .collect();

    let mut sys = BandedSystem::new(n_unknowns, 2, 2);
    for j in 0..m - 1 {
        let x = regions[j].x_end;
        let left = bases[j].eval(x);
        let right = bases[j + 1].eval(x);
        let rows = [2 * j, 2 * j + 1];
        // Left side of the interface.
        if j == 0 {
            // Left region: incoming e^{ikx} (left incidence) plus outgoing e^{-ikx}.
            for (row, comp) in rows.iter().zip(0..2) {
                let val = |p: (Complex64, Complex64)| if comp == 0 { p.0 } else { p.1 / scale };
                *sys.at(*row, 0) += val(left[1]);
                if incidence == Incidence::Left {
                    sys.rhs[*row] -= val(left[0]);
                }
            }
        } else {
            for (row, comp) in rows.iter().zip(0..2) {
                for (b, p) in left.iter().enumerate() {
                    let v = if comp == 0 { p.0 } else { p.1 / scale };
                    *sys.at(*row, 2 * j - 1 + b) += v;
                }
            }
        }
        // Right side, subtracted.
        if j + 1 == m - 1 {
            for (row, comp) in rows.iter().zip(0..2) {
                let val = |p: (Complex64, Complex64)| if comp == 0 { p.0 } else { p.1 / scale };
                *sys.at(*row, n_unknowns - 1) -= val(right[0]);
                if incidence == Incidence::Right {
                    sys.rhs[*row] += val(right[1]);
                }
            }
        } else {
            for (row, comp) in rows.iter().zip(0..2) {
                for (b, p) in right.iter().enumerate() {
                    let v = if comp == 0 { p.0 } else { p.1 / scale };
                    *sys.at(*row, 2 * j + 1 + b) -= v;
                }
            }
        }
    }
    let x = sys.solve()?;
    Ok((x[n_unknowns - 1], x[0]))
}

/// Transmission and reflection amplitudes `(t, r)` for a unit wave `e^{ikx}`
/// incident from the left, with `x` measured from the array centre.
pub fn direct_scattering(geometry: &BarrierGeometry, energy: f64) -> Result<(Complex64, Complex64)> {
    scatter(geometry, energy, Incidence::Left)
}

/// Full scattering matrix from both incidence directions.
pub fn direct_s_matrix(geometry: &BarrierGeometry, energy: f64) -> Result<SMatrix> {
    let (s11, s21) = scatter(geometry, energy, Incidence::Left)?;
    let (s12, s22) = scatter(geometry, energy, Incidence::Right)?;
    Ok(SMatrix { s11, s12, s21, s22 })
}

/// Extreme singular values of the homogeneous periodic problem on `[-C, C]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSpectrumProbe {
    pub smallest: f64,
    pub largest: f64,
}

impl PeriodicSpectrumProbe {
    pub fn relative(&self) -> f64 {
        self.smallest / self.largest
    }
}

/// Default threshold on `σ_min / σ_max` for calling the periodic system singular.
pub const PERIODIC_SINGULAR_TOL: f64 = 1e-7;

/// Builds the matching conditions for the ring `[-C, C]` with `ψ(-C) = ψ(C)`
/// and `ψ'(-C) = ψ'(C)` and returns its extreme singular values.
pub fn periodic_probe(geometry: &BarrierGeometry, config: &SpectrumConfig, energy: f64) -> Result<PeriodicSpectrumProbe> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::invalid("e", format!("energy must be positive, got {energy}")));
    }
    let c = config.boundary_half_width;
    let decomposition = RegionDecomposition::new(geometry, energy, c)?;
    let regions = &decomposition.regions;
    let m = regions.len();
    let n = 2 * m;
    let scale = energy
        .sqrt()
        .max((energy - geometry.barrier_height()).abs().sqrt())
        .max(1e-12);
    let bases: Vec<Basis> = regions
        .iter()
        .map(|r| Basis::for_region(r, energy, r.x_start))
        .collect();

    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    let mut put = |row: usize, region: usize, vals: [(Complex64, Complex64); 2], sign: f64| {
        for (b, p) in vals.iter().enumerate() {
            mat[(row, 2 * region + b)] += sign * p.0;
            mat[(row + 1, 2 * region + b)] += sign * p.1 / scale;
        }
    };
    for j in 0..m - 1 {
        let x = regions[j].x_end;
        put(2 * j, j, bases[j].eval(x), 1.0);
        put(2 * j, j + 1, bases[j + 1].eval(x), -1.0);
    }
    let row = 2 * (m - 1);
    put(row, 0, bases[0].eval(-c), 1.0);
    put(row, m - 1, bases[m - 1].eval(c), -1.0);

    let sv = mat.singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PeriodicSpectrumProbe { smallest, largest })
}

/// Whether `energy` is a level of the periodic ring, judged by the relative
/// smallest singular value of the direct matching system.
pub fn oracle_quantization_check(geometry: &BarrierGeometry, config: &SpectrumConfig, energy: f64) -> Result<bool> {
    Ok(periodic_probe(geometry, config, energy)?.relative() < PERIODIC_SINGULAR_TOL)
}
