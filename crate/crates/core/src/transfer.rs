//! Transfer matrices of the barrier array.
//!
//! Amplitudes `(A, B)` are the coefficients of `e^{ikx}` and `e^{-ikx}` with
//! `x` measured from the array centre, so the free line has `Q = I`.
//!
//! The single-barrier matrix is written with the free propagation across the
//! barrier removed:
//!
//! ```text
//! T11 = cos(qw) + i(ξ/2) sin(qw)     T12 =  i(η/2) sin(qw)
//! T21 = -i(η/2) sin(qw)              T22 = cos(qw) - i(ξ/2) sin(qw)
//! ```
//!
//! with `w = a/N`, `q = √(e-v)`, `ξ = q/k + k/q`, `η = q/k - k/q`. Every entry
//! is an entire function of `q² = e - v`, so one evaluation covers `e > v`
//! (trigonometric), `e < v` (hyperbolic) and the removable point `e = v`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BarrierCount, BarrierGeometry, PhysicalConstants};
use crate::matrix::ComplexMatrix2;
use crate::numeric::cos_sinc;

/// Relative half-width of the band around `e = v` reported as [`Regime::AtBarrier`].
pub const AT_BARRIER_REL: f64 = 1e-8;

/// Minimum `|Q22|` accepted by [`s_matrix`].
pub const SINGULAR_Q22: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Above,
    Below,
    AtBarrier,
}

/// Per-energy wave quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveParams {
    pub energy: f64,
    pub k: f64,
    /// `√|e - v|`.
    pub q: f64,
    /// Signed `e - v`.
    pub q_squared: f64,
    pub regime: Regime,
}

impl WaveParams {
    pub fn new(energy: f64, barrier_height: f64) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::invalid("e", format!("energy must be positive, got {energy}")));
        }
        let q_squared = energy - barrier_height;
        let regime = if q_squared.abs() < AT_BARRIER_REL * barrier_height {
            Regime::AtBarrier
        } else if q_squared > 0.0 {
            Regime::Above
        } else {
            Regime::Below
        };
        Ok(WaveParams {
            energy,
            k: PhysicalConstants::UNITS.wavenumber(energy),
            q: q_squared.abs().sqrt(),
            q_squared,
            regime,
        })
    }

    pub fn for_geometry(geometry: &BarrierGeometry, energy: f64) -> Result<Self> {
        WaveParams::new(energy, geometry.barrier_height())
    }

    /// `ξ = q/k + k/q`, defined above the barrier.
    pub fn xi(&self) -> Option<f64> {
        (self.regime == Regime::Above).then(|| self.q / self.k + self.k / self.q)
    }

    /// `η = q/k - k/q`, defined above the barrier.
    pub fn eta(&self) -> Option<f64> {
        (self.regime == Regime::Above).then(|| self.q / self.k - self.k / self.q)
    }

    /// `ξ̀ = q/(ik) + ik/q = -iη`, defined below the barrier.
    pub fn xi_bar(&self) -> Option<Complex64> {
        (self.regime == Regime::Below).then(|| Complex64::new(0.0, self.k / self.q - self.q / self.k))
    }

    /// `ὴ = q/(ik) - ik/q = -iξ`, defined below the barrier.
    pub fn eta_bar(&self) -> Option<Complex64> {
        (self.regime == Regime::Below).then(|| Complex64::new(0.0, -(self.q / self.k + self.k / self.q)))
    }
}

/// Transfer matrix of one barrier of width `w` with free propagation removed.
pub(crate) fn barrier_matrix(wp: &WaveParams, width: f64) -> ComplexMatrix2 {
    let (cq, sq) = cos_sinc(wp.q_squared, width);
    // q·ξ·sin(qw)/2 and q·η·sin(qw)/2, written without dividing by q.
    let xi_part = 0.5 * (wp.q_squared * sq / wp.k + wp.k * sq);
    let eta_part = 0.5 * (wp.q_squared * sq / wp.k - wp.k * sq);
    let t11 = Complex64::new(cq, xi_part);
    let t12 = Complex64::new(0.0, eta_part);
    ComplexMatrix2::new(t11, t12, t12.conj(), t11.conj())
}

/// Transfer matrix `T` of a single barrier of the array (width `a/N`).
pub fn cell_matrix(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<ComplexMatrix2> {
    let width = geometry.cell_width().ok_or(Error::RequiresFiniteBarriers)?;
    Ok(barrier_matrix(wp, width))
}

/// Transfer matrix of the whole finite array,
/// `Q = D(-L/2) · T · (D(g) · T)^{N-1} · D(-L/2)` with `D(s) = diag(e^{iks}, e^{-iks})`
/// and gap `g = b/(N-1)`.
pub fn total_transfer_matrix(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<ComplexMatrix2> {
    let n = geometry.barriers().finite().ok_or(Error::RequiresFiniteBarriers)?;
    let t = cell_matrix(geometry, wp)?;
    let gap = geometry.gap_width().expect("finite geometry has a gap width");
    let edge = ComplexMatrix2::phase(-wp.k * geometry.total_length() / 2.0);
    let period = ComplexMatrix2::phase(wp.k * gap) * t;
    Ok(edge * t * period.pow(u64::from(n) - 1) * edge)
}

/// Transfer matrix for either barrier count: the finite product or the closed
/// `N → ∞` form.
pub fn transfer_matrix(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<ComplexMatrix2> {
    match geometry.barriers() {
        BarrierCount::Finite(_) => total_transfer_matrix(geometry, wp),
        BarrierCount::Infinite => Ok(infinite_transfer_matrix(&infinite_cell(geometry, wp)?)),
    }
}

/// Scattering matrix: `(A_out, B_in-side) = S · (A_in, B_out-side)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SMatrix {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

impl SMatrix {
    pub fn as_matrix(&self) -> ComplexMatrix2 {
        ComplexMatrix2::new(self.s11, self.s12, self.s21, self.s22)
    }

    /// `|S11|²`.
    pub fn transmission(&self) -> f64 {
        self.s11.norm_sqr()
    }

    /// `|S21|²`.
    pub fn reflection(&self) -> f64 {
        self.s21.norm_sqr()
    }
}

/// `S11 = S22 = 1/Q22`, `S12 = Q12/Q22`, `S21 = -Q21/Q22`.
pub fn s_matrix(q: &ComplexMatrix2) -> Result<SMatrix> {
    let mag = q.m22.norm();
    if !(mag >= SINGULAR_Q22) {
        return Err(Error::SingularTransfer {
            energy: f64::NAN,
            magnitude: mag,
        });
    }
    let inv = q.m22.inv();
    Ok(SMatrix {
        s11: inv,
        s12: q.m12 * inv,
        s21: -q.m21 * inv,
        s22: inv,
    })
}

impl SMatrix {
    pub const IDENTITY: SMatrix = SMatrix {
        s11: Complex64::new(1.0, 0.0),
        s12: Complex64::new(0.0, 0.0),
        s21: Complex64::new(0.0, 0.0),
        s22: Complex64::new(1.0, 0.0),
    };

    /// Scattering matrix of the product `Q_self · Q_other` of two unimodular
    /// transfer matrices, formed without the transfer matrices themselves.
    pub fn compose(&self, other: &SMatrix) -> SMatrix {
        let (ta, ra, rpa) = (self.s11, self.s21, self.s12);
        let (tb, rb, rpb) = (other.s11, other.s21, other.s12);
        let denom = 1.0 - ra * rpb;
        let t = ta * tb / denom;
        SMatrix {
            s11: t,
            s12: rpa + ta * ta * rpb / denom,
            s21: rb + tb * tb * ra / denom,
            s22: t,
        }
    }

    /// `self` composed with itself `n` times.
    pub fn pow(&self, mut n: u64) -> SMatrix {
        let mut result = SMatrix::IDENTITY;
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    /// The unimodular transfer matrix with this scattering matrix.
    pub fn transfer(&self) -> ComplexMatrix2 {
        let t = self.s11;
        let q22 = t.inv();
        let q11 = (t * self.s22 - self.s12 * self.s21) / t;
        ComplexMatrix2::new(q11, self.s12 * q22, -self.s21 * q22, q22)
    }
}

/// A scattering matrix together with a continuous determination of
/// `arg S11`, valid without sampling or unwrapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasedScattering {
    pub s: SMatrix,
    pub arg_t: f64,
}

impl PhasedScattering {
    pub const IDENTITY: PhasedScattering = PhasedScattering {
        s: SMatrix::IDENTITY,
        arg_t: 0.0,
    };

    /// Free propagation `D(s)`: `t = e^{iks}`.
    fn propagation(k: f64, length: f64) -> Self {
        let p = Complex64::from_polar(1.0, k * length);
        PhasedScattering {
            s: SMatrix {
                s11: p,
                s12: Complex64::new(0.0, 0.0),
                s21: Complex64::new(0.0, 0.0),
                s22: p,
            },
            arg_t: k * length,
        }
    }

    fn barrier(wp: &WaveParams, width: f64) -> Self {
        let m = barrier_matrix(wp, width);
        let s = s_matrix(&m).expect("|T22| >= 1 for a single barrier");
        // T11 e^{-ix} has positive real part, so its principal argument is
        // continuous in k.
        let x = if wp.q_squared > 0.0 { wp.q_squared.sqrt() * width } else { 0.0 };
        let arg_t = x + (m.m11 * Complex64::from_polar(1.0, -x)).arg();
        PhasedScattering { s, arg_t }
    }

    pub fn compose(&self, other: &PhasedScattering) -> PhasedScattering {
        // |r_A r'_B| < 1 keeps the denominator in the right half-plane.
        let denom = 1.0 - self.s.s21 * other.s.s12;
        PhasedScattering {
            s: self.s.compose(&other.s),
            arg_t: self.arg_t + other.arg_t - denom.arg(),
        }
    }

    pub fn pow(&self, mut n: u64) -> PhasedScattering {
        let mut result = PhasedScattering::IDENTITY;
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        result
    }
}

/// Continuous `arg Q11` of the `N → ∞` matrix.
fn infinite_arg_q11(cell: &InfiniteNCell) -> f64 {
    let w = Complex64::new(cell.cos_phi, cell.f * cell.sinc_phi);
    let x = if cell.phi_squared > 0.0 {
        cell.f.signum() * cell.phi_squared.sqrt()
    } else {
        0.0
    };
    -cell.z + x + (w * Complex64::from_polar(1.0, -x)).arg()
}

/// Scattering matrix of the array with a continuous transmission phase.
///
/// The finite array is accumulated barrier by barrier through
/// [`SMatrix::compose`]; this agrees with `s_matrix(transfer_matrix(..))`
/// where the latter is well conditioned and stays accurate deep below the
/// barrier top, where the transfer-matrix product loses all significant
/// digits.
pub fn phased_scattering(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<PhasedScattering> {
    match geometry.barriers() {
        BarrierCount::Finite(n) => {
            let width = geometry.cell_width().expect("finite geometry has a cell width");
            let gap = geometry.gap_width().expect("finite geometry has a gap width");
            let t = PhasedScattering::barrier(wp, width);
            let edge = PhasedScattering::propagation(wp.k, -geometry.total_length() / 2.0);
            let period = PhasedScattering::propagation(wp.k, gap).compose(&t);
            Ok(edge.compose(&t).compose(&period.pow(u64::from(n) - 1)).compose(&edge))
        }
        BarrierCount::Infinite => {
            let cell = infinite_cell(geometry, wp)?;
            Ok(PhasedScattering {
                s: s_matrix(&infinite_transfer_matrix(&cell))?,
                arg_t: infinite_arg_q11(&cell),
            })
        }
    }
}

/// [`phased_scattering`] without the phase.
pub fn stable_s_matrix(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<SMatrix> {
    Ok(phased_scattering(geometry, wp)?.s)
}

/// `Q` rebuilt from [`stable_s_matrix`].
pub fn stable_transfer_matrix(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<ComplexMatrix2> {
    Ok(stable_s_matrix(geometry, wp)?.transfer())
}

/// Ingredients of the closed-form `N → ∞` transfer matrix.
///
/// `φ² = f² - d²` may be negative; `cos φ` and `sin φ / φ` are then the
/// hyperbolic forms, and `phi` is stored as a complex number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfiniteNCell {
    pub regime: Regime,
    /// `f = kb + aqξ/2`.
    pub f: f64,
    /// `d = aqη/2`.
    pub d: f64,
    pub phi_squared: f64,
    pub phi: Complex64,
    pub cos_phi: f64,
    /// `sin φ / φ`.
    pub sinc_phi: f64,
    /// Below-barrier rendering of `f`, `d`, `φ` (`None` above the barrier).
    pub f_bar: Option<f64>,
    pub d_bar: Option<f64>,
    pub phi_bar: Option<Complex64>,
    /// `z = k(a+b)`.
    pub z: f64,
    /// `τ = 1 + d² sin²φ/φ²`.
    pub tau: f64,
    /// Angle of `cos φ + i f sin φ/φ`.
    pub kappa_phase: f64,
}

/// Builds the `N → ∞` cell quantities.
///
/// `f` and `d` are evaluated as `kb + a(q² + k²)/(2k)` and `a(q² - k²)/(2k)`,
/// which are real on both sides of the barrier top. Below the barrier the
/// barred set is `f̀ = f`, `d̀ = -d`, `φ̀ = φ`, which makes the below-barrier
/// matrix form reproduce the continuation of the above-barrier one.
pub fn infinite_cell(geometry: &BarrierGeometry, wp: &WaveParams) -> Result<InfiniteNCell> {
    if !geometry.barriers().is_infinite() {
        return Err(Error::RequiresInfiniteBarriers);
    }
    let a = geometry.barrier_width_total();
    let b = geometry.gap_width_total();
    let k = wp.k;
    let f = k * b + a * (wp.q_squared + k * k) / (2.0 * k);
    let d = a * (wp.q_squared - k * k) / (2.0 * k);
    let phi_squared = f * f - d * d;
    let (cos_phi, sinc_phi) = cos_sinc(phi_squared, 1.0);
    let phi = if phi_squared >= 0.0 {
        Complex64::new(phi_squared.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-phi_squared).sqrt())
    };
    let below = wp.regime == Regime::Below;
    Ok(InfiniteNCell {
        regime: wp.regime,
        f,
        d,
        phi_squared,
        phi,
        cos_phi,
        sinc_phi,
        f_bar: below.then_some(f),
        d_bar: below.then_some(-d),
        phi_bar: below.then_some(phi),
        z: k * geometry.total_length(),
        tau: 1.0 + d * d * sinc_phi * sinc_phi,
        kappa_phase: (f * sinc_phi).atan2(cos_phi),
    })
}

/// Closed-form `N → ∞` transfer matrix:
///
/// ```text
/// Q11 = e^{-iz}(cos φ + i f sinφ/φ)    Q12 =  i e^{-iz} d sinφ/φ
/// Q21 = -i e^{iz} d sinφ/φ             Q22 = e^{iz}(cos φ - i f sinφ/φ)
/// ```
///
/// This is `diag(e^{-iz}, e^{iz}) · exp(i[[f, d], [-d, -f]])`. The outer phase
/// sits on the left, i.e. the array is referenced to its left edge, not its
/// centre as in [`total_transfer_matrix`]; the two frames differ only by a
/// translation, which leaves transmission and the quantized levels unchanged.
pub fn infinite_transfer_matrix(cell: &InfiniteNCell) -> ComplexMatrix2 {
    let left = Complex64::from_polar(1.0, -cell.z);
    let s = cell.sinc_phi;
    let core11 = Complex64::new(cell.cos_phi, cell.f * s);
    let off = Complex64::new(0.0, cell.d * s);
    ComplexMatrix2::new(left * core11, left * off, left.conj() * -off, left.conj() * core11.conj())
}

/// Eigenvalues of the `N → ∞` transfer matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// Half-trace `x = √τ · cos(z - κ)`; eigenvalues are `x ± √(x² - 1)`.
    pub half_trace: f64,
    /// `|x² - 1|` is below [`BRANCH_POINT_TOL`]; the two roots coalesce.
    pub near_branch_point: bool,
}

pub const BRANCH_POINT_TOL: f64 = 1e-8;

/// `λ = x ± √(x² - 1)` with `x = √τ cos(z - κ)` and the principal square root.
///
/// The product is exactly 1; `|x| < 1` gives a unimodular pair and `|x| = 1` is
/// the branch point where the pair coalesces.
pub fn infinite_eigenvalues(cell: &InfiniteNCell) -> EigenPair {
    eigenpair_from_half_trace(cell.tau.sqrt() * (cell.z - cell.kappa_phase).cos())
}

pub(crate) fn eigenpair_from_half_trace(x: f64) -> EigenPair {
    let disc = Complex64::new(x * x - 1.0, 0.0).sqrt();
    let xc = Complex64::new(x, 0.0);
    // outside [-1, 1] the smaller root is formed as the reciprocal of the
    // larger one to avoid cancellation
    let (lambda1, lambda2) = if x > 1.0 {
        let big = xc + disc;
        (big, big.inv())
    } else if x < -1.0 {
        let big = xc - disc;
        (big.inv(), big)
    } else {
        (xc + disc, xc - disc)
    };
    EigenPair {
        lambda1,
        lambda2,
        half_trace: x,
        near_branch_point: (x * x - 1.0).abs() < BRANCH_POINT_TOL,
    }
}

/// Finite-`N` approximation to the `N → ∞` matrix, in the same left-edge frame:
/// `D(-L) · D(b/2N) · (T_N · D(b/N))^N · D(-b/2N)`, where `T_N` has width `a/N`.
///
/// Each factor `D(b/2N) T_N D(b/2N)` is a barrier centred in its own cell, so the
/// product converges to [`infinite_transfer_matrix`] at rate `O(1/N²)`.
pub fn finite_n_limit_matrix(geometry: &BarrierGeometry, wp: &WaveParams, n: u64) -> ComplexMatrix2 {
    let a = geometry.barrier_width_total();
    let b = geometry.gap_width_total();
    let nf = n as f64;
    let t = barrier_matrix(wp, a / nf);
    let step = t * ComplexMatrix2::phase(wp.k * b / nf);
    ComplexMatrix2::phase(-wp.k * geometry.total_length())
        * ComplexMatrix2::phase(wp.k * b / (2.0 * nf))
        * step.pow(n)
        * ComplexMatrix2::phase(-wp.k * b / (2.0 * nf))
}

/// The literal left-to-right limit product `D(-L) · (D(b/N) · T_N)^N`, which
/// converges only at rate `O(1/N)`.
pub fn finite_n_limit_matrix_unsymmetrized(geometry: &BarrierGeometry, wp: &WaveParams, n: u64) -> ComplexMatrix2 {
    let a = geometry.barrier_width_total();
    let b = geometry.gap_width_total();
    let nf = n as f64;
    let t = barrier_matrix(wp, a / nf);
    ComplexMatrix2::phase(-wp.k * geometry.total_length()) * (ComplexMatrix2::phase(wp.k * b / nf) * t).pow(n)
}
