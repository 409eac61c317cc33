//! Minimal 2×2 complex matrix used for transfer and scattering matrices.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl ComplexMatrix2 {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        ComplexMatrix2 { m11, m12, m21, m22 }
    }

    pub const IDENTITY: ComplexMatrix2 = ComplexMatrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    );

    /// `diag(e^{iθ}, e^{-iθ})`.
    pub fn phase(theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        ComplexMatrix2::new(p, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), p.conj())
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix2) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut result = ComplexMatrix2::IDENTITY;
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                result = result * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        result
    }

    /// Both eigenvalues, from the characteristic polynomial with the principal
    /// square root; the `+` root comes first.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half_tr = self.trace() / 2.0;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        (half_tr + disc, half_tr - disc)
    }

    /// Distance from the time-reversal pattern `m22 = conj(m11)`, `m21 = conj(m12)`,
    /// relative to the matrix scale.
    pub fn conjugate_structure_defect(&self) -> f64 {
        let d = (self.m22 - self.m11.conj())
            .norm()
            .max((self.m21 - self.m12.conj()).norm());
        d / self.max_abs().max(1.0)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, r: ComplexMatrix2) -> ComplexMatrix2 {
        ComplexMatrix2::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }
}
