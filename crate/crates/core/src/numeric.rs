//! Small numerical helpers shared by the physics modules.

#[cfg(test)]
use std::f64::consts::PI;

/// `(cos(√s·w), sin(√s·w)/√s)` as entire functions of `s`.
///
/// For `s < 0` this is `(cosh(√|s|·w), sinh(√|s|·w)/√|s|)`. Near `s = 0` the
/// Taylor series is used so the removable singularity never produces `0/0`.
pub(crate) fn cos_sinc(s: f64, w: f64) -> (f64, f64) {
    let x = s * w * w;
    if x.abs() < 1e-4 {
        let c = 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0;
        let sn = w * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0);
        (c, sn)
    } else if s > 0.0 {
        let q = s.sqrt();
        ((q * w).cos(), (q * w).sin() / q)
    } else {
        let q = (-s).sqrt();
        ((q * w).cosh(), (q * w).sinh() / q)
    }
}

/// Wrap an angle into `(-π, π]`.
#[cfg(test)]
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Median of a slice (copied and sorted); `NaN` for empty input.
pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_sinc_is_continuous_through_zero() {
        let w = 0.8;
        for s in [-1e-3, -1e-6, -1e-9, 0.0, 1e-9, 1e-6, 1e-3] {
            let (c, sn) = cos_sinc(s, w);
            let (c_ref, s_ref) = if s > 0.0 {
                let q: f64 = s.sqrt();
                ((q * w).cos(), if q > 0.0 { (q * w).sin() / q } else { w })
            } else if s < 0.0 {
                let q: f64 = (-s).sqrt();
                ((q * w).cosh(), (q * w).sinh() / q)
            } else {
                (1.0, w)
            };
            assert!((c - c_ref).abs() < 1e-12, "s={s}");
            assert!((sn - s_ref).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn wrap_angle_range() {
        for x in [-10.0, -PI, 0.0, PI, 3.5, 100.0] {
            let y = wrap_angle(x);
            assert!(y > -PI - 1e-15 && y <= PI + 1e-15);
            assert!(((x - y) / (2.0 * PI) - ((x - y) / (2.0 * PI)).round()).abs() < 1e-9);
        }
    }
}
