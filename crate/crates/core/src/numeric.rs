//! Small numeric helpers shared by the lattice-sum modules.

/// Neumaier (improved Kahan) compensated accumulator.
///
/// Lattice sums alternate in sign and span many orders of magnitude, so
/// every series in this crate goes through this type.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Error function, from `libm` (FreeBSD msun port, under 1 ulp).
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function, from `libm`.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `½[erf(b) − erf(a)]` for `a ≤ b`, switching to `erfc` in the tails so
/// that far-away intervals keep full relative precision.
#[inline]
pub fn half_erf_difference(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (erfc(a) - erfc(b))
    } else if b <= 0.0 {
        0.5 * (erfc(-b) - erfc(-a))
    } else {
        0.5 * (erf(b) - erf(a))
    }
}

/// Probability mass of `N(mu, sigma²)` on `[lo, hi]`.
#[inline]
pub fn gaussian_interval_mass(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * sigma;
    half_erf_difference((lo - mu) / s, (hi - mu) / s)
}

/// Smallest `w ≥ 0` with two-sided Gaussian tail `erfc(w / (√2 σ)) < tol`.
pub fn gaussian_tail_halfwidth(sigma: f64, tol: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * sigma;
    let mut z: f64 = 1.0;
    while erfc(z) >= tol {
        z += 0.25;
    }
    z * s
}
