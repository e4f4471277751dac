//! Position-space energy filter and finite-energy codeword wavefunctions.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::hermite::hermite_functions;
use super::quadrature::QuadratureGrid;
use crate::gkp::{FiniteEnergyParams, PauliIndex};

const SQRT_PI: f64 = 1.772_453_850_905_516;
/// Exponent beyond which a comb term is dropped.
const COMB_CUTOFF: f64 = 60.0;

/// `⟨x| e^{−ε n̂} |x₀⟩` in closed form.
pub fn energy_filter_kernel(x: f64, x0: f64, epsilon: f64) -> f64 {
    let (s, c) = (epsilon.sinh(), epsilon.cosh());
    let pre = (0.5 * epsilon).exp() / (2.0 * PI * s).sqrt();
    pre * (-((x * x + x0 * x0) * c - 2.0 * x * x0) / (2.0 * s)).exp()
}

/// `Σ_{n<terms} e^{−ε n} ψ_n(x) ψ_n(x₀)`.
pub fn mehler_kernel_sum(x: f64, x0: f64, epsilon: f64, terms: usize) -> f64 {
    if terms == 0 {
        return 0.0;
    }
    let a = hermite_functions(terms - 1, x);
    let b = hermite_functions(terms - 1, x0);
    a.iter()
        .zip(&b)
        .enumerate()
        .map(|(n, (u, v))| (-epsilon * n as f64).exp() * u * v)
        .sum()
}

fn comb_range(mu: u8, params: &FiniteEnergyParams, cutoff: f64) -> (i64, i64) {
    // keep x_s²/(4Σ²) ≤ cutoff
    let x_max = (4.0 * params.envelope_sq * cutoff).sqrt();
    let s_max = ((x_max / SQRT_PI - mu as f64) / 2.0).ceil() as i64 + 1;
    (-s_max, s_max)
}

/// `e^{−ε n̂}` applied to the ideal delta comb `Σ_s δ(x − (2s+μ)√π)`.
pub fn filtered_comb(mu: u8, params: &FiniteEnergyParams, x: f64) -> f64 {
    let (lo, hi) = comb_range(mu, params, COMB_CUTOFF);
    comb_sum(mu, params, x, lo, hi)
}

fn comb_sum(mu: u8, params: &FiniteEnergyParams, x: f64, lo: i64, hi: i64) -> f64 {
    let eps = params.epsilon;
    let pre = (0.5 * eps).exp() / (2.0 * PI * eps.sinh()).sqrt();
    let a = 0.25 / params.sigma_sq;
    let b = 0.25 / params.envelope_sq;
    let mut acc = 0.0;
    for s in lo..=hi {
        let xs = (2 * s + mu as i64) as f64 * SQRT_PI;
        let d = x - xs * params.lattice_scale;
        let e = a * d * d + b * xs * xs;
        if e < 700.0 {
            acc += (-e).exp();
        }
    }
    pre * acc
}

/// Normalized finite-energy codeword `ψ_μ(x)`.
#[derive(Debug, Clone)]
pub struct GkpWavefunction {
    mu: u8,
    params: FiniteEnergyParams,
    range: (i64, i64),
    norm_sq: f64,
}

impl GkpWavefunction {
    pub fn new(mu: u8, params: FiniteEnergyParams) -> Self {
        Self::with_cutoff(mu, params, COMB_CUTOFF)
    }

    /// Drops comb terms whose envelope factor is below `e^{−cutoff}`.
    pub fn with_cutoff(mu: u8, params: FiniteEnergyParams, cutoff: f64) -> Self {
        assert!(mu < 2, "codeword label must be 0 or 1");
        let range = comb_range(mu, &params, cutoff);
        let half = params.lattice_scale * (range.1 as f64 * 2.0 + 1.0) * SQRT_PI + 12.0 * params.sigma();
        let grid = QuadratureGrid::composite(half, params.sigma(), 16).expect("valid grid");
        let norm_sq = grid.integrate(|x| {
            let v = comb_sum(mu, &params, x, range.0, range.1);
            v * v
        });
        Self {
            mu,
            params,
            range,
            norm_sq,
        }
    }

    /// `∫ |e^{−εn̂} comb_μ|² dx`.
    pub fn filtered_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Unnormalized filtered comb.
    pub fn raw(&self, x: f64) -> f64 {
        comb_sum(self.mu, &self.params, x, self.range.0, self.range.1)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.raw(x) / self.norm_sq.sqrt()
    }
}

/// `ψ_μ(x)`; `tol` bounds the relative size of dropped comb terms.
pub fn gkp_wavefunction(mu: u8, params: &FiniteEnergyParams, x: f64, tol: f64) -> f64 {
    let cutoff = if tol > 0.0 && tol < 1.0 { (-tol.ln()).max(COMB_CUTOFF) } else { COMB_CUTOFF };
    GkpWavefunction::with_cutoff(mu, *params, cutoff).value(x)
}

/// `κ = √π (1 + e^{−2ε})`, the factor making the filtered Pauli operators'
/// Wigner mixture start with unit weight at the origin.
pub(crate) fn pauli_normalization(params: &FiniteEnergyParams) -> f64 {
    SQRT_PI * (1.0 + (-2.0 * params.epsilon).exp())
}

/// 2×2 logical Pauli matrix.
pub(crate) fn pauli_matrix(k: PauliIndex) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k.index() {
        0 => [[one, z], [z, one]],
        1 => [[z, one], [one, z]],
        2 => [[z, -i], [i, z]],
        _ => [[one, z], [z, -one]],
    }
}

/// Wigner function of `σ_k^ε` from the codeword wavefunctions,
/// `W(q,p) = π^{-1} ∫ dy e^{−2ipy} ⟨q+y|σ_k^ε|q−y⟩`.
pub fn operator_wigner(k: PauliIndex, params: &FiniteEnergyParams, q: f64, p: f64) -> f64 {
    let wf = [GkpWavefunction::new(0, *params), GkpWavefunction::new(1, *params)];
    let m = pauli_matrix(k);
    let kappa = pauli_normalization(params);
    let half = 8.0 * params.envelope_sq.sqrt() + 12.0 * params.sigma();
    let grid = QuadratureGrid::composite(half, 0.5 * params.sigma(), 16).expect("valid grid");
    let mut acc = 0.0;
    for (&y, &w) in grid.nodes.iter().zip(&grid.weights) {
        let a = [wf[0].raw(q + y), wf[1].raw(q + y)];
        let b = [wf[0].raw(q - y), wf[1].raw(q - y)];
        let mut amp = Complex64::new(0.0, 0.0);
        for mu in 0..2 {
            for nu in 0..2 {
                amp += m[mu][nu] * (a[mu] * b[nu]);
            }
        }
        let phase = Complex64::from_polar(1.0, -2.0 * p * y);
        acc += w * (phase * amp).re;
    }
    kappa * acc / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkp::wigner_value;
    use crate::overlap::NoiseChannel;

    #[test]
    fn kernel_symmetric_and_vacuum_limit() {
        let e = 0.3;
        assert!((energy_filter_kernel(0.4, -1.1, e) - energy_filter_kernel(-1.1, 0.4, e)).abs() < 1e-16);
        let big = 30.0;
        let k = energy_filter_kernel(0.4, -0.2, big);
        let v = hermite_functions(0, 0.4)[0] * hermite_functions(0, -0.2)[0];
        assert!((k - v).abs() < 1e-12, "{k} {v}");
    }

    #[test]
    fn kernel_matches_mehler_sum() {
        let e = 0.2;
        for &(x, x0) in &[(0.0, 0.0), (0.5, -0.3), (1.7, 1.2), (-2.5, 0.8), (3.0, 3.0)] {
            let closed = energy_filter_kernel(x, x0, e);
            let sum = mehler_kernel_sum(x, x0, e, 200);
            assert!((closed - sum).abs() < 1e-8, "{x} {x0}: {closed} vs {sum}");
        }
    }

    #[test]
    fn kernel_eigenvalues() {
        let e = 0.35;
        let grid = QuadratureGrid::composite(14.0, 0.1, 16).unwrap();
        for n in 0..2 {
            for &x in &[-1.2, 0.0, 0.3, 2.0] {
                let v = grid.integrate(|x0| energy_filter_kernel(x, x0, e) * hermite_functions(1, x0)[n]);
                let want = (-e * n as f64).exp() * hermite_functions(1, x)[n];
                assert!((v - want).abs() < 1e-8, "n={n} x={x}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn comb_is_kernel_at_lattice_points() {
        let p = FiniteEnergyParams::from_db(8.0).unwrap();
        let x = 0.37;
        let (lo, hi) = comb_range(1, &p, COMB_CUTOFF);
        let direct: f64 = (lo..=hi)
            .map(|s| energy_filter_kernel(x, (2 * s + 1) as f64 * SQRT_PI, p.epsilon))
            .sum();
        assert!((direct - filtered_comb(1, &p, x)).abs() < 1e-13 * direct.abs().max(1.0));
    }

    #[test]
    fn wavefunction_normalized_and_even() {
        let p = FiniteEnergyParams::from_db(10.0).unwrap();
        let wf = GkpWavefunction::new(0, p);
        let grid = QuadratureGrid::composite(40.0, 0.05, 16).unwrap();
        let n = grid.integrate(|x| wf.value(x).powi(2));
        assert!((n - 1.0).abs() < 1e-8, "{n}");
        for &x in &[0.3, 1.9, 4.4] {
            assert!((wf.value(x) - wf.value(-x)).abs() < 1e-14);
        }
        let one = GkpWavefunction::new(1, p);
        assert!((one.value(1.0) - one.value(-1.0)).abs() < 1e-14);
    }

    #[test]
    fn peak_spacing_is_contracted() {
        let p = FiniteEnergyParams::from_db(10.0).unwrap();
        let wf = GkpWavefunction::new(0, p);
        // golden-section search for the maximum near the first side peak
        let mut a = 2.0 * SQRT_PI - 1.0;
        let mut b = 2.0 * SQRT_PI + 1.0;
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if wf.value(c) > wf.value(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let peak = 0.5 * (a + b);
        let want = 2.0 * SQRT_PI * p.lattice_scale;
        assert!((peak - want).abs() < 1e-6, "{peak} vs {want}");
    }

    #[test]
    fn wigner_from_wavefunctions_matches_lattice_mixture() {
        let p = FiniteEnergyParams::from_db(10.0).unwrap();
        let ch = NoiseChannel::ideal();
        for k in PauliIndex::ALL {
            for &(q, pp) in &[(0.0, 0.0), (0.3, -0.5), (0.886, 0.0), (1.2, 1.7), (-2.0, 0.9)] {
                let a = operator_wigner(k, &p, q, pp);
                let b = wigner_value(k, &p, &ch, q, pp, 1e-14);
                assert!((a - b).abs() < 1e-6, "k={} ({q},{pp}): {a} vs {b}", k.index());
            }
        }
    }
}
