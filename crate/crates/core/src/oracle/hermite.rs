//! Normalized Hermite functions by the three-term recurrence.

use nalgebra::DMatrix;

const PI_QUARTER_ROOT_INV: f64 = 0.751_125_544_464_942_5;

/// `ψ_0(x), …, ψ_{n_max}(x)`.
///
/// `ψ_0 = π^{−1/4} e^{−x²/2}`, `ψ_1 = √2 x ψ_0`,
/// `ψ_n = √(2/n) x ψ_{n−1} − √((n−1)/n) ψ_{n−2}`.
/// Stays finite for `|x| ≲ 37`, where `ψ_0` is still a normal float.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let psi0 = PI_QUARTER_ROOT_INV * (-0.5 * x * x).exp();
    out.push(psi0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 2..=n_max {
        let nf = n as f64;
        let v = (2.0 / nf).sqrt() * x * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        out.push(v);
    }
    out
}

/// `(n_max + 1) × nodes.len()` matrix with entries `ψ_n(x_i)`.
pub fn hermite_matrix(n_max: usize, nodes: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n_max + 1, nodes.len());
    for (i, &x) in nodes.iter().enumerate() {
        for (n, v) in hermite_functions(n_max, x).into_iter().enumerate() {
            m[(n, i)] = v;
        }
    }
    m
}
