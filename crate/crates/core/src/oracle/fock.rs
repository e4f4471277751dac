//! Truncated Fock-basis operators and homodyne bin probabilities.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hermite::hermite_matrix;
use super::kernel::{pauli_matrix, pauli_normalization, GkpWavefunction};
use super::quadrature::QuadratureGrid;
use crate::error::{Error, Result};
use crate::gkp::{FiniteEnergyParams, PauliIndex};
use crate::numeric::{gaussian_interval_mass, gaussian_tail_halfwidth};
use crate::overlap::MeasurementSetting;

const SQRT_PI: f64 = 1.772_453_850_905_516;
/// Largest `|x|` at which the Hermite recurrence is still accurate.
const HERMITE_HALF_WIDTH: f64 = 36.0;
pub const CODEWORD_RESIDUAL_TOL: f64 = 1e-8;
/// Allowed disagreement between a grid and its step-halved refinement.
pub const GRID_CHECK_TOL: f64 = 1e-7;
const TRACE_LOSS_TOL: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-9;
const GL_ORDER: usize = 20;

/// Photon cutoff at which the codeword residual reaches rounding level,
/// never below 120.
///
/// Bin probabilities err by about `√residual · tr|σ_k^ε|`, so a residual
/// that merely passes [`CODEWORD_RESIDUAL_TOL`] is not enough for
/// agreement at `1e-6`.
pub fn suggested_n_max(params: &FiniteEnergyParams) -> usize {
    let nbar = 0.5 / params.tanh_eps();
    ((33.0 * nbar + 40.0).ceil() as usize).max(120)
}

/// Fock amplitudes `⟨n|μ_L^ε⟩` of a normalized finite-energy codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct FockCodeword {
    pub mu: u8,
    pub amplitudes: Vec<f64>,
    /// `∫ |e^{−εn̂} comb_μ|²`, the norm before normalization.
    pub filtered_norm_sq: f64,
    /// Norm missing above the cutoff.
    pub residual: f64,
}

impl FockCodeword {
    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn inner(&self, other: &FockCodeword) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a * b).sum()
    }
}

/// Fock states up to `n_max` are negligible beyond the classical turning
/// point plus a margin.
fn hermite_half_width(n_max: usize) -> f64 {
    (((2 * n_max + 1) as f64).sqrt() + 10.0).min(HERMITE_HALF_WIDTH)
}

/// Projects the codeword wavefunction onto `ψ_0 … ψ_{n_max}`.
pub fn fock_codeword(mu: u8, params: &FiniteEnergyParams, n_max: usize) -> Result<FockCodeword> {
    if mu > 1 {
        return Err(Error::Domain(format!("codeword label must be 0 or 1, got {mu}")));
    }
    let wf = GkpWavefunction::new(mu, *params);
    let panel = (2.0 * params.sigma()).min(0.25);
    let grid = QuadratureGrid::composite(HERMITE_HALF_WIDTH, panel, GL_ORDER)?;
    let h = hermite_matrix(n_max, &grid.nodes);
    let f: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| w * wf.value(x))
        .collect();
    let amplitudes: Vec<f64> = (0..=n_max)
        .map(|n| h.row(n).iter().zip(&f).map(|(a, b)| a * b).sum())
        .collect();
    let captured: f64 = amplitudes.iter().map(|a| a * a).sum();
    let residual = 1.0 - captured;
    if residual.abs() > CODEWORD_RESIDUAL_TOL {
        let next = suggested_n_max(params).max(2 * n_max);
        return Err(Error::Truncation {
            detail: format!(
                "codeword |{mu}> at {} dB misses {residual:.3e} of its norm with n_max = {n_max}",
                params.r_db
            ),
            suggested_n_max: next,
        });
    }
    Ok(FockCodeword {
        mu,
        amplitudes,
        filtered_norm_sq: wf.filtered_norm_sq(),
        residual,
    })
}

fn pauli_from_codewords(k: PauliIndex, params: &FiniteEnergyParams, cw: &[FockCodeword; 2]) -> DMatrix<Complex64> {
    let n = cw[0].amplitudes.len();
    let kappa = pauli_normalization(params);
    let b: Vec<Vec<f64>> = cw
        .iter()
        .map(|c| {
            let s = c.filtered_norm_sq.sqrt();
            c.amplitudes.iter().map(|a| a * s).collect()
        })
        .collect();
    let m = pauli_matrix(k);
    DMatrix::from_fn(n, n, |r, c| {
        let mut v = Complex64::new(0.0, 0.0);
        for mu in 0..2 {
            for nu in 0..2 {
                v += m[mu][nu] * (b[mu][r] * b[nu][c]);
            }
        }
        v * kappa
    })
}

/// `σ_k^ε = κ e^{−εn̂} σ_k e^{−εn̂}` in the truncated Fock basis.
pub fn filtered_pauli_operator(k: PauliIndex, params: &FiniteEnergyParams, n_max: usize) -> Result<DMatrix<Complex64>> {
    let cw = [fock_codeword(0, params, n_max)?, fock_codeword(1, params, n_max)?];
    Ok(pauli_from_codewords(k, params, &cw))
}

/// All four filtered Paulis, sharing one codeword projection.
pub fn filtered_pauli_operators(params: &FiniteEnergyParams, n_max: usize) -> Result<[DMatrix<Complex64>; 4]> {
    let cw = [fock_codeword(0, params, n_max)?, fock_codeword(1, params, n_max)?];
    Ok(PauliIndex::ALL.map(|k| pauli_from_codewords(k, params, &cw)))
}

fn check_square(op: &DMatrix<Complex64>) -> Result<()> {
    if op.nrows() != op.ncols() || op.nrows() == 0 {
        return Err(Error::Shape(format!("operator must be square and nonempty, got {}x{}", op.nrows(), op.ncols())));
    }
    Ok(())
}

fn check_hermitian(op: &DMatrix<Complex64>) -> Result<()> {
    check_square(op)?;
    let scale = op.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for r in 0..op.nrows() {
        for c in r..op.ncols() {
            if (op[(r, c)] - op[(c, r)].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::InvalidState(format!("operator is not Hermitian at ({r}, {c})")));
            }
        }
    }
    Ok(())
}

fn bin_of(scale: f64, x: f64) -> usize {
    let r = (scale * x + 0.5 * SQRT_PI).rem_euclid(2.0 * SQRT_PI);
    usize::from(r >= SQRT_PI)
}

/// Hermite functions tabulated on a bin-aligned quadrature grid.
#[derive(Debug, Clone)]
pub struct HomodyneOracle {
    n_max: usize,
    scale: f64,
    grid: QuadratureGrid,
    hermite: DMatrix<f64>,
    bins: Vec<usize>,
}

impl HomodyneOracle {
    pub fn new(n_max: usize, scale: f64, panels_per_half_bin: usize) -> Result<Self> {
        let grid = QuadratureGrid::bin_aligned(hermite_half_width(n_max), scale, panels_per_half_bin, GL_ORDER)?;
        if grid.half_width > HERMITE_HALF_WIDTH + SQRT_PI {
            return Err(Error::Domain(format!("outcome scale {scale} too small for the oracle grid")));
        }
        let hermite = hermite_matrix(n_max, &grid.nodes);
        let bins = grid.nodes.iter().map(|&x| bin_of(scale, x)).collect();
        Ok(Self {
            n_max,
            scale,
            grid,
            hermite,
            bins,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// `⟨x| e^{−iθn̂} op e^{iθn̂} |x⟩` at the grid nodes.
    pub fn marginal(&self, op: &DMatrix<Complex64>, theta: f64) -> Result<Vec<f64>> {
        check_square(op)?;
        if op.nrows() != self.n_max + 1 {
            return Err(Error::Shape(format!(
                "operator dimension {} does not match cutoff {}",
                op.nrows(),
                self.n_max
            )));
        }
        let n = op.nrows();
        let rotated = DMatrix::from_fn(n, n, |r, c| {
            let phase = Complex64::from_polar(1.0, -theta * (r as f64 - c as f64));
            (op[(r, c)] * phase).re
        });
        let m = &rotated * &self.hermite;
        Ok(m.column_iter()
            .zip(self.hermite.column_iter())
            .map(|(a, b)| a.dot(&b))
            .collect())
    }

    pub fn bin_probabilities(&self, op: &DMatrix<Complex64>, theta: f64) -> Result<[f64; 2]> {
        let marg = self.marginal(op, theta)?;
        let mut out = [0.0; 2];
        for ((m, w), &b) in marg.iter().zip(&self.grid.weights).zip(&self.bins) {
            out[b] += m * w;
        }
        Ok(out)
    }

    /// Bin probabilities after convolving the marginal with a centred
    /// Gaussian of the given variance in the measured quadrature.
    pub fn thermal_bin_probabilities(&self, op: &DMatrix<Complex64>, theta: f64, variance: f64) -> Result<[f64; 2]> {
        if !(variance >= 0.0) {
            return Err(Error::Domain(format!("added variance must be >= 0, got {variance}")));
        }
        if variance == 0.0 {
            return self.bin_probabilities(op, theta);
        }
        let marg = self.marginal(op, theta)?;
        let sd = self.scale * variance.sqrt();
        let reach = gaussian_tail_halfwidth(sd, 1e-17);
        let mut out = [0.0; 2];
        for ((m, w), &x) in marg.iter().zip(&self.grid.weights).zip(&self.grid.nodes) {
            let y = self.scale * x;
            let lo = ((y - reach) / SQRT_PI - 0.5).floor() as i64;
            let hi = ((y + reach) / SQRT_PI + 0.5).ceil() as i64;
            for j in lo..=hi {
                let c = j as f64 * SQRT_PI;
                out[j.rem_euclid(2) as usize] +=
                    m * w * gaussian_interval_mass(y, sd, c - 0.5 * SQRT_PI, c + 0.5 * SQRT_PI);
            }
        }
        Ok(out)
    }

    /// Convolved marginal density at arbitrary points `ys` of the
    /// unscaled quadrature.
    pub fn thermal_marginal(&self, op: &DMatrix<Complex64>, theta: f64, variance: f64, ys: &[f64]) -> Result<Vec<f64>> {
        if !(variance > 0.0) {
            return Err(Error::Domain(format!("added variance must be > 0, got {variance}")));
        }
        let marg = self.marginal(op, theta)?;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * variance).sqrt();
        Ok(ys
            .iter()
            .map(|&y| {
                marg.iter()
                    .zip(&self.grid.weights)
                    .zip(&self.grid.nodes)
                    .map(|((m, w), &x)| m * w * norm * (-(y - x) * (y - x) / (2.0 * variance)).exp())
                    .sum()
            })
            .collect())
    }
}

fn step_halved<F>(op: &DMatrix<Complex64>, setting: &MeasurementSetting, f: F) -> Result<[f64; 2]>
where
    F: Fn(&HomodyneOracle) -> Result<[f64; 2]>,
{
    check_hermitian(op)?;
    let n_max = op.nrows() - 1;
    let coarse = f(&HomodyneOracle::new(n_max, setting.scale, 2)?)?;
    let fine = f(&HomodyneOracle::new(n_max, setting.scale, 4)?)?;
    let gap = (coarse[0] - fine[0]).abs().max((coarse[1] - fine[1]).abs());
    if gap > GRID_CHECK_TOL {
        return Err(Error::Numerical(format!(
            "oracle grid unresolved: step halving moved a bin probability by {gap:.3e}"
        )));
    }
    Ok(fine)
}

/// Both bin probabilities `tr(M_o^{(θ)} op)`, checked against a
/// step-halved grid.
pub fn oracle_bin_probabilities(op: &DMatrix<Complex64>, setting: &MeasurementSetting) -> Result<[f64; 2]> {
    step_halved(op, setting, |o| o.bin_probabilities(op, setting.theta))
}

/// `tr(M_o^{(θ)} op)` for one outcome.
pub fn oracle_bin_probability(op: &DMatrix<Complex64>, setting: &MeasurementSetting, o: u8) -> Result<f64> {
    if o > 1 {
        return Err(Error::Domain(format!("outcome must be 0 or 1, got {o}")));
    }
    Ok(oracle_bin_probabilities(op, setting)?[o as usize])
}

/// Pure-loss channel of transmissivity `eta` applied to `op`,
/// `ρ'_{ab} = Σ_l f(a,l) f(b,l) ρ_{a+l,b+l}` with
/// `f(a,l) = √C(a+l,l) η^{a/2} (1−η)^{l/2}`.
pub fn apply_pure_loss(op: &DMatrix<Complex64>, eta: f64) -> Result<DMatrix<Complex64>> {
    check_square(op)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("transmissivity must lie in (0, 1], got {eta}")));
    }
    if eta == 1.0 {
        return Ok(op.clone());
    }
    let n = op.nrows();
    let ln_fact: Vec<f64> = (0..2 * n).map(|k| libm::lgamma(k as f64 + 1.0)).collect();
    let (ln_eta, ln_loss) = (eta.ln(), (1.0 - eta).ln());
    // f[a][l] for a + l < n
    let f: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..n - a)
                .map(|l| {
                    let ln_binom = ln_fact[a + l] - ln_fact[a] - ln_fact[l];
                    (0.5 * (ln_binom + a as f64 * ln_eta + l as f64 * ln_loss)).exp()
                })
                .collect()
        })
        .collect();
    let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for b in 0..n {
        for a in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..n - a.max(b) {
                acc += op[(a + l, b + l)] * (f[a][l] * f[b][l]);
            }
            out[(a, b)] = acc;
        }
    }
    let before = op.trace();
    let after = out.trace();
    if (before - after).norm() > TRACE_LOSS_TOL * before.norm().max(1.0) {
        return Err(Error::Truncation {
            detail: format!("pure loss changed the trace from {before} to {after}"),
            suggested_n_max: 2 * (n - 1),
        });
    }
    Ok(out)
}

/// Bin probabilities of an already attenuated operator after adding
/// Gaussian noise of variance `(1−η) n_th`.
pub fn convolved_bin_probabilities(
    lossy: &DMatrix<Complex64>,
    eta: f64,
    n_th: f64,
    setting: &MeasurementSetting,
) -> Result<[f64; 2]> {
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return Err(Error::Domain(format!("thermal occupation must be >= 0, got {n_th}")));
    }
    let variance = (1.0 - eta) * n_th;
    step_halved(lossy, setting, |o| o.thermal_bin_probabilities(lossy, setting.theta, variance))
}

/// Bin probabilities after loss `eta` with thermal occupation `n_th`.
pub fn thermal_bin_probabilities(
    op: &DMatrix<Complex64>,
    eta: f64,
    n_th: f64,
    setting: &MeasurementSetting,
) -> Result<[f64; 2]> {
    let lossy = apply_pure_loss(op, eta)?;
    convolved_bin_probabilities(&lossy, eta, n_th, setting)
}

pub fn thermal_bin_probability(
    op: &DMatrix<Complex64>,
    eta: f64,
    n_th: f64,
    setting: &MeasurementSetting,
    o: u8,
) -> Result<f64> {
    if o > 1 {
        return Err(Error::Domain(format!("outcome must be 0 or 1, got {o}")));
    }
    Ok(thermal_bin_probabilities(op, eta, n_th, setting)?[o as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::{single_mode_overlap, NoiseChannel};

    fn params(db: f64) -> FiniteEnergyParams {
        FiniteEnergyParams::from_db(db).unwrap()
    }

    #[test]
    fn codeword_parity_and_norm() {
        let p = params(10.0);
        let c0 = fock_codeword(0, &p, suggested_n_max(&p)).unwrap();
        let c1 = fock_codeword(1, &p, suggested_n_max(&p)).unwrap();
        for n in (1..=c0.n_max()).step_by(2) {
            assert!(c0.amplitudes[n].abs() < 1e-10 && c1.amplitudes[n].abs() < 1e-10);
        }
        assert!((c0.norm_sq() - 1.0).abs() < 1e-8);
        assert!((c1.norm_sq() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn codewords_overlap_shrinks_with_squeezing() {
        let mut last = f64::INFINITY;
        for db in [4.0, 6.0, 8.0, 10.0] {
            let p = params(db);
            let n = suggested_n_max(&p);
            let s = fock_codeword(0, &p, n).unwrap().inner(&fock_codeword(1, &p, n).unwrap());
            assert!(s > 0.0 && s < last, "{db} dB: {s}");
            last = s;
        }
    }

    #[test]
    fn low_cutoff_reports_truncation() {
        let p = params(12.0);
        match fock_codeword(0, &p, 20) {
            Err(Error::Truncation { suggested_n_max, .. }) => assert!(suggested_n_max >= 40),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn pauli_operators_hermitian_with_lattice_traces() {
        let p = params(10.0);
        let ops = filtered_pauli_operators(&p, suggested_n_max(&p)).unwrap();
        for (k, op) in PauliIndex::ALL.iter().zip(&ops) {
            check_hermitian(op).unwrap();
            let t = op.trace();
            let want = crate::gkp::pauli_trace(*k, &p, 1e-14);
            assert!((t.re - want).abs() < 1e-9 && t.im.abs() < 1e-12, "k={}: {t} vs {want}", k.index());
        }
    }

    fn compare(db: f64, settings: &[MeasurementSetting], tol: f64) {
        let p = params(db);
        let ops = filtered_pauli_operators(&p, suggested_n_max(&p)).unwrap();
        for s in settings {
            for k in PauliIndex::ALL {
                let got = oracle_bin_probabilities(&ops[k.index()], s).unwrap();
                for o in 0..2u8 {
                    let want = single_mode_overlap(k, o, s, &p, &NoiseChannel::ideal(), 1e-13).unwrap();
                    assert!(
                        (got[o as usize] - want).abs() < tol,
                        "{db} dB {} k={} o={o}: {} vs {want}",
                        s.name(),
                        k.index(),
                        got[o as usize]
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_matches_series_at_5_and_10_db() {
        let settings = [
            MeasurementSetting::Z,
            MeasurementSetting::X,
            MeasurementSetting::Y,
            MeasurementSetting::angle(std::f64::consts::FRAC_PI_4).unwrap(),
            MeasurementSetting::angle(1.1).unwrap(),
        ];
        compare(5.0, &settings, 1e-6);
        compare(10.0, &settings, 1e-6);
    }

    #[test]
    fn oracle_matches_series_at_15_db() {
        compare(15.0, &[MeasurementSetting::Y], 1e-6);
    }

    #[test]
    fn outcome_sum_is_trace_and_angle_periodic() {
        let p = params(7.0);
        let op = filtered_pauli_operator(PauliIndex::X, &p, suggested_n_max(&p)).unwrap();
        let a = oracle_bin_probabilities(&op, &MeasurementSetting::angle(0.6).unwrap()).unwrap();
        let oracle = HomodyneOracle::new(op.nrows() - 1, 1.0, 2).unwrap();
        let b = oracle.bin_probabilities(&op, 0.6 + 2.0 * std::f64::consts::PI).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        assert!((a[0] + a[1] - op.trace().re).abs() < 1e-9);
    }

    #[test]
    fn density_probabilities_in_range() {
        let p = params(8.0);
        let c = fock_codeword(1, &p, suggested_n_max(&p)).unwrap();
        let n = c.amplitudes.len();
        let rho = DMatrix::from_fn(n, n, |r, s| Complex64::new(c.amplitudes[r] * c.amplitudes[s], 0.0));
        for theta in [0.0, 0.4, 1.3, 2.9] {
            let pr = oracle_bin_probabilities(&rho, &MeasurementSetting::angle(theta).unwrap()).unwrap();
            let tr = rho.trace().re;
            for v in pr {
                assert!(v >= -1e-9 && v <= tr + 1e-9);
            }
        }
    }

    #[test]
    fn pure_loss_identity_vacuum_and_trace() {
        let n = 6;
        let mut vac = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        vac[(0, 0)] = Complex64::new(1.0, 0.0);
        let out = apply_pure_loss(&vac, 0.3).unwrap();
        assert!((out - &vac).norm() < 1e-15);
        let rho = DMatrix::from_fn(n, n, |r, c| Complex64::new(1.0 / (1.0 + (r + c) as f64), 0.1 * (r as f64 - c as f64)));
        assert_eq!(apply_pure_loss(&rho, 1.0).unwrap(), rho);
        let lossy = apply_pure_loss(&rho, 0.55).unwrap();
        assert!((lossy.trace() - rho.trace()).norm() < 1e-12);
        // single photon: η|1⟩⟨1| + (1−η)|0⟩⟨0|
        let mut one = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        one[(1, 1)] = Complex64::new(1.0, 0.0);
        let l = apply_pure_loss(&one, 0.7).unwrap();
        assert!((l[(1, 1)].re - 0.7).abs() < 1e-14 && (l[(0, 0)].re - 0.3).abs() < 1e-14);
        assert!(apply_pure_loss(&rho, 0.0).is_err());
    }

    #[test]
    fn loss_matches_series() {
        let p = params(10.0);
        let ch = NoiseChannel::pure_loss(0.8).unwrap();
        let ops = filtered_pauli_operators(&p, suggested_n_max(&p)).unwrap();
        for s in [MeasurementSetting::Z, MeasurementSetting::Y] {
            for k in PauliIndex::ALL {
                let got = thermal_bin_probabilities(&ops[k.index()], 0.8, 0.0, &s).unwrap();
                for o in 0..2u8 {
                    let want = single_mode_overlap(k, o, &s, &p, &ch, 1e-13).unwrap();
                    assert!((got[o as usize] - want).abs() < 1e-5, "{} k={} o={o}", s.name(), k.index());
                }
            }
        }
    }

    #[test]
    fn thermal_matches_series() {
        let p = params(10.0);
        let ch = NoiseChannel::new(0.8, 0.1).unwrap();
        let ops = filtered_pauli_operators(&p, suggested_n_max(&p)).unwrap();
        for s in [MeasurementSetting::X, MeasurementSetting::Y] {
            for k in PauliIndex::ALL {
                let got = thermal_bin_probabilities(&ops[k.index()], 0.8, 0.1, &s).unwrap();
                for o in 0..2u8 {
                    let want = single_mode_overlap(k, o, &s, &p, &ch, 1e-13).unwrap();
                    assert!((got[o as usize] - want).abs() < 1e-5, "{} k={} o={o}", s.name(), k.index());
                }
            }
        }
    }

    #[test]
    fn thermal_noise_smooths_marginal() {
        let p = params(10.0);
        let n_max = suggested_n_max(&p);
        let op = filtered_pauli_operator(PauliIndex::I, &p, n_max).unwrap();
        let lossy = apply_pure_loss(&op, 0.9).unwrap();
        let oracle = HomodyneOracle::new(n_max, 1.0, 2).unwrap();
        let ys: Vec<f64> = (0..=1200).map(|i| -12.0 + 0.02 * i as f64).collect();
        let mut last = f64::INFINITY;
        for n_th in [0.05, 0.2, 0.5, 1.0] {
            let m = oracle.thermal_marginal(&lossy, 0.0, 0.1 * n_th, &ys).unwrap();
            let tv: f64 = m.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            assert!(tv < last, "n_th={n_th}: {tv} >= {last}");
            last = tv;
        }
    }
}
