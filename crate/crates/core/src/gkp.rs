//! Finite-energy square-lattice GKP model.
//!
//! The energy filter `e^{-ε n̂}` turns each encoded Pauli operator into a
//! signed mixture of isotropic Gaussians placed on the contracted half
//! lattice `sech ε · (√π/2) · m`. Everything here is a pure function of
//! [`FiniteEnergyParams`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::overlap::NoiseChannel;

/// Squeezing model of the energy filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteEnergyParams {
    /// Filter strength ε.
    pub epsilon: f64,
    /// Peak parameter σ² = ½ tanh ε.
    pub sigma_sq: f64,
    /// Envelope parameter Σ² = ½ coth ε.
    pub envelope_sq: f64,
    /// Lattice contraction sech ε.
    pub lattice_scale: f64,
    /// Squeezing in dB, −10 log₁₀(tanh ε).
    pub r_db: f64,
}

impl FiniteEnergyParams {
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain(format!(
                "energy filter strength must be finite and positive, got {epsilon}"
            )));
        }
        let t = epsilon.tanh();
        Ok(Self {
            epsilon,
            sigma_sq: 0.5 * t,
            envelope_sq: 0.5 / t,
            lattice_scale: 1.0 / epsilon.cosh(),
            r_db: -10.0 * t.log10(),
        })
    }

    /// Parameters for a squeezing of `r_db` decibels.
    pub fn from_db(r_db: f64) -> Result<Self> {
        if !(r_db.is_finite() && r_db > 0.0) {
            return Err(Error::Domain(format!(
                "squeezing must be finite and positive in dB, got {r_db}"
            )));
        }
        let t = 10f64.powf(-r_db / 10.0);
        let epsilon = t.atanh();
        let mut p = Self::from_epsilon(epsilon)?;
        // keep the caller's value instead of the round-tripped one
        p.r_db = r_db;
        Ok(p)
    }

    #[inline]
    pub fn tanh_eps(&self) -> f64 {
        2.0 * self.sigma_sq
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    /// Exponent rate `a` of the envelope weight `exp(−a |m|²)`.
    #[inline]
    pub(crate) fn envelope_rate(&self) -> f64 {
        0.25 * PI * self.tanh_eps()
    }
}

/// Site `m = (m1, m2)` of the half lattice `ℤ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeSite {
    pub m1: i64,
    pub m2: i64,
}

impl LatticeSite {
    pub const fn new(m1: i64, m2: i64) -> Self {
        Self { m1, m2 }
    }

    pub fn norm_sq(&self) -> i64 {
        self.m1 * self.m1 + self.m2 * self.m2
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.m1, -self.m2)
    }
}

/// Index of a single-qubit Pauli: 0 = I, 1 = X, 2 = Y, 3 = Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const I: PauliIndex = PauliIndex(0);
    pub const X: PauliIndex = PauliIndex(1);
    pub const Y: PauliIndex = PauliIndex(2);
    pub const Z: PauliIndex = PauliIndex(3);
    pub const ALL: [PauliIndex; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    pub fn new(k: u8) -> Result<Self> {
        if k < 4 {
            Ok(Self(k))
        } else {
            Err(Error::Domain(format!("Pauli index must be in 0..4, got {k}")))
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Parities `(m1 mod 2, m2 mod 2)` of the coset `M_k`.
    #[inline]
    pub fn coset_parity(self) -> (i64, i64) {
        match self.0 {
            0 => (0, 0),
            1 => (1, 0),
            2 => (1, 1),
            _ => (0, 1),
        }
    }

    /// The overall `(−1)^{δ_{k,2}}` prefactor.
    #[inline]
    pub fn global_sign(self) -> f64 {
        if self.0 == 2 {
            -1.0
        } else {
            1.0
        }
    }
}

impl TryFrom<u8> for PauliIndex {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        Self::new(k)
    }
}

impl From<PauliIndex> for u8 {
    fn from(k: PauliIndex) -> u8 {
        k.0
    }
}

impl fmt::Display for PauliIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["I", "X", "Y", "Z"][self.index()])
    }
}

/// `exp[−(π/4) tanh ε (m1² + m2²)]`.
#[inline]
pub fn envelope_weight(params: &FiniteEnergyParams, m: LatticeSite) -> f64 {
    (-params.envelope_rate() * m.norm_sq() as f64).exp()
}

#[inline]
pub fn coset_membership(k: PauliIndex, m: LatticeSite) -> bool {
    let (a, b) = k.coset_parity();
    m.m1.rem_euclid(2) == a && m.m2.rem_euclid(2) == b
}

#[inline]
fn parity_sign(half: i64) -> f64 {
    if half.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign `s_k(m)` of the Gaussian at `m`; requires `m ∈ M_k`.
pub fn sign_pattern(k: PauliIndex, m: LatticeSite) -> Result<f64> {
    if !coset_membership(k, m) {
        return Err(Error::Domain(format!(
            "site ({}, {}) is not in coset M_{}",
            m.m1,
            m.m2,
            k.index()
        )));
    }
    Ok(sign_unchecked(k, m))
}

#[inline]
pub(crate) fn sign_unchecked(k: PauliIndex, m: LatticeSite) -> f64 {
    match k.index() {
        0 => 1.0,
        1 => parity_sign(m.m2 / 2),
        2 => parity_sign((m.m1 + m.m2) / 2),
        _ => parity_sign(m.m1 / 2),
    }
}

/// Sites of `M_k` with `max(|m1|, |m2|) ≤ radius`, row-major in `(m1, m2)`.
pub fn lattice_sites(k: PauliIndex, radius: u32) -> Vec<LatticeSite> {
    let r = radius as i64;
    let (a, b) = k.coset_parity();
    let first = |p: i64| if (-r).rem_euclid(2) == p { -r } else { -r + 1 };
    let mut sites = Vec::new();
    let mut m1 = first(a);
    while m1 <= r {
        let mut m2 = first(b);
        while m2 <= r {
            sites.push(LatticeSite::new(m1, m2));
            m2 += 2;
        }
        m1 += 2;
    }
    sites
}

/// Upper bound on `Σ_{m>R} exp(−a m²)` from the geometric ratio of
/// consecutive terms.
fn one_sided_tail(a: f64, r: u32) -> f64 {
    let r = r as f64;
    let first = (-a * (r + 1.0) * (r + 1.0)).exp();
    let ratio = (-a * (2.0 * r + 3.0)).exp();
    first / (1.0 - ratio)
}

/// Upper bound on the full-line theta sum `Σ_m exp(−a m²)`.
fn theta_bound(a: f64) -> f64 {
    1.0 + 2.0 * one_sided_tail(a, 0)
}

/// Bound on `Σ_{max|m|>R} c_m` over all of `ℤ²`.
pub fn envelope_tail_bound(params: &FiniteEnergyParams, radius: u32) -> f64 {
    let a = params.envelope_rate();
    // the square complement is covered by the two strips |m1|>R and |m2|>R
    2.0 * (2.0 * one_sided_tail(a, radius)) * theta_bound(a)
}

/// Bound on `Σ_{m∈ℤ²} c_m`, used to scale per-site tolerances.
pub fn envelope_mass_bound(params: &FiniteEnergyParams) -> f64 {
    let t = theta_bound(params.envelope_rate());
    t * t
}

/// Smallest radius whose envelope tail is below `tol` (at least 1).
pub fn truncation_radius(params: &FiniteEnergyParams, tol: f64) -> u32 {
    let mut r = 1u32;
    while envelope_tail_bound(params, r) >= tol {
        r += 1;
    }
    r
}

/// `tr σ_k^ε`: every Gaussian of the mixture carries unit mass.
pub fn pauli_trace(k: PauliIndex, params: &FiniteEnergyParams, tol: f64) -> f64 {
    let radius = truncation_radius(params, tol);
    pauli_trace_with_radius(k, params, radius)
}

pub(crate) fn pauli_trace_with_radius(k: PauliIndex, params: &FiniteEnergyParams, radius: u32) -> f64 {
    let mut acc = CompensatedSum::new();
    for m in lattice_sites(k, radius) {
        acc.add(envelope_weight(params, m) * sign_unchecked(k, m));
    }
    k.global_sign() * acc.value()
}

/// Phase-space mean of the Gaussian at `m` after the channel.
#[inline]
pub fn lattice_mean(params: &FiniteEnergyParams, m: LatticeSite, eta: f64) -> (f64, f64) {
    let scale = eta.sqrt() * params.lattice_scale * 0.5 * PI.sqrt();
    (scale * m.m1 as f64, scale * m.m2 as f64)
}

/// Wigner function of the (possibly attenuated) operator `σ_k^ε` at `(q, p)`.
pub fn wigner_value(
    k: PauliIndex,
    params: &FiniteEnergyParams,
    channel: &NoiseChannel,
    q: f64,
    p: f64,
    tol: f64,
) -> f64 {
    let var = channel.effective_variance(params);
    let radius = truncation_radius(params, tol * 2.0 * PI * var);
    let norm = 1.0 / (2.0 * PI * var);
    let mut acc = CompensatedSum::new();
    for m in lattice_sites(k, radius) {
        let (mq, mp) = lattice_mean(params, m, channel.eta);
        let d2 = (q - mq) * (q - mq) + (p - mp) * (p - mp);
        acc.add(envelope_weight(params, m) * sign_unchecked(k, m) * (-0.5 * d2 / var).exp());
    }
    k.global_sign() * norm * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p10() -> FiniteEnergyParams {
        FiniteEnergyParams::from_db(10.0).unwrap()
    }

    #[test]
    fn from_db_ten() {
        let p = p10();
        assert!((p.tanh_eps() - 0.1).abs() < 1e-15);
        assert!((p.epsilon - 0.100_335_347_731_075_6).abs() < 1e-12);
        assert!((p.sigma_sq - 0.05).abs() < 1e-15);
        assert!((p.sigma_sq * p.envelope_sq - 0.25).abs() < 1e-15);
        assert!(p.lattice_scale > 0.0 && p.lattice_scale < 1.0);
    }

    #[test]
    fn from_db_rejects_non_positive() {
        assert!(FiniteEnergyParams::from_db(0.0).is_err());
        assert!(FiniteEnergyParams::from_db(-3.0).is_err());
        assert!(FiniteEnergyParams::from_db(f64::NAN).is_err());
        assert!(FiniteEnergyParams::from_db(f64::INFINITY).is_err());
        assert!(FiniteEnergyParams::from_epsilon(0.0).is_err());
    }

    #[test]
    fn envelope_weight_examples() {
        let p = p10();
        assert_eq!(envelope_weight(&p, LatticeSite::new(0, 0)), 1.0);
        let w = envelope_weight(&p, LatticeSite::new(2, 0));
        assert!((w - (-0.1 * PI).exp()).abs() < 1e-15);
        assert!((w - 0.730_40).abs() < 1e-5);
    }

    #[test]
    fn coset_examples() {
        assert!(coset_membership(PauliIndex::I, LatticeSite::new(0, 0)));
        assert!(coset_membership(PauliIndex::X, LatticeSite::new(1, 0)));
        assert!(!coset_membership(PauliIndex::X, LatticeSite::new(1, 1)));
        assert!(coset_membership(PauliIndex::Y, LatticeSite::new(-1, 3)));
        assert!(coset_membership(PauliIndex::Z, LatticeSite::new(2, -1)));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_pattern(PauliIndex::I, LatticeSite::new(4, -2)).unwrap(), 1.0);
        assert_eq!(sign_pattern(PauliIndex::X, LatticeSite::new(1, 2)).unwrap(), -1.0);
        assert_eq!(sign_pattern(PauliIndex::Y, LatticeSite::new(1, 1)).unwrap(), -1.0);
        assert_eq!(sign_pattern(PauliIndex::Z, LatticeSite::new(2, 1)).unwrap(), -1.0);
        assert!(sign_pattern(PauliIndex::X, LatticeSite::new(0, 0)).is_err());
    }

    #[test]
    fn lattice_site_listing() {
        assert_eq!(lattice_sites(PauliIndex::I, 1), vec![LatticeSite::new(0, 0)]);
        assert_eq!(
            lattice_sites(PauliIndex::Y, 1),
            vec![
                LatticeSite::new(-1, -1),
                LatticeSite::new(-1, 1),
                LatticeSite::new(1, -1),
                LatticeSite::new(1, 1)
            ]
        );
        for r in [3u32, 10, 25] {
            let total: usize = PauliIndex::ALL.iter().map(|&k| lattice_sites(k, r).len()).sum();
            assert_eq!(total, ((2 * r + 1) * (2 * r + 1)) as usize);
        }
    }

    #[test]
    fn truncation_radius_monotone_and_trivial() {
        let p = p10();
        assert_eq!(truncation_radius(&p, 1e3), 1);
        assert!(truncation_radius(&p, 1.0) > 1);
        let mut last = u32::MAX;
        for tol in [1e-14, 1e-12, 1e-9, 1e-6, 1e-3] {
            let r = truncation_radius(&p, tol);
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn truncation_residual_checked_by_direct_summation() {
        // direct sums at R and 2R over all of Z² differ by less than tol
        let p = p10();
        let tol = 1e-12;
        let r = truncation_radius(&p, tol) as i64;
        let direct = |rad: i64| -> f64 {
            let mut acc = CompensatedSum::new();
            for m1 in -rad..=rad {
                for m2 in -rad..=rad {
                    acc.add(envelope_weight(&p, LatticeSite::new(m1, m2)));
                }
            }
            acc.value()
        };
        let diff = direct(2 * r) - direct(r);
        assert!(diff >= 0.0 && diff < tol, "tail {diff:e} at R={r}");
    }

    #[test]
    fn identity_trace_is_positive_series() {
        let p = p10();
        let t0 = pauli_trace(PauliIndex::I, &p, 1e-12);
        assert!(t0 >= 1.0);
        // Poisson resummation: Σ_{M0} c_m = (Σ_s e^{-π t s²})² ≈ 1/t for t=0.1
        assert!((t0 - 10.0).abs() < 1e-9, "{t0}");
    }

    #[test]
    fn wigner_central_peak() {
        let p = FiniteEnergyParams::from_db(20.0).unwrap();
        let w = wigner_value(PauliIndex::I, &p, &NoiseChannel::ideal(), 0.0, 0.0, 1e-12);
        let central = 1.0 / (2.0 * PI * p.sigma_sq);
        assert!(((w - central) / central).abs() < 1e-10);
    }

    #[test]
    fn lossless_wigner_is_the_pure_mixture() {
        let p = p10();
        let ch = NoiseChannel::new(1.0, 0.7).unwrap();
        for k in PauliIndex::ALL {
            let a = wigner_value(k, &p, &ch, 0.3, -0.4, 1e-12);
            let b = wigner_value(k, &p, &NoiseChannel::ideal(), 0.3, -0.4, 1e-12);
            assert!((a - b).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn cosets_partition_the_plane(m1 in -1000i64..1000, m2 in -1000i64..1000) {
            let m = LatticeSite::new(m1, m2);
            let hits = PauliIndex::ALL.iter().filter(|&&k| coset_membership(k, m)).count();
            prop_assert_eq!(hits, 1);
        }

        #[test]
        fn signs_even_under_reflection(m1 in -500i64..500, m2 in -500i64..500) {
            let m = LatticeSite::new(m1, m2);
            for k in PauliIndex::ALL {
                if coset_membership(k, m) {
                    let s = sign_pattern(k, m).unwrap();
                    prop_assert!(s == 1.0 || s == -1.0);
                    prop_assert_eq!(s, sign_pattern(k, m.neg()).unwrap());
                }
            }
        }

        #[test]
        fn envelope_symmetries(m1 in -40i64..40, m2 in -40i64..40, db in 1.0f64..25.0) {
            let p = FiniteEnergyParams::from_db(db).unwrap();
            let w = envelope_weight(&p, LatticeSite::new(m1, m2));
            // far sites underflow at weak squeezing
            prop_assert!((0.0..=1.0).contains(&w));
            prop_assert_eq!(w, envelope_weight(&p, LatticeSite::new(-m1, -m2)));
            prop_assert_eq!(w, envelope_weight(&p, LatticeSite::new(m2, m1)));
        }

        #[test]
        fn hyperbolic_identity(db in 0.01f64..40.0) {
            let p = FiniteEnergyParams::from_db(db).unwrap();
            prop_assert!((p.sigma_sq * p.envelope_sq - 0.25).abs() < 1e-14);
            prop_assert!(p.lattice_scale > 0.0 && p.lattice_scale < 1.0);
        }

        #[test]
        fn wigner_even_under_inversion(q in -4.0f64..4.0, pp in -4.0f64..4.0, k in 0u8..4) {
            let p = FiniteEnergyParams::from_db(8.0).unwrap();
            let k = PauliIndex::new(k).unwrap();
            let ch = NoiseChannel::new(0.9, 0.05).unwrap();
            let a = wigner_value(k, &p, &ch, q, pp, 1e-12);
            let b = wigner_value(k, &p, &ch, -q, -pp, 1e-12);
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn trace_stable_beyond_cutoff(db in 3.0f64..20.0, k in 0u8..4) {
            let p = FiniteEnergyParams::from_db(db).unwrap();
            let k = PauliIndex::new(k).unwrap();
            let tol = 1e-12;
            let r = truncation_radius(&p, tol);
            let a = pauli_trace_with_radius(k, &p, r);
            let b = pauli_trace_with_radius(k, &p, 2 * r);
            prop_assert!((a - b).abs() < tol);
        }
    }
}
