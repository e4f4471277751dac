//! Single-mode binned-homodyne overlaps `t_{k,o} = tr(M_o σ_k^ε)`.
//!
//! Integrating the rotated Wigner marginal of each lattice Gaussian over
//! the periodic bins `R_o` gives an error-function series per site; loss
//! and thermal noise only rescale the means by `√η` and replace the peak
//! variance by `σ̃² = η σ² + (1 − η)(n_th + ½)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gkp::{
    envelope_mass_bound, envelope_weight, lattice_sites, sign_unchecked, truncation_radius,
    FiniteEnergyParams, LatticeSite, PauliIndex,
};
use crate::numeric::{gaussian_interval_mass, gaussian_tail_halfwidth, CompensatedSum};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Named settings. The label fixes both the angle and the outcome gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SettingLabel {
    X,
    Y,
    Z,
    Custom,
}

/// Homodyne angle plus the gain applied to the outcome before binning.
///
/// The binned variable is `scale · q_θ`. `Z` and `X` read `q` and `p`
/// directly. `Y` reads `q_{π/4}` with gain `√2`, i.e. bins `q + p`, which
/// is the only way the fixed `√π` bins line up with the diagonal lattice;
/// at unit gain the `π/4` readout is far from a logical Y. Outcome 0 of
/// this `Y` is the −1 eigenspace of logical Y (`p − q` would give +1);
/// MABK and the correlator-based quantities are insensitive to the choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub theta: f64,
    pub scale: f64,
    pub label: SettingLabel,
}

impl MeasurementSetting {
    pub const Z: MeasurementSetting = MeasurementSetting {
        theta: 0.0,
        scale: 1.0,
        label: SettingLabel::Z,
    };
    pub const X: MeasurementSetting = MeasurementSetting {
        theta: FRAC_PI_2,
        scale: 1.0,
        label: SettingLabel::X,
    };
    pub const Y: MeasurementSetting = MeasurementSetting {
        theta: FRAC_PI_4,
        scale: SQRT_2,
        label: SettingLabel::Y,
    };

    /// A raw angle with unit gain, normalized to `[0, 2π)`.
    pub fn angle(theta: f64) -> Result<Self> {
        Self::custom(theta, 1.0)
    }

    pub fn custom(theta: f64, scale: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("homodyne angle must be finite, got {theta}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!("outcome gain must be positive, got {scale}")));
        }
        Ok(Self {
            theta: theta.rem_euclid(2.0 * PI),
            scale,
            label: SettingLabel::Custom,
        })
    }

    pub fn from_label(label: SettingLabel) -> Option<Self> {
        match label {
            SettingLabel::X => Some(Self::X),
            SettingLabel::Y => Some(Self::Y),
            SettingLabel::Z => Some(Self::Z),
            SettingLabel::Custom => None,
        }
    }

    pub fn name(&self) -> String {
        match self.label {
            SettingLabel::X => "X".into(),
            SettingLabel::Y => "Y".into(),
            SettingLabel::Z => "Z".into(),
            SettingLabel::Custom => format!("theta={:.6},scale={:.6}", self.theta, self.scale),
        }
    }
}

/// Beam-splitter loss with a thermal environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub eta: f64,
    pub n_th: f64,
}

impl NoiseChannel {
    pub fn new(eta: f64, n_th: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Domain(format!("transmissivity must lie in (0, 1], got {eta}")));
        }
        if !(n_th >= 0.0 && n_th.is_finite()) {
            return Err(Error::Domain(format!("thermal occupation must be >= 0, got {n_th}")));
        }
        Ok(Self { eta, n_th })
    }

    pub const fn ideal() -> Self {
        Self { eta: 1.0, n_th: 0.0 }
    }

    pub fn pure_loss(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    /// `σ̃² = η σ² + (1 − η)(n_th + ½)`.
    pub fn effective_variance(&self, params: &FiniteEnergyParams) -> f64 {
        self.eta * params.sigma_sq + (1.0 - self.eta) * (self.n_th + 0.5)
    }
}

/// Overlaps for one setting: `t[k][o]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapTable {
    pub setting: MeasurementSetting,
    pub t: [[f64; 2]; 4],
}

impl OverlapTable {
    pub fn get(&self, k: PauliIndex, o: u8) -> f64 {
        self.t[k.index()][o as usize]
    }

    /// `t[k][0] + t[k][1]`.
    pub fn trace(&self, k: PauliIndex) -> f64 {
        self.t[k.index()][0] + self.t[k.index()][1]
    }

    /// `t[k][0] − t[k][1]`, the contribution to a ±1 correlator.
    pub fn signed(&self, k: PauliIndex) -> f64 {
        self.t[k.index()][0] - self.t[k.index()][1]
    }
}

fn check_outcome(o: u8) -> Result<()> {
    if o > 1 {
        return Err(Error::Domain(format!("outcome must be 0 or 1, got {o}")));
    }
    Ok(())
}

/// `B_o(μ) = ½ Σ_{|ℓ|≤l_max} [erf(a⁺) − erf(a⁻)]` with
/// `a^± = ((2ℓ + o ± ½)√π − μ)/(√2 σ)`.
pub fn binning_function(mu: f64, sigma: f64, o: u8, l_max: u32) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("peak width must be positive, got {sigma}")));
    }
    check_outcome(o)?;
    Ok(bin_mass(mu, sigma, o, l_max))
}

#[inline]
fn bin_mass(mu: f64, sigma: f64, o: u8, l_max: u32) -> f64 {
    let l_max = l_max as i64;
    let mut acc = CompensatedSum::new();
    for l in -l_max..=l_max {
        let centre = (2 * l + o as i64) as f64 * SQRT_PI;
        acc.add(gaussian_interval_mass(mu, sigma, centre - 0.5 * SQRT_PI, centre + 0.5 * SQRT_PI));
    }
    acc.value()
}

/// Smallest `l_max` whose bin window `[−(2 l_max)√π, (2 l_max)√π]` keeps
/// every Gaussian with `|μ| ≤ mu_max` inside up to mass `site_tol`.
pub fn bin_window(mu_max: f64, sigma: f64, site_tol: f64) -> u32 {
    let w = gaussian_tail_halfwidth(sigma, site_tol);
    ((mu_max.abs() + w) / (2.0 * SQRT_PI)).ceil() as u32 + 1
}

/// `B_o` has period `2√π` in `μ`; fold into `[−√π, √π)`.
#[inline]
fn fold_mean(mu: f64) -> f64 {
    let period = 2.0 * SQRT_PI;
    mu - period * (mu / period).round()
}

/// `μ = √η sech ε (√π/2)(m1 cos θ + m2 sin θ)`, before the outcome gain.
pub fn projected_mean(
    params: &FiniteEnergyParams,
    setting: &MeasurementSetting,
    m: LatticeSite,
    eta: f64,
) -> f64 {
    let (s, c) = setting.theta.sin_cos();
    eta.sqrt() * params.lattice_scale * 0.5 * SQRT_PI * (m.m1 as f64 * c + m.m2 as f64 * s)
}

/// `σ̃`, the peak width seen through the channel.
pub fn effective_sigma(params: &FiniteEnergyParams, channel: &NoiseChannel) -> f64 {
    channel.effective_variance(params).sqrt()
}

/// Everything needed to evaluate overlaps for one `(params, channel, tol)`.
#[derive(Debug, Clone)]
pub struct OverlapEngine {
    params: FiniteEnergyParams,
    channel: NoiseChannel,
    radius: u32,
    sigma: f64,
    site_tol: f64,
}

impl OverlapEngine {
    pub fn new(params: FiniteEnergyParams, channel: NoiseChannel, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let radius = truncation_radius(&params, tol);
        if radius > 20_000 {
            return Err(Error::Numerical(format!(
                "lattice truncation radius {radius} needed for tol {tol:e} at {} dB",
                params.r_db
            )));
        }
        Ok(Self {
            params,
            channel,
            radius,
            sigma: effective_sigma(&params, &channel),
            site_tol: tol / (10.0 * envelope_mass_bound(&params)),
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Bin window for means already folded into `[−√π, √π)`.
    fn l_max(&self, setting: &MeasurementSetting) -> u32 {
        bin_window(SQRT_PI, setting.scale * self.sigma, self.site_tol)
    }

    /// `[t_{k,0}, t_{k,1}]` for one Pauli.
    pub fn overlap_pair(&self, k: PauliIndex, setting: &MeasurementSetting) -> [f64; 2] {
        let l_max = self.l_max(setting);
        let sigma = setting.scale * self.sigma;
        let mut acc = [CompensatedSum::new(), CompensatedSum::new()];
        for m in lattice_sites(k, self.radius) {
            let weight = envelope_weight(&self.params, m) * sign_unchecked(k, m);
            let mu = fold_mean(setting.scale * projected_mean(&self.params, setting, m, self.channel.eta));
            acc[0].add(weight * bin_mass(mu, sigma, 0, l_max));
            acc[1].add(weight * bin_mass(mu, sigma, 1, l_max));
        }
        let g = k.global_sign();
        [g * acc[0].value(), g * acc[1].value()]
    }

    pub fn table(&self, setting: &MeasurementSetting) -> OverlapTable {
        let mut t = [[0.0; 2]; 4];
        for k in PauliIndex::ALL {
            t[k.index()] = self.overlap_pair(k, setting);
        }
        OverlapTable {
            setting: *setting,
            t,
        }
    }
}

/// `t_{k,o}` for one setting and channel, truncated to error below `tol`.
pub fn single_mode_overlap(
    k: PauliIndex,
    o: u8,
    setting: &MeasurementSetting,
    params: &FiniteEnergyParams,
    channel: &NoiseChannel,
    tol: f64,
) -> Result<f64> {
    check_outcome(o)?;
    let engine = OverlapEngine::new(*params, *channel, tol)?;
    Ok(engine.overlap_pair(k, setting)[o as usize])
}

/// All eight overlaps of one setting.
pub fn overlap_table(
    setting: &MeasurementSetting,
    params: &FiniteEnergyParams,
    channel: &NoiseChannel,
    tol: f64,
) -> Result<OverlapTable> {
    Ok(OverlapEngine::new(*params, *channel, tol)?.table(setting))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkp::pauli_trace;
    use proptest::prelude::*;

    #[test]
    fn binning_function_examples() {
        for &(mu, sigma) in &[(0.0, 0.3), (1.3, 0.05), (-7.2, 1.1), (40.0, 0.2)] {
            let l = bin_window(mu, sigma, 1e-16);
            let b0 = binning_function(mu, sigma, 0, l).unwrap();
            let b1 = binning_function(mu, sigma, 1, l).unwrap();
            assert!((b0 + b1 - 1.0).abs() < 5e-14, "{mu} {sigma}");
        }
        let b0 = binning_function(0.0, 1e-4, 0, 3).unwrap();
        assert!((b0 - 1.0).abs() < 1e-15);
        assert!(binning_function(0.0, 1e-4, 1, 3).unwrap() < 1e-15);
        let edge = 0.5 * SQRT_PI;
        let b0 = binning_function(edge, 0.4, 0, 5).unwrap();
        let b1 = binning_function(edge, 0.4, 1, 5).unwrap();
        assert!((b0 - 0.5).abs() < 1e-15 && (b1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn binning_rejects_bad_width() {
        assert!(binning_function(0.0, 0.0, 0, 3).is_err());
        assert!(binning_function(0.0, -1.0, 1, 3).is_err());
        assert!(binning_function(0.0, 1.0, 2, 3).is_err());
    }

    #[test]
    fn projected_mean_examples() {
        let p = FiniteEnergyParams::from_db(10.0).unwrap();
        let set = MeasurementSetting::angle(0.7).unwrap();
        assert_eq!(projected_mean(&p, &set, LatticeSite::new(0, 0), 0.6), 0.0);
        let mu = projected_mean(&p, &MeasurementSetting::Z, LatticeSite::new(2, 0), 1.0);
        assert!((mu - p.lattice_scale * SQRT_PI).abs() < 1e-15);
        let a = projected_mean(&p, &MeasurementSetting::X, LatticeSite::new(3, -5), 1.0);
        let b = projected_mean(&p, &MeasurementSetting::Z, LatticeSite::new(-5, 3), 1.0);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn effective_sigma_examples() {
        let p = FiniteEnergyParams::from_db(10.0).unwrap();
        let s = effective_sigma(&p, &NoiseChannel::ideal());
        assert!((s - p.sigma()).abs() < 1e-16);
        let ch = NoiseChannel::new(0.8, 0.0).unwrap();
        assert!((effective_sigma(&p, &ch).powi(2) - 0.14).abs() < 1e-15);
        let mut last = 0.0;
        for n in [0.0, 0.1, 0.5, 2.0] {
            let v = effective_sigma(&p, &NoiseChannel::new(0.9, n).unwrap());
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn channel_validation() {
        assert!(NoiseChannel::new(0.0, 0.0).is_err());
        assert!(NoiseChannel::new(1.1, 0.0).is_err());
        assert!(NoiseChannel::new(0.5, -0.1).is_err());
    }

    #[test]
    fn setting_angle_normalized() {
        let s = MeasurementSetting::angle(-FRAC_PI_2).unwrap();
        assert!((s.theta - 1.5 * PI).abs() < 1e-15);
        assert!(MeasurementSetting::custom(0.0, 0.0).is_err());
    }

    #[test]
    fn ideal_limit_pauli_readout() {
        // At 20 dB, Z reads Z, X reads X, and the gained diagonal reads −Y.
        let p = FiniteEnergyParams::from_db(20.0).unwrap();
        let ch = NoiseChannel::ideal();
        let tr0 = pauli_trace(PauliIndex::I, &p, 1e-12);
        for (setting, k, sign) in [
            (MeasurementSetting::Z, PauliIndex::Z, 1.0),
            (MeasurementSetting::X, PauliIndex::X, 1.0),
            (MeasurementSetting::Y, PauliIndex::Y, -1.0),
            (MeasurementSetting::custom(0.75 * PI, SQRT_2).unwrap(), PauliIndex::Y, 1.0),
        ] {
            let tab = overlap_table(&setting, &p, &ch, 1e-12).unwrap();
            for other in PauliIndex::ALL {
                let v = tab.signed(other) / tr0;
                let want = if other == k { sign } else { 0.0 };
                assert!((v - want).abs() < 1e-6, "{:?} {other}: {v}", setting.label);
            }
        }
    }

    #[test]
    fn rotation_consistency_x_in_p_mirrors_z_in_q() {
        let p = FiniteEnergyParams::from_db(15.0).unwrap();
        let ch = NoiseChannel::ideal();
        for o in 0..2u8 {
            let a = single_mode_overlap(PauliIndex::X, o, &MeasurementSetting::X, &p, &ch, 1e-12).unwrap();
            let b = single_mode_overlap(PauliIndex::Z, o, &MeasurementSetting::Z, &p, &ch, 1e-12).unwrap();
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn tighter_truncation_changes_little() {
        let p = FiniteEnergyParams::from_db(12.0).unwrap();
        let ch = NoiseChannel::new(0.85, 0.05).unwrap();
        let set = MeasurementSetting::angle(0.4).unwrap();
        let coarse = overlap_table(&set, &p, &ch, 1e-10).unwrap();
        let fine = overlap_table(&set, &p, &ch, 1e-14).unwrap();
        for k in 0..4 {
            for o in 0..2 {
                assert!((coarse.t[k][o] - fine.t[k][o]).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bins_are_complementary_and_bounded(mu in -30.0f64..30.0, sigma in 0.01f64..3.0) {
            let l = bin_window(mu, sigma, 1e-17);
            let b0 = binning_function(mu, sigma, 0, l).unwrap();
            let b1 = binning_function(mu, sigma, 1, l).unwrap();
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&b0));
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&b1));
            prop_assert!((b0 + b1 - 1.0).abs() < 1e-14);
        }

        #[test]
        fn bins_are_periodic(mu in -10.0f64..10.0, sigma in 0.01f64..2.0, o in 0u8..2) {
            let l = bin_window(mu.abs() + 2.0 * SQRT_PI, sigma, 1e-16);
            let a = binning_function(mu, sigma, o, l).unwrap();
            let b = binning_function(mu + 2.0 * SQRT_PI, sigma, o, l).unwrap();
            prop_assert!((a - b).abs() < 1e-13);
        }

        #[test]
        fn overlap_trace_is_channel_invariant(
            theta in 0.0f64..6.3, db in 3.0f64..18.0, eta in 0.5f64..1.0, n_th in 0.0f64..0.5, k in 0u8..4
        ) {
            let p = FiniteEnergyParams::from_db(db).unwrap();
            let ch = NoiseChannel::new(eta, n_th).unwrap();
            let k = PauliIndex::new(k).unwrap();
            let set = MeasurementSetting::angle(theta).unwrap();
            let pair = OverlapEngine::new(p, ch, 1e-12).unwrap().overlap_pair(k, &set);
            let tr = pauli_trace(k, &p, 1e-12);
            prop_assert!((pair[0] + pair[1] - tr).abs() < 1e-10);
        }
    }
}
