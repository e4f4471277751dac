//! Series overlaps against the Fock-space oracle.

use gkp_bell::oracle::{
    apply_pure_loss, convolved_bin_probabilities, filtered_pauli_operators, oracle_bin_probabilities, suggested_n_max,
};
use gkp_bell::overlap::single_mode_overlap;
use gkp_bell::{FiniteEnergyParams, MeasurementSetting, NoiseChannel, PauliIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub eta: f64,
    #[serde(default)]
    pub n_th: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub r_db: Vec<f64>,
    pub channels: Vec<ChannelSpec>,
    /// `(theta, scale)` pairs.
    pub settings: Vec<(f64, f64)>,
    /// Allowed deviation on the lossless channel.
    pub tol_ideal: f64,
    /// Allowed deviation once loss or thermal noise is on.
    pub tol_noisy: f64,
    pub lattice_tol: f64,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        let quarter = std::f64::consts::FRAC_PI_4;
        Self {
            r_db: vec![5.0, 10.0, 15.0],
            channels: vec![
                ChannelSpec { eta: 1.0, n_th: 0.0 },
                ChannelSpec { eta: 0.8, n_th: 0.0 },
                ChannelSpec { eta: 0.8, n_th: 0.1 },
            ],
            settings: vec![
                (0.0, 1.0),
                (quarter, 1.0),
                (2.0 * quarter, 1.0),
                (quarter, std::f64::consts::SQRT_2),
            ],
            tol_ideal: 1e-6,
            tol_noisy: 1e-5,
            lattice_tol: 1e-13,
        }
    }
}

/// Worst deviation over all `(k, o)` at one squeezing, channel and setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheckRow {
    pub r_db: f64,
    pub eta: f64,
    pub n_th: f64,
    pub theta: f64,
    pub scale: f64,
    pub n_max: usize,
    pub max_abs_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check_one(r_db: f64, cfg: &OracleCheckConfig) -> CliResult<Vec<OracleCheckRow>> {
    let params = FiniteEnergyParams::from_db(r_db)?;
    let n_max = suggested_n_max(&params);
    let ops = filtered_pauli_operators(&params, n_max)?;
    let mut rows = Vec::new();
    for ch in &cfg.channels {
        let channel = NoiseChannel::new(ch.eta, ch.n_th)?;
        let ideal = ch.eta == 1.0 && ch.n_th == 0.0;
        let tolerance = if ideal { cfg.tol_ideal } else { cfg.tol_noisy };
        let lossy = ops
            .iter()
            .map(|op| apply_pure_loss(op, ch.eta))
            .collect::<gkp_bell::Result<Vec<_>>>()?;
        for &(theta, scale) in &cfg.settings {
            let setting = MeasurementSetting::custom(theta, scale)?;
            let mut worst: f64 = 0.0;
            for k in PauliIndex::ALL {
                let oracle = if ideal {
                    oracle_bin_probabilities(&ops[k.index()], &setting)?
                } else {
                    convolved_bin_probabilities(&lossy[k.index()], ch.eta, ch.n_th, &setting)?
                };
                for o in 0..2u8 {
                    let series = single_mode_overlap(k, o, &setting, &params, &channel, cfg.lattice_tol)?;
                    worst = worst.max((series - oracle[o as usize]).abs());
                }
            }
            rows.push(OracleCheckRow {
                r_db,
                eta: ch.eta,
                n_th: ch.n_th,
                theta,
                scale,
                n_max,
                max_abs_dev: worst,
                tolerance,
                pass: worst < tolerance,
            });
        }
    }
    Ok(rows)
}

pub fn run_oracle_check(cfg: &OracleCheckConfig, workers: Option<usize>) -> CliResult<Vec<OracleCheckRow>> {
    if cfg.r_db.is_empty() || cfg.channels.is_empty() || cfg.settings.is_empty() {
        return Err(CliError::Config("oracle check needs squeezings, channels and settings".into()));
    }
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w.max(1));
    }
    let pool = b.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let per_db: Vec<CliResult<Vec<OracleCheckRow>>> = pool.install(|| cfg.r_db.par_iter().map(|&r| check_one(r, cfg)).collect());
    let mut rows = Vec::new();
    for r in per_db {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn oracle_csv(rows: &[OracleCheckRow]) -> String {
    let mut out = String::from("r_db,eta,n_th,theta,scale,n_max,max_abs_dev,tolerance,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:e},{:e},{}\n",
            r.r_db, r.eta, r.n_th, r.theta, r.scale, r.n_max, r.max_abs_dev, r.tolerance, if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}
