//! Grid sweeps and the critical-squeezing search.

use std::path::Path;

use gkp_bell::behavior::{assemble_behavior, assemble_correlators, SettingScheme};
use gkp_bell::bell::{cabello_value, chsh_value, mabk_from_correlators, VIOLATION_GUARD};
use gkp_bell::lp::SimplexOptions;
use gkp_bell::polytope::{distance_to_vertices_with, enumerate_deterministic_behaviors, LpStatus, VertexSet};
use gkp_bell::{FiniteEnergyParams, LogicalState, NoiseChannel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{SweepConfig, SweepFunctional};
use crate::error::{CliError, CliResult};

/// One functional evaluated at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r_db: f64,
    pub eta: f64,
    pub n_th: f64,
    pub n: usize,
    pub inputs: usize,
    pub functional: SweepFunctional,
    /// Bell value, or the raw 1-norm distance.
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    /// Distance divided by the number of setting strings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_per_setting: Option<f64>,
    pub status: String,
}

/// Everything fixed across a sweep: state, settings and the vertex set.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub functional: SweepFunctional,
    pub state: LogicalState,
    pub scheme: SettingScheme,
    pub lattice_tol: f64,
    lp: SimplexOptions,
    vertices: Option<VertexSet>,
}

impl Evaluator {
    pub fn new(functional: SweepFunctional, state: LogicalState, scheme: SettingScheme, lattice_tol: f64, lp_tol: f64) -> CliResult<Self> {
        if state.n_parties() != scheme.n_parties() {
            return Err(CliError::Config("state and settings disagree on the party count".into()));
        }
        let vertices = match functional {
            SweepFunctional::Distance => Some(enumerate_deterministic_behaviors(state.n_parties(), scheme.inputs(), 2)?),
            _ => None,
        };
        let lp = SimplexOptions {
            tol: lp_tol,
            ..SimplexOptions::default()
        };
        Ok(Self {
            functional,
            state,
            scheme,
            lattice_tol,
            lp,
            vertices,
        })
    }

    /// Builds the evaluator described by a config; relative state paths
    /// resolve against `base`.
    pub fn from_config(config: &SweepConfig, base: Option<&Path>) -> CliResult<Self> {
        config.validate()?;
        Self::new(
            config.functional,
            config.logical_state(base)?,
            config.scheme()?,
            config.tolerances.lattice,
            config.tolerances.lp,
        )
    }

    pub fn n_parties(&self) -> usize {
        self.state.n_parties()
    }

    /// Local bound of the functional; zero for the distance.
    pub fn bound(&self) -> f64 {
        match self.functional {
            SweepFunctional::Mabk => (1u64 << (self.n_parties() / 2)) as f64,
            SweepFunctional::Chsh => 2.0,
            SweepFunctional::Cabello | SweepFunctional::Distance => 0.0,
        }
    }

    /// `(value, distance per setting)` at one point.
    pub fn value(&self, r_db: f64, eta: f64, n_th: f64) -> CliResult<(f64, Option<f64>)> {
        let params = FiniteEnergyParams::from_db(r_db)?;
        let channel = NoiseChannel::new(eta, n_th)?;
        let tol = self.lattice_tol;
        match self.functional {
            SweepFunctional::Mabk => {
                let e = assemble_correlators(&self.state, &self.scheme, &params, &channel, tol)?;
                Ok((mabk_from_correlators(&e)?.value, None))
            }
            SweepFunctional::Cabello => {
                let b = assemble_behavior(&self.state, &self.scheme, &params, &channel, tol)?;
                Ok((cabello_value(&b, self.scheme.kind())?.value, None))
            }
            SweepFunctional::Chsh => {
                let b = assemble_behavior(&self.state, &self.scheme, &params, &channel, tol)?;
                Ok((chsh_value(&b)?.value, None))
            }
            SweepFunctional::Distance => {
                let b = assemble_behavior(&self.state, &self.scheme, &params, &channel, tol)?;
                let vertices = self.vertices.as_ref().expect("vertices built for distance");
                let d = distance_to_vertices_with(&b, vertices, &self.lp)?;
                if d.status != LpStatus::Optimal {
                    return Err(CliError::Numerical(format!(
                        "distance LP {}: {}",
                        d.status,
                        d.detail.unwrap_or_default()
                    )));
                }
                Ok((d.distance, Some(d.distance_per_setting)))
            }
        }
    }

    /// Evaluates one point; failures land in the status column.
    pub fn row(&self, r_db: f64, eta: f64, n_th: f64) -> SweepRow {
        let bound = self.bound();
        let (value, per_setting, status) = match self.value(r_db, eta, n_th) {
            Ok((v, d)) => (v, d, "ok".to_string()),
            Err(e) => (f64::NAN, None, format!("error: {e}")),
        };
        SweepRow {
            r_db,
            eta,
            n_th,
            n: self.n_parties(),
            inputs: self.scheme.inputs(),
            functional: self.functional,
            value,
            bound,
            violated: value > bound + VIOLATION_GUARD,
            distance_per_setting: per_setting.or(match self.functional {
                SweepFunctional::Distance => Some(f64::NAN),
                _ => None,
            }),
            status,
        }
    }
}

fn pool(workers: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("worker count must be positive".into()));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// `(r_db, eta, n_th)` in row order: squeezing slowest, occupation fastest.
pub fn grid_points(config: &SweepConfig) -> CliResult<Vec<(f64, f64, f64)>> {
    let (rs, es, ts) = (config.r_db.points()?, config.eta.points()?, config.n_th.points()?);
    let mut out = Vec::with_capacity(rs.len() * es.len() * ts.len());
    for &r in &rs {
        for &e in &es {
            for &t in &ts {
                out.push((r, e, t));
            }
        }
    }
    Ok(out)
}

/// One row per grid point in a fixed order, whatever the worker count.
pub fn run_sweep(config: &SweepConfig, base: Option<&Path>, workers: Option<usize>) -> CliResult<Vec<SweepRow>> {
    let evaluator = Evaluator::from_config(config, base)?;
    let points = grid_points(config)?;
    let rows = pool(workers)?.install(|| {
        points
            .par_iter()
            .map(|&(r, e, t)| evaluator.row(r, e, t))
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalStatus {
    Found,
    NoneInRange,
    /// Already violated at the lowest squeezing scanned.
    ViolatedAtMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSqueezingResult {
    pub functional: SweepFunctional,
    pub n: usize,
    pub eta: f64,
    pub n_th: f64,
    pub status: CriticalStatus,
    /// Midpoint of the final bracket.
    pub r_crit: Option<f64>,
    /// `(lower, upper)` with the value at most the bound at `lower` and
    /// above it at `upper`.
    pub bracket: Option<(f64, f64)>,
    pub range: (f64, f64),
}

impl CriticalSqueezingResult {
    pub fn r_crit_label(&self) -> String {
        match (self.status, self.r_crit) {
            (CriticalStatus::Found, Some(r)) => format!("{r}"),
            (CriticalStatus::ViolatedAtMin, _) => "below-range".into(),
            _ => "none-in-range".into(),
        }
    }
}

/// Coarse scan for the first crossing into violation, then bisection down
/// to `tol_db`.
pub fn critical_squeezing(
    evaluator: &Evaluator,
    eta: f64,
    n_th: f64,
    range: (f64, f64),
    scan_db: f64,
    tol_db: f64,
) -> CliResult<CriticalSqueezingResult> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && scan_db > 0.0 && tol_db > 0.0) {
        return Err(CliError::Config(format!(
            "critical squeezing needs 0 < min < max and positive steps, got {lo}..{hi}"
        )));
    }
    let bound = evaluator.bound();
    let gap = |r: f64| -> CliResult<f64> { Ok(evaluator.value(r, eta, n_th)?.0 - bound) };
    let violated = |g: f64| g > VIOLATION_GUARD;
    let mut result = CriticalSqueezingResult {
        functional: evaluator.functional,
        n: evaluator.n_parties(),
        eta,
        n_th,
        status: CriticalStatus::NoneInRange,
        r_crit: None,
        bracket: None,
        range,
    };
    let steps = ((hi - lo) / scan_db - 1e-9).ceil().max(1.0) as usize;
    let at = |i: usize| if i == steps { hi } else { lo + i as f64 * scan_db };
    let mut prev = at(0);
    if violated(gap(prev)?) {
        result.status = CriticalStatus::ViolatedAtMin;
        return Ok(result);
    }
    for i in 1..=steps {
        let r = at(i);
        if violated(gap(r)?) {
            let (mut a, mut b) = (prev, r);
            while b - a > tol_db {
                let m = 0.5 * (a + b);
                if violated(gap(m)?) {
                    b = m;
                } else {
                    a = m;
                }
            }
            result.status = CriticalStatus::Found;
            result.r_crit = Some(0.5 * (a + b));
            result.bracket = Some((a, b));
            return Ok(result);
        }
        prev = r;
    }
    Ok(result)
}

/// Critical squeezing for every `(eta, n_th)` of the config, over the
/// config's squeezing range.
pub fn run_critical(config: &SweepConfig, base: Option<&Path>, workers: Option<usize>) -> CliResult<Vec<CriticalSqueezingResult>> {
    if config.functional == SweepFunctional::Distance {
        return Err(CliError::Config("critical squeezing needs a Bell functional".into()));
    }
    let evaluator = Evaluator::from_config(config, base)?;
    let range = config.r_db.bounds()?;
    let mut channels = Vec::new();
    for e in config.eta.points()? {
        for t in config.n_th.points()? {
            channels.push((e, t));
        }
    }
    let tol = &config.tolerances;
    pool(workers)?.install(|| {
        channels
            .par_iter()
            .map(|&(e, t)| critical_squeezing(&evaluator, e, t, range, tol.scan_db, tol.bisection_db))
            .collect()
    })
}
