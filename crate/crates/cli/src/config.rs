//! JSON run configuration.

use std::path::{Path, PathBuf};

use gkp_bell::behavior::SettingScheme;
use gkp_bell::logical::{ghz_coefficients, w_coefficients};
use gkp_bell::overlap::SettingLabel;
use gkp_bell::{LogicalState, MeasurementSetting};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Dense behavior tables are kept below `2^18` entries.
pub const MAX_BEHAVIOR_PARTIES: usize = 9;
/// The correlator-only MABK route goes further.
pub const MAX_MABK_PARTIES: usize = 12;
/// Deterministic strategies allowed in a distance LP.
pub const MAX_VERTICES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Ghz,
    W,
    /// Path to a coefficient file `{"n": .., "coeffs": [{"k": .., "c": ..}]}`.
    Custom(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepFunctional {
    Mabk,
    Cabello,
    Chsh,
    Distance,
}

impl SweepFunctional {
    pub fn name(self) -> &'static str {
        match self {
            SweepFunctional::Mabk => "mabk",
            SweepFunctional::Cabello => "cabello",
            SweepFunctional::Chsh => "chsh",
            SweepFunctional::Distance => "distance",
        }
    }
}

/// A list of values, one value, or an inclusive `min..=max` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { min: f64, max: f64, step: f64 },
    Values(Vec<f64>),
    Single(f64),
}

impl Grid {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        match self {
            Grid::Single(v) => Ok(vec![*v]),
            Grid::Values(v) => {
                if v.is_empty() {
                    return Err(CliError::Config("grid has no values".into()));
                }
                Ok(v.clone())
            }
            Grid::Range { min, max, step } => {
                if !(step.is_finite() && *step > 0.0 && min.is_finite() && max.is_finite() && max >= min) {
                    return Err(CliError::Config(format!(
                        "grid range needs finite min <= max and step > 0, got {min}..{max} step {step}"
                    )));
                }
                let count = ((max - min) / step + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(CliError::Config(format!("grid with {count} points")));
                }
                // snap to 1e-9 so that 0.1-type steps print cleanly
                Ok((0..count)
                    .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
                    .collect())
            }
        }
    }

    pub fn bounds(&self) -> CliResult<(f64, f64)> {
        let p = self.points()?;
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((lo, hi))
    }
}

/// A labelled Pauli readout or a raw angle with optional outcome gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingSpec {
    Label(String),
    Angle {
        theta: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SettingSpec {
    pub fn resolve(&self) -> CliResult<MeasurementSetting> {
        match self {
            SettingSpec::Label(l) => {
                let label = match l.to_ascii_uppercase().as_str() {
                    "X" => SettingLabel::X,
                    "Y" => SettingLabel::Y,
                    "Z" => SettingLabel::Z,
                    _ => return Err(CliError::Config(format!("unknown setting label {l:?}"))),
                };
                MeasurementSetting::from_label(label)
                    .ok_or_else(|| CliError::Config(format!("setting {l:?} has no fixed angle")))
            }
            SettingSpec::Angle { theta, scale } => Ok(MeasurementSetting::custom(*theta, *scale)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Truncation of the lattice and error-function series.
    #[serde(default = "default_lattice")]
    pub lattice: f64,
    /// Simplex feasibility and reduced-cost tolerance.
    #[serde(default = "default_lp")]
    pub lp: f64,
    /// Width of the final critical-squeezing bracket in dB.
    #[serde(default = "default_bisection")]
    pub bisection_db: f64,
    /// Step of the coarse critical-squeezing scan in dB.
    #[serde(default = "default_scan")]
    pub scan_db: f64,
}

fn default_lattice() -> f64 {
    gkp_bell::DEFAULT_TOL
}
fn default_lp() -> f64 {
    1e-9
}
fn default_bisection() -> f64 {
    0.01
}
fn default_scan() -> f64 {
    0.25
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lattice: default_lattice(),
            lp: default_lp(),
            bisection_db: default_bisection(),
            scan_db: default_scan(),
        }
    }
}

fn default_inputs() -> usize {
    2
}
fn default_eta() -> Grid {
    Grid::Single(1.0)
}
fn default_nth() -> Grid {
    Grid::Single(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub state: StateSpec,
    pub n: usize,
    #[serde(default = "default_inputs")]
    pub inputs: usize,
    pub functional: SweepFunctional,
    pub r_db: Grid,
    #[serde(default = "default_eta")]
    pub eta: Grid,
    #[serde(default = "default_nth")]
    pub n_th: Grid,
    /// Per-input settings shared by every party; defaults depend on the
    /// functional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Vec<SettingSpec>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let c: SweepConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.n < 2 {
            return bad(format!("need at least 2 parties, got {}", self.n));
        }
        let cap = match self.functional {
            SweepFunctional::Mabk => MAX_MABK_PARTIES,
            SweepFunctional::Chsh => 2,
            _ => MAX_BEHAVIOR_PARTIES,
        };
        if self.n > cap {
            return bad(format!("{} supports at most {cap} parties, got {}", self.functional.name(), self.n));
        }
        match self.functional {
            SweepFunctional::Distance => {
                if !(2..=3).contains(&self.inputs) {
                    return bad(format!("distance needs 2 or 3 inputs, got {}", self.inputs));
                }
                let vertices = 1usize.checked_shl((self.inputs * self.n) as u32).unwrap_or(usize::MAX);
                if vertices > MAX_VERTICES {
                    return bad(format!("{vertices} deterministic strategies exceed the LP cap {MAX_VERTICES}"));
                }
            }
            f if self.inputs != 2 => {
                return bad(format!("{} uses 2 inputs, got {}", f.name(), self.inputs));
            }
            _ => {}
        }
        if let Some(s) = &self.settings {
            if s.len() != self.inputs {
                return bad(format!("{} settings given for {} inputs", s.len(), self.inputs));
            }
            if self.functional == SweepFunctional::Cabello {
                return bad("the Cabello functional fixes its settings to (Z, X)".into());
            }
            for spec in s {
                spec.resolve()?;
            }
        }
        for r in self.r_db.points()? {
            if !(r.is_finite() && r > 0.0) {
                return bad(format!("squeezing must be positive, got {r} dB"));
            }
        }
        for e in self.eta.points()? {
            if !(e > 0.0 && e <= 1.0) {
                return bad(format!("transmissivity must lie in (0, 1], got {e}"));
            }
        }
        for t in self.n_th.points()? {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("thermal occupation must be >= 0, got {t}"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [("lattice", t.lattice), ("lp", t.lp), ("bisection_db", t.bisection_db), ("scan_db", t.scan_db)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Resolves the logical state, reading the coefficient file if needed.
    pub fn logical_state(&self, base: Option<&Path>) -> CliResult<LogicalState> {
        let state = match &self.state {
            StateSpec::Ghz => ghz_coefficients(self.n)?,
            StateSpec::W => w_coefficients(self.n)?,
            StateSpec::Custom(path) => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full).map_err(|e| CliError::io(&full, e))?;
                LogicalState::from_json(&text)?
            }
        };
        if state.n_parties() != self.n {
            return Err(CliError::Config(format!(
                "state has {} parties but the config says {}",
                state.n_parties(),
                self.n
            )));
        }
        Ok(state)
    }

    pub fn scheme(&self) -> CliResult<SettingScheme> {
        if let Some(specs) = &self.settings {
            let s = specs.iter().map(SettingSpec::resolve).collect::<CliResult<Vec<_>>>()?;
            return Ok(SettingScheme::uniform(self.n, s)?);
        }
        let scheme = match (self.functional, self.inputs, &self.state) {
            (SweepFunctional::Mabk, ..) => SettingScheme::mabk(self.n)?,
            (SweepFunctional::Cabello, ..) => SettingScheme::cabello(self.n)?,
            (SweepFunctional::Chsh, ..) => SettingScheme::uniform(self.n, vec![MeasurementSetting::Z, MeasurementSetting::X])?,
            (SweepFunctional::Distance, 3, _) => SettingScheme::pauli_triple(self.n)?,
            (SweepFunctional::Distance, _, StateSpec::W) => SettingScheme::cabello(self.n)?,
            (SweepFunctional::Distance, ..) => SettingScheme::mabk(self.n)?,
        };
        Ok(scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SweepConfig {
        SweepConfig::from_json(r#"{"state":"ghz","n":3,"functional":"mabk","r_db":{"min":5,"max":6,"step":0.25}}"#).unwrap()
    }

    #[test]
    fn defaults_and_grid() {
        let c = base();
        assert_eq!(c.inputs, 2);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.r_db.points().unwrap(), vec![5.0, 5.25, 5.5, 5.75, 6.0]);
        assert_eq!(c.eta.points().unwrap(), vec![1.0]);
        let g = Grid::Range { min: 0.0, max: 0.3, step: 0.1 };
        assert_eq!(g.points().unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
    }

    #[test]
    fn json_round_trip() {
        let mut c = base();
        c.settings = Some(vec![SettingSpec::Label("Y".into()), SettingSpec::Angle { theta: 0.3, scale: 1.0 }]);
        c.state = StateSpec::Custom("state.json".into());
        let back = SweepConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"state":"ghz","n":1,"functional":"mabk","r_db":5}"#,
            r#"{"state":"ghz","n":3,"functional":"chsh","r_db":5}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":[]}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":-1}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":5,"eta":1.5}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":5,"inputs":3}"#,
            r#"{"state":"w","n":5,"functional":"distance","inputs":3,"r_db":5}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":5,"bogus":1}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":5,"settings":["Q","X"]}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":{"min":5,"max":4,"step":1}}"#,
            r#"{"state":"ghz","n":3,"functional":"mabk","r_db":5,"tolerances":{"lp":0}}"#,
        ] {
            let e = SweepConfig::from_json(text).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{text}");
        }
    }

    #[test]
    fn default_schemes() {
        let mut c = base();
        c.functional = SweepFunctional::Distance;
        c.inputs = 3;
        assert_eq!(c.scheme().unwrap().inputs(), 3);
        c.inputs = 2;
        c.state = StateSpec::W;
        assert_eq!(c.scheme().unwrap().setting(0, 0), &MeasurementSetting::Z);
    }
}
