//! The N-party table `p(o|x)` assembled from logical coefficients and
//! single-mode overlaps.
//!
//! Entries are stored densely. Each party contributes one digit
//! `d_j = 2 x_j + o_j` in base `2I`, party 0 most significant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gkp::{pauli_trace, FiniteEnergyParams, PauliIndex};
use crate::logical::LogicalState;
use crate::overlap::{MeasurementSetting, NoiseChannel, OverlapEngine, OverlapTable};

/// Probability tolerances used by the post-assembly checks.
pub const CONSISTENCY_TOL: f64 = 1e-9;
/// Largest dense table, `(2I)^N` entries (GHZ/W at N = 9 with I = 2).
pub const DENSE_LIMIT: usize = 1 << 18;
/// Largest coefficient tensor `4^N` handled in correlator-only mode.
pub const CORRELATOR_LIMIT: usize = 1 << 24;

/// Which input convention a scheme follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    Generic,
    /// `x = 0 → Z`, `x = 1 → X` on every party.
    Cabello,
}

/// Per-party settings indexed by input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingScheme {
    settings: Vec<Vec<MeasurementSetting>>,
    kind: SchemeKind,
}

impl SettingScheme {
    pub fn per_party(settings: Vec<Vec<MeasurementSetting>>) -> Result<Self> {
        let n = settings.len();
        if n == 0 {
            return Err(Error::Shape("scheme needs at least one party".into()));
        }
        let inputs = settings[0].len();
        if !(2..=3).contains(&inputs) {
            return Err(Error::Shape(format!("inputs per party must be 2 or 3, got {inputs}")));
        }
        if let Some(j) = settings.iter().position(|s| s.len() != inputs) {
            return Err(Error::Shape(format!(
                "party {j} has {} inputs, party 0 has {inputs}",
                settings[j].len()
            )));
        }
        for s in settings.iter().flatten() {
            if !(s.theta.is_finite() && s.scale.is_finite() && s.scale > 0.0) {
                return Err(Error::Domain(format!("invalid setting {s:?}")));
            }
        }
        Ok(Self {
            settings,
            kind: SchemeKind::Generic,
        })
    }

    /// Every party uses the same list.
    pub fn uniform(n: usize, settings: Vec<MeasurementSetting>) -> Result<Self> {
        Self::per_party(vec![settings; n])
    }

    /// `x = 0 → Y`, `x = 1 → X`.
    pub fn mabk(n: usize) -> Result<Self> {
        Self::uniform(n, vec![MeasurementSetting::Y, MeasurementSetting::X])
    }

    /// `x = 0 → Z`, `x = 1 → X`, tagged for the Cabello functional.
    pub fn cabello(n: usize) -> Result<Self> {
        let mut s = Self::uniform(n, vec![MeasurementSetting::Z, MeasurementSetting::X])?;
        s.kind = SchemeKind::Cabello;
        Ok(s)
    }

    /// `x = 0, 1, 2 → X, Y, Z`.
    pub fn pauli_triple(n: usize) -> Result<Self> {
        Self::uniform(
            n,
            vec![MeasurementSetting::X, MeasurementSetting::Y, MeasurementSetting::Z],
        )
    }

    pub fn n_parties(&self) -> usize {
        self.settings.len()
    }

    pub fn inputs(&self) -> usize {
        self.settings[0].len()
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn setting(&self, party: usize, x: usize) -> &MeasurementSetting {
        &self.settings[party][x]
    }
}

/// Mixed-radix digits of `index`, most significant first.
fn digits(mut index: usize, radix: usize, n: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for slot in out.iter_mut().rev() {
        *slot = (index % radix) as u8;
        index /= radix;
    }
    out
}

fn digit_string(d: &[u8]) -> String {
    d.iter().map(|v| char::from(b'0' + v)).collect()
}

fn parse_digits(s: &str, radix: u8) -> Result<Vec<u8>> {
    s.bytes()
        .map(|b| match b.checked_sub(b'0') {
            Some(v) if v < radix => Ok(v),
            _ => Err(Error::Domain(format!("invalid digit string {s:?}"))),
        })
        .collect()
}

/// Full behavior `p(o|x)` with binary outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    n: usize,
    inputs: usize,
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BehaviorFile {
    n: usize,
    inputs: usize,
    p: BTreeMap<String, f64>,
}

impl Behavior {
    fn check_shape(n: usize, inputs: usize) -> Result<usize> {
        if n == 0 || inputs == 0 {
            return Err(Error::Shape("behavior needs n >= 1 and inputs >= 1".into()));
        }
        (2 * inputs)
            .checked_pow(n as u32)
            .filter(|&len| len <= DENSE_LIMIT)
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "dense behavior with {n} parties and {inputs} inputs exceeds {DENSE_LIMIT} entries"
                ))
            })
    }

    /// Wrap a raw table in the internal index order.
    pub fn from_table(n: usize, inputs: usize, p: Vec<f64>) -> Result<Self> {
        let len = Self::check_shape(n, inputs)?;
        if p.len() != len {
            return Err(Error::Shape(format!("expected {len} entries, got {}", p.len())));
        }
        Ok(Self { n, inputs, p })
    }

    /// Table from `f(o, x)`.
    pub fn from_fn<F: FnMut(&[u8], &[u8]) -> f64>(n: usize, inputs: usize, mut f: F) -> Result<Self> {
        let len = Self::check_shape(n, inputs)?;
        let mut p = vec![0.0; len];
        for (idx, slot) in p.iter_mut().enumerate() {
            let d = digits(idx, 2 * inputs, n);
            let o: Vec<u8> = d.iter().map(|v| v % 2).collect();
            let x: Vec<u8> = d.iter().map(|v| v / 2).collect();
            *slot = f(&o, &x);
        }
        Ok(Self { n, inputs, p })
    }

    pub fn uniform(n: usize, inputs: usize) -> Result<Self> {
        let w = 0.5f64.powi(n as i32);
        Self::from_fn(n, inputs, |_, _| w)
    }

    /// Deterministic local strategy: party `j` answers `responses[j][x_j]`.
    pub fn deterministic(responses: &[Vec<u8>]) -> Result<Self> {
        let n = responses.len();
        let inputs = responses.first().map_or(0, |r| r.len());
        if responses.iter().any(|r| r.len() != inputs || r.iter().any(|&o| o > 1)) {
            return Err(Error::Shape("response functions must share one input count and output bits".into()));
        }
        Self::from_fn(n, inputs, |o, x| {
            let hit = (0..n).all(|j| responses[j][x[j] as usize] == o[j]);
            if hit {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// Raw table in internal order.
    pub fn table(&self) -> &[f64] {
        &self.p
    }

    pub fn index(&self, o: &[u8], x: &[u8]) -> Result<usize> {
        if o.len() != self.n || x.len() != self.n {
            return Err(Error::Shape(format!("strings must have length {}", self.n)));
        }
        let mut idx = 0;
        for (&oj, &xj) in o.iter().zip(x) {
            if oj > 1 || xj as usize >= self.inputs {
                return Err(Error::Domain(format!("outcome {oj} or input {xj} out of range")));
            }
            idx = idx * 2 * self.inputs + 2 * xj as usize + oj as usize;
        }
        Ok(idx)
    }

    pub fn prob(&self, o: &[u8], x: &[u8]) -> Result<f64> {
        Ok(self.p[self.index(o, x)?])
    }

    /// Number of setting strings, `I^N`.
    pub fn n_settings(&self) -> usize {
        self.inputs.pow(self.n as u32)
    }

    /// Setting string of a flat setting index (base `I`, party 0 first).
    pub fn setting_string(&self, xi: usize) -> Vec<u8> {
        digits(xi, self.inputs, self.n)
    }

    /// `p(·|x)` over the `2^N` outcome strings, outcome index base 2.
    pub fn conditional(&self, x: &[u8]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(1 << self.n);
        for oi in 0..(1usize << self.n) {
            let o = digits(oi, 2, self.n);
            out.push(self.prob(&o, x)?);
        }
        Ok(out)
    }

    /// `E(x) = Σ_o (−1)^{Σ o_j} p(o|x)`.
    pub fn full_correlator(&self, x: &[u8]) -> Result<f64> {
        let cond = self.conditional(x)?;
        Ok(cond
            .iter()
            .enumerate()
            .map(|(oi, &v)| if oi.count_ones() % 2 == 0 { v } else { -v })
            .sum())
    }

    /// All full correlators, indexed by setting string in base `I`.
    pub fn correlators(&self) -> Correlators {
        let e = (0..self.n_settings())
            .map(|xi| self.full_correlator(&self.setting_string(xi)).unwrap())
            .collect();
        Correlators {
            n: self.n,
            inputs: self.inputs,
            e,
        }
    }

    /// Marginal over `parties` at their `inputs`, other parties at input 0.
    /// Indexed by the outcome string of `parties` in base 2.
    pub fn marginal(&self, parties: &[usize], inputs: &[u8]) -> Result<Vec<f64>> {
        let rest = vec![0u8; self.n - parties.len().min(self.n)];
        self.marginal_with(parties, inputs, &rest)
    }

    /// Marginal with explicit inputs for the complementary parties, given
    /// in increasing party order.
    pub fn marginal_with(&self, parties: &[usize], inputs: &[u8], complement_inputs: &[u8]) -> Result<Vec<f64>> {
        if parties.is_empty() {
            return Err(Error::Shape("marginal needs a nonempty party subset".into()));
        }
        if parties.len() != inputs.len() {
            return Err(Error::Shape("one input per selected party is required".into()));
        }
        let mut seen = vec![false; self.n];
        for &j in parties {
            if j >= self.n || seen[j] {
                return Err(Error::Shape(format!("invalid or repeated party {j}")));
            }
            seen[j] = true;
        }
        let complement: Vec<usize> = (0..self.n).filter(|&j| !seen[j]).collect();
        if complement_inputs.len() != complement.len() {
            return Err(Error::Shape(format!(
                "{} complementary inputs required, got {}",
                complement.len(),
                complement_inputs.len()
            )));
        }
        let mut x = vec![0u8; self.n];
        for (&j, &v) in parties.iter().zip(inputs) {
            x[j] = v;
        }
        for (&j, &v) in complement.iter().zip(complement_inputs) {
            x[j] = v;
        }
        let mut out = vec![0.0; 1 << parties.len()];
        for oi in 0..(1usize << self.n) {
            let o = digits(oi, 2, self.n);
            let sub = parties.iter().fold(0usize, |acc, &j| acc * 2 + o[j] as usize);
            out[sub] += self.prob(&o, &x)?;
        }
        Ok(out)
    }

    /// Largest `|Σ_o p(o|x) − 1|`.
    pub fn normalization_deviation(&self) -> f64 {
        (0..self.n_settings())
            .map(|xi| {
                let x = self.setting_string(xi);
                (self.conditional(&x).unwrap().iter().sum::<f64>() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn min_probability(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest change of any single-party-removed marginal under a change
    /// of that party's input. Zero for every party implies no-signaling for
    /// all subsets.
    pub fn signaling_deviation(&self) -> f64 {
        let base = 2 * self.inputs;
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            let stride = base.pow((self.n - 1 - j) as u32);
            let block = stride * base;
            for start in (0..self.p.len()).step_by(block) {
                for inner in 0..stride {
                    let at = |x: usize, o: usize| self.p[start + (2 * x + o) * stride + inner];
                    let reference = at(0, 0) + at(0, 1);
                    for x in 1..self.inputs {
                        worst = worst.max((at(x, 0) + at(x, 1) - reference).abs());
                    }
                }
            }
        }
        worst
    }

    /// Normalization, positivity and no-signaling within `tol`.
    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let norm = self.normalization_deviation();
        if !(norm <= tol) {
            return Err(Error::Numerical(format!("behavior normalization off by {norm:e}")));
        }
        let min = self.min_probability();
        if !(min >= -tol) {
            return Err(Error::Numerical(format!("behavior has negative entry {min:e}")));
        }
        let sig = self.signaling_deviation();
        if !(sig <= tol) {
            return Err(Error::Numerical(format!("behavior signals by {sig:e}")));
        }
        Ok(())
    }

    /// Same behavior with parties reordered: new party `i` is old `perm[i]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.n).collect::<Vec<_>>() {
            return Err(Error::Shape(format!("{perm:?} is not a permutation")));
        }
        Self::from_fn(self.n, self.inputs, |o, x| {
            let mut oo = vec![0; self.n];
            let mut xx = vec![0; self.n];
            for (i, &src) in perm.iter().enumerate() {
                oo[src] = o[i];
                xx[src] = x[i];
            }
            self.prob(&oo, &xx).unwrap()
        })
    }

    /// Entries as `(x, o, p)` in lexicographic `(x, o)` order.
    pub fn rows(&self) -> Vec<(String, String, f64)> {
        let mut rows = Vec::with_capacity(self.p.len());
        for xi in 0..self.n_settings() {
            let x = self.setting_string(xi);
            for oi in 0..(1usize << self.n) {
                let o = digits(oi, 2, self.n);
                rows.push((digit_string(&x), digit_string(&o), self.prob(&o, &x).unwrap()));
            }
        }
        rows
    }

    /// `{"n":N,"inputs":I,"p":{"o;x":value}}`.
    pub fn to_json(&self) -> Result<String> {
        let p = self
            .rows()
            .into_iter()
            .map(|(x, o, v)| (format!("{o};{x}"), v))
            .collect();
        Ok(serde_json::to_string(&BehaviorFile {
            n: self.n,
            inputs: self.inputs,
            p,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BehaviorFile = serde_json::from_str(text)?;
        let len = Self::check_shape(file.n, file.inputs)?;
        if file.p.len() != len {
            return Err(Error::Shape(format!("expected {len} entries, got {}", file.p.len())));
        }
        let mut b = Self {
            n: file.n,
            inputs: file.inputs,
            p: vec![0.0; len],
        };
        for (key, v) in file.p {
            let (o, x) = key
                .split_once(';')
                .ok_or_else(|| Error::Domain(format!("key {key:?} is not of the form o;x")))?;
            let idx = b.index(&parse_digits(o, 2)?, &parse_digits(x, file.inputs as u8)?)?;
            b.p[idx] = v;
        }
        Ok(b)
    }

    /// Flat CSV with columns `x,o,p`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,o,p\n");
        for (x, o, v) in self.rows() {
            writeln!(out, "{x},{o},{v:e}").unwrap();
        }
        out
    }
}

/// Full correlators `E(x)` without the probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlators {
    n: usize,
    inputs: usize,
    e: Vec<f64>,
}

impl Correlators {
    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// `E(x)` by flat setting index (base `I`, party 0 first).
    pub fn get(&self, xi: usize) -> f64 {
        self.e[xi]
    }

    pub fn values(&self) -> &[f64] {
        &self.e
    }

    pub fn at(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n || x.iter().any(|&v| v as usize >= self.inputs) {
            return Err(Error::Shape(format!("invalid setting string {x:?}")));
        }
        Ok(self.e[x.iter().fold(0usize, |a, &v| a * self.inputs + v as usize)])
    }
}

/// Contract a dense `4^N` coefficient tensor with one `rows × 4` matrix per
/// party, mode by mode.
fn contract(c: &[f64], mats: &[Vec<[f64; 4]>]) -> Vec<f64> {
    let n = mats.len();
    let mut cur = c.to_vec();
    let mut prefix = 1usize;
    for (j, mat) in mats.iter().enumerate() {
        let suffix = 4usize.pow((n - 1 - j) as u32);
        let rows = mat.len();
        let mut next = vec![0.0; prefix * rows * suffix];
        for a in 0..prefix {
            for (d, row) in mat.iter().enumerate() {
                let dst = &mut next[(a * rows + d) * suffix..][..suffix];
                for (k, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let src = &cur[(a * 4 + k) * suffix..][..suffix];
                    for (t, &s) in dst.iter_mut().zip(src) {
                        *t += w * s;
                    }
                }
            }
        }
        cur = next;
        prefix *= rows;
    }
    cur
}

/// Overlap tables for every distinct setting of a scheme, computed once.
struct OverlapCache {
    tables: Vec<OverlapTable>,
    traces: [f64; 4],
}

impl OverlapCache {
    fn build(scheme: &SettingScheme, params: &FiniteEnergyParams, channel: &NoiseChannel, tol: f64) -> Result<Self> {
        let engine = OverlapEngine::new(*params, *channel, tol)?;
        let mut tables: Vec<OverlapTable> = Vec::new();
        for s in scheme.settings.iter().flatten() {
            let known = tables
                .iter()
                .any(|t| t.setting.theta == s.theta && t.setting.scale == s.scale);
            if !known {
                tables.push(engine.table(s));
            }
        }
        let mut traces = [0.0; 4];
        for k in PauliIndex::ALL {
            traces[k.index()] = pauli_trace(k, params, tol);
        }
        Ok(Self { tables, traces })
    }

    fn table(&self, s: &MeasurementSetting) -> &OverlapTable {
        self.tables
            .iter()
            .find(|t| t.setting.theta == s.theta && t.setting.scale == s.scale)
            .expect("setting cached during build")
    }
}

fn dense_coefficients(state: &LogicalState) -> Vec<f64> {
    let mut c = vec![0.0; 4usize.pow(state.n_parties() as u32)];
    for &(key, v) in state.terms() {
        c[key as usize] = v;
    }
    c
}

/// `𝒩 = Σ_k c_k Π_j tr(σ_{k_j}^ε)`.
fn normalization(state: &LogicalState, traces: &[f64; 4]) -> Result<f64> {
    let n = state.n_parties();
    let norm: f64 = state
        .terms()
        .iter()
        .map(|&(key, c)| {
            (0..n).fold(c, |acc, j| acc * traces[((key >> (2 * (n - 1 - j))) & 3) as usize])
        })
        .sum();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Numerical(format!("state normalization {norm} is not positive")));
    }
    Ok(norm)
}

fn check_inputs(state: &LogicalState, scheme: &SettingScheme, tol: f64) -> Result<()> {
    if state.n_parties() != scheme.n_parties() {
        return Err(Error::Shape(format!(
            "state has {} parties, scheme has {}",
            state.n_parties(),
            scheme.n_parties()
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// `p(o|x) = 𝒩^{−1} Σ_k c_k Π_j t_{k_j, o_j}^{(x_j)}`.
///
/// The result is checked for normalization, positivity and no-signaling
/// at [`CONSISTENCY_TOL`].
pub fn assemble_behavior(
    state: &LogicalState,
    scheme: &SettingScheme,
    params: &FiniteEnergyParams,
    channel: &NoiseChannel,
    tol: f64,
) -> Result<Behavior> {
    check_inputs(state, scheme, tol)?;
    let n = state.n_parties();
    let inputs = scheme.inputs();
    Behavior::check_shape(n, inputs)?;
    let cache = OverlapCache::build(scheme, params, channel, tol)?;
    let norm = normalization(state, &cache.traces)?;
    let mats: Vec<Vec<[f64; 4]>> = (0..n)
        .map(|j| {
            let mut rows = Vec::with_capacity(2 * inputs);
            for x in 0..inputs {
                let t = cache.table(scheme.setting(j, x));
                for o in 0..2 {
                    rows.push([t.t[0][o], t.t[1][o], t.t[2][o], t.t[3][o]]);
                }
            }
            rows
        })
        .collect();
    let mut p = contract(&dense_coefficients(state), &mats);
    for v in p.iter_mut() {
        *v /= norm;
    }
    let b = Behavior { n, inputs, p };
    b.check_consistency(CONSISTENCY_TOL)?;
    Ok(b)
}

/// `E(x)` for every setting string without building `p(o|x)`; reaches
/// party counts beyond the dense table limit.
pub fn assemble_correlators(
    state: &LogicalState,
    scheme: &SettingScheme,
    params: &FiniteEnergyParams,
    channel: &NoiseChannel,
    tol: f64,
) -> Result<Correlators> {
    check_inputs(state, scheme, tol)?;
    let n = state.n_parties();
    if 4usize.pow(n as u32) > CORRELATOR_LIMIT {
        return Err(Error::TooLarge(format!("correlator tensor for {n} parties")));
    }
    let inputs = scheme.inputs();
    let cache = OverlapCache::build(scheme, params, channel, tol)?;
    let norm = normalization(state, &cache.traces)?;
    let mats: Vec<Vec<[f64; 4]>> = (0..n)
        .map(|j| {
            (0..inputs)
                .map(|x| {
                    let t = cache.table(scheme.setting(j, x));
                    [t.signed(PauliIndex::I), t.signed(PauliIndex::X), t.signed(PauliIndex::Y), t.signed(PauliIndex::Z)]
                })
                .collect()
        })
        .collect();
    let mut e = contract(&dense_coefficients(state), &mats);
    for v in e.iter_mut() {
        *v /= norm;
    }
    if let Some(bad) = e.iter().find(|v| !(v.abs() <= 1.0 + CONSISTENCY_TOL)) {
        return Err(Error::Numerical(format!("correlator {bad} outside [-1, 1]")));
    }
    Ok(Correlators { n, inputs, e })
}
