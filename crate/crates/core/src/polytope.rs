//! Deterministic local strategies and the 1-norm distance of a behavior to
//! their convex hull.

use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::lp::{lp_solve_with, LinearProgram, SimplexOptions};

/// Upper limit on the number of deterministic strategies.
pub const VERTEX_LIMIT: usize = 1_000_000;

/// Tolerances on the returned weights and distance.
pub const RESULT_TOL: f64 = 1e-10;

/// All deterministic behaviors for `N` parties with `I` inputs and `O`
/// outputs, stored by support.
///
/// Strategy `λ` is a base-`O^I` number with party 0 most significant; the
/// response of party `j` to input `x` is digit `x` (base `O`, input 0
/// least significant) of its own base-`O^I` digit. Entry indices follow
/// [`Behavior`]: per-party digit `x·O + o`, party 0 first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    inputs: usize,
    outputs: usize,
    supports: Vec<Vec<u32>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    /// Length of a behavior vector, `(O·I)^N`.
    pub fn entries(&self) -> usize {
        (self.outputs * self.inputs).pow(self.n as u32)
    }

    /// Indices where vertex `λ` equals one.
    pub fn support(&self, lambda: usize) -> &[u32] {
        &self.supports[lambda]
    }

    pub fn dense_column(&self, lambda: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.entries()];
        for &i in &self.supports[lambda] {
            col[i as usize] = 1.0;
        }
        col
    }

    /// Response table `f_j(x)` of vertex `λ`.
    pub fn strategy(&self, lambda: usize) -> Vec<Vec<u8>> {
        let per_party = self.outputs.pow(self.inputs as u32);
        set_strategy(lambda, self.n, self.inputs, self.outputs, per_party)
    }

    /// Vertex `λ` as a [`Behavior`] (binary outputs only).
    pub fn behavior(&self, lambda: usize) -> Result<Behavior> {
        if self.outputs != 2 {
            return Err(Error::Shape("behaviors have binary outputs".into()));
        }
        Behavior::deterministic(&self.strategy(lambda))
    }
}

/// Enumerate the `(O^I)^N` deterministic strategies.
pub fn enumerate_deterministic_behaviors(n: usize, inputs: usize, outputs: usize) -> Result<VertexSet> {
    if n == 0 || inputs == 0 || outputs < 2 {
        return Err(Error::Shape(format!(
            "need n >= 1, inputs >= 1, outputs >= 2; got ({n}, {inputs}, {outputs})"
        )));
    }
    let per_party = outputs
        .checked_pow(inputs as u32)
        .filter(|&v| v <= VERTEX_LIMIT)
        .ok_or_else(|| Error::TooLarge("strategies per party overflow".into()))?;
    let count = per_party
        .checked_pow(n as u32)
        .filter(|&v| v <= VERTEX_LIMIT)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "({outputs}^{inputs})^{n} deterministic strategies exceed {VERTEX_LIMIT}"
            ))
        })?;
    let radix = outputs * inputs;
    let settings = inputs.pow(n as u32);
    let mut set = VertexSet {
        n,
        inputs,
        outputs,
        supports: Vec::with_capacity(count),
    };
    for lambda in 0..count {
        let f = set_strategy(lambda, n, inputs, outputs, per_party);
        let mut support = Vec::with_capacity(settings);
        for xi in 0..settings {
            let mut idx = 0usize;
            for j in 0..n {
                let x = xi / inputs.pow((n - 1 - j) as u32) % inputs;
                idx = idx * radix + x * outputs + f[j][x] as usize;
            }
            support.push(idx as u32);
        }
        set.supports.push(support);
    }
    Ok(set)
}

fn set_strategy(lambda: usize, n: usize, inputs: usize, outputs: usize, per_party: usize) -> Vec<Vec<u8>> {
    (0..n)
        .map(|j| {
            let s = lambda / per_party.pow((n - 1 - j) as u32) % per_party;
            (0..inputs)
                .map(|x| (s / outputs.pow(x as u32) % outputs) as u8)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Numerical,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Numerical => "numerical",
        })
    }
}

/// Distance of a behavior to the local polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    /// `min ‖p − q‖₁` over the full `(o, x)` table.
    pub distance: f64,
    /// `distance / I^N`.
    pub distance_per_setting: f64,
    /// Optimal weights on the vertices, in enumeration order.
    pub weights: Vec<f64>,
    pub status: LpStatus,
    pub iterations: usize,
    pub detail: Option<String>,
}

impl DistanceResult {
    fn failed(status: LpStatus, detail: String) -> Self {
        Self {
            distance: f64::NAN,
            distance_per_setting: f64::NAN,
            weights: Vec::new(),
            status,
            iterations: 0,
            detail: Some(detail),
        }
    }
}

/// `min Σ(u⁺ + u⁻)` s.t. `V q + u⁺ − u⁻ = p`, `Σ q = 1`, all variables `≥ 0`.
pub fn polytope_distance(b: &Behavior) -> Result<DistanceResult> {
    let vertices = enumerate_deterministic_behaviors(b.n_parties(), b.inputs(), 2)?;
    distance_to_vertices(b, &vertices)
}

/// Distance with a precomputed vertex set.
pub fn distance_to_vertices(b: &Behavior, vertices: &VertexSet) -> Result<DistanceResult> {
    distance_to_vertices_with(b, vertices, &SimplexOptions::default())
}

/// [`distance_to_vertices`] with explicit simplex tolerances.
pub fn distance_to_vertices_with(b: &Behavior, vertices: &VertexSet, opts: &SimplexOptions) -> Result<DistanceResult> {
    let len = vertices.entries();
    if b.table().len() != len || vertices.outputs != 2 {
        return Err(Error::Shape(format!(
            "behavior has {} entries, vertex set expects {len}",
            b.table().len()
        )));
    }
    let nv = vertices.len();
    let nvars = nv + 2 * len;
    let mut objective = vec![0.0; nvars];
    for c in &mut objective[nv..] {
        *c = 1.0;
    }
    let mut rows = vec![vec![0.0; nvars]; len];
    for lambda in 0..nv {
        for &i in vertices.support(lambda) {
            rows[i as usize][lambda] = 1.0;
        }
    }
    let mut lp = LinearProgram::new(objective);
    for (i, mut row) in rows.into_iter().enumerate() {
        row[nv + i] = 1.0;
        row[nv + len + i] = -1.0;
        lp = lp.eq(row, b.table()[i]);
    }
    let mut sum = vec![0.0; nvars];
    for v in &mut sum[..nv] {
        *v = 1.0;
    }
    lp = lp.eq(sum, 1.0);

    let sol = match lp_solve_with(&lp, opts) {
        Ok(s) => s,
        Err(Error::Infeasible) => return Ok(DistanceResult::failed(LpStatus::Infeasible, "phase 1 infeasible".into())),
        Err(Error::Unbounded) => return Ok(DistanceResult::failed(LpStatus::Numerical, "reported unbounded".into())),
        Err(Error::Numerical(msg)) => return Ok(DistanceResult::failed(LpStatus::Numerical, msg)),
        Err(e) => return Err(e),
    };
    let weights = sol.x[..nv].to_vec();
    // rounding can leave the optimum a few ulps below zero
    let distance = if sol.objective > -RESULT_TOL { sol.objective.max(0.0) } else { sol.objective };
    let settings = b.n_settings() as f64;
    let weight_sum: f64 = weights.iter().sum();
    let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let mut status = LpStatus::Optimal;
    let mut detail = None;
    if min_weight < -RESULT_TOL || (weight_sum - 1.0).abs() > 1e-9 || distance < -RESULT_TOL {
        status = LpStatus::Numerical;
        detail = Some(format!(
            "weights min {min_weight:e}, sum {weight_sum}, distance {distance:e}"
        ));
    }
    Ok(DistanceResult {
        distance,
        distance_per_setting: distance / settings,
        weights,
        status,
        iterations: sol.iterations,
        detail,
    })
}
