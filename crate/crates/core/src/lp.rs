//! Dense two-phase primal simplex for small linear programs.
//!
//! Variables are shifted to zero lower bounds, finite upper bounds become
//! explicit rows, and inequality rows receive slacks. Pricing is Dantzig's
//! rule, switching to Bland's rule after a run of degenerate pivots.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `min cᵀx` s.t. `A_eq x = b_eq`, `A_ub x ≤ b_ub`, `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LinearProgram {
    /// Nonnegative variables, no constraints yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn ge(self, row: Vec<f64>, rhs: f64) -> Self {
        let neg = row.into_iter().map(|v| -v).collect();
        self.le(neg, -rhs)
    }

    pub fn bounds(mut self, j: usize, lower: f64, upper: Option<f64>) -> Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if n == 0 {
            return Err(Error::Shape("linear program has no variables".into()));
        }
        let rows_ok = self.a_eq.iter().chain(&self.a_ub).all(|r| r.len() == n);
        if !rows_ok || self.a_eq.len() != self.b_eq.len() || self.a_ub.len() != self.b_ub.len() {
            return Err(Error::Shape("constraint dimensions do not match".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Shape("bound vectors do not match variable count".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.a_eq.iter().flatten())
            .chain(self.a_ub.iter().flatten())
            .chain(&self.b_eq)
            .chain(&self.b_ub)
            .chain(&self.lower)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("linear program data must be finite".into()));
        }
        for (j, (&l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if let Some(u) = u {
                if !(u.is_finite() && *u >= l) {
                    return Err(Error::Domain(format!("variable {j} has bounds [{l}, {u}]")));
                }
            }
        }
        Ok(())
    }
}

/// Scale of the right-hand-side perturbation used in phase 2.
const PERTURBATION: f64 = 1e-7;
/// Basic values below `-CLEANUP_TOL` are pivoted out after the perturbation
/// is removed; the rest are treated as zero.
const CLEANUP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Reduced-cost and feasibility tolerance.
    pub tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    pub max_iterations: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            pivot_tol: 1e-11,
            max_iterations: 100_000,
            bland_after: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Unperturbed right-hand side, pivoted alongside the tableau.
    exact: Vec<f64>,
    /// Columns that may never enter.
    blocked: Vec<bool>,
    iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.exact[r] /= p;
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != 0.0 {
                self.exact[i] -= f * self.exact[r];
                for (v, &pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.data[i * w + c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, &pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Raise the basic values of rows whose basic column passes `keep` by a
    /// small distinct amount, which breaks ties in the ratio test.
    fn perturb(&mut self, keep: impl Fn(usize) -> bool) {
        let w = self.width;
        for r in 0..self.rows {
            self.exact[r] = self.rhs(r);
            if keep(self.basis[r]) {
                self.data[r * w + w - 1] += PERTURBATION * (1.0 + jitter(r as u64));
            }
        }
    }

    /// Put the unperturbed values back and repair any sign violations.
    fn restore(&mut self, opts: &SimplexOptions) -> Result<()> {
        let w = self.width;
        for r in 0..self.rows {
            self.data[r * w + w - 1] = self.exact[r];
        }
        self.dual_cleanup(opts)
    }

    /// Dual simplex pivots until every basic value is nonnegative. Assumes
    /// the reduced costs are already optimal.
    fn dual_cleanup(&mut self, opts: &SimplexOptions) -> Result<()> {
        let cols = self.width - 1;
        loop {
            if self.iterations >= opts.max_iterations {
                return Err(Error::Numerical("dual cleanup did not converge".into()));
            }
            let worst = (0..self.rows)
                .map(|r| (r, self.rhs(r)))
                .filter(|&(_, v)| v < -CLEANUP_TOL)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((r, v)) = worst else {
                for r in 0..self.rows {
                    let w = self.width;
                    self.data[r * w + w - 1] = self.rhs(r).max(0.0);
                }
                return Ok(());
            };
            let enter = (0..cols)
                .filter(|&c| !self.blocked[c] && self.at(r, c) < -opts.pivot_tol)
                .min_by(|&a, &b| {
                    let ra = self.obj[a].max(0.0) / -self.at(r, a);
                    let rb = self.obj[b].max(0.0) / -self.at(r, b);
                    ra.total_cmp(&rb)
                });
            let Some(c) = enter else {
                return Err(Error::Numerical(format!(
                    "basic variable {v:e} negative after removing the perturbation"
                )));
            };
            self.pivot(r, c);
        }
    }

    fn run(&mut self, opts: &SimplexOptions) -> Result<Step> {
        let cols = self.width - 1;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= opts.max_iterations {
                return Err(Error::Numerical(format!(
                    "simplex did not converge in {} iterations",
                    opts.max_iterations
                )));
            }
            let bland = degenerate_run >= opts.bland_after;
            let mut enter = None;
            let mut best = -opts.tol;
            for c in 0..cols {
                if self.blocked[c] {
                    continue;
                }
                let d = self.obj[c];
                if d < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, c);
                if a <= opts.pivot_tol {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        let better = if tie {
                            if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                a > self.at(lr, c)
                            }
                        } else {
                            ratio < lratio
                        };
                        if better {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(Step::Unbounded);
            };
            if ratio <= opts.tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Deterministic value in `[0, 1)` from a splitmix64 round.
fn jitter(i: u64) -> f64 {
    let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Solve with default options.
pub fn lp_solve(prob: &LinearProgram) -> Result<LpSolution> {
    lp_solve_with(prob, &SimplexOptions::default())
}

pub fn lp_solve_with(prob: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    prob.validate()?;
    let n = prob.n_vars();
    let shift = |row: &[f64]| -> f64 { row.iter().zip(&prob.lower).map(|(a, l)| a * l).sum() };

    // rows: (coefficients over n, slack sign or none, rhs)
    let mut rows: Vec<(Vec<f64>, bool, f64)> = Vec::new();
    for (row, &b) in prob.a_eq.iter().zip(&prob.b_eq) {
        rows.push((row.clone(), false, b - shift(row)));
    }
    for (row, &b) in prob.a_ub.iter().zip(&prob.b_ub) {
        rows.push((row.clone(), true, b - shift(row)));
    }
    for (j, u) in prob.upper.iter().enumerate() {
        if let Some(u) = u {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push((row, true, u - prob.lower[j]));
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1).count();
    let n_struct = n + n_slack;
    let width = n_struct + m + 1;
    let mut data = vec![0.0; m * width];
    let mut slack = n;
    for (i, (row, has_slack, rhs)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let line = &mut data[i * width..(i + 1) * width];
        for (v, a) in line.iter_mut().zip(row) {
            *v = sign * a;
        }
        if *has_slack {
            line[slack] = sign;
            slack += 1;
        }
        line[n_struct + i] = 1.0;
        line[width - 1] = sign * rhs;
    }

    // crash basis: a column that is a positive unit vector starts basic
    let mut basis: Vec<usize> = (n_struct..n_struct + m).collect();
    let mut used = vec![false; n_struct];
    for c in 0..n_struct {
        let mut hit = None;
        let mut count = 0;
        for i in 0..m {
            if data[i * width + c] != 0.0 {
                count += 1;
                hit = Some(i);
            }
        }
        let Some(i) = hit else { continue };
        let a = data[i * width + c];
        if count != 1 || a <= 0.0 || basis[i] < n_struct || used[c] {
            continue;
        }
        for v in &mut data[i * width..(i + 1) * width] {
            *v /= a;
        }
        basis[i] = c;
        used[c] = true;
    }

    // phase 1: minimize the sum of the artificials still basic
    let mut obj = vec![0.0; width];
    for i in (0..m).filter(|&i| basis[i] >= n_struct) {
        for c in 0..n_struct {
            obj[c] -= data[i * width + c];
        }
        obj[width - 1] -= data[i * width + width - 1];
    }
    let exact = (0..m).map(|i| data[i * width + width - 1]).collect();
    let original = data.clone();
    let mut t = Tableau {
        rows: m,
        width,
        data,
        obj,
        basis,
        exact,
        blocked: vec![false; width - 1],
        iterations: 0,
    };
    for c in n_struct..n_struct + m {
        t.blocked[c] = true;
    }
    if m > 0 {
        t.perturb(|_| true);
        t.run(opts)?;
        t.restore(opts)?;
        let infeasibility: f64 = (0..m).filter(|&r| t.basis[r] >= n_struct).map(|r| t.rhs(r)).sum();
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeasibility > opts.tol * scale {
            return Err(Error::Infeasible);
        }
        // drive remaining artificials out of the basis
        for r in 0..m {
            if t.basis[r] < n_struct {
                continue;
            }
            let pick = (0..n_struct)
                .filter(|&c| t.at(r, c).abs() > 1e-9)
                .max_by(|&a, &b| t.at(r, a).abs().total_cmp(&t.at(r, b).abs()));
            if let Some(c) = pick {
                t.pivot(r, c);
            }
        }
    }

    // phase 2
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(&prob.objective);
    for r in 0..m {
        let b = t.basis[r];
        let cb = obj[b];
        if cb != 0.0 {
            for c in 0..width {
                obj[c] -= cb * t.data[r * width + c];
            }
        }
    }
    t.obj = obj;
    t.perturb(|b| b < n_struct);
    match t.run(opts)? {
        Step::Unbounded => return Err(Error::Unbounded),
        Step::Optimal => {}
    }
    t.restore(opts)?;

    let mut y = vec![0.0; n_struct + m];
    for r in 0..m {
        y[t.basis[r]] = t.rhs(r);
    }
    // recompute the basic values from the original columns to shed pivot drift
    if m > 0 {
        let b_mat = DMatrix::from_fn(m, m, |i, r| original[i * width + t.basis[r]]);
        let rhs = DVector::from_fn(m, |i, _| original[i * width + width - 1]);
        if let Some(sol) = b_mat.lu().solve(&rhs) {
            let drift = (0..m).map(|r| (sol[r] - t.rhs(r)).abs()).fold(0.0, f64::max);
            if drift < 1e-6 {
                for r in 0..m {
                    y[t.basis[r]] = sol[r];
                }
            }
        }
    }
    let x: Vec<f64> = (0..n).map(|j| y[j] + prob.lower[j]).collect();
    let residual = prob
        .a_eq
        .iter()
        .zip(&prob.b_eq)
        .map(|(row, b)| (row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    if residual > 1e-7 {
        return Err(Error::Numerical(format!("equality residual {residual:e} after simplex")));
    }
    let objective = prob.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations: t.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    #[test]
    fn one_variable_lower_bound() {
        let lp = LinearProgram::new(vec![1.0]).ge(vec![1.0], 3.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        let lp = LinearProgram::new(vec![1.0]).bounds(0, 3.0, None);
        assert!((lp_solve(&lp).unwrap().objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_program() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let lp = LinearProgram::new(vec![-3.0, -5.0])
            .le(vec![1.0, 0.0], 4.0)
            .le(vec![0.0, 2.0], 12.0)
            .le(vec![3.0, 2.0], 18.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn upper_bounds_and_shifted_lower_bounds() {
        let lp = LinearProgram::new(vec![-1.0, -1.0])
            .bounds(0, -2.0, Some(1.5))
            .bounds(1, 1.0, Some(2.0))
            .le(vec![1.0, 1.0], 3.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.objective + 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::new(vec![1.0]).le(vec![1.0], 1.0).ge(vec![1.0], 2.0);
        assert!(matches!(lp_solve(&lp), Err(Error::Infeasible)));
        let lp = LinearProgram::new(vec![-1.0, 0.0]).eq(vec![1.0, -1.0], 0.0);
        assert!(matches!(lp_solve(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram::new(vec![1.0, 2.0])
            .eq(vec![1.0, 1.0], 1.0)
            .eq(vec![2.0, 2.0], 2.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_programs_rejected() {
        let lp = LinearProgram::new(vec![1.0, 1.0]).eq(vec![1.0], 1.0);
        assert!(lp_solve(&lp).is_err());
        let lp = LinearProgram::new(vec![1.0]).bounds(0, 1.0, Some(0.0));
        assert!(lp_solve(&lp).is_err());
    }

    /// Primal-dual path-following for `min cᵀx, Ax = b, x ≥ 0`.
    fn interior_point(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
        let (m, n) = a.shape();
        let mut x = DVector::from_element(n, 1.0);
        let mut s = DVector::from_element(n, 1.0);
        let mut y = DVector::zeros(m);
        for _ in 0..200 {
            let rp = b - a * &x;
            let rd = c - a.transpose() * &y - &s;
            let mu = x.dot(&s) / n as f64;
            if rp.norm() < 1e-11 && rd.norm() < 1e-11 && mu < 1e-12 {
                break;
            }
            let sigma = 0.1;
            let d = DVector::from_fn(n, |i, _| x[i] / s[i]);
            let rc = DVector::from_fn(n, |i, _| sigma * mu - x[i] * s[i]);
            // (A D Aᵀ) dy = rp + A D (rd − X⁻¹ rc)
            let ad = DMatrix::from_fn(m, n, |r, col| a[(r, col)] * d[col]);
            let lhs = &ad * a.transpose();
            let tmp = DVector::from_fn(n, |i, _| rd[i] - rc[i] / x[i]);
            let rhs = &rp + &ad * tmp;
            let dy = lhs.lu().solve(&rhs).unwrap();
            let ds = &rd - a.transpose() * &dy;
            let dx = DVector::from_fn(n, |i, _| (rc[i] - x[i] * ds[i]) / s[i]);
            let step = |v: &DVector<f64>, dv: &DVector<f64>| {
                (0..n).filter(|&i| dv[i] < 0.0).map(|i| -v[i] / dv[i]).fold(1.0f64, f64::min)
            };
            let ap = (0.99 * step(&x, &dx)).min(1.0);
            let ad_ = (0.99 * step(&s, &ds)).min(1.0);
            x += dx * ap;
            y += dy * ad_;
            s += ds * ad_;
        }
        c.dot(&x)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn simplex_agrees_with_interior_point(
            m in 2usize..6,
            extra in 1usize..6,
            vals in proptest::collection::vec(-1.0f64..1.0, 200),
            pos in proptest::collection::vec(0.1f64..1.0, 40),
        ) {
            let n = m + extra;
            let a = DMatrix::from_fn(m, n, |r, c| vals[r * n + c]);
            let x0 = DVector::from_fn(n, |i, _| pos[i]);
            let b = &a * &x0;
            let y0 = DVector::from_fn(m, |i, _| vals[100 + i]);
            let s0 = DVector::from_fn(n, |i, _| pos[20 + i]);
            let c = a.transpose() * y0 + s0;
            let mut lp = LinearProgram::new(c.iter().copied().collect());
            for r in 0..m {
                lp = lp.eq(a.row(r).iter().copied().collect(), b[r]);
            }
            let simplex = lp_solve(&lp).unwrap().objective;
            let ipm = interior_point(&a, &b, &c);
            prop_assert!((simplex - ipm).abs() < 1e-7, "{simplex} vs {ipm}");
        }
    }
}
