//! Exact check that Pauli measurements on a local-Clifford rotated Bell pair
//! never exceed the CHSH local bound.
//!
//! Matrices are kept as Gaussian-integer entries times `2^{−k/2}`, and all
//! correlators come from `⟨Φ⁺|A ⊗ B|Φ⁺⟩ = ½ tr(A Bᵀ)` in integers.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

/// Gaussian integer `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    fn scale(self, s: i64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    /// Divisible by `1 + i`.
    fn divisible_by_one_plus_i(self) -> bool {
        (self.re + self.im) % 2 == 0
    }

    /// `z / (1 + i)` for `z` divisible by `1 + i`.
    fn div_one_plus_i(self) -> Self {
        // z (1 − i) / 2
        Self::new((self.re + self.im) / 2, (self.im - self.re) / 2)
    }
}

impl Add for GaussInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Neg for GaussInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

/// 2×2 matrix over the Gaussian integers.
pub type Mat2 = [[GaussInt; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[GaussInt::ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn trace(a: &Mat2) -> GaussInt {
    a[0][0] + a[1][1]
}

fn scale_mat(a: &Mat2, s: i64) -> Mat2 {
    [[a[0][0].scale(s), a[0][1].scale(s)], [a[1][0].scale(s), a[1][1].scale(s)]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `±X`, `±Y`, `±Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignedPauli {
    pub axis: Axis,
    pub sign: i8,
}

impl SignedPauli {
    pub const X: SignedPauli = SignedPauli { axis: Axis::X, sign: 1 };
    pub const Y: SignedPauli = SignedPauli { axis: Axis::Y, sign: 1 };
    pub const Z: SignedPauli = SignedPauli { axis: Axis::Z, sign: 1 };

    pub const ALL: [SignedPauli; 6] = [
        SignedPauli { axis: Axis::X, sign: 1 },
        SignedPauli { axis: Axis::X, sign: -1 },
        SignedPauli { axis: Axis::Y, sign: 1 },
        SignedPauli { axis: Axis::Y, sign: -1 },
        SignedPauli { axis: Axis::Z, sign: 1 },
        SignedPauli { axis: Axis::Z, sign: -1 },
    ];

    pub fn negate(self) -> Self {
        Self {
            axis: self.axis,
            sign: -self.sign,
        }
    }

    pub fn matrix(self) -> Mat2 {
        let (o, z, i) = (GaussInt::ONE, GaussInt::ZERO, GaussInt::I);
        let m = match self.axis {
            Axis::X => [[z, o], [o, z]],
            Axis::Y => [[z, -i], [i, z]],
            Axis::Z => [[o, z], [z, -o]],
        };
        scale_mat(&m, self.sign as i64)
    }

    /// Recognize `m = 2^s · P` for a signed Pauli `P`.
    fn from_scaled_matrix(m: &Mat2, s: i64) -> Option<Self> {
        SignedPauli::ALL
            .into_iter()
            .find(|p| scale_mat(&p.matrix(), s) == *m)
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign > 0 { "+" } else { "-" };
        write!(f, "{s}{:?}", self.axis)
    }
}

/// `⟨Φ⁺|A ⊗ B|Φ⁺⟩ = ½ tr(A Bᵀ)`, exactly.
pub fn pauli_pair_correlator(a: SignedPauli, b: SignedPauli) -> i64 {
    let t = trace(&mat_mul(&a.matrix(), &transpose(&b.matrix())));
    debug_assert!(t.im == 0 && t.re % 2 == 0);
    t.re / 2
}

/// Single-qubit unitary `2^{−k/2} M` with Gaussian-integer `M`, up to phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CliffordElement {
    m: Mat2,
    k: u32,
}

impl CliffordElement {
    pub fn identity() -> Self {
        Self {
            m: [[GaussInt::ONE, GaussInt::ZERO], [GaussInt::ZERO, GaussInt::ONE]],
            k: 0,
        }
    }

    pub fn hadamard() -> Self {
        let o = GaussInt::ONE;
        Self {
            m: [[o, o], [o, -o]],
            k: 1,
        }
    }

    pub fn phase() -> Self {
        Self {
            m: [[GaussInt::ONE, GaussInt::ZERO], [GaussInt::ZERO, GaussInt::I]],
            k: 0,
        }
    }

    /// Remove common factors `(1 + i)/√2`, a pure phase.
    fn reduced(mut self) -> Self {
        while self.k > 0 && self.m.iter().flatten().all(|z| z.divisible_by_one_plus_i()) {
            for z in self.m.iter_mut().flatten() {
                *z = z.div_one_plus_i();
            }
            self.k -= 1;
        }
        self
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: mat_mul(&self.m, &other.m),
            k: self.k + other.k,
        }
        .reduced()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: adjoint(&self.m),
            k: self.k,
        }
    }

    /// `U P U†`, or `None` if the result is not a signed Pauli.
    pub fn conjugate(&self, p: SignedPauli) -> Option<SignedPauli> {
        let m = mat_mul(&mat_mul(&self.m, &p.matrix()), &adjoint(&self.m));
        SignedPauli::from_scaled_matrix(&m, 1i64 << self.k)
    }

    /// `U† P U`.
    pub fn conjugate_by_adjoint(&self, p: SignedPauli) -> Option<SignedPauli> {
        self.adjoint().conjugate(p)
    }

    /// Images of `X` and `Z`; determines the element up to phase.
    pub fn action(&self) -> Option<(SignedPauli, SignedPauli)> {
        Some((self.conjugate(SignedPauli::X)?, self.conjugate(SignedPauli::Z)?))
    }

    /// `(M, k)` with the unitary equal to `2^{−k/2} M`.
    pub fn scaled_matrix(&self) -> (Mat2, u32) {
        (self.m, self.k)
    }
}

/// The 24 single-qubit Cliffords modulo phase, generated from `H` and `S`.
///
/// Panics if the closure check fails, which would mean the exact
/// arithmetic is broken.
pub fn clifford_group() -> Vec<CliffordElement> {
    let gens = [CliffordElement::hadamard(), CliffordElement::phase()];
    let mut elements = vec![CliffordElement::identity()];
    let mut seen: HashSet<(SignedPauli, SignedPauli)> = HashSet::new();
    seen.insert(elements[0].action().expect("identity is Clifford"));
    let mut frontier = 0;
    while frontier < elements.len() {
        let current = elements[frontier];
        frontier += 1;
        for g in &gens {
            let next = current.compose(g);
            let key = next.action().expect("products of H and S are Clifford");
            if seen.insert(key) {
                elements.push(next);
            }
        }
    }
    for a in &elements {
        for b in &elements {
            let key = a.compose(b).action().expect("closure");
            assert!(seen.contains(&key), "Clifford set not closed under composition");
        }
    }
    elements
}

/// Largest `|S_CHSH|` over all `6⁴` signed-Pauli choices on
/// `(U_A ⊗ U_B)|Φ⁺⟩`, with the correlators obtained from `Φ⁺` and the
/// conjugated observables `U†PU`.
pub fn chsh_pauli_max(ua: &CliffordElement, ub: &CliffordElement) -> i64 {
    let table = correlator_table(ua, ub);
    chsh_max_over_table(&table, false)
}

/// Same maximum with Bob restricted to `B1 = B0`.
pub fn chsh_pauli_max_single_bob(ua: &CliffordElement, ub: &CliffordElement) -> i64 {
    let table = correlator_table(ua, ub);
    chsh_max_over_table(&table, true)
}

/// `E[a][b] = ⟨(U_A ⊗ U_B)Φ⁺| P_a ⊗ P_b |(U_A ⊗ U_B)Φ⁺⟩`.
pub fn correlator_table(ua: &CliffordElement, ub: &CliffordElement) -> [[i64; 6]; 6] {
    let mut table = [[0i64; 6]; 6];
    for (i, &a) in SignedPauli::ALL.iter().enumerate() {
        let ca = ua.conjugate_by_adjoint(a).expect("Clifford maps Paulis to Paulis");
        for (j, &b) in SignedPauli::ALL.iter().enumerate() {
            let cb = ub.conjugate_by_adjoint(b).expect("Clifford maps Paulis to Paulis");
            table[i][j] = pauli_pair_correlator(ca, cb);
        }
    }
    table
}

fn chsh_max_over_table(t: &[[i64; 6]; 6], single_bob: bool) -> i64 {
    let mut best = 0;
    for a0 in 0..6 {
        for a1 in 0..6 {
            for b0 in 0..6 {
                for b1 in 0..6 {
                    if single_bob && b1 != b0 {
                        continue;
                    }
                    let s = t[a0][b0] + t[a0][b1] + t[a1][b0] - t[a1][b1];
                    best = best.max(s.abs());
                }
            }
        }
    }
    best
}

/// Outcome of the exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoGoReport {
    pub group_order: usize,
    pub clifford_pairs: usize,
    pub pauli_choices_per_pair: usize,
    pub combinations: usize,
    pub global_max: i64,
    pub pairs_attaining_max: usize,
}

/// Enumerate every Clifford pair and every Pauli choice.
pub fn verify_nogo() -> NoGoReport {
    let group = clifford_group();
    let mut global_max = 0;
    let mut attaining = 0;
    for ua in &group {
        for ub in &group {
            let m = chsh_pauli_max(ua, ub);
            if m > global_max {
                global_max = m;
                attaining = 0;
            }
            if m == global_max {
                attaining += 1;
            }
        }
    }
    let pairs = group.len() * group.len();
    NoGoReport {
        group_order: group.len(),
        clifford_pairs: pairs,
        pauli_choices_per_pair: 6usize.pow(4),
        combinations: pairs * 6usize.pow(4),
        global_max,
        pairs_attaining_max: attaining,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Mat4 = [[GaussInt; 4]; 4];

    fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
        let mut out = [[GaussInt::ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = a[r / 2][c / 2] * b[r % 2][c % 2];
            }
        }
        out
    }

    /// `⟨ψ|A ⊗ B|ψ⟩` on the explicit 4-vector `ψ = (U_A ⊗ U_B)(|00⟩ + |11⟩)/√2`,
    /// returned as `value · 2^{k_A + k_B + 1}`.
    fn direct_expectation(ua: &CliffordElement, ub: &CliffordElement, a: SignedPauli, b: SignedPauli) -> (GaussInt, u32) {
        let (ma, ka) = ua.scaled_matrix();
        let (mb, kb) = ub.scaled_matrix();
        let u = kron(&ma, &mb);
        let phi = [GaussInt::ONE, GaussInt::ZERO, GaussInt::ZERO, GaussInt::ONE];
        let psi: Vec<GaussInt> = (0..4).map(|r| (0..4).fold(GaussInt::ZERO, |acc, c| acc + u[r][c] * phi[c])).collect();
        let op = kron(&a.matrix(), &b.matrix());
        let opsi: Vec<GaussInt> = (0..4).map(|r| (0..4).fold(GaussInt::ZERO, |acc, c| acc + op[r][c] * psi[c])).collect();
        let v = (0..4).fold(GaussInt::ZERO, |acc, r| acc + psi[r].conj() * opsi[r]);
        (v, ka + kb + 1)
    }

    #[test]
    fn correlator_examples() {
        assert_eq!(pauli_pair_correlator(SignedPauli::X, SignedPauli::X), 1);
        assert_eq!(pauli_pair_correlator(SignedPauli::Y, SignedPauli::Y), -1);
        assert_eq!(pauli_pair_correlator(SignedPauli::Z, SignedPauli::Z), 1);
        assert_eq!(pauli_pair_correlator(SignedPauli::X, SignedPauli::Z), 0);
        assert_eq!(pauli_pair_correlator(SignedPauli::X.negate(), SignedPauli::X), -1);
        for a in SignedPauli::ALL {
            for b in SignedPauli::ALL {
                let c = pauli_pair_correlator(a, b);
                if a.axis != b.axis {
                    assert_eq!(c, 0);
                } else {
                    let y = if a.axis == Axis::Y { -1 } else { 1 };
                    assert_eq!(c, y * (a.sign * b.sign) as i64);
                }
            }
        }
    }

    #[test]
    fn group_has_24_elements_and_preserves_paulis() {
        let g = clifford_group();
        assert_eq!(g.len(), 24);
        let actions: HashSet<_> = g.iter().map(|u| u.action().unwrap()).collect();
        assert_eq!(actions.len(), 24);
        for u in &g {
            let images: HashSet<_> = SignedPauli::ALL.iter().map(|&p| u.conjugate(p).unwrap()).collect();
            assert_eq!(images.len(), 6);
            let (m, k) = u.scaled_matrix();
            // unitarity: M M† = 2^k I
            let mm = mat_mul(&m, &adjoint(&m));
            let id = scale_mat(&CliffordElement::identity().m, 1 << k);
            assert_eq!(mm, id);
        }
        let id = CliffordElement::identity();
        for p in SignedPauli::ALL {
            assert_eq!(id.conjugate(p), Some(p));
        }
    }

    #[test]
    fn non_clifford_detected() {
        // rotation by atan(1/2) about Y, scaled by √5
        let t_like = CliffordElement {
            m: [[GaussInt::new(2, 0), GaussInt::new(1, 0)], [GaussInt::new(-1, 0), GaussInt::new(2, 0)]],
            k: 0,
        };
        assert!(t_like.conjugate(SignedPauli::Z).is_none());
    }

    #[test]
    fn identity_pair_gives_two() {
        let id = CliffordElement::identity();
        assert_eq!(chsh_pauli_max(&id, &id), 2);
    }

    #[test]
    fn single_bob_observable_gives_two() {
        let g = clifford_group();
        for ua in g.iter().step_by(5) {
            for ub in g.iter().step_by(7) {
                assert_eq!(chsh_pauli_max_single_bob(ua, ub), 2);
            }
        }
    }

    #[test]
    fn reduction_matches_direct_state_computation() {
        let g = clifford_group();
        for ua in &g {
            for ub in g.iter().step_by(3) {
                let table = correlator_table(ua, ub);
                for (i, &a) in SignedPauli::ALL.iter().enumerate() {
                    for (j, &b) in SignedPauli::ALL.iter().enumerate() {
                        let (v, k) = direct_expectation(ua, ub, a, b);
                        assert_eq!(v.im, 0);
                        assert_eq!(v.re, table[i][j] * (1i64 << k));
                    }
                }
            }
        }
    }

    #[test]
    fn global_maximum_is_exactly_two() {
        let r = verify_nogo();
        assert_eq!(r.group_order, 24);
        assert_eq!(r.combinations, 576 * 1296);
        assert_eq!(r.global_max, 2);
        assert_eq!(r.pairs_attaining_max, 576);
    }
}
