//! Pauli-string coefficients `c_k = tr(ρ σ_{k_1} ⊗ … ⊗ σ_{k_N})` of a
//! logical N-qubit state.
//!
//! Strings are packed base 4 with party 0 as the most significant digit.
//! Basis states use the same convention: party 0 is the most significant
//! bit of the computational-basis index.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported party count.
pub const MAX_PARTIES: usize = 12;
/// Above this, GHZ and W tables come from closed forms instead of a trace.
pub const DENSE_LIMIT: usize = 10;
/// Coefficients below this magnitude are dropped.
pub const SPARSITY_TOL: f64 = 1e-14;

const VALIDATION_TOL: f64 = 1e-9;

/// Sparse table of Pauli-string coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalState {
    n: usize,
    terms: Vec<(u64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    k: String,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffFile {
    n: usize,
    coeffs: Vec<CoeffEntry>,
}

fn check_parties(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_PARTIES {
        return Err(Error::Domain(format!(
            "party count must lie in [{min}, {MAX_PARTIES}], got {n}"
        )));
    }
    Ok(())
}

/// Pack a digit string (party 0 first) into a base-4 key.
pub fn pack_string(k: &[u8]) -> Result<u64> {
    let mut key = 0u64;
    for &d in k {
        if d > 3 {
            return Err(Error::Domain(format!("Pauli digit must be 0..=3, got {d}")));
        }
        key = key * 4 + d as u64;
    }
    Ok(key)
}

/// Inverse of [`pack_string`].
pub fn unpack_string(key: u64, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((key >> (2 * (n - 1 - j))) & 3) as u8).collect()
}

/// `(f, z)` bit masks and Y count of a packed string: `σ = i^{#Y} X^f Z^z`.
fn xz_masks(key: u64, n: usize) -> (usize, usize, u32) {
    let (mut f, mut z, mut ny) = (0usize, 0usize, 0u32);
    for j in 0..n {
        let d = (key >> (2 * (n - 1 - j))) & 3;
        let bit = 1usize << (n - 1 - j);
        match d {
            1 => f |= bit,
            2 => {
                f |= bit;
                z |= bit;
                ny += 1;
            }
            3 => z |= bit,
            _ => {}
        }
    }
    (f, z, ny)
}

fn i_pow(e: u32) -> Complex64 {
    match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// In-place unnormalized Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Packed key of the Pauli string with masks `(f, z)`.
fn key_from_masks(f: usize, z: usize, n: usize) -> u64 {
    let mut key = 0u64;
    for j in 0..n {
        let bit = 1usize << (n - 1 - j);
        let d = match (f & bit != 0, z & bit != 0) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        };
        key = key * 4 + d;
    }
    key
}

/// All coefficients from matrix entries `entry(r, c)`.
///
/// `tr(ρ X^f Z^z) = Σ_b (−1)^{z·b} ρ_{b, b⊕f}`, one transform per `f`.
fn coefficients_from_entries<F>(n: usize, entry: F) -> Vec<(u64, f64)>
where
    F: Fn(usize, usize) -> Complex64,
{
    let dim = 1usize << n;
    let mut terms = Vec::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for f in 0..dim {
        for (b, slot) in buf.iter_mut().enumerate() {
            *slot = entry(b, b ^ f);
        }
        walsh_hadamard(&mut buf);
        for (z, &v) in buf.iter().enumerate() {
            let ny = (f & z).count_ones();
            let c = (i_pow(ny) * v).re;
            if c.abs() >= SPARSITY_TOL {
                terms.push((key_from_masks(f, z, n), c));
            }
        }
    }
    terms.sort_by_key(|t| t.0);
    terms
}

impl LogicalState {
    /// Validated construction from explicit coefficients.
    ///
    /// Checks unit trace, `|c| ≤ 1`, and for `N ≤ 10` positivity of the
    /// reconstructed operator.
    pub fn from_coefficients<I>(n: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, f64)>,
    {
        check_parties(n, 1)?;
        let mut map: BTreeMap<u64, f64> = BTreeMap::new();
        for (k, c) in coeffs {
            if k.len() != n {
                return Err(Error::Shape(format!(
                    "Pauli string of length {} in a {n}-party table",
                    k.len()
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidState(format!("non-finite coefficient {c}")));
            }
            *map.entry(pack_string(&k)?).or_insert(0.0) += c;
        }
        let terms: Vec<(u64, f64)> = map.into_iter().filter(|t| t.1.abs() >= SPARSITY_TOL).collect();
        let state = Self { n, terms };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        let c0 = self.coefficient_packed(0);
        if (c0 - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!(
                "identity coefficient must be 1 (unit trace), got {c0}"
            )));
        }
        if let Some(&(k, c)) = self.terms.iter().find(|t| t.1.abs() > 1.0 + VALIDATION_TOL) {
            return Err(Error::InvalidState(format!(
                "coefficient {c} of {} exceeds 1 in magnitude",
                self.key_string(k)
            )));
        }
        if self.n <= DENSE_LIMIT {
            let rho = self.density_matrix();
            check_positive(&rho)?;
        }
        Ok(())
    }

    /// Coefficients of a Hermitian, unit-trace, positive `2^N × 2^N` matrix.
    pub fn from_density_matrix(rho: &DMatrix<Complex64>) -> Result<Self> {
        let dim = rho.nrows();
        if dim != rho.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Shape(format!(
                "density matrix must be square of size 2^N, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_parties(n, 1)?;
        let herm = (rho - rho.adjoint()).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if herm > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > VALIDATION_TOL || tr.im.abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("trace must be 1, got {tr}")));
        }
        check_positive(rho)?;
        let terms = coefficients_from_entries(n, |r, c| rho[(r, c)]);
        Ok(Self { n, terms })
    }

    /// Coefficients of `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_pure_state(psi: &[Complex64]) -> Result<Self> {
        let dim = psi.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Shape(format!("state length must be 2^N, got {dim}")));
        }
        let n = dim.trailing_zeros() as usize;
        check_parties(n, 1)?;
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("state norm must be 1, got {norm}")));
        }
        let terms = coefficients_from_entries(n, |r, c| psi[r] * psi[c].conj());
        Ok(Self { n, terms })
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    /// Nonzero terms as `(packed string, c)`, sorted by key.
    pub fn terms(&self) -> &[(u64, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn coefficient_packed(&self, key: u64) -> f64 {
        match self.terms.binary_search_by_key(&key, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => 0.0,
        }
    }

    /// `c_k` for a digit string, zero if absent.
    pub fn coefficient(&self, k: &[u8]) -> Result<f64> {
        if k.len() != self.n {
            return Err(Error::Shape(format!(
                "Pauli string of length {} for a {}-party state",
                k.len(),
                self.n
            )));
        }
        Ok(self.coefficient_packed(pack_string(k)?))
    }

    /// Coefficient by string such as `"0231"` or `"IXYZ"`.
    pub fn coefficient_str(&self, k: &str) -> Result<f64> {
        self.coefficient(&parse_string(k)?)
    }

    pub fn key_string(&self, key: u64) -> String {
        unpack_string(key, self.n).iter().map(|d| char::from(b'0' + d)).collect()
    }

    /// `ρ = 2^{−N} Σ_k c_k σ_k`.
    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let dim = 1usize << n;
        let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        let mut by_f: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for &(key, c) in &self.terms {
            let (f, z, ny) = xz_masks(key, n);
            let h = by_f
                .entry(f)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim]);
            h[z] += i_pow(ny) * c;
        }
        // ρ_{b⊕f, b} = 2^{−N} Σ_z h_f(z) (−1)^{z·b}
        let scale = 1.0 / dim as f64;
        for (f, mut h) in by_f {
            walsh_hadamard(&mut h);
            for (b, v) in h.into_iter().enumerate() {
                rho[(b ^ f, b)] += v * scale;
            }
        }
        rho
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CoeffFile {
            n: self.n,
            coeffs: self
                .terms
                .iter()
                .map(|&(k, c)| CoeffEntry {
                    k: self.key_string(k),
                    c,
                })
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CoeffFile = serde_json::from_str(text)?;
        let coeffs = file
            .coeffs
            .into_iter()
            .map(|e| Ok((parse_string(&e.k)?, e.c)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coefficients(file.n, coeffs)
    }
}

/// Parse `"0231"` or `"IXYZ"` into digits.
pub fn parse_string(k: &str) -> Result<Vec<u8>> {
    k.chars()
        .map(|ch| match ch {
            '0' | 'I' => Ok(0),
            '1' | 'X' => Ok(1),
            '2' | 'Y' => Ok(2),
            '3' | 'Z' => Ok(3),
            _ => Err(Error::Domain(format!("invalid Pauli character {ch:?} in {k:?}"))),
        })
        .collect()
}

fn check_positive(rho: &DMatrix<Complex64>) -> Result<()> {
    let min = rho
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    if min < -VALIDATION_TOL {
        return Err(Error::InvalidState(format!(
            "operator is not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
fn ghz_vector(n: usize) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[0] = a;
    psi[(1 << n) - 1] = a;
    psi
}

#[cfg(test)]
fn w_vector(n: usize) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
    let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for j in 0..n {
        psi[1 << j] = a;
    }
    psi
}

/// `|GHZ_N⟩ = (|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_coefficients(n: usize) -> Result<LogicalState> {
    check_parties(n, 2)?;
    Ok(ghz_closed_form(n))
}

/// `|W_N⟩ = N^{−1/2} Σ_j |e_j⟩`.
pub fn w_coefficients(n: usize) -> Result<LogicalState> {
    check_parties(n, 2)?;
    Ok(w_closed_form(n))
}

/// Strings over {I, Z} with an even number of Z give +1; strings over
/// {X, Y} with an even number of Y give `(−1)^{#Y/2}`.
pub(crate) fn ghz_closed_form(n: usize) -> LogicalState {
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0usize..(1 << n) {
        let ones = mask.count_ones();
        if ones % 2 != 0 {
            continue;
        }
        let digits = |hi: u8, lo: u8| -> Vec<u8> {
            (0..n).map(|j| if mask >> (n - 1 - j) & 1 == 1 { hi } else { lo }).collect()
        };
        terms.push((pack_string(&digits(3, 0)).unwrap(), 1.0));
        let sign = if (ones / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((pack_string(&digits(2, 1)).unwrap(), sign));
    }
    terms.sort_by_key(|t| t.0);
    LogicalState { n, terms }
}

/// Z strings on a set S give `(N − 2|S|)/N`; XX or YY on a pair with
/// I/Z elsewhere give `2/N`; everything else vanishes.
pub(crate) fn w_closed_form(n: usize) -> LogicalState {
    let nf = n as f64;
    let mut terms = Vec::new();
    for mask in 0usize..(1 << n) {
        let c = (nf - 2.0 * mask.count_ones() as f64) / nf;
        if c.abs() >= SPARSITY_TOL {
            let k: Vec<u8> = (0..n).map(|j| if mask >> (n - 1 - j) & 1 == 1 { 3 } else { 0 }).collect();
            terms.push((pack_string(&k).unwrap(), c));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for flip in [1u8, 2u8] {
                for mask in 0usize..(1 << (n - 2)) {
                    let mut k = Vec::with_capacity(n);
                    let mut bit = 0;
                    for j in 0..n {
                        if j == a || j == b {
                            k.push(flip);
                        } else {
                            k.push(if mask >> bit & 1 == 1 { 3 } else { 0 });
                            bit += 1;
                        }
                    }
                    terms.push((pack_string(&k).unwrap(), 2.0 / nf));
                }
            }
        }
    }
    terms.sort_by_key(|t| t.0);
    LogicalState { n, terms }
}
