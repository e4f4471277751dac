//! MABK, Cabello and CHSH functionals with their local bounds.

use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Correlators, SchemeKind};
use crate::error::{Error, Result};

/// Margin above the local bound required to report a violation.
pub const VIOLATION_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Mabk,
    Cabello,
    Chsh,
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Functional::Mabk => "mabk",
            Functional::Cabello => "cabello",
            Functional::Chsh => "chsh",
        })
    }
}

/// Which of `B_N`, `B'_N` attained the MABK maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MabkBranch {
    Primary,
    Primed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    pub value: f64,
    pub local_bound: f64,
    pub violated: bool,
    pub functional: Functional,
    pub branch: Option<MabkBranch>,
}

impl BellResult {
    pub fn new(functional: Functional, value: f64, local_bound: f64) -> Self {
        Self {
            value,
            local_bound,
            violated: value > local_bound + VIOLATION_GUARD,
            functional,
            branch: None,
        }
    }

    /// `value − local_bound`.
    pub fn gap(&self) -> f64 {
        self.value - self.local_bound
    }
}

/// Integer numerators of `B_N` and `B'_N` over the common denominator
/// `2^{N−1}`, indexed by setting string in base 2 (party 0 first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MabkCoefficients {
    n: usize,
    b: Vec<i64>,
    b_primed: Vec<i64>,
}

/// Largest party count for the exact recursion.
pub const MABK_MAX_PARTIES: usize = 30;

impl MabkCoefficients {
    /// Run the recursion on formal correlator symbols.
    ///
    /// With numerators over `2^{N−1}` each step is
    /// `b_N(x0) = b + b'`, `b_N(x1) = b − b'`,
    /// `b'_N(x0) = b' − b`, `b'_N(x1) = b' + b`.
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MABK_MAX_PARTIES).contains(&n) {
            return Err(Error::Domain(format!(
                "MABK needs 2..={MABK_MAX_PARTIES} parties, got {n}"
            )));
        }
        let mut b = vec![1i64, 0];
        let mut bp = vec![0i64, 1];
        for _ in 1..n {
            let mut nb = Vec::with_capacity(2 * b.len());
            let mut nbp = Vec::with_capacity(2 * b.len());
            for (&u, &v) in b.iter().zip(&bp) {
                nb.push(u + v);
                nb.push(u - v);
                nbp.push(v - u);
                nbp.push(v + u);
            }
            b = nb;
            bp = nbp;
        }
        Ok(Self { n, b, b_primed: bp })
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn numerators(&self) -> &[i64] {
        &self.b
    }

    pub fn primed_numerators(&self) -> &[i64] {
        &self.b_primed
    }

    /// `2^{N−1}`.
    pub fn denominator(&self) -> i64 {
        1i64 << (self.n - 1)
    }

    /// `α_x = numerator / 2^{N−1}`.
    pub fn coefficient(&self, xi: usize) -> f64 {
        self.b[xi] as f64 / self.denominator() as f64
    }

    pub fn primed_coefficient(&self, xi: usize) -> f64 {
        self.b_primed[xi] as f64 / self.denominator() as f64
    }

    /// `2^{⌊N/2⌋}`.
    pub fn local_bound(&self) -> f64 {
        (1u64 << (self.n / 2)) as f64
    }

    /// `(Σ_x b_x E_x, Σ_x b'_x E_x)` in integers for `E_x ∈ {−1, 0, 1}`.
    pub fn contract_integer(&self, e: &[i64]) -> (i64, i64) {
        let s = self.b.iter().zip(e).map(|(a, v)| a * v).sum();
        let sp = self.b_primed.iter().zip(e).map(|(a, v)| a * v).sum();
        (s, sp)
    }

    /// `S = 2^{⌊N/2⌋} max(|⟨B_N⟩|, |⟨B'_N⟩|)` from correlators.
    pub fn evaluate(&self, e: &[f64]) -> Result<BellResult> {
        if e.len() != self.b.len() {
            return Err(Error::Shape(format!(
                "MABK needs {} correlators, got {}",
                self.b.len(),
                e.len()
            )));
        }
        let den = self.denominator() as f64;
        let s: f64 = self.b.iter().zip(e).map(|(&a, v)| a as f64 * v).sum::<f64>() / den;
        let sp: f64 = self.b_primed.iter().zip(e).map(|(&a, v)| a as f64 * v).sum::<f64>() / den;
        let (best, branch) = if s.abs() >= sp.abs() {
            (s.abs(), MabkBranch::Primary)
        } else {
            (sp.abs(), MabkBranch::Primed)
        };
        let bound = self.local_bound();
        let mut r = BellResult::new(Functional::Mabk, bound * best, bound);
        r.branch = Some(branch);
        Ok(r)
    }
}

fn require_two_inputs(inputs: usize, what: &str) -> Result<()> {
    if inputs != 2 {
        return Err(Error::Shape(format!("{what} needs 2 inputs per party, got {inputs}")));
    }
    Ok(())
}

/// MABK value of a behavior with two inputs per party.
pub fn mabk_value(b: &Behavior) -> Result<BellResult> {
    require_two_inputs(b.inputs(), "MABK")?;
    MabkCoefficients::new(b.n_parties())?.evaluate(b.correlators().values())
}

/// MABK value from correlators alone.
pub fn mabk_from_correlators(e: &Correlators) -> Result<BellResult> {
    require_two_inputs(e.inputs(), "MABK")?;
    MabkCoefficients::new(e.n_parties())?.evaluate(e.values())
}

/// One signed probability `sign · p(o|x)` of the Cabello functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CabelloTerm {
    pub sign: i8,
    pub o: Vec<u8>,
    pub x: Vec<u8>,
}

/// Terms of the Cabello functional with `x = 0 → Z`, `x = 1 → X`.
pub fn cabello_terms(n: usize) -> Result<Vec<CabelloTerm>> {
    if n < 2 {
        return Err(Error::Domain(format!("Cabello functional needs N >= 2, got {n}")));
    }
    let zeros = vec![0u8; n];
    let ones = vec![1u8; n];
    let e = |j: usize| {
        let mut v = zeros.clone();
        v[j] = 1;
        v
    };
    let mut terms = vec![CabelloTerm {
        sign: 1,
        o: zeros.clone(),
        x: zeros.clone(),
    }];
    for j in 0..n {
        terms.push(CabelloTerm {
            sign: 1,
            o: e(j),
            x: zeros.clone(),
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut x = zeros.clone();
            x[i] = 1;
            x[j] = 1;
            terms.push(CabelloTerm { sign: -1, o: e(i), x: x.clone() });
            terms.push(CabelloTerm { sign: -1, o: e(j), x });
        }
    }
    terms.push(CabelloTerm {
        sign: -1,
        o: zeros.clone(),
        x: ones.clone(),
    });
    terms.push(CabelloTerm {
        sign: -1,
        o: ones.clone(),
        x: ones,
    });
    Ok(terms)
}

/// Cabello functional; local bound 0. `kind` must certify the Z/X input
/// convention.
pub fn cabello_value(b: &Behavior, kind: SchemeKind) -> Result<BellResult> {
    if kind != SchemeKind::Cabello {
        return Err(Error::Domain(
            "Cabello functional requires a scheme with x=0 -> Z and x=1 -> X".into(),
        ));
    }
    require_two_inputs(b.inputs(), "Cabello")?;
    let mut value = 0.0;
    for t in cabello_terms(b.n_parties())? {
        value += t.sign as f64 * b.prob(&t.o, &t.x)?;
    }
    Ok(BellResult::new(Functional::Cabello, value, 0.0))
}

/// `S = |E00 + E01 + E10 − E11|`, local bound 2.
pub fn chsh_value(b: &Behavior) -> Result<BellResult> {
    if b.n_parties() != 2 || b.inputs() != 2 {
        return Err(Error::Shape(format!(
            "CHSH needs 2 parties with 2 inputs, got {} and {}",
            b.n_parties(),
            b.inputs()
        )));
    }
    let e = |x: [u8; 2]| b.full_correlator(&x);
    let s = e([0, 0])? + e([0, 1])? + e([1, 0])? - e([1, 1])?;
    Ok(BellResult::new(Functional::Chsh, s.abs(), 2.0))
}
