//! Darboux first integrals built from the invariant hyperplanes `x_i = 0`.
//!
//! A product `x_1^l_1 ... x_n^l_n` is a first integral exactly when the
//! cofactors cancel, `sum_i l_i K_i = 0`. Collecting the coefficient of each
//! `x_i` turns that into the homogeneous system
//!
//! ```text
//! k_{i-1} l_{i-1} - k_i l_{i+1} = 0,   i = 1..n (cyclic)
//! ```
//!
//! which couples every exponent to the one two places further on. For odd
//! `n` that is a single cycle through all indices and always closes with a
//! one-dimensional solution. For even `n` it splits into the odd-index and
//! even-index chains; both close, giving two solutions, precisely when
//! `k_1 k_3 ... k_{n-1} = k_2 k_4 ... k_n`, and neither closes otherwise.
//!
//! The closed-form chains are in [`exponents_odd`] and [`exponents_even`];
//! [`nullspace`] solves the same system by elimination so the two can be
//! checked against each other.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::RationalMatrix;
use crate::model::{CyclicLVSystem, LinearForm};
use crate::rational::{format_rational, is_integer, pow_int, rational_to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DarbouxError {
    #[error("the exponent system is not defined for n = {0}")]
    UnsupportedDimension(usize),
    #[error("operation requires {expected} n, got n = {n}")]
    WrongParity { n: usize, expected: Parity },
    #[error("k_1 k_3 ... k_(n-1) = {odd} differs from k_2 k_4 ... k_n = {even}")]
    ResonanceViolated { odd: String, even: String },
    #[error("integral undefined at this state: coordinate x_{index} = {value}")]
    DomainViolation { index: usize, value: String },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a monomial integral needs at least one nonzero exponent")]
    ZeroExponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

/// Which regime a system falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "N2")]
    N2,
    #[serde(rename = "ODD")]
    Odd,
    #[serde(rename = "EVEN_RESONANT")]
    EvenResonant,
    #[serde(rename = "EVEN_NONRESONANT")]
    EvenNonresonant,
}

impl Classification {
    pub fn monomial_count(self) -> usize {
        match self {
            Classification::N2 | Classification::EvenNonresonant => 0,
            Classification::Odd => 1,
            Classification::EvenResonant => 2,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::N2 => "N2",
            Classification::Odd => "ODD",
            Classification::EvenResonant => "EVEN_RESONANT",
            Classification::EvenNonresonant => "EVEN_NONRESONANT",
        })
    }
}

/// `H = x_1 + ... + x_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearIntegral {
    n: usize,
}

impl LinearIntegral {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> Vec<Rational> {
        vec![Rational::one(); self.n]
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, DarbouxError> {
        check_len(self.n, x.len())?;
        Ok(x.iter().sum())
    }

    pub fn evaluate_exact(&self, x: &[Rational]) -> Result<Rational, DarbouxError> {
        check_len(self.n, x.len())?;
        Ok(x.iter().sum())
    }
}

/// `H = x_1^l_1 ... x_n^l_n`, scaled so the first nonzero exponent is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialIntegral {
    exponents: Vec<Rational>,
}

impl MonomialIntegral {
    /// Normalizes by the first nonzero exponent; any power of a first
    /// integral is again one, so this loses nothing.
    pub fn new(mut exponents: Vec<Rational>) -> Result<Self, DarbouxError> {
        let lead = exponents
            .iter()
            .find(|v| !v.is_zero())
            .cloned()
            .ok_or(DarbouxError::ZeroExponents)?;
        if !lead.is_one() {
            for v in exponents.iter_mut() {
                *v /= &lead;
            }
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> &[Rational] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn has_integer_exponents(&self) -> bool {
        self.exponents.iter().all(is_integer)
    }

    /// `exp(sum l_i ln x_i)` on the positive orthant; integer exponents use
    /// repeated multiplication and only need `x_i != 0` where `l_i < 0`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, DarbouxError> {
        check_len(self.dim(), x.len())?;
        if self.has_integer_exponents() {
            let mut acc = 1.0;
            for (i, (l, &xi)) in self.exponents.iter().zip(x).enumerate() {
                if l.is_negative() && xi == 0.0 {
                    return Err(domain(i, xi));
                }
                acc *= xi.powi(rational_to_f64(l) as i32);
            }
            return Ok(acc);
        }
        let mut log = 0.0;
        for (i, (l, &xi)) in self.exponents.iter().zip(x).enumerate() {
            if xi.is_nan() || xi <= 0.0 {
                return Err(domain(i, xi));
            }
            if !l.is_zero() {
                log += rational_to_f64(l) * xi.ln();
            }
        }
        Ok(log.exp())
    }

    /// Exact value; requires integer exponents.
    pub fn evaluate_exact(&self, x: &[Rational]) -> Result<Rational, DarbouxError> {
        check_len(self.dim(), x.len())?;
        let mut acc = Rational::one();
        for (i, (l, xi)) in self.exponents.iter().zip(x).enumerate() {
            if !is_integer(l) {
                return Err(DarbouxError::DomainViolation {
                    index: i + 1,
                    value: format!(
                        "{} (exponent {} is not an integer)",
                        format_rational(xi),
                        format_rational(l)
                    ),
                });
            }
            let p = pow_int(xi, l.numer()).ok_or_else(|| DarbouxError::DomainViolation {
                index: i + 1,
                value: format_rational(xi),
            })?;
            acc *= p;
        }
        Ok(acc)
    }

    /// `sum_i l_i K_i`; zero exactly when this is a first integral.
    pub fn cofactor_combination(&self, sys: &CyclicLVSystem) -> Result<LinearForm, DarbouxError> {
        check_len(sys.n(), self.dim())?;
        Ok(LinearForm::combination(&self.exponents, &sys.cofactors()))
    }
}

impl fmt::Display for MonomialIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_zero())
            .map(|(i, l)| {
                if l.is_one() {
                    format!("x{}", i + 1)
                } else {
                    format!("x{}^({})", i + 1, format_rational(l))
                }
            })
            .collect();
        f.write_str(&parts.join(" * "))
    }
}

fn domain(i: usize, v: f64) -> DarbouxError {
    DarbouxError::DomainViolation {
        index: i + 1,
        value: format!("{v}"),
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), DarbouxError> {
    if expected == got {
        Ok(())
    } else {
        Err(DarbouxError::DimensionMismatch { expected, got })
    }
}

/// Either kind of integral, for uniform evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FirstIntegral {
    Linear(LinearIntegral),
    Monomial(MonomialIntegral),
}

impl FirstIntegral {
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, DarbouxError> {
        match self {
            FirstIntegral::Linear(h) => h.evaluate(x),
            FirstIntegral::Monomial(h) => h.evaluate(x),
        }
    }

    pub fn evaluate_exact(&self, x: &[Rational]) -> Result<Rational, DarbouxError> {
        match self {
            FirstIntegral::Linear(h) => h.evaluate_exact(x),
            FirstIntegral::Monomial(h) => h.evaluate_exact(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralBasis {
    pub classification: Classification,
    pub linear: LinearIntegral,
    pub monomials: Vec<MonomialIntegral>,
}

impl IntegralBasis {
    /// `H1` followed by the monomial integrals, in order.
    pub fn integrals(&self) -> Vec<FirstIntegral> {
        std::iter::once(FirstIntegral::Linear(self.linear))
            .chain(self.monomials.iter().cloned().map(FirstIntegral::Monomial))
            .collect()
    }

    pub fn len(&self) -> usize {
        1 + self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Coefficient matrix of `sum_i l_i K_i` read off coordinate by coordinate:
/// row `i` is `k_{i-1} l_{i-1} - k_i l_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentSystem {
    pub matrix: RationalMatrix,
}

pub fn build_exponent_system(sys: &CyclicLVSystem) -> Result<ExponentSystem, DarbouxError> {
    let n = sys.n();
    if n < 3 {
        return Err(DarbouxError::UnsupportedDimension(n));
    }
    let mut m = RationalMatrix::zeros(n, n);
    for i in 1..=n as isize {
        let row = sys.wrap(i);
        m.set(row, sys.wrap(i - 1), sys.k(i - 1).clone());
        m.set(row, sys.wrap(i + 1), -sys.k(i).clone());
    }
    Ok(ExponentSystem { matrix: m })
}

/// Canonical basis of the exponent vectors solving the system, each with
/// leading entry 1 and ordered by the position of that entry.
pub fn nullspace(system: &ExponentSystem) -> Vec<Vec<Rational>> {
    system.matrix.nullspace()
}

/// `k_from k_{from+2} ... ` up to and including `to` (1-based); 1 if empty.
fn chain_product(sys: &CyclicLVSystem, from: usize, to: usize) -> Rational {
    (from..=to)
        .step_by(2)
        .map(|m| sys.k(m as isize).clone())
        .product()
}

pub fn exponents_odd(sys: &CyclicLVSystem) -> Result<MonomialIntegral, DarbouxError> {
    let n = sys.n();
    if n % 2 == 0 {
        return Err(DarbouxError::WrongParity {
            n,
            expected: Parity::Odd,
        });
    }
    let mut l = vec![Rational::zero(); n];
    l[0] = Rational::one();
    for j in 2..=n {
        l[j - 1] = if j % 2 == 1 {
            chain_product(sys, 1, j - 2) / chain_product(sys, 2, j - 1)
        } else {
            chain_product(sys, j + 1, n) / chain_product(sys, j, n - 1)
        };
    }
    MonomialIntegral::new(l)
}

/// Products of the odd-indexed and even-indexed parameters.
fn alternating_products(sys: &CyclicLVSystem) -> (Rational, Rational) {
    let n = sys.n();
    (chain_product(sys, 1, n), chain_product(sys, 2, n))
}

pub fn resonance_condition(sys: &CyclicLVSystem) -> Result<bool, DarbouxError> {
    let n = sys.n();
    if n % 2 == 1 {
        return Err(DarbouxError::WrongParity {
            n,
            expected: Parity::Even,
        });
    }
    let (odd, even) = alternating_products(sys);
    Ok(odd == even)
}

pub fn exponents_even(
    sys: &CyclicLVSystem,
) -> Result<(MonomialIntegral, MonomialIntegral), DarbouxError> {
    let n = sys.n();
    if n % 2 == 1 || n < 4 {
        return Err(DarbouxError::WrongParity {
            n,
            expected: Parity::Even,
        });
    }
    if !resonance_condition(sys)? {
        let (odd, even) = alternating_products(sys);
        return Err(DarbouxError::ResonanceViolated {
            odd: format_rational(&odd),
            even: format_rational(&even),
        });
    }
    let mut odd_chain = vec![Rational::zero(); n];
    let mut even_chain = vec![Rational::zero(); n];
    odd_chain[0] = Rational::one();
    even_chain[1] = Rational::one();
    for j in 3..=n {
        if j % 2 == 1 {
            odd_chain[j - 1] = chain_product(sys, j + 1, n) / chain_product(sys, j, n - 1);
        } else {
            even_chain[j - 1] = chain_product(sys, 2, j - 2) / chain_product(sys, 3, j - 1);
        }
    }
    Ok((
        MonomialIntegral::new(odd_chain)?,
        MonomialIntegral::new(even_chain)?,
    ))
}

pub fn integral_basis(sys: &CyclicLVSystem) -> IntegralBasis {
    let n = sys.n();
    let linear = LinearIntegral::new(n);
    let (classification, monomials) = if n == 2 {
        (Classification::N2, Vec::new())
    } else if n % 2 == 1 {
        let h = exponents_odd(sys).expect("odd n");
        (Classification::Odd, vec![h])
    } else {
        match exponents_even(sys) {
            Ok((h2, h3)) => (Classification::EvenResonant, vec![h2, h3]),
            Err(DarbouxError::ResonanceViolated { .. }) => {
                (Classification::EvenNonresonant, Vec::new())
            }
            Err(e) => unreachable!("even n >= 4 cannot fail with {e}"),
        }
    };
    IntegralBasis {
        classification,
        linear,
        monomials,
    }
}

/// Convenience for callers that hold exponents as plain integers.
pub fn monomial_from_integers(exps: &[i64]) -> Result<MonomialIntegral, DarbouxError> {
    MonomialIntegral::new(
        exps.iter()
            .map(|&v| Rational::from_integer(BigInt::from(v)))
            .collect(),
    )
}
