//! Independent correctness checks for the integrals produced by
//! [`crate::darboux`]: exact `XH = 0`, the Jacobi multiplier identity and
//! pointwise gradient independence.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::darboux::{build_exponent_system, nullspace, IntegralBasis, MonomialIntegral};
use crate::linalg::RationalMatrix;
use crate::model::CyclicLVSystem;
use crate::poly::{Polynomial, RationalFunction};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Both indices 1-based.
    #[error("sample {sample} has zero coordinate x_{index}")]
    ZeroCoordinate { sample: usize, index: usize },
    #[error("no samples supplied")]
    EmptySampleSet,
    #[error("sample {sample} has non-positive coordinate x_{index}")]
    DomainViolation { sample: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub subject: String,
    pub passed: bool,
    /// First failing coefficient or point; absent on success.
    pub witness: Option<String>,
}

impl VerificationReport {
    pub fn pass(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            passed: true,
            witness: None,
        }
    }

    pub fn fail(subject: impl Into<String>, witness: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            passed: false,
            witness: Some(witness.into()),
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "PASS  {}", self.subject),
            Some(w) => write!(f, "FAIL  {}: {}", self.subject, w),
        }
    }
}

/// `X(prod x_i^l_i) = (prod x_i^l_i) * sum_i l_i K_i`, so the monomial is a
/// first integral iff every coefficient of `sum_i l_i K_i` vanishes.
pub fn check_xh_zero(
    sys: &CyclicLVSystem,
    integral: &MonomialIntegral,
) -> Result<VerificationReport, VerifyError> {
    if integral.dim() != sys.n() {
        return Err(VerifyError::DimensionMismatch {
            expected: sys.n(),
            got: integral.dim(),
        });
    }
    let subject = format!("XH = 0 for H = {integral}");
    let form = integral
        .cofactor_combination(sys)
        .expect("dimension checked above");
    Ok(match form.coeffs().iter().position(|c| !c.is_zero()) {
        None => VerificationReport::pass(subject),
        Some(j) => VerificationReport::fail(
            subject,
            format!(
                "coefficient of x{} in sum l_i K_i is {}",
                j + 1,
                format_rational(&form.coeffs()[j])
            ),
        ),
    })
}

pub fn check_linear_integral(sys: &CyclicLVSystem) -> VerificationReport {
    check_linear_integral_field(&sys.polynomial_field())
}

/// `X(x_1 + ... + x_n) = sum_i P_i`, expanded and compared to zero.
pub fn check_linear_integral_field(field: &[Polynomial]) -> VerificationReport {
    let subject = "XH = 0 for H = x1 + ... + xn";
    let Some(first) = field.first() else {
        return VerificationReport::pass(subject);
    };
    let total = field[1..].iter().fold(first.clone(), |acc, p| &acc + p);
    let report = match total.terms().next() {
        None => VerificationReport::pass(subject),
        Some((e, c)) => VerificationReport::fail(
            subject,
            format!(
                "monomial {} survives with coefficient {}",
                describe_monomial(e),
                format_rational(c)
            ),
        ),
    };
    report
}

fn describe_monomial(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0)
        .map(|(j, &p)| {
            if p == 1 {
                format!("x{}", j + 1)
            } else {
                format!("x{}^{}", j + 1, p)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// `M = 1 / (x_1 ... x_n)`.
pub fn inverse_product_multiplier(n: usize) -> RationalFunction {
    let den = (0..n).fold(Polynomial::one(n), |acc, i| &acc * &Polynomial::var(n, i));
    RationalFunction::new(Polynomial::one(n), den)
}

/// Divergence of `M X`, i.e. `sum_i d(M P_i)/dx_i`, as unsimplified
/// rational functions (one per summand).
pub fn weighted_divergence_terms(
    field: &[Polynomial],
    multiplier: &RationalFunction,
) -> Vec<RationalFunction> {
    field
        .iter()
        .enumerate()
        .map(|(i, p)| multiplier.mul_polynomial(p).partial(i))
        .collect()
}

fn check_nonzero_samples(n: usize, samples: &[Vec<Rational>]) -> Result<(), VerifyError> {
    for (s, x) in samples.iter().enumerate() {
        if x.len() != n {
            return Err(VerifyError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(Zero::is_zero) {
            return Err(VerifyError::ZeroCoordinate {
                sample: s + 1,
                index: i + 1,
            });
        }
    }
    Ok(())
}

/// Exact residual `sum_i d(M P_i)/dx_i` at each sample.
pub fn jacobi_residuals(
    field: &[Polynomial],
    multiplier: &RationalFunction,
    samples: &[Vec<Rational>],
) -> Result<Vec<Rational>, VerifyError> {
    check_nonzero_samples(field.len(), samples)?;
    let terms = weighted_divergence_terms(field, multiplier);
    samples
        .iter()
        .enumerate()
        .map(|(s, x)| {
            terms
                .iter()
                .map(|t| t.eval(x))
                .sum::<Option<Rational>>()
                .ok_or(VerifyError::ZeroCoordinate {
                    sample: s + 1,
                    index: x.iter().position(Zero::is_zero).map_or(0, |i| i + 1),
                })
        })
        .collect()
}

pub fn check_jacobi_multiplier(
    sys: &CyclicLVSystem,
    samples: &[Vec<Rational>],
) -> Result<VerificationReport, VerifyError> {
    let residuals = jacobi_residuals(
        &sys.polynomial_field(),
        &inverse_product_multiplier(sys.n()),
        samples,
    )?;
    let subject = format!("Jacobi multiplier 1/(x1...xn) at {} samples", samples.len());
    Ok(match residuals.iter().position(|r| !r.is_zero()) {
        None => VerificationReport::pass(subject),
        Some(s) => VerificationReport::fail(
            subject,
            format!(
                "residual {} at sample {} = ({})",
                format_rational(&residuals[s]),
                s + 1,
                join(&samples[s])
            ),
        ),
    })
}

fn join(x: &[Rational]) -> String {
    x.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

/// Rank of the rows `(1, ..., 1)` and `(l_i / x_i)_i` for each monomial.
/// Row `(l_i / x_i)` is `grad H / H`, so this equals the rank of the
/// gradients wherever every `H` is nonzero.
pub fn gradient_rank(basis: &IntegralBasis, x: &[Rational]) -> usize {
    let mut rows = vec![vec![Rational::one(); x.len()]];
    for h in &basis.monomials {
        rows.push(h.exponents().iter().zip(x).map(|(l, xi)| l / xi).collect());
    }
    RationalMatrix::from_rows(rows).rank()
}

pub fn check_independence(
    sys: &CyclicLVSystem,
    basis: &IntegralBasis,
    samples: &[Vec<Rational>],
) -> Result<VerificationReport, VerifyError> {
    if samples.is_empty() {
        return Err(VerifyError::EmptySampleSet);
    }
    let n = sys.n();
    for (s, x) in samples.iter().enumerate() {
        if x.len() != n {
            return Err(VerifyError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_positive()) {
            return Err(VerifyError::DomainViolation {
                sample: s + 1,
                index: i + 1,
            });
        }
    }
    let want = basis.len();
    let subject = format!(
        "independence of {want} integrals at {} samples",
        samples.len()
    );
    for (s, x) in samples.iter().enumerate() {
        let rank = gradient_rank(basis, x);
        if rank != want {
            return Ok(VerificationReport::fail(
                subject,
                format!("rank {rank} at sample {} = ({})", s + 1, join(x)),
            ));
        }
    }
    Ok(VerificationReport::pass(subject))
}

/// Compares the closed-form exponents in `basis` with the elimination
/// nullspace of the exponent system.
pub fn check_formula_nullspace(sys: &CyclicLVSystem, basis: &IntegralBasis) -> VerificationReport {
    let subject = "closed-form exponents equal the exact nullspace";
    let system = match build_exponent_system(sys) {
        Ok(s) => s,
        Err(e) => return VerificationReport::fail(subject, e.to_string()),
    };
    let ns = nullspace(&system);
    let formula: Vec<&[Rational]> = basis.monomials.iter().map(|h| h.exponents()).collect();
    if ns.len() != formula.len() {
        return VerificationReport::fail(
            subject,
            format!(
                "nullspace dimension {} but {} closed-form integrals",
                ns.len(),
                formula.len()
            ),
        );
    }
    match ns
        .iter()
        .zip(&formula)
        .position(|(a, b)| a.as_slice() != *b)
    {
        None => VerificationReport::pass(subject),
        Some(j) => VerificationReport::fail(
            subject,
            format!(
                "basis vector {} = ({}) differs from ({})",
                j + 1,
                join(&ns[j]),
                join(formula[j])
            ),
        ),
    }
}

/// Random `p/q` with `p, q` in `1..=50`.
pub fn random_positive_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    crate::rational::ratio(rng.gen_range(1..=50), rng.gen_range(1..=50))
}

pub fn random_positive_samples<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
) -> Vec<Vec<Rational>> {
    (0..count)
        .map(|_| (0..n).map(|_| random_positive_rational(rng)).collect())
        .collect()
}

/// Like [`random_positive_samples`] but with random signs.
pub fn random_nonzero_samples<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
) -> Vec<Vec<Rational>> {
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let v = random_positive_rational(rng);
                    if rng.gen_bool(0.5) {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}
