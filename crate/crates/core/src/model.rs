//! The cyclic Lotka-Volterra system, its vector field and the cofactors of
//! the invariant coordinate hyperplanes `x_i = 0`.

use num_traits::Zero;
use thiserror::Error;

use crate::poly::Polynomial;
use crate::rational::{format_rational, rational_to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    /// 1-based index of the vanishing rate parameter.
    #[error("rate parameter k_{0} is zero")]
    ZeroParameter(usize),
    #[error("dimension {0} is too small, at least 2 parameters are required")]
    DimensionTooSmall(usize),
    #[error("expected a state of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// `x_i' = x_i (k_i x_{i+1} - k_{i-1} x_{i-1})` with cyclic indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicLVSystem {
    k: Vec<Rational>,
    k_f64: Vec<f64>,
}

impl CyclicLVSystem {
    pub fn new(k: Vec<Rational>) -> Result<Self, ModelError> {
        if k.len() < 2 {
            return Err(ModelError::DimensionTooSmall(k.len()));
        }
        if let Some(i) = k.iter().position(Zero::is_zero) {
            return Err(ModelError::ZeroParameter(i + 1));
        }
        let k_f64 = k.iter().map(rational_to_f64).collect();
        Ok(Self { k, k_f64 })
    }

    pub fn from_integers(k: &[i64]) -> Result<Self, ModelError> {
        Self::new(k.iter().map(|&v| crate::rational::int(v)).collect())
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn params(&self) -> &[Rational] {
        &self.k
    }

    /// `k_i` for any integer `i`, read cyclically (`k_0 = k_n`).
    pub fn k(&self, i: isize) -> &Rational {
        &self.k[self.wrap(i)]
    }

    /// 0-based storage slot of the 1-based cyclic index `i`.
    pub(crate) fn wrap(&self, i: isize) -> usize {
        (i - 1).rem_euclid(self.n() as isize) as usize
    }

    fn check_dim(&self, got: usize) -> Result<(), ModelError> {
        if got == self.n() {
            Ok(())
        } else {
            Err(ModelError::DimensionMismatch {
                expected: self.n(),
                got,
            })
        }
    }

    fn check_index(&self, i: usize) -> Result<(), ModelError> {
        if (1..=self.n()).contains(&i) {
            Ok(())
        } else {
            Err(ModelError::IndexOutOfRange {
                index: i,
                n: self.n(),
            })
        }
    }

    pub fn vector_field(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_dim(x.len())?;
        let mut out = vec![0.0; x.len()];
        self.vector_field_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked variant for the integrator's inner loop.
    pub(crate) fn vector_field_into(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let next = (i + 1) % n;
            let prev = (i + n - 1) % n;
            out[i] = x[i] * (self.k_f64[i] * x[next] - self.k_f64[prev] * x[prev]);
        }
    }

    pub fn vector_field_exact(&self, x: &[Rational]) -> Result<Vec<Rational>, ModelError> {
        self.check_dim(x.len())?;
        let n = x.len();
        Ok((0..n)
            .map(|i| {
                let next = (i + 1) % n;
                let prev = (i + n - 1) % n;
                &x[i] * (&self.k[i] * &x[next] - &self.k[prev] * &x[prev])
            })
            .collect())
    }

    /// Components `P_1..P_n` as exact polynomials.
    pub fn polynomial_field(&self) -> Vec<Polynomial> {
        let n = self.n();
        (1..=n)
            .map(|i| {
                let xi = Polynomial::var(n, i - 1);
                let k_form = self.cofactor_unchecked(i).to_polynomial();
                &xi * &k_form
            })
            .collect()
    }

    /// Cofactor `K_i = k_i x_{i+1} - k_{i-1} x_{i-1}` of the hyperplane `x_i = 0`.
    pub fn cofactor(&self, i: usize) -> Result<LinearForm, ModelError> {
        self.check_index(i)?;
        Ok(self.cofactor_unchecked(i))
    }

    fn cofactor_unchecked(&self, i: usize) -> LinearForm {
        let i = i as isize;
        let mut c = vec![Rational::zero(); self.n()];
        // for n = 2 both terms land on the same coordinate
        c[self.wrap(i + 1)] += self.k(i);
        c[self.wrap(i - 1)] -= self.k(i - 1);
        LinearForm { coeffs: c }
    }

    pub fn cofactors(&self) -> Vec<LinearForm> {
        (1..=self.n()).map(|i| self.cofactor_unchecked(i)).collect()
    }

    /// Exact check that `X(x_i) = K_i x_i`.
    pub fn verify_hyperplane_invariance(&self, i: usize) -> Result<bool, ModelError> {
        let k = self.cofactor(i)?;
        Ok(is_invariant_hyperplane(&self.polynomial_field(), i, &k))
    }
}

/// True iff `field[i-1] - cofactor * x_i` is the zero polynomial.
pub fn is_invariant_hyperplane(field: &[Polynomial], i: usize, cofactor: &LinearForm) -> bool {
    let n = field.len();
    let xi = Polynomial::var(n, i - 1);
    let residual = &field[i - 1] - &(&cofactor.to_polynomial() * &xi);
    residual.is_zero()
}

/// Homogeneous degree-one polynomial `sum_j c_j x_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    coeffs: Vec<Rational>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Rational] {
        &mut self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(c, v)| rational_to_f64(c) * v)
            .sum()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::linear(&self.coeffs)
    }

    /// `sum_i weights_i * forms_i`.
    pub fn combination(weights: &[Rational], forms: &[LinearForm]) -> LinearForm {
        assert_eq!(weights.len(), forms.len());
        let dim = forms.first().map_or(0, LinearForm::dim);
        let mut c = vec![Rational::zero(); dim];
        for (w, f) in weights.iter().zip(forms) {
            if w.is_zero() {
                continue;
            }
            for (acc, v) in c.iter_mut().zip(&f.coeffs) {
                *acc += w * v;
            }
        }
        LinearForm { coeffs: c }
    }
}

impl std::fmt::Display for LinearForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| format!("({})*x{}", format_rational(c), j + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
