//! Exact linear algebra over the rationals.
//!
//! Elimination is fraction-free (Bareiss) on an integer copy of the matrix:
//! each row is cleared of denominators first, and every intermediate entry
//! stays a minor of that integer matrix, so the divisions are exact. Pivots
//! are the first nonzero entry found in each column, which keeps results
//! deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Rational>>,
}

/// Reduced row echelon form: pivot entries are one and are the only nonzero
/// entry in their column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub rows: Vec<Vec<Rational>>,
    pub pivots: Vec<usize>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![vec![Rational::zero(); cols]; rows],
        }
    }

    /// Panics on ragged input.
    pub fn from_rows(data: Vec<Vec<Rational>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        assert!(data.iter().all(|r| r.len() == cols), "ragged matrix rows");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i][j] = v;
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        self.data
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Fraction-free forward elimination. Returns the integer echelon rows
    /// (only the first `pivots.len()` are nonzero) and the pivot columns.
    fn bareiss_echelon(&self) -> (Vec<Vec<BigInt>>, Vec<usize>) {
        let mut a: Vec<Vec<BigInt>> = self.data.iter().map(|r| clear_denominators(r)).collect();
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            for i in r + 1..self.rows {
                for j in c + 1..self.cols {
                    let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                    debug_assert!((&v % &prev).is_zero(), "Bareiss division not exact");
                    a[i][j] = v / &prev;
                }
                a[i][c] = BigInt::zero();
            }
            prev = a[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.bareiss_echelon().1.len()
    }

    pub fn rref(&self) -> Rref {
        let (ech, pivots) = self.bareiss_echelon();
        let mut rows: Vec<Vec<Rational>> = ech
            .into_iter()
            .take(pivots.len())
            .map(|r| r.into_iter().map(Rational::from_integer).collect())
            .collect();
        for (r, &c) in pivots.iter().enumerate().rev() {
            let inv = rows[r][c].recip();
            for v in rows[r].iter_mut() {
                *v *= &inv;
            }
            for above in 0..r {
                let f = rows[above][c].clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let delta = &f * &rows[r][j];
                    rows[above][j] -= delta;
                }
            }
        }
        Rref { rows, pivots }
    }

    /// Basis of `{v : A v = 0}` in canonical form: each vector has leading
    /// entry 1, the leading positions are strictly increasing, and every
    /// vector is zero at the other vectors' leading positions.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let rref = self.rref();
        let free: Vec<usize> = (0..self.cols)
            .filter(|c| !rref.pivots.contains(c))
            .collect();
        if free.is_empty() {
            return Vec::new();
        }
        let raw: Vec<Vec<Rational>> = free
            .iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in rref.rows.iter().zip(&rref.pivots) {
                    v[p] = -row[f].clone();
                }
                v
            })
            .collect();
        RationalMatrix::from_rows(raw).rref().rows
    }
}

/// Scales a rational row by the lcm of its denominators.
fn clear_denominators(row: &[Rational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
}
