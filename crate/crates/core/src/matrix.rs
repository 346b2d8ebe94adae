//! Square matrices of polynomials, plus a small dense null-space routine for
//! floating point matrices.

use num_bigint::BigInt;

use crate::poly::{Polynomial, Ring};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix<T> {
    entries: Vec<Vec<Polynomial<T>>>,
}

impl<T: Ring> PolyMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![vec![Polynomial::zero(); n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i][i] = Polynomial::one();
        }
        m
    }

    pub fn from_rows(entries: Vec<Vec<Polynomial<T>>>) -> Self {
        assert!(
            entries.iter().all(|r| r.len() == entries.len()),
            "square matrix"
        );
        Self { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial<T> {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Polynomial<T>>] {
        &self.entries
    }

    pub fn add_to(&mut self, i: usize, j: usize, p: &Polynomial<T>) {
        self.entries[i][j] = &self.entries[i][j] + p;
    }

    /// `self · other mod z^order`
    pub fn mul_truncated(&self, other: &Self, order: usize) -> Self {
        let n = self.size();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                if self.entries[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    let p = (&self.entries[i][k] * &other.entries[k][j]).truncate(order);
                    out.entries[i][j] = &out.entries[i][j] + &p;
                }
            }
        }
        out
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|p| p.truncate(order)).collect())
                .collect(),
        }
    }

    /// Determinant by cofactor expansion along the first row; exponential,
    /// meant as a cross-check on small matrices.
    pub fn determinant_cofactor(&self) -> Polynomial<T> {
        fn minor<T: Ring>(m: &[Vec<Polynomial<T>>], col: usize) -> Vec<Vec<Polynomial<T>>> {
            m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != col)
                        .map(|(_, p)| p.clone())
                        .collect()
                })
                .collect()
        }
        fn det<T: Ring>(m: &[Vec<Polynomial<T>>]) -> Polynomial<T> {
            match m.len() {
                0 => Polynomial::one(),
                1 => m[0][0].clone(),
                _ => {
                    let mut acc = Polynomial::zero();
                    for j in 0..m.len() {
                        if m[0][j].is_zero() {
                            continue;
                        }
                        let term = &m[0][j] * &det(&minor(m, j));
                        acc = if j % 2 == 0 {
                            &acc + &term
                        } else {
                            &acc - &term
                        };
                    }
                    acc
                }
            }
        }
        det(&self.entries)
    }
}

impl<T: Ring + num_traits::ToPrimitive> PolyMatrix<T> {
    pub fn eval_float<S: Scalar>(&self, z: S) -> Vec<Vec<S>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|p| p.eval_float(z)).collect())
            .collect()
    }
}

impl PolyMatrix<BigInt> {
    /// Fraction-free (Bareiss) elimination over `Z[z]`; every division is exact.
    pub fn determinant(&self) -> Polynomial<BigInt> {
        let n = self.size();
        if n == 0 {
            return Polynomial::one();
        }
        let mut a = self.entries.clone();
        let mut prev = Polynomial::<BigInt>::one();
        let mut negate = false;
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        negate = !negate;
                    }
                    None => return Polynomial::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = num
                        .div_exact(&prev)
                        .expect("Bareiss division is exact over an integral domain");
                }
                a[i][k] = Polynomial::zero();
            }
            prev = a[k][k].clone();
        }
        let det = a[n - 1][n - 1].clone();
        if negate {
            -det
        } else {
            det
        }
    }
}

/// Basis of the numerical null space of a square matrix, by Gaussian
/// elimination with complete pivoting. Pivots below `tol` times the largest
/// entry magnitude count as zero.
pub fn null_space<S: Scalar>(a: &[Vec<S>], tol: S) -> Vec<Vec<S>> {
    let n = a.len();
    let mut m: Vec<Vec<S>> = a.to_vec();
    let scale = m
        .iter()
        .flatten()
        .fold(S::zero(), |acc, v| acc.max(v.abs()))
        .max(S::one());
    let threshold = tol * scale;
    let mut cols: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for k in 0..n {
        let mut best = (k, k, S::zero());
        for (i, row) in m.iter().enumerate().skip(k) {
            for j in k..n {
                let v = row[cols[j]].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        m.swap(k, best.0);
        cols.swap(k, best.1);
        let pivot = m[k][cols[k]];
        for i in k + 1..n {
            let f = m[i][cols[k]] / pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let c = cols[j];
                let v = m[k][c];
                m[i][c] = m[i][c] - f * v;
            }
        }
        rank += 1;
    }
    let mut basis = Vec::with_capacity(n - rank);
    for free in rank..n {
        let mut x = vec![S::zero(); n];
        x[cols[free]] = S::one();
        for k in (0..rank).rev() {
            let mut acc = S::zero();
            for j in k + 1..n {
                acc = acc + m[k][cols[j]] * x[cols[j]];
            }
            x[cols[k]] = -acc / m[k][cols[k]];
        }
        basis.push(x);
    }
    basis
}
