//! Exact linear algebra over rational-function entries.

use std::fmt;

use num_traits::{One, Zero};

use super::{Expr, Frac, Q};
use crate::error::{Error, Result};

trait Field: Clone {
    fn is_zero(&self) -> bool;
    fn sub_mul(&self, a: &Self, b: &Self) -> Self;
    fn div(&self, d: &Self) -> Self;
}

impl Field for Q {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sub_mul(&self, a: &Self, b: &Self) -> Self {
        self - a * b
    }
    fn div(&self, d: &Self) -> Self {
        self / d
    }
}

impl Field for Frac {
    fn is_zero(&self) -> bool {
        Frac::is_zero(self)
    }
    fn sub_mul(&self, a: &Self, b: &Self) -> Self {
        self.sub(&a.mul(b))
    }
    fn div(&self, d: &Self) -> Self {
        Frac::div(self, d).expect("pivot is nonzero")
    }
}

/// Row-reduce in place; returns pivot columns.
fn rref<F: Field>(rows: &mut [Vec<F>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let piv = rows[r][c].clone();
        for j in c..cols {
            rows[r][j] = rows[r][j].div(&piv);
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for j in c..cols {
                let v = rows[i][j].sub_mul(&f, &rows[r][j]);
                rows[i][j] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn nullspace_of<F: Field>(mut rows: Vec<Vec<F>>, cols: usize, zero: F, one: F) -> Vec<Vec<F>> {
    let pivots = rref(&mut rows, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![zero.clone(); cols];
            v[f] = one.clone();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = zero.sub_mul(&rows[r][f], &one);
            }
            v
        })
        .collect()
}

/// Nullspace basis of a constant matrix given by rows.
pub fn nullspace_q(rows: Vec<Vec<Q>>, cols: usize) -> Vec<Vec<Q>> {
    nullspace_of(rows, cols, Q::zero(), Q::one())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Frac>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Frac::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Frac::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Frac>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// A matrix with `rows` rows and no columns is allowed and has
    /// determinant 1 when square-empty.
    pub fn empty(rows: usize) -> Self {
        RationalMatrix::zeros(rows, 0)
    }

    pub fn from_exprs(rows: &[Vec<Expr>]) -> Result<Self> {
        let fr: Result<Vec<Vec<Frac>>> = rows
            .iter()
            .map(|r| r.iter().map(Frac::from_expr).collect())
            .collect();
        RationalMatrix::from_rows(fr?)
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|v| Frac::int(*v)).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Frac {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Frac) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Frac] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Frac> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    fn to_rows(&self) -> Vec<Vec<Frac>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = RationalMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RationalMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Frac::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Frac]) -> Result<Vec<Frac>> {
        if v.len() != self.cols {
            return Err(Error::Shape("vector length does not match columns".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Frac::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect())
    }

    pub fn is_constant(&self) -> bool {
        self.data.iter().all(|f| f.as_constant().is_some())
    }

    pub fn trace(&self) -> Result<Frac> {
        self.require_square()?;
        Ok((0..self.rows).fold(Frac::zero(), |a, i| a.add(self.get(i, i))))
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<Frac> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(Frac::one());
        }
        let mut a = self.to_rows();
        let mut sign = Frac::one();
        let mut prev = Frac::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return Ok(Frac::zero());
                };
                a.swap(k, p);
                sign = sign.neg();
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                    a[i][j] = v.div(&prev)?;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign.mul(&a[n - 1][n - 1]))
    }

    /// Determinant after deleting the listed rows; the result must be square.
    pub fn minor_rows(&self, removed: &[usize]) -> Result<Frac> {
        if removed.iter().any(|&r| r >= self.rows) {
            return Err(Error::Shape("row index out of range".into()));
        }
        let keep: Vec<Vec<Frac>> = (0..self.rows)
            .filter(|i| !removed.contains(i))
            .map(|i| self.row(i).to_vec())
            .collect();
        let sub = RationalMatrix {
            rows: keep.len(),
            cols: self.cols,
            data: keep.into_iter().flatten().collect(),
        };
        sub.det()
    }

    pub fn rank(&self) -> usize {
        if self.is_constant() {
            let mut rows: Vec<Vec<Q>> = (0..self.rows)
                .map(|i| self.row(i).iter().map(|f| f.as_constant().unwrap()).collect())
                .collect();
            rref(&mut rows, self.cols).len()
        } else {
            rref(&mut self.to_rows(), self.cols).len()
        }
    }

    /// Gauss-Jordan inverse, checked by multiplying back.
    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.rows;
        let mut aug: Vec<Vec<Frac>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { Frac::one() } else { Frac::zero() }));
                r
            })
            .collect();
        let pivots = rref(&mut aug, 2 * n);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        let inv = RationalMatrix::from_rows(aug.into_iter().map(|r| r[n..].to_vec()).collect())?;
        let check = self.mul(&inv)?;
        if check != RationalMatrix::identity(n) {
            let diff_zero = (0..n).all(|i| {
                (0..n).all(|j| {
                    let id = if i == j { Frac::one() } else { Frac::zero() };
                    check.get(i, j).sub(&id).is_zero()
                })
            });
            if !diff_zero {
                return Err(Error::Singular);
            }
        }
        Ok(inv)
    }

    /// Basis of `{v : M v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Frac>> {
        if self.is_constant() {
            let rows: Vec<Vec<Q>> = (0..self.rows)
                .map(|i| self.row(i).iter().map(|f| f.as_constant().unwrap()).collect())
                .collect();
            return nullspace_q(rows, self.cols)
                .into_iter()
                .map(|v| v.into_iter().map(Frac::constant).collect())
                .collect();
        }
        nullspace_of(self.to_rows(), self.cols, Frac::zero(), Frac::one())
    }

    /// One solution of `M v = b`.
    pub fn solve(&self, b: &[Frac]) -> Result<Vec<Frac>> {
        if b.len() != self.rows {
            return Err(Error::Shape("right-hand side length does not match rows".into()));
        }
        let mut aug: Vec<Vec<Frac>> = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        let pivots = rref(&mut aug, self.cols + 1);
        if pivots.last() == Some(&self.cols) {
            return Err(Error::Inconsistent);
        }
        let mut x = vec![Frac::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug[r][self.cols].clone();
        }
        Ok(x)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j).to_expr())?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
