//! Dense matrices over an exact field, and over polynomials.
//!
//! Row-major storage. Gaussian elimination always picks the lowest-index
//! nonzero pivot, so every reduction is deterministic.

use crate::field::{FieldSpec, Scalar};
use crate::poly::Poly;

/// Entry types a matrix can hold: scalars and polynomials.
pub trait Entry: Clone + PartialEq {
    fn zero_of(field: &FieldSpec) -> Self;
    fn one_of(field: &FieldSpec) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Entry for Scalar {
    fn zero_of(field: &FieldSpec) -> Self {
        field.zero()
    }
    fn one_of(field: &FieldSpec) -> Self {
        field.one()
    }
    fn add(&self, other: &Self) -> Self {
        Scalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Scalar::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Scalar::mul(self, other)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl Entry for Poly {
    fn zero_of(field: &FieldSpec) -> Self {
        Poly::zero(field)
    }
    fn one_of(field: &FieldSpec) -> Self {
        Poly::one(field)
    }
    fn add(&self, other: &Self) -> Self {
        Poly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Poly::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Poly::mul(self, other)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Matrix of scalars.
pub type ScalarMat = Mat<Scalar>;
/// Matrix with polynomial entries (degeneration maps, pencils in x).
pub type PolyMat = Mat<Poly>;

impl<T: Entry> Mat<T> {
    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![T::zero_of(field); rows * cols],
        }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = T::one_of(field);
        }
        m
    }

    pub fn from_rows(field: &FieldSpec, rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { field: field.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(field: &FieldSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { field: field.clone(), rows, cols, data }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(&self.field, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| self.at(i, j).add(other.at(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| self.at(i, j).sub(other.at(i, j)))
    }

    pub fn neg(&self) -> Self {
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| self.at(i, j).neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| self.at(i, j).mul(c))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        Mat::from_fn(&self.field, self.rows, other.cols, |i, j| {
            let mut acc = T::zero_of(&self.field);
            for k in 0..self.cols {
                acc = acc.add(&self.at(i, k).mul(other.at(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero_of(&self.field);
                for k in 0..self.cols {
                    acc = acc.add(&self.at(i, k).mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    /// Kronecker product: block (i,j) of the result is self[i,j] * other.
    pub fn kronecker(&self, other: &Self) -> Self {
        Mat::from_fn(
            &self.field,
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                let (ia, ib) = (i / other.rows, i % other.rows);
                let (ja, jb) = (j / other.cols, j % other.cols);
                self.at(ia, ja).mul(other.at(ib, jb))
            },
        )
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Stack vertically: [self; other].
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Concatenate horizontally: [self | other].
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(&self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        })
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Mat::from_fn(&self.field, r1 - r0, c1 - c0, |i, j| self.at(r0 + i, c0 + j).clone())
    }
}

impl ScalarMat {
    pub fn from_i64_rows(field: &FieldSpec, rows: &[&[i64]]) -> Self {
        Mat::from_rows(
            field,
            rows.iter().map(|r| r.iter().map(|&x| field.from_i64(x)).collect()).collect(),
        )
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.at(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, pr);
            let inv = self.at(r, c).inv().expect("nonzero pivot");
            for j in c..self.cols {
                *self.at_mut(r, j) = self.at(r, j).mul(&inv);
            }
            for i in 0..self.rows {
                if i != r && !self.at(i, c).is_zero() {
                    let factor = self.at(i, c).clone();
                    for j in c..self.cols {
                        let delta = factor.mul(self.at(r, j));
                        *self.at_mut(i, j) = self.at(i, j).sub(&delta);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Solve self * x = rhs for one solution (free variables set to zero).
    pub fn solve(&self, rhs: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(rhs.len(), self.rows);
        let rhs_mat = Mat::from_fn(&self.field, self.rows, 1, |i, _| rhs[i].clone());
        let mut aug = self.hstack(&rhs_mat);
        let pivots = aug.rref();
        // Inconsistent iff a pivot lands in the rhs column.
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.at(r, self.cols).clone();
        }
        Some(x)
    }

    /// Basis of the right kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![self.field.zero(); self.cols];
            v[free] = self.field.one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = m.at(r, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Option<ScalarMat> {
        if self.rows != self.cols {
            return None;
        }
        let mut aug = self.hstack(&Mat::identity(&self.field, self.rows));
        let pivots = aug.rref();
        if pivots.iter().filter(|&&c| c < self.cols).count() != self.rows {
            return None;
        }
        Some(aug.submatrix(0, self.rows, self.cols, 2 * self.cols))
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Evaluate a polynomial matrix entrywise.
    pub fn eval_of(m: &PolyMat, x: &Scalar) -> ScalarMat {
        Mat::from_fn(m.field(), m.rows(), m.cols(), |i, j| m.at(i, j).eval(x))
    }
}

impl PolyMat {
    /// Lift a scalar matrix to constant polynomials.
    pub fn from_scalar(m: &ScalarMat) -> PolyMat {
        Mat::from_fn(m.field(), m.rows(), m.cols(), |i, j| Poly::constant(m.at(i, j).clone()))
    }

    /// Coefficient matrix of eps^k.
    pub fn coeff_matrix(&self, k: usize) -> ScalarMat {
        Mat::from_fn(self.field(), self.rows(), self.cols(), |i, j| self.at(i, j).coeff(k))
    }

    pub fn max_entry_degree(&self) -> Option<usize> {
        (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.at(i, j).degree())
            .max()
    }

    pub fn truncate_entries(&self, dmax: usize) -> PolyMat {
        Mat::from_fn(self.field(), self.rows(), self.cols(), |i, j| self.at(i, j).truncate(dmax))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_over_rationals() {
        let f = FieldSpec::Rationals;
        let m = ScalarMat::from_i64_rows(&f, &[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(ScalarMat::zeros(&f, 3, 2).rank(), 0);
        assert_eq!(ScalarMat::identity(&f, 4).rank(), 4);
    }

    #[test]
    fn rank_over_prime_field() {
        // Rank can drop mod p: this matrix has determinant 5.
        let m_q = ScalarMat::from_i64_rows(&FieldSpec::Rationals, &[&[1, 2], &[3, 11]]);
        assert_eq!(m_q.rank(), 2);
        let f5 = FieldSpec::prime(5).unwrap();
        let m_5 = ScalarMat::from_i64_rows(&f5, &[&[1, 2], &[3, 11]]);
        assert_eq!(m_5.rank(), 1);
    }

    #[test]
    fn solve_and_kernel() {
        let f = FieldSpec::prime(7).unwrap();
        let m = ScalarMat::from_i64_rows(&f, &[&[1, 2, 1], &[0, 1, 1]]);
        let rhs = vec![f.from_i64(3), f.from_i64(4)];
        let x = m.solve(&rhs).unwrap();
        assert_eq!(m.mul_vec(&x), rhs);
        for v in m.kernel_basis() {
            assert!(m.mul_vec(&v).iter().all(Scalar::is_zero));
        }
        assert_eq!(m.kernel_basis().len(), 1);
        // Inconsistent system.
        let m2 = ScalarMat::from_i64_rows(&f, &[&[1, 1], &[1, 1]]);
        assert!(m2.solve(&[f.from_i64(0), f.from_i64(1)]).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let f = FieldSpec::Rationals;
        let m = ScalarMat::from_i64_rows(&f, &[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.matmul(&inv), ScalarMat::identity(&f, 2));
        let sing = ScalarMat::from_i64_rows(&f, &[&[1, 2], &[2, 4]]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn kronecker_rank_is_multiplicative() {
        let f = FieldSpec::prime(5).unwrap();
        let a = ScalarMat::from_i64_rows(&f, &[&[1, 2], &[2, 4]]);
        let b = ScalarMat::from_i64_rows(&f, &[&[1, 0], &[0, 1]]);
        assert_eq!(a.kronecker(&b).rank(), a.rank() * b.rank());
    }
}
