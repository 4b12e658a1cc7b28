//! Dense matrices over `Z/p^N`, acting on column vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::zpn::Zpn;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u128>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, ring: &Zpn) -> Self {
        let mut m = Matrix::zeros(n, n);
        let one = ring.reduce(1);
        for i in 0..n {
            m.set(i, i, one);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u128) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from rows of signed integers, reduced into `ring`.
    pub fn from_rows_i64(rows: &[Vec<i64>], ring: &Zpn) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Matrix::from_fn(r, c, |i, j| ring.from_i64(rows[i][j]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u128 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u128) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: u128, ring: &Zpn) {
        let idx = i * self.cols + j;
        self.data[idx] = ring.add(self.data[idx], v);
    }

    pub fn row(&self, i: usize) -> &[u128] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }

    pub fn mul(&self, other: &Matrix, ring: &Zpn) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        out.add_at(i, j, ring.mul(a, b), ring);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix, ring: &Zpn) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| ring.add(a, b))
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self, ring: &Zpn) -> Matrix {
        self.map(|x| ring.neg(x))
    }

    pub fn map(&self, f: impl Fn(u128) -> u128) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Reduction of every entry into a ring of smaller precision.
    pub fn reduce(&self, ring: &Zpn) -> Matrix {
        self.map(|x| ring.reduce(x))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// The submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        out.paste(0, 0, self);
        out.paste(0, self.cols, other);
        out
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

    /// `row[dst] += c * row[src]`.
    pub fn row_axpy(&mut self, dst: usize, src: usize, c: u128, ring: &Zpn) {
        if c == 0 {
            return;
        }
        for j in 0..self.cols {
            let s = self.data[src * self.cols + j];
            if s != 0 {
                let idx = dst * self.cols + j;
                self.data[idx] = ring.add(self.data[idx], ring.mul(c, s));
            }
        }
    }

    /// `col[dst] += c * col[src]`.
    pub fn col_axpy(&mut self, dst: usize, src: usize, c: u128, ring: &Zpn) {
        if c == 0 {
            return;
        }
        for i in 0..self.rows {
            let s = self.data[i * self.cols + src];
            if s != 0 {
                let idx = i * self.cols + dst;
                self.data[idx] = ring.add(self.data[idx], ring.mul(c, s));
            }
        }
    }

    pub fn scale_row(&mut self, i: usize, c: u128, ring: &Zpn) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = ring.mul(self.data[idx], c);
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[u128], ring: &Zpn) -> Vec<u128> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| ring.add(acc, ring.mul(a, b)))
            })
            .collect()
    }

    /// Inverse over `Z/p^N` by Gauss-Jordan with unit pivots; `None` if singular.
    pub fn inverse(&self, ring: &Zpn) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n, ring);
        for c in 0..n {
            let piv = (c..n).find(|&r| ring.is_unit(a.get(r, c)))?;
            a.swap_rows(c, piv);
            inv.swap_rows(c, piv);
            let u = ring.inverse(a.get(c, c)).unwrap();
            a.scale_row(c, u, ring);
            inv.scale_row(c, u, ring);
            for r in 0..n {
                let f = a.get(r, c);
                if r != c && f != 0 {
                    let f = ring.neg(f);
                    a.row_axpy(r, c, f, ring);
                    inv.row_axpy(r, c, f, ring);
                }
            }
        }
        Some(inv)
    }

    /// Rows as signed representatives, for display and serialization.
    pub fn to_signed_rows(&self, ring: &Zpn) -> Vec<Vec<i128>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|&x| ring.to_signed(x)).collect())
            .collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}
