use std::fmt;

use serde::{Deserialize, Serialize};

use super::field::PrimeField;
use crate::error::{Error, Result};

/// Dense matrix over Z/p, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from integer rows, reducing every entry mod p. All rows must have equal length.
    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Structural("matrix rows have unequal lengths".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| field.reduce(x)))
            .collect();
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v % self.field.p();
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::Structural(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                let (row_out, row_b) = (
                    &mut out.data[i * other.cols..(i + 1) * other.cols],
                    other.row(l),
                );
                f.axpy(row_out, a, row_b);
            }
        }
        Ok(out)
    }

    /// Permute rows and columns simultaneously: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert!(self.is_square() && perm.len() == self.rows);
        let n = self.rows;
        let mut out = Self::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        out
    }

    /// Rank by Gaussian elimination. Pivots are chosen column by column, taking the
    /// lowest-index remaining row with a nonzero entry.
    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut m = self.to_rows();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, pivot);
            let inv = f.inv(m[rank][col]);
            f.scale(&mut m[rank], inv);
            let (head, tail) = m.split_at_mut(rank + 1);
            let prow = &head[rank];
            for row in tail.iter_mut() {
                let c = row[col];
                if c != 0 {
                    f.axpy(row, f.neg(c), prow);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    pub fn is_nonsingular(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Inverse of a nonsingular square matrix.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_nonsingular() {
            return Err(Error::Structural("matrix is singular".into()));
        }
        let f = self.field;
        let n = self.rows;
        let mut aug: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| u32::from(i == j)));
                r
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| aug[r][col] != 0).expect("nonsingular");
            aug.swap(col, pivot);
            let inv = f.inv(aug[col][col]);
            f.scale(&mut aug[col], inv);
            let prow = aug[col].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != col && row[col] != 0 {
                    let c = f.neg(row[col]);
                    f.axpy(row, c, &prow);
                }
            }
        }
        let mut out = Self::zeros(f, n, n);
        for (i, row) in aug.iter().enumerate() {
            out.data[i * n..(i + 1) * n].copy_from_slice(&row[n..]);
        }
        Ok(out)
    }
}

impl fmt::Display for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fld(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FpMatrix::identity(fld(5), 3).rank(), 3);
        assert_eq!(FpMatrix::zeros(fld(3), 2, 2).rank(), 0);
        let m = FpMatrix::from_rows(fld(7), &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn entries_reduced_on_ingest() {
        let m = FpMatrix::from_rows(fld(5), &[vec![-1, 7]]).unwrap();
        assert_eq!(m.row(0), &[4, 2]);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = fld(5);
        let m = FpMatrix::from_rows(f, &[vec![1, 2], vec![3, 4]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), FpMatrix::identity(f, 2));
    }

    /// Determinant by cofactor expansion, used as an independent rank oracle.
    fn det(f: PrimeField, m: &[Vec<u32>]) -> u32 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        let mut acc = 0;
        for j in 0..n {
            let minor: Vec<Vec<u32>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let term = f.mul(m[0][j], det(f, &minor));
            acc = if j % 2 == 0 { f.add(acc, term) } else { f.sub(acc, term) };
        }
        acc
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    fn minor_rank(m: &FpMatrix) -> usize {
        let f = m.field();
        let rows = m.to_rows();
        for k in (1..=m.rows().min(m.cols())).rev() {
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let sub: Vec<Vec<u32>> =
                        rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j]).collect()).collect();
                    if det(f, &sub) != 0 {
                        return k;
                    }
                }
            }
        }
        0
    }

    proptest! {
        #[test]
        fn rank_matches_minors(
            p in prop::sample::select(vec![3u32, 5, 7]),
            r in 1usize..=4,
            c in 1usize..=4,
            seed in prop::collection::vec(0i64..7, 16),
        ) {
            let f = fld(p);
            let rows: Vec<Vec<i64>> = (0..r).map(|i| (0..c).map(|j| seed[i * 4 + j]).collect()).collect();
            let m = FpMatrix::from_rows(f, &rows).unwrap();
            prop_assert_eq!(m.rank(), minor_rank(&m));
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }
    }
}
