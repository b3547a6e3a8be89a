use super::field::PrimeField;

/// A subspace of `(Z/p)^dim` kept in reduced row echelon form.
///
/// Every stored row has a leading 1 in its pivot column and zeros in all other
/// pivot columns, so a single pass reduces any vector to its normal form.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: PrimeField,
    dim: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    row_of_pivot: Vec<Option<usize>>,
}

impl EchelonBasis {
    pub fn new(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
            row_of_pivot: vec![None; dim],
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.row_of_pivot[col].is_some()
    }

    /// Columns without a pivot, ascending. These index a basis of the quotient space.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.dim).filter(|&c| !self.is_pivot(c)).collect()
    }

    /// Reduce `v` in place to its normal form modulo the subspace.
    pub fn reduce(&self, v: &mut [u32]) {
        debug_assert_eq!(v.len(), self.dim);
        let f = self.field;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv];
            if c != 0 {
                f.axpy(v, f.neg(c), row);
            }
        }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Add `v` to the span. Returns `true` if the rank grew.
    pub fn insert(&mut self, mut v: Vec<u32>) -> bool {
        self.reduce(&mut v);
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let f = self.field;
        let inv = f.inv(v[piv]);
        f.scale(&mut v, inv);
        for row in &mut self.rows {
            let c = row[piv];
            if c != 0 {
                f.axpy(row, f.neg(c), &v);
            }
        }
        self.row_of_pivot[piv] = Some(self.rows.len());
        self.pivots.push(piv);
        self.rows.push(v);
        true
    }

    pub fn extend<I: IntoIterator<Item = Vec<u32>>>(&mut self, vs: I) {
        for v in vs {
            self.insert(v);
        }
    }

    /// Coordinates of `v` in the quotient basis given by [`Self::free_columns`].
    pub fn quotient_coords(&self, v: &[u32], free: &[usize]) -> Vec<u32> {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        free.iter().map(|&c| w[c]).collect()
    }
}

/// Basis of the left kernel `{ lambda : sum_i lambda_i * rows[i] = 0 }`.
pub fn left_kernel(field: PrimeField, rows: &[Vec<u32>], dim: usize) -> Vec<Vec<u32>> {
    let n = rows.len();
    // Augment each row with an identity block tracking the combination.
    let mut aug = EchelonBasis::new(field, dim + n);
    let mut kernel = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        v.resize(dim + n, 0);
        v[dim + i] = 1;
        aug.reduce(&mut v);
        if v[..dim].iter().all(|&x| x == 0) {
            kernel.push(v[dim..].to_vec());
        } else {
            aug.insert(v);
        }
    }
    kernel
}
