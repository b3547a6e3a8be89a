//! The loop homology `T(V)/(chi)` computed degree by degree.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{EchelonBasis, PrimeField, TruncatedSeries};
use crate::attach::{
    build_chi_general, chi_pd_unchecked, loop_table_general, loop_table_pd, BocksteinTable,
    GenTable, TensorElement, Word,
};
use crate::complex::{require_valid, GeneralComplexSpec, PdComplexSpec};
use crate::error::{Error, Result};

/// Anything with a free loop algebra and one attaching element.
pub trait LoopModel {
    fn loop_table(&self) -> Arc<GenTable>;
    fn attaching_element(&self) -> Result<TensorElement>;
    /// Degree of the attaching element, `N - 2`.
    fn relation_degree(&self) -> u32;
    /// Some product of two intermediate classes hits the top class.
    fn has_top_product(&self) -> bool;
}

impl LoopModel for PdComplexSpec {
    fn loop_table(&self) -> Arc<GenTable> {
        loop_table_pd(self)
    }

    fn attaching_element(&self) -> Result<TensorElement> {
        Ok(chi_pd_unchecked(self))
    }

    fn relation_degree(&self) -> u32 {
        2 * self.n() - 3
    }

    fn has_top_product(&self) -> bool {
        self.has_nontrivial_cup()
    }
}

impl LoopModel for GeneralComplexSpec {
    fn loop_table(&self) -> Arc<GenTable> {
        loop_table_general(self)
    }

    fn attaching_element(&self) -> Result<TensorElement> {
        build_chi_general(self, None)
    }

    fn relation_degree(&self) -> u32 {
        self.big_n() - 2
    }

    fn has_top_product(&self) -> bool {
        self.m_prime().is_some()
    }
}

/// Largest number of words allowed in a single degree. Ideal components are stored
/// densely, so this bounds memory.
pub const MAX_DEGREE_DIM: usize = 6000;

/// All words of each degree up to a cap, in lexicographic order.
///
/// The words of degree `d` are the blocks `g · T_{d-|g|}` for `g` ascending, so
/// left multiplication by a generator is an offset embedding.
#[derive(Clone, Debug)]
pub struct WordBasis {
    table: Arc<GenTable>,
    words: Vec<Vec<Word>>,
    offsets: Vec<Vec<Option<usize>>>,
}

impl WordBasis {
    pub fn new(table: &Arc<GenTable>, cap: usize) -> Result<Self> {
        if table.degrees.contains(&0) {
            return Err(Error::Structural("generators of degree 0 are not allowed".into()));
        }
        let mut words: Vec<Vec<Word>> = vec![vec![Vec::new()]];
        let mut offsets = vec![vec![None; table.len()]];
        for d in 1..=cap {
            let mut level = Vec::new();
            let mut offs = vec![None; table.len()];
            for (g, &dg) in table.degrees.iter().enumerate() {
                let dg = dg as usize;
                if dg > d {
                    continue;
                }
                offs[g] = Some(level.len());
                for w in &words[d - dg] {
                    let mut nw = Vec::with_capacity(w.len() + 1);
                    nw.push(g as u16);
                    nw.extend_from_slice(w);
                    level.push(nw);
                }
            }
            if level.len() > MAX_DEGREE_DIM {
                return Err(Error::Unsupported(format!(
                    "degree {d} has {} words, above the limit of {MAX_DEGREE_DIM}; lower the cap",
                    level.len()
                )));
            }
            words.push(level);
            offsets.push(offs);
        }
        Ok(Self { table: Arc::clone(table), words, offsets })
    }

    pub fn cap(&self) -> usize {
        self.words.len() - 1
    }

    pub fn dim(&self, d: usize) -> usize {
        self.words.get(d).map_or(0, Vec::len)
    }

    pub fn words(&self, d: usize) -> &[Word] {
        &self.words[d]
    }

    /// Position of `g · T_{d-|g|}` inside `T_d`.
    pub fn offset(&self, d: usize, g: usize) -> Option<usize> {
        self.offsets.get(d).and_then(|o| o[g])
    }

    pub fn index(&self, w: &[u16]) -> usize {
        let mut d = self.table.word_degree(w) as usize;
        let mut idx = 0;
        for &g in w {
            idx += self.offsets[d][g as usize].expect("word within cap");
            d -= self.table.degrees[g as usize] as usize;
        }
        idx
    }
}

/// `T(V)/(chi)` up to a degree cap, with a reduced basis of each ideal component.
#[derive(Clone, Debug)]
pub struct QuotientAlgebra {
    basis: WordBasis,
    chi: TensorElement,
    ideal: Vec<EchelonBasis>,
    free: Vec<Vec<usize>>,
}

impl QuotientAlgebra {
    pub fn new(chi: TensorElement, cap: usize) -> Result<Self> {
        let table = Arc::clone(chi.table());
        let field = table.field;
        let basis = WordBasis::new(&table, cap)?;
        let chi_deg = chi.degree() as usize;
        let mut ideal: Vec<EchelonBasis> = Vec::with_capacity(cap + 1);
        for d in 0..=cap {
            let dim = basis.dim(d);
            let mut ech = EchelonBasis::new(field, dim);
            if !chi.is_zero() && d >= chi_deg {
                // I_d = sum_g g·I_{d-|g|} + chi·T_{d-|chi|}
                for (g, &dg) in table.degrees.iter().enumerate() {
                    let dg = dg as usize;
                    let Some(off) = basis.offset(d, g) else { continue };
                    for row in ideal[d - dg].rows() {
                        let mut v = vec![0; dim];
                        v[off..off + row.len()].copy_from_slice(row);
                        ech.insert(v);
                    }
                }
                for w in basis.words(d - chi_deg) {
                    let mut v = vec![0; dim];
                    for (cw, &c) in chi.terms() {
                        let mut full = cw.clone();
                        full.extend_from_slice(w);
                        let i = basis.index(&full);
                        v[i] = field.add(v[i], c);
                    }
                    ech.insert(v);
                }
            }
            ideal.push(ech);
        }
        let free = ideal.iter().map(EchelonBasis::free_columns).collect();
        Ok(Self { basis, chi, ideal, free })
    }

    pub fn field(&self) -> PrimeField {
        self.chi.field()
    }

    pub fn table(&self) -> &Arc<GenTable> {
        self.chi.table()
    }

    pub fn chi(&self) -> &TensorElement {
        &self.chi
    }

    pub fn cap(&self) -> usize {
        self.basis.cap()
    }

    pub fn basis(&self) -> &WordBasis {
        &self.basis
    }

    pub fn dim_t(&self, d: usize) -> usize {
        self.basis.dim(d)
    }

    pub fn dim_i(&self, d: usize) -> usize {
        self.ideal[d].rank()
    }

    pub fn dim_a(&self, d: usize) -> usize {
        self.dim_t(d) - self.dim_i(d)
    }

    pub fn ideal(&self, d: usize) -> &EchelonBasis {
        &self.ideal[d]
    }

    /// Words whose classes form a basis of `A_d`.
    pub fn quotient_basis(&self, d: usize) -> &[usize] {
        &self.free[d]
    }

    pub fn series(&self) -> TruncatedSeries {
        let coeffs: Vec<i64> = (0..=self.cap()).map(|d| self.dim_a(d) as i64).collect();
        TruncatedSeries::from_coeffs(coeffs).expect("nonempty")
    }

    pub fn tensor_series(&self) -> TruncatedSeries {
        let coeffs: Vec<i64> = (0..=self.cap()).map(|d| self.dim_t(d) as i64).collect();
        TruncatedSeries::from_coeffs(coeffs).expect("nonempty")
    }

    /// Coordinates of a homogeneous element in the word basis of its degree.
    pub fn coords(&self, x: &TensorElement) -> Result<Vec<u32>> {
        if x.table() != self.table() {
            return Err(Error::MismatchedTables);
        }
        let d = x.degree() as usize;
        if d > self.cap() {
            return Err(Error::PreconditionFailed(format!("degree {d} exceeds cap {}", self.cap())));
        }
        let mut v = vec![0; self.dim_t(d)];
        for (w, &c) in x.terms() {
            v[self.basis.index(w)] = c;
        }
        Ok(v)
    }

    pub fn contains(&self, x: &TensorElement) -> Result<bool> {
        let v = self.coords(x)?;
        Ok(self.ideal[x.degree() as usize].contains(&v))
    }

    /// Coordinates in `A_d`, relative to [`Self::quotient_basis`].
    pub fn project(&self, d: usize, v: &[u32]) -> Vec<u32> {
        self.ideal[d].quotient_coords(v, &self.free[d])
    }

    /// Lift a quotient coordinate vector in `A_d` to `T_d` using the basis words.
    pub fn lift(&self, d: usize, q: &[u32]) -> Vec<u32> {
        let mut v = vec![0; self.dim_t(d)];
        for (&col, &c) in self.free[d].iter().zip(q) {
            v[col] = c;
        }
        v
    }

    /// Right multiplication by a generator, `T_d -> T_{d+|g|}`.
    pub fn right_mul_gen(&self, d: usize, v: &[u32], g: usize) -> Vec<u32> {
        let dg = self.table().degrees[g] as usize;
        let mut out = vec![0; self.dim_t(d + dg)];
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                let mut w = self.basis.words(d)[i].clone();
                w.push(g as u16);
                out[self.basis.index(&w)] = c;
            }
        }
        out
    }

    /// Apply a degree -1 derivation word by word, `T_d -> T_{d-1}`.
    fn apply_derivation(&self, d: usize, v: &[u32], table: &BocksteinTable) -> Vec<u32> {
        let f = self.field();
        let degs = &self.table().degrees;
        let mut out = vec![0; self.dim_t(d - 1)];
        for (i, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let w = &self.basis.words(d)[i];
            let mut prefix = 0u64;
            for (pos, &g) in w.iter().enumerate() {
                if let Some((_, target)) = table.images[g as usize] {
                    let mut nw = w.clone();
                    nw[pos] = target;
                    let j = self.basis.index(&nw);
                    out[j] = f.add(out[j], f.mul(c, f.sign(prefix)));
                }
                prefix += u64::from(degs[g as usize]);
            }
        }
        out
    }

    /// True iff the total Bockstein maps every `I_d`, `d <= cap`, into `I_{d-1}`.
    pub fn derivation_preserves_ideal(&self, table: &BocksteinTable) -> bool {
        (1..=self.cap()).all(|d| {
            self.ideal[d]
                .rows()
                .iter()
                .all(|y| self.ideal[d - 1].contains(&self.apply_derivation(d, y, table)))
        })
    }

    /// Rank of the total Bockstein `A_d -> A_{d-1}` for each `d`.
    pub fn derivation_rank_series(&self, table: &BocksteinTable) -> TruncatedSeries {
        let mut coeffs = vec![0i64; self.cap() + 1];
        for (d, slot) in coeffs.iter_mut().enumerate().skip(1) {
            let mut img = EchelonBasis::new(self.field(), self.dim_t(d - 1));
            for &col in &self.free[d] {
                let mut e = vec![0; self.dim_t(d)];
                e[col] = 1;
                let mut b = self.apply_derivation(d, &e, table);
                self.ideal[d - 1].reduce(&mut b);
                img.insert(b);
            }
            *slot = img.rank() as i64;
        }
        TruncatedSeries::from_coeffs(coeffs).expect("nonempty")
    }
}

/// Build the quotient algebra of a model.
pub fn quotient_algebra<M: LoopModel + ?Sized>(model: &M, cap: usize) -> Result<QuotientAlgebra> {
    QuotientAlgebra::new(model.attaching_element()?, cap)
}

/// Dimensions of the free algebra on generators of the given degrees.
pub fn tensor_dims(gen_degrees: &[u32], cap: usize) -> Result<TruncatedSeries> {
    if gen_degrees.contains(&0) {
        return Err(Error::Structural("generators of degree 0 are not allowed".into()));
    }
    let terms: Vec<(usize, i64)> =
        std::iter::once((0, 1)).chain(gen_degrees.iter().map(|&d| (d as usize, -1))).collect();
    let series = TruncatedSeries::polynomial(cap, &terms).inv()?;
    // Cross-check by enumerating words.
    let field = PrimeField::new(3)?;
    let words = WordBasis::new(&GenTable::new(field, gen_degrees.to_vec()), cap)?;
    for d in 0..=cap {
        if series.coeff(d) != &words.dim(d).into() {
            return Err(Error::InvariantViolation(format!("word count mismatch in degree {d}")));
        }
    }
    Ok(series)
}

/// `dim A_d` by rank of the ideal spanning set in each degree.
pub fn quotient_dims<M: LoopModel + ?Sized>(model: &M, cap: usize) -> Result<TruncatedSeries> {
    Ok(quotient_algebra(model, cap)?.series())
}

/// `1 / (1 - sum_i t^{|u_i|} + t^{N-2})`. Needs some product of two intermediate
/// classes to hit the top class.
pub fn closed_form_dims<M: LoopModel + ?Sized>(model: &M, cap: usize) -> Result<TruncatedSeries> {
    if !model.has_top_product() {
        return Err(Error::PreconditionFailed(
            "no nontrivial product into the top class; the closed form does not apply".into(),
        ));
    }
    let table = model.loop_table();
    let mut terms: Vec<(usize, i64)> = vec![(0, 1), (model.relation_degree() as usize, 1)];
    terms.extend(table.degrees.iter().map(|&d| (d as usize, -1)));
    TruncatedSeries::polynomial(cap, &terms).inv()
}

fn check_ladj_relation(xi: &TensorElement) -> Result<()> {
    if xi.is_zero() {
        return Err(Error::PreconditionFailed("relation must be nonzero".into()));
    }
    if xi.degree().is_multiple_of(2) {
        return Err(Error::PreconditionFailed("relation must have odd degree".into()));
    }
    for w in xi.terms().keys() {
        if w.len() != 2 {
            return Err(Error::PreconditionFailed("relation must be quadratic".into()));
        }
        if xi.coeff(&[w[1], w[0]]) == 0 {
            return Err(Error::PreconditionFailed(format!(
                "coefficient pattern not symmetric at g{}g{}",
                w[0] + 1,
                w[1] + 1
            )));
        }
    }
    Ok(())
}

/// Whether `w` lies in the two-sided ideal generated by `xi`.
pub fn ladj_membership(xi: &TensorElement, w: &TensorElement, cap: usize) -> Result<bool> {
    if w.degree() as usize > cap {
        return Err(Error::PreconditionFailed(format!(
            "degree {} exceeds cap {cap}",
            w.degree()
        )));
    }
    QuotientAlgebra::new(xi.clone(), w.degree() as usize)?.contains(w)
}

/// Checks that right multiplication by `u` is injective on `T/(xi)` in every degree
/// `d` with `d + |u| <= cap`, that is `wu in I` iff `w in I` for all `w`.
pub fn ladj_property_check(xi: &TensorElement, u: &TensorElement, cap: usize) -> Result<bool> {
    check_ladj_relation(xi)?;
    if u.is_zero() || u.terms().keys().any(|w| w.len() != 1) {
        return Err(Error::PreconditionFailed(
            "u must be a nonzero combination of generators".into(),
        ));
    }
    if u.table() != xi.table() {
        return Err(Error::MismatchedTables);
    }
    let q = QuotientAlgebra::new(xi.clone(), cap)?;
    Ok(ladj_injective(&q, u))
}

/// Injectivity of `w -> wu` on the quotient, degree by degree.
pub fn ladj_injective(q: &QuotientAlgebra, u: &TensorElement) -> bool {
    let f = q.field();
    let m = u.degree() as usize;
    (0..=q.cap().saturating_sub(m)).all(|d| {
        if m + d > q.cap() {
            return true;
        }
        let mut span = q.ideal(d + m).clone();
        for i in 0..q.dim_t(d) {
            let mut e = vec![0; q.dim_t(d)];
            e[i] = 1;
            let mut img = vec![0; q.dim_t(d + m)];
            for (w, &c) in u.terms() {
                let part = q.right_mul_gen(d, &e, w[0] as usize);
                f.axpy(&mut img, c, &part);
            }
            span.insert(img);
        }
        span.rank() == q.dim_i(d + m) + q.dim_a(d)
    })
}

/// Whether the total Bockstein is well defined on the quotient up to `cap`.
pub fn bockstein_descends(spec: &PdComplexSpec, cap: usize) -> Result<bool> {
    require_valid(spec)?;
    let q = quotient_algebra(spec, cap)?;
    Ok(q.derivation_preserves_ideal(&BocksteinTable::for_pd(spec)))
}

/// Rank of the total Bockstein on `A_d` for each degree.
pub fn bockstein_refined_series(spec: &PdComplexSpec, cap: usize) -> Result<TruncatedSeries> {
    require_valid(spec)?;
    let q = quotient_algebra(spec, cap)?;
    bockstein_refined_from(&q, spec)
}

pub fn bockstein_refined_from(q: &QuotientAlgebra, spec: &PdComplexSpec) -> Result<TruncatedSeries> {
    let table = BocksteinTable::for_pd(spec);
    if !q.derivation_preserves_ideal(&table) {
        return Err(Error::InvariantViolation("Bockstein does not preserve the ideal".into()));
    }
    Ok(q.derivation_rank_series(&table))
}

/// One row of a series table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub degree: usize,
    pub dim_t: usize,
    pub dim_i: usize,
    pub dim_a: usize,
}

pub fn series_rows(q: &QuotientAlgebra) -> Vec<SeriesRow> {
    (0..=q.cap())
        .map(|d| SeriesRow { degree: d, dim_t: q.dim_t(d), dim_i: q.dim_i(d), dim_a: q.dim_a(d) })
        .collect()
}
