//! Elements of the free graded tensor algebra, the attaching element and Bocksteins.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::PrimeField;
use crate::complex::{require_valid, GeneralComplexSpec, PdComplexSpec};
use crate::error::{Error, Result};

/// A word is a sequence of generator indices.
pub type Word = Vec<u16>;

/// Generators of a free graded algebra over Z/p, with their degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenTable {
    pub field: PrimeField,
    pub degrees: Vec<u32>,
}

impl GenTable {
    pub fn new(field: PrimeField, degrees: Vec<u32>) -> Arc<Self> {
        Arc::new(Self { field, degrees })
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn word_degree(&self, w: &[u16]) -> u32 {
        w.iter().map(|&g| self.degrees[g as usize]).sum()
    }
}

/// A homogeneous Z/p-linear combination of words. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorElement {
    table: Arc<GenTable>,
    degree: u32,
    terms: BTreeMap<Word, u32>,
}

impl TensorElement {
    pub fn zero(table: &Arc<GenTable>, degree: u32) -> Self {
        Self { table: Arc::clone(table), degree, terms: BTreeMap::new() }
    }

    pub fn one(table: &Arc<GenTable>) -> Self {
        Self::word(table, Vec::new())
    }

    pub fn generator(table: &Arc<GenTable>, g: usize) -> Self {
        Self::word(table, vec![g as u16])
    }

    pub fn word(table: &Arc<GenTable>, w: Word) -> Self {
        let degree = table.word_degree(&w);
        Self { table: Arc::clone(table), degree, terms: BTreeMap::from([(w, 1)]) }
    }

    /// Build from `(word, coefficient)` pairs, reducing coefficients and merging repeats.
    pub fn from_terms(table: &Arc<GenTable>, degree: u32, terms: &[(Word, i64)]) -> Result<Self> {
        let mut e = Self::zero(table, degree);
        for (w, c) in terms {
            if w.iter().any(|&g| g as usize >= table.len()) {
                return Err(Error::Structural(format!("word {w:?} uses an unknown generator")));
            }
            if table.word_degree(w) != degree {
                return Err(Error::Structural(format!("word {w:?} is not of degree {degree}")));
            }
            e.add_term(w.clone(), table.field.reduce(*c));
        }
        Ok(e)
    }

    pub fn table(&self) -> &Arc<GenTable> {
        &self.table
    }

    pub fn field(&self) -> PrimeField {
        self.table.field
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Word, u32> {
        &self.terms
    }

    pub fn coeff(&self, w: &[u16]) -> u32 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    /// Add `c * w`. The caller guarantees `w` has the element's degree.
    pub(crate) fn add_term(&mut self, w: Word, c: u32) {
        if c == 0 {
            return;
        }
        let f = self.table.field;
        let entry = self.terms.entry(w);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = f.add(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.table != other.table {
            return Err(Error::MismatchedTables);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::Structural(format!(
                "cannot add elements of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = if self.is_zero() { other.clone() } else { self.clone() };
        let rhs = if self.is_zero() { self } else { other };
        for (w, &c) in &rhs.terms {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = self.table.field;
        let c = c % f.p();
        let terms = if c == 0 {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(w, &x)| (w.clone(), f.mul(x, c))).collect()
        };
        Self { terms, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(self.field().p() - 1))
    }

    /// Product in the free algebra: concatenation of words.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let f = self.table.field;
        let mut out = Self::zero(&self.table, self.degree + other.degree);
        for (a, &x) in &self.terms {
            for (b, &y) in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.add_term(w, f.mul(x, y));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TensorElement {
    /// `c·g1g3 + c·g3g1` with 1-based generator names and least residues.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}·")?;
            if w.is_empty() {
                f.write_str("1")?;
            }
            for g in w {
                write!(f, "g{}", g + 1)?;
            }
        }
        Ok(())
    }
}

/// `xy - (-1)^{|x||y|} yx`.
pub fn lie_bracket(x: &TensorElement, y: &TensorElement) -> Result<TensorElement> {
    let xy = x.mul(y)?;
    let yx = y.mul(x)?;
    let sign = x.field().sign(u64::from(x.degree) * u64::from(y.degree));
    xy.sub(&yx.scale(sign))
}

/// Generator table of the loop homology of the skeleton: one generator of degree
/// `|a_i| - 1` per cell.
pub fn loop_table_general(spec: &GeneralComplexSpec) -> Arc<GenTable> {
    GenTable::new(spec.field(), spec.gen_degrees().iter().map(|d| d - 1).collect())
}

/// `u_1..u_k` of degree `n-2`, then `v_1..v_k` of degree `n-1`.
pub fn loop_table_pd(spec: &PdComplexSpec) -> Arc<GenTable> {
    let (n, k) = (spec.n(), spec.k());
    let degrees = std::iter::repeat_n(n - 2, k).chain(std::iter::repeat_n(n - 1, k)).collect();
    GenTable::new(spec.field(), degrees)
}

/// Degrees `s` that take a unit in the attaching element: `m..=ceil(N/2)`.
pub fn unit_degrees(spec: &GeneralComplexSpec) -> std::ops::RangeInclusive<u32> {
    spec.m()..=spec.big_n().div_ceil(2)
}

/// `sum_s (-1)^s b_s sum_{i<j, |a_i|=s, |a_j|=N-s} c_ij [u_i, u_j]`.
///
/// `units` holds one `b_s` per degree in [`unit_degrees`]; `None` means all ones.
pub fn build_chi_general(spec: &GeneralComplexSpec, units: Option<&[u32]>) -> Result<TensorElement> {
    let table = loop_table_general(spec);
    let f = spec.field();
    let degrees = spec.gen_degrees();
    let big_n = spec.big_n();
    let span = unit_degrees(spec);
    let count = (span.end() - span.start() + 1) as usize;
    let units: Vec<u32> = match units {
        None => vec![1; count],
        Some(u) if u.len() == count => u.to_vec(),
        Some(u) => {
            return Err(Error::Structural(format!("expected {count} units, got {}", u.len())));
        }
    };
    if let Some(&bad) = units.iter().find(|&&b| b % f.p() == 0) {
        return Err(Error::NonUnitCoefficient(bad));
    }
    let mut chi = TensorElement::zero(&table, big_n - 2);
    for (idx, s) in span.enumerate() {
        let coeff = f.mul(f.sign(u64::from(s)), units[idx] % f.p());
        for i in 0..degrees.len() {
            for j in i + 1..degrees.len() {
                let c = spec.c().get(i, j);
                if c == 0 || degrees[i] != s || degrees[j] + s != big_n {
                    continue;
                }
                let ui = TensorElement::generator(&table, i);
                let uj = TensorElement::generator(&table, j);
                chi = chi.add(&lie_bracket(&ui, &uj)?.scale(f.mul(coeff, c)))?;
            }
        }
    }
    Ok(chi)
}

/// `sum_{i,j} a_ij [u_i, v_j]`, without any validation.
pub fn chi_pd_unchecked(spec: &PdComplexSpec) -> TensorElement {
    let table = loop_table_pd(spec);
    let f = spec.field();
    let k = spec.k();
    // [u, v] = uv - (-1)^{|u||v|} vu, and |u||v| = (n-2)(n-1) is even.
    let swap = f.neg(1);
    let mut chi = TensorElement::zero(&table, 2 * spec.n() - 3);
    for i in 0..k {
        for j in 0..k {
            let a = spec.a().get(i, j);
            if a == 0 {
                continue;
            }
            let (u, v) = (i as u16, (k + j) as u16);
            chi.add_term(vec![u, v], a);
            chi.add_term(vec![v, u], f.mul(swap, a));
        }
    }
    chi
}

/// The attaching element of a valid spec, with the global unit sign dropped.
pub fn build_chi_pd(spec: &PdComplexSpec) -> Result<TensorElement> {
    require_valid(spec)?;
    Ok(chi_pd_unchecked(spec))
}

/// Bockstein images of generators: `beta_r(g) = target` for one exponent `r` per
/// generator, all other images zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BocksteinTable {
    /// Per generator, `Some((r, target))` when some `beta_r` hits it.
    pub images: Vec<Option<(u32, u16)>>,
}

impl BocksteinTable {
    /// `beta_{r_j}(v_j) = u_j` for the torsion pairs.
    pub fn for_pd(spec: &PdComplexSpec) -> Self {
        let k = spec.k();
        let mut images = vec![None; 2 * k];
        for (j, &r) in spec.r().iter().enumerate() {
            images[k + j] = Some((r, j as u16));
        }
        Self { images }
    }

    /// Distinct exponents, ascending.
    pub fn exponents(&self) -> Vec<u32> {
        let mut rs: Vec<u32> = self.images.iter().flatten().map(|&(r, _)| r).collect();
        rs.sort_unstable();
        rs.dedup();
        rs
    }
}

fn apply_derivation(
    x: &TensorElement,
    table: &BocksteinTable,
    accept: impl Fn(u32) -> bool,
) -> TensorElement {
    let t = x.table();
    let f = x.field();
    let mut out = TensorElement::zero(t, x.degree().saturating_sub(1));
    for (w, &c) in x.terms() {
        let mut prefix_deg = 0u64;
        for (pos, &g) in w.iter().enumerate() {
            if let Some((r, target)) = table.images[g as usize] {
                if accept(r) {
                    let mut nw = w.clone();
                    nw[pos] = target;
                    out.add_term(nw, f.mul(c, f.sign(prefix_deg)));
                }
            }
            prefix_deg += u64::from(t.degrees[g as usize]);
        }
    }
    out
}

/// `beta_r` extended to words by `beta(xy) = beta(x)y + (-1)^{|x|} x beta(y)`.
pub fn bockstein_apply(x: &TensorElement, r: u32, table: &BocksteinTable) -> TensorElement {
    apply_derivation(x, table, |s| s == r)
}

/// Sum of `beta_r` over all exponents present in the table.
pub fn bockstein_total(x: &TensorElement, table: &BocksteinTable) -> TensorElement {
    apply_derivation(x, table, |_| true)
}

/// True iff the sum of the distinct Bocksteins kills the attaching element. Runs on
/// structurally well-formed specs whether or not they validate.
pub fn bockstein_chi_check(spec: &PdComplexSpec) -> bool {
    let chi = chi_pd_unchecked(spec);
    let table = BocksteinTable::for_pd(spec);
    let mut acc = TensorElement::zero(chi.table(), chi.degree().saturating_sub(1));
    for r in table.exponents() {
        for (w, c) in bockstein_apply(&chi, r, &table).terms {
            acc.add_term(w, c);
        }
    }
    acc.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::to_general;
    use proptest::prelude::*;

    fn spec(p: u32, n: u32, k1: usize, r: &[u32], a: &[&[i64]]) -> PdComplexSpec {
        let rows: Vec<Vec<i64>> = a.iter().map(|r| r.to_vec()).collect();
        PdComplexSpec::new(p, n, rows.len(), k1, r.to_vec(), &rows).unwrap()
    }

    fn table(p: u32, degrees: &[u32]) -> Arc<GenTable> {
        GenTable::new(PrimeField::new(p).unwrap(), degrees.to_vec())
    }

    #[test]
    fn bracket_examples() {
        let t = table(5, &[4, 5, 3]);
        let (u, v, w) = (
            TensorElement::generator(&t, 0),
            TensorElement::generator(&t, 1),
            TensorElement::generator(&t, 2),
        );
        assert_eq!(lie_bracket(&u, &v).unwrap().to_string(), "1·g1g2 + 4·g2g1");
        assert!(lie_bracket(&u, &u).unwrap().is_zero());
        assert_eq!(lie_bracket(&w, &w).unwrap().to_string(), "2·g3g3");
        let other = table(5, &[4]);
        assert_eq!(
            lie_bracket(&u, &TensorElement::generator(&other, 0)),
            Err(Error::MismatchedTables)
        );
    }

    #[test]
    fn chi_pd_examples() {
        let chi = build_chi_pd(&spec(5, 6, 1, &[1], &[&[1]])).unwrap();
        assert_eq!(chi.to_string(), "1·g1g2 + 4·g2g1");
        assert_eq!(chi.degree(), 9);

        let chi = build_chi_pd(&spec(5, 6, 2, &[1, 1], &[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(chi.to_string(), "1·g1g4 + 1·g2g3 + 4·g3g2 + 4·g4g1");

        let chi3 = build_chi_pd(&spec(5, 6, 1, &[1], &[&[3]])).unwrap();
        assert_eq!(chi3, build_chi_pd(&spec(5, 6, 1, &[1], &[&[1]])).unwrap().scale(3));
    }

    #[test]
    fn chi_pd_is_the_bracket_sum() {
        for n in [6, 7] {
            let s = spec(5, n, 0, &[], &[&[1, 2, 0], &[3, 0, 4], &[0, 1, 1]]);
            let table = loop_table_pd(&s);
            let mut sum = TensorElement::zero(&table, 2 * n - 3);
            for i in 0..3 {
                for j in 0..3 {
                    let br = lie_bracket(&TensorElement::generator(&table, i), &TensorElement::generator(&table, 3 + j));
                    sum = sum.add(&br.unwrap().scale(s.a().get(i, j))).unwrap();
                }
            }
            assert_eq!(chi_pd_unchecked(&s), sum);
        }
    }

    #[test]
    fn chi_general_matches_pd_up_to_unit() {
        for (k1, a) in [(1usize, vec![vec![1i64]]), (0, vec![vec![1, 0], vec![0, 1]])] {
            let s = PdComplexSpec::new(5, 6, a.len(), k1, vec![1; k1], &a).unwrap();
            let g = build_chi_general(&to_general(&s).unwrap(), None).unwrap();
            let pd = build_chi_pd(&s).unwrap();
            assert!((1..5).any(|c| pd.scale(c) == g));
        }
        let s = spec(5, 6, 0, &[], &[&[1, 0], &[0, 1]]);
        let g = build_chi_general(&to_general(&s).unwrap(), None).unwrap();
        assert_eq!(g.to_string(), "4·g1g3 + 4·g2g4 + 1·g3g1 + 1·g4g2");
    }

    #[test]
    fn chi_general_rejects_bad_units() {
        let s = spec(5, 6, 1, &[1], &[&[1]]);
        let g = to_general(&s).unwrap();
        assert_eq!(unit_degrees(&g), 5..=6);
        assert_eq!(build_chi_general(&g, Some(&[5, 1])), Err(Error::NonUnitCoefficient(5)));
        assert!(build_chi_general(&g, Some(&[1])).is_err());
        let chi = build_chi_general(&g, Some(&[2, 3])).unwrap();
        assert_eq!(chi, build_chi_pd(&s).unwrap().scale(3));
    }

    #[test]
    fn chi_vanishes_without_products() {
        let f = PrimeField::new(3).unwrap();
        let g = GeneralComplexSpec::new(f, 11, vec![5, 6], crate::algebra::FpMatrix::zeros(f, 2, 2)).unwrap();
        assert!(build_chi_general(&g, None).unwrap().is_zero());
    }

    #[test]
    fn bockstein_examples() {
        let s = spec(5, 6, 1, &[2], &[&[1]]);
        let bt = BocksteinTable::for_pd(&s);
        let t = loop_table_pd(&s);
        let u = TensorElement::generator(&t, 0);
        let v = TensorElement::generator(&t, 1);
        assert_eq!(bockstein_apply(&v, 2, &bt), u);
        assert!(bockstein_apply(&v, 1, &bt).is_zero());
        assert!(bockstein_apply(&u, 2, &bt).is_zero());
        let vv = v.mul(&v).unwrap();
        let expected = u.mul(&v).unwrap().sub(&v.mul(&u).unwrap()).unwrap();
        assert_eq!(bockstein_apply(&vv, 2, &bt), expected);
    }

    #[test]
    fn chi_check_examples() {
        assert!(bockstein_chi_check(&spec(5, 6, 2, &[1, 2], &[&[1, 2], &[2, 3]])));
        assert!(!bockstein_chi_check(&spec(5, 6, 2, &[1, 1], &[&[0, 1], &[4, 0]])));
        assert!(bockstein_chi_check(&spec(5, 6, 0, &[], &[&[0, 1], &[4, 0]])));
        assert!(bockstein_chi_check(&spec(5, 7, 2, &[3, 3], &[&[0, 1], &[4, 0]])));
    }

    fn arb_element(t: Arc<GenTable>) -> impl Strategy<Value = TensorElement> {
        prop::collection::vec((prop::collection::vec(0u16..4, 0..4), 0i64..5), 0..6).prop_map(move |terms| {
            // Homogenize by keeping only words of the first word's degree.
            let deg = terms.first().map_or(0, |(w, _)| t.word_degree(w));
            let kept: Vec<(Word, i64)> =
                terms.into_iter().filter(|(w, _)| t.word_degree(w) == deg).collect();
            TensorElement::from_terms(&t, deg, &kept).unwrap()
        })
    }

    proptest! {
        #[test]
        fn bockstein_is_a_differential(x in arb_element(table(5, &[4, 4, 5, 5]))) {
            let bt = BocksteinTable { images: vec![None, None, Some((1, 0)), Some((2, 1))] };
            for r in [1, 2] {
                prop_assert!(bockstein_apply(&bockstein_apply(&x, r, &bt), r, &bt).is_zero());
            }
            prop_assert!(bockstein_total(&bockstein_total(&x, &bt), &bt).is_zero());
        }

        #[test]
        fn bockstein_leibniz(
            x in arb_element(table(3, &[4, 4, 5, 5])),
            y in arb_element(table(3, &[4, 4, 5, 5])),
        ) {
            let bt = BocksteinTable { images: vec![None, None, Some((1, 0)), Some((1, 1))] };
            let f = x.field();
            let lhs = bockstein_apply(&x.mul(&y).unwrap(), 1, &bt);
            let rhs = bockstein_apply(&x, 1, &bt).mul(&y).unwrap()
                .add(&x.mul(&bockstein_apply(&y, 1, &bt)).unwrap().scale(f.sign(x.degree() as u64)))
                .unwrap();
            prop_assert_eq!(lhs.terms(), rhs.terms());
        }
    }
}
