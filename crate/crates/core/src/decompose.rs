//! Reduction to a rank-one complex, loop-space decompositions and their series.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{FpMatrix, TruncatedSeries};
use crate::complex::{require_valid, PdComplexSpec};
use crate::error::{Error, Result};
use crate::loop_algebra::quotient_dims;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanCase {
    Case1,
    Case2a,
    Case2b,
    Case2c,
    TorsionFree,
}

/// The rank-one complex the plan collapses onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanTarget {
    Moore { exponent: u32 },
    SpherePair,
}

/// How to pick a pair `a_1, b_1` with `a_1^* b_1^* = c z^*` for a unit `c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientPlan {
    pub case: PlanCase,
    /// Simultaneous reordering of torsion pairs: new index `i` is old index `permutation[i]`.
    pub permutation: Vec<usize>,
    pub target: PlanTarget,
    pub unit: u32,
    /// Rows give the new degree `n-1` classes in terms of the reordered `x_i`.
    pub x_change: FpMatrix,
    /// Rows give the new degree `n` classes in terms of the reordered `y_j`.
    pub y_change: FpMatrix,
}

impl QuotientPlan {
    /// The pairing matrix in the new bases. Its `(1,1)` entry is the unit.
    pub fn transformed_pairing(&self, spec: &PdComplexSpec) -> Result<FpMatrix> {
        let a = spec.permute_torsion(&self.permutation)?.a().clone();
        let p_inv_t = self.x_change.inverse()?.transpose();
        let q_inv = self.y_change.inverse()?;
        p_inv_t.mul(&a)?.mul(&q_inv)
    }
}

fn require_even_m(spec: &PdComplexSpec) -> Result<u32> {
    match spec.m() {
        Some(m) if m > 2 => Ok(m),
        _ => Err(Error::Unsupported(format!("n = {} must be 2m with m > 2", spec.n()))),
    }
}

fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    outer.iter().map(|&i| inner[i]).collect()
}

fn embed_block(field: crate::algebra::PrimeField, k: usize, block: [[i64; 2]; 2]) -> FpMatrix {
    let mut m = FpMatrix::identity(field, k);
    for (i, row) in block.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            m.set(i, j, field.reduce(x));
        }
    }
    m
}

pub fn quotient_plan(spec: &PdComplexSpec) -> Result<QuotientPlan> {
    require_valid(spec)?;
    require_even_m(spec)?;
    let f = spec.field();
    let (k, k1) = (spec.k(), spec.k1());

    if k1 == 0 {
        let a = spec.a();
        let i = (0..k)
            .find(|&i| a.get(i, 0) != 0)
            .ok_or_else(|| Error::InvariantViolation("first column of A is zero".into()))?;
        let mut perm: Vec<usize> = (0..k).collect();
        perm.swap(0, i);
        let mut x_change = FpMatrix::zeros(f, k, k);
        for (row, &col) in perm.iter().enumerate() {
            x_change.set(row, col, 1);
        }
        return Ok(QuotientPlan {
            case: PlanCase::TorsionFree,
            permutation: Vec::new(),
            target: PlanTarget::SpherePair,
            unit: a.get(i, 0),
            x_change,
            y_change: FpMatrix::identity(f, k),
        });
    }

    // Lowest index with the largest exponent goes first.
    let r = spec.r();
    let rmax = *r.iter().max().expect("k1 > 0");
    let top = r.iter().position(|&e| e == rmax).expect("max exists");
    let mut perm: Vec<usize> = std::iter::once(top).chain((0..k1).filter(|&i| i != top)).collect();
    let s1 = spec.permute_torsion(&perm)?;
    let a1 = s1.a();
    if a1.get(0, 0) != 0 {
        return Ok(QuotientPlan {
            case: PlanCase::Case1,
            permutation: perm,
            target: PlanTarget::Moore { exponent: rmax },
            unit: a1.get(0, 0),
            x_change: FpMatrix::identity(f, k),
            y_change: FpMatrix::identity(f, k),
        });
    }
    let i = (1..k)
        .find(|&i| a1.get(i, 0) != 0)
        .ok_or_else(|| Error::InvariantViolation("first column of A is zero".into()))?;
    if i >= k1 {
        return Err(Error::InvariantViolation("a free class pairs with a torsion class".into()));
    }
    let second: Vec<usize> =
        [0, i].into_iter().chain((1..k1).filter(|&j| j != i)).collect();
    perm = compose(&second, &perm);
    let s2 = spec.permute_torsion(&perm)?;
    let a2 = s2.a();
    let (r1, r2) = (s2.r()[0], s2.r()[1]);
    let half = f.inv(2) as i64;
    let (case, unit, x_block, y_block) = if r1 == r2 && a2.get(1, 1) != 0 {
        (PlanCase::Case2a, a2.get(1, 1), [[0, 1], [1, 0]], [[0, 1], [1, 0]])
    } else if r1 == r2 {
        (PlanCase::Case2b, f.mul(2, a2.get(1, 0)), [[half, half], [1, -1]], [[half, half], [1, -1]])
    } else {
        (PlanCase::Case2c, a2.get(1, 0), [[1, 0], [1, -1]], [[1, 1], [0, -1]])
    };
    Ok(QuotientPlan {
        case,
        permutation: perm,
        target: PlanTarget::Moore { exponent: r1 },
        unit,
        x_change: embed_block(f, k, x_block),
        y_change: embed_block(f, k, y_block),
    })
}

/// A wedge summand of `J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WedgeCell {
    /// `P^dim(p^exponent)`.
    Moore { dim: u32, exponent: u32 },
    Sphere { dim: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// `S^dim{p^exponent}`, the fibre of the degree `p^exponent` map.
    SphereFiber { dim: u32, exponent: u32 },
    /// `ΩS^dim`.
    LoopSphere { dim: u32 },
    /// `Ω(J ∨ (J ∧ X))` with `X` the product of `smash_with`.
    LoopWedge { cells: Vec<WedgeCell>, smash_with: Vec<Factor> },
}

fn power(prime: &str, e: u32) -> String {
    if e == 1 {
        prime.to_string()
    } else {
        format!("{prime}^{e}")
    }
}

fn render_cells(cells: &[WedgeCell], prime: &str) -> String {
    cells
        .iter()
        .map(|c| match c {
            WedgeCell::Moore { dim, exponent } => format!("P^{dim}({})", power(prime, *exponent)),
            WedgeCell::Sphere { dim } => format!("S^{dim}"),
        })
        .collect::<Vec<_>>()
        .join(" v ")
}

fn render_product(factors: &[Factor], prime: &str) -> String {
    factors.iter().map(|f| f.render(prime)).collect::<Vec<_>>().join(" x ")
}

impl Factor {
    /// Canonical text with `prime` standing for the characteristic.
    pub fn render(&self, prime: &str) -> String {
        match self {
            Factor::SphereFiber { dim, exponent } => format!("S^{dim}{{{}}}", power(prime, *exponent)),
            Factor::LoopSphere { dim } => format!("Loops(S^{dim})"),
            Factor::LoopWedge { smash_with, .. } => {
                format!("Loops(J v (J ^ ({})))", render_product(smash_with, prime))
            }
        }
    }
}

/// A product of loop-space factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub factors: Vec<Factor>,
}

impl Decomposition {
    pub fn render(&self, prime: &str) -> String {
        let mut out = render_product(&self.factors, prime);
        for f in &self.factors {
            if let Factor::LoopWedge { cells, .. } = f {
                out.push_str(&format!(", J = {}", render_cells(cells, prime)));
            }
        }
        out
    }

    pub fn wedge_cells(&self) -> &[WedgeCell] {
        self.factors
            .iter()
            .find_map(|f| match f {
                Factor::LoopWedge { cells, .. } => Some(cells.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("p"))
    }
}

/// Moore cells for all torsion but one copy of the largest exponent, ascending, then a
/// sphere pair per free pair.
fn wedge_cells(m: u32, exponents: &[u32], free_pairs: usize) -> Vec<WedgeCell> {
    let mut rest = exponents.to_vec();
    rest.sort_unstable();
    rest.pop();
    let mut cells: Vec<WedgeCell> =
        rest.into_iter().map(|exponent| WedgeCell::Moore { dim: 2 * m, exponent }).collect();
    for _ in 0..free_pairs {
        cells.push(WedgeCell::Sphere { dim: 2 * m - 1 });
        cells.push(WedgeCell::Sphere { dim: 2 * m });
    }
    cells
}

/// Factors for torsion exponents (empty for a torsion-free complex) and free pairs.
pub fn decompose_parts(m: u32, exponents: &[u32], free_pairs: usize) -> Decomposition {
    let base = match exponents.iter().max() {
        Some(&r1) => vec![
            Factor::SphereFiber { dim: 2 * m - 1, exponent: r1 },
            Factor::LoopSphere { dim: 4 * m - 1 },
        ],
        None => vec![Factor::LoopSphere { dim: 2 * m - 1 }, Factor::LoopSphere { dim: 2 * m }],
    };
    let k = exponents.len() + free_pairs;
    let mut factors = base.clone();
    if k >= 2 {
        let free_in_j = if exponents.is_empty() { free_pairs - 1 } else { free_pairs };
        let cells = wedge_cells(m, exponents, free_in_j);
        factors.push(Factor::LoopWedge { cells, smash_with: base });
    }
    Decomposition { factors }
}

pub fn decompose(spec: &PdComplexSpec) -> Result<Decomposition> {
    require_valid(spec)?;
    let m = require_even_m(spec)?;
    Ok(decompose_parts(m, spec.r(), spec.k2()))
}

fn reduced_wedge_desuspended(cells: &[WedgeCell], cap: usize) -> TruncatedSeries {
    let mut terms = Vec::new();
    for c in cells {
        match *c {
            WedgeCell::Moore { dim, .. } => {
                terms.push((dim as usize - 2, 1));
                terms.push((dim as usize - 1, 1));
            }
            WedgeCell::Sphere { dim } => terms.push((dim as usize - 1, 1)),
        }
    }
    TruncatedSeries::polynomial(cap, &terms)
}

fn product_series(factors: &[Factor], cap: usize) -> Result<TruncatedSeries> {
    factors.iter().try_fold(TruncatedSeries::one(cap), |acc, f| acc.mul(&factor_series(f, cap)?))
}

/// Mod-p homology series of a factor.
pub fn factor_series(f: &Factor, cap: usize) -> Result<TruncatedSeries> {
    match f {
        Factor::SphereFiber { dim, .. } => {
            let d = *dim as usize;
            let num = TruncatedSeries::polynomial(cap, &[(0, 1), (d, 1)]);
            let den = TruncatedSeries::polynomial(cap, &[(0, 1), (d - 1, -1)]);
            num.mul(&den.inv()?)
        }
        Factor::LoopSphere { dim } => {
            TruncatedSeries::polynomial(cap, &[(0, 1), (*dim as usize - 1, -1)]).inv()
        }
        Factor::LoopWedge { cells, smash_with } => {
            // Reduced homology of J ∨ (J ∧ X) is H̃(J)·H(X); loop it via the tensor algebra.
            let j0 = reduced_wedge_desuspended(cells, cap);
            let x = product_series(smash_with, cap)?;
            TruncatedSeries::one(cap).sub(&j0.mul(&x)?)?.inv()
        }
    }
}

pub fn decomposition_series(d: &Decomposition, cap: usize) -> Result<TruncatedSeries> {
    product_series(&d.factors, cap)
}

/// Product of the factor series equals the loop homology series up to `cap`.
pub fn decomposition_series_check(spec: &PdComplexSpec, cap: usize) -> Result<bool> {
    let d = decompose(spec)?;
    Ok(decomposition_series(&d, cap)? == quotient_dims(spec, cap)?)
}

/// Series of the fibre `F` of the collapse onto the rank-one complex `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberSeries {
    /// `H_*(ΩV)`.
    pub base: TruncatedSeries,
    /// `H_*(F)`.
    pub fiber: TruncatedSeries,
    /// `H_*(ΩF)`.
    pub loop_fiber: TruncatedSeries,
}

pub fn fiber_series(spec: &PdComplexSpec, cap: usize) -> Result<FiberSeries> {
    require_valid(spec)?;
    let m = require_even_m(spec)? as usize;
    let k = spec.k() as i64;
    if k < 2 {
        return Err(Error::PreconditionFailed("k = 1 has no fibre: the quotient is V itself".into()));
    }
    let base = TruncatedSeries::polynomial(cap, &[(0, 1), (2 * m - 2, -1)])
        .mul(&TruncatedSeries::polynomial(cap, &[(0, 1), (2 * m - 1, -1)]))?
        .inv()?;
    let j = TruncatedSeries::polynomial(cap, &[(2 * m - 1, k - 1), (2 * m, k - 1)]);
    let j0 = TruncatedSeries::polynomial(cap, &[(2 * m - 2, k - 1), (2 * m - 1, k - 1)]);
    let fiber = TruncatedSeries::one(cap).add(&j.mul(&base)?)?;
    let loop_fiber = TruncatedSeries::one(cap).sub(&j0.mul(&base)?)?.inv()?;
    if base.mul(&loop_fiber)? != quotient_dims(spec, cap)? {
        return Err(Error::InvariantViolation(
            "loop homology differs from base times loops on the fibre".into(),
        ));
    }
    Ok(FiberSeries { base, fiber, loop_fiber })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u32, n: u32, k1: usize, r: &[u32], a: &[&[i64]]) -> PdComplexSpec {
        let rows: Vec<Vec<i64>> = a.iter().map(|r| r.to_vec()).collect();
        PdComplexSpec::new(p, n, rows.len(), k1, r.to_vec(), &rows).unwrap()
    }

    fn eye(k: usize) -> Vec<Vec<i64>> {
        (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect()
    }

    fn spec_eye(n: u32, k: usize, r: &[u32]) -> PdComplexSpec {
        PdComplexSpec::new(5, n, k, r.len(), r.to_vec(), &eye(k)).unwrap()
    }

    fn check_unit(spec: &PdComplexSpec, plan: &QuotientPlan) {
        assert_ne!(plan.unit, 0);
        assert_eq!(plan.transformed_pairing(spec).unwrap().get(0, 0), plan.unit);
    }

    #[test]
    fn plan_examples() {
        let s = spec(5, 6, 2, &[2, 2], &[&[0, 1], &[1, 0]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!((plan.case, plan.unit), (PlanCase::Case2b, 2));
        check_unit(&s, &plan);

        let s = spec(5, 6, 2, &[3, 1], &[&[0, 1], &[1, 0]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!((plan.case, plan.unit), (PlanCase::Case2c, 1));
        check_unit(&s, &plan);

        let s = spec(5, 6, 1, &[1], &[&[3]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!((plan.case, plan.unit), (PlanCase::Case1, 3));

        let s = spec(5, 6, 2, &[2, 2], &[&[0, 1], &[1, 4]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!((plan.case, plan.unit), (PlanCase::Case2a, 4));
        check_unit(&s, &plan);

        let s = spec(3, 6, 0, &[], &[&[0, 1], &[2, 0]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!((plan.case, plan.unit), (PlanCase::TorsionFree, 2));
        check_unit(&s, &plan);
    }

    #[test]
    fn plan_promotes_lowest_max() {
        let s = spec(5, 6, 3, &[1, 3, 3], &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!(plan.permutation, vec![1, 0, 2]);
        assert_eq!(plan.target, PlanTarget::Moore { exponent: 3 });
        // Case 2c after moving the partner of the first column.
        let s = spec(7, 8, 3, &[1, 2, 3], &[&[0, 0, 2], &[0, 1, 0], &[2, 0, 0]]);
        let plan = quotient_plan(&s).unwrap();
        assert_eq!(plan.permutation, vec![2, 0, 1]);
        assert_eq!(plan.case, PlanCase::Case2c);
        check_unit(&s, &plan);
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(&spec_eye(6, 1, &[2])).unwrap().to_string(), "S^5{p^2} x Loops(S^11)");
        assert_eq!(decompose(&spec_eye(6, 1, &[])).unwrap().to_string(), "Loops(S^5) x Loops(S^6)");
        assert_eq!(
            decompose(&spec_eye(6, 3, &[1, 2])).unwrap().to_string(),
            "S^5{p^2} x Loops(S^11) x Loops(J v (J ^ (S^5{p^2} x Loops(S^11)))), J = P^6(p) v S^5 v S^6"
        );
        assert_eq!(
            decompose(&spec_eye(8, 3, &[])).unwrap().to_string(),
            "Loops(S^7) x Loops(S^8) x Loops(J v (J ^ (Loops(S^7) x Loops(S^8)))), J = S^7 v S^8 v S^7 v S^8"
        );
        assert!(matches!(decompose(&spec_eye(4, 1, &[1])), Err(Error::Unsupported(_))));
        assert!(matches!(decompose(&spec_eye(7, 2, &[])), Err(Error::Unsupported(_))));
    }

    #[test]
    fn factor_series_examples() {
        let ls = factor_series(&Factor::LoopSphere { dim: 11 }, 20).unwrap();
        let expect: Vec<i64> = (0..=20).map(|d| i64::from(d % 10 == 0)).collect();
        assert_eq!(ls.to_i64_vec().unwrap(), expect);
        let sf = factor_series(&Factor::SphereFiber { dim: 5, exponent: 3 }, 9).unwrap();
        assert_eq!(sf.to_i64_vec().unwrap(), vec![1, 0, 0, 0, 1, 1, 0, 0, 1, 1]);

        let d = decompose(&spec_eye(6, 2, &[1])).unwrap();
        let Factor::LoopWedge { cells, smash_with } = &d.factors[2] else { panic!() };
        let q = product_series(smash_with, 15).unwrap();
        let j0 = reduced_wedge_desuspended(cells, 15);
        assert_eq!(j0, TruncatedSeries::polynomial(15, &[(4, 1), (5, 1)]));
        let expect = TruncatedSeries::one(15).sub(&j0.mul(&q).unwrap()).unwrap().inv().unwrap();
        assert_eq!(factor_series(&d.factors[2], 15).unwrap(), expect);
    }

    #[test]
    fn series_check_examples() {
        assert!(decomposition_series_check(&spec_eye(6, 1, &[1]), 18).unwrap());
        assert!(decomposition_series_check(&spec(3, 6, 2, &[1, 1], &[&[1, 1], &[1, 2]]), 18).unwrap());
        assert!(decomposition_series_check(&spec_eye(8, 3, &[]), 24).unwrap());
    }

    #[test]
    fn fiber_examples() {
        let f = fiber_series(&spec_eye(6, 2, &[1, 1]), 12).unwrap();
        let expect = TruncatedSeries::one(12)
            .add(&TruncatedSeries::polynomial(12, &[(5, 1), (6, 1)]).mul(&f.base).unwrap())
            .unwrap();
        assert_eq!(f.fiber, expect);
        assert!(matches!(fiber_series(&spec_eye(6, 1, &[1]), 12), Err(Error::PreconditionFailed(_))));
        assert!(fiber_series(&spec_eye(6, 3, &[2]), 18).is_ok());
    }
}
