//! Finite models of mod-p Poincaré complexes and of the integral manifolds built from them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{is_odd_prime, FpMatrix, PrimeField};
use crate::error::{Error, Result};

/// A `(n-2)`-connected mod-p Poincaré complex of dimension `2n-1`.
///
/// Generators `x_1..x_k` of degree `n-1` and `y_1..y_k` of degree `n`, the first `k1`
/// pairs carrying torsion of order `p^{r_i}`. `A[i][j]` is the coefficient of the top
/// class in the cup product of the duals of `y_j` and `x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPdSpec", into = "RawPdSpec")]
pub struct PdComplexSpec {
    field: PrimeField,
    n: u32,
    k: usize,
    k1: usize,
    r: Vec<u32>,
    a: FpMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPdSpec {
    pub p: u32,
    pub n: u32,
    pub k: usize,
    pub k1: usize,
    pub r: Vec<u32>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
}

impl TryFrom<RawPdSpec> for PdComplexSpec {
    type Error = Error;
    fn try_from(raw: RawPdSpec) -> Result<Self> {
        PdComplexSpec::new(raw.p, raw.n, raw.k, raw.k1, raw.r, &raw.a)
    }
}

impl From<PdComplexSpec> for RawPdSpec {
    fn from(s: PdComplexSpec) -> Self {
        RawPdSpec {
            p: s.p(),
            n: s.n,
            k: s.k,
            k1: s.k1,
            a: s.a.to_rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect(),
            r: s.r,
        }
    }
}

impl PdComplexSpec {
    /// Structural checks only. Matrix entries are reduced mod p.
    pub fn new(p: u32, n: u32, k: usize, k1: usize, r: Vec<u32>, a: &[Vec<i64>]) -> Result<Self> {
        let field = PrimeField::new(p)?;
        if n < 3 {
            return Err(Error::Structural(format!("n = {n} must be at least 3")));
        }
        if k == 0 {
            return Err(Error::Structural("k must be at least 1".into()));
        }
        if k1 > k {
            return Err(Error::Structural(format!("k1 = {k1} exceeds k = {k}")));
        }
        if r.len() != k1 {
            return Err(Error::Structural(format!(
                "expected {k1} Bockstein exponents, got {}",
                r.len()
            )));
        }
        if r.contains(&0) {
            return Err(Error::Structural("Bockstein exponents must be at least 1".into()));
        }
        if a.len() != k || a.iter().any(|row| row.len() != k) {
            return Err(Error::Structural(format!("A must be {k}x{k}")));
        }
        let a = FpMatrix::from_rows(field, a)?;
        Ok(Self { field, n, k, k1, r, a })
    }

    pub fn from_matrix(field: PrimeField, n: u32, k1: usize, r: Vec<u32>, a: FpMatrix) -> Result<Self> {
        if a.field() != field || !a.is_square() {
            return Err(Error::Structural("A must be square over the spec's field".into()));
        }
        let rows: Vec<Vec<i64>> =
            a.to_rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect();
        Self::new(field.p(), n, a.rows(), k1, r, &rows)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k - self.k1
    }

    pub fn r(&self) -> &[u32] {
        &self.r
    }

    pub fn a(&self) -> &FpMatrix {
        &self.a
    }

    /// `m` with `n = 2m`, when n is even.
    pub fn m(&self) -> Option<u32> {
        self.n.is_multiple_of(2).then_some(self.n / 2)
    }

    /// Some cup product between complementary classes is nonzero.
    pub fn has_nontrivial_cup(&self) -> bool {
        (0..self.k).any(|i| (0..self.k).any(|j| self.a.get(i, j) != 0))
    }

    /// Simultaneously reorder torsion pairs: new index `i` is old index `perm[i]`.
    pub fn permute_torsion(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k1 || !is_permutation(perm) {
            return Err(Error::Structural("not a permutation of the torsion indices".into()));
        }
        let full: Vec<usize> = perm.iter().copied().chain(self.k1..self.k).collect();
        let r = perm.iter().map(|&i| self.r[i]).collect();
        Ok(Self { r, a: self.a.permuted(&full), ..self.clone() })
    }
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&i| i < perm.len() && !std::mem::replace(&mut seen[i], true))
}

/// One failed constraint in a validation report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The cup-product matrix is singular mod p.
    Singular { rank: usize },
    /// A free `x` pairs nontrivially with a torsion `y`.
    NonzeroCBlock { row: usize, col: usize },
    /// The torsion block is not symmetric although n is even.
    NotSymmetric { row: usize, col: usize },
    /// The torsion block is not skew-symmetric although n is odd.
    NotSkew { row: usize, col: usize },
    /// n odd with an odd number of torsion pairs and no free ones.
    ForcedSingular { k: usize },
    /// Rational cohomology in the middle degree.
    RationalRank { rank: u32 },
    /// 2-torsion in homology.
    TwoTorsion,
    /// Connectivity too low.
    LowConnectivity { m: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Singular { rank } => write!(f, "A is singular mod p (rank {rank})"),
            Violation::NonzeroCBlock { row, col } => write!(
                f,
                "C block nonzero: a[{}][{}] pairs a free class with a torsion class",
                row + 1,
                col + 1
            ),
            Violation::NotSymmetric { row, col } => write!(
                f,
                "torsion block not symmetric for even n: a[{}][{}] != a[{}][{}]",
                row + 1,
                col + 1,
                col + 1,
                row + 1
            ),
            Violation::NotSkew { row, col } => write!(
                f,
                "torsion block not skew-symmetric for odd n: a[{}][{}] != -a[{}][{}]",
                row + 1,
                col + 1,
                col + 1,
                row + 1
            ),
            Violation::ForcedSingular { k } => write!(
                f,
                "A cannot be nonsingular: n odd and all {k} pairs torsion with k odd, and a skew form of odd size is singular"
            ),
            Violation::RationalRank { rank } => {
                write!(f, "middle rational cohomology has rank {rank}, must be 0")
            }
            Violation::TwoTorsion => f.write_str("homology has 2-torsion"),
            Violation::LowConnectivity { m } => write!(f, "m = {m} must exceed 2"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub advisories: Vec<String>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>, advisories: Vec<String>) -> Self {
        Self { ok: violations.is_empty(), violations, advisories }
    }
}

/// Check the cup-product constraints of a mod-p Poincaré complex. Every violated
/// constraint is listed.
pub fn validate_pd(spec: &PdComplexSpec) -> ValidationReport {
    let f = spec.field;
    let a = &spec.a;
    let (k, k1) = (spec.k, spec.k1);
    let mut v = Vec::new();
    let mut advisories = Vec::new();

    let rank = a.rank();
    if rank < k {
        v.push(Violation::Singular { rank });
    }
    for i in k1..k {
        for j in 0..k1 {
            if a.get(i, j) != 0 {
                v.push(Violation::NonzeroCBlock { row: i, col: j });
            }
        }
    }
    let even = spec.n.is_multiple_of(2);
    for i in 0..k1 {
        for j in i..k1 {
            let (x, y) = (a.get(i, j), a.get(j, i));
            if even && x != y {
                v.push(Violation::NotSymmetric { row: i, col: j });
            } else if !even && x != f.neg(y) {
                v.push(Violation::NotSkew { row: i, col: j });
            }
        }
    }
    if !even && k1 == k && k % 2 == 1 {
        v.push(Violation::ForcedSingular { k });
        advisories.push(
            "no complex of this type exists: with n odd and every pair torsion, the cup matrix is skew of odd size, hence never nonsingular"
                .into(),
        );
    }
    ValidationReport::from_violations(v, advisories)
}

/// `validate_pd` as a `Result`, for callers that need a valid spec.
pub fn require_valid(spec: &PdComplexSpec) -> Result<()> {
    let report = validate_pd(spec);
    if report.ok {
        Ok(())
    } else {
        let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        Err(Error::Invalid(msgs.join("; ")))
    }
}

/// A wedge summand of the `(2n-2)`-skeleton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WedgeSummand {
    /// `P^n(p^r)`, with homology `Z/p^r` in degree `n-1`.
    Moore { n: u32, r: u32 },
    Sphere { dim: u32 },
}

impl fmt::Display for WedgeSummand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WedgeSummand::Moore { n, r: 1 } => write!(f, "P^{n}(p)"),
            WedgeSummand::Moore { n, r } => write!(f, "P^{n}(p^{r})"),
            WedgeSummand::Sphere { dim } => write!(f, "S^{dim}"),
        }
    }
}

/// Moore spaces for the torsion pairs, then a sphere pair `S^{n-1}, S^n` per free pair.
pub fn skeleton_splitting(spec: &PdComplexSpec) -> Vec<WedgeSummand> {
    let n = spec.n;
    let moore = spec.r.iter().map(|&r| WedgeSummand::Moore { n, r });
    let spheres = (0..spec.k2())
        .flat_map(|_| [WedgeSummand::Sphere { dim: n - 1 }, WedgeSummand::Sphere { dim: n }]);
    moore.chain(spheres).collect()
}

/// A `(m-1)`-connected complex of odd dimension `N` with cells `a_i` below the top.
/// `c[i][j]` is the coefficient of the top class in the product of the duals of
/// `a_j` and `a_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralComplexSpec {
    field: PrimeField,
    #[serde(rename = "N")]
    big_n: u32,
    gen_degrees: Vec<u32>,
    c: FpMatrix,
}

impl GeneralComplexSpec {
    pub fn new(field: PrimeField, big_n: u32, gen_degrees: Vec<u32>, c: FpMatrix) -> Result<Self> {
        if big_n.is_multiple_of(2) || big_n <= 3 {
            return Err(Error::Structural(format!("N = {big_n} must be odd and greater than 3")));
        }
        if gen_degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Structural("generator degrees must be non-decreasing".into()));
        }
        let l = gen_degrees.len();
        if c.rows() != l || c.cols() != l || c.field() != field {
            return Err(Error::Structural(format!("c must be {l}x{l} over the spec's field")));
        }
        let Some(&m) = gen_degrees.first() else {
            return Err(Error::Structural("at least one generator is required".into()));
        };
        if m == 0 || 3 * (m - 1) <= big_n - 2 {
            return Err(Error::Unsupported(format!(
                "connectivity too low: 3(m-1) = {} must exceed N-2 = {}",
                3 * m.saturating_sub(1),
                big_n - 2
            )));
        }
        if gen_degrees.iter().any(|&d| d < m || d >= big_n) {
            return Err(Error::Structural("generator degrees must lie in [m, N-1]".into()));
        }
        for i in 0..l {
            for j in 0..l {
                let (di, dj) = (gen_degrees[i], gen_degrees[j]);
                if di + dj != big_n && c.get(i, j) != 0 {
                    return Err(Error::Structural(format!(
                        "c[{}][{}] nonzero but degrees do not add to N",
                        i + 1,
                        j + 1
                    )));
                }
                let expected = if (di * dj) % 2 == 0 { c.get(j, i) } else { field.neg(c.get(j, i)) };
                if c.get(i, j) != expected {
                    return Err(Error::Structural(format!(
                        "c fails graded commutativity at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { field, big_n, gen_degrees, c })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Total dimension.
    pub fn big_n(&self) -> u32 {
        self.big_n
    }

    pub fn gen_degrees(&self) -> &[u32] {
        &self.gen_degrees
    }

    pub fn c(&self) -> &FpMatrix {
        &self.c
    }

    /// Connectivity parameter: the lowest cell degree.
    pub fn m(&self) -> u32 {
        self.gen_degrees[0]
    }

    /// Lowest degree `s` carrying a nonzero product into the top class, if any.
    pub fn m_prime(&self) -> Option<u32> {
        let l = self.gen_degrees.len();
        (0..l)
            .filter(|&i| (0..l).any(|j| self.c.get(i, j) != 0))
            .map(|i| self.gen_degrees[i])
            .min()
    }
}

/// The same complex seen as a general one: `x_1..x_k` then `y_1..y_k`.
pub fn to_general(spec: &PdComplexSpec) -> Result<GeneralComplexSpec> {
    require_valid(spec)?;
    if spec.n <= 3 {
        return Err(Error::Unsupported(format!(
            "n = {} too small: need 3(n-2) > 2n-3, i.e. n > 3",
            spec.n
        )));
    }
    let (k, n) = (spec.k, spec.n);
    let mut c = FpMatrix::zeros(spec.field, 2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let a = spec.a.get(i, j);
            // (n-1)n is even, so graded commutativity gives a symmetric completion.
            c.set(i, k + j, a);
            c.set(k + j, i, a);
        }
    }
    let degrees = std::iter::repeat_n(n - 1, k).chain(std::iter::repeat_n(n, k)).collect();
    GeneralComplexSpec::new(spec.field, 2 * n - 1, degrees, c)
}

/// A simply connected closed `(4m-1)`-manifold described by its middle homology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawManifoldSpec", into = "RawManifoldSpec")]
pub struct ManifoldSpec {
    pub m: u32,
    /// Odd prime to its multiset of exponents, stored sorted.
    pub torsion: BTreeMap<u32, Vec<u32>>,
    pub rational_rank: u32,
    pub two_torsion: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawManifoldSpec {
    pub m: u32,
    #[serde(default)]
    pub torsion: BTreeMap<String, Vec<u32>>,
    #[serde(default)]
    pub rational_rank: u32,
    #[serde(default)]
    pub two_torsion: bool,
}

impl TryFrom<RawManifoldSpec> for ManifoldSpec {
    type Error = Error;
    fn try_from(raw: RawManifoldSpec) -> Result<Self> {
        let mut torsion = BTreeMap::new();
        for (key, exps) in raw.torsion {
            let q: u32 = key
                .trim()
                .parse()
                .map_err(|_| Error::Structural(format!("torsion key {key:?} is not an integer")))?;
            torsion.insert(q, exps);
        }
        ManifoldSpec::new(raw.m, torsion, raw.rational_rank, raw.two_torsion)
    }
}

impl From<ManifoldSpec> for RawManifoldSpec {
    fn from(s: ManifoldSpec) -> Self {
        RawManifoldSpec {
            m: s.m,
            torsion: s.torsion.into_iter().map(|(q, e)| (q.to_string(), e)).collect(),
            rational_rank: s.rational_rank,
            two_torsion: s.two_torsion,
        }
    }
}

impl ManifoldSpec {
    pub fn new(
        m: u32,
        torsion: BTreeMap<u32, Vec<u32>>,
        rational_rank: u32,
        two_torsion: bool,
    ) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (q, mut exps) in torsion {
            if !is_odd_prime(q as u64) {
                return Err(Error::Structural(format!("torsion key {q} is not an odd prime")));
            }
            if exps.contains(&0) {
                return Err(Error::Structural(format!("exponents at {q} must be at least 1")));
            }
            exps.sort_unstable();
            if !exps.is_empty() {
                clean.insert(q, exps);
            }
        }
        Ok(Self { m, torsion: clean, rational_rank, two_torsion })
    }
}

pub fn validate_integral(man: &ManifoldSpec) -> ValidationReport {
    let mut v = Vec::new();
    if man.two_torsion {
        v.push(Violation::TwoTorsion);
    }
    if man.rational_rank != 0 {
        v.push(Violation::RationalRank { rank: man.rational_rank });
    }
    if man.m <= 2 {
        v.push(Violation::LowConnectivity { m: man.m });
    }
    ValidationReport::from_violations(v, Vec::new())
}
