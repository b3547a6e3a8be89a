//! Loop-equivalence invariants and classifiers, p-locally and integrally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{require_valid, validate_integral, ManifoldSpec, PdComplexSpec};
use crate::decompose::{decompose, decompose_parts, Decomposition, WedgeCell};
use crate::error::{Error, Result};

/// `(m, k2, sorted torsion exponents)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassInvariant {
    pub m: u32,
    pub k2: usize,
    pub torsion: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralInvariant {
    pub m: u32,
    pub torsion: BTreeMap<u32, Vec<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    /// Different primes or different dimensions.
    Incomparable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::NotEquivalent => "not_equivalent",
            Verdict::Incomparable => "incomparable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification<I> {
    pub equivalent: bool,
    pub verdict: Verdict,
    pub invariant_a: I,
    pub invariant_b: I,
}

impl<I> Classification<I> {
    fn new(verdict: Verdict, invariant_a: I, invariant_b: I) -> Self {
        Self { equivalent: verdict == Verdict::Equivalent, verdict, invariant_a, invariant_b }
    }
}

pub fn class_invariant(spec: &PdComplexSpec) -> Result<ClassInvariant> {
    require_valid(spec)?;
    let m = match spec.m() {
        Some(m) if m > 2 => m,
        _ => {
            return Err(Error::Unsupported(format!(
                "classification needs n = 2m with m > 2, got n = {}",
                spec.n()
            )))
        }
    };
    let mut torsion = spec.r().to_vec();
    torsion.sort_unstable();
    Ok(ClassInvariant { m, k2: spec.k2(), torsion })
}

pub fn classify(a: &PdComplexSpec, b: &PdComplexSpec) -> Result<Classification<ClassInvariant>> {
    let ia = class_invariant(a)?;
    let ib = class_invariant(b)?;
    let verdict = if a.p() != b.p() || ia.m != ib.m {
        Verdict::Incomparable
    } else if ia == ib {
        Verdict::Equivalent
    } else {
        Verdict::NotEquivalent
    };
    Ok(Classification::new(verdict, ia, ib))
}

fn require_integral(man: &ManifoldSpec) -> Result<()> {
    let report = validate_integral(man);
    if report.ok {
        Ok(())
    } else {
        let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        Err(Error::Invalid(msgs.join("; ")))
    }
}

pub fn integral_invariant(man: &ManifoldSpec) -> Result<IntegralInvariant> {
    require_integral(man)?;
    Ok(IntegralInvariant { m: man.m, torsion: man.torsion.clone() })
}

pub fn classify_integral(a: &ManifoldSpec, b: &ManifoldSpec) -> Result<Classification<IntegralInvariant>> {
    let ia = integral_invariant(a)?;
    let ib = integral_invariant(b)?;
    let verdict = if ia.m != ib.m {
        Verdict::Incomparable
    } else if ia.torsion == ib.torsion {
        Verdict::Equivalent
    } else {
        Verdict::NotEquivalent
    };
    Ok(Classification::new(verdict, ia, ib))
}

/// The `q`-local complex of a manifold: one torsion pair per exponent at `q`, with the
/// identity pairing. `None` when there is no `q`-torsion, where the localization is a
/// sphere.
pub fn local_spec(man: &ManifoldSpec, q: u32) -> Result<Option<PdComplexSpec>> {
    let Some(exps) = man.torsion.get(&q) else { return Ok(None) };
    let k = exps.len();
    let eye: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect();
    PdComplexSpec::new(q, 2 * man.m, k, k, exps.clone(), &eye).map(Some)
}

/// All primes carrying torsion in either manifold.
pub fn torsion_primes(a: &ManifoldSpec, b: &ManifoldSpec) -> BTreeSet<u32> {
    a.torsion.keys().chain(b.torsion.keys()).copied().collect()
}

/// `Ω G × Q × Ω S^{4m-1}` with `G ≃ ΩN ⋉ I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralDecomposition {
    pub m: u32,
    /// `(q, s_q)` for each factor `S^{2m-1}{q^{s_q}}` of `Q`.
    pub q_factors: Vec<(u32, u32)>,
    pub loop_sphere: u32,
    /// Moore cells of `I`, per prime.
    pub i_cells: BTreeMap<u32, Vec<WedgeCell>>,
    /// Decomposition of the localization at each torsion prime.
    pub local: BTreeMap<u32, Decomposition>,
}

impl IntegralDecomposition {
    pub fn q_string(&self) -> String {
        self.q_factors
            .iter()
            .map(|&(q, s)| {
                if s == 1 {
                    format!("S^{}{{{q}}}", 2 * self.m - 1)
                } else {
                    format!("S^{}{{{q}^{s}}}", 2 * self.m - 1)
                }
            })
            .collect::<Vec<_>>()
            .join(" x ")
    }

    pub fn i_string(&self) -> String {
        let cells: Vec<String> = self
            .i_cells
            .iter()
            .flat_map(|(q, cells)| {
                cells.iter().map(move |c| match c {
                    WedgeCell::Moore { dim, exponent: 1 } => format!("P^{dim}({q})"),
                    WedgeCell::Moore { dim, exponent } => format!("P^{dim}({q}^{exponent})"),
                    WedgeCell::Sphere { dim } => format!("S^{dim}"),
                })
            })
            .collect();
        if cells.is_empty() {
            "*".into()
        } else {
            cells.join(" v ")
        }
    }
}

impl fmt::Display for IntegralDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.q_string();
        if q.is_empty() {
            write!(f, "Loops(S^{})", self.loop_sphere)
        } else {
            write!(f, "Loops(G) x {q} x Loops(S^{}), I = {}", self.loop_sphere, self.i_string())
        }
    }
}

pub fn integral_decompose(man: &ManifoldSpec) -> Result<IntegralDecomposition> {
    require_integral(man)?;
    let m = man.m;
    let mut q_factors = Vec::new();
    let mut i_cells = BTreeMap::new();
    let mut local = BTreeMap::new();
    for (&q, exps) in &man.torsion {
        let s_q = *exps.iter().max().expect("nonempty after validation");
        q_factors.push((q, s_q));
        let cells = decompose_parts(m, exps, 0).wedge_cells().to_vec();
        i_cells.insert(q, cells);
        let spec = local_spec(man, q)?.expect("prime has torsion");
        local.insert(q, decompose(&spec)?);
    }
    Ok(IntegralDecomposition { m, q_factors, loop_sphere: 4 * m - 1, i_cells, local })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u32, n: u32, k1: usize, r: &[u32], a: &[&[i64]]) -> PdComplexSpec {
        let rows: Vec<Vec<i64>> = a.iter().map(|r| r.to_vec()).collect();
        PdComplexSpec::new(p, n, rows.len(), k1, r.to_vec(), &rows).unwrap()
    }

    fn man(m: u32, torsion: &[(u32, &[u32])]) -> ManifoldSpec {
        let t = torsion.iter().map(|&(q, e)| (q, e.to_vec())).collect();
        ManifoldSpec::new(m, t, 0, false).unwrap()
    }

    #[test]
    fn classify_examples() {
        let a = spec(5, 6, 2, &[1, 2], &[&[1, 0], &[0, 1]]);
        let b = spec(5, 6, 2, &[2, 1], &[&[0, 1], &[1, 0]]);
        let c = classify(&a, &b).unwrap();
        assert_eq!(c.verdict, Verdict::Equivalent);
        assert!(c.equivalent);

        let d = spec(5, 6, 2, &[2, 2], &[&[1, 0], &[0, 1]]);
        assert_eq!(classify(&a, &d).unwrap().verdict, Verdict::NotEquivalent);

        let e = spec(5, 6, 1, &[1], &[&[1, 0], &[0, 1]]);
        let f = spec(5, 6, 2, &[1, 1], &[&[1, 0], &[0, 1]]);
        assert_eq!(classify(&e, &f).unwrap().verdict, Verdict::NotEquivalent);

        let g = spec(3, 6, 2, &[1, 2], &[&[1, 0], &[0, 1]]);
        assert_eq!(classify(&a, &g).unwrap().verdict, Verdict::Incomparable);
        let h = spec(5, 8, 2, &[1, 2], &[&[1, 0], &[0, 1]]);
        assert_eq!(classify(&a, &h).unwrap().verdict, Verdict::Incomparable);

        let low = spec(5, 4, 1, &[1], &[&[1]]);
        assert!(matches!(classify(&low, &low), Err(Error::Unsupported(_))));
    }

    #[test]
    fn classify_integral_examples() {
        let a = man(3, &[(3, &[1, 2]), (7, &[1])]);
        assert!(classify_integral(&a, &a.clone()).unwrap().equivalent);
        let b = man(3, &[(3, &[1, 2])]);
        let c = man(3, &[(3, &[1, 1])]);
        assert_eq!(classify_integral(&b, &c).unwrap().verdict, Verdict::NotEquivalent);
        let d = man(3, &[(3, &[1])]);
        let e = man(3, &[(5, &[1])]);
        assert_eq!(classify_integral(&d, &e).unwrap().verdict, Verdict::NotEquivalent);
        let bad = ManifoldSpec { rational_rank: 1, ..d.clone() };
        assert!(matches!(classify_integral(&bad, &d), Err(Error::Invalid(_))));
    }

    #[test]
    fn integral_decompose_examples() {
        let d = integral_decompose(&man(3, &[(3, &[2, 1])])).unwrap();
        assert_eq!(d.q_factors, vec![(3, 2)]);
        assert_eq!(d.q_string(), "S^5{3^2}");
        assert_eq!(d.i_string(), "P^6(3)");

        let d = integral_decompose(&man(3, &[(3, &[1]), (5, &[1])])).unwrap();
        assert_eq!(d.q_string(), "S^5{3} x S^5{5}");

        let d = integral_decompose(&man(3, &[])).unwrap();
        assert!(d.q_factors.is_empty());
        assert_eq!(d.to_string(), "Loops(S^11)");
    }

    #[test]
    fn local_decomposition_matches() {
        let mf = man(4, &[(3, &[1, 3, 2]), (5, &[2])]);
        let d = integral_decompose(&mf).unwrap();
        assert_eq!(d.local[&3].to_string(), decompose(&local_spec(&mf, 3).unwrap().unwrap()).unwrap().to_string());
        assert_eq!(d.local[&3].wedge_cells(), d.i_cells[&3].as_slice());
        assert!(local_spec(&mf, 7).unwrap().is_none());
    }
}
