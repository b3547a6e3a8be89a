//! Replay of the formal spectral sequence `H_*(P) ⊗ A` with its transgressive
//! differentials, inside a total-degree window.
//!
//! Cell `(s, t)` is `span{base cells of degree s} ⊗ A_t`. A base cell `a_i` transgresses
//! to `u_i` on page `|a_i|`, and the top cell `z` hits
//! `(-1)^{m'} sum c_ij a_j ⊗ u_i` on page `m'`. Both are extended by the left
//! `A`-action: `d(a ⊗ w) = w · d(a ⊗ 1)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{left_kernel, EchelonBasis};
use crate::complex::GeneralComplexSpec;
use crate::error::{Error, Result};
use crate::loop_algebra::QuotientAlgebra;

/// Cell position `(s, t)`.
type CellKey = (u32, u32);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDim {
    pub s: u32,
    pub t: u32,
    pub dim: usize,
}

/// Nonzero cells of `E^r` inside the window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub r: u32,
    pub cells: Vec<CellDim>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// Every cell other than `(0, 0)` dies.
    Acyclic,
    /// First surviving cell in `(total degree, s)` order.
    Survivor { s: u32, t: u32, dim: usize },
    /// A differential fails to be well defined on its page.
    IllDefined { page: u32, s: u32, t: u32 },
    /// The requested range reaches cells whose fate lies outside the window.
    Indeterminate { window: usize },
}

impl Verdict {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, Verdict::Acyclic)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Acyclic => f.write_str("acyclic"),
            Verdict::Survivor { s, t, dim } => write!(f, "survivor at ({s},{t}) of dimension {dim}"),
            Verdict::IllDefined { page, s, t } => {
                write!(f, "differential d^{page} ill defined at ({s},{t})")
            }
            Verdict::Indeterminate { window } => {
                write!(f, "indeterminate: cells of total degree >= {window} leave the window")
            }
        }
    }
}

/// The replayed pages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSequence {
    /// Cells with `s + t <= window` are built; those with `s + t < window` are decided.
    pub window: usize,
    pub pages: Vec<Page>,
    /// First page and cell where a differential was not well defined.
    pub ill_defined: Option<(u32, u32, u32)>,
    /// `d^r ∘ d^r = 0` wherever two differentials of one page compose.
    pub d_squared_zero: bool,
}

struct Cell {
    mult: usize,
    dim_a: usize,
    z: EchelonBasis,
    b: EchelonBasis,
}

impl Cell {
    fn dim(&self) -> usize {
        self.mult * self.dim_a
    }

    fn homology(&self) -> usize {
        self.z.rank() - self.b.rank()
    }
}

struct Replay<'a> {
    spec: &'a GeneralComplexSpec,
    q: &'a QuotientAlgebra,
    /// Base degree to the indices of cells in that degree. `0` and `N` have none.
    groups: BTreeMap<u32, Vec<usize>>,
    m_prime: u32,
    window: usize,
    cells: BTreeMap<(u32, u32), Cell>,
}

impl<'a> Replay<'a> {
    fn new(spec: &'a GeneralComplexSpec, q: &'a QuotientAlgebra, window: usize, m_prime: u32) -> Self {
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &d) in spec.gen_degrees().iter().enumerate() {
            groups.entry(d).or_default().push(i);
        }
        let field = q.field();
        let mut cells = BTreeMap::new();
        let mut bases: Vec<(u32, usize)> = vec![(0, 1), (spec.big_n(), 1)];
        bases.extend(groups.iter().map(|(&d, g)| (d, g.len())));
        for (s, mult) in bases {
            for t in 0..=window.saturating_sub(s as usize) {
                if s as usize > window {
                    break;
                }
                let dim_a = q.dim_a(t);
                let dim = mult * dim_a;
                let mut z = EchelonBasis::new(field, dim);
                for i in 0..dim {
                    let mut e = vec![0; dim];
                    e[i] = 1;
                    z.insert(e);
                }
                let b = EchelonBasis::new(field, dim);
                cells.insert((s, t as u32), Cell { mult, dim_a, z, b });
            }
        }
        Self { spec, q, groups, m_prime, window, cells }
    }

    /// `w · u_g` in `A_{t+|u_g|}`, from quotient coordinates.
    fn right_mul(&self, t: usize, q_coords: &[u32], g: usize) -> Vec<u32> {
        let lifted = self.q.lift(t, q_coords);
        let dg = self.q.table().degrees[g] as usize;
        let prod = self.q.right_mul_gen(t, &lifted, g);
        self.q.project(t + dg, &prod)
    }

    /// Target of the page-`r` differential out of degree `s`, if any.
    fn target(&self, r: u32, s: u32) -> Option<u32> {
        if s == self.spec.big_n() && r == self.m_prime {
            Some(s - r)
        } else if s == r && self.groups.contains_key(&s) {
            Some(0)
        } else {
            None
        }
    }

    /// The formal differential `C_{s,t} -> C_{s-r, t+r-1}` on one vector.
    fn apply(&self, r: u32, s: u32, t: u32, v: &[u32]) -> Vec<u32> {
        let f = self.q.field();
        let t = t as usize;
        let tt = t + r as usize - 1;
        let dim_a = self.q.dim_a(t);
        let dim_tt = self.q.dim_a(tt);
        if s == r {
            // Transgression of each base cell a_i to u_i.
            let mut out = vec![0; dim_tt];
            for (slot, &g) in self.groups[&s].iter().enumerate() {
                let block = &v[slot * dim_a..(slot + 1) * dim_a];
                if block.iter().any(|&c| c != 0) {
                    f.axpy(&mut out, 1, &self.right_mul(t, block, g));
                }
            }
            out
        } else {
            // Top cell: w ↦ (-1)^{m'} sum c_ij a_j ⊗ w u_i.
            let tgt_deg = s - r;
            let tgt_group = &self.groups[&tgt_deg];
            let mut out = vec![0; tgt_group.len() * dim_tt];
            let sign = f.sign(u64::from(self.m_prime));
            let c = self.spec.c();
            for &i in &self.groups[&r] {
                let prod = self.right_mul(t, v, i);
                for (slot, &j) in tgt_group.iter().enumerate() {
                    let cij = c.get(i, j);
                    if cij != 0 {
                        f.axpy(&mut out[slot * dim_tt..(slot + 1) * dim_tt], f.mul(sign, cij), &prod);
                    }
                }
            }
            out
        }
    }

    fn snapshot(&self, r: u32) -> Page {
        let cells = self
            .cells
            .iter()
            .filter_map(|(&(s, t), c)| {
                let dim = c.homology();
                (dim > 0).then_some(CellDim { s, t, dim })
            })
            .collect();
        Page { r, cells }
    }

    fn run(mut self) -> PageSequence {
        let mut page_numbers: Vec<u32> = self.groups.keys().copied().collect();
        page_numbers.push(self.m_prime);
        page_numbers.sort_unstable();
        page_numbers.dedup();

        let mut pages = vec![self.snapshot(2.min(page_numbers[0]))];
        let mut ill_defined = None;
        let mut d_squared_zero = true;

        for &r in &page_numbers {
            let mut new_z: Vec<(CellKey, EchelonBasis)> = Vec::new();
            let mut new_b: Vec<(CellKey, Vec<Vec<u32>>)> = Vec::new();
            for (&(s, t), cell) in &self.cells {
                let Some(ts) = self.target(r, s) else { continue };
                let tgt_key = (ts, t + r - 1);
                let Some(tgt) = self.cells.get(&tgt_key) else { continue };
                let images: Vec<Vec<u32>> =
                    cell.z.rows().iter().map(|z| self.apply(r, s, t, z)).collect();
                let well_defined = images.iter().all(|y| tgt.z.contains(y))
                    && cell.b.rows().iter().all(|b| tgt.b.contains(&self.apply(r, s, t, b)));
                if !well_defined && ill_defined.is_none() {
                    ill_defined = Some((r, s, t));
                }
                // d^r ∘ d^r when the target also differentiates on this page.
                if let Some(ts2) = self.target(r, ts) {
                    if let Some(tgt2) = self.cells.get(&(ts2, tgt_key.1 + r - 1)) {
                        let composed_ok = images
                            .iter()
                            .all(|y| tgt2.b.contains(&self.apply(r, tgt_key.0, tgt_key.1, y)));
                        d_squared_zero &= composed_ok;
                    }
                }
                let reduced: Vec<Vec<u32>> = images
                    .iter()
                    .map(|y| {
                        let mut y = y.clone();
                        tgt.b.reduce(&mut y);
                        y
                    })
                    .collect();
                let kernel = left_kernel(self.q.field(), &reduced, tgt.dim());
                let mut z = EchelonBasis::new(self.q.field(), cell.dim());
                let f = self.q.field();
                for lam in kernel {
                    let mut v = vec![0; cell.dim()];
                    for (c, row) in lam.iter().zip(cell.z.rows()) {
                        f.axpy(&mut v, *c, row);
                    }
                    z.insert(v);
                }
                new_z.push(((s, t), z));
                new_b.push((tgt_key, images));
            }
            if ill_defined.is_some() {
                // Later pages would not be meaningful.
                break;
            }
            for (key, z) in new_z {
                self.cells.get_mut(&key).expect("cell").z = z;
            }
            for (key, images) in new_b {
                self.cells.get_mut(&key).expect("cell").b.extend(images);
            }
            pages.push(self.snapshot(r + 1));
        }
        PageSequence { window: self.window, pages, ill_defined, d_squared_zero }
    }
}

/// Replay all pages for cells with `s + t <= window`, where the window is the smaller
/// of `cap` and the quotient's cap.
pub fn build_pages(spec: &GeneralComplexSpec, quotient: &QuotientAlgebra, cap: usize) -> Result<PageSequence> {
    let Some(m_prime) = spec.m_prime() else {
        return Err(Error::Unsupported(
            "no nontrivial product into the top class; the replay needs one".into(),
        ));
    };
    if quotient.table().degrees != spec.gen_degrees().iter().map(|d| d - 1).collect::<Vec<_>>()
        || quotient.field() != spec.field()
    {
        return Err(Error::MismatchedTables);
    }
    let window = cap.min(quotient.cap());
    Ok(Replay::new(spec, quotient, window, m_prime).run())
}

/// Decide whether everything except `(0, 0)` dies for total degree `<= cap`.
pub fn verify_acyclic(pages: &PageSequence, cap: usize) -> Verdict {
    if let Some((page, s, t)) = pages.ill_defined {
        return Verdict::IllDefined { page, s, t };
    }
    let last = pages.pages.last().expect("at least one page");
    let mut survivors: Vec<&CellDim> = last
        .cells
        .iter()
        .filter(|c| (c.s, c.t) != (0, 0) && (c.s + c.t) as usize <= cap.min(pages.window.saturating_sub(1)))
        .collect();
    survivors.sort_by_key(|c| (c.s + c.t, c.s));
    if let Some(c) = survivors.first() {
        return Verdict::Survivor { s: c.s, t: c.t, dim: c.dim };
    }
    if cap >= pages.window {
        return Verdict::Indeterminate { window: pages.window };
    }
    Verdict::Acyclic
}

/// Text table of every page's nonzero cells.
pub fn dump_text(pages: &PageSequence) -> String {
    let mut out = String::new();
    for (i, page) in pages.pages.iter().enumerate() {
        let name = if i + 1 == pages.pages.len() { "E^inf".to_string() } else { format!("E^{}", page.r) };
        out.push_str(&format!("{name}: {} nonzero cells\n", page.cells.len()));
        for c in &page.cells {
            out.push_str(&format!("  ({:>3},{:>3})  dim {}\n", c.s, c.t, c.dim));
        }
    }
    out
}
