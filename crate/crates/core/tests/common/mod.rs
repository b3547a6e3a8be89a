//! Helpers shared by the integration tests: seeded random specs and brute-force
//! linear algebra that shares no code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use pdloop::attach::{TensorElement, Word};
use pdloop::complex::PdComplexSpec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant mod p by cofactor expansion. Fine for the tiny sizes used here.
pub fn det_mod(p: i64, a: &[Vec<i64>]) -> i64 {
    let k = a.len();
    match k {
        0 => 1,
        1 => a[0][0].rem_euclid(p),
        _ => {
            let mut acc = 0i64;
            for j in 0..k {
                let minor: Vec<Vec<i64>> = a[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc = (acc + sign * a[0][j] * det_mod(p, &minor)).rem_euclid(p);
            }
            acc
        }
    }
}

/// The constraints on a cup matrix, checked entry by entry.
pub fn admissible(p: i64, n: u32, k1: usize, a: &[Vec<i64>]) -> bool {
    let k = a.len();
    if det_mod(p, a) == 0 {
        return false;
    }
    let c_zero = (k1..k).all(|i| (0..k1).all(|j| a[i][j].rem_euclid(p) == 0));
    let block = (0..k1).all(|i| {
        (0..k1).all(|j| {
            if n.is_multiple_of(2) {
                (a[i][j] - a[j][i]).rem_euclid(p) == 0
            } else {
                (a[i][j] + a[j][i]).rem_euclid(p) == 0
            }
        })
    });
    c_zero && block
}

/// Every `k x k` matrix with entries in `0..p`.
pub fn all_matrices(p: i64, k: usize) -> Vec<Vec<Vec<i64>>> {
    let total = (p as usize).pow((k * k) as u32);
    (0..total)
        .map(|mut code| {
            let mut a = vec![vec![0i64; k]; k];
            for row in a.iter_mut() {
                for x in row.iter_mut() {
                    *x = (code % p as usize) as i64;
                    code /= p as usize;
                }
            }
            a
        })
        .collect()
}

/// A uniformly sampled admissible cup matrix, by rejection. For odd `n` the torsion
/// block is skew, so `k1` must be even.
pub fn random_cup_matrix(rng: &mut impl Rng, p: i64, n: u32, k: usize, k1: usize) -> Vec<Vec<i64>> {
    assert!(n.is_multiple_of(2) || k1.is_multiple_of(2), "no admissible matrix for odd n and odd k1");
    loop {
        let mut a = vec![vec![0i64; k]; k];
        for i in 0..k {
            for j in 0..k {
                if i >= k1 && j < k1 {
                    continue;
                }
                if i < k1 && j < k1 && j < i {
                    let s = if n.is_multiple_of(2) { 1 } else { -1 };
                    a[i][j] = (s * a[j][i]).rem_euclid(p);
                } else if i < k1 && i == j && n % 2 == 1 {
                    a[i][j] = 0;
                } else {
                    a[i][j] = rng.gen_range(0..p);
                }
            }
        }
        if admissible(p, n, k1, &a) {
            return a;
        }
    }
}

pub fn random_exponents(rng: &mut impl Rng, k1: usize) -> Vec<u32> {
    (0..k1).map(|_| rng.gen_range(1..=3)).collect()
}

pub fn spec(p: u32, n: u32, k1: usize, r: Vec<u32>, a: &[Vec<i64>]) -> PdComplexSpec {
    PdComplexSpec::new(p, n, a.len(), k1, r, a).expect("well-formed spec")
}

/// All `r` tuples in `{1,2,3}^k1`.
pub fn exponent_tuples(k1: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k1 {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=3).map(move |r| {
                    let mut t = t.clone();
                    t.push(r);
                    t
                })
            })
            .collect();
    }
    out
}

/// Rank mod p, eliminating columns from the last to the first and picking the
/// bottom-most nonzero row as pivot.
pub fn rank_reverse_pivot(p: u64, rows: &[Vec<u32>]) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| u64::from(x)).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |a: u64| {
        let mut r = 1u64;
        let (mut b, mut e) = (a % p, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    let mut live: Vec<usize> = (0..m.len()).collect();
    for c in (0..cols).rev() {
        let Some(pos) = live.iter().rposition(|&i| !m[i][c].is_multiple_of(p)) else { continue };
        let piv = live.remove(pos);
        let s = inv(m[piv][c]);
        for &i in &live {
            let f = m[i][c] * s % p;
            if f != 0 {
                for j in 0..cols {
                    m[i][j] = (m[i][j] + (p - f) * m[piv][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Words of a given degree, built directly from the generator degrees.
pub fn words_of_degree(degrees: &[u32], d: u32) -> Vec<Word> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (g, &dg) in degrees.iter().enumerate() {
        if dg <= d {
            for mut tail in words_of_degree(degrees, d - dg) {
                tail.insert(0, g as u16);
                out.push(tail);
            }
        }
    }
    out
}

/// Brute-force membership in the two-sided ideal of `chi` in degree `d`: the span of
/// all `a · chi · b` against the word basis, compared by rank.
pub struct BruteIdeal {
    p: u64,
    index: HashMap<Word, usize>,
    span: Vec<Vec<u32>>,
    rank: usize,
}

impl BruteIdeal {
    pub fn new(chi: &TensorElement, d: u32) -> Self {
        let degrees = chi.table().degrees.clone();
        let p = u64::from(chi.field().p());
        let words = words_of_degree(&degrees, d);
        let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let mut span = Vec::new();
        if let Some(rest) = d.checked_sub(chi.degree()) {
            for da in 0..=rest {
                for a in words_of_degree(&degrees, da) {
                    for b in words_of_degree(&degrees, rest - da) {
                        let mut v = vec![0u32; words.len()];
                        for (w, &c) in chi.terms() {
                            let mut full = a.clone();
                            full.extend_from_slice(w);
                            full.extend_from_slice(&b);
                            let i = index[&full];
                            v[i] = ((u64::from(v[i]) + u64::from(c)) % p) as u32;
                        }
                        span.push(v);
                    }
                }
            }
        }
        let rank = rank_reverse_pivot(p, &span);
        Self { p, index, span, rank }
    }

    pub fn dim(&self) -> usize {
        self.rank
    }

    pub fn contains(&self, x: &TensorElement) -> bool {
        let mut v = vec![0u32; self.index.len()];
        for (w, &c) in x.terms() {
            v[self.index[w]] = c;
        }
        let mut rows = self.span.clone();
        rows.push(v);
        rank_reverse_pivot(self.p, &rows) == self.rank
    }
}

/// A random homogeneous element of degree `d` with up to `terms` words.
pub fn random_element(rng: &mut impl Rng, chi: &TensorElement, d: u32, terms: usize) -> TensorElement {
    let table = chi.table();
    let words = words_of_degree(&table.degrees, d);
    let p = chi.field().p() as i64;
    let picks: Vec<(Word, i64)> = (0..terms)
        .filter(|_| !words.is_empty())
        .map(|_| (words[rng.gen_range(0..words.len())].clone(), rng.gen_range(0..p)))
        .collect();
    TensorElement::from_terms(table, d, &picks).expect("homogeneous")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run the built binary with the given arguments.
pub fn pdloop(args: &[&str]) -> Run {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_pdloop"))
        .args(args)
        .output()
        .expect("spawn pdloop");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf8"),
        stderr: String::from_utf8(out.stderr).expect("utf8"),
    }
}

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// The report goldens: input file, extra arguments, expected output file.
pub const GOLDEN_REPORTS: &[(&str, &[&str], &str)] = &[
    ("k1_m3.json", &["--cap", "10"], "k1_m3_cap10.txt"),
    ("k2_m4.json", &[], "k2_m4.txt"),
    ("k1_m3.json", &["--cap", "4"], "k1_m3_cap4.txt"),
    ("k1_m3.json", &["--cap", "10", "--format", "json"], "k1_m3_cap10.report.json"),
];

/// Compare each golden report with fresh output. With `UPDATE_GOLDEN` set the files
/// are rewritten instead.
pub fn check_goldens() -> Vec<String> {
    let dir = golden_dir();
    let mut failures = Vec::new();
    for (input, extra, expected) in GOLDEN_REPORTS {
        let path = dir.join(input);
        let mut args = vec!["report", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        let run = pdloop(&args);
        if run.code != 0 {
            failures.push(format!("{expected}: exit {}", run.code));
            continue;
        }
        let target = dir.join(expected);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&target, &run.stdout).unwrap();
        } else if std::fs::read_to_string(&target).ok().as_deref() != Some(run.stdout.as_str()) {
            failures.push(format!("{expected}: output differs"));
        }
    }
    failures
}
