//! The linear system relating fermionic and direct expectation values on
//! random Matsubara data, its exact reduction, and the resulting tables.
//!
//! Each Matsubara instance gives one equation `B_a = Σ_α A_α X[α][a]` with
//! `A_α = ⟨v_α⟩` from the fermionic side and `B_a = ⟨O_a⟩` computed directly.
//! Reducing `[A | B]` yields `X`; a pivot in the `B` block means the data
//! are inconsistent.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fermion_basis::{compute_v, expect_fermionic, minors, FermionBasis, IndexPair};
use crate::linalg::{Rref, SparseRow};
use crate::matsubara::{generate_md, MatsubaraData};
use crate::omega_exact::{omega_md, OmegaMatrix};
use crate::operator_space::{enumerate_irreducible_words, invariant_basis, DirectEvaluator, InvariantOperator, TensorWord};
use rug::Rational;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const MD_RANGE: u32 = 9;
pub const ORIENTATION: &str = "sigma+ -> C, sigma- -> B";

/// `(L, m, count)` blocks of Matsubara data.
pub type Schedule = Vec<(usize, usize, usize)>;

/// The schedule used for the ten-site system: 1307 equations.
pub fn published_schedule() -> Schedule {
    vec![
        (1, 0, 20),
        (2, 0, 200),
        (3, 0, 300),
        (4, 0, 90),
        (5, 0, 10),
        (2, 1, 10),
        (3, 1, 200),
        (4, 1, 325),
        (5, 1, 100),
        (4, 2, 10),
        (5, 2, 35),
        (6, 2, 7),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleMode {
    /// Walk the `(L, m)` ladder and keep only rank-increasing data.
    Auto { checks: usize, holdout: usize },
    Fixed(Schedule),
}

impl Default for ScheduleMode {
    fn default() -> Self {
        ScheduleMode::Auto { checks: 4, holdout: 2 }
    }
}

/// Seed for the `idx`-th instance of block `(l, m)`.
pub fn derive_seed(seed: u64, l: usize, m: usize, idx: usize) -> u64 {
    // splitmix64 over the packed tuple
    let mut z = seed ^ ((l as u64) << 48) ^ ((m as u64) << 40) ^ (idx as u64);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything needed to write equations for `n` sites.
pub struct Problem {
    pub n: usize,
    pub fermions: FermionBasis,
    pub basis: Vec<InvariantOperator>,
    pub words: Vec<TensorWord>,
    word_index: BTreeMap<TensorWord, usize>,
}

impl Problem {
    pub fn new(n: usize) -> Self {
        let words = enumerate_irreducible_words(n);
        let word_index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Problem { n, fermions: compute_v(n), basis: invariant_basis(n), words, word_index }
    }

    pub fn dim_v(&self) -> usize {
        self.fermions.dim_v()
    }

    /// `⟨v_α⟩` for one instance.
    pub fn a_row(&self, md: &MatsubaraData) -> Result<Vec<Rational>> {
        let OmegaMatrix::Exact(w) = omega_md(md, self.n)? else { unreachable!() };
        let one = Rational::from(1);
        let mv = minors(&self.fermions, &w, &one, Exec::Sequential)?;
        Ok(expect_fermionic(&self.fermions, &mv, &one))
    }

    /// `⟨O_a⟩` for one instance, by direct evaluation.
    pub fn b_row(&self, md: &MatsubaraData) -> Result<Vec<Rational>> {
        let ev = DirectEvaluator::new(md)?;
        let vals = ev.expect_words(&self.words)?;
        Ok(self
            .basis
            .iter()
            .map(|o| o.coeffs.iter().map(|(w, c)| Rational::from(c * &vals[self.word_index[w]])).sum())
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub n: usize,
    pub equations: usize,
    pub rank_a: usize,
    pub dim_v: usize,
    pub residual_zero_rows: usize,
    pub inconsistent_rows: usize,
    pub holdout_rows: usize,
    pub holdout_failures: usize,
    pub schedule: Schedule,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.rank_a == self.dim_v && self.inconsistent_rows == 0 && self.holdout_failures == 0
    }
}

impl std::fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "orientation: {ORIENTATION}")?;
        writeln!(f, "equations: {}", self.equations)?;
        writeln!(f, "rank A: {} (dim V = {})", self.rank_a, self.dim_v)?;
        writeln!(f, "zero residual rows: {}", self.residual_zero_rows)?;
        writeln!(f, "inconsistent rows: {}", self.inconsistent_rows)?;
        writeln!(f, "holdout: {} rows, {} failures", self.holdout_rows, self.holdout_failures)?;
        let s: Vec<String> = self.schedule.iter().map(|(l, m, c)| format!("({l},{m},{c})")).collect();
        write!(f, "schedule: {}", s.join(" "))
    }
}

/// Exact reduction of `[A | B]` as rows arrive.
pub struct System {
    dim_v: usize,
    nb: usize,
    rref: Rref,
    equations: usize,
    zero_rows: usize,
    bad_rows: usize,
}

impl System {
    pub fn new(dim_v: usize, nb: usize) -> Self {
        System { dim_v, nb, rref: Rref::new(dim_v + nb), equations: 0, zero_rows: 0, bad_rows: 0 }
    }

    pub fn insert(&mut self, a: &[Rational], b: &[Rational]) {
        let row: SparseRow = a
            .iter()
            .chain(b)
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| (i, c.clone()))
            .collect();
        self.equations += 1;
        match self.rref.insert(&row) {
            None => self.zero_rows += 1,
            Some(p) if p >= self.dim_v => self.bad_rows += 1,
            Some(_) => {}
        }
    }

    pub fn rank_a(&self) -> usize {
        self.rref.pivots().iter().filter(|&&p| p < self.dim_v).count()
    }

    /// `X[α]` over the invariant basis, one row per `v_α`.
    pub fn extract_x(&self) -> Result<Vec<SparseRow>> {
        (0..self.dim_v)
            .map(|alpha| {
                let row = self
                    .rref
                    .row_for_pivot(alpha)
                    .ok_or(Error::RankDeficient { rank: self.rank_a(), expected: self.dim_v })?;
                Ok(row.iter().filter(|(c, _)| *c >= self.dim_v).map(|(c, v)| (c - self.dim_v, v.clone())).collect())
            })
            .collect()
    }

    pub fn nb(&self) -> usize {
        self.nb
    }
}

fn holds(x: &[SparseRow], a: &[Rational], b: &[Rational]) -> bool {
    let mut pred = vec![Rational::new(); b.len()];
    for (alpha, row) in x.iter().enumerate() {
        if a[alpha] == 0 {
            continue;
        }
        for (c, v) in row {
            pred[*c] += Rational::from(v * &a[alpha]);
        }
    }
    pred == b
}

/// `X(n)` with the trace-pairing norms `g_a` of the invariant basis.
#[derive(Clone, Debug, PartialEq)]
pub struct XTables {
    pub n: usize,
    pub x: Vec<SparseRow>,
    pub gram: Vec<Rational>,
    pub report: ConsistencyReport,
}

fn ladder(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for m in 0..=2usize {
        for l in (2 * m).max(1)..=n.max(2) {
            out.push((l, m));
        }
    }
    out
}

fn check_rungs(n: usize) -> Vec<(usize, usize)> {
    vec![(3, 1), (4, 2), (2, 1), (5, 2), (n.max(1), 0)]
}

type Rows = Vec<(Vec<Rational>, Vec<Rational>)>;

fn batch_rows(p: &Problem, jobs: &[(usize, usize, u64)], exec: Exec, with_b: bool) -> Result<Vec<(Vec<Rational>, Option<Vec<Rational>>)>> {
    exec.map(jobs, |&(l, m, s)| -> Result<_> {
        let md = generate_md(l, m, s, MD_RANGE)?;
        let a = p.a_row(&md)?;
        let b = if with_b { Some(p.b_row(&md)?) } else { None };
        Ok((a, b))
    })
    .into_iter()
    .collect()
}

/// Build and reduce the system, extract `X(n)` and check held-out equations.
pub fn solve_x(p: &Problem, mode: &ScheduleMode, seed: u64, exec: Exec) -> Result<XTables> {
    let dim_v = p.dim_v();
    let nb = p.basis.len();
    let mut sys = System::new(dim_v, nb);
    let mut holdout: Rows = Vec::new();
    let mut used: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    match mode {
        ScheduleMode::Fixed(sched) => {
            let mut jobs = Vec::new();
            for &(l, m, cnt) in sched {
                for i in 0..cnt {
                    jobs.push((l, m, derive_seed(seed, l, m, i)));
                }
                *used.entry((l, m)).or_default() += cnt;
            }
            for (a, b) in batch_rows(p, &jobs, exec, true)? {
                sys.insert(&a, &b.unwrap());
            }
        }
        ScheduleMode::Auto { checks, holdout: nh } => {
            // A rows are cheap: select rank-increasing instances first
            let mut arank = Rref::new(dim_v);
            let mut keep: Vec<(usize, usize, u64)> = Vec::new();
            let batch = 8usize;
            'outer: for (l, m) in ladder(p.n) {
                let mut idx = 0usize;
                loop {
                    let jobs: Vec<(usize, usize, u64)> =
                        (idx..idx + batch).map(|i| (l, m, derive_seed(seed, l, m, i))).collect();
                    idx += batch;
                    let rows = batch_rows(p, &jobs, exec, false)?;
                    let mut grew = false;
                    for (job, (a, _)) in jobs.iter().zip(rows) {
                        let row: SparseRow = crate::linalg::sparse_from_dense(&a);
                        if arank.insert(&row).is_some() {
                            keep.push(*job);
                            grew = true;
                        }
                        if arank.rank() == dim_v {
                            break 'outer;
                        }
                    }
                    if !grew {
                        break;
                    }
                }
            }
            if arank.rank() < dim_v {
                return Err(Error::RankDeficient { rank: arank.rank(), expected: dim_v });
            }
            // extra equations deliberately include Bethe roots
            let rungs = check_rungs(p.n);
            let extra: Vec<(usize, usize, u64)> = (0..checks + nh)
                .map(|i| {
                    let (l, m) = rungs[i % rungs.len()];
                    (l, m, derive_seed(seed ^ 0xC0FF_EE00, l, m, i))
                })
                .collect();
            let mut jobs = keep.clone();
            jobs.extend_from_slice(&extra);
            for j in &jobs {
                *used.entry((j.0, j.1)).or_default() += 1;
            }
            let rows = batch_rows(p, &jobs, exec, true)?;
            for (i, (a, b)) in rows.into_iter().enumerate() {
                if i < keep.len() + checks {
                    sys.insert(&a, &b.unwrap());
                } else {
                    holdout.push((a, b.unwrap()));
                }
            }
        }
    }
    let x = if sys.rank_a() == dim_v { sys.extract_x()? } else { Vec::new() };
    let failures = if x.is_empty() { holdout.len() } else { holdout.iter().filter(|(a, b)| !holds(&x, a, b)).count() };
    let report = ConsistencyReport {
        n: p.n,
        equations: sys.equations,
        rank_a: sys.rank_a(),
        dim_v,
        residual_zero_rows: sys.zero_rows,
        inconsistent_rows: sys.bad_rows,
        holdout_rows: holdout.len(),
        holdout_failures: failures,
        schedule: used.into_iter().map(|((l, m), c)| (l, m, c)).collect(),
    };
    if sys.bad_rows > 0 {
        return Err(Error::Inconsistent { row: sys.bad_rows });
    }
    if sys.rank_a() < dim_v {
        return Err(Error::RankDeficient { rank: sys.rank_a(), expected: dim_v });
    }
    let gram = p.basis.iter().map(|o| o.trace_pair(o)).collect();
    Ok(XTables { n: p.n, x, gram, report })
}

impl XTables {
    pub fn to_text(&self) -> String {
        let mut s = String::from("x_tables 1\n");
        writeln!(s, "{} {} {}", self.n, self.x.len(), self.gram.len()).unwrap();
        writeln!(s, "{}", self.gram.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
        for r in &self.x {
            writeln!(s, "{}", sparse_text(r)).unwrap();
        }
        for l in self.report.to_string().lines() {
            writeln!(s, "# {l}").unwrap();
        }
        s
    }
}

fn sparse_text(r: &SparseRow) -> String {
    r.iter().map(|(c, v)| format!("{c}:{v}")).collect::<Vec<_>>().join(" ")
}

fn parse_sparse(l: &str) -> Result<SparseRow> {
    l.split_whitespace()
        .map(|t| {
            let (c, v) = t.split_once(':').ok_or_else(|| Error::Parse(format!("sparse entry {t:?}")))?;
            Ok((
                c.parse().map_err(|_| Error::Parse(format!("column {c:?}")))?,
                v.parse().map_err(|_| Error::Parse(format!("rational {v:?}")))?,
            ))
        })
        .collect()
}

/// Word functionals: `⟨w⟩ = Σ_{IJ} D_{IJ}(w) ω_{I,J}` for every irreducible
/// word `w` on `n` sites, valid for sl₂-invariant states.
#[derive(Clone, Debug, PartialEq)]
pub struct DTable {
    pub n: usize,
    pub pairs: Vec<IndexPair>,
    pub words: BTreeMap<TensorWord, SparseRow>,
}

impl DTable {
    pub fn build(p: &Problem, x: &XTables) -> DTable {
        // Z[a] over pairs: Σ_α X[α][a] F[α] / g_a
        let nb = p.basis.len();
        let mut z: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); nb];
        for (alpha, row) in x.x.iter().enumerate() {
            for (a, xa) in row {
                for (ij, f) in &p.fermions.f[alpha] {
                    *z[*a].entry(*ij).or_default() += Rational::from(xa * f);
                }
            }
        }
        let mut words: BTreeMap<TensorWord, BTreeMap<usize, Rational>> = BTreeMap::new();
        for (a, o) in p.basis.iter().enumerate() {
            let za: Vec<(usize, Rational)> =
                z[a].iter().filter(|(_, v)| **v != 0).map(|(k, v)| (*k, Rational::from(v / &x.gram[a]))).collect();
            for (w, c) in &o.coeffs {
                // Tr(O_a · partner(w)) picks c with weight 2^{#𝟙+#σ³}
                let f = Rational::from(c << w.trace_weight());
                let acc = words.entry(w.partner()).or_default();
                for (k, v) in &za {
                    *acc.entry(*k).or_default() += Rational::from(v * &f);
                }
            }
        }
        let words = words
            .into_iter()
            .map(|(w, m)| (w, m.into_iter().filter(|(_, v)| *v != 0).collect::<SparseRow>()))
            .collect();
        DTable { n: p.n, pairs: p.fermions.pairs.clone(), words }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("d_table 1\n");
        writeln!(s, "{} {} {}", self.n, self.pairs.len(), self.words.len()).unwrap();
        for p in &self.pairs {
            let join = |v: Vec<usize>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(s, "{} | {}", join(p.i_list()), join(p.j_list())).unwrap();
        }
        for (w, r) in &self.words {
            writeln!(s, "{w} {}", sparse_text(r)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("d table: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("d_table 1") {
            return Err(bad("missing header"));
        }
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("dimensions"))?
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| bad("dimension")))
            .collect::<Result<_>>()?;
        let [n, np, nw] = dims[..] else { return Err(bad("dimension line")) };
        let mut pairs = Vec::with_capacity(np);
        for _ in 0..np {
            let l = lines.next().ok_or_else(|| bad("truncated pairs"))?;
            let (a, b) = l.split_once('|').ok_or_else(|| bad("pair"))?;
            let parse = |s: &str| -> Result<Vec<usize>> { s.split_whitespace().map(|x| x.parse().map_err(|_| bad("index"))).collect() };
            pairs.push(IndexPair::from_lists(&parse(a)?, &parse(b)?));
        }
        let mut words = BTreeMap::new();
        for _ in 0..nw {
            let l = lines.next().ok_or_else(|| bad("truncated words"))?;
            let (w, rest) = l.split_once(' ').unwrap_or((l, ""));
            words.insert(w.parse()?, parse_sparse(rest)?);
        }
        Ok(DTable { n, pairs, words })
    }

    /// `⟨w⟩` from precomputed minors `ω_{I,J}` (same pair order).
    pub fn expect<T: crate::linalg::Ring>(&self, w: &TensorWord, minors: &[T], unit: &T) -> T {
        match self.words.get(w) {
            None => unit.zero_like(),
            Some(r) => r.iter().fold(unit.zero_like(), |acc, (k, v)| acc.add(&minors[*k].mul_rational(v))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ() {
        assert_ne!(derive_seed(1, 2, 0, 0), derive_seed(1, 2, 0, 1));
        assert_ne!(derive_seed(1, 2, 0, 0), derive_seed(1, 2, 1, 0));
        assert_eq!(published_schedule().iter().map(|x| x.2).sum::<usize>(), 1307);
    }

    #[test]
    fn two_sites_consistent() {
        let p = Problem::new(2);
        let t = solve_x(&p, &ScheduleMode::default(), 1, Exec::Sequential).unwrap();
        assert!(t.report.passed(), "{}", t.report);
        assert_eq!(t.x.len(), 3);
    }
}
