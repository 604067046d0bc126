//! The space `H⁽ⁿ⁾` of fermionic monomials `b*_I c*_J`, the subspace `V⁽ⁿ⁾`
//! cut out by the `Q_m`/`M` conditions, and fermionic expectation values.

use crate::error::{Error, Result};
use crate::linalg::{det_ring, Ring, Rref, SparseRow};
use crate::exec::Exec;
use rug::Rational;
use std::collections::HashMap;
use std::fmt::Write as _;

/// Multi-indices `I`, `J` stored as bitmasks over `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair {
    pub i: u32,
    pub j: u32,
}

fn bits(m: u32) -> Vec<usize> {
    (0..32).filter(|b| m & (1 << b) != 0).collect()
}

impl IndexPair {
    pub fn from_lists(i: &[usize], j: &[usize]) -> Self {
        IndexPair { i: i.iter().map(|x| 1u32 << x).sum(), j: j.iter().map(|x| 1u32 << x).sum() }
    }

    pub fn i_list(&self) -> Vec<usize> {
        bits(self.i)
    }

    pub fn j_list(&self) -> Vec<usize> {
        bits(self.j)
    }

    pub fn size(&self) -> usize {
        self.i.count_ones() as usize
    }

    /// Membership in `H⁽ⁿ⁾`: equal sizes, even index sum and `I ≼ J`.
    pub fn is_admissible(&self) -> bool {
        let (a, b) = (self.i_list(), self.j_list());
        a.len() == b.len()
            && (a.iter().sum::<usize>() + b.iter().sum::<usize>()) % 2 == 0
            && a.iter().zip(&b).all(|(x, y)| x <= y)
    }
}

fn subsets(n: usize, k: usize) -> Vec<u32> {
    // increasing lexicographic order of the sorted index lists
    fn rec(start: usize, n: usize, k: usize, cur: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for x in start..=n {
            if n + 1 - x < k {
                break;
            }
            rec(x + 1, n, k - 1, cur | (1 << x), out);
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, 0, &mut out);
    out
}

/// Basis of `H⁽ⁿ⁾`, ordered by size, then `I`, then `J`.
pub fn enumerate_h(n: usize) -> Vec<IndexPair> {
    let mut out = Vec::new();
    for k in 0..=n / 2 {
        let ss = subsets(n, k);
        for &i in &ss {
            for &j in &ss {
                let p = IndexPair { i, j };
                if p.is_admissible() {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn below(m: u32, x: usize) -> u32 {
    (m & ((1u32 << x) - 1)).count_ones()
}

fn sign(odd: u32) -> i64 {
    if odd % 2 == 0 {
        1
    } else {
        -1
    }
}

// b's precede c's in the normal order; operators act from the left.
fn ann_b(x: usize, s: IndexPair) -> Option<(IndexPair, i64)> {
    if s.i & (1 << x) == 0 {
        return None;
    }
    Some((IndexPair { i: s.i & !(1 << x), j: s.j }, sign(below(s.i, x))))
}

fn ann_c(x: usize, s: IndexPair) -> Option<(IndexPair, i64)> {
    if s.j & (1 << x) == 0 {
        return None;
    }
    Some((IndexPair { i: s.i, j: s.j & !(1 << x) }, sign(s.i.count_ones() + below(s.j, x))))
}

fn cre_c(x: usize, s: IndexPair) -> Option<(IndexPair, i64)> {
    if s.j & (1 << x) != 0 {
        return None;
    }
    Some((IndexPair { i: s.i, j: s.j | (1 << x) }, sign(s.i.count_ones() + below(s.j, x))))
}

type FockVec = HashMap<IndexPair, i64>;

/// `Q_m = Σ_j c_j b_{m−j}` applied to one monomial.
fn apply_q(m: usize, s: IndexPair) -> FockVec {
    let mut out = FockVec::new();
    for j in 1..m {
        if m - j > 31 || j > 31 {
            continue;
        }
        let Some((s2, e1)) = ann_b(m - j, s) else { continue };
        let Some((s3, e2)) = ann_c(j, s2) else { continue };
        *out.entry(s3).or_default() += e1 * e2;
    }
    out.retain(|_, v| *v != 0);
    out
}

/// `M = Σ_i c*_i b_i` applied to one monomial.
fn apply_m(n: usize, s: IndexPair) -> FockVec {
    let mut out = FockVec::new();
    for x in 1..=n {
        let Some((s2, e1)) = ann_b(x, s) else { continue };
        let Some((s3, e2)) = cre_c(x, s2) else { continue };
        *out.entry(s3).or_default() += e1 * e2;
    }
    out.retain(|_, v| *v != 0);
    out
}

fn to_row(v: &FockVec, index: &HashMap<IndexPair, usize>) -> SparseRow {
    let mut r: SparseRow = v.iter().map(|(s, c)| (index[s], Rational::from(*c))).collect();
    r.sort_by_key(|x| x.0);
    r
}

/// `H⁽ⁿ⁾` with the rows `v_α` of `F` spanning `V⁽ⁿ⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionBasis {
    pub n: usize,
    pub pairs: Vec<IndexPair>,
    pub f: Vec<SparseRow>,
}

impl FermionBasis {
    pub fn dim_h(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim_v(&self) -> usize {
        self.f.len()
    }

    /// Whether `Q_m v` lies in the image of `M`.
    pub fn q_residual(&self, m: usize, v: &SparseRow) -> bool {
        let n = self.n;
        for k in 1..=n / 2 {
            let (tindex, img) = quotient(n, k);
            let mut row: HashMap<usize, Rational> = HashMap::new();
            for (col, c) in v {
                let s = self.pairs[*col];
                if s.size() != k {
                    continue;
                }
                for (t, e) in apply_q(m, s) {
                    *row.entry(tindex[&t]).or_default() += Rational::from(c * e);
                }
            }
            let mut r: SparseRow = row.into_iter().filter(|(_, c)| *c != 0).collect();
            r.sort_by_key(|x| x.0);
            if !img.reduce(&r).is_empty() {
                return false;
            }
        }
        true
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("fermion_basis 1\n");
        writeln!(s, "{} {} {}", self.n, self.dim_h(), self.dim_v()).unwrap();
        for p in &self.pairs {
            let join = |v: Vec<usize>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(s, "{} | {}", join(p.i_list()), join(p.j_list())).unwrap();
        }
        for r in &self.f {
            let terms: Vec<String> = r.iter().map(|(c, v)| format!("{c}:{v}")).collect();
            writeln!(s, "{}", terms.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("fermion basis: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("fermion_basis 1") {
            return Err(bad("missing header"));
        }
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing dimensions"))?
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| bad("dimension")))
            .collect::<Result<_>>()?;
        let [n, dh, dv] = dims[..] else { return Err(bad("dimension line")) };
        let mut pairs = Vec::with_capacity(dh);
        for _ in 0..dh {
            let l = lines.next().ok_or_else(|| bad("truncated pair list"))?;
            let (a, b) = l.split_once('|').ok_or_else(|| bad("pair separator"))?;
            let parse = |s: &str| -> Result<Vec<usize>> {
                s.split_whitespace().map(|x| x.parse().map_err(|_| bad("index"))).collect()
            };
            pairs.push(IndexPair::from_lists(&parse(a)?, &parse(b)?));
        }
        let mut f = Vec::with_capacity(dv);
        for _ in 0..dv {
            let l = lines.next().ok_or_else(|| bad("truncated F"))?;
            let row = l
                .split_whitespace()
                .map(|t| {
                    let (c, v) = t.split_once(':').ok_or_else(|| bad("entry"))?;
                    Ok((c.parse().map_err(|_| bad("column"))?, v.parse().map_err(|_| bad("rational"))?))
                })
                .collect::<Result<SparseRow>>()?;
            f.push(row);
        }
        Ok(FermionBasis { n, pairs, f })
    }
}

/// Index of the charge-`(k−1)` target space and the reduced image of `M`
/// from charge `(k, k−2)`.
fn quotient(n: usize, k: usize) -> (HashMap<IndexPair, usize>, Rref) {
    let tgt: Vec<IndexPair> = subsets(n, k - 1)
        .iter()
        .flat_map(|&i| subsets(n, k - 1).into_iter().map(move |j| IndexPair { i, j }))
        .collect();
    let tindex: HashMap<IndexPair, usize> = tgt.iter().enumerate().map(|(a, p)| (*p, a)).collect();
    let mut img = Rref::new(tgt.len());
    if k >= 2 {
        for &i in &subsets(n, k) {
            for &j in &subsets(n, k - 2) {
                img.insert(&to_row(&apply_m(n, IndexPair { i, j }), &tindex));
            }
        }
    }
    (tindex, img)
}

/// `V⁽ⁿ⁾ = {v ∈ H⁽ⁿ⁾ : Q_m v ∈ M H̃ for n < m < 2n}`; rows of `F` are the
/// canonical null-space vectors of the stacked constraints.
pub fn compute_v(n: usize) -> FermionBasis {
    let pairs = enumerate_h(n);
    let mut cons = Rref::new(pairs.len());
    for k in 1..=n / 2 {
        let (tindex, img) = quotient(n, k);
        let free: Vec<usize> = (0..tindex.len()).filter(|c| img.row_for_pivot(*c).is_none()).collect();
        let free_pos: HashMap<usize, usize> = free.iter().enumerate().map(|(a, c)| (*c, a)).collect();
        for m in n + 1..2 * n {
            let mut by_coord: Vec<SparseRow> = vec![Vec::new(); free.len()];
            for (hi, s) in pairs.iter().enumerate() {
                if s.size() != k {
                    continue;
                }
                let red = img.reduce(&to_row(&apply_q(m, *s), &tindex));
                for (c, v) in red {
                    by_coord[free_pos[&c]].push((hi, v));
                }
            }
            for r in by_coord.into_iter().filter(|r| !r.is_empty()) {
                cons.insert(&r);
            }
        }
    }
    FermionBasis { n, pairs, f: cons.nullspace() }
}

/// `ω_{I,J} = det ‖ω_{i_p, j_q}‖` with 1-based indices into `omega`.
pub fn omega_minor<T: Ring>(omega: &[Vec<T>], pair: &IndexPair, unit: &T) -> Result<T> {
    let (is, js) = (pair.i_list(), pair.j_list());
    let order = omega.len();
    if is.iter().chain(&js).any(|&x| x == 0 || x > order) {
        return Err(Error::Inadmissible(format!("index beyond ω order {order}")));
    }
    let sub: Vec<Vec<T>> = is.iter().map(|&a| js.iter().map(|&b| omega[a - 1][b - 1].clone()).collect()).collect();
    Ok(det_ring(&sub, unit))
}

/// All minors `ω_{I,J}` for the pairs of `H⁽ⁿ⁾`.
pub fn minors<T: Ring + Send + Sync>(basis: &FermionBasis, omega: &[Vec<T>], unit: &T, exec: Exec) -> Result<Vec<T>> {
    exec.map(&basis.pairs, |p| omega_minor(omega, p, unit)).into_iter().collect()
}

/// `⟨v_α⟩ = Σ F_{α,IJ} ω_{I,J}`.
pub fn expect_fermionic<T: Ring>(basis: &FermionBasis, minors: &[T], unit: &T) -> Vec<T> {
    basis
        .f
        .iter()
        .map(|row| row.iter().fold(unit.zero_like(), |acc, (c, f)| acc.add(&minors[*c].mul_rational(f))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let h: Vec<usize> = (1..=7).map(|n| enumerate_h(n).len()).collect();
        assert_eq!(h, vec![1, 3, 5, 19, 38, 162, 375]);
        let v: Vec<usize> = (1..=6).map(|n| compute_v(n).dim_v()).collect();
        assert_eq!(v, vec![1, 3, 4, 8, 14, 33]);
    }

    /// Ballot count: `I ≼ J` iff every prefix `1..=t` holds at least as many
    /// entries of `I` as of `J`. Sweeps sites keeping `(#I, #J, parity)`.
    fn ballot_count(n: usize) -> usize {
        let k = n / 2;
        let mut dp = vec![vec![[0usize; 2]; k + 1]; k + 1];
        dp[0][0][0] = 1;
        for t in 1..=n {
            let mut next = vec![vec![[0usize; 2]; k + 1]; k + 1];
            for a in 0..=k {
                for b in 0..=a {
                    for p in 0..2 {
                        let c = dp[a][b][p];
                        if c == 0 {
                            continue;
                        }
                        for (da, db) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                            let (a2, b2) = (a + da, b + db);
                            if a2 <= k && b2 <= a2 {
                                next[a2][b2][(p + (da + db) * t) % 2] += c;
                            }
                        }
                    }
                }
            }
            dp = next;
        }
        (0..=k).map(|a| dp[a][a][0]).sum()
    }

    #[test]
    fn h_dimension_matches_ballot_count() {
        for n in 1..=10 {
            assert_eq!(enumerate_h(n).len(), ballot_count(n), "n = {n}");
        }
        // the stated conditions give 19688 at n = 10, not the quoted 12041
        assert_eq!(ballot_count(10), 19688);
    }

    #[test]
    fn two_site_pairs() {
        let h = enumerate_h(2);
        let want = vec![IndexPair::from_lists(&[], &[]), IndexPair::from_lists(&[1], &[1]), IndexPair::from_lists(&[2], &[2])];
        assert_eq!(h, want);
    }

    #[test]
    fn q_conditions_hold() {
        for n in 2..=5 {
            let b = compute_v(n);
            for v in &b.f {
                for m in n + 1..2 * n {
                    assert!(b.q_residual(m, v));
                }
            }
        }
    }

    #[test]
    fn minors_small() {
        let om: Vec<Vec<Rational>> = (0..3).map(|i| (0..3).map(|j| Rational::from((i * 3 + j + 1) as i64)).collect()).collect();
        let one = Rational::from(1);
        assert_eq!(omega_minor(&om, &IndexPair::from_lists(&[], &[]), &one).unwrap(), 1);
        assert_eq!(omega_minor(&om, &IndexPair::from_lists(&[1], &[2]), &one).unwrap(), 2);
        let m = omega_minor(&om, &IndexPair::from_lists(&[1, 2], &[1, 2]), &one).unwrap();
        assert_eq!(m, Rational::from(1 * 5 - 2 * 4));
        assert!(omega_minor(&om, &IndexPair::from_lists(&[4], &[1]), &one).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let b = compute_v(4);
        assert_eq!(FermionBasis::from_text(&b.to_text()).unwrap(), b);
    }
}
