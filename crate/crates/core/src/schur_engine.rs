//! Schur-basis calculus for the monodromy-matrix actions.
//!
//! A vector of `H_q` is stored in the Fock picture: the partition
//! `λ` with at most `q` parts is the set `{λ_i + q − i}` of occupied
//! fermion levels, kept as a bitmask. Wedging with `ψ*_p` sets a bit,
//! `cut` and `σ_q⁻¹` are shifts, and the Pieri rule moves occupied levels
//! up by one.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matsubara::MatsubaraData;
use crate::poly::{self, Poly};
use rug::Rational;
use std::collections::HashMap;

pub type Mask = u128;
const MAX_LEVEL: u32 = 127;

/// Weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(pub Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Schur(format!("not a partition: {parts:?}")));
        }
        Ok(Partition(parts))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Strictly decreasing levels `k_1 > … > k_q ≥ 0` for a partition in `H_q`.
pub fn partition_to_fock(p: &Partition, q: usize) -> Result<Vec<u32>> {
    if p.len() > q {
        return Err(Error::Schur(format!("partition longer than q = {q}")));
    }
    Ok((0..q).map(|i| p.0.get(i).copied().unwrap_or(0) + (q - 1 - i) as u32).collect())
}

/// Inverse of [`partition_to_fock`]; rejects tuples that are not strictly decreasing.
pub fn fock_to_partition(k: &[u32]) -> Result<Partition> {
    if k.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Schur(format!("levels not strictly decreasing: {k:?}")));
    }
    let q = k.len();
    let parts = k
        .iter()
        .enumerate()
        .map(|(i, &ki)| ki.checked_sub((q - 1 - i) as u32).ok_or_else(|| Error::Schur("negative part".into())))
        .collect::<Result<Vec<u32>>>()?;
    Ok(Partition(parts.into_iter().filter(|&x| x > 0).collect()))
}

fn mask_of(p: &Partition, q: usize) -> Result<Mask> {
    let mut m: Mask = 0;
    for k in partition_to_fock(p, q)? {
        if k > MAX_LEVEL {
            return Err(Error::Schur("Fock level beyond 127".into()));
        }
        m |= 1 << k;
    }
    Ok(m)
}

fn levels(mask: Mask) -> Vec<u32> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let top = 127 - m.leading_zeros();
        out.push(top);
        m &= !(1 << top);
    }
    out
}

fn partition_of(mask: Mask) -> Partition {
    let k = levels(mask);
    let q = k.len();
    Partition(k.iter().enumerate().map(|(i, &ki)| ki - (q - 1 - i) as u32).filter(|&x| x > 0).collect())
}

/// Finite rational combination of Schur polynomials in `q` variables.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SchurVector {
    q: usize,
    terms: HashMap<Mask, Rational>,
}

impl SchurVector {
    pub fn zero(q: usize) -> Self {
        SchurVector { q, terms: HashMap::new() }
    }

    /// The empty diagram with coefficient 1.
    pub fn vacuum(q: usize) -> Self {
        let mut v = Self::zero(q);
        v.terms.insert((1u128 << q) - 1, Rational::from(1));
        v
    }

    pub fn from_terms<I: IntoIterator<Item = (Partition, Rational)>>(q: usize, terms: I) -> Result<Self> {
        let mut v = Self::zero(q);
        for (p, c) in terms {
            let m = mask_of(&p, q)?;
            v.add_mask(m, c);
        }
        Ok(v)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms sorted by partition, for deterministic output.
    pub fn terms(&self) -> Vec<(Partition, Rational)> {
        let mut v: Vec<(Partition, Rational)> = self.terms.iter().map(|(m, c)| (partition_of(*m), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn coeff(&self, p: &Partition) -> Rational {
        mask_of(p, self.q).ok().and_then(|m| self.terms.get(&m).cloned()).unwrap_or_default()
    }

    /// Largest occupied Fock level, a measure of polynomial degree.
    pub fn max_level(&self) -> u32 {
        self.terms.keys().map(|m| 127 - m.leading_zeros()).max().unwrap_or(0)
    }

    fn add_mask(&mut self, m: Mask, c: Rational) {
        if c == 0 {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &SchurVector) {
        assert_eq!(self.q, other.q, "adding vectors of different H_q");
        for (m, c) in &other.terms {
            self.add_mask(*m, c.clone());
        }
    }

    pub fn scale(&self, s: &Rational) -> SchurVector {
        if *s == 0 {
            return Self::zero(self.q);
        }
        SchurVector { q: self.q, terms: self.terms.iter().map(|(m, c)| (*m, Rational::from(c * s))).collect() }
    }
}

/// `σ_j ∘ Y`: multiplication by the elementary symmetric polynomial `e_j`.
pub fn pieri(j: usize, y: &SchurVector) -> Result<SchurVector> {
    let mut out = SchurVector::zero(y.q);
    if j > y.q {
        return Ok(out);
    }
    if j == 0 {
        return Ok(y.clone());
    }
    for (&mask, c) in &y.terms {
        let k = levels(mask);
        if k[0] + 1 > MAX_LEVEL && j > 0 {
            return Err(Error::Schur("Fock level beyond 127".into()));
        }
        pieri_rec(&k, 0, j, false, mask, c, &mut out);
    }
    Ok(out)
}

fn pieri_rec(k: &[u32], i: usize, left: usize, prev_moved: bool, mask: Mask, c: &Rational, out: &mut SchurVector) {
    if left == 0 {
        out.add_mask(mask, c.clone());
        return;
    }
    if k.len() - i < left {
        return;
    }
    // move level k[i] up by one: allowed if the level above is free or was itself moved
    let blocked = i > 0 && k[i - 1] == k[i] + 1 && !prev_moved;
    if !blocked {
        let m = (mask & !(1 << k[i])) | (1 << (k[i] + 1));
        pieri_rec(k, i + 1, left - 1, true, m, c, out);
    }
    pieri_rec(k, i + 1, left, false, mask, c, out);
}

fn wedge_level(p: u32, mask: Mask) -> Option<(Mask, bool)> {
    if p > MAX_LEVEL || mask & (1 << p) != 0 {
        return None;
    }
    let above = if p >= 127 { 0 } else { (mask >> (p + 1)).count_ones() };
    Some((mask | (1 << p), above % 2 == 1))
}

/// `P ∧ Y`: multiply by `Σ p_j ψ*_j`, raising `q` by one.
pub fn wedge1(p: &[Rational], y: &SchurVector) -> Result<SchurVector> {
    if p.len() as u32 > MAX_LEVEL + 1 && p[MAX_LEVEL as usize + 1..].iter().any(|c| *c != 0) {
        return Err(Error::Schur("polynomial degree beyond 127".into()));
    }
    let mut out = SchurVector::zero(y.q + 1);
    for (&mask, c) in &y.terms {
        for (lvl, pc) in p.iter().enumerate() {
            if *pc == 0 {
                continue;
            }
            if let Some((m, neg)) = wedge_level(lvl as u32, mask) {
                let v = Rational::from(pc * c);
                out.add_mask(m, if neg { -v } else { v });
            }
        }
    }
    Ok(out)
}

/// Two-variable polynomial, `r[i][j]` multiplying `x^i y^j`.
pub type TwoPoly = Vec<Vec<Rational>>;

/// `R ∧ Y`: multiply by `Σ R_{ij} ψ*_i ψ*_j` (so `ψ*_j` acts first), raising `q` by two.
pub fn wedge2(r: &TwoPoly, y: &SchurVector) -> Result<SchurVector> {
    let mut out = SchurVector::zero(y.q + 2);
    for (&mask, c) in &y.terms {
        for (i, row) in r.iter().enumerate() {
            for (j, rc) in row.iter().enumerate() {
                if *rc == 0 {
                    continue;
                }
                let Some((m1, s1)) = wedge_level(j as u32, mask) else { continue };
                let Some((m2, s2)) = wedge_level(i as u32, m1) else { continue };
                let v = Rational::from(rc * c);
                out.add_mask(m2, if s1 ^ s2 { -v } else { v });
            }
        }
    }
    Ok(out)
}

/// Drop diagrams longer than `q` and view the rest in `H_q`.
pub fn cut(q: usize, y: &SchurVector) -> SchurVector {
    if q >= y.q {
        let mut v = y.clone();
        if q > y.q {
            let s = q - y.q;
            let low: Mask = (1 << s) - 1;
            v = SchurVector { q, terms: y.terms.iter().map(|(m, c)| ((m << s) | low, c.clone())).collect() };
        }
        return v;
    }
    let s = y.q - q;
    let low: Mask = (1 << s) - 1;
    SchurVector { q, terms: y.terms.iter().filter(|(m, _)| *m & low == low).map(|(m, c)| (m >> s, c.clone())).collect() }
}

/// `σ_q⁻¹`: remove the first column; every diagram must have length exactly `q`.
pub fn sigma_inv(y: &SchurVector) -> Result<SchurVector> {
    let mut out = SchurVector::zero(y.q);
    for (&m, c) in &y.terms {
        if m & 1 != 0 {
            return Err(Error::Schur(format!("diagram {:?} shorter than q = {}", partition_of(m).0, y.q)));
        }
        out.add_mask(m >> 1, c.clone());
    }
    Ok(out)
}

/// `Σ c_λ s_λ(points)` through the bialternant formula.
pub fn eval_schur(y: &SchurVector, points: &[Rational]) -> Result<Rational> {
    let q = y.q;
    if points.len() != q {
        return Err(Error::Schur(format!("need {q} points, got {}", points.len())));
    }
    for i in 0..q {
        if points[..i].contains(&points[i]) {
            return Err(Error::Schur("repeated evaluation point".into()));
        }
    }
    if q == 0 {
        return Ok(y.terms.get(&0).cloned().unwrap_or_default());
    }
    let top = y.max_level().max(q as u32) as usize;
    let powers: Vec<Vec<Rational>> = points
        .iter()
        .map(|x| {
            let mut v = Vec::with_capacity(top + 1);
            let mut p = Rational::from(1);
            for _ in 0..=top {
                v.push(p.clone());
                p *= x;
            }
            v
        })
        .collect();
    let det_for = |k: &[u32]| -> Rational {
        let m: Vec<Vec<Rational>> = k.iter().map(|&e| powers.iter().map(|pw| pw[e as usize].clone()).collect()).collect();
        linalg::det(&m)
    };
    let vandermonde: Vec<u32> = (0..q as u32).rev().collect();
    let den = det_for(&vandermonde);
    let mut tot = Rational::new();
    for (&mask, c) in &y.terms {
        tot += Rational::from(c * det_for(&levels(mask)));
    }
    Ok(tot / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    C,
    D,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::B => 'B',
            Letter::C => 'C',
            Letter::D => 'D',
        }
    }

    /// Change of the variable count `q`.
    pub fn dq(self) -> i32 {
        match self {
            Letter::B => 1,
            Letter::C => -1,
            _ => 0,
        }
    }
}

fn signed(p: Poly, neg: bool) -> Poly {
    if neg {
        p.into_iter().map(|c| -c).collect()
    } else {
        p
    }
}

fn act_diag(base: &Poly, shift: i64, y: &SchurVector) -> Result<SchurVector> {
    let q = y.q;
    let lin = poly::linear(Rational::from(shift));
    let mut tot = SchurVector::zero(q + 1);
    for k in 1..=q + 1 {
        let pk = signed(poly::mul(&poly::pow(&lin, q + 1 - k), base), (k - 1) % 2 == 1);
        let w = wedge1(&pk, y)?;
        tot.add_assign(&pieri(k - 1, &w)?);
    }
    Ok(cut(q, &tot))
}

fn act_b(md: &MatsubaraData, y: &SchurVector) -> Result<SchurVector> {
    let q = y.q + 1;
    let zero = Rational::new();
    let a0 = md.a(&zero);
    let d0 = md.d(&zero);
    let a = md.a_poly();
    let d = md.d_poly();
    let xp1 = poly::linear(1);
    let one_minus_x = vec![Rational::from(1), Rational::from(-1)];
    let xm1 = poly::linear(-1);
    let yq2 = if q >= 2 { Some(pieri(q - 2, &cut(q - 2, y))?) } else { None };
    let mut tot = SchurVector::zero(q);
    for p in 0..=q {
        let ap = poly::mul(a, &poly::pow(&xp1, q - p));
        let dp = poly::mul(d, &poly::pow(&one_minus_x, q - p));
        let mut inner_p = SchurVector::zero(q);
        for r in 0..q {
            let mut pr: Poly = vec![Rational::new()];
            for s in r..q {
                let xs = poly::pow(&poly::linear(0), s - r);
                let t1 = signed(poly::scale(&poly::mul(&ap, &xs), &d0), (p + s) % 2 == 1);
                let t2 = poly::scale(&poly::mul(&dp, &xs), &a0);
                pr = poly::sub(&poly::add(&pr, &t1), &t2);
            }
            let pr = signed(pr, r % 2 == 1);
            let mut inner = wedge1(&pr, y)?;
            if let Some(yq2) = &yq2 {
                // R_{p,r}(x,y) = −(−1)^{p+r} d(x) a(y) (y+1)^{q−p} Σ_s (x−1)^{q−1−s} y^{s−r}
                let mut rpoly: TwoPoly = Vec::new();
                for s in r..q {
                    let xpart = poly::mul(d, &poly::pow(&xm1, q - 1 - s));
                    let ypart = poly::mul(&ap, &poly::pow(&poly::linear(0), s - r));
                    if rpoly.len() < xpart.len() {
                        rpoly.resize(xpart.len(), Vec::new());
                    }
                    for (i, xc) in xpart.iter().enumerate() {
                        if *xc == 0 {
                            continue;
                        }
                        let row = &mut rpoly[i];
                        if row.len() < ypart.len() {
                            row.resize(ypart.len(), Rational::new());
                        }
                        for (j, yc) in ypart.iter().enumerate() {
                            row[j] += Rational::from(xc * yc);
                        }
                    }
                }
                let neg = (p + r) % 2 == 0;
                let rpoly: TwoPoly = rpoly.into_iter().map(|row| signed(row, neg)).collect();
                inner.add_assign(&wedge2(&rpoly, yq2)?);
            }
            inner_p.add_assign(&pieri(r, &inner)?);
        }
        tot.add_assign(&pieri(p, &inner_p)?);
    }
    Ok(cut(q, &sigma_inv(&tot)?))
}

/// Action of `A(0)`, `B(0)`, `C(0)` or `D(0)` on the Schur image of `⟨Φ|μ⟩`.
pub fn act_letter(letter: Letter, md: &MatsubaraData, y: &SchurVector) -> Result<SchurVector> {
    match letter {
        Letter::A => act_diag(md.a_poly(), 1, y),
        Letter::D => act_diag(md.d_poly(), -1, y),
        Letter::C => {
            if y.q == 0 {
                return Err(Error::Schur("C applied in H_0".into()));
            }
            Ok(cut(y.q - 1, y))
        }
        Letter::B => act_b(md, y),
    }
}

/// The Slavnov polynomial `N(μ_1..μ_m)` as a vector of `H_m`.
pub fn slavnov_vector(md: &MatsubaraData) -> Result<SchurVector> {
    let m = md.m();
    let beta = md.roots();
    let q1 = poly::shift(md.q_poly(), &Rational::from(1));
    let qm1 = poly::shift(md.q_poly(), &Rational::from(-1));
    let mut y = SchurVector::vacuum(0);
    for j in (0..m).rev() {
        let b = &beta[j];
        let t1 = poly::mul(md.a_poly(), &poly::div_linear(&q1, &Rational::from(b - 1u32)).expect("root of Q(x+1)"));
        let t2 = poly::mul(md.d_poly(), &poly::div_linear(&qm1, &Rational::from(b + 1u32)).expect("root of Q(x-1)"));
        let pj = poly::div_linear(&poly::sub(&t1, &t2), b)
            .ok_or_else(|| Error::Inadmissible("Bethe equation fails in the Slavnov numerator".into()))?;
        y = wedge1(&pj, &y)?;
    }
    let mut pref = Rational::from(if (m * (m.saturating_sub(1)) / 2) % 2 == 0 { 1 } else { -1 });
    for b in beta {
        pref *= md.d(b);
    }
    for i in 0..m {
        for j in i + 1..m {
            pref /= Rational::from(&beta[i] - &beta[j]);
        }
    }
    Ok(y.scale(&pref))
}

/// Gaudin norm of the on-shell Bethe vector.
pub fn gaudin_norm(md: &MatsubaraData) -> Rational {
    md.gaudin_raw()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matsubara::generate_md;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn part(v: &[u32]) -> Partition {
        Partition(v.to_vec())
    }

    #[test]
    fn fock_examples() {
        assert_eq!(fock_to_partition(&[3, 1, 0]).unwrap(), part(&[1]));
        assert_eq!(partition_to_fock(&part(&[]), 2).unwrap(), vec![1, 0]);
        assert!(fock_to_partition(&[1, 1]).is_err());
        for qq in 0..=4usize {
            for a in 0..=4u32 {
                for b in 0..=a {
                    for c in 0..=b {
                        let p = Partition([a, b, c].iter().copied().filter(|&x| x > 0).collect());
                        if p.len() > qq {
                            continue;
                        }
                        let k = partition_to_fock(&p, qq).unwrap();
                        assert_eq!(fock_to_partition(&k).unwrap(), p);
                    }
                }
            }
        }
    }

    #[test]
    fn pieri_examples() {
        let y = SchurVector::from_terms(2, [(part(&[1]), q(1))]).unwrap();
        let r = pieri(1, &y).unwrap();
        assert_eq!(r.terms(), vec![(part(&[1, 1]), q(1)), (part(&[2]), q(1))]);
        let e = pieri(2, &SchurVector::vacuum(2)).unwrap();
        assert_eq!(e.terms(), vec![(part(&[1, 1]), q(1))]);
        assert_eq!(pieri(0, &y).unwrap(), y);
    }

    #[test]
    fn wedge_examples() {
        let w = wedge1(&[q(1)], &SchurVector::vacuum(0)).unwrap();
        assert_eq!(w, SchurVector::vacuum(1));
        let w = wedge1(&[q(0), q(0), q(1)], &SchurVector::vacuum(1)).unwrap();
        assert_eq!(w.terms(), vec![(part(&[1]), q(1))]);
        let r: TwoPoly = vec![vec![q(0), q(0)], vec![q(0), q(1)]];
        assert!(wedge2(&r, &SchurVector::vacuum(0)).unwrap().is_zero());
    }

    #[test]
    fn cut_examples() {
        let y = SchurVector::from_terms(2, [(part(&[2]), q(1)), (part(&[1, 1]), q(1))]).unwrap();
        assert_eq!(cut(1, &y).terms(), vec![(part(&[2]), q(1))]);
        assert_eq!(cut(2, &y), y);
        assert!(cut(0, &y).is_zero());
    }

    #[test]
    fn eval_examples() {
        let s2 = SchurVector::from_terms(1, [(part(&[2]), q(1))]).unwrap();
        assert_eq!(eval_schur(&s2, &[q(3)]).unwrap(), 9);
        let s11 = SchurVector::from_terms(2, [(part(&[1, 1]), q(1))]).unwrap();
        assert_eq!(eval_schur(&s11, &[q(2), q(5)]).unwrap(), 10);
        let s21 = SchurVector::from_terms(2, [(part(&[2, 1]), q(1))]).unwrap();
        assert_eq!(eval_schur(&s21, &[q(1), q(2)]).unwrap(), 6);
    }

    #[test]
    fn slavnov_at_roots_is_gaudin() {
        for seed in 0..10 {
            for (l, m) in [(2, 1), (3, 1), (4, 2), (5, 2)] {
                let md = generate_md(l, m, seed, 9).unwrap();
                let n = slavnov_vector(&md).unwrap();
                assert_eq!(eval_schur(&n, md.roots()).unwrap(), gaudin_norm(&md));
            }
        }
    }

    #[test]
    fn vacuum_actions() {
        let md = generate_md(3, 0, 5, 9).unwrap();
        let v = SchurVector::vacuum(0);
        let a = act_letter(Letter::A, &md, &v).unwrap();
        let d = act_letter(Letter::D, &md, &v).unwrap();
        assert_eq!(a.terms(), vec![(part(&[]), md.a(&q(0)))]);
        assert_eq!(d.terms(), vec![(part(&[]), md.d(&q(0)))]);
    }
}
