//! Spin-operator words, the sl₂-invariant basis, translational reduction and
//! direct Matsubara expectation values.

use crate::error::{Error, Result};
use crate::linalg::{Rref, SparseRow};
use crate::matsubara::MatsubaraData;
use crate::schur_engine::{act_letter, eval_schur, gaudin_norm, slavnov_vector, Letter, SchurVector};
use rug::{Integer, Rational};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

/// One-site operator: identity, σ⁺, σ⁻ or σ³.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    I,
    P,
    M,
    Z,
}

impl Spin {
    pub const ALL: [Spin; 4] = [Spin::I, Spin::P, Spin::M, Spin::Z];

    pub fn as_char(self) -> char {
        match self {
            Spin::I => 'i',
            Spin::P => 'p',
            Spin::M => 'm',
            Spin::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Spin> {
        match c {
            'i' => Some(Spin::I),
            'p' => Some(Spin::P),
            'm' => Some(Spin::M),
            'z' => Some(Spin::Z),
            _ => None,
        }
    }

    /// The letter with nonzero trace pairing: σ⁺ ↔ σ⁻.
    pub fn partner(self) -> Spin {
        match self {
            Spin::P => Spin::M,
            Spin::M => Spin::P,
            s => s,
        }
    }

    /// S³ weight in units of one.
    pub fn weight(self) -> i32 {
        match self {
            Spin::P => 1,
            Spin::M => -1,
            _ => 0,
        }
    }

    fn raise(self) -> Option<(Spin, i64)> {
        match self {
            Spin::M => Some((Spin::Z, 1)),
            Spin::Z => Some((Spin::P, -2)),
            _ => None,
        }
    }

    fn lower(self) -> Option<(Spin, i64)> {
        match self {
            Spin::P => Some((Spin::Z, -1)),
            Spin::Z => Some((Spin::M, 2)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TensorWord(pub Vec<Spin>);

impl TensorWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, s: Spin) -> usize {
        self.0.iter().filter(|&&x| x == s).count()
    }

    /// Balanced charge and even number of σ³.
    pub fn is_neutral(&self) -> bool {
        self.count(Spin::P) == self.count(Spin::M) && self.count(Spin::Z) % 2 == 0
    }

    pub fn is_irreducible(&self) -> bool {
        self.is_neutral() && self.0.first() != Some(&Spin::I) && self.0.last() != Some(&Spin::I)
    }

    pub fn partner(&self) -> TensorWord {
        TensorWord(self.0.iter().map(|s| s.partner()).collect())
    }

    /// `Tr(w · partner(w)) = 2^{#𝟙 + #σ³}`.
    pub fn trace_weight(&self) -> u32 {
        (self.count(Spin::I) + self.count(Spin::Z)) as u32
    }

    /// The word with identity padding removed from both ends.
    pub fn core(&self) -> TensorWord {
        let s = self.0.iter().position(|&x| x != Spin::I);
        match s {
            None => TensorWord(Vec::new()),
            Some(s) => {
                let e = self.0.iter().rposition(|&x| x != Spin::I).unwrap();
                TensorWord(self.0[s..=e].to_vec())
            }
        }
    }
}

impl fmt::Display for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for TensorWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Spin::from_char(c).ok_or_else(|| Error::Parse(format!("bad letter {c:?} in word {s:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(TensorWord)
    }
}

/// All irreducible words on `n` sites in lexicographic order over `i < p < m < z`.
pub fn enumerate_irreducible_words(n: usize) -> Vec<TensorWord> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(TensorWord::default());
        return out;
    }
    let mut cur = Vec::with_capacity(n);
    words_rec(n, &mut cur, 0, 0, &mut out);
    out
}

fn words_rec(n: usize, cur: &mut Vec<Spin>, charge: i32, zs: usize, out: &mut Vec<TensorWord>) {
    let t = cur.len();
    if t == n {
        if charge == 0 && zs % 2 == 0 && cur[n - 1] != Spin::I {
            out.push(TensorWord(cur.clone()));
        }
        return;
    }
    if charge.unsigned_abs() as usize > n - t {
        return;
    }
    for s in Spin::ALL {
        if t == 0 && s == Spin::I {
            continue;
        }
        cur.push(s);
        words_rec(n, cur, charge + s.weight(), zs + (s == Spin::Z) as usize, out);
        cur.pop();
    }
}

/// Exact operator: rational combination of words on `n` sites.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct InvariantOperator {
    pub n: usize,
    pub coeffs: BTreeMap<TensorWord, Rational>,
}

impl InvariantOperator {
    pub fn new(n: usize) -> Self {
        InvariantOperator { n, coeffs: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut o = Self::new(n);
        o.add(TensorWord(vec![Spin::I; n]), Rational::from(1));
        o
    }

    pub fn add(&mut self, w: TensorWord, c: Rational) {
        assert_eq!(w.len(), self.n, "word length differs from operator support");
        if c == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(w) {
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

    /// `𝟙^{⊗left} ⊗ self ⊗ 𝟙^{⊗right}`.
    pub fn pad(&self, left: usize, right: usize) -> InvariantOperator {
        let mut o = Self::new(self.n + left + right);
        for (w, c) in &self.coeffs {
            let mut v = vec![Spin::I; left];
            v.extend_from_slice(&w.0);
            v.extend(std::iter::repeat(Spin::I).take(right));
            o.add(TensorWord(v), c.clone());
        }
        o
    }

    /// `Σ_w c_w · ad_{S^±}(w)`; `raise` selects S⁺.
    pub fn adjoint(&self, raise: bool) -> InvariantOperator {
        let mut o = Self::new(self.n);
        for (w, c) in &self.coeffs {
            for pos in 0..w.len() {
                let step = if raise { w.0[pos].raise() } else { w.0[pos].lower() };
                if let Some((s, f)) = step {
                    let mut v = w.clone();
                    v.0[pos] = s;
                    o.add(v, Rational::from(c * f));
                }
            }
        }
        o
    }

    /// Commutator with total S³ vanishes.
    pub fn is_weight_zero(&self) -> bool {
        self.coeffs.keys().all(|w| w.count(Spin::P) == w.count(Spin::M))
    }

    pub fn is_invariant(&self) -> bool {
        self.is_weight_zero() && self.adjoint(true).coeffs.is_empty() && self.adjoint(false).coeffs.is_empty()
    }

    /// Trace pairing `Tr(self · other)`.
    pub fn trace_pair(&self, other: &InvariantOperator) -> Rational {
        let mut t = Rational::new();
        for (w, c) in &self.coeffs {
            if let Some(c2) = other.coeffs.get(&w.partner()) {
                t += Rational::from(c * c2) << w.trace_weight();
            }
        }
        t
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (w, c) in &self.coeffs {
            s.push_str(&format!("{w} {c}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty operator".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("site count: {e}")))?;
        let mut o = Self::new(n);
        for l in lines {
            let mut it = l.split_whitespace();
            let w: TensorWord = it.next().unwrap_or("").parse()?;
            let c: Rational = it
                .next()
                .ok_or_else(|| Error::Parse(format!("missing coefficient: {l}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("coefficient: {e}")))?;
            if w.len() != n {
                return Err(Error::Parse(format!("word {w} has wrong length")));
            }
            o.add(w, c);
        }
        Ok(o)
    }
}

type SpinVector = HashMap<Vec<Spin>, Rational>;

fn sv_add(v: &mut SpinVector, w: Vec<Spin>, c: Rational) {
    if c == 0 {
        return;
    }
    use std::collections::hash_map::Entry;
    match v.entry(w) {
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

fn sv_ladder(v: &SpinVector, raise: bool) -> SpinVector {
    let mut o = SpinVector::new();
    for (w, c) in v {
        for pos in 0..w.len() {
            let step = if raise { w[pos].raise() } else { w[pos].lower() };
            if let Some((s, f)) = step {
                let mut u = w.clone();
                u[pos] = s;
                sv_add(&mut o, u, Rational::from(c * f));
            }
        }
    }
    o
}

fn sv_append(v: &SpinVector, s: Spin) -> SpinVector {
    v.iter()
        .map(|(w, c)| {
            let mut u = w.clone();
            u.push(s);
            (u, c.clone())
        })
        .collect()
}

/// Highest-weight vector of spin `to` in `V_from ⊗ V_1`, given the one of `V_from`.
fn couple(u: &SpinVector, from: i32, to: i32) -> SpinVector {
    let mut cands: Vec<SpinVector> = Vec::new();
    for s in [Spin::P, Spin::Z, Spin::M] {
        let lowerings = from - to + s.weight();
        if lowerings < 0 || lowerings > 2 * from {
            continue;
        }
        let mut x = u.clone();
        for _ in 0..lowerings {
            x = sv_ladder(&x, false);
        }
        cands.push(sv_append(&x, s));
    }
    // S⁺ of the combination must vanish
    let raised: Vec<SpinVector> = cands.iter().map(|c| sv_ladder(c, true)).collect();
    let mut keys: Vec<&Vec<Spin>> = raised.iter().flat_map(|r| r.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut rr = Rref::new(cands.len());
    for k in keys {
        let row: SparseRow =
            raised.iter().enumerate().filter_map(|(i, r)| r.get(k).map(|c| (i, c.clone()))).collect();
        rr.insert(&row);
    }
    let ns = rr.nullspace();
    debug_assert_eq!(ns.len(), 1, "highest-weight vector not unique");
    let mut out = SpinVector::new();
    for (i, c) in &ns[0] {
        for (w, x) in &cands[*i] {
            sv_add(&mut out, w.clone(), Rational::from(c * x));
        }
    }
    out
}

fn primitive(v: SpinVector) -> BTreeMap<Vec<Spin>, Rational> {
    let sorted: BTreeMap<Vec<Spin>, Rational> = v.into_iter().collect();
    let mut den = Integer::from(1);
    let mut num = Integer::new();
    for c in sorted.values() {
        den.lcm_mut(c.denom());
        num.gcd_mut(c.numer());
    }
    let first_neg = sorted.values().next().map(|c| *c < 0).unwrap_or(false);
    let mut f = Rational::from((den, num));
    if first_neg {
        f = -f;
    }
    sorted.into_iter().map(|(w, c)| (w, c * &f)).collect()
}

/// Singlets of `(spin 1)^{⊗k}`, one per coupling path `1 = j_1, j_2, …, j_k = 0`.
pub fn singlets(k: usize) -> Vec<BTreeMap<Vec<Spin>, Rational>> {
    let mut out = Vec::new();
    if k == 0 {
        let mut v = BTreeMap::new();
        v.insert(Vec::new(), Rational::from(1));
        out.push(v);
        return out;
    }
    let mut start = SpinVector::new();
    start.insert(vec![Spin::P], Rational::from(1));
    singlet_rec(k, 1, start, 1, &mut out);
    out
}

fn singlet_rec(k: usize, t: usize, u: SpinVector, j: i32, out: &mut Vec<BTreeMap<Vec<Spin>, Rational>>) {
    if t == k {
        if j == 0 {
            out.push(primitive(u));
        }
        return;
    }
    let left = (k - t) as i32;
    for to in [j - 1, j, j + 1] {
        if to < 0 || to > left - 1 || (j == 0 && to != 1) {
            continue;
        }
        singlet_rec(k, t + 1, couple(&u, j, to), to, out);
    }
}

/// Number of singlets in `(spin 1)^{⊗k}`.
pub fn singlet_count(k: usize) -> u64 {
    if k == 0 {
        return 1;
    }
    // paths over intermediate spin
    let mut ways = vec![0u64; k + 2];
    ways[1] = 1;
    for _ in 1..k {
        let mut next = vec![0u64; k + 2];
        for j in 0..=k {
            if ways[j] == 0 {
                continue;
            }
            if j == 0 {
                next[1] += ways[j];
                continue;
            }
            next[j - 1] += ways[j];
            next[j] += ways[j];
            next[j + 1] += ways[j];
        }
        ways = next;
    }
    ways[0]
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Dimension of the invariant, translationally irreducible space on `n ≥ 2` sites.
pub fn invariant_dimension(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    (2..=n).step_by(2).map(|k| binom(n - 2, k - 2) * singlet_count(k)).sum()
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in pool.iter().enumerate() {
        for mut rest in combinations(&pool[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Invariant basis `O_a` on `n` sites. Each element is an identity pattern
/// (non-identity ends) times a coupled singlet of the adjoint representations
/// on the remaining sites; different elements are orthogonal under the trace
/// pairing.
pub fn invariant_basis(n: usize) -> Vec<InvariantOperator> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let interior: Vec<usize> = (1..n - 1).collect();
    for k in (2..=n).step_by(2) {
        let ss = singlets(k);
        for mid in combinations(&interior, k - 2) {
            let mut sites = vec![0];
            sites.extend(mid);
            sites.push(n - 1);
            for s in &ss {
                let mut o = InvariantOperator::new(n);
                for (letters, c) in s {
                    let mut w = vec![Spin::I; n];
                    for (pos, l) in sites.iter().zip(letters) {
                        w[*pos] = *l;
                    }
                    o.add(TensorWord(w), c.clone());
                }
                out.push(o);
            }
        }
    }
    out
}

/// Reference construction: null space of ad S⁺ on the span of irreducible
/// words, from a dense pivot choice. Used to validate [`invariant_basis`].
pub fn invariant_basis_nullspace(n: usize) -> (Vec<TensorWord>, Vec<SparseRow>) {
    let words = enumerate_irreducible_words(n);
    let mut rows: BTreeMap<TensorWord, SparseRow> = BTreeMap::new();
    for (i, w) in words.iter().enumerate() {
        for pos in 0..n {
            if let Some((s, f)) = w.0[pos].raise() {
                let mut t = w.clone();
                t.0[pos] = s;
                rows.entry(t).or_default().push((i, Rational::from(f)));
            }
        }
    }
    let mut rr = Rref::new(words.len());
    for (_, mut r) in rows {
        r.sort_by_key(|x| x.0);
        let mut merged: SparseRow = Vec::new();
        for (c, v) in r {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|x| x.1 != 0);
        rr.insert(&merged);
    }
    let ns = rr.nullspace();
    (words, ns)
}

/// Components of an operator by length of the identity-stripped support.
/// For a translation-invariant state, `⟨O⟩ = Σ_k ⟨component_k⟩`.
pub fn translational_reduce(o: &InvariantOperator) -> Vec<(usize, InvariantOperator)> {
    let mut parts: BTreeMap<usize, InvariantOperator> = BTreeMap::new();
    for (w, c) in &o.coeffs {
        let core = w.core();
        let k = core.len();
        parts.entry(k).or_insert_with(|| InvariantOperator::new(k)).add(core, c.clone());
    }
    parts.into_iter().filter(|(_, v)| !v.coeffs.is_empty()).collect()
}

/// Monodromy strings of a word with their ±1 coefficients:
/// 𝟙 ↦ A+D, σ³ ↦ A−D, σ⁺ ↦ C, σ⁻ ↦ B.
pub fn word_to_monodromy(w: &TensorWord) -> Vec<(Vec<Letter>, i32)> {
    let mut terms: Vec<(Vec<Letter>, i32)> = vec![(Vec::with_capacity(w.len()), 1)];
    for s in &w.0 {
        let opts: &[(Letter, i32)] = match s {
            Spin::I => &[(Letter::A, 1), (Letter::D, 1)],
            Spin::Z => &[(Letter::A, 1), (Letter::D, -1)],
            Spin::P => &[(Letter::C, 1)],
            Spin::M => &[(Letter::B, 1)],
        };
        let mut next = Vec::with_capacity(terms.len() * opts.len());
        for (str_, c) in &terms {
            for (l, f) in opts {
                let mut v = str_.clone();
                v.push(*l);
                next.push((v, c * f));
            }
        }
        terms = next;
    }
    terms
}

/// Direct evaluation of Matsubara expectation values through the Schur engine.
pub struct DirectEvaluator<'a> {
    md: &'a MatsubaraData,
    root: SchurVector,
    norm: Rational,
    lambda0: Rational,
}

impl<'a> DirectEvaluator<'a> {
    pub fn new(md: &'a MatsubaraData) -> Result<Self> {
        let lambda0 = md.lambda0();
        if lambda0 == 0 {
            return Err(Error::Inadmissible("transfer-matrix eigenvalue vanishes at 0".into()));
        }
        let norm = gaudin_norm(md);
        if norm == 0 {
            return Err(Error::Inadmissible("Gaudin norm vanishes".into()));
        }
        Ok(DirectEvaluator { md, root: slavnov_vector(md)?, norm, lambda0 })
    }

    pub fn lambda0(&self) -> &Rational {
        &self.lambda0
    }

    fn leaf(&self, y: &SchurVector) -> Result<Rational> {
        if y.q() != self.md.m() {
            return Ok(Rational::new());
        }
        Ok(eval_schur(y, self.md.roots())? / &self.norm)
    }

    fn step(&self, y: &SchurVector, l: Letter) -> Result<Option<SchurVector>> {
        if l == Letter::C && y.q() == 0 {
            return Ok(None);
        }
        let r = act_letter(l, self.md, y)?;
        Ok(if r.is_zero() { None } else { Some(r) })
    }

    /// `⟨Ψ|X_1⋯X_k|Ψ⟩/⟨Ψ|Ψ⟩` for each monodromy string, without the Λ(0) factor.
    /// Strings are walked as a trie, so shared prefixes are folded once and
    /// only the current path is kept.
    pub fn monodromy_values(&self, strings: &[Vec<Letter>]) -> Result<Vec<Rational>> {
        let m = self.md.m() as i64;
        let mut order: Vec<usize> = (0..strings.len()).collect();
        order.sort_by(|&a, &b| strings[a].cmp(&strings[b]));
        let mut out = vec![Rational::new(); strings.len()];
        let mut stack: Vec<Option<SchurVector>> = vec![Some(self.root.clone())];
        let mut prev: &[Letter] = &[];
        for &i in &order {
            let s = &strings[i];
            let dq: i64 = s.iter().map(|l| l.dq() as i64).sum();
            if dq != 0 {
                continue;
            }
            let common = prev.iter().zip(s).take_while(|(a, b)| a == b).count();
            stack.truncate(common + 1);
            for (d, &l) in s.iter().enumerate().skip(common) {
                let next = match &stack[d] {
                    None => None,
                    Some(y) => {
                        // the remaining letters cannot bring q back to m
                        let q_after = y.q() as i64 + l.dq() as i64;
                        let rest: i64 = s[d + 1..].iter().map(|l| l.dq() as i64).sum();
                        if q_after < 0 || q_after + rest != m {
                            None
                        } else {
                            self.step(y, l)?
                        }
                    }
                };
                stack.push(next);
            }
            prev = s;
            if let Some(y) = &stack[s.len()] {
                out[i] = self.leaf(y)?;
            }
        }
        Ok(out)
    }

    /// Same values, folding every string from scratch.
    pub fn monodromy_value_uncached(&self, s: &[Letter]) -> Result<Rational> {
        let mut y = self.root.clone();
        for &l in s {
            match self.step(&y, l)? {
                Some(r) => y = r,
                None => return Ok(Rational::new()),
            }
        }
        self.leaf(&y)
    }

    /// Expectation values of tensor words.
    pub fn expect_words(&self, words: &[TensorWord]) -> Result<Vec<Rational>> {
        let mut index: BTreeMap<Vec<Letter>, usize> = BTreeMap::new();
        let mut expanded: Vec<Vec<(usize, i32)>> = Vec::with_capacity(words.len());
        for w in words {
            if !w.is_neutral() {
                expanded.push(Vec::new());
                continue;
            }
            let terms = word_to_monodromy(w)
                .into_iter()
                .map(|(s, c)| {
                    let n = index.len();
                    (*index.entry(s).or_insert(n), c)
                })
                .collect();
            expanded.push(terms);
        }
        let mut strings = vec![Vec::new(); index.len()];
        for (s, i) in index {
            strings[i] = s;
        }
        let vals = self.monodromy_values(&strings)?;
        Ok(words
            .iter()
            .zip(expanded)
            .map(|(w, terms)| {
                let mut t = Rational::new();
                for (i, c) in terms {
                    t += Rational::from(&vals[i] * c);
                }
                t / Rational::from(self.lambda0.pow_ref_n(w.len()))
            })
            .collect())
    }

    pub fn expect_word_uncached(&self, w: &TensorWord) -> Result<Rational> {
        let mut t = Rational::new();
        for (s, c) in word_to_monodromy(w) {
            t += self.monodromy_value_uncached(&s)? * c;
        }
        Ok(t / Rational::from(self.lambda0.pow_ref_n(w.len())))
    }

    pub fn expect_operator(&self, o: &InvariantOperator) -> Result<Rational> {
        let words: Vec<TensorWord> = o.coeffs.keys().cloned().collect();
        let vals = self.expect_words(&words)?;
        Ok(o.coeffs.values().zip(vals).map(|(c, v)| v * c).sum())
    }
}

trait PowN {
    fn pow_ref_n(&self, n: usize) -> Rational;
}

impl PowN for Rational {
    fn pow_ref_n(&self, n: usize) -> Rational {
        use rug::ops::Pow;
        Rational::from(self.pow(n as i32))
    }
}

/// `⟨O⟩` for one set of Matsubara data.
pub fn expect_direct(md: &MatsubaraData, o: &InvariantOperator) -> Result<Rational> {
    DirectEvaluator::new(md)?.expect_operator(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matsubara::generate_md;

    fn w(s: &str) -> TensorWord {
        s.parse().unwrap()
    }

    #[test]
    fn word_counts() {
        let two: Vec<String> = enumerate_irreducible_words(2).iter().map(|w| w.to_string()).collect();
        assert_eq!(two, vec!["pm", "mp", "zz"]);
        assert!(enumerate_irreducible_words(1).is_empty());
        assert_eq!(enumerate_irreducible_words(0).len(), 1);
    }

    #[test]
    fn singlet_counts_are_riordan() {
        let r: Vec<u64> = (2..=10).map(singlet_count).collect();
        assert_eq!(r, vec![1, 1, 3, 6, 15, 36, 91, 232, 603]);
        for k in 2..=6 {
            assert_eq!(singlets(k).len() as u64, singlet_count(k));
        }
        assert_eq!(invariant_dimension(10), 4286);
    }

    #[test]
    fn two_site_singlet_is_dot_product() {
        let b = invariant_basis(2);
        assert_eq!(b.len(), 1);
        let o = &b[0];
        let zz = o.coeffs[&w("zz")].clone();
        assert_eq!(o.coeffs[&w("pm")], Rational::from(&zz * 2u32));
        assert_eq!(o.coeffs[&w("mp")], Rational::from(&zz * 2u32));
    }

    #[test]
    fn basis_elements_are_invariant_and_orthogonal() {
        for n in 2..=5 {
            let b = invariant_basis(n);
            for (i, x) in b.iter().enumerate() {
                assert!(x.is_invariant());
                assert!(x.coeffs.keys().all(|w| w.is_irreducible()));
                for (j, y) in b.iter().enumerate() {
                    let g = x.trace_pair(y);
                    assert_eq!(g == 0, i != j, "n={n} a={i} b={j}");
                }
            }
        }
    }

    #[test]
    fn matches_nullspace_dimension() {
        for n in 2..=6 {
            let (_, ns) = invariant_basis_nullspace(n);
            assert_eq!(ns.len(), invariant_basis(n).len(), "n={n}");
            assert_eq!(ns.len() as u64, invariant_dimension(n));
        }
    }

    #[test]
    fn reduction_strips_padding() {
        let dot = invariant_basis(2).remove(0);
        let padded = dot.pad(1, 1);
        let r = translational_reduce(&padded);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, 2);
        assert_eq!(r[0].1, dot);
        let r = translational_reduce(&InvariantOperator::identity(5));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, 0);
    }

    #[test]
    fn operator_text_roundtrip() {
        let o = invariant_basis(4).remove(3);
        assert_eq!(InvariantOperator::from_text(&o.to_text()).unwrap(), o);
    }

    #[test]
    fn identity_expectation_is_one() {
        for (l, m) in [(1, 0), (2, 0), (2, 1), (3, 1), (4, 2)] {
            let md = generate_md(l, m, 3, 9).unwrap();
            let ev = DirectEvaluator::new(&md).unwrap();
            for k in 0..=4 {
                let v = ev.expect_words(&[TensorWord(vec![Spin::I; k])]).unwrap();
                assert_eq!(v[0], 1, "L={l} m={m} k={k}");
            }
        }
    }

    #[test]
    fn cached_equals_uncached_and_padding() {
        let md = generate_md(3, 1, 8, 9).unwrap();
        let ev = DirectEvaluator::new(&md).unwrap();
        let mut words = enumerate_irreducible_words(3);
        words.push(w("pp"));
        words.push(w("ipm"));
        let vals = ev.expect_words(&words).unwrap();
        for (wd, v) in words.iter().zip(&vals) {
            assert_eq!(*v, ev.expect_word_uncached(wd).unwrap(), "{wd}");
        }
        assert_eq!(vals[vals.len() - 2], 0);
        let pm = ev.expect_words(&[w("pm")]).unwrap();
        assert_eq!(vals[vals.len() - 1], pm[0]);
        let pmi = ev.expect_words(&[w("pmi")]).unwrap();
        assert_eq!(pmi[0], pm[0]);
    }
}
