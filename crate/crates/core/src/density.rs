//! Reduced density matrices from the word functionals, their sl₂ block
//! structure, spectra, entanglement entropy and emptiness formation.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fermion_basis::omega_minor;
use crate::linalg::{jacobi_eigenvalues, Rref, SparseRow};
use crate::omega_exact::{Backend, OmegaMatrix};
use crate::operator_space::{Spin, TensorWord};
use crate::xsolver::DTable;
use rug::{Float, Rational};
use std::collections::{BTreeMap, HashMap};

/// `⟨W⟩` for neutral words on up to `n` sites, for an sl₂-invariant state.
pub struct WordExpectations {
    pub bits: u32,
    values: HashMap<TensorWord, Float>,
}

/// All words with balanced charge and an even number of σ³.
pub fn neutral_words(n: usize) -> Vec<TensorWord> {
    fn rec(n: usize, cur: &mut Vec<Spin>, out: &mut Vec<TensorWord>) {
        if cur.len() == n {
            let w = TensorWord(cur.clone());
            if w.is_neutral() {
                out.push(w);
            }
            return;
        }
        for s in Spin::ALL {
            cur.push(s);
            rec(n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::with_capacity(n), &mut out);
    out
}

impl WordExpectations {
    /// Evaluate every neutral `n`-site word through its identity-stripped core.
    pub fn new(n: usize, tables: &BTreeMap<usize, DTable>, omega: &OmegaMatrix, bits: u32, exec: Exec) -> Result<Self> {
        if omega.backend() == Backend::Md {
            return Err(Error::Refused("density matrices need an sl₂-invariant ω (zero or thermal backend)".into()));
        }
        if omega.order() < n {
            return Err(Error::Inadmissible(format!("ω order {} below n = {n}", omega.order())));
        }
        let om = omega.to_float(bits);
        let unit = Float::with_val(bits, 1);
        let mut minors: BTreeMap<usize, Vec<Float>> = BTreeMap::new();
        for k in 2..=n {
            let t = tables.get(&k).ok_or_else(|| Error::Inadmissible(format!("missing word table for k = {k}")))?;
            let mv = exec.map(&t.pairs, |p| omega_minor(&om, p, &unit)).into_iter().collect::<Result<Vec<_>>>()?;
            minors.insert(k, mv);
        }
        let words = neutral_words(n);
        let vals = exec.map(&words, |w| {
            let core = w.core();
            let k = core.len();
            if k == 0 {
                return Float::with_val(bits, 1);
            }
            match (tables.get(&k), minors.get(&k)) {
                (Some(t), Some(mv)) => t.expect(&core, mv, &unit),
                _ => Float::with_val(bits, 0),
            }
        });
        Ok(WordExpectations { bits, values: words.into_iter().zip(vals).collect() })
    }

    pub fn get(&self, w: &TensorWord) -> Float {
        self.values.get(w).cloned().unwrap_or_else(|| Float::with_val(self.bits, 0))
    }
}

/// Basis states `|s⟩` are bitmasks with bit `i` set for spin up at site `i`.
pub fn density_entry(n: usize, we: &WordExpectations, s: u32, t: u32) -> Float {
    let bits = we.bits;
    let mut acc = Float::with_val(bits, 0);
    let equal: Vec<usize> = (0..n).filter(|i| (s ^ t) & (1 << i) == 0).collect();
    let mut base = vec![Spin::I; n];
    for i in 0..n {
        let (a, b) = (s & (1 << i) != 0, t & (1 << i) != 0);
        if a && !b {
            base[i] = Spin::M; // dual σ⁺ = |↑⟩⟨↓|
        } else if !a && b {
            base[i] = Spin::P;
        }
    }
    for choice in 0u32..(1 << equal.len()) {
        let mut w = base.clone();
        let mut neg = false;
        for (bit, &i) in equal.iter().enumerate() {
            if choice & (1 << bit) != 0 {
                w[i] = Spin::Z;
                neg ^= s & (1 << i) == 0;
            }
        }
        let w = TensorWord(w);
        if !w.is_neutral() {
            continue;
        }
        let v = we.get(&w);
        if neg {
            acc -= v;
        } else {
            acc += v;
        }
    }
    // each equal-site dual letter carries 1/2
    acc >> equal.len() as u32
}

/// The full `2ⁿ × 2ⁿ` matrix; intended for small `n`.
pub fn assemble_density(n: usize, we: &WordExpectations) -> Vec<Vec<Float>> {
    let dim = 1u32 << n;
    (0..dim)
        .map(|s| {
            (0..dim)
                .map(|t| {
                    if s.count_ones() == t.count_ones() {
                        density_entry(n, we, s, t)
                    } else {
                        Float::with_val(we.bits, 0)
                    }
                })
                .collect()
        })
        .collect()
}

fn sector(n: usize, up: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|s| s.count_ones() as usize == up).collect()
}

/// `dim M_j = C(n, n/2 − j) − C(n, n/2 − j − 1)`, with `j2 = 2j`.
pub fn multiplicity(n: usize, j2: usize) -> usize {
    let binom = |k: i64| -> usize {
        if k < 0 || k as usize > n {
            0
        } else {
            let k = k as usize;
            (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
        }
    };
    let low = (n as i64 - j2 as i64) / 2;
    binom(low) - binom(low - 1)
}

/// Highest-weight vectors of spin `j` (kernel of S⁺ in the sector `S³ = j`),
/// orthogonalized exactly and normalized at `bits`. Columns index the
/// sector states returned alongside.
pub fn multiplicity_basis(n: usize, j2: usize, bits: u32) -> (Vec<u32>, Vec<Vec<Float>>) {
    let up = (n + j2) / 2;
    let states = sector(n, up);
    let index: HashMap<u32, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut rr = Rref::new(states.len());
    if up < n {
        for target in sector(n, up + 1) {
            let mut row: SparseRow = (0..n)
                .filter(|i| target & (1 << i) != 0)
                .map(|i| (index[&(target & !(1 << i))], Rational::from(1)))
                .collect();
            row.sort_by_key(|x| x.0);
            rr.insert(&row);
        }
    }
    let kernel: Vec<Vec<Rational>> = rr.nullspace().iter().map(|r| crate::linalg::dense_from_sparse(r, states.len())).collect();
    // Gram–Schmidt over the rationals
    let mut ortho: Vec<Vec<Rational>> = Vec::with_capacity(kernel.len());
    let dot = |a: &[Rational], b: &[Rational]| -> Rational { a.iter().zip(b).map(|(x, y)| Rational::from(x * y)).sum() };
    for v in kernel {
        let mut w = v.clone();
        for u in &ortho {
            let f = dot(&v, u) / dot(u, u);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= Rational::from(&f * ui);
            }
        }
        ortho.push(w);
    }
    let basis = ortho
        .iter()
        .map(|w| {
            let norm = Float::with_val(bits, &dot(w, w)).sqrt();
            w.iter().map(|x| Float::with_val(bits, x) / &norm).collect()
        })
        .collect();
    (states, basis)
}

/// Blocks `U^T D U` per spin `j`, keyed by `2j`.
#[derive(Clone, Debug)]
pub struct DensityBlocks {
    pub n: usize,
    pub bits: u32,
    pub blocks: Vec<(usize, Vec<Vec<Float>>)>,
}

impl DensityBlocks {
    pub fn build(n: usize, we: &WordExpectations, exec: Exec) -> DensityBlocks {
        let bits = we.bits;
        let j2s: Vec<usize> = (n % 2..=n).step_by(2).collect();
        let blocks = j2s
            .iter()
            .map(|&j2| {
                let (states, u) = multiplicity_basis(n, j2, bits);
                // D restricted to the sector, then projected
                let rows: Vec<Vec<Float>> = exec.map(&states, |&s| states.iter().map(|&t| density_entry(n, we, s, t)).collect());
                let du: Vec<Vec<Float>> = u
                    .iter()
                    .map(|col| {
                        rows.iter()
                            .map(|r| r.iter().zip(col).fold(Float::with_val(bits, 0), |acc, (x, y)| acc + Float::with_val(bits, x * y)))
                            .collect()
                    })
                    .collect();
                let b: Vec<Vec<Float>> = u
                    .iter()
                    .map(|ca| {
                        du.iter()
                            .map(|db| ca.iter().zip(db).fold(Float::with_val(bits, 0), |acc, (x, y)| acc + Float::with_val(bits, x * y)))
                            .collect()
                    })
                    .collect();
                (j2, b)
            })
            .collect();
        DensityBlocks { n, bits, blocks }
    }

    /// `Σ_j (2j+1) Tr(block_j)`.
    pub fn trace(&self) -> Float {
        let mut t = Float::with_val(self.bits, 0);
        for (j2, b) in &self.blocks {
            for (i, r) in b.iter().enumerate() {
                t += Float::with_val(self.bits, &r[i] * (*j2 as u32 + 1));
            }
        }
        t
    }

    /// Largest asymmetry `|b_ik − b_ki|` over all blocks.
    pub fn asymmetry(&self) -> Float {
        let mut m = Float::with_val(self.bits, 0);
        for (_, b) in &self.blocks {
            for i in 0..b.len() {
                for k in 0..i {
                    let d = Float::with_val(self.bits, &b[i][k] - &b[k][i]).abs();
                    if d > m {
                        m = d;
                    }
                }
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub n: usize,
    pub entropy: Float,
    pub efp: Float,
    pub trace: Float,
    /// `(2j, eigenvalues in descending order)`
    pub spectra: Vec<(usize, Vec<Float>)>,
}

/// Eigenvalues per block and `s = −Σ_j (2j+1) Σ λ log λ`.
pub fn spectra_entropy(d: &DensityBlocks, exec: Exec) -> Result<EntropyReport> {
    let bits = d.bits;
    let spectra: Vec<(usize, Vec<Float>)> = exec.map(&d.blocks, |(j2, b)| {
        let sym: Vec<Vec<Float>> = (0..b.len())
            .map(|i| (0..b.len()).map(|k| Float::with_val(bits, &b[i][k] + &b[k][i]) / 2u32).collect())
            .collect();
        (*j2, jacobi_eigenvalues(&sym, bits))
    });
    let floor = Float::with_val(bits, -1e-30);
    let mut s = Float::with_val(bits, 0);
    for (j2, ev) in &spectra {
        for l in ev {
            if *l < floor {
                return Err(Error::NoConvergence(format!("negative eigenvalue {} in block 2j = {j2}", l.to_f64())));
            }
            if l.is_sign_positive() && !l.is_zero() {
                s -= Float::with_val(bits, l * Float::with_val(bits, l.ln_ref())) * (*j2 as u32 + 1);
            }
        }
    }
    let efp = spectra.iter().find(|(j2, _)| *j2 == d.n).map(|(_, e)| e[0].clone()).unwrap_or_else(|| Float::with_val(bits, 0));
    Ok(EntropyReport { n: d.n, entropy: s, efp, trace: d.trace(), spectra })
}

/// `Γ²(1/4)/(π√(2π)) = 2/agm(1, √2)`.
pub fn efp_base(bits: u32) -> Float {
    let one = Float::with_val(bits, 1);
    let agm = one.agm(&Float::with_val(bits, 2).sqrt());
    Float::with_val(bits, 2) / agm
}

/// `χ(n) = log P(n) + log(Γ²(1/4)/(π√(2π))) n² + (1/12) log n`.
pub fn efp_chi(n: usize, p: &Float, bits: u32) -> Float {
    let lb = efp_base(bits).ln();
    let nn = Float::with_val(bits, n);
    Float::with_val(bits, p.ln_ref()) + lb * (n * n) as u32 + Float::with_val(bits, nn.ln_ref()) / 12u32
}

/// Smoothed estimates `exp((χ(n) + 2χ(n−1) + χ(n−2))/4)` for every window,
/// keyed by the top `n`. `p` maps `n ↦ P(n)`.
pub fn efp_asymptotics(p: &BTreeMap<usize, Float>, bits: u32) -> BTreeMap<usize, Float> {
    let chi: BTreeMap<usize, Float> = p.iter().map(|(n, v)| (*n, efp_chi(*n, v, bits))).collect();
    let mut out = BTreeMap::new();
    for (&n, c) in &chi {
        if n < 2 {
            continue;
        }
        if let (Some(c1), Some(c2)) = (chi.get(&(n - 1)), chi.get(&(n - 2))) {
            let s = Float::with_val(bits, c + Float::with_val(bits, c1 * 2u32)) + c2;
            out.insert(n, Float::with_val(bits, s / 4u32).exp());
        }
    }
    out
}

/// Zero temperature: the least-squares constant `C` in `s(n) ≈ (1/3) log n + C`
/// with the residual at each `n`.
pub fn cft_zero(entropies: &BTreeMap<usize, Float>, bits: u32) -> (Float, Vec<(usize, Float)>) {
    let shifted: Vec<(usize, Float)> = entropies
        .iter()
        .map(|(n, s)| (*n, Float::with_val(bits, s - Float::with_val(bits, Float::with_val(bits, *n).ln()) / 3u32)))
        .collect();
    let c = shifted.iter().fold(Float::with_val(bits, 0), |a, (_, v)| a + v) / shifted.len().max(1) as u32;
    let res = shifted.into_iter().map(|(n, v)| (n, v - &c)).collect();
    (c, res)
}

/// `(1/3) log(sinh(x)/x)` with `x = nT`; zero at `x = 0`.
pub fn cft_thermal(x: &Float) -> Float {
    if x.is_zero() {
        return Float::with_val(x.prec(), 0);
    }
    let r = Float::with_val(x.prec(), x.sinh_ref()) / x;
    r.ln() / 3u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_dims() {
        assert_eq!(multiplicity(10, 2), 90);
        assert_eq!((multiplicity(2, 0), multiplicity(2, 2)), (1, 1));
        for n in 1..=10 {
            let total: usize = (n % 2..=n).step_by(2).map(|j2| (j2 + 1) * multiplicity(n, j2)).sum();
            assert_eq!(total, 1 << n);
        }
        for n in 2..=6 {
            for j2 in (n % 2..=n).step_by(2) {
                let (_, b) = multiplicity_basis(n, j2, 100);
                assert_eq!(b.len(), multiplicity(n, j2));
            }
        }
    }

    #[test]
    fn published_efp_windows() {
        let bits = 200;
        let vals = [
            (7, "8.93090684226941650e-12"),
            (8, "4.05749505255338289e-15"),
            (9, "6.62359212493539014e-19"),
            (10, "3.88481154904260358e-23"),
        ];
        let p: BTreeMap<usize, Float> = vals.iter().map(|(n, v)| (*n, Float::with_val(bits, Float::parse(v).unwrap()))).collect();
        let a = efp_asymptotics(&p, bits);
        assert!((a[&10].to_f64() - 0.8412645021372811).abs() < 1e-15);
        assert!((a[&9].to_f64() - 0.8412642481617325).abs() < 1e-15);
    }

    #[test]
    fn cft_limit() {
        let x = Float::with_val(100, 1e-20);
        assert!(cft_thermal(&x).to_f64().abs() < 1e-35);
        assert!(cft_thermal(&Float::with_val(100, 0)).is_zero());
    }
}
