//! Unphysical Matsubara data: the polynomials `a`, `d` and Bethe roots.

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{self, Poly};
use rand::{Rng, SeedableRng};
use rug::ops::Pow;
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use std::fmt;
use std::str::FromStr;

/// `a(λ) = λ^L + Σ a_j λ^{L−j}`, same for `d`, roots `β_1..β_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatsubaraData {
    l: usize,
    m: usize,
    a_coeffs: Vec<Rational>,
    d_coeffs: Vec<Rational>,
    roots: Vec<Rational>,
    a_poly: Poly,
    d_poly: Poly,
    q_poly: Poly,
    num: Poly,
    den: Poly,
}

fn monic(l: usize, c: &[Rational]) -> Poly {
    let mut p = vec![Rational::new(); l + 1];
    p[l] = Rational::from(1);
    for (j, cj) in c.iter().enumerate() {
        p[l - 1 - j] = cj.clone();
    }
    p
}

impl MatsubaraData {
    /// Build and check every admissibility condition.
    pub fn new(l: usize, a_coeffs: Vec<Rational>, d_coeffs: Vec<Rational>, roots: Vec<Rational>) -> Result<Self> {
        let md = Self::build(l, a_coeffs, d_coeffs, roots)?;
        md.check()?;
        Ok(md)
    }

    fn build(l: usize, a_coeffs: Vec<Rational>, d_coeffs: Vec<Rational>, roots: Vec<Rational>) -> Result<Self> {
        if l == 0 || a_coeffs.len() != l || d_coeffs.len() != l {
            return Err(Error::Inadmissible("coefficient count must equal L >= 1".into()));
        }
        let m = roots.len();
        if 2 * m > l {
            return Err(Error::Inadmissible(format!("m = {m} exceeds L/2")));
        }
        let a_poly = monic(l, &a_coeffs);
        let d_poly = monic(l, &d_coeffs);
        let q_poly = poly::from_roots(&roots);
        let num = poly::mul(&a_poly, &poly::shift(&q_poly, &Rational::from(1)));
        let den = poly::mul(&d_poly, &poly::shift(&q_poly, &Rational::from(-1)));
        Ok(MatsubaraData { l, m, a_coeffs, d_coeffs, roots, a_poly, d_poly, q_poly, num, den })
    }

    fn check(&self) -> Result<()> {
        let bad = |s: String| Err(Error::Inadmissible(s));
        for (i, b) in self.roots.iter().enumerate() {
            if *b == 0 || *b == 1 || *b == -1 {
                return bad(format!("root {b} collides with an expansion pole"));
            }
            if self.roots[..i].contains(b) {
                return bad(format!("repeated root {b}"));
            }
            let bethe = Rational::from(&poly::eval(&self.num, b) + &poly::eval(&self.den, b));
            if bethe != 0 {
                return bad(format!("Bethe equation violated at {b}"));
            }
            if self.d(b) == 0 {
                return bad(format!("d vanishes at root {b}"));
            }
            if poly::eval(&self.den, b) == 0 {
                return bad(format!("denominator of the auxiliary function vanishes at {b}"));
            }
            if self.afrak_derivative(b)? == 0 {
                return bad(format!("derivative of the auxiliary function vanishes at {b}"));
            }
        }
        if poly::eval(&self.q_poly, &Rational::new()) == 0 || self.lambda0_times_q0() == 0 {
            return bad("transfer-matrix eigenvalue vanishes at 0".into());
        }
        if self.m > 0 && linalg::det(&self.g_system()) == 0 {
            return bad("singular linear system for G".into());
        }
        if self.gaudin_raw() == 0 {
            return bad("vanishing Gaudin norm".into());
        }
        Ok(())
    }

    pub fn l(&self) -> usize {
        self.l
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn a_coeffs(&self) -> &[Rational] {
        &self.a_coeffs
    }
    pub fn d_coeffs(&self) -> &[Rational] {
        &self.d_coeffs
    }
    pub fn roots(&self) -> &[Rational] {
        &self.roots
    }
    pub fn a_poly(&self) -> &Poly {
        &self.a_poly
    }
    pub fn d_poly(&self) -> &Poly {
        &self.d_poly
    }
    pub fn q_poly(&self) -> &Poly {
        &self.q_poly
    }
    /// `a(λ)Q(λ+1)`
    pub fn numerator(&self) -> &Poly {
        &self.num
    }
    /// `d(λ)Q(λ−1)`
    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn a(&self, x: &Rational) -> Rational {
        poly::eval(&self.a_poly, x)
    }
    pub fn d(&self, x: &Rational) -> Rational {
        poly::eval(&self.d_poly, x)
    }
    pub fn q(&self, x: &Rational) -> Rational {
        poly::eval(&self.q_poly, x)
    }

    /// `𝔞(λ) = a(λ)Q(λ+1) / d(λ)Q(λ−1)`
    pub fn afrak(&self, x: &Rational) -> Result<Rational> {
        let den = poly::eval(&self.den, x);
        if den == 0 {
            return Err(Error::Pole(x.to_string()));
        }
        Ok(poly::eval(&self.num, x) / den)
    }

    pub fn afrak_derivative(&self, x: &Rational) -> Result<Rational> {
        let den = poly::eval(&self.den, x);
        if den == 0 {
            return Err(Error::Pole(x.to_string()));
        }
        let num = poly::eval(&self.num, x);
        let dn = poly::eval(&poly::deriv(&self.num), x);
        let dd = poly::eval(&poly::deriv(&self.den), x);
        let top = Rational::from(&dn * &den) - Rational::from(&num * &dd);
        Ok(top / Rational::from(den.square_ref()))
    }

    fn lambda0_times_q0(&self) -> Rational {
        let one = Rational::from(1);
        let a0 = self.a(&Rational::new());
        let d0 = self.d(&Rational::new());
        a0 * self.q(&one) + d0 * self.q(&Rational::from(-1))
    }

    /// Transfer-matrix eigenvalue `Λ(0) = (a(0)Q(1) + d(0)Q(−1))/Q(0)`.
    pub fn lambda0(&self) -> Rational {
        self.lambda0_times_q0() / self.q(&Rational::new())
    }

    /// `δ_kj − K(β_k − β_j)/𝔞'(β_j)` with `K(λ) = 2/(λ²−1)`.
    pub fn g_system(&self) -> Vec<Vec<Rational>> {
        let ap: Vec<Rational> = self.roots.iter().map(|b| self.afrak_derivative(b).unwrap_or_default()).collect();
        let m = self.m;
        let mut g = vec![vec![Rational::new(); m]; m];
        for k in 0..m {
            for j in 0..m {
                let diff = Rational::from(&self.roots[k] - &self.roots[j]);
                let kern = Rational::from(2) / (Rational::from(diff.square_ref()) - 1u32);
                let mut v = -kern / &ap[j];
                if j == k {
                    v += 1u32;
                }
                g[k][j] = v;
            }
        }
        g
    }

    /// Gaudin norm `Π a(β)d(β) · Π_{i≠j} (β_i−β_j+1)/(β_i−β_j) · det 𝒢`.
    pub(crate) fn gaudin_raw(&self) -> Rational {
        let m = self.m;
        let b = &self.roots;
        let da = poly::deriv(&self.a_poly);
        let dd = poly::deriv(&self.d_poly);
        let mut g = vec![vec![Rational::new(); m]; m];
        for k in 0..m {
            let ak = self.a(&b[k]);
            let dk = self.d(&b[k]);
            if ak == 0 || dk == 0 {
                return Rational::new();
            }
            let mut diag = poly::eval(&da, &b[k]) / ak - poly::eval(&dd, &b[k]) / dk;
            for j in 0..m {
                if j == k {
                    continue;
                }
                let x = Rational::from(&b[k] - &b[j]);
                let t = Rational::from(1) / (Rational::from(&x + 1u32)) - Rational::from(1) / (Rational::from(&x - 1u32));
                diag += &t;
                g[k][j] = -t;
            }
            g[k][k] = diag;
        }
        let mut pre = Rational::from(1);
        for i in 0..m {
            pre *= self.a(&b[i]) * self.d(&b[i]);
            for j in 0..m {
                if i != j {
                    let x = Rational::from(&b[i] - &b[j]);
                    pre *= Rational::from(&x + 1u32) / x;
                }
            }
        }
        pre * linalg::det(&g)
    }
}

/// Draw admissible data; deterministic in `(l, m, seed, range)`.
pub fn generate_md(l: usize, m: usize, seed: u64, range: u32) -> Result<MatsubaraData> {
    if 2 * m > l || l == 0 {
        return Err(Error::Inadmissible(format!("need 1 <= L and m <= L/2, got L={l}, m={m}")));
    }
    if range < 2 {
        return Err(Error::Inadmissible("range must be at least 2".into()));
    }
    const BUDGET: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = range as i64;
    let draw = |rng: &mut ChaCha8Rng| -> Rational {
        let v = rng.gen_range(1..=2 * r);
        Rational::from(if v <= r { v - r - 1 } else { v - r })
    };
    for _ in 0..BUDGET {
        let roots: Vec<Rational> = (0..m).map(|_| draw(&mut rng)).collect();
        let a_rest: Vec<Rational> = (m..l).map(|_| draw(&mut rng)).collect();
        let d_coeffs: Vec<Rational> = (0..l).map(|_| draw(&mut rng)).collect();
        let Some(a_head) = solve_bethe(l, &roots, &a_rest, &d_coeffs) else { continue };
        let a_coeffs: Vec<Rational> = a_head.into_iter().chain(a_rest).collect();
        if let Ok(md) = MatsubaraData::new(l, a_coeffs, d_coeffs, roots) {
            return Ok(md);
        }
    }
    Err(Error::RetryBudget(BUDGET))
}

/// Solve the Bethe equations, linear in `a_1..a_m`.
fn solve_bethe(l: usize, roots: &[Rational], a_rest: &[Rational], d_coeffs: &[Rational]) -> Option<Vec<Rational>> {
    let m = roots.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let q = poly::from_roots(roots);
    let d = monic(l, d_coeffs);
    let mut mat = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for b in roots {
        let qp = poly::eval(&q, &Rational::from(b + 1u32));
        let qm = poly::eval(&q, &Rational::from(b - 1u32));
        let pw = |e: usize| Rational::from(b.pow(e as i32));
        mat.push((1..=m).map(|i| pw(l - i) * &qp).collect::<Vec<_>>());
        let mut known = pw(l);
        for (k, c) in a_rest.iter().enumerate() {
            known += Rational::from(c * pw(l - (m + 1 + k)));
        }
        rhs.push(vec![-(known * &qp) - poly::eval(&d, b) * qm]);
    }
    if linalg::det(&mat) == 0 {
        return None;
    }
    linalg::solve(&mat, &rhs).ok().map(|x| x.into_iter().map(|mut r| r.remove(0)).collect())
}

fn join(v: &[Rational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for MatsubaraData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} | {} | {} | {}", self.l, self.m, join(&self.a_coeffs), join(&self.d_coeffs), join(&self.roots))
    }
}

impl FromStr for MatsubaraData {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('|').collect();
        if parts.len() != 4 {
            return Err(Error::Parse("expected 'L m | a | d | roots'".into()));
        }
        let nums = |p: &str| -> Result<Vec<Rational>> {
            p.split_whitespace()
                .map(|t| Rational::from_str(t).map_err(|e| Error::Parse(format!("{t}: {e}"))))
                .collect()
        };
        let head: Vec<usize> = parts[0]
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer {t}"))))
            .collect::<Result<_>>()?;
        if head.len() != 2 {
            return Err(Error::Parse("header needs L and m".into()));
        }
        let md = MatsubaraData::new(head[0], nums(parts[1])?, nums(parts[2])?, nums(parts[3])?)?;
        if md.m != head[1] {
            return Err(Error::Parse("root count disagrees with m".into()));
        }
        Ok(md)
    }
}
