//! Taylor-coefficient matrices `ω_{i,j}` for finite Matsubara data (exact)
//! and for the zero-temperature antiferromagnet.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matsubara::MatsubaraData;
use crate::numerics::{constants, zeta_odd, Precision};
use crate::poly;
use rug::{Float, Integer, Rational};
use std::fmt::Write as _;

pub const DEFAULT_ORDER: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Md,
    Zero,
    Thermal,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Md => "md",
            Backend::Zero => "zero",
            Backend::Thermal => "thermal",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "md" => Ok(Backend::Md),
            "zero" => Ok(Backend::Zero),
            "thermal" => Ok(Backend::Thermal),
            _ => Err(Error::Parse(format!("unknown ω backend {s:?}"))),
        }
    }
}

/// `entries[i][j] = ω_{i+1,j+1}`, the coefficient of `λ^i μ^j`.
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaMatrix {
    Exact(Vec<Vec<Rational>>),
    Real { backend: Backend, bits: u32, entries: Vec<Vec<Float>> },
}

impl OmegaMatrix {
    pub fn order(&self) -> usize {
        match self {
            OmegaMatrix::Exact(e) => e.len(),
            OmegaMatrix::Real { entries, .. } => entries.len(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            OmegaMatrix::Exact(_) => Backend::Md,
            OmegaMatrix::Real { backend, .. } => *backend,
        }
    }

    /// Entries as floats at `bits` precision.
    pub fn to_float(&self, bits: u32) -> Vec<Vec<Float>> {
        match self {
            OmegaMatrix::Exact(e) => e.iter().map(|r| r.iter().map(|x| Float::with_val(bits, x)).collect()).collect(),
            OmegaMatrix::Real { entries, .. } => {
                entries.iter().map(|r| r.iter().map(|x| Float::with_val(bits, x)).collect()).collect()
            }
        }
    }

    /// Header `order backend bits`, then one row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self {
            OmegaMatrix::Exact(e) => {
                writeln!(s, "{} md 0", e.len()).unwrap();
                for r in e {
                    writeln!(s, "{}", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
                }
            }
            OmegaMatrix::Real { backend, bits, entries } => {
                writeln!(s, "{} {} {}", entries.len(), backend.name(), bits).unwrap();
                for r in entries {
                    let row: Vec<String> = r.iter().map(|x| x.to_string_radix(10, None)).collect();
                    writeln!(s, "{}", row.join(" ")).unwrap();
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("omega matrix: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
        if head.len() != 3 {
            return Err(bad("header"));
        }
        let order: usize = head[0].parse().map_err(|_| bad("order"))?;
        let backend = Backend::parse(head[1])?;
        let bits: u32 = head[2].parse().map_err(|_| bad("bits"))?;
        let rows: Vec<Vec<&str>> = lines.take(order).map(|l| l.split_whitespace().collect()).collect();
        if rows.len() != order || rows.iter().any(|r| r.len() != order) {
            return Err(bad("shape"));
        }
        if backend == Backend::Md {
            let e = rows
                .iter()
                .map(|r| r.iter().map(|x| x.parse::<Rational>().map_err(|_| bad("rational"))).collect())
                .collect::<Result<_>>()?;
            return Ok(OmegaMatrix::Exact(e));
        }
        let entries = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| Float::parse(x).map(|p| Float::with_val(bits, p)).map_err(|_| bad("float")))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(OmegaMatrix::Real { backend, bits, entries })
    }
}

type Biv = Vec<Vec<Rational>>;

fn biv_zero(n: usize) -> Biv {
    vec![vec![Rational::new(); n]; n]
}

fn biv_mul(a: &Biv, b: &Biv) -> Biv {
    let n = a.len();
    let mut r = biv_zero(n);
    for i in 0..n {
        for j in 0..n {
            if a[i][j] == 0 {
                continue;
            }
            for k in 0..n - i {
                for l in 0..n - j {
                    if b[k][l] != 0 {
                        r[i + k][j + l] += Rational::from(&a[i][j] * &b[k][l]);
                    }
                }
            }
        }
    }
    r
}

fn outer(a: &[Rational], b: &[Rational]) -> Biv {
    a.iter().map(|x| b.iter().map(|y| Rational::from(x * y)).collect()).collect()
}

fn biv_add_assign(a: &mut Biv, b: &Biv, f: i32) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x += Rational::from(y * f);
        }
    }
}

/// Series of `Σ_k (λ−μ)^{2k} = 1/(1−(λ−μ)²)`.
fn geometric_diff(n: usize) -> Biv {
    let mut b = biv_zero(n);
    for k in 0..n {
        let e = 2 * k;
        for i in 0..=e {
            let j = e - i;
            if i < n && j < n {
                let c = Integer::from(Integer::binomial_u(e as u32, i as u32));
                b[i][j] += if j % 2 == 0 { Rational::from(c) } else { -Rational::from(c) };
            }
        }
    }
    b
}

/// `H(β − x) = 1/((β−x−1)(β−x))`
fn h_series(b: &Rational, n: usize) -> Vec<Rational> {
    poly::series_mul(&poly::series_inv_linear(&Rational::from(b - 1u32), n), &poly::series_inv_linear(b, n), n)
}

/// `K(x − β) = 2/((β−x−1)(β−x+1))`
fn k_series(b: &Rational, n: usize) -> Vec<Rational> {
    let s = poly::series_mul(
        &poly::series_inv_linear(&Rational::from(b - 1u32), n),
        &poly::series_inv_linear(&Rational::from(b + 1u32), n),
        n,
    );
    s.into_iter().map(|c| c * 2u32).collect()
}

/// Exact `ω_{i,j}` for finite Matsubara data, via residues at the Bethe
/// roots and the explicit poles of the kernels.
pub fn omega_md(md: &MatsubaraData, order: usize) -> Result<OmegaMatrix> {
    let n = order;
    let m = md.m();
    let beta = md.roots();
    let ap: Vec<Rational> = beta.iter().map(|b| md.afrak_derivative(b)).collect::<Result<_>>()?;
    // u = 1/(1+𝔞); the difference quotient below needs coefficients up to 2n−1
    let u_long = poly::series_div(md.denominator(), &poly::add(md.denominator(), md.numerator()), 2 * n)
        .ok_or_else(|| Error::Pole("1 + 𝔞 vanishes at the expansion point".into()))?;
    let u = u_long[..n].to_vec();
    let mut w = biv_zero(n);
    if m > 0 {
        let rhs: Vec<Vec<Rational>> = beta
            .iter()
            .map(|b| poly::sub(&h_series(b, n), &poly::series_mul(&k_series(b, n), &u, n)))
            .map(|mut r| {
                r.resize(n, Rational::new());
                r
            })
            .collect();
        let g = linalg::solve(&md.g_system(), &rhs)?;
        for j in 0..m {
            let inv = Rational::from(ap[j].recip_ref());
            let hj: Vec<Rational> = h_series(&beta[j], n).into_iter().map(|c| c * &inv).collect();
            biv_add_assign(&mut w, &outer(&hj, &g[j]), 1);
            let uk = poly::series_mul(&u, &k_series(&beta[j], n), n);
            let gj: Vec<Rational> = g[j].iter().map(|c| Rational::from(c * &inv)).collect();
            biv_add_assign(&mut w, &outer(&uk, &gj), -1);
        }
    }
    let dp = geometric_diff(n);
    // K(λ−μ) = −2/(1−(λ−μ)²)
    let kb: Biv = dp.iter().map(|r| r.iter().map(|x| Rational::from(x * -2i32)).collect()).collect();
    biv_add_assign(&mut w, &biv_mul(&outer(&u, &u), &kb), 1);
    for (rw, rk) in w.iter_mut().zip(&kb) {
        for (x, y) in rw.iter_mut().zip(rk) {
            *x += Rational::from(y / 4u32);
        }
    }
    // [u(λ) + u(μ) + (u(λ) − u(μ))/(λ − μ)] / (1 − (λ−μ)²)
    let mut s = biv_zero(n);
    for i in 0..n {
        s[i][0] += &u[i];
        s[0][i] += &u[i];
    }
    for a in 0..n {
        for b in 0..n {
            s[a][b] += &u_long[a + b + 1];
        }
    }
    biv_add_assign(&mut w, &biv_mul(&s, &dp), 1);
    Ok(OmegaMatrix::Exact(w))
}

/// Coefficients `c_k` of `ω(λ) = Σ c_k λ^{2k}` at zero temperature.
pub fn omega_zero_coefficients(terms: usize, prec: Precision) -> Vec<Float> {
    let bits = prec.bits();
    let c = constants(prec);
    let half = Float::with_val(bits, 0.5);
    let mut out = Vec::with_capacity(terms);
    out.push(Float::with_val(bits, Float::with_val(bits, &c.log2 * 2u32) - &half));
    for k in 1..terms as u32 {
        let z = zeta_odd(k, prec);
        let f = 1 - Float::with_val(bits, Float::i_exp(1, -2 * k as i32));
        let v = Float::with_val(bits, z * 2u32 * f);
        out.push(Float::with_val(bits, v - &half));
    }
    out
}

/// `ω_{i,j}` of the zero-temperature function `ω(λ − μ)`.
pub fn omega_zero(order: usize, prec: Precision) -> OmegaMatrix {
    let bits = prec.bits();
    let c = omega_zero_coefficients(order, prec);
    let mut e = vec![vec![Float::with_val(bits, 0); order]; order];
    for (k, ck) in c.iter().enumerate() {
        let p = 2 * k;
        for i in 0..=p {
            let j = p - i;
            if i < order && j < order {
                let b = Integer::from(Integer::binomial_u(p as u32, i as u32));
                let t = Float::with_val(bits, ck * &b);
                if j % 2 == 0 {
                    e[i][j] += t;
                } else {
                    e[i][j] -= t;
                }
            }
        }
    }
    OmegaMatrix::Real { backend: Backend::Zero, bits, entries: e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matsubara::generate_md;

    #[test]
    fn md_omega_is_symmetric() {
        for (l, m, seed) in [(1, 0, 1), (2, 1, 2), (3, 1, 3), (4, 2, 4), (5, 2, 5)] {
            let md = generate_md(l, m, seed, 9).unwrap();
            let OmegaMatrix::Exact(w) = omega_md(&md, 6).unwrap() else { unreachable!() };
            for i in 0..6 {
                for j in 0..6 {
                    assert_eq!(w[i][j], w[j][i], "L={l} m={m} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn m0_slice_oracle() {
        // For m = 0: ω(λ, 0) = K(λ)(u(λ)u(0) + 1/4) + [u(λ) + u(0) + (u(λ) − u(0))/λ]/(1 − λ²)
        let md = generate_md(3, 0, 9, 9).unwrap();
        let n = 8;
        let OmegaMatrix::Exact(w) = omega_md(&md, n).unwrap() else { unreachable!() };
        let u = poly::series_div(md.denominator(), &poly::add(md.denominator(), md.numerator()), n + 1).unwrap();
        let inv1mx2: Vec<Rational> = (0..n).map(|k| Rational::from(if k % 2 == 0 { 1 } else { 0 })).collect();
        let k: Vec<Rational> = inv1mx2.iter().map(|c| Rational::from(c * -2i32)).collect();
        let mut a: Vec<Rational> = u[..n].iter().map(|c| Rational::from(c * &u[0])).collect();
        a[0] += Rational::from((1, 4));
        let a = poly::series_mul(&a, &k, n);
        let mut b: Vec<Rational> = u[..n].to_vec();
        b[0] += &u[0];
        for t in 0..n {
            b[t] += &u[t + 1];
        }
        let b = poly::series_mul(&b, &inv1mx2, n);
        for t in 0..n {
            assert_eq!(w[t][0], Rational::from(&a[t] + &b[t]), "coefficient {t}");
        }
    }

    #[test]
    fn zero_t_entries() {
        let prec = Precision::new(50);
        let OmegaMatrix::Real { entries: e, .. } = omega_zero(10, prec) else { unreachable!() };
        let bits = prec.bits();
        let log2 = Float::with_val(bits, rug::float::Constant::Log2);
        let w11 = Float::with_val(bits, &log2 * 2u32) - Float::with_val(bits, 0.5);
        let z3 = Float::with_val(bits, 3).zeta();
        let w22 = 1 - Float::with_val(bits, z3 * 3u32);
        let tol = Float::with_val(bits, 1e-45);
        assert!(Float::with_val(bits, &e[0][0] - &w11).abs() < tol);
        assert!(Float::with_val(bits, &e[1][1] - &w22).abs() < tol);
        for i in 0..10 {
            for j in 0..10 {
                if (i + j) % 2 == 1 {
                    assert!(e[i][j].is_zero());
                }
            }
        }
    }

    #[test]
    fn text_roundtrip_and_determinism() {
        let z = omega_zero(10, Precision::new(40));
        let t = z.to_text();
        assert_eq!(t, omega_zero(10, Precision::new(40)).to_text());
        assert_eq!(OmegaMatrix::from_text(&t).unwrap(), z);
        let md = generate_md(2, 1, 7, 9).unwrap();
        let w = omega_md(&md, 4).unwrap();
        assert_eq!(OmegaMatrix::from_text(&w.to_text()).unwrap(), w);
    }
}
