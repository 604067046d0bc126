//! Dense univariate polynomials and truncated power series over the rationals.
//!
//! Coefficients are stored in ascending order: `p[i]` multiplies `x^i`.

use rug::Rational;

pub type Poly = Vec<Rational>;

pub fn constant(c: impl Into<Rational>) -> Poly {
    vec![c.into()]
}

/// `x + c`
pub fn linear(c: impl Into<Rational>) -> Poly {
    vec![c.into(), Rational::from(1)]
}

pub fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().map_or(false, |c| *c == 0) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Rational::new());
    }
    p
}

pub fn add(a: &[Rational], b: &[Rational]) -> Poly {
    let n = a.len().max(b.len());
    let mut r = vec![Rational::new(); n];
    for (i, c) in a.iter().enumerate() {
        r[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        r[i] += c;
    }
    r
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Poly {
    let n = a.len().max(b.len());
    let mut r = vec![Rational::new(); n];
    for (i, c) in a.iter().enumerate() {
        r[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        r[i] -= c;
    }
    r
}

pub fn scale(a: &[Rational], s: &Rational) -> Poly {
    a.iter().map(|c| Rational::from(c * s)).collect()
}

pub fn mul(a: &[Rational], b: &[Rational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![Rational::new()];
    }
    let mut r = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] += Rational::from(x * y);
        }
    }
    r
}

pub fn pow(a: &[Rational], e: usize) -> Poly {
    let mut r = constant(1);
    for _ in 0..e {
        r = mul(&r, a);
    }
    r
}

pub fn eval(a: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::new();
    for c in a.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

pub fn deriv(a: &[Rational]) -> Poly {
    if a.len() <= 1 {
        return vec![Rational::new()];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u32)).collect()
}

/// `p(x + c)`
pub fn shift(a: &[Rational], c: &Rational) -> Poly {
    let lin = linear(c.clone());
    let mut r = vec![Rational::new()];
    for ci in a.iter().rev() {
        r = mul(&r, &lin);
        r[0] += ci;
    }
    r
}

/// `Π (x − r)`
pub fn from_roots(roots: &[Rational]) -> Poly {
    let mut r = constant(1);
    for b in roots {
        r = mul(&r, &linear(Rational::from(-b)));
    }
    r
}

/// Exact quotient `p(x)/(x − r)`; `None` when the remainder is nonzero.
pub fn div_linear(p: &[Rational], r: &Rational) -> Option<Poly> {
    let n = p.len();
    if n <= 1 {
        return if p.first().map_or(true, |c| *c == 0) { Some(vec![Rational::new()]) } else { None };
    }
    let mut q = vec![Rational::new(); n - 1];
    let mut rem = p[n - 1].clone();
    for i in (0..n - 1).rev() {
        q[i] = rem.clone();
        rem = Rational::from(&p[i] + Rational::from(&rem * r));
    }
    if rem == 0 {
        Some(q)
    } else {
        None
    }
}

/// Taylor coefficients of `num/den` at 0, truncated to `order` terms.
pub fn series_div(num: &[Rational], den: &[Rational], order: usize) -> Option<Vec<Rational>> {
    let d0 = den.first()?.clone();
    if d0 == 0 {
        return None;
    }
    let mut r = vec![Rational::new(); order];
    for k in 0..order {
        let mut s = num.get(k).cloned().unwrap_or_default();
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            s -= Rational::from(&den[j] * &r[k - j]);
        }
        r[k] = s / &d0;
    }
    Some(r)
}

/// Product of two truncated series.
pub fn series_mul(a: &[Rational], b: &[Rational], order: usize) -> Vec<Rational> {
    let mut r = vec![Rational::new(); order];
    for (i, x) in a.iter().enumerate().take(order) {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order - i) {
            r[i + j] += Rational::from(x * y);
        }
    }
    r
}

/// Series of `1/(c − x)`.
pub fn series_inv_linear(c: &Rational, order: usize) -> Vec<Rational> {
    let inv = Rational::from(c.recip_ref());
    let mut r = Vec::with_capacity(order);
    let mut p = inv.clone();
    for _ in 0..order {
        r.push(p.clone());
        p *= &inv;
    }
    r
}
