//! Precision policy, special constants and double-exponential quadrature.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub decimal_digits: u32,
}

impl Precision {
    pub const ZERO_T_DEFAULT: Precision = Precision { decimal_digits: 50 };
    pub const THERMAL_DEFAULT: Precision = Precision { decimal_digits: 60 };

    pub fn new(decimal_digits: u32) -> Self {
        Precision { decimal_digits: decimal_digits.max(30) }
    }

    /// Mantissa bits, with a small guard.
    pub fn bits(self) -> u32 {
        (self.decimal_digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
    }

    pub fn with_extra(self, digits: u32) -> Self {
        Precision { decimal_digits: self.decimal_digits + digits }
    }

    /// `10^{-k}` at this precision.
    pub fn eps(self, k: i32) -> Float {
        Float::with_val(self.bits(), 10).pow(-k)
    }
}

pub fn float(prec: Precision, v: impl Into<f64>) -> Float {
    Float::with_val(prec.bits(), v.into())
}

pub fn from_rational(prec: Precision, r: &Rational) -> Float {
    Float::with_val(prec.bits(), r)
}

/// Mathematical constants at a given precision.
#[derive(Clone, Debug)]
pub struct Constants {
    pub log2: Float,
    pub pi: Float,
    pub gamma_quarter: Float,
}

pub fn constants(prec: Precision) -> Constants {
    let bits = prec.bits() + 32;
    let log2 = Float::with_val(bits, Constant::Log2);
    let pi = Float::with_val(bits, Constant::Pi);
    // Gauss: Γ(1/4)² = (2π)^{3/2} / agm(1, √2)
    let one = Float::with_val(bits, 1);
    let sqrt2 = Float::with_val(bits, 2).sqrt();
    let agm = one.agm(&sqrt2);
    let two_pi = Float::with_val(bits, &pi * 2u32);
    let num = Float::with_val(bits, two_pi.pow(Float::with_val(bits, 1.5)));
    let gamma_quarter = Float::with_val(bits, num / agm).sqrt();
    let b = prec.bits();
    Constants {
        log2: Float::with_val(b, log2),
        pi: Float::with_val(b, pi),
        gamma_quarter: Float::with_val(b, gamma_quarter),
    }
}

/// `ζ(2k+1)` through the Borwein acceleration of the alternating η series.
pub fn zeta_odd(k: u32, prec: Precision) -> Float {
    assert!(k >= 1, "zeta_odd needs k >= 1");
    let work = prec.with_extra(15);
    let bits = work.bits();
    let s = 2 * k + 1;
    // error ≈ 3/(3+√8)^n, so n ≈ 1.31 · digits
    let n = (work.decimal_digits as f64 * 1.31).ceil() as u32 + 2;
    // d_j = n Σ_{i≤j} (n+i−1)! 4^i / ((n−i)! (2i)!)
    let mut d = Vec::with_capacity(n as usize + 1);
    let mut acc = Rational::new();
    let mut term = Rational::from(1); // i = 0 term of the sum, before the factor n
    for i in 0..=n {
        if i > 0 {
            // ratio t_i / t_{i−1} = (n+i−1)(n−i+1)·4 / ((2i)(2i−1))
            let num = Integer::from(n + i - 1) * Integer::from(n - i + 1) * 4u32;
            let den = Integer::from(2 * i) * Integer::from(2 * i - 1);
            term *= Rational::from((num, den));
        }
        acc += &term;
        d.push(Rational::from(&acc * n));
    }
    let dn = d[n as usize].clone();
    let mut sum = Float::with_val(bits, 0);
    for j in 0..n {
        let coeff = Rational::from(&d[j as usize] - &dn);
        let mut t = Float::with_val(bits, &coeff);
        let p = Float::with_val(bits, j + 1).pow(s);
        t /= p;
        if j % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    let eta = -sum / Float::with_val(bits, &dn);
    let factor = 1 - Float::with_val(bits, 2).pow(1i32 - s as i32);
    Float::with_val(prec.bits(), eta / factor)
}

/// Double-exponential rule on `[−R, R]` with the node map
/// `g(t) = −1 + (4/π)·atan(exp(c·sinh t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DEQuadrature {
    pub c: Rational,
    pub h: Rational,
    pub n: usize,
}

impl Default for DEQuadrature {
    fn default() -> Self {
        DEQuadrature { c: Rational::from((1, 10)), h: Rational::from((1, 20)), n: 200 }
    }
}

impl DEQuadrature {
    pub fn new(c: Rational, h: Rational, n: usize) -> Self {
        DEQuadrature { c, h, n }
    }

    /// Real-axis parameters for half-width `r` (1 or 2).
    pub fn line_for(r: u32) -> Self {
        match r {
            1 => Self::new(Rational::from((1, 10)), Rational::from((1, 20)), 200),
            _ => Self::new(Rational::from((1, 10)), Rational::from((1, 25)), 250),
        }
    }

    /// Contour parameters for half-width `r` (1 or 2).
    pub fn contour_for(r: u32) -> Self {
        match r {
            1 => Self::new(Rational::from((1, 10)), Rational::from((1, 30)), 300),
            _ => Self::new(Rational::from((1, 10)), Rational::from((1, 40)), 400),
        }
    }

    pub fn g(&self, t: &Float) -> Float {
        let bits = t.prec();
        let c = Float::with_val(bits, &self.c);
        let s = Float::with_val(bits, t.sinh_ref()) * c;
        let pi = Float::with_val(bits, Constant::Pi);
        -1 + Float::with_val(bits, s.exp().atan()) * 4u32 / pi
    }

    /// `g'(t) = (2c/π) cosh t / cosh(c sinh t)`
    pub fn g_prime(&self, t: &Float) -> Float {
        let bits = t.prec();
        let c = Float::with_val(bits, &self.c);
        let s = Float::with_val(bits, t.sinh_ref()) * &c;
        let pi = Float::with_val(bits, Constant::Pi);
        Float::with_val(bits, t.cosh_ref()) * c * 2u32 / (pi * s.cosh())
    }

    /// Nodes `R·g(hk)` and weights `h·R·g'(hk)`, k = −N..N.
    ///
    /// Near the endpoints the abscissa is carried with enough extra bits
    /// that `R − |x|` is still resolved; weights use the working precision.
    pub fn nodes(&self, half_width: &Rational, prec: Precision) -> Vec<(Float, Float)> {
        let bits = prec.bits();
        let n = self.n as i64;
        let mut out = Vec::with_capacity(2 * self.n + 1);
        for k in -n..=n {
            let tk = Float::with_val(bits, &self.h * Rational::from(k.abs()));
            let s = Float::with_val(bits, tk.sinh_ref()) * Float::with_val(bits, &self.c);
            // beyond a few times the working precision the weight is negligible
            let extra = ((s.to_f64() / std::f64::consts::LN_2).ceil().max(0.0) as u32).min(3 * bits) + 8;
            let xb = bits + extra;
            let sx = Float::with_val(xb, Float::with_val(xb, &tk).sinh()) * Float::with_val(xb, &self.c);
            let pi = Float::with_val(xb, Constant::Pi);
            // 1 − g(|t|) = (4/π)·atan(e^{−s})
            let gap = Float::with_val(xb, (-sx).exp().atan()) * 4u32 / pi;
            let mut x: Float = (1 - gap) * Float::with_val(xb, half_width);
            if k < 0 {
                x = -x;
            }
            let w = self.g_prime(&tk) * Float::with_val(bits, &self.h) * Float::with_val(bits, half_width);
            out.push((x, w));
        }
        out
    }
}

/// `∫_{−R}^{R} f(x) dx` by the double-exponential rule.
pub fn de_integrate<F>(f: F, half_width: &Rational, quad: &DEQuadrature, prec: Precision) -> Result<Float>
where
    F: Fn(&Float) -> Result<Float>,
{
    let bits = prec.bits();
    let mut sum = Float::with_val(bits, 0);
    let n = quad.n as i64;
    for (i, (x, w)) in quad.nodes(half_width, prec).into_iter().enumerate() {
        let index = i as i64 - n;
        let v = f(&x).map_err(|e| Error::Quadrature { index, reason: e.to_string() })?;
        if !v.is_finite() {
            return Err(Error::Quadrature { index, reason: "non-finite integrand".into() });
        }
        sum += Float::with_val(bits, v * w);
        if !sum.is_finite() {
            return Err(Error::Quadrature { index, reason: "non-finite partial sum".into() });
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Float, b: &Float, digits: i32) -> bool {
        let d = Float::with_val(a.prec(), a - b).abs();
        d < Float::with_val(a.prec(), 10).pow(-digits)
    }

    #[test]
    fn zeta_matches_mpfr() {
        let p = Precision::new(60);
        for k in 1..=10 {
            let z = zeta_odd(k, p);
            let oracle = Float::with_val(p.bits() + 64, 2 * k + 1).zeta();
            assert!(close(&z, &Float::with_val(p.bits(), oracle), 58), "k={k}");
        }
        let z21 = zeta_odd(10, p);
        assert!(z21 > 1 && z21 < 1.000001);
    }

    #[test]
    fn gamma_quarter_matches_mpfr() {
        let p = Precision::new(50);
        let c = constants(p);
        let g = Float::with_val(p.bits() + 32, 0.25).gamma();
        assert!(close(&c.gamma_quarter, &Float::with_val(p.bits(), g), 48));
        let e = Float::with_val(p.bits(), &c.log2 * 2u32).exp();
        assert!(close(&e, &Float::with_val(p.bits(), 4), 48));
    }

    #[test]
    fn g_is_odd_and_vanishes_at_zero() {
        let q = DEQuadrature::default();
        let p = Precision::new(40);
        assert!(q.g(&float(p, 0.0)).is_zero());
        let t = float(p, 0.7);
        let s = q.g(&t) + q.g(&-t.clone());
        assert!(s.abs() < 1e-40);
        assert!(q.g_prime(&t) > 0);
    }

    #[test]
    fn long_rules_stay_cheap() {
        // t reaches 20: the endpoint gap is below 2^(−3·10⁷)
        let q = DEQuadrature::new(Rational::from((1, 10)), Rational::from((1, 8)), 160);
        let nodes = q.nodes(&Rational::from(2), Precision::new(30));
        assert_eq!(nodes.len(), 321);
        assert!(nodes.iter().all(|(x, w)| x.clone().abs() <= 2 && w.is_finite()));
    }
}
