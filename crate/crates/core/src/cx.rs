//! Complex numbers over MPFR floats (the system lacks MPC).

use rug::float::Constant;
use rug::Float;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl Cx {
    pub fn new(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    pub fn zero(bits: u32) -> Self {
        Cx { re: Float::with_val(bits, 0), im: Float::with_val(bits, 0) }
    }

    pub fn real(re: Float) -> Self {
        let bits = re.prec();
        Cx { re, im: Float::with_val(bits, 0) }
    }

    pub fn i(bits: u32) -> Self {
        Cx { re: Float::with_val(bits, 0), im: Float::with_val(bits, 1) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        Cx { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.square_ref()) + Float::with_val(self.prec(), self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Cx {
            re: Float::with_val(self.prec(), &self.re / &n),
            im: Float::with_val(self.prec(), -Float::with_val(self.prec(), &self.im / &n)),
        }
    }

    pub fn exp(&self) -> Self {
        let r = Float::with_val(self.prec(), self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        Cx { re: Float::with_val(self.prec(), &r * c), im: Float::with_val(self.prec(), r * s) }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        Cx { re: self.abs().ln(), im: self.arg() }
    }

    pub fn scale(&self, s: &Float) -> Self {
        Cx { re: Float::with_val(self.prec(), &self.re * s), im: Float::with_val(self.prec(), &self.im * s) }
    }

    pub fn mul_i(&self) -> Self {
        Cx { re: Float::with_val(self.prec(), -&self.im), im: self.re.clone() }
    }

    pub fn sinh(&self) -> Self {
        let e = self.exp();
        let m = (-self.clone()).exp();
        (e - m).scale(&Float::with_val(self.prec(), 0.5))
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn pi(bits: u32) -> Float {
        Float::with_val(bits, Constant::Pi)
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, o: Cx) -> Cx {
        Cx { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<'a> Add<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        Cx { re: Float::with_val(self.prec(), &self.re + &o.re), im: Float::with_val(self.prec(), &self.im + &o.im) }
    }
}

impl Sub for Cx {
    type Output = Cx;
    fn sub(self, o: Cx) -> Cx {
        Cx { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<'a> Sub<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn sub(self, o: &Cx) -> Cx {
        Cx { re: Float::with_val(self.prec(), &self.re - &o.re), im: Float::with_val(self.prec(), &self.im - &o.im) }
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx { re: -self.re, im: -self.im }
    }
}

impl<'a> Mul<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        let b = self.prec();
        let ac = Float::with_val(b, &self.re * &o.re);
        let bd = Float::with_val(b, &self.im * &o.im);
        let ad = Float::with_val(b, &self.re * &o.im);
        let bc = Float::with_val(b, &self.im * &o.re);
        Cx { re: ac - bd, im: ad + bc }
    }
}

impl Mul for Cx {
    type Output = Cx;
    fn mul(self, o: Cx) -> Cx {
        &self * &o
    }
}

impl<'a> Div<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn div(self, o: &Cx) -> Cx {
        self * &o.recip()
    }
}

impl Div for Cx {
    type Output = Cx;
    fn div(self, o: Cx) -> Cx {
        &self / &o
    }
}

impl AddAssign<&Cx> for Cx {
    fn add_assign(&mut self, o: &Cx) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&Cx> for Cx {
    fn sub_assign(&mut self, o: &Cx) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

/// `acc += a·b` without temporaries for the product parts beyond four floats.
pub fn mul_add(acc: &mut Cx, a: &Cx, b: &Cx) {
    let p = a * b;
    *acc += &p;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_log_roundtrip() {
        let b = 200;
        let z = Cx::new(Float::with_val(b, 0.3), Float::with_val(b, -1.2));
        let w = z.exp().ln();
        assert!((w - z.clone()).abs() < 1e-55);
        let one = &z * &z.recip();
        assert!((one.re - 1u32).abs() < 1e-55 && one.im.abs() < 1e-55);
    }
}
