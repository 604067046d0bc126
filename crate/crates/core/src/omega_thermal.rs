//! Finite-temperature `ω_T` from the nonlinear integral equation for `𝔞`.
//!
//! Variables are rotated, `λ = ix`, so the Bethe roots of the quantum
//! transfer matrix are real and accumulate at `x = 0`. The closed contour is
//! the ellipse `x(φ) = −R cos φ − i t sin φ`. `C₋` is its lower arc and `C₊`
//! the upper arc, both traversed from `−R` to `R`.
//!
//! The kernel, the resolvent, `F` and `G` satisfy `φ(x̄) = conj φ(x)`, and
//! `𝔞(x̄) = 1/conj 𝔞(x)`. So only values on `C₊` are stored, and `C₋`
//! values come from the mirrored node. The driving terms `h₀` and `f` lack
//! this symmetry and are evaluated on `C₋` directly.
//!
//! The stages are
//!
//! 1. the resolvent `R` of `I − K` on `[−R, R]`, continued to the contour;
//! 2. `log 𝔞` on `C₊` from the Destri–de Vega form of the equation;
//! 3. the Taylor slices `F_k` of `F(x, y)` in `y`, split as `F₀ + ΔF`;
//! 4. `ω = ω₁ + ω₂`, where `ω₁` does not depend on the temperature.
//!
//! Stages 1, 3 and the `ω₁` part of 4 are shared by all temperatures for a
//! given half-width; see [`ThermalSolver`].

use crate::cx::Cx;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numerics::{DEQuadrature, Precision};
use crate::omega_exact::{omega_zero_coefficients, Backend, OmegaMatrix, DEFAULT_ORDER};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use std::fmt::Write as _;

/// Highest temperature handled; beyond it `|𝔞| < 1` on `C₊` is not assured.
pub fn max_temperature() -> Rational {
    Rational::from((3, 8))
}

/// Change of variable for the two exterior tails `(R, ∞)` and `(−∞, −R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMap {
    /// `z = R + exp(t − e^{−t})`
    ExpSinh,
    /// `z = R + exp((π/2) sinh t)`
    DoubleExp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailRule {
    pub map: TailMap,
    pub h: Rational,
    pub t_min: Rational,
    pub t_max: Rational,
}

impl TailRule {
    pub fn exp_sinh() -> Self {
        TailRule {
            map: TailMap::ExpSinh,
            h: Rational::from((1, 64)),
            t_min: Rational::from((-11, 2)),
            t_max: Rational::from((9, 2)),
        }
    }

    pub fn double_exp() -> Self {
        TailRule {
            map: TailMap::DoubleExp,
            h: Rational::from((1, 64)),
            t_min: Rational::from((-23, 4)),
            t_max: Rational::from((9, 4)),
        }
    }

    /// Offsets `u > 0` (the node is `R + u`) and weights `du`.
    pub fn nodes(&self, bits: u32) -> Vec<(Float, Float)> {
        let lo = Rational::from(&self.t_min / &self.h).floor().numer().to_i64().unwrap_or(0);
        let hi = Rational::from(&self.t_max / &self.h).ceil().numer().to_i64().unwrap_or(0);
        let h = Float::with_val(bits, &self.h);
        let half_pi = Float::with_val(bits, Constant::Pi) / 2u32;
        (lo..=hi)
            .map(|k| {
                let t = Float::with_val(bits, &h * k);
                match self.map {
                    TailMap::ExpSinh => {
                        let e = Float::with_val(bits, (-t.clone()).exp());
                        let u = Float::with_val(bits, &t - &e).exp();
                        let w = Float::with_val(bits, &u * (e + 1u32)) * &h;
                        (u, w)
                    }
                    TailMap::DoubleExp => {
                        let u = (Float::with_val(bits, t.sinh_ref()) * &half_pi).exp();
                        let w = Float::with_val(bits, t.cosh_ref()) * &u * &half_pi * &h;
                        (u, w)
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalConfig {
    pub temperature: Rational,
    pub half_width: u32,
    pub t_ellipse: Rational,
    pub quad_line: DEQuadrature,
    pub quad_contour: DEQuadrature,
    pub tail: TailRule,
    pub prec: Precision,
    pub order: usize,
}

impl ThermalConfig {
    pub fn new(temperature: Rational, half_width: u32, prec: Precision) -> Self {
        ThermalConfig {
            temperature,
            half_width,
            t_ellipse: Rational::from((2, 5)),
            quad_line: DEQuadrature::line_for(half_width),
            quad_contour: DEQuadrature::contour_for(half_width),
            tail: TailRule::exp_sinh(),
            prec,
            order: DEFAULT_ORDER,
        }
    }

    /// `R = 2` below `T = 1/10` and `R = 1` from there up.
    pub fn for_temperature(temperature: Rational, prec: Precision) -> Self {
        let r = if temperature < Rational::from((1, 10)) { 2 } else { 1 };
        Self::new(temperature, r, prec)
    }

    pub fn bits(&self) -> u32 {
        self.prec.bits()
    }

    /// Convergence threshold `10^{−(digits−5)}`.
    pub fn tolerance(&self) -> Float {
        self.prec.eps(self.prec.decimal_digits as i32 - 5)
    }

    fn validate(&self) -> Result<()> {
        if self.half_width == 0 {
            return Err(Error::Refused("half-width must be positive".into()));
        }
        if self.t_ellipse <= 0 || self.t_ellipse >= 1 {
            return Err(Error::Refused("ellipse parameter must lie in (0, 1)".into()));
        }
        if self.order == 0 {
            return Err(Error::Refused("order must be positive".into()));
        }
        Ok(())
    }
}

fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

fn kernel_real(x: &Float, pi: &Float) -> Float {
    let bits = x.prec();
    let d = Float::with_val(bits, x.square_ref()) + 1u32;
    -Float::with_val(bits, d * pi).recip()
}

/// `K(z) = −1/(π(1 + z²))`
fn kernel(z: &Cx, pi: &Float) -> Cx {
    let mut d = z * z;
    d.re += 1u32;
    -d.scale(pi).recip()
}

fn cx_sub_real(z: &Cx, r: &Float) -> Cx {
    Cx::new(Float::with_val(z.prec(), &z.re - r), z.im.clone())
}

fn cx_abs_f64(z: &Cx) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

fn cx_to_c64(z: &Cx) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

/// `h₀(x) = 1/(x(x + i))`
fn h0(x: &Cx) -> Cx {
    let mut xi = x.clone();
    xi.im += 1u32;
    (x * &xi).recip()
}

/// `f_j(z) = z^{−j−1} − (z + i)^{−j−1}`, the Taylor slices in `x` of
/// `f(z − x)` with `f(u) = i/(u(u + i))`.
fn f_slices(z: &Cx, order: usize) -> Vec<Cx> {
    let mut zi = z.clone();
    zi.im += 1u32;
    let a = z.recip();
    let b = zi.recip();
    let mut pa = a.clone();
    let mut pb = b.clone();
    let mut out = Vec::with_capacity(order);
    for _ in 0..order {
        out.push(&pa - &pb);
        pa = &pa * &a;
        pb = &pb * &b;
    }
    out
}

/// Taylor coefficients in `y` of `F₀(z − y) = π / sinh(π(z − y))`.
pub fn f0_slices(z: &Cx, order: usize) -> Vec<Cx> {
    let bits = z.prec();
    let p = pi(bits);
    let pz = z.scale(&p);
    let e = pz.exp();
    let m = (-pz).exp();
    let half = Float::with_val(bits, 0.5);
    let sh = (&e - &m).scale(&half);
    let ch = (&e + &m).scale(&half);
    // sinh(π(z−y)) = sinh(πz)cosh(πy) − cosh(πz)sinh(πy)
    let mut c = Vec::with_capacity(order);
    let mut pk = Float::with_val(bits, 1);
    for k in 0..order {
        if k > 0 {
            pk *= &p;
            pk /= k as u32;
        }
        c.push(if k % 2 == 0 { sh.scale(&pk) } else { -ch.scale(&pk) });
    }
    let inv0 = c[0].recip();
    let mut out: Vec<Cx> = Vec::with_capacity(order);
    out.push(inv0.clone());
    for k in 1..order {
        let mut s = Cx::zero(bits);
        for j in 1..=k {
            s += &(&c[j] * &out[k - j]);
        }
        out.push(-(&s * &inv0));
    }
    out.into_iter().map(|v| v.scale(&p)).collect()
}

/// Resolvent of `I − K` on `[−R, R]` and its continuation to the contour.
pub struct Resolvent {
    pub half_width: u32,
    bits: u32,
    pub line: Vec<Float>,
    pub line_w: Vec<Float>,
    /// `C₊` nodes from `−R` to `R` and the weights `dx`.
    pub cp: Vec<Cx>,
    pub cw: Vec<Cx>,
    /// `R(y_a, y_b)` on the line grid.
    pub rll: Vec<Vec<Float>>,
    /// `R(x_i, y_b)` for `x_i ∈ C₊`.
    pub rcl: Vec<Vec<Cx>>,
    /// `R(x_i, x_j)` and `R(x_i, x̄_j)` for `x_i, x_j ∈ C₊`.
    pub rpp: Vec<Vec<Cx>>,
    pub rpm: Vec<Vec<Cx>>,
}

fn contour_nodes(cfg: &ThermalConfig) -> (Vec<Cx>, Vec<Cx>) {
    let bits = cfg.bits();
    let r = Float::with_val(bits, cfg.half_width);
    let t = Float::with_val(bits, &cfg.t_ellipse);
    let half_pi = pi(bits) / 2u32;
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for (u, w) in cfg.quad_contour.nodes(&Rational::from(1), cfg.prec) {
        let phi = Float::with_val(bits, Float::with_val(bits, u + 1u32) * &half_pi);
        let dphi = Float::with_val(bits, w * &half_pi);
        let (s, c) = phi.sin_cos(Float::new(bits));
        // x = −R cos φ + i t sin φ,  dx = (R sin φ + i t cos φ) dφ
        let x = Cx::new(-Float::with_val(bits, &r * &c), Float::with_val(bits, &t * &s));
        let dx = Cx::new(Float::with_val(bits, &r * &s) * &dphi, Float::with_val(bits, &t * &c) * &dphi);
        xs.push(x);
        ws.push(dx);
    }
    (xs, ws)
}

/// Solves `(I − S) X = S` for symmetric positive-definite `I − S`.
fn cholesky_solve(a: &[Vec<Float>], b: &[Vec<Float>], exec: Exec) -> Result<Vec<Vec<Float>>> {
    let n = a.len();
    let bits = a[0][0].prec();
    let mut l = vec![vec![Float::with_val(bits, 0); n]; n];
    for j in 0..n {
        let mut d = a[j][j].clone();
        for k in 0..j {
            d -= &l[j][k] * &l[j][k];
        }
        if d <= 0 {
            return Err(Error::Singular(format!("line operator not positive definite at {j}")));
        }
        let d = d.sqrt();
        let inv = Float::with_val(bits, d.recip_ref());
        l[j][j] = d;
        let (head, tail) = l.split_at_mut(j + 1);
        let lj = &head[j];
        for (off, li) in tail.iter_mut().enumerate() {
            let i = j + 1 + off;
            let mut s = a[i][j].clone();
            for k in 0..j {
                s -= &li[k] * &lj[k];
            }
            li[j] = s * &inv;
        }
    }
    // columns of the right-hand side are independent
    let cols = exec.map_range(n, |c| {
        let mut y: Vec<Float> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = b[i][c].clone();
            for k in 0..i {
                s -= &l[i][k] * &y[k];
            }
            y.push(s / &l[i][i]);
        }
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s -= &l[k][i] * &y[k];
            }
            y[i] = s / &l[i][i];
        }
        y
    });
    Ok((0..n).map(|i| (0..n).map(|c| cols[c][i].clone()).collect()).collect())
}

/// Stage 1. Independent of the temperature.
pub fn solve_resolvent(cfg: &ThermalConfig, exec: Exec) -> Result<Resolvent> {
    cfg.validate()?;
    let bits = cfg.bits();
    let p = pi(bits);
    let hw = Rational::from(cfg.half_width);
    let (line, line_w): (Vec<Float>, Vec<Float>) =
        cfg.quad_line.nodes(&hw, cfg.prec).into_iter().map(|(x, w)| (Float::with_val(bits, x), w)).unzip();
    let n = line.len();
    let d: Vec<Float> = line_w.iter().map(|w| Float::with_val(bits, w.sqrt_ref())).collect();
    // S = D K D, solve (I − S) X = S, then R = D⁻¹ X D⁻¹
    let s: Vec<Vec<Float>> = exec.map_range(n, |i| {
        (0..n)
            .map(|j| {
                let k = kernel_real(&Float::with_val(bits, &line[i] - &line[j]), &p);
                k * &d[i] * &d[j]
            })
            .collect()
    });
    let a: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = Float::with_val(bits, -&s[i][j]);
                    if i == j {
                        v + 1u32
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let x = cholesky_solve(&a, &s, exec)?;
    drop(a);
    let rll: Vec<Vec<Float>> =
        (0..n).map(|i| (0..n).map(|j| Float::with_val(bits, &x[i][j] / &d[i]) / &d[j]).collect()).collect();
    drop(x);

    let (cp, cw) = contour_nodes(cfg);
    let m = cp.len();
    // R(x, y) = K(x − y) + Σ_l K(x − z_l) w_l R(z_l, y)
    let rcl: Vec<Vec<Cx>> = exec.map_range(m, |i| {
        let a: Vec<Cx> = (0..n).map(|l| kernel(&cx_sub_real(&cp[i], &line[l]), &p).scale(&line_w[l])).collect();
        let mut re: Vec<Float> = Vec::with_capacity(n);
        let mut im: Vec<Float> = Vec::with_capacity(n);
        for j in 0..n {
            let k = kernel(&cx_sub_real(&cp[i], &line[j]), &p);
            re.push(k.re);
            im.push(k.im);
        }
        for (l, al) in a.iter().enumerate() {
            let row = &rll[l];
            for j in 0..n {
                re[j] += &al.re * &row[j];
                im[j] += &al.im * &row[j];
            }
        }
        re.into_iter().zip(im).map(|(r, i)| Cx::new(r, i)).collect()
    });
    // B[l][j] = w_l K(z_l − x_j); for x̄_j the factor is conj B[l][j]
    let b: Vec<Vec<Cx>> = exec.map_range(n, |l| {
        (0..m)
            .map(|j| {
                let z = Cx::new(Float::with_val(bits, &line[l] - &cp[j].re), Float::with_val(bits, -&cp[j].im));
                kernel(&z, &p).scale(&line_w[l])
            })
            .collect()
    });
    // upper triangles; R₊₊ is symmetric and R₊₋ Hermitian
    let upper: Vec<(Vec<Cx>, Vec<Cx>)> = exec.map_range(m, |i| {
        let len = m - i;
        let zero = || vec![Float::with_val(bits, 0); len];
        let (mut p1, mut p2, mut p3, mut p4) = (zero(), zero(), zero(), zero());
        for l in 0..n {
            let a = &rcl[i][l];
            let row = &b[l][i..];
            for (j, bl) in row.iter().enumerate() {
                p1[j] += &a.re * &bl.re;
                p2[j] += &a.im * &bl.im;
                p3[j] += &a.re * &bl.im;
                p4[j] += &a.im * &bl.re;
            }
        }
        let mut pp = Vec::with_capacity(len);
        let mut pm = Vec::with_capacity(len);
        for j in 0..len {
            let xj = &cp[i + j];
            let kpp = kernel(&(&cp[i] - xj), &p);
            let kpm = kernel(&(&cp[i] - &xj.conj()), &p);
            pp.push(Cx::new(
                kpp.re + Float::with_val(bits, &p1[j] - &p2[j]),
                kpp.im + Float::with_val(bits, &p3[j] + &p4[j]),
            ));
            pm.push(Cx::new(
                kpm.re + Float::with_val(bits, &p1[j] + &p2[j]),
                kpm.im + Float::with_val(bits, &p4[j] - &p3[j]),
            ));
        }
        (pp, pm)
    });
    drop(b);
    let mut rpp = vec![vec![Cx::zero(bits); m]; m];
    let mut rpm = vec![vec![Cx::zero(bits); m]; m];
    for (i, (pp, pm)) in upper.into_iter().enumerate() {
        for (off, (a, c)) in pp.into_iter().zip(pm).enumerate() {
            let j = i + off;
            rpp[j][i] = a.clone();
            rpm[j][i] = c.conj();
            rpp[i][j] = a;
            rpm[i][j] = c;
        }
    }
    Ok(Resolvent { half_width: cfg.half_width, bits, line, line_w, cp, cw, rll, rcl, rpp, rpm })
}

impl Resolvent {
    pub fn line_len(&self) -> usize {
        self.line.len()
    }

    pub fn contour_len(&self) -> usize {
        self.cp.len()
    }

    /// `max |R(a,b) − R(b,a)|` on the line grid.
    pub fn asymmetry(&self) -> Float {
        let n = self.line.len();
        let mut worst = Float::with_val(self.bits, 0);
        for i in 0..n {
            for j in i + 1..n {
                let d = Float::with_val(self.bits, &self.rll[i][j] - &self.rll[j][i]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest defect of `R(y_a, y_b) = K(y_a − y_b) + ∫_{C₋} K(y_a − z) R(z, y_b) dz`
    /// over the sampled line nodes `samples`. This is the line equation with
    /// the integral moved onto the lower arc.
    pub fn cauchy_defect(&self, samples: &[usize]) -> Float {
        let bits = self.bits;
        let p = pi(bits);
        let mut worst = Float::with_val(bits, 0);
        for &a in samples {
            for &b in samples {
                let mut acc = Cx::real(kernel_real(&Float::with_val(bits, &self.line[a] - &self.line[b]), &p));
                for (i, x) in self.cp.iter().enumerate() {
                    // z = x̄_i, dz = conj w_i, R(x̄_i, y_b) = conj R(x_i, y_b)
                    let z = x.conj();
                    let k = kernel(&Cx::new(Float::with_val(bits, &self.line[a] - &z.re), -z.im.clone()), &p);
                    let term = &(&k * &self.cw[i].conj()) * &self.rcl[i][b].conj();
                    acc += &term;
                }
                let d = Float::with_val(bits, &acc.re - &self.rll[a][b]).abs();
                let d = d.max(&acc.im.clone().abs());
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// `Σ_j R(x_i, x_j) u_j + Σ_j R(x_i, x̄_j) conj(v_j)` over the columns in `active`.
    fn apply(&self, i: usize, u: &[Cx], v: &[Cx], active: &[usize]) -> Cx {
        let bits = self.bits;
        let mut re = Float::with_val(bits, 0);
        let mut im = Float::with_val(bits, 0);
        let (rp, rm) = (&self.rpp[i], &self.rpm[i]);
        for &j in active {
            let (a, x) = (&rp[j], &u[j]);
            re += &a.re * &x.re;
            re -= &a.im * &x.im;
            im += &a.re * &x.im;
            im += &a.im * &x.re;
            // R · conj(v)
            let (c, y) = (&rm[j], &v[j]);
            re += &c.re * &y.re;
            re += &c.im * &y.im;
            im += &c.im * &y.re;
            im -= &c.re * &y.im;
        }
        Cx::new(re, im)
    }
}

/// `log 𝔞` on `C₊`.
#[derive(Clone, Debug)]
pub struct AFrak {
    pub log_a: Vec<Cx>,
    pub iterations: usize,
    /// `(1/i) log 𝔞` at the node nearest `x = R`.
    pub log_a_at_r: Float,
    /// `max |𝔞|` over `C₊`.
    pub max_abs: Float,
}

fn negligible(bits: u32) -> Float {
    Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 64))
}

/// Stage 2: fixed-point iteration of the Destri–de Vega equation
/// `log 𝔞 = h/T − ∫_{C₊} R log(1+𝔞) + ∫_{C₋} R log(1+𝔞̄)` with `h = (I+R)h₀`.
pub fn solve_afrak_nlie(cfg: &ThermalConfig, res: &Resolvent, exec: Exec) -> Result<AFrak> {
    let bits = res.bits;
    if cfg.temperature <= 0 {
        return Err(Error::Refused("temperature must be positive".into()));
    }
    if cfg.temperature > max_temperature() {
        return Err(Error::Refused(format!("temperature above {}", max_temperature())));
    }
    let m = res.cp.len();
    let inv_t = Float::with_val(bits, Rational::from(cfg.temperature.recip_ref()));
    // h(x_i) = h₀(x_i) + Σ_j R(x_i, x̄_j) conj(w_j) h₀(x̄_j)
    // h₀ is not real on the real axis, so the C₋ values are taken directly
    let hv: Vec<Cx> = (0..m).map(|j| &res.cw[j] * &h0(&res.cp[j].conj()).conj()).collect();
    let all: Vec<usize> = (0..m).collect();
    let zero = vec![Cx::zero(bits); m];
    let drive: Vec<Cx> = exec.map_range(m, |i| {
        let corr = res.apply(i, &zero, &hv, &all);
        (&h0(&res.cp[i]) + &corr).scale(&inv_t)
    });
    let tol = cfg.tolerance();
    let tiny = negligible(bits);
    let mut ell = drive.clone();
    let mut last = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=500 {
        let v: Vec<Cx> = (0..m)
            .map(|j| {
                let mut a = ell[j].exp();
                a.re += 1u32;
                &res.cw[j] * &a.ln()
            })
            .collect();
        let active: Vec<usize> = (0..m).filter(|&j| v[j].re.clone().abs() > tiny || v[j].im.clone().abs() > tiny).collect();
        let neg: Vec<Cx> = v.iter().map(|x| -x.clone()).collect();
        // −Σ R₊₊ v + Σ R₊₋ conj(v)
        let next: Vec<Cx> = exec.map_range(m, |i| &drive[i] + &res.apply(i, &neg, &v, &active));
        let mut diff = Float::with_val(bits, 0);
        for (a, b) in next.iter().zip(&ell) {
            let d = (a - b).abs();
            if !d.is_finite() {
                return Err(Error::NoConvergence("log 𝔞 iteration produced a non-finite value".into()));
            }
            if d > diff {
                diff = d;
            }
        }
        ell = next;
        if diff < tol {
            return finish_afrak(ell, it);
        }
        let df = diff.to_f64();
        growth = if df > last { growth + 1 } else { 0 };
        if growth >= 5 {
            return Err(Error::NoConvergence(format!(
                "log 𝔞 iteration diverges (step {df:e} after {it} iterations); temperature too high"
            )));
        }
        last = df;
    }
    Err(Error::NoConvergence("log 𝔞 iteration cap of 500 reached".into()))
}

fn finish_afrak(log_a: Vec<Cx>, iterations: usize) -> Result<AFrak> {
    let bits = log_a[0].prec();
    let at_r = log_a.last().expect("contour nodes").im.clone();
    let mut max_abs = Float::with_val(bits, 0);
    for l in &log_a {
        let a = Float::with_val(bits, l.re.exp_ref());
        if a > max_abs {
            max_abs = a;
        }
    }
    let p = pi(bits);
    if Float::with_val(bits, at_r.abs_ref()) >= p {
        return Err(Error::ThermalCheck(format!(
            "|log 𝔞(R)/i| = {} is not below π; the half-width R must be bigger",
            at_r.to_f64()
        )));
    }
    Ok(AFrak { log_a, iterations, log_a_at_r: at_r, max_abs })
}

/// Tail quadrature of `∫_{|z|>R} φ(z) F₀_k(z) dz`. Returns the two sums
/// of `(φ(R+u), φ(−R−u))` against `F₀` slices, per order.
struct Tails {
    /// `(z, weight, s_k(z))` for `z = R + u`; on `−z` the slices are `−(−1)^k s_k(z)`
    nodes: Vec<(Float, Float, Vec<Float>)>,
}

impl Tails {
    fn new(rule: &TailRule, half_width: u32, bits: u32, order: usize) -> Self {
        let r = Float::with_val(bits, half_width);
        let nodes = rule
            .nodes(bits)
            .into_iter()
            .map(|(u, w)| {
                let z = Float::with_val(bits, &r + &u);
                let s = f0_slices(&Cx::real(z.clone()), order).into_iter().map(|c| c.re).collect();
                (z, w, s)
            })
            .collect();
        Tails { nodes }
    }

    /// `d_k(x) = −∫_{tails} K(x − z) F₀_k(z) dz`
    fn d(&self, x: &Cx, order: usize) -> Vec<Cx> {
        let bits = x.prec();
        let p = pi(bits);
        let mut out = vec![Cx::zero(bits); order];
        for (z, w, s) in &self.nodes {
            let kp = kernel(&cx_sub_real(x, z), &p).scale(w);
            let mut xm = x.clone();
            xm.re += z;
            let km = kernel(&xm, &p).scale(w);
            for k in 0..order {
                // + side: −K(x−z) s_k ; − side: −K(x+z)(−(−1)^k s_k)
                let mut t = if k % 2 == 0 { &km - &kp } else { -(&km + &kp) };
                t = t.scale(&s[k]);
                out[k] += &t;
            }
        }
        out
    }

    /// `∫_{tails} f_j(z) F₀_k(z) dz`
    fn f_f0(&self, order: usize, bits: u32) -> Vec<Vec<Cx>> {
        let mut out = vec![vec![Cx::zero(bits); order]; order];
        for (z, w, s) in &self.nodes {
            let fp = f_slices(&Cx::real(z.clone()), order);
            let fm = f_slices(&Cx::real(Float::with_val(bits, -z)), order);
            for j in 0..order {
                for k in 0..order {
                    let t = if k % 2 == 0 { &fp[j] - &fm[j] } else { &fp[j] + &fm[j] };
                    out[j][k] += &t.scale(&Float::with_val(bits, &s[k] * w));
                }
            }
        }
        out
    }
}

/// Taylor slices of `F(x, y)` in `y` on `C₊` and on the line.
pub struct FFamily {
    pub order: usize,
    /// `ΔF_k(x_i)` for `x_i ∈ C₊`, indexed `[k][i]`.
    pub delta_c: Vec<Vec<Cx>>,
    /// `F_k(x_i) = F₀_k(x_i) + ΔF_k(x_i)` on `C₊`.
    pub f_c: Vec<Vec<Cx>>,
    /// `ΔF_k` on the line nodes.
    pub delta_line: Vec<Vec<Float>>,
    /// `∫_{tails} f_j F₀_k`, indexed `[j][k]`.
    tail_ff0: Vec<Vec<Cx>>,
}

/// Stage 3: `ΔF = d + ∫ R d` with `d` from the exterior tails.
pub fn compute_f_family(cfg: &ThermalConfig, res: &Resolvent, exec: Exec) -> FFamily {
    let bits = res.bits;
    let order = cfg.order;
    let tails = Tails::new(&cfg.tail, res.half_width, bits, order);
    let n = res.line.len();
    let d_line: Vec<Vec<Float>> = exec.map_range(n, |l| {
        tails.d(&Cx::real(res.line[l].clone()), order).into_iter().map(|c| c.re).collect()
    });
    // weighted by the line measure, indexed [l][k]
    let wd: Vec<Vec<Float>> =
        (0..n).map(|l| d_line[l].iter().map(|v| Float::with_val(bits, v * &res.line_w[l])).collect()).collect();
    let delta_line: Vec<Vec<Float>> = (0..order)
        .map(|k| {
            (0..n)
                .map(|a| {
                    let mut s = d_line[a][k].clone();
                    for l in 0..n {
                        s += &res.rll[a][l] * &wd[l][k];
                    }
                    s
                })
                .collect()
        })
        .collect();
    let m = res.cp.len();
    let per_node: Vec<(Vec<Cx>, Vec<Cx>)> = exec.map_range(m, |i| {
        let x = &res.cp[i];
        let mut d = tails.d(x, order);
        for (l, r) in res.rcl[i].iter().enumerate() {
            for k in 0..order {
                d[k].re += &r.re * &wd[l][k];
                d[k].im += &r.im * &wd[l][k];
            }
        }
        let f0 = f0_slices(x, order);
        let f = d.iter().zip(&f0).map(|(a, b)| a + b).collect();
        (d, f)
    });
    let mut delta_c = vec![Vec::with_capacity(m); order];
    let mut f_c = vec![Vec::with_capacity(m); order];
    for (d, f) in per_node {
        for (k, (a, b)) in d.into_iter().zip(f).enumerate() {
            delta_c[k].push(a);
            f_c[k].push(b);
        }
    }
    let tail_ff0 = tails.f_f0(order, bits);
    FFamily { order, delta_c, f_c, delta_line, tail_ff0 }
}

/// `ω₁` in the `x` convention: `entries[j][k]` multiplies `x^j y^k`.
#[derive(Clone, Debug)]
pub struct Omega1 {
    pub entries: Vec<Vec<Cx>>,
    /// `max |ω₁[j][k]|` over `j + k` odd; these vanish identically.
    pub parity: Float,
}

/// Stage 4a:
/// `ω₁(x,y) = ω₀(i(x−y)) + (1/2π)∫_{tails} f(z−x)F₀(z−y)dz − (1/2π)∫_{C₋} f(z−x)ΔF(z,y)dz`.
pub fn omega1(cfg: &ThermalConfig, res: &Resolvent, ff: &FFamily) -> Omega1 {
    let bits = res.bits;
    let order = cfg.order;
    let inv_2pi = Float::with_val(bits, pi(bits) * 2u32).recip();
    let c0 = omega_zero_coefficients(order, cfg.prec);
    let mut e = vec![vec![Cx::zero(bits); order]; order];
    for j in 0..order {
        for k in 0..order {
            if (j + k) % 2 == 0 {
                let mm = (j + k) / 2;
                let b = Integer::from(Integer::binomial_u((j + k) as u32, j as u32));
                let mut v = Float::with_val(bits, &c0[mm] * &b);
                if (mm + k) % 2 == 1 {
                    v = -v;
                }
                e[j][k].re += &v;
            }
            e[j][k] += &ff.tail_ff0[j][k].scale(&inv_2pi);
        }
    }
    // −(1/2π) Σ_i conj(w_i) f_j(x̄_i) conj(ΔF_k(x_i))
    for (i, x) in res.cp.iter().enumerate() {
        let fs = f_slices(&x.conj(), order);
        let w = res.cw[i].conj();
        for k in 0..order {
            let t = &w * &ff.delta_c[k][i].conj();
            for j in 0..order {
                e[j][k] -= &(&fs[j] * &t).scale(&inv_2pi);
            }
        }
    }
    let mut parity = Float::with_val(bits, 0);
    for j in 0..order {
        for k in 0..order {
            if (j + k) % 2 == 1 {
                let a = e[j][k].abs();
                if a > parity {
                    parity = a;
                }
            }
        }
    }
    Omega1 { entries: e, parity }
}

/// The same `ω₁` from the unreduced form
/// `−(1/2π)∫_{C₋} f(z−x) F(z,y) dz + (π/2) K(x−y)` with `F = (I + R) f`.
/// Double poles at the contour make this much less accurate; it serves as
/// a cross-check on low orders.
pub fn omega1_naive(cfg: &ThermalConfig, res: &Resolvent) -> Vec<Vec<Cx>> {
    let bits = res.bits;
    let order = cfg.order;
    let m = res.cp.len();
    let inv_2pi = Float::with_val(bits, pi(bits) * 2u32).recip();
    // slices on C₋ at the mirrored nodes
    let fm: Vec<Vec<Cx>> = res.cp.iter().map(|x| f_slices(&x.conj(), order)).collect();
    let mut e = vec![vec![Cx::zero(bits); order]; order];
    for i in 0..m {
        // F_k(x̄_i) = f_k(x̄_i) + Σ_j R(x̄_i, x̄_j) conj(w_j) f_k(x̄_j), R(x̄_i, x̄_j) = conj R₊₊
        let mut fk: Vec<Cx> = fm[i].clone();
        for j in 0..m {
            let r = &res.rpp[i][j].conj() * &res.cw[j].conj();
            for k in 0..order {
                fk[k] += &(&r * &fm[j][k]);
            }
        }
        let w = res.cw[i].conj();
        for j in 0..order {
            let a = &fm[i][j] * &w;
            for k in 0..order {
                e[j][k] -= &(&a * &fk[k]).scale(&inv_2pi);
            }
        }
    }
    // (π/2) K(u) = −½ Σ (−1)^m u^{2m}
    for j in 0..order {
        for k in 0..order {
            if (j + k) % 2 == 0 {
                let mm = (j + k) / 2;
                let b = Float::with_val(bits, Integer::from(Integer::binomial_u((j + k) as u32, j as u32))) / 2u32;
                if (mm + k) % 2 == 0 {
                    e[j][k].re -= &b;
                } else {
                    e[j][k].re += &b;
                }
            }
        }
    }
    e
}

/// Run metadata recorded next to a thermal ω file.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalMeta {
    pub temperature: Rational,
    pub half_width: u32,
    pub t_ellipse: Rational,
    pub line: (Rational, usize),
    pub contour: (Rational, usize),
    pub nlie_iterations: usize,
    pub refinements: usize,
    pub parity: f64,
    pub log_a_at_r: f64,
    pub imag_residue: f64,
}

pub struct ThermalOmega {
    pub omega: OmegaMatrix,
    pub meta: ThermalMeta,
    /// `ω₁` and `ω₂` separately, `x` convention.
    pub omega1: Vec<Vec<Cx>>,
    pub omega2: Vec<Vec<Cx>>,
}

impl ThermalOmega {
    /// ω text followed by `# key value` metadata lines.
    pub fn to_text(&self) -> String {
        let mut s = self.omega.to_text();
        let m = &self.meta;
        writeln!(s, "# T {}", m.temperature).unwrap();
        writeln!(s, "# R {}", m.half_width).unwrap();
        writeln!(s, "# t {}", m.t_ellipse).unwrap();
        writeln!(s, "# line_grid {} {}", m.line.0, m.line.1).unwrap();
        writeln!(s, "# contour_grid {} {}", m.contour.0, m.contour.1).unwrap();
        writeln!(s, "# nlie_iterations {}", m.nlie_iterations).unwrap();
        writeln!(s, "# refinements {}", m.refinements).unwrap();
        writeln!(s, "# parity {:e}", m.parity).unwrap();
        writeln!(s, "# log_a_at_R_over_i {}", m.log_a_at_r).unwrap();
        writeln!(s, "# imag_residue {:e}", m.imag_residue).unwrap();
        s
    }

    pub fn parse_meta(text: &str) -> Result<ThermalMeta> {
        let bad = |k: &str| Error::Parse(format!("thermal metadata: {k}"));
        let mut map = std::collections::HashMap::new();
        for l in text.lines().filter_map(|l| l.strip_prefix("# ")) {
            let mut it = l.splitn(2, ' ');
            if let (Some(k), Some(v)) = (it.next(), it.next()) {
                map.insert(k.to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| map.get(k).cloned().ok_or_else(|| bad(k));
        let grid = |k: &str| -> Result<(Rational, usize)> {
            let v = get(k)?;
            let mut p = v.split_whitespace();
            let h = p.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(k))?;
            let n = p.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(k))?;
            Ok((h, n))
        };
        Ok(ThermalMeta {
            temperature: get("T")?.parse().map_err(|_| bad("T"))?,
            half_width: get("R")?.parse().map_err(|_| bad("R"))?,
            t_ellipse: get("t")?.parse().map_err(|_| bad("t"))?,
            line: grid("line_grid")?,
            contour: grid("contour_grid")?,
            nlie_iterations: get("nlie_iterations")?.parse().map_err(|_| bad("nlie_iterations"))?,
            refinements: get("refinements")?.parse().map_err(|_| bad("refinements"))?,
            parity: get("parity")?.parse().map_err(|_| bad("parity"))?,
            log_a_at_r: get("log_a_at_R_over_i")?.parse().map_err(|_| bad("log_a_at_R_over_i"))?,
            imag_residue: get("imag_residue")?.parse().map_err(|_| bad("imag_residue"))?,
        })
    }
}

/// Temperature-independent stages for one half-width, reusable across
/// temperatures.
pub struct ThermalSolver {
    pub cfg: ThermalConfig,
    pub res: Resolvent,
    pub ff: FFamily,
    pub om1: Omega1,
}

impl ThermalSolver {
    /// `cfg.temperature` is ignored here.
    pub fn new(cfg: &ThermalConfig, exec: Exec) -> Result<Self> {
        let res = solve_resolvent(cfg, exec)?;
        let ff = compute_f_family(cfg, &res, exec);
        let om1 = omega1(cfg, &res, &ff);
        // the designated precision sentinel
        let limit = Float::with_val(res.bits, 10).pow(-40);
        if cfg.prec.decimal_digits >= 55 && om1.parity > limit {
            return Err(Error::ThermalCheck(format!(
                "ω₁ entries with i+j odd reach {:e}; precision was lost",
                om1.parity.to_f64()
            )));
        }
        Ok(ThermalSolver { cfg: cfg.clone(), res, ff, om1 })
    }

    /// Stage 2 and `ω₂` at one temperature.
    pub fn solve(&self, temperature: &Rational, exec: Exec) -> Result<ThermalOmega> {
        let mut cfg = self.cfg.clone();
        cfg.temperature = temperature.clone();
        let afrak = solve_afrak_nlie(&cfg, &self.res, exec)?;
        let (om2, refinements) = omega2(&cfg, &self.res, &self.ff, &afrak, exec)?;
        let bits = self.res.bits;
        let order = cfg.order;
        let mut entries = vec![vec![Float::with_val(bits, 0); order]; order];
        let mut imag = 0f64;
        for j in 0..order {
            for k in 0..order {
                let w = &self.om1.entries[j][k] + &om2[j][k];
                // ω_T(λ, μ) with λ = ix: multiply by i^{−(j+k)}
                let (re, im) = match (j + k) % 4 {
                    0 => (w.re.clone(), w.im.clone()),
                    1 => (w.im.clone(), -w.re.clone()),
                    2 => (-w.re.clone(), -w.im.clone()),
                    _ => (-w.im.clone(), w.re.clone()),
                };
                imag = imag.max(im.to_f64().abs());
                entries[j][k] = re;
            }
        }
        let meta = ThermalMeta {
            temperature: temperature.clone(),
            half_width: cfg.half_width,
            t_ellipse: cfg.t_ellipse.clone(),
            line: (cfg.quad_line.h.clone(), cfg.quad_line.n),
            contour: (cfg.quad_contour.h.clone(), cfg.quad_contour.n),
            nlie_iterations: afrak.iterations,
            refinements,
            parity: self.om1.parity.to_f64(),
            log_a_at_r: afrak.log_a_at_r.to_f64(),
            imag_residue: imag,
        };
        Ok(ThermalOmega {
            omega: OmegaMatrix::Real { backend: Backend::Thermal, bits, entries },
            meta,
            omega1: self.om1.entries.clone(),
            omega2: om2,
        })
    }
}

/// Stage 4b. `G = F − ∫_{C₊} R G dm̄ − ∫_{C₋} R G dm` by iterative refinement
/// (high-precision residual, double-precision correction), then
/// `ω₂ = (1/2π)(∫_{C₊} F G dm̄ + ∫_{C₋} F G dm) = (1/π) Re ∫_{C₊} F G dm̄`.
/// Returns the `x`-convention matrix and the number of refinement sweeps.
pub fn omega2(
    cfg: &ThermalConfig,
    res: &Resolvent,
    ff: &FFamily,
    afrak: &AFrak,
    exec: Exec,
) -> Result<(Vec<Vec<Cx>>, usize)> {
    let bits = res.bits;
    let order = cfg.order;
    let m = res.cp.len();
    // dm̄ = dx 𝔞/(1+𝔞) on C₊; on C₋ the measure is its conjugate
    let mu: Vec<Cx> = (0..m)
        .map(|j| {
            let mut e = (-afrak.log_a[j].clone()).exp();
            e.re += 1u32;
            &res.cw[j] * &e.recip()
        })
        .collect();
    let tiny = negligible(bits);
    let active: Vec<usize> =
        (0..m).filter(|&j| mu[j].re.clone().abs() > tiny || mu[j].im.clone().abs() > tiny).collect();
    let s = active.len();
    // double-precision image of I + A on the active set, C₊ block first
    let mut a = DMatrix::<Complex64>::identity(2 * s, 2 * s);
    for (p, &i) in active.iter().enumerate() {
        for (q, &j) in active.iter().enumerate() {
            let mj = cx_to_c64(&mu[j]);
            let rpp = cx_to_c64(&res.rpp[i][j]);
            let rpm = cx_to_c64(&res.rpm[i][j]);
            a[(p, q)] += rpp * mj;
            a[(p, s + q)] += rpm * mj.conj();
            a[(s + p, q)] += rpm.conj() * mj;
            a[(s + p, s + q)] += rpp.conj() * mj.conj();
        }
    }
    let lu = a.lu();
    let mut g: Vec<Vec<Cx>> = (0..order).map(|k| active.iter().map(|&i| ff.f_c[k][i].clone()).collect()).collect();
    let tol = cfg.tolerance();
    let mut sweeps = 0;
    let mut last = f64::INFINITY;
    loop {
        sweeps += 1;
        // residual r = F − G − A G on the active C₊ nodes
        let resid: Vec<Vec<Cx>> = (0..order)
            .map(|k| {
                let mut u = vec![Cx::zero(bits); m];
                for (q, &j) in active.iter().enumerate() {
                    u[j] = &mu[j] * &g[k][q];
                }
                exec.map_range(s, |p| {
                    let i = active[p];
                    let ag = res.apply(i, &u, &u, &active);
                    &(&ff.f_c[k][i] - &g[k][p]) - &ag
                })
            })
            .collect();
        let mut worst = 0f64;
        for r in &resid {
            for v in r {
                worst = worst.max(cx_abs_f64(v));
            }
        }
        if Float::with_val(bits, worst) < tol {
            break;
        }
        if sweeps > 40 || (sweeps > 3 && worst > last) {
            return Err(Error::NoConvergence(format!("G refinement stalled at residual {worst:e}")));
        }
        last = worst;
        for k in 0..order {
            // scale the right-hand side so that tiny residuals keep double-precision range
            let scale = resid[k].iter().map(cx_abs_f64).fold(0f64, f64::max);
            if scale == 0.0 {
                continue;
            }
            let inv = Float::with_val(bits, scale).recip();
            let mut rhs = nalgebra::DVector::<Complex64>::zeros(2 * s);
            for p in 0..s {
                let v = cx_to_c64(&resid[k][p].scale(&inv));
                rhs[p] = v;
                rhs[s + p] = v.conj();
            }
            let delta = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Singular("double-precision image of the G operator".into()))?;
            let sc = Float::with_val(bits, scale);
            for p in 0..s {
                let d = Cx::new(Float::with_val(bits, delta[p].re), Float::with_val(bits, delta[p].im)).scale(&sc);
                g[k][p] += &d;
            }
        }
    }
    let inv_pi = pi(bits).recip();
    let mut e = vec![vec![Cx::zero(bits); order]; order];
    for j in 0..order {
        for k in 0..order {
            let mut acc = Float::with_val(bits, 0);
            for (p, &i) in active.iter().enumerate() {
                let t = &(&ff.f_c[j][i] * &g[k][p]) * &mu[i];
                acc += &t.re;
            }
            e[j][k] = Cx::real(acc * &inv_pi);
        }
    }
    Ok((e, sweeps))
}

/// All stages at one temperature.
pub fn omega_thermal(cfg: &ThermalConfig, exec: Exec) -> Result<ThermalOmega> {
    ThermalSolver::new(cfg, exec)?.solve(&cfg.temperature, exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coarse grids: enough for ~20 digits and fast.
    fn coarse(t: Rational, r: u32) -> ThermalConfig {
        let mut cfg = ThermalConfig::new(t, r, Precision::new(30));
        cfg.quad_line = DEQuadrature::new(Rational::from((1, 10)), Rational::from((1, 10)), 100);
        cfg.quad_contour = DEQuadrature::new(Rational::from((1, 10)), Rational::from((1, 10 * r as i32)), 100 * r as usize);
        cfg.tail = TailRule { h: Rational::from((1, 24)), ..TailRule::exp_sinh() };
        cfg
    }

    fn f(v: &Float) -> f64 {
        v.to_f64()
    }

    #[test]
    fn f0_slices_match_direct_evaluation() {
        let bits = Precision::new(40).bits();
        let z = Cx::new(Float::with_val(bits, 0.5), Float::with_val(bits, 0));
        let s = f0_slices(&z, 10);
        let p = pi(bits);
        let direct = Float::with_val(bits, &p / Float::with_val(bits, Float::with_val(bits, &p / 2u32).sinh()));
        assert!((s[0].re.clone() - &direct).abs() < 1e-38);
        assert!((s[0].re.to_f64() - 1.365_138_900_661_715_6).abs() < 1e-15);
        // Σ s_k y^k against π/sinh(π(z − y)) at a complex point
        let z = Cx::new(Float::with_val(bits, 0.7), Float::with_val(bits, -0.3));
        let s = f0_slices(&z, 10);
        let y = Float::with_val(bits, 0.01);
        let mut sum = Cx::zero(bits);
        let mut yk = Float::with_val(bits, 1);
        for c in &s {
            sum += &c.scale(&yk);
            yk *= &y;
        }
        let arg = cx_sub_real(&z, &y).scale(&p);
        let direct = Cx::real(p.clone()) / arg.sinh();
        assert!(f(&(sum - direct).abs()) < 1e-18);
    }

    #[test]
    fn tail_rules_agree() {
        let bits = Precision::new(40).bits();
        let a = Tails::new(&TailRule::exp_sinh(), 1, bits, 6);
        let b = Tails::new(&TailRule::double_exp(), 1, bits, 6);
        for x in [Cx::new(Float::with_val(bits, 0.3), Float::with_val(bits, 0.2)), Cx::real(Float::with_val(bits, -0.9))] {
            let da = a.d(&x, 6);
            let db = b.d(&x, 6);
            for k in 0..6 {
                assert!(f(&(&da[k] - &db[k]).abs()) < 1e-36, "k={k}");
            }
        }
    }

    #[test]
    fn resolvent_solves_line_equation_and_continues() {
        let cfg = coarse(Rational::from((1, 10)), 1);
        let res = solve_resolvent(&cfg, Exec::Sequential).unwrap();
        assert!(f(&res.asymmetry()) < 1e-28);
        let bits = res.bits;
        let p = pi(bits);
        let n = res.line_len();
        for a in [0, n / 3, n / 2] {
            for b in [1, n / 2 + 3] {
                let mut s = kernel_real(&Float::with_val(bits, &res.line[a] - &res.line[b]), &p);
                for l in 0..n {
                    let k = kernel_real(&Float::with_val(bits, &res.line[a] - &res.line[l]), &p);
                    s += k * &res.line_w[l] * &res.rll[l][b];
                }
                assert!(f(&(s - &res.rll[a][b]).abs()) < 1e-28);
            }
        }
        // the same equation with the integral on the lower arc
        assert!(f(&res.cauchy_defect(&[5, n / 2, n - 10])) < 1e-18);
    }

    #[test]
    fn omega1_has_vanishing_odd_entries_and_matches_naive_form() {
        let cfg = coarse(Rational::from((1, 10)), 1);
        let res = solve_resolvent(&cfg, Exec::Parallel).unwrap();
        let ff = compute_f_family(&cfg, &res, Exec::Parallel);
        let om1 = omega1(&cfg, &res, &ff);
        assert!(f(&om1.parity) < 1e-15, "parity {}", f(&om1.parity));
        let naive = omega1_naive(&cfg, &res);
        for j in 0..3 {
            for k in 0..3 {
                let d = (&naive[j][k] - &om1.entries[j][k]).abs();
                assert!(f(&d) < 1e-10, "({j},{k}) {}", f(&d));
            }
        }
        // ΔF has no pole at the origin although F₀ does
        let n = res.line_len();
        let mid = n / 2 + 1;
        let x = Cx::real(res.line[mid].clone());
        let f0 = f0_slices(&x, cfg.order);
        assert!(f(&f0[0].abs()) > 50.0);
        for k in 0..cfg.order {
            assert!(f(&ff.delta_line[k][mid]).abs() < 1e3);
        }
    }

    #[test]
    fn both_half_widths_give_the_same_omega() {
        let t = Rational::from((1, 10));
        let a = omega_thermal(&coarse(t.clone(), 1), Exec::Parallel).unwrap();
        let b = omega_thermal(&coarse(t, 2), Exec::Parallel).unwrap();
        let (ea, eb) = (a.omega.to_float(128), b.omega.to_float(128));
        for j in 0..6 {
            for k in 0..6 {
                let d = Float::with_val(128, &ea[j][k] - &eb[j][k]).abs();
                let scale = ea[j][k].to_f64().abs().max(1.0);
                assert!(d.to_f64() / scale < 1e-12, "({j},{k}) {} {}", ea[j][k].to_f64(), eb[j][k].to_f64());
                let s = Float::with_val(128, &ea[j][k] - &ea[k][j]).abs();
                assert!(s.to_f64() / scale < 1e-12);
            }
        }
        // independent float64 evaluation of the closed-contour form
        assert!((ea[0][0].to_f64() - 0.884_611_816_354_811_6).abs() < 1e-12);
        assert!((ea[1][1].to_f64() + 2.589_728_327_875_131_8).abs() < 1e-11);
        assert!(a.meta.log_a_at_r.abs() < std::f64::consts::PI);
    }

    #[test]
    fn afrak_is_small_on_the_upper_arc() {
        let cfg = coarse(Rational::from((1, 4)), 1);
        let res = solve_resolvent(&cfg, Exec::Parallel).unwrap();
        let a = solve_afrak_nlie(&cfg, &res, Exec::Parallel).unwrap();
        assert!(f(&a.max_abs) <= 1.0 + 1e-20);
        assert!(a.log_a_at_r.to_f64().abs() < std::f64::consts::PI);
        // Schwarz reflection: on the real axis |𝔞| = 1
        assert!(a.log_a.last().unwrap().re.to_f64().abs() < 1e-10);
    }

    #[test]
    fn refuses_out_of_range_temperatures() {
        let cfg = coarse(Rational::from((1, 2)), 1);
        let res = solve_resolvent(&cfg, Exec::Parallel).unwrap();
        assert!(matches!(solve_afrak_nlie(&cfg, &res, Exec::Parallel), Err(Error::Refused(_))));
        let cfg = coarse(Rational::from(0), 1);
        assert!(matches!(solve_afrak_nlie(&cfg, &res, Exec::Parallel), Err(Error::Refused(_))));
    }

    #[test]
    fn metadata_roundtrip() {
        let cfg = coarse(Rational::from((1, 4)), 1);
        let o = omega_thermal(&cfg, Exec::Parallel).unwrap();
        let text = o.to_text();
        assert_eq!(ThermalOmega::parse_meta(&text).unwrap().temperature, Rational::from((1, 4)));
        let back = OmegaMatrix::from_text(&text).unwrap();
        assert_eq!(back.backend(), Backend::Thermal);
        assert_eq!(back, o.omega);
    }
}
