//! Functional-recursion oracle for the Schur-basis letter actions, shared by
//! the oracle tests and the acceptance suite.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use xxxdm::matsubara::generate_md;
use xxxdm::schur_engine::*;

pub fn rnd(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from((rng.gen_range(-9i64..=9), rng.gen_range(1i64..=4)))
}

pub fn rand_vector(rng: &mut ChaCha8Rng, q: usize) -> SchurVector {
    let terms = (0..4).map(|_| {
        let mut parts: Vec<u32> = (0..q).map(|_| rng.gen_range(0..=3)).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts.retain(|&x| x > 0);
        (Partition(parts), rnd(rng))
    });
    SchurVector::from_terms(q, terms.collect::<Vec<_>>()).unwrap()
}

pub fn u(x: &Rational) -> Rational {
    Rational::from(1) / x.clone() + 1u32
}

pub fn v(x: &Rational) -> Rational {
    Rational::from(1) / x.clone()
}

pub fn points(rng: &mut ChaCha8Rng, q: usize) -> Vec<Rational> {
    (0..q).map(|i| rnd(rng) + Rational::from((i as i64, 7))).collect()
}

pub fn omit(mus: &[Rational], js: &[usize]) -> Vec<Rational> {
    mus.iter().enumerate().filter(|(r, _)| !js.contains(r)).map(|(_, x)| x.clone()).collect()
}

pub fn with_zero(mut v: Vec<Rational>) -> Vec<Rational> {
    v.push(Rational::new());
    v
}

/// Compare the four letter actions with the functional recursions on
/// random vectors, for `q ≤ qmax`. Returns a description of every mismatch.
pub fn letter_action_mismatches(trials: usize, qmax: usize, seed: u64) -> Vec<String> {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let md = generate_md(2 + trial % 3, 0, 100 + trial as u64, 9).unwrap();
        let a = |x: &Rational| md.a(x);
        let d = |x: &Rational| md.d(x);
        let z = Rational::new();
        for q in 0..=qmax {
            let mus = points(&mut rng, q);
            if (0..q).any(|i| mus[i] == 0 || (0..i).any(|j| {
                let diff = Rational::from(&mus[i] - &mus[j]);
                diff == 0 || diff == 1 || diff == -1
            })) {
                continue;
            }
            let y = rand_vector(&mut rng, q);
            let f = |pts: Vec<Rational>| eval_schur(&y, &pts).unwrap();
            let prod = |it: &mut dyn Iterator<Item = Rational>| it.fold(Rational::from(1), |acc, x| acc * x);

            let mut ra = a(&z) * prod(&mut mus.iter().map(|m| u(&Rational::from(-m)))) * f(mus.clone());
            let mut rd = d(&z) * prod(&mut mus.iter().map(u)) * f(mus.clone());
            for j in 0..q {
                let others: Vec<usize> = (0..q).filter(|&r| r != j).collect();
                let pa = prod(&mut others.iter().map(|&r| u(&Rational::from(&mus[j] - &mus[r]))));
                let pd = prod(&mut others.iter().map(|&r| u(&Rational::from(&mus[r] - &mus[j]))));
                let fz = f(with_zero(omit(&mus, &[j])));
                ra -= a(&mus[j]) * v(&Rational::from(-&mus[j])) * pa * fz.clone();
                rd -= d(&mus[j]) * v(&mus[j]) * pd * fz;
            }
            if eval_schur(&act_letter(Letter::A, &md, &y).unwrap(), &mus).unwrap() != ra {
                bad.push(format!("A q={q} trial={trial}"));
            }
            if eval_schur(&act_letter(Letter::D, &md, &y).unwrap(), &mus).unwrap() != rd {
                bad.push(format!("D q={q} trial={trial}"));
            }

            if q >= 1 {
                let yb = rand_vector(&mut rng, q - 1);
                let fb = |pts: Vec<Rational>| eval_schur(&yb, &pts).unwrap();
                let mut s = Rational::new();
                for j in 0..q {
                    let others: Vec<usize> = (0..q).filter(|&r| r != j).collect();
                    let p1 = prod(&mut others.iter().map(|&r| u(&Rational::from(-&mus[r])) * u(&Rational::from(&mus[r] - &mus[j]))));
                    let p2 = prod(&mut others.iter().map(|&r| u(&mus[r]) * u(&Rational::from(&mus[j] - &mus[r]))));
                    let c = a(&z) * d(&mus[j]) * v(&Rational::from(-&mus[j])) * p1 + d(&z) * a(&mus[j]) * v(&mus[j]) * p2;
                    s += c * fb(omit(&mus, &[j]));
                }
                for i in 0..q {
                    for j in i + 1..q {
                        let others: Vec<usize> = (0..q).filter(|&r| r != i && r != j).collect();
                        let (mi, mj) = (&mus[i], &mus[j]);
                        let t1 = d(mi) * a(mj) * v(&Rational::from(-mi)) * v(mj) * u(&Rational::from(mj - mi))
                            * prod(&mut others.iter().map(|&r| u(&Rational::from(&mus[r] - mi)) * u(&Rational::from(mj - &mus[r]))));
                        let t2 = a(mi) * d(mj) * v(&Rational::from(-mj)) * v(mi) * u(&Rational::from(mi - mj))
                            * prod(&mut others.iter().map(|&r| u(&Rational::from(mi - &mus[r])) * u(&Rational::from(&mus[r] - mj))));
                        s += (t1 + t2) * fb(with_zero(omit(&mus, &[i, j])));
                    }
                }
                if eval_schur(&act_letter(Letter::B, &md, &yb).unwrap(), &mus).unwrap() != s {
                    bad.push(format!("B q={q} trial={trial}"));
                }
            }
            if q >= 1 {
                // C(0) sets the last argument to zero
                let c = act_letter(Letter::C, &md, &y).unwrap();
                let sub = &mus[..q - 1];
                if eval_schur(&c, sub).unwrap() != f(with_zero(sub.to_vec())) {
                    bad.push(format!("C q={q} trial={trial}"));
                }
            }
        }
    }
    bad
}
