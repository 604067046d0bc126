//! Exact rational elimination and big-float dense solvers.

use crate::cx::Cx;
use crate::error::{Error, Result};
use rug::ops::Pow;
use rug::{Float, Rational};

/// Sparse row: strictly increasing column indices with nonzero values.
pub type SparseRow = Vec<(usize, Rational)>;

pub fn sparse_from_dense(v: &[Rational]) -> SparseRow {
    v.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (i, c.clone())).collect()
}

pub fn dense_from_sparse(r: &SparseRow, n: usize) -> Vec<Rational> {
    let mut v = vec![Rational::new(); n];
    for (i, c) in r {
        v[*i] = c.clone();
    }
    v
}

fn sparse_get(r: &SparseRow, col: usize) -> Option<&Rational> {
    r.binary_search_by_key(&col, |(c, _)| *c).ok().map(|i| &r[i].1)
}

/// `a − f·b`
fn sparse_axpy(a: &SparseRow, f: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|x| x.0).unwrap_or(usize::MAX);
        let cb = b.get(j).map(|x| x.0).unwrap_or(usize::MAX);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            out.push((cb, Rational::from(-Rational::from(f * &b[j].1))));
            j += 1;
        } else {
            let v = Rational::from(&a[i].1 - Rational::from(f * &b[j].1));
            if v != 0 {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental reduced row echelon form. Rows are kept fully reduced, so a
/// new row is reduced in one pass; pivots are the first nonzero column.
#[derive(Clone, Debug, Default)]
pub struct Rref {
    ncols: usize,
    rows: Vec<SparseRow>,
    pivots: Vec<usize>,
    col_row: Vec<Option<usize>>,
}

impl Rref {
    pub fn new(ncols: usize) -> Self {
        Rref { ncols, rows: Vec::new(), pivots: Vec::new(), col_row: vec![None; ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot column of each stored row, in insertion order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row_for_pivot(&self, col: usize) -> Option<&SparseRow> {
        self.col_row.get(col).copied().flatten().map(|r| &self.rows[r])
    }

    /// Remainder of `row` after elimination against the stored pivots.
    pub fn reduce(&self, row: &SparseRow) -> SparseRow {
        let mut acc = row.clone();
        for (c, f) in row {
            if let Some(r) = self.col_row[*c] {
                // the stored row is zero on all other pivot columns, so each
                // subtraction only touches this pivot and free columns
                let f = sparse_get(&acc, *c).cloned().unwrap_or_else(|| f.clone());
                if f != 0 {
                    acc = sparse_axpy(&acc, &f, &self.rows[r]);
                }
            }
        }
        acc
    }

    /// Reduce and, if independent, store. Returns the new pivot column.
    pub fn insert(&mut self, row: &SparseRow) -> Option<usize> {
        let red = self.reduce(row);
        let (p, lead) = red.first().map(|(c, v)| (*c, v.clone()))?;
        let inv = Rational::from(lead.recip_ref());
        let new: SparseRow = red.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        for r in self.rows.iter_mut() {
            if let Some(f) = sparse_get(r, p).cloned() {
                *r = sparse_axpy(r, &f, &new);
            }
        }
        self.col_row[p] = Some(self.rows.len());
        self.rows.push(new);
        self.pivots.push(p);
        Some(p)
    }

    /// Basis of the null space: one vector per free column, with a 1 there.
    pub fn nullspace(&self) -> Vec<SparseRow> {
        let mut out = Vec::new();
        for f in 0..self.ncols {
            if self.col_row[f].is_some() {
                continue;
            }
            let mut v: SparseRow = vec![(f, Rational::from(1))];
            for (r, &pc) in self.rows.iter().zip(&self.pivots) {
                if let Some(c) = sparse_get(r, f) {
                    v.push((pc, Rational::from(-c)));
                }
            }
            v.sort_by_key(|x| x.0);
            out.push(v);
        }
        out
    }
}

pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut d = Rational::from(1);
    for i in 0..n {
        let Some(p) = (i..n).find(|&r| a[r][i] != 0) else {
            return Rational::new();
        };
        if p != i {
            a.swap(p, i);
            d = -d;
        }
        d *= &a[i][i];
        for r in i + 1..n {
            if a[r][i] == 0 {
                continue;
            }
            let f = Rational::from(&a[r][i] / &a[i][i]);
            for c in i..n {
                let t = Rational::from(&f * &a[i][c]);
                a[r][c] -= t;
            }
        }
    }
    d
}

/// Solve `m x = b` for several right-hand sides (columns of `b`).
pub fn solve(m: &[Vec<Rational>], b: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let k = b.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<Rational>> = m.iter().zip(b).map(|(r, rb)| r.iter().chain(rb).cloned().collect()).collect();
    for i in 0..n {
        let p = (i..n).find(|&r| a[r][i] != 0).ok_or_else(|| Error::Singular("exact solve".into()))?;
        a.swap(p, i);
        let inv = Rational::from(a[i][i].recip_ref());
        for c in i..n + k {
            a[i][c] *= &inv;
        }
        for r in 0..n {
            if r == i || a[r][i] == 0 {
                continue;
            }
            let f = a[r][i].clone();
            for c in i..n + k {
                let t = Rational::from(&f * &a[i][c]);
                a[r][c] -= t;
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Symmetric eigenvalues by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &[Vec<Float>], bits: u32) -> Vec<Float> {
    let n = m.len();
    let mut a: Vec<Vec<Float>> = m.iter().map(|r| r.iter().map(|x| Float::with_val(bits, x)).collect()).collect();
    let tol = Float::with_val(bits, Float::with_val(bits, 2).pow(-(bits as i32) + 8));
    for _sweep in 0..100 {
        let mut off = Float::with_val(bits, 0);
        let mut scale = Float::with_val(bits, 0);
        for i in 0..n {
            for j in 0..n {
                let s = Float::with_val(bits, a[i][j].square_ref());
                if i != j {
                    off += &s;
                }
                scale += s;
            }
        }
        if off <= Float::with_val(bits, &scale * &tol) * &tol || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].is_zero() {
                    continue;
                }
                // θ = (a_qq − a_pp)/(2 a_pq), t = sign(θ)/(|θ| + √(θ²+1))
                let theta = Float::with_val(bits, &a[q][q] - &a[p][p]) / Float::with_val(bits, &a[p][q] * 2u32);
                let root = (Float::with_val(bits, theta.square_ref()) + 1u32).sqrt();
                let t: Float = if theta.is_sign_negative() {
                    -1 / (Float::with_val(bits, -&theta) + root)
                } else {
                    1 / (theta + root)
                };
                let c = 1 / (Float::with_val(bits, t.square_ref()) + 1u32).sqrt();
                let s = Float::with_val(bits, &t * &c);
                for k in 0..n {
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    a[k][p] = Float::with_val(bits, &c * &akp) - Float::with_val(bits, &s * &akq);
                    a[k][q] = Float::with_val(bits, &s * &akp) + Float::with_val(bits, &c * &akq);
                }
                for k in 0..n {
                    let apk = a[p][k].clone();
                    let aqk = a[q][k].clone();
                    a[p][k] = Float::with_val(bits, &c * &apk) - Float::with_val(bits, &s * &aqk);
                    a[q][k] = Float::with_val(bits, &s * &apk) + Float::with_val(bits, &c * &aqk);
                }
            }
        }
    }
    let mut ev: Vec<Float> = (0..n).map(|i| a[i][i].clone()).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Dense complex LU solve with partial pivoting; `b` holds columns.
pub fn solve_complex(mut a: Vec<Vec<Cx>>, mut b: Vec<Vec<Cx>>) -> Result<Vec<Vec<Cx>>> {
    let n = a.len();
    for i in 0..n {
        let mut best = i;
        let mut bv = a[i][i].norm_sqr();
        for r in i + 1..n {
            let v = a[r][i].norm_sqr();
            if v > bv {
                bv = v;
                best = r;
            }
        }
        if bv.is_zero() {
            return Err(Error::Singular("complex solve".into()));
        }
        a.swap(i, best);
        b.swap(i, best);
        let inv = a[i][i].recip();
        let (top, bottom) = a.split_at_mut(i + 1);
        let pivot_row = &top[i];
        let (btop, bbottom) = b.split_at_mut(i + 1);
        let bpivot = &btop[i];
        for (row, brow) in bottom.iter_mut().zip(bbottom.iter_mut()) {
            if row[i].re.is_zero() && row[i].im.is_zero() {
                continue;
            }
            let f = &row[i] * &inv;
            for c in i + 1..n {
                let t = &f * &pivot_row[c];
                row[c] -= &t;
            }
            for (bc, pc) in brow.iter_mut().zip(bpivot.iter()) {
                let t = &f * pc;
                *bc -= &t;
            }
        }
    }
    let k = b.first().map_or(0, |r| r.len());
    let bits = a.first().and_then(|r| r.first()).map_or(64, |z| z.prec());
    let mut x = vec![vec![Cx::zero(bits); k]; n];
    for i in (0..n).rev() {
        let inv = a[i][i].recip();
        for col in 0..k {
            let mut s = b[i][col].clone();
            for c in i + 1..n {
                let t = &a[i][c] * &x[c][col];
                s -= &t;
            }
            x[i][col] = &s * &inv;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn rref_rank_and_nullspace() {
        let mut r = Rref::new(3);
        assert_eq!(r.insert(&sparse_from_dense(&[q(1), q(2), q(3)])), Some(0));
        assert_eq!(r.insert(&sparse_from_dense(&[q(2), q(4), q(6)])), None);
        assert_eq!(r.insert(&sparse_from_dense(&[q(0), q(1), q(1)])), Some(1));
        let ns = r.nullspace();
        assert_eq!(ns.len(), 1);
        let v = dense_from_sparse(&ns[0], 3);
        assert_eq!(v, vec![q(-1), q(-1), q(1)]);
    }

    #[test]
    fn det_and_solve() {
        let m = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        assert_eq!(det(&m), 5);
        let x = solve(&m, &[vec![q(3)], vec![q(4)]]).unwrap();
        assert_eq!(x, vec![vec![q(1)], vec![q(1)]]);
    }

    #[test]
    fn jacobi_small() {
        let b = 128;
        let f = |v: f64| Float::with_val(b, v);
        let m = vec![vec![f(2.0), f(1.0)], vec![f(1.0), f(2.0)]];
        let ev = jacobi_eigenvalues(&m, b);
        assert!((ev[0].clone() - 3u32).abs() < 1e-30);
        assert!((ev[1].clone() - 1u32).abs() < 1e-30);
    }
}

/// Commutative ring operations shared by exact and big-float scalars.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn mul_rational(&self, r: &Rational) -> Self;
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn one_like(&self) -> Self {
        Rational::from(1)
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn mul_rational(&self, r: &Rational) -> Self {
        Rational::from(self * r)
    }
}

impl Ring for Float {
    fn zero_like(&self) -> Self {
        Float::with_val(self.prec(), 0)
    }
    fn one_like(&self) -> Self {
        Float::with_val(self.prec(), 1)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn mul_rational(&self, r: &Rational) -> Self {
        Float::with_val(self.prec(), self * r)
    }
}

/// Determinant by Laplace expansion along the first row; only ring operations,
/// intended for the small minors of the ω matrix.
pub fn det_ring<T: Ring>(m: &[Vec<T>], unit: &T) -> T {
    let n = m.len();
    if n == 0 {
        return unit.one_like();
    }
    let cols: Vec<usize> = (0..n).collect();
    laplace(m, 0, &cols, unit)
}

fn laplace<T: Ring>(m: &[Vec<T>], row: usize, cols: &[usize], unit: &T) -> T {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = unit.zero_like();
    for (i, &c) in cols.iter().enumerate() {
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let t = m[row][c].mul(&laplace(m, row + 1, &rest, unit));
        acc = if i % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}
