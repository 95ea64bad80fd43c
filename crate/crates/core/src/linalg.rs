//! Small dense linear algebra kernels: complex LU with partial pivoting and
//! cyclic Jacobi diagonalization of real symmetric matrices.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Row-major dense complex square matrix.
#[derive(Debug, Clone)]
pub struct CMatrix<R> {
    pub n: usize,
    pub data: Vec<Cplx<R>>,
}

impl<R: Real> CMatrix<R> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Cplx::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cplx<R> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cplx<R>) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[Cplx<R>]) -> Vec<Cplx<R>> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter()
                    .zip(x)
                    .fold(Cplx::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }
}

/// LU factorization `P·M = L·U` stored in place.
#[derive(Debug, Clone)]
pub struct Lu<R> {
    lu: CMatrix<R>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    pub fn factor(mut m: CMatrix<R>) -> Result<Self> {
        let n = m.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.data.iter().map(|z| z.norm()).fold(R::zero(), R::max);
        if scale == R::zero() {
            return Err(Error::Conditioning("zero matrix".into()));
        }
        for col in 0..n {
            let (piv, pval) = (col..n).map(|r| (r, m.get(r, col).norm())).fold(
                (col, R::neg_infinity()),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
            if !(pval > scale * R::epsilon()) {
                return Err(Error::Conditioning(format!(
                    "singular pivot in column {col}"
                )));
            }
            if piv != col {
                for j in 0..n {
                    m.data.swap(piv * n + j, col * n + j);
                }
                perm.swap(piv, col);
            }
            let d = m.get(col, col);
            for r in col + 1..n {
                let factor = m.get(r, col) / d;
                if factor.is_zero() {
                    continue;
                }
                m.set(r, col, factor);
                for j in col + 1..n {
                    let v = m.get(r, j) - factor * m.get(col, j);
                    m.set(r, j, v);
                }
            }
        }
        Ok(Self { lu: m, perm })
    }

    pub fn solve(&self, b: &[Cplx<R>]) -> Vec<Cplx<R>> {
        let n = self.lu.n;
        let mut x: Vec<Cplx<R>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu.get(i, j);
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu.get(i, j);
                x[i] = x[i] - u * x[j];
            }
            x[i] = x[i] / self.lu.get(i, i);
        }
        x
    }
}

/// Solves `M x = b` with one step of iterative refinement.
pub fn solve_refined<R: Real>(m: &CMatrix<R>, b: &[Cplx<R>]) -> Result<Vec<Cplx<R>>> {
    let lu = Lu::factor(m.clone())?;
    let mut x = lu.solve(b);
    let mx = m.mul_vec(&x);
    let r: Vec<Cplx<R>> = b.iter().zip(&mx).map(|(bi, mi)| bi - mi).collect();
    let dx = lu.solve(&r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi = *xi + di;
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Conditioning("non-finite solution".into()));
    }
    Ok(x)
}

/// Eigen-decomposition of a real symmetric matrix (row-major, n×n) by
/// Householder tridiagonalization and implicit QL. Returns eigenvalues and the
/// column-eigenvector matrix (row-major, column k belongs to eigenvalue k).
pub fn symmetric_eigen<R: Real>(a: &[R], n: usize) -> (Vec<R>, Vec<R>) {
    let mut z = a.to_vec();
    let mut d = vec![R::zero(); n];
    let mut e = vec![R::zero(); n];
    if n == 0 {
        return (d, z);
    }
    let at = |i: usize, j: usize| i * n + j;

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = R::zero();
        if l > 0 {
            let scale: R = (0..=l).map(|k| z[at(i, k)].abs()).sum();
            if scale == R::zero() {
                e[i] = z[at(i, l)];
            } else {
                for k in 0..=l {
                    z[at(i, k)] = z[at(i, k)] / scale;
                    h = h + z[at(i, k)] * z[at(i, k)];
                }
                let f = z[at(i, l)];
                let g = if f >= R::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h = h - f * g;
                z[at(i, l)] = f - g;
                let mut f = R::zero();
                for j in 0..=l {
                    z[at(j, i)] = z[at(i, j)] / h;
                    let mut g = R::zero();
                    for k in 0..=j {
                        g = g + z[at(j, k)] * z[at(i, k)];
                    }
                    for k in j + 1..=l {
                        g = g + z[at(k, j)] * z[at(i, k)];
                    }
                    e[j] = g / h;
                    f = f + e[j] * z[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = z[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[at(j, k)] = z[at(j, k)] - (f * e[k] + g * z[at(i, k)]);
                    }
                }
            }
        } else {
            e[i] = z[at(i, l)];
        }
        d[i] = h;
    }
    d[0] = R::zero();
    e[0] = R::zero();
    for i in 0..n {
        if d[i] != R::zero() {
            for j in 0..i {
                let mut g = R::zero();
                for k in 0..i {
                    g = g + z[at(i, k)] * z[at(k, j)];
                }
                for k in 0..i {
                    z[at(k, j)] = z[at(k, j)] - g * z[at(k, i)];
                }
            }
        }
        d[i] = z[at(i, i)];
        z[at(i, i)] = R::one();
        for j in 0..i {
            z[at(j, i)] = R::zero();
            z[at(i, j)] = R::zero();
        }
    }

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = R::zero();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= R::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (R::two() * e[l]);
            let mut r = g.hypot(R::one());
            g = d[m] - d[l] + e[l] / (g + if g >= R::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (R::one(), R::one(), R::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == R::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = R::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + R::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[at(k, i + 1)];
                    z[at(k, i + 1)] = s * z[at(k, i)] + c * f;
                    z[at(k, i)] = c * z[at(k, i)] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = R::zero();
        }
    }
    (d, z)
}
