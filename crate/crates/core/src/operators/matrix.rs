//! Dense complex matrices: products, inversion, and the spectral norm.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// Seed for the Lanczos start vector; fixed so norms are reproducible.
pub const NORM_SEED: u64 = 0x7a0b_e21c;
/// Relative Ritz residual that ends the iteration.
pub const NORM_TOL: f64 = 1e-12;
/// Cap on products with `A*A`.
pub const NORM_MAX_ITER: usize = 20_000;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn diagonal(values: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Build from nested rows; `None` if the rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first()?.len();
        if c == 0 || rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real(rows: &[&[f64]]) -> Option<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows.iter().map(|r| r.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex<T>>> {
        self.data.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * *b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        self.data.chunks(self.cols).map(|row| row.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)).collect()
    }

    /// `A* v`
    pub fn adjoint_mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for (row, vi) in self.data.chunks(self.cols).zip(v) {
            for (o, a) in out.iter_mut().zip(row) {
                *o = *o + a.conj() * *vi;
            }
        }
        out
    }

    /// `a·self + b·other`
    pub fn lincomb(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(x, y)| a * *x + b * *y).collect() }
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| a * *x).collect() }
    }

    /// Inverse by LU with partial pivoting; `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (piv, best) = (col..n).map(|r| (r, a[(r, col)].norm())).fold((col, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > T::zero()) {
                return None;
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * p;
                inv[(col, j)] = inv[(col, j)] * p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] = a[(r, j)] - f * ac;
                    inv[(r, j)] = inv[(r, j)] - f * ic;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    // scaled to avoid overflow for large entries
    let scale = v.iter().map(|z| z.re.abs().max(z.im.abs())).fold(T::zero(), T::max);
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = v.iter().map(|z| (*z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y)
}

/// Number of eigenvalues of the symmetric tridiagonal `(alpha, beta)` below `x`.
fn sturm_count<T: Real>(alpha: &[T], beta: &[T], x: T) -> usize {
    let tiny = T::min_positive_value();
    let mut count = 0;
    let mut d = T::one();
    for i in 0..alpha.len() {
        let off = if i == 0 { T::zero() } else { beta[i - 1] * beta[i - 1] / d };
        d = alpha[i] - x - off;
        if d == T::zero() {
            d = -tiny;
        }
        if d < T::zero() {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix, by bisection.
fn tridiag_max_eig<T: Real>(alpha: &[T], beta: &[T]) -> T {
    let k = alpha.len();
    let mut hi = T::zero();
    let mut lo = T::zero();
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { T::zero() } + if i + 1 < k { beta[i].abs() } else { T::zero() };
        hi = hi.max(alpha[i] + r);
        lo = lo.min(alpha[i] - r);
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Eigenvector of the tridiagonal for eigenvalue `theta`, by inverse iteration.
fn tridiag_eigvec<T: Real>(alpha: &[T], beta: &[T], theta: T) -> Vec<T> {
    let k = alpha.len();
    let shift = theta + (theta.abs() + T::one()) * T::epsilon() * T::lit(4.0);
    let mut y = vec![T::one(); k];
    for _ in 0..3 {
        // Thomas algorithm on (T − shift I) x = y
        let mut c = vec![T::zero(); k];
        let mut d = vec![T::zero(); k];
        for i in 0..k {
            let b = alpha[i] - shift;
            let a = if i > 0 { beta[i - 1] } else { T::zero() };
            let mut denom = b - if i > 0 { a * c[i - 1] } else { T::zero() };
            if denom == T::zero() {
                denom = T::epsilon();
            }
            c[i] = if i + 1 < k { beta[i] / denom } else { T::zero() };
            d[i] = (y[i] - if i > 0 { a * d[i - 1] } else { T::zero() }) / denom;
        }
        let mut x = vec![T::zero(); k];
        for i in (0..k).rev() {
            x[i] = d[i] - if i + 1 < k { c[i] * x[i + 1] } else { T::zero() };
        }
        let n = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(n > T::zero() && n.is_finite()) {
            break;
        }
        y = x.into_iter().map(|v| v / n).collect();
    }
    y
}

/// Krylov block size per Lanczos restart.
const LANCZOS_BLOCK: usize = 40;

/// Largest singular value: the top eigenvalue of `A*A` by restarted Lanczos
/// with full reorthogonalisation, started from a seeded random vector.
/// Nearly equal top singular values, which stall the plain power method,
/// are resolved inside one Krylov block.
///
/// Returns `None` for matrices with non-finite entries.
pub fn operator_norm<T: Real>(a: &CMatrix<T>) -> Option<T> {
    if !a.is_finite() {
        return None;
    }
    let scale = a.data.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return Some(T::zero());
    }
    if a.cols == 1 || a.rows == 1 {
        return Some(vec_norm(&a.data));
    }
    // normalise so the iteration never overflows
    let a_scaled = a.scale(Complex::new(scale.recip(), T::zero()));
    let apply = |v: &[Complex<T>]| a_scaled.adjoint_mul_vec(&a_scaled.mul_vec(v));
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
    let mut x: Vec<Complex<T>> = (0..a.cols).map(|_| Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))).collect();

    let tol = T::lit(NORM_TOL);
    let block = LANCZOS_BLOCK.min(a.cols);
    let mut best = T::zero();
    let mut used = 0;
    while used < NORM_MAX_ITER {
        let nx = vec_norm(&x);
        if nx == T::zero() {
            break;
        }
        let mut q: Vec<Vec<Complex<T>>> = vec![x.iter().map(|z| *z / nx).collect()];
        let mut alpha: Vec<T> = Vec::with_capacity(block);
        let mut beta: Vec<T> = Vec::with_capacity(block);
        let mut exhausted = false;
        for j in 0..block {
            let mut w = apply(&q[j]);
            used += 1;
            alpha.push(dot(&q[j], &w).re);
            for _ in 0..2 {
                for qi in &q {
                    let h = dot(qi, &w);
                    w.iter_mut().zip(qi).for_each(|(wv, qv)| *wv = *wv - *qv * h);
                }
            }
            let b = vec_norm(&w);
            if j + 1 == block {
                beta.push(b);
                break;
            }
            if b <= T::epsilon() * T::lit(16.0) * alpha.iter().copied().fold(T::zero(), |m, v| m.max(v.abs())).max(T::epsilon()) {
                beta.push(T::zero());
                exhausted = true;
                break;
            }
            beta.push(b);
            q.push(w.into_iter().map(|z| z / b).collect());
        }
        let k = alpha.len();
        let theta = tridiag_max_eig(&alpha, &beta[..k - 1]);
        let y = tridiag_eigvec(&alpha, &beta[..k - 1], theta);
        let mut ritz = vec![Complex::new(T::zero(), T::zero()); a.cols];
        for (qi, &yi) in q.iter().zip(&y) {
            ritz.iter_mut().zip(qi).for_each(|(r, v)| *r = *r + *v * yi);
        }
        best = best.max(theta.max(T::zero()).sqrt()).max(vec_norm(&a_scaled.mul_vec(&ritz)) / vec_norm(&ritz));
        let residual = beta[k - 1] * y[k - 1].abs();
        if exhausted || k == a.cols || residual <= tol * theta {
            break;
        }
        x = ritz;
    }
    Some(best * scale)
}
