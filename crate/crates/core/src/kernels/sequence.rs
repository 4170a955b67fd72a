//! Bounded vector-valued sequences and their boundary functions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::operators::{operator_norm, CMatrix, Operator};
use crate::scalar::Real;

type TermFn<T> = Arc<dyn Fn(u64) -> Vec<Complex<T>> + Send + Sync>;
type TailFn<T> = Arc<dyn Fn(u64) -> T + Send + Sync>;
type BoundaryFn<T> = Arc<dyn Fn(T) -> Vec<Complex<T>> + Send + Sync>;

/// How the flat component vector of a term is normed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Euclidean norm on `ℂ^d`.
    Vector(usize),
    /// Diagonal operator stored by its diagonal: max-modulus norm.
    Diagonal(usize),
    /// Square matrix stored row-major: spectral norm.
    Matrix(usize),
}

impl Shape {
    pub fn len(self) -> usize {
        match self {
            Shape::Vector(d) | Shape::Diagonal(d) => d,
            Shape::Matrix(n) => n * n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn norm<T: Real>(self, v: &[Complex<T>]) -> T {
        match self {
            Shape::Vector(_) => v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt(),
            Shape::Diagonal(_) => v.iter().map(|z| z.norm()).fold(T::zero(), T::max),
            Shape::Matrix(n) => {
                let rows: Vec<Vec<Complex<T>>> = v.chunks(n).map(|r| r.to_vec()).collect();
                CMatrix::from_rows(&rows).and_then(|m| operator_norm(&m)).unwrap_or(T::nan())
            }
        }
    }
}

enum Generator<T> {
    Terms(TermFn<T>),
    /// `x_n = Tⁿ(I−T)` for a dense `T`, produced by repeated multiplication.
    DenseOrbit(CMatrix<T>),
}

/// A bounded sequence `x_n ∈ X`, `n ≥ 0`.
pub struct Sequence<T> {
    shape: Shape,
    generator: Generator<T>,
    /// `J ↦ sup_{j ≥ J} ‖x_j‖`, when known a priori.
    tail_sup: Option<TailFn<T>>,
    label: String,
}

impl<T> fmt::Debug for Sequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence").field("label", &self.label).field("shape", &self.shape).finish()
    }
}

fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

impl<T: Real> Sequence<T> {
    pub fn from_fn(shape: Shape, label: impl Into<String>, f: impl Fn(u64) -> Vec<Complex<T>> + Send + Sync + 'static) -> Self {
        Self { shape, generator: Generator::Terms(Arc::new(f)), tail_sup: None, label: label.into() }
    }

    /// Attach a known bound `sup_{j ≥ J} ‖x_j‖`.
    pub fn with_tail_sup(mut self, f: impl Fn(u64) -> T + Send + Sync + 'static) -> Self {
        self.tail_sup = Some(Arc::new(f));
        self
    }

    /// `x = (1, 1, 1, …)`: bounded, partial sums unbounded.
    pub fn ones() -> Self {
        Self::from_fn(Shape::Vector(1), "ones", |_| vec![c(T::one())]).with_tail_sup(|_| T::one())
    }

    /// `x = (1, −1, 1, …)`: partial sums bounded, boundary singularity at −1.
    pub fn alternating() -> Self {
        Self::from_fn(Shape::Vector(1), "alternating", |n| vec![c(if n % 2 == 0 { T::one() } else { -T::one() })]).with_tail_sup(|_| T::one())
    }

    pub fn impulse() -> Self {
        Self::from_fn(Shape::Vector(1), "impulse", |n| vec![c(if n == 0 { T::one() } else { T::zero() })]).with_tail_sup(|j| {
            if j == 0 {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn zeros() -> Self {
        Self::from_fn(Shape::Vector(1), "zeros", |_| vec![c(T::zero())]).with_tail_sup(|_| T::zero())
    }

    /// `x_n = μⁿ(1−μ)`, `|μ| < 1`; its transform is `(1−μ)/(λ−μ)`.
    pub fn geometric(mu: Complex<T>) -> Self {
        let one = c(T::one());
        let scale = (one - mu).norm();
        let r = mu.norm();
        Self::from_fn(Shape::Vector(1), format!("geometric({mu})"), move |n| vec![mu.powu(n as u32) * (one - mu)])
            .with_tail_sup(move |j| r.powi(j.min(i32::MAX as u64) as i32) * scale)
    }

    /// Finitely supported sequence (zero beyond the given terms).
    pub fn finite(terms: Vec<Complex<T>>) -> Self {
        let terms = Arc::new(terms);
        let t2 = Arc::clone(&terms);
        Self::from_fn(Shape::Vector(1), "finite", move |n| vec![terms.get(n as usize).copied().unwrap_or_else(|| c(T::zero()))])
            .with_tail_sup(move |j| t2.iter().skip(j as usize).map(|z| z.norm()).fold(T::zero(), T::max))
    }

    /// The orbit `x_n = Tⁿ(I−T)`.
    pub fn operator_orbit(op: &Operator<T>) -> Self {
        match op {
            Operator::Normal(eig) => {
                let one = c(T::one());
                let eig = Arc::new(eig.clone());
                let e2 = Arc::clone(&eig);
                Self::from_fn(Shape::Diagonal(eig.len()), "orbit", move |n| eig.iter().map(|mu| mu.powu(n as u32) * (one - mu)).collect())
                    .with_tail_sup(move |j| {
                        e2.iter().map(|mu| mu.norm().powi(j.min(i32::MAX as u64) as i32) * (one - mu).norm()).fold(T::zero(), T::max)
                    })
            }
            Operator::Matrix(m) => {
                Self { shape: Shape::Matrix(m.rows()), generator: Generator::DenseOrbit(m.clone()), tail_sup: None, label: "orbit".into() }
            }
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm(&self, v: &[Complex<T>]) -> T {
        self.shape.norm(v)
    }

    pub fn tail_sup(&self, j: u64) -> Option<T> {
        self.tail_sup.as_ref().map(|f| f(j))
    }

    /// Terms `x_0, …, x_{len−1}`.
    pub fn terms(&self, len: usize) -> Vec<Vec<Complex<T>>> {
        match &self.generator {
            Generator::Terms(f) => (0..len as u64).map(|n| f(n)).collect(),
            Generator::DenseOrbit(m) => {
                let one = c(T::one());
                let mut x = CMatrix::identity(m.rows()).lincomb(one, m, -one);
                let mut out = Vec::with_capacity(len);
                for n in 0..len {
                    if n > 0 {
                        x = m.mul(&x);
                    }
                    out.push(x.as_slice().to_vec());
                }
                out
            }
        }
    }

    /// Partial sums `s_n = Σ_{k≤n} x_k` for `n < len`.
    pub fn partial_sums(&self, len: usize) -> Vec<Vec<Complex<T>>> {
        let mut acc = vec![c(T::zero()); self.shape.len()];
        self.terms(len)
            .into_iter()
            .map(|x| {
                acc.iter_mut().zip(&x).for_each(|(a, b)| *a = *a + *b);
                acc.clone()
            })
            .collect()
    }
}

/// A boundary function `θ ↦ F(e^{iθ})`, defined away from `θ = 0`.
#[derive(Clone)]
pub struct BoundarySampler<T> {
    shape: Shape,
    f: BoundaryFn<T>,
}

impl<T> fmt::Debug for BoundarySampler<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundarySampler").field("shape", &self.shape).finish()
    }
}

impl<T: Real> BoundarySampler<T> {
    pub fn new(shape: Shape, f: impl Fn(T) -> Vec<Complex<T>> + Send + Sync + 'static) -> Self {
        Self { shape, f: Arc::new(f) }
    }

    pub fn eval(&self, theta: T) -> Vec<Complex<T>> {
        (self.f)(theta)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn zero() -> Self {
        Self::new(Shape::Vector(1), |_| vec![c(T::zero())])
    }

    /// `F(λ) = (1−μ)/(λ−μ)`, the boundary function of [`Sequence::geometric`].
    pub fn geometric(mu: Complex<T>) -> Self {
        let one = c(T::one());
        Self::new(Shape::Vector(1), move |th| vec![(one - mu) / (Complex::from_polar(T::one(), th) - mu)])
    }

    /// `F(λ) = 1/(λ+1)`, for the alternating sequence (singular at `θ = ±π`).
    pub fn alternating() -> Self {
        let one = c(T::one());
        Self::new(Shape::Vector(1), move |th| vec![(Complex::from_polar(T::one(), th) + one).inv()])
    }

    /// `F(λ) = (I−T) R(λ,T)` for the orbit of `op`.
    pub fn operator(op: &Operator<T>) -> Self {
        let one = c(T::one());
        match op {
            Operator::Normal(eig) => {
                let eig = eig.clone();
                Self::new(Shape::Diagonal(eig.len()), move |th| {
                    let lambda = Complex::from_polar(T::one(), th);
                    eig.iter().map(|mu| (one - mu) / (lambda - mu)).collect()
                })
            }
            Operator::Matrix(m) => {
                let m = m.clone();
                let n = m.rows();
                Self::new(Shape::Matrix(n), move |th| {
                    let lambda = Complex::from_polar(T::one(), th);
                    let id = CMatrix::identity(n);
                    let shifted = id.lincomb(lambda, &m, -one);
                    match shifted.inverse() {
                        Some(r) => id.lincomb(one, &m, -one).mul(&r).as_slice().to_vec(),
                        None => vec![Complex::new(T::nan(), T::nan()); n * n],
                    }
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorSpec;

    #[test]
    fn partial_sums_consistent() {
        let s = Sequence::<f64>::alternating().partial_sums(6);
        let re: Vec<f64> = s.iter().map(|v| v[0].re).collect();
        assert_eq!(re, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let ones = Sequence::<f64>::ones().partial_sums(4);
        assert_eq!(ones[3][0].re, 4.0);
    }

    #[test]
    fn orbit_sums_telescope() {
        // Σ_{k≤n} Tᵏ(I−T) = I − T^{n+1}
        let op = OperatorSpec::Dense { entries: vec![vec![[0.5, 0.0], [0.2, 0.0]], vec![[0.0, 0.0], [0.3, 0.1]]] }.build::<f64>().unwrap();
        let seq = Sequence::operator_orbit(&op);
        let s = seq.partial_sums(8);
        let Operator::Matrix(m) = &op else { unreachable!() };
        let mut p = CMatrix::identity(2);
        for _ in 0..8 {
            p = m.mul(&p);
        }
        let expect = CMatrix::identity(2).lincomb(c(1.0), &p, c(-1.0));
        for (a, b) in s[7].iter().zip(expect.as_slice()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn shapes_norm_correctly() {
        let v = vec![Complex::new(3.0, 0.0), Complex::new(0.0, 4.0)];
        assert_eq!(Shape::Vector(2).norm(&v), 5.0);
        assert_eq!(Shape::Diagonal(2).norm(&v), 4.0);
        let m = vec![c(0.0), c(2.0), c(0.0), c(0.0)];
        assert!((Shape::Matrix(2).norm::<f64>(&m) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn normal_orbit_tail_bound_is_exact_sup() {
        let op = OperatorSpec::diagonal_real(&[0.5, 0.9]).build::<f64>().unwrap();
        let seq = Sequence::operator_orbit(&op);
        let terms = seq.terms(60);
        for j in [0u64, 5, 20] {
            let sup = terms[j as usize..].iter().map(|x| seq.norm(x)).fold(0.0, f64::max);
            assert!(seq.tail_sup(j).unwrap() >= sup - 1e-15);
        }
    }
}
