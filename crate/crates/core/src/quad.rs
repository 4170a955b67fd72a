//! Adaptive Simpson quadrature with a cap on panel width, so oscillatory
//! integrands never see more than a fixed phase change per panel.

use num_complex::Complex;

use crate::scalar::Real;

/// Values that can be integrated: closed under real linear combination.
pub trait Quadrable<T: Real>: Clone {
    fn zero_like(&self) -> Self;
    /// `a·self + b·other`
    fn lincomb(&self, a: T, other: &Self, b: T) -> Self;
    fn magnitude(&self) -> T;
}

impl<T: Real> Quadrable<T> for T {
    fn zero_like(&self) -> Self {
        T::zero()
    }
    fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        a * *self + b * *other
    }
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Quadrable<T> for Complex<T> {
    fn zero_like(&self) -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        *self * a + *other * b
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
}

impl<T: Real> Quadrable<T> for Vec<Complex<T>> {
    fn zero_like(&self) -> Self {
        vec![Complex::new(T::zero(), T::zero()); self.len()]
    }
    fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        self.iter().zip(other).map(|(x, y)| *x * a + *y * b).collect()
    }
    fn magnitude(&self) -> T {
        self.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions<T> {
    /// Absolute error target over the whole interval.
    pub tol: T,
    /// Widest panel allowed before adaptive refinement starts.
    pub max_panel: T,
    /// Recursion depth limit per panel.
    pub max_depth: u32,
}

impl<T: Real> QuadOptions<T> {
    pub fn new(tol: T, max_panel: T) -> Self {
        Self { tol, max_panel, max_depth: 40 }
    }

    /// Panel cap `π / (4 max(1, |n|))` for a kernel oscillating like `e^{inθ}`.
    pub fn oscillatory(tol: T, n: i64) -> Self {
        let freq = T::from_i64_lossy(n.abs().max(1));
        Self::new(tol, T::PI() / (T::lit(4.0) * freq))
    }
}

/// Result of an integration: value plus accumulated error estimate.
#[derive(Clone, Debug)]
pub struct Integral<V, T> {
    pub value: V,
    pub error: T,
}

struct Node<V> {
    fa: V,
    fm: V,
    fb: V,
    whole: V,
}

fn simpson<T: Real, V: Quadrable<T>>(fa: &V, fm: &V, fb: &V, h: T) -> V {
    // h/6 (fa + 4 fm + fb)
    let s = fa.lincomb(T::one(), fm, T::lit(4.0)).lincomb(T::one(), fb, T::one());
    s.lincomb(h / T::lit(6.0), &s.zero_like(), T::zero())
}

fn recurse<T: Real, V: Quadrable<T>, F: Fn(T) -> V>(f: &F, a: T, b: T, node: Node<V>, tol: T, depth: u32, err_acc: &mut T) -> V {
    let m = (a + b) * T::half();
    let lm = (a + m) * T::half();
    let rm = (m + b) * T::half();
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(&node.fa, &flm, &node.fm, m - a);
    let right = simpson(&node.fm, &frm, &node.fb, b - m);
    let sum = left.lincomb(T::one(), &right, T::one());
    let diff = sum.lincomb(T::one(), &node.whole, -T::one());
    let err = diff.magnitude() / T::lit(15.0);
    if depth == 0 || err <= tol {
        *err_acc = *err_acc + err;
        // Richardson extrapolation
        return sum.lincomb(T::one(), &diff, T::one() / T::lit(15.0));
    }
    let half_tol = tol * T::half();
    let l = recurse(f, a, m, Node { fa: node.fa, fm: flm, fb: node.fm.clone(), whole: left }, half_tol, depth - 1, err_acc);
    let r = recurse(f, m, b, Node { fa: node.fm, fm: frm, fb: node.fb, whole: right }, half_tol, depth - 1, err_acc);
    l.lincomb(T::one(), &r, T::one())
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<T, V, F>(f: F, a: T, b: T, opts: QuadOptions<T>) -> Integral<V, T>
where
    T: Real,
    V: Quadrable<T>,
    F: Fn(T) -> V,
{
    let probe = f(a);
    if a == b {
        return Integral { value: probe.zero_like(), error: T::zero() };
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let width = hi - lo;
    let panels = (width / opts.max_panel).ceil().to_usize().unwrap_or(1).max(1);
    let h = width / T::from_usize_lossy(panels);
    let panel_tol = opts.tol / T::from_usize_lossy(panels);
    let mut total = probe.zero_like();
    let mut err = T::zero();
    let mut fa = f(lo);
    for i in 0..panels {
        let pa = lo + h * T::from_usize_lossy(i);
        let pb = if i + 1 == panels { hi } else { lo + h * T::from_usize_lossy(i + 1) };
        let fb = f(pb);
        let fm = f((pa + pb) * T::half());
        let whole = simpson(&fa, &fm, &fb, pb - pa);
        let node = Node { fa, fm, fb: fb.clone(), whole };
        let v = recurse(&f, pa, pb, node, panel_tol, opts.max_depth, &mut err);
        total = total.lincomb(T::one(), &v, T::one());
        fa = fb;
    }
    Integral { value: total.lincomb(sign, &probe.zero_like(), T::zero()), error: err }
}

/// Integrate over consecutive subintervals split at `breaks` (sorted,
/// including both ends), so kinks in the integrand fall on panel edges.
pub fn integrate_piecewise<T, V, F>(f: F, breaks: &[T], opts: QuadOptions<T>) -> Integral<V, T>
where
    T: Real,
    V: Quadrable<T>,
    F: Fn(T) -> V,
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let total_width = breaks[breaks.len() - 1] - breaks[0];
    let mut acc: Option<V> = None;
    let mut err = T::zero();
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let share = if total_width > T::zero() { (w[1] - w[0]) / total_width } else { T::one() };
        let piece = integrate(&f, w[0], w[1], QuadOptions { tol: opts.tol * share, ..opts });
        err = err + piece.error;
        acc = Some(match acc {
            None => piece.value,
            Some(a) => a.lincomb(T::one(), &piece.value, T::one()),
        });
    }
    let value = acc.unwrap_or_else(|| f(breaks[0]).zero_like());
    Integral { value, error: err }
}
