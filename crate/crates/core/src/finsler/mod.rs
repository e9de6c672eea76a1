//! Pseudonorms on `C^n`, sphere quadrature, dual norms and Busemann
//! convexification.
//!
//! A pseudonorm is a gauge `F` with `F(c v) = |c| F(v)` for complex `c`. It
//! need not satisfy the triangle inequality; its open unit ball `{F < 1}` is
//! balanced but possibly nonconvex.

mod ascent;
mod hull;
mod quadrature;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::linalg::{mat_vec, norm2, random, CMatrix, HermitianForm, C64};

pub use ascent::{maximize_on_sphere, AscentConfig, AscentResult};
pub use hull::{busemann_convexify, dual_norm, triangle_defect, DualNorm, HullConfig, TabulatedHull};
pub use quadrature::{derive_seed, gauss_legendre, sphere_area, sphere_integrate, QuadratureRule, SphereNodes};

/// A positively homogeneous, phase-invariant gauge on `C^n`.
pub trait Pseudonorm: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, v: &[C64]) -> f64;

    /// Whether the gauge is claimed to satisfy the triangle inequality.
    /// Consumers verify the claim on samples before relying on it.
    fn claims_triangle(&self) -> bool {
        false
    }

    /// `F(v) = 0` only for `v = 0`.
    fn is_positive_definite(&self) -> bool {
        true
    }
}

pub type Norm = Arc<dyn Pseudonorm>;

/// `‖v‖`, the standard Hermitian norm.
#[derive(Clone, Debug)]
pub struct Euclidean {
    pub n: usize,
}

impl Pseudonorm for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, v: &[C64]) -> f64 {
        norm2(v)
    }
    fn claims_triangle(&self) -> bool {
        true
    }
}

/// `F = sqrt(h)` for a positive definite Hermitian form `h`.
#[derive(Clone, Debug)]
pub struct HermitianNorm {
    form: HermitianForm,
}

impl HermitianNorm {
    pub fn new(form: HermitianForm) -> Self {
        HermitianNorm { form }
    }

    pub fn form(&self) -> &HermitianForm {
        &self.form
    }
}

impl Pseudonorm for HermitianNorm {
    fn dim(&self) -> usize {
        self.form.dim()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        self.form.quadratic(v).max(0.0).sqrt()
    }
    fn claims_triangle(&self) -> bool {
        true
    }
}

/// `(Σ |v_j|^q)^{1/q}`; a norm for `q ≥ 1`, only a pseudonorm for `q < 1`.
#[derive(Clone, Debug)]
pub struct LpNorm {
    pub n: usize,
    pub q: f64,
}

impl Pseudonorm for LpNorm {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, v: &[C64]) -> f64 {
        let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = v.iter().map(|z| (z.norm() / m).powf(self.q)).sum();
        m * s.powf(1.0 / self.q)
    }
    fn claims_triangle(&self) -> bool {
        self.q >= 1.0
    }
}

/// `max_k F_k(π_k v)` over consecutive coordinate blocks.
#[derive(Clone, Debug)]
pub struct ProductNorm {
    factors: Vec<Norm>,
}

impl ProductNorm {
    pub fn new(factors: Vec<Norm>) -> Self {
        ProductNorm { factors }
    }

    pub fn factors(&self) -> &[Norm] {
        &self.factors
    }
}

impl Pseudonorm for ProductNorm {
    fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        let mut off = 0;
        let mut best = 0.0_f64;
        for f in &self.factors {
            let k = f.dim();
            best = best.max(f.eval(&v[off..off + k]));
            off += k;
        }
        best
    }
    fn claims_triangle(&self) -> bool {
        self.factors.iter().all(|f| f.claims_triangle())
    }
    fn is_positive_definite(&self) -> bool {
        self.factors.iter().all(|f| f.is_positive_definite())
    }
}

/// `max_j |v_j|` on `C^n`: the gauge of the unit polydisc.
pub fn max_norm(n: usize) -> Norm {
    Arc::new(ProductNorm::new(
        (0..n).map(|_| Arc::new(Euclidean { n: 1 }) as Norm).collect(),
    ))
}

/// `v ↦ F(A v)` for a square or tall matrix `A`.
#[derive(Clone, Debug)]
pub struct LinearPullback {
    inner: Norm,
    a: CMatrix,
    injective: bool,
}

impl LinearPullback {
    pub fn new(inner: Norm, a: CMatrix) -> Self {
        assert_eq!(inner.dim(), a.nrows(), "pullback matrix rows must match the gauge");
        let injective = a.ncols() <= a.nrows() && a.clone().svd(false, false).singular_values.min() > 0.0;
        LinearPullback { inner, a, injective }
    }
}

impl Pseudonorm for LinearPullback {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        self.inner.eval(&mat_vec(&self.a, v))
    }
    fn claims_triangle(&self) -> bool {
        self.inner.claims_triangle()
    }
    fn is_positive_definite(&self) -> bool {
        self.injective && self.inner.is_positive_definite()
    }
}

/// `v ↦ c F(v)` for `c > 0`.
#[derive(Clone, Debug)]
pub struct Scaled {
    pub inner: Norm,
    pub factor: f64,
}

impl Pseudonorm for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        self.factor * self.inner.eval(v)
    }
    fn claims_triangle(&self) -> bool {
        self.inner.claims_triangle()
    }
    fn is_positive_definite(&self) -> bool {
        self.factor > 0.0 && self.inner.is_positive_definite()
    }
}

type GaugeFn = dyn Fn(&[C64]) -> f64 + Send + Sync;

/// A gauge given by a closure.
#[derive(Clone)]
pub struct FnNorm {
    n: usize,
    label: String,
    triangle: bool,
    f: Arc<GaugeFn>,
}

impl FnNorm {
    pub fn new(
        n: usize,
        label: impl Into<String>,
        triangle: bool,
        f: impl Fn(&[C64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnNorm {
            n,
            label: label.into(),
            triangle,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for FnNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnNorm")
            .field("n", &self.n)
            .field("label", &self.label)
            .finish()
    }
}

impl Pseudonorm for FnNorm {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, v: &[C64]) -> f64 {
        (self.f)(v)
    }
    fn claims_triangle(&self) -> bool {
        self.triangle
    }
}

/// Largest relative deviation from `F(c v) = |c| F(v)` over random samples.
pub fn homogeneity_defect<R: Rng + ?Sized>(f: &dyn Pseudonorm, samples: usize, rng: &mut R) -> f64 {
    let n = f.dim();
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let v = random::unit_vector(n, rng);
        let c = random::complex_gaussian(rng);
        let cv: Vec<C64> = v.iter().map(|z| c * z).collect();
        let base = f.eval(&v);
        let dev = (f.eval(&cv) - c.norm() * base).abs() / (c.norm() * base).max(f64::MIN_POSITIVE);
        worst = worst.max(dev);
    }
    worst
}

/// An even gauge on `R^d`.
pub trait RealGauge: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

/// A complex pseudonorm viewed on `R^{2n}` with interleaved coordinates
/// `(Re v_1, Im v_1, Re v_2, ...)`.
#[derive(Clone, Debug)]
pub struct Realified(pub Norm);

impl RealGauge for Realified {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.0.eval(&to_complex(x))
    }
}

/// `sqrt(x^T Q x)` for symmetric positive definite `Q`.
#[derive(Clone, Debug)]
pub struct RealQuadratic {
    pub q: DMatrix<f64>,
}

impl RealGauge for RealQuadratic {
    fn dim(&self) -> usize {
        self.q.nrows()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += x[i] * self.q[(i, j)] * x[j];
            }
        }
        s.max(0.0).sqrt()
    }
}

/// `max_i |x_i|` on `R^d`.
#[derive(Clone, Debug)]
pub struct RealSup {
    pub d: usize,
}

impl RealGauge for RealSup {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

pub fn to_real(v: &[C64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}
