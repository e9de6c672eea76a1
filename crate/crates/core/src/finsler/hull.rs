//! Dual norms and the convex-hull (double dual) gauge.
//!
//! The dual space of `C^n` is identified with `C^n` through the bilinear
//! pairing `θ(v) = Σ θ_j v_j`. For a pseudonorm `F`,
//!
//! ```text
//! F*(θ) = sup_{|ω|=1} |θ(ω)| / F(ω),     F^(v) = sup_θ |θ(v)| / F*(θ),
//! ```
//!
//! and the unit ball of `F^ = (F*)*` is the convex hull of `{F < 1}`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{maximize_on_sphere, to_complex, to_real, AscentConfig, Norm, Pseudonorm};
use crate::error::{Error, Result};
use crate::linalg::{norm2, pairing, random, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct HullConfig {
    pub ascent: AscentConfig,
    /// Latitude steps of the dual direction net for `n = 2`.
    pub net_radial: usize,
    /// Relative-phase steps of the dual direction net for `n = 2`.
    pub net_phases: usize,
    /// Random dual directions for `n ≥ 3`.
    pub net_random: usize,
    /// Sampled pairs used to check a claimed triangle inequality.
    pub triangle_checks: usize,
    pub seed: u64,
}

impl Default for HullConfig {
    fn default() -> Self {
        HullConfig {
            ascent: AscentConfig::default(),
            net_radial: 32,
            net_phases: 64,
            net_random: 4000,
            triangle_checks: 512,
            seed: 0xb05e,
        }
    }
}

/// `F*` evaluated on demand by multistart ascent.
#[derive(Clone, Debug)]
pub struct DualNorm {
    primal: Norm,
    cfg: AscentConfig,
}

impl DualNorm {
    /// `F*(θ)` together with the ascent's convergence flag.
    pub fn evaluate(&self, theta: &[C64]) -> (f64, bool, Vec<C64>) {
        let n = self.primal.dim();
        let tn = norm2(theta);
        if tn == 0.0 {
            return (0.0, true, vec![C64::new(0.0, 0.0); n]);
        }
        let primal = &self.primal;
        let obj = |x: &[f64]| {
            let w = to_complex(x);
            pairing(theta, &w).norm() / primal.eval(&w)
        };
        let mut seeds = Vec::with_capacity(n + 1);
        seeds.push(to_real(&theta.iter().map(|z| z.conj() / tn).collect::<Vec<_>>()));
        for j in 0..n {
            let mut e = vec![0.0; 2 * n];
            e[2 * j] = 1.0;
            seeds.push(e);
        }
        let res = maximize_on_sphere(2 * n, &obj, &seeds, &self.cfg);
        (res.value, res.converged, to_complex(&res.point))
    }

    /// Like [`Pseudonorm::eval`] but reports non-convergence with the best
    /// value found.
    pub fn evaluate_checked(&self, theta: &[C64]) -> Result<f64> {
        let (v, converged, _) = self.evaluate(theta);
        if converged {
            Ok(v)
        } else {
            Err(Error::Convergence {
                what: "dual norm ascent",
                iterations: self.cfg.max_iter,
                best: v,
            })
        }
    }
}

impl Pseudonorm for DualNorm {
    fn dim(&self) -> usize {
        self.primal.dim()
    }
    fn eval(&self, theta: &[C64]) -> f64 {
        self.evaluate(theta).0
    }
    fn claims_triangle(&self) -> bool {
        true
    }
}

/// `F*`; requires `F` positive definite so that the supremum is finite.
pub fn dual_norm(f: &Norm, cfg: &AscentConfig) -> Result<Arc<DualNorm>> {
    if !f.is_positive_definite() {
        return Err(Error::InvalidSpec("dual norm needs a positive definite gauge".into()));
    }
    Ok(Arc::new(DualNorm {
        primal: f.clone(),
        cfg: cfg.clone(),
    }))
}

/// `max_i |θ_i(v)| / F*(θ_i)` over a fixed net of dual directions: the gauge
/// of an intersection of supporting slabs of the convex hull. It is a norm
/// for every net, and it converges to `F^` from below as the net refines.
#[derive(Clone, Debug)]
pub struct TabulatedHull {
    n: usize,
    rows: Vec<Vec<C64>>,
}

impl TabulatedHull {
    pub fn net_size(&self) -> usize {
        self.rows.len()
    }
}

impl Pseudonorm for TabulatedHull {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, v: &[C64]) -> f64 {
        self.rows.iter().map(|r| pairing(r, v).norm()).fold(0.0, f64::max)
    }
    fn claims_triangle(&self) -> bool {
        true
    }
}

/// Largest relative violation `F(v+w) / (F(v)+F(w)) - 1` over structured and
/// random pairs; `≤ 0` when no violation was found.
pub fn triangle_defect(f: &dyn Pseudonorm, pairs: usize, seed: u64) -> f64 {
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut check = |v: &[C64], w: &[C64]| {
        let s: Vec<C64> = v.iter().zip(w).map(|(a, b)| a + b).collect();
        let rhs = f.eval(v) + f.eval(w);
        if rhs > 0.0 {
            worst = worst.max(f.eval(&s) / rhs - 1.0);
        }
    };
    let phases = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
        C64::from_polar(1.0, PI / 4.0),
    ];
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            for ph in &phases {
                for scale in [1.0, 0.5, 2.0] {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    let mut w = vec![C64::new(0.0, 0.0); n];
                    v[j] = C64::new(1.0, 0.0);
                    w[k] = ph * scale;
                    check(&v, &w);
                }
            }
        }
    }
    for _ in 0..pairs {
        let v = random::unit_vector(n, &mut rng);
        let w = random::unit_vector(n, &mut rng);
        check(&v, &w);
    }
    worst
}

fn dual_net(n: usize, cfg: &HullConfig) -> Vec<Vec<C64>> {
    let mut net = Vec::new();
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        net.push(e);
    }
    if n == 2 {
        let t = cfg.net_radial.max(2);
        let m = cfg.net_phases.max(1);
        for a in 1..t {
            let chi = 0.5 * PI * a as f64 / t as f64;
            for b in 0..m {
                let psi = 2.0 * PI * b as f64 / m as f64;
                net.push(vec![C64::new(chi.cos(), 0.0), C64::from_polar(chi.sin(), psi)]);
            }
        }
    } else {
        // equal-modulus directions with quarter-turn phases, then random fill
        let quarter = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        for j in 0..n {
            for k in j + 1..n {
                for q in &quarter {
                    let mut e = vec![C64::new(0.0, 0.0); n];
                    e[j] = C64::new(1.0, 0.0);
                    e[k] = *q;
                    net.push(e);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.net_random {
            net.push(random::unit_vector(n, &mut rng));
        }
    }
    net.into_iter()
        .map(|v| {
            let r = norm2(&v);
            v.into_iter().map(|z| z / r).collect()
        })
        .collect()
}

/// Busemann convexification `F^ = (F*)*`.
///
/// Returns `F` itself when `n = 1` (every balanced gauge on `C` is a
/// multiple of `|v|`) or when `F` claims the triangle inequality and the claim
/// survives [`triangle_defect`] sampling. Otherwise the dual norm is tabulated
/// on a net of directions and the result is a [`TabulatedHull`].
pub fn busemann_convexify(f: &Norm, cfg: &HullConfig) -> Result<Norm> {
    if !f.is_positive_definite() {
        return Err(Error::InvalidSpec(
            "Busemann convexification needs a positive definite gauge".into(),
        ));
    }
    let n = f.dim();
    if n == 1 {
        return Ok(f.clone());
    }
    if f.claims_triangle() && triangle_defect(f.as_ref(), cfg.triangle_checks, cfg.seed) <= 1e-9 {
        return Ok(f.clone());
    }
    let dual = dual_norm(f, &cfg.ascent)?;
    let net = dual_net(n, cfg);
    let rows: Vec<Vec<C64>> = net
        .par_iter()
        .map(|theta| {
            let (c, _, _) = dual.evaluate(theta);
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonFinite {
                    context: "dual norm on the direction net".into(),
                });
            }
            Ok(theta.iter().map(|z| z / c).collect())
        })
        .collect::<Result<_>>()?;
    Ok(Arc::new(TabulatedHull { n, rows }))
}
