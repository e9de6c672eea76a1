//! Minimum-volume enclosing Hermitian ellipsoids of balanced bodies and the
//! Wu metric.
//!
//! A balanced body `K = {F ≤ 1}` is represented by boundary witnesses
//! `x_i` (`F(x_i) = 1`). For weights `u` on the witnesses let
//! `M(u) = Σ u_i x_i x_i^H`; the minimum-volume centered Hermitian ellipsoid
//! containing the witnesses is `{x : x^H M^{-1} x ≤ n}` for the `u`
//! maximizing `log det M(u)`. Because `x x^H` is unchanged by `x ↦ e^{iφ} x`,
//! each witness stands for its whole circle orbit and the optimum is a
//! genuinely Hermitian form.
//!
//! The solver alternates an exact solve on the current witnesses with a
//! search for the boundary direction that violates the current ellipsoid
//! most, adding violators as new witnesses until the largest violation is
//! below the tolerance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{indicatrix, kobayashi_busemann, DomainSpec};
use crate::error::{Error, Result};
use crate::finsler::{derive_seed, maximize_on_sphere, to_complex, to_real, AscentConfig, HullConfig, Pseudonorm};
use nalgebra::{DMatrix, DVector};

use crate::linalg::{random, CMatrix, HermitianForm, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct MveeConfig {
    /// Target for both the weight optimality gap and the relative violation.
    pub tol: f64,
    /// Cap on the total number of Newton steps.
    pub max_iter: usize,
    pub random_witnesses: usize,
    /// Random directions screened for violations each round.
    pub screen: usize,
    pub max_rounds: usize,
    pub ascent: AscentConfig,
    pub seed: u64,
}

impl Default for MveeConfig {
    fn default() -> Self {
        MveeConfig {
            tol: 1e-7,
            max_iter: 10_000,
            random_witnesses: 64,
            screen: 2048,
            max_rounds: 60,
            ascent: AscentConfig::default(),
            seed: 0x30ee,
        }
    }
}

/// Enclosing ellipsoid `{v : evaluate(form, v, v) ≤ 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidForm {
    pub form: HermitianForm,
    /// Logarithm of the Lebesgue measure of the ellipsoid in `C^n`.
    pub log_volume: f64,
    pub iterations: usize,
    /// Largest of the weight optimality gap and the relative boundary
    /// violation at exit.
    pub gap: f64,
    pub witnesses: usize,
    pub rounds: usize,
}

/// `x^H A x` for Hermitian `A`.
fn hquad(a: &CMatrix, x: &[C64]) -> f64 {
    let n = x.len();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[i].conj() * a[(i, j)] * x[j];
        }
    }
    s.re
}

fn hermitian_inverse(m: &CMatrix) -> Result<CMatrix> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let c = h.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: HermitianForm::symmetrized(h.clone()).min_eigenvalue(),
    })?;
    Ok(c.inverse())
}

/// Real basis of the Hermitian `n × n` matrices: diagonal units, then for
/// each `j < k` the real and imaginary off-diagonal pairs.
fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(j, j)] = C64::new(1.0, 0.0);
        basis.push(e);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut re = CMatrix::zeros(n, n);
            re[(j, k)] = C64::new(1.0, 0.0);
            re[(k, j)] = C64::new(1.0, 0.0);
            basis.push(re);
            let mut im = CMatrix::zeros(n, n);
            im[(j, k)] = C64::new(0.0, 1.0);
            im[(k, j)] = C64::new(0.0, -1.0);
            basis.push(im);
        }
    }
    basis
}

/// Minimum-volume ellipsoid `{x^H P x ≤ 1}` containing the witnesses.
///
/// Minimizes `−log det P` subject to `x_i^H P x_i ≤ 1` with a log barrier
/// and damped Newton steps in the `n²` real coordinates of `P`, following
/// the central path until the duality gap `m/t` drops below `gap`. Returns
/// `(P, duality gap, Newton steps)`.
fn barrier_mvee(points: &[Vec<C64>], gap: f64) -> Result<(CMatrix, f64, usize)> {
    let n = points[0].len();
    let basis = hermitian_basis(n);
    let d = basis.len();
    let m = points.len();
    let rows: Vec<DVector<f64>> = points
        .iter()
        .map(|x| DVector::from_iterator(d, basis.iter().map(|e| hquad(e, x))))
        .collect();
    let r2max = points
        .iter()
        .map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut p = DVector::<f64>::zeros(d);
    for j in 0..n {
        p[j] = 0.5 / r2max;
    }
    let to_matrix = |p: &DVector<f64>| -> CMatrix {
        basis
            .iter()
            .zip(p.iter())
            .fold(CMatrix::zeros(n, n), |acc, (e, &c)| acc + e * C64::from(c))
    };
    // barrier objective scaled by 1/t; None outside the feasible set
    let objective = |p: &DVector<f64>, inv_t: f64| -> Option<f64> {
        let chol = to_matrix(p).cholesky()?;
        let logdet: f64 = (0..n).map(|i| 2.0 * chol.l_dirty()[(i, i)].re.ln()).sum();
        let mut barrier = 0.0;
        for a in &rows {
            let slack = 1.0 - a.dot(p);
            if !(slack > 0.0) {
                return None;
            }
            barrier -= slack.ln();
        }
        Some(-logdet + inv_t * barrier)
    };

    let mut steps = 0;
    let mut t = 1.0;
    loop {
        let inv_t = 1.0 / t;
        for _ in 0..100 {
            let pinv = hermitian_inverse(&to_matrix(&p))?;
            let pe: Vec<CMatrix> = basis.iter().map(|e| &pinv * e).collect();
            let mut grad = DVector::<f64>::zeros(d);
            let mut hess = DMatrix::<f64>::zeros(d, d);
            for k in 0..d {
                grad[k] = -pe[k].trace().re;
                for l in k..d {
                    let h = (&pe[k] * &pe[l]).trace().re;
                    hess[(k, l)] = h;
                    hess[(l, k)] = h;
                }
            }
            for a in &rows {
                let slack = 1.0 - a.dot(&p);
                grad += a * (inv_t / slack);
                hess += (a * a.transpose()) * (inv_t / (slack * slack));
            }
            let step = match hess.cholesky() {
                Some(c) => -c.solve(&grad),
                None => -&grad,
            };
            let decrement = -grad.dot(&step);
            steps += 1;
            if decrement < 1e-20 {
                break;
            }
            let f0 = objective(&p, inv_t).ok_or_else(|| Error::NonFinite {
                context: "barrier iterate left the feasible set".into(),
            })?;
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-16 {
                let trial = &p + &step * s;
                if let Some(ft) = objective(&trial, inv_t) {
                    if ft <= f0 - 0.25 * s * decrement {
                        p = trial;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved || decrement < 1e-16 {
                break;
            }
        }
        if m as f64 / t < gap {
            break;
        }
        t *= 8.0;
    }
    Ok((to_matrix(&p), m as f64 / t, steps))
}

/// Ratio `x^H P x / F(x)^2` on a unit vector, with `P = M^{-1}/n`.
fn violation(f: &dyn Pseudonorm, p: &CMatrix, x: &[C64]) -> f64 {
    let fx = f.eval(x);
    hquad(p, x) / (fx * fx)
}

/// Minimum-volume centered Hermitian ellipsoid containing `{F ≤ 1}`.
pub fn mvee_balanced(f: &dyn Pseudonorm, cfg: &MveeConfig) -> Result<EllipsoidForm> {
    let n = f.dim();
    if n == 0 || !f.is_positive_definite() {
        return Err(Error::InvalidSpec(
            "MVEE needs a positive definite gauge of positive dimension".into(),
        ));
    }
    let to_boundary = |x: Vec<C64>| -> Result<Vec<C64>> {
        let fx = f.eval(&x);
        if !(fx > 0.0) || !fx.is_finite() {
            return Err(Error::Divergent {
                context: format!("gauge value {fx:e} on the unit sphere"),
            });
        }
        Ok(x.into_iter().map(|z| z / fx).collect())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "witnesses"));
    let mut points = Vec::with_capacity(2 * n + cfg.random_witnesses);
    for j in 0..n {
        for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = unit;
            points.push(to_boundary(e)?);
        }
    }
    for _ in 0..cfg.random_witnesses {
        points.push(to_boundary(random::unit_vector(n, &mut rng))?);
    }
    let mut screen_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "screen"));
    let screen: Vec<Vec<C64>> = (0..cfg.screen)
        .map(|_| random::unit_vector(n, &mut screen_rng))
        .collect();

    let mut iterations = 0;
    let mut rounds = 0;
    let nf = n as f64;
    let (p, gap) = loop {
        rounds += 1;
        let (p, wgap, used) = barrier_mvee(&points, cfg.tol * 1e-3)?;
        iterations += used;

        // violation search: screened random directions, then multistart ascent
        let mut scored: Vec<(f64, usize)> = screen
            .iter()
            .enumerate()
            .map(|(i, x)| (violation(f, &p, x), i))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let seeds: Vec<Vec<f64>> = scored.iter().take(8).map(|&(_, i)| to_real(&screen[i])).collect();
        let obj = |y: &[f64]| violation(f, &p, &to_complex(y));
        let acfg = AscentConfig {
            seed: derive_seed(cfg.ascent.seed, &format!("round-{rounds}")),
            ..cfg.ascent.clone()
        };
        let best = maximize_on_sphere(2 * n, &obj, &seeds, &acfg);
        let vmax = best.value.max(scored[0].0);
        let gap = wgap.max(vmax - 1.0);
        let done = gap <= cfg.tol || iterations >= cfg.max_iter || rounds >= cfg.max_rounds;
        if done {
            break (p, gap);
        }
        let mut added = 0;
        if best.value > 1.0 + cfg.tol {
            points.push(to_boundary(to_complex(&best.point))?);
            added += 1;
        }
        for &(v, i) in scored.iter().take(4) {
            if v > 1.0 + cfg.tol {
                points.push(to_boundary(screen[i].clone())?);
                added += 1;
            }
        }
        if added == 0 && wgap <= cfg.tol {
            break (p, gap);
        }
    };

    // Certify containment on everything examined: rescale by the largest
    // violation seen on witnesses and screened directions.
    let mut vmax: f64 = 1.0;
    for x in points.iter().chain(screen.iter()) {
        vmax = vmax.max(violation(f, &p, x));
    }
    let p = p / C64::from(vmax);
    let form = HermitianForm::from_standard_matrix(p);
    let det = form.eigenvalues().iter().map(|e| e.ln()).sum::<f64>();
    let log_volume = nf * std::f64::consts::PI.ln() - ln_factorial(n) - det;
    if gap > cfg.tol && iterations >= cfg.max_iter {
        return Err(Error::Convergence {
            what: "enclosing ellipsoid",
            iterations,
            best: gap,
        });
    }
    Ok(EllipsoidForm {
        form,
        log_volume,
        iterations,
        gap,
        witnesses: points.len(),
        rounds,
    })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Wu metric at `point`: the minimum-volume ellipsoid containing the
/// Kobayashi indicatrix.
pub fn wu_ellipsoid(spec: &DomainSpec, point: &[C64], cfg: &MveeConfig) -> Result<EllipsoidForm> {
    let f = indicatrix(spec, point)?;
    mvee_balanced(f.as_ref(), cfg)
}

pub fn wu_metric(spec: &DomainSpec, point: &[C64], cfg: &MveeConfig) -> Result<HermitianForm> {
    Ok(wu_ellipsoid(spec, point, cfg)?.form)
}

/// Extremes of `sqrt(w(v,v)) / k̂(v)` over sampled directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WuSandwich {
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub dim: usize,
    pub directions: usize,
    /// `sqrt(w) ≤ k̂ ≤ sqrt(m) sqrt(w)`: ratios within `[1/sqrt(m), 1]`.
    pub containment_direction: bool,
    /// `k̂ ≤ sqrt(w) ≤ sqrt(m) k̂`: ratios within `[1, sqrt(m)]`.
    pub reversed_direction: bool,
    /// `ratio_high / ratio_low ≤ sqrt(m)`.
    pub spread_within_john: bool,
}

/// Relative slack used for the sandwich flags.
pub const SANDWICH_SLACK: f64 = 1e-3;

/// Compares the Wu form with the Kobayashi-Busemann gauge on `directions`
/// seeded random unit vectors plus the coordinate axes.
pub fn wu_sandwich_report(
    spec: &DomainSpec,
    point: &[C64],
    wu: &HermitianForm,
    hull: &HullConfig,
    directions: usize,
    seed: u64,
) -> Result<WuSandwich> {
    let m = spec.dim();
    let khat = kobayashi_busemann(spec, point, hull)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "wu-sandwich"));
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    let mut dirs: Vec<Vec<C64>> = (0..m)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); m];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    dirs.extend((0..directions.saturating_sub(m)).map(|_| random::unit_vector(m, &mut rng)));
    for v in &dirs {
        let r = wu.quadratic(v).sqrt() / khat.eval(v);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let sm = (m as f64).sqrt();
    Ok(WuSandwich {
        ratio_low: lo,
        ratio_high: hi,
        dim: m,
        directions: dirs.len(),
        containment_direction: hi <= 1.0 + SANDWICH_SLACK && lo >= (1.0 - SANDWICH_SLACK) / sm,
        reversed_direction: lo >= 1.0 - SANDWICH_SLACK && hi <= sm * (1.0 + SANDWICH_SLACK),
        spread_within_john: hi / lo <= sm * (1.0 + SANDWICH_SLACK),
    })
}
