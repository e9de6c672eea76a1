//! Multistart projected gradient ascent on the unit sphere of `R^D`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Settings for [`maximize_on_sphere`].
///
/// `starts` candidate points (caller-supplied seeds first, then seeded random
/// points) are evaluated; ascent is run from the best `ascents` of them.
#[derive(Clone, Debug, PartialEq)]
pub struct AscentConfig {
    pub starts: usize,
    pub ascents: usize,
    pub step_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            starts: 32,
            ascents: 4,
            step_tol: 1e-8,
            max_iter: 2000,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AscentResult {
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    /// False when some ascent hit `max_iter` before its step fell below
    /// `step_tol`.
    pub converged: bool,
}

const FD_STEP: f64 = 1e-7;

fn normalize(x: &mut [f64]) -> bool {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < 1e-300 || !r.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= r);
    true
}

/// Maximizes `f` over the unit sphere of `R^real_dim`.
///
/// Non-finite objective values are treated as `-inf`.
pub fn maximize_on_sphere(
    real_dim: usize,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    seeds: &[Vec<f64>],
    cfg: &AscentConfig,
) -> AscentResult {
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::with_capacity(cfg.starts.max(seeds.len()));
    for s in seeds {
        let mut x = s.clone();
        if x.len() == real_dim && normalize(&mut x) {
            pool.push((eval(&x), x));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while pool.len() < cfg.starts {
        let mut x: Vec<f64> = (0..real_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if normalize(&mut x) {
            pool.push((eval(&x), x));
        }
    }
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = AscentResult {
        value: f64::NEG_INFINITY,
        point: pool.first().map(|p| p.1.clone()).unwrap_or_default(),
        iterations: 0,
        converged: true,
    };
    for (v0, x0) in pool.into_iter().take(cfg.ascents.max(1)) {
        let (value, point, iters, conv) = ascend(real_dim, &eval, x0, v0, cfg);
        best.iterations += iters;
        best.converged &= conv;
        if value > best.value {
            best.value = value;
            best.point = point;
        }
    }
    if best.value.is_finite() && real_dim >= 2 {
        // Gradient steps stall on kink ridges of piecewise smooth objectives;
        // a simplex search in a tangent chart keeps moving along the ridge.
        for scale in [1e-2, 1e-4] {
            let (v, x, iters) = polish(&eval, &best.point, best.value, scale, cfg);
            best.iterations += iters;
            if v > best.value {
                best.value = v;
                best.point = x;
            }
        }
    }
    best
}

/// Orthonormal basis of the tangent space of the sphere at `x`.
fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        for b in std::iter::once(x).chain(basis.iter().map(|b| b.as_slice())) {
            let dot: f64 = e.iter().zip(b).map(|(a, c)| a * c).sum();
            e.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
        }
        let r = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 1e-8 {
            e.iter_mut().for_each(|v| *v /= r);
            basis.push(e);
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    basis
}

/// Nelder-Mead maximization in the chart `y ↦ normalize(x0 + Σ y_k b_k)`.
fn polish(eval: &dyn Fn(&[f64]) -> f64, x0: &[f64], f0: f64, scale: f64, cfg: &AscentConfig) -> (f64, Vec<f64>, usize) {
    let basis = tangent_basis(x0);
    let m = basis.len();
    let lift = |y: &[f64]| -> Vec<f64> {
        let mut x = x0.to_vec();
        for (yk, b) in y.iter().zip(&basis) {
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += yk * bi);
        }
        normalize(&mut x);
        x
    };
    let value = |y: &[f64]| eval(&lift(y));
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(m + 1);
    simplex.push((f0, vec![0.0; m]));
    for k in 0..m {
        let mut y = vec![0.0; m];
        y[k] = scale;
        simplex.push((value(&y), y));
    }
    let max_evals = 200 * (m + 1);
    let mut evals = m;
    while evals < max_evals {
        simplex.sort_by(|a, b| b.0.total_cmp(&a.0));
        let size = simplex[1..]
            .iter()
            .map(|(_, y)| {
                y.iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < cfg.step_tol * 1e-2 {
            break;
        }
        let mut centroid = vec![0.0; m];
        for (_, y) in &simplex[..m] {
            centroid.iter_mut().zip(y).for_each(|(c, v)| *c += v / m as f64);
        }
        let worst = simplex[m].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.1).map(|(c, w)| c + t * (c - w)).collect() };
        let yr = along(1.0);
        let fr = value(&yr);
        evals += 1;
        if fr > simplex[0].0 {
            let ye = along(2.0);
            let fe = value(&ye);
            evals += 1;
            simplex[m] = if fe > fr { (fe, ye) } else { (fr, yr) };
        } else if fr > simplex[m - 1].0 {
            simplex[m] = (fr, yr);
        } else {
            let (yc, fc) = if fr > worst.0 {
                let y = along(0.5);
                let f = value(&y);
                (y, f)
            } else {
                let y = along(-0.5);
                let f = value(&y);
                (y, f)
            };
            evals += 1;
            if fc > worst.0.max(fr) {
                simplex[m] = (fc, yc);
            } else {
                let best = simplex[0].1.clone();
                for (f, y) in simplex.iter_mut().skip(1) {
                    y.iter_mut().zip(&best).for_each(|(a, b)| *a = b + 0.5 * (*a - b));
                    *f = value(y);
                }
                evals += m;
            }
        }
    }
    simplex.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (f, y) = simplex.swap_remove(0);
    (f, lift(&y), evals)
}

fn ascend(
    d: usize,
    eval: &dyn Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    mut fx: f64,
    cfg: &AscentConfig,
) -> (f64, Vec<f64>, usize, bool) {
    let mut step = 0.1;
    let mut grad = vec![0.0; d];
    let mut need_grad = true;
    let mut trial = vec![0.0; d];
    for it in 0..cfg.max_iter {
        if step < cfg.step_tol {
            return (fx, x, it, true);
        }
        if need_grad {
            for k in 0..d {
                let orig = x[k];
                x[k] = orig + FD_STEP;
                let fp = eval(&x);
                x[k] = orig - FD_STEP;
                let fm = eval(&x);
                x[k] = orig;
                grad[k] = if fp.is_finite() && fm.is_finite() {
                    (fp - fm) / (2.0 * FD_STEP)
                } else {
                    0.0
                };
            }
            // project onto the tangent space at x
            let radial: f64 = grad.iter().zip(&x).map(|(g, xi)| g * xi).sum();
            grad.iter_mut().zip(&x).for_each(|(g, xi)| *g -= radial * xi);
            let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gn < 1e-14 {
                return (fx, x, it, true);
            }
            grad.iter_mut().for_each(|g| *g /= gn);
            need_grad = false;
        }
        for k in 0..d {
            trial[k] = x[k] + step * grad[k];
        }
        if normalize(&mut trial) {
            let ft = eval(&trial);
            if ft > fx {
                x.copy_from_slice(&trial);
                fx = ft;
                step = (step * 2.0).min(0.5);
                need_grad = true;
                continue;
            }
        }
        step *= 0.5;
    }
    (fx, x, cfg.max_iter, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_maximum_of_quadratic() {
        // max of x^T diag(1,3,2) x on S^2 is 3 at ±e_2
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1] * x[1] + 2.0 * x[2] * x[2];
        let r = maximize_on_sphere(3, &f, &[], &AscentConfig::default());
        assert!((r.value - 3.0).abs() < 1e-12);
        assert!(r.converged);
        assert!((r.point[1].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reaches_kinked_maximum() {
        // |x_1| + |x_2| on S^1 peaks at the diagonal with value sqrt(2)
        let f = |x: &[f64]| x[0].abs() + x[1].abs();
        let r = maximize_on_sphere(2, &f, &[], &AscentConfig::default());
        assert!((r.value - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn seeds_are_used() {
        let f = |x: &[f64]| -(x[0] - 1.0).abs();
        let cfg = AscentConfig {
            starts: 1,
            ascents: 1,
            ..Default::default()
        };
        let r = maximize_on_sphere(2, &f, &[vec![1.0, 0.0]], &cfg);
        assert!(r.value.abs() < 1e-15);
    }
}
