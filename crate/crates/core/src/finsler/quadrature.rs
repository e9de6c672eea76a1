//! Integration over the unit sphere `S^{D-1} ⊂ R^D` with Lebesgue surface
//! measure. Complex points of `C^n` are stored as interleaved real
//! coordinates, so the sphere of `C^n` is the case `D = 2n`.

use std::f64::consts::PI;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::to_complex;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// How integrals over a sphere are discretized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Deterministic product rule. On `S^1` (`D = 2`): `circle_nodes`
    /// equispaced angles. On `S^3 ⊂ C^2` (`D = 4`): Hopf coordinates
    /// `z = (sqrt(1-t) e^{iφ1}, sqrt(t) e^{iφ2})`, composite Gauss-Legendre in
    /// `t` (`t_panels × t_order` nodes) and `phases` equispaced angles per
    /// phase; surface measure is `dt dφ1 dφ2 / 2`.
    SphereProduct {
        circle_nodes: usize,
        t_panels: usize,
        t_order: usize,
        phases: usize,
    },
    /// Uniform random points, split into independently seeded substreams.
    MonteCarlo {
        samples: usize,
        seed: u64,
        substreams: usize,
    },
    /// Default product rule where it exists, Monte Carlo elsewhere.
    Auto { samples: usize, seed: u64 },
}

impl QuadratureRule {
    pub fn sphere_product() -> Self {
        QuadratureRule::SphereProduct {
            circle_nodes: 16384,
            t_panels: 8,
            t_order: 8,
            phases: 16,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureRule::MonteCarlo {
            samples,
            seed,
            substreams: 16,
        }
    }

    /// Deterministic product rule for `n ≤ 2`, `2·10^5` Monte Carlo samples
    /// otherwise.
    pub fn default_for(n_complex: usize, seed: u64) -> Self {
        if n_complex <= 2 {
            Self::sphere_product()
        } else {
            Self::monte_carlo(200_000, seed)
        }
    }

    pub fn auto(seed: u64) -> Self {
        QuadratureRule::Auto { samples: 200_000, seed }
    }

    /// Concrete rule used on the sphere of `R^real_dim`.
    pub fn resolve(&self, real_dim: usize) -> QuadratureRule {
        match *self {
            QuadratureRule::Auto { samples, seed } => {
                if real_dim == 2 || real_dim == 4 {
                    Self::sphere_product()
                } else {
                    Self::monte_carlo(samples, seed)
                }
            }
            ref other => other.clone(),
        }
    }

    /// True for the product rule; `Auto` counts as deterministic only where
    /// it resolves to the product rule (see [`QuadratureRule::resolve`]).
    pub fn is_deterministic(&self) -> bool {
        matches!(self, QuadratureRule::SphereProduct { .. })
    }

    /// The deterministic rule exists only on `S^1` and `S^3`.
    pub fn supports(&self, real_dim: usize) -> bool {
        match self {
            QuadratureRule::SphereProduct { .. } => real_dim == 2 || real_dim == 4,
            QuadratureRule::MonteCarlo { .. } | QuadratureRule::Auto { .. } => real_dim >= 1,
        }
    }

    /// Half-resolution companion used for the refinement error estimate.
    pub fn coarse(&self) -> Option<QuadratureRule> {
        match *self {
            QuadratureRule::SphereProduct {
                circle_nodes,
                t_panels,
                t_order,
                phases,
            } => Some(QuadratureRule::SphereProduct {
                circle_nodes: (circle_nodes / 2).max(4),
                t_panels: (t_panels / 2).max(1),
                t_order,
                phases: (phases / 2).max(2),
            }),
            QuadratureRule::MonteCarlo { .. } | QuadratureRule::Auto { .. } => None,
        }
    }

    /// Same rule on an independent named random substream; identity for
    /// deterministic rules.
    pub fn substream(&self, label: &str) -> QuadratureRule {
        match *self {
            QuadratureRule::MonteCarlo {
                samples,
                seed,
                substreams,
            } => QuadratureRule::MonteCarlo {
                samples,
                seed: derive_seed(seed, label),
                substreams,
            },
            QuadratureRule::Auto { samples, seed } => QuadratureRule::Auto {
                samples,
                seed: derive_seed(seed, label),
            },
            ref det => det.clone(),
        }
    }

    pub fn node_count(&self, real_dim: usize) -> usize {
        match *self {
            QuadratureRule::SphereProduct {
                circle_nodes,
                t_panels,
                t_order,
                phases,
            } => match real_dim {
                2 => circle_nodes,
                4 => t_panels * t_order * phases * phases,
                _ => 0,
            },
            QuadratureRule::MonteCarlo { samples, .. } => samples,
            QuadratureRule::Auto { .. } => self.resolve(real_dim).node_count(real_dim),
        }
    }

    pub fn nodes(&self, real_dim: usize) -> Result<SphereNodes> {
        if !self.supports(real_dim) {
            return Err(Error::Unsupported(format!(
                "deterministic sphere quadrature is available only on S^1 and S^3 (got real dimension {real_dim}); use monte-carlo"
            )));
        }
        match *self {
            QuadratureRule::SphereProduct {
                circle_nodes,
                t_panels,
                t_order,
                phases,
            } => Ok(if real_dim == 2 {
                circle_rule(circle_nodes)
            } else {
                hopf_rule(t_panels, t_order, phases)
            }),
            QuadratureRule::MonteCarlo {
                samples,
                seed,
                substreams,
            } => Ok(monte_carlo_rule(real_dim, samples, seed, substreams.max(1))),
            QuadratureRule::Auto { .. } => self.resolve(real_dim).nodes(real_dim),
        }
    }
}

/// Realized nodes and weights. `batches` partitions the nodes into
/// independent substreams (one batch for deterministic rules).
#[derive(Clone, Debug)]
pub struct SphereNodes {
    pub real_dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    batches: Vec<Range<usize>>,
    deterministic: bool,
}

impl SphereNodes {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.real_dim..(i + 1) * self.real_dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn batches(&self) -> &[Range<usize>] {
        &self.batches
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn circle_rule(m: usize) -> SphereNodes {
    let mut coords = Vec::with_capacity(2 * m);
    let w = 2.0 * PI / m as f64;
    for k in 0..m {
        let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
        coords.push(a.cos());
        coords.push(a.sin());
    }
    SphereNodes {
        real_dim: 2,
        coords,
        weights: vec![w; m],
        batches: std::iter::once(0..m).collect(),
        deterministic: true,
    }
}

fn hopf_rule(t_panels: usize, t_order: usize, phases: usize) -> SphereNodes {
    let (gx, gw) = gauss_legendre(t_order);
    let h = 1.0 / t_panels as f64;
    let dphi = 2.0 * PI / phases as f64;
    let cap = t_panels * t_order * phases * phases;
    let mut coords = Vec::with_capacity(4 * cap);
    let mut weights = Vec::with_capacity(cap);
    for p in 0..t_panels {
        for (x, wx) in gx.iter().zip(&gw) {
            let t = h * (p as f64 + 0.5 * (x + 1.0));
            let wt = 0.5 * h * wx;
            let (r1, r2) = ((1.0 - t).sqrt(), t.sqrt());
            for a in 0..phases {
                let p1 = dphi * (a as f64 + 0.5);
                for b in 0..phases {
                    let p2 = dphi * (b as f64 + 0.25);
                    coords.extend_from_slice(&[r1 * p1.cos(), r1 * p1.sin(), r2 * p2.cos(), r2 * p2.sin()]);
                    weights.push(0.5 * wt * dphi * dphi);
                }
            }
        }
    }
    let len = weights.len();
    SphereNodes {
        real_dim: 4,
        coords,
        weights,
        batches: std::iter::once(0..len).collect(),
        deterministic: true,
    }
}

fn monte_carlo_rule(real_dim: usize, samples: usize, seed: u64, substreams: usize) -> SphereNodes {
    let area = sphere_area(real_dim);
    let per = samples / substreams;
    let extra = samples % substreams;
    let sizes: Vec<usize> = (0..substreams).map(|k| per + usize::from(k < extra)).collect();
    let base = derive_seed(seed, "sphere-mc");
    let chunks: Vec<Vec<f64>> = sizes
        .par_iter()
        .enumerate()
        .map(|(k, &count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(base);
            rng.set_stream(k as u64);
            let mut out = Vec::with_capacity(count * real_dim);
            let mut x = vec![0.0; real_dim];
            let mut produced = 0;
            while produced < count {
                for xi in x.iter_mut() {
                    *xi = StandardNormal.sample(&mut rng);
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r < 1e-12 {
                    continue;
                }
                out.extend(x.iter().map(|v| v / r));
                produced += 1;
            }
            out
        })
        .collect();
    let mut coords = Vec::with_capacity(samples * real_dim);
    let mut batches = Vec::with_capacity(substreams);
    let mut start = 0;
    for (chunk, &count) in chunks.into_iter().zip(&sizes) {
        coords.extend(chunk);
        batches.push(start..start + count);
        start += count;
    }
    SphereNodes {
        real_dim,
        coords,
        weights: vec![area / samples as f64; samples],
        batches,
        deterministic: false,
    }
}

/// Surface measure of `S^{D-1}`: `2 π^{D/2} / Γ(D/2)`.
pub fn sphere_area(real_dim: usize) -> f64 {
    assert!(real_dim >= 1);
    // Γ(D/2) by recursion from Γ(1) = 1 or Γ(1/2) = sqrt(π).
    let mut gamma = if real_dim.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if real_dim.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < real_dim as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(real_dim as f64 / 2.0) / gamma
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    for i in 0..order {
        let mut z = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Deterministic 64-bit seed for a named substream of `root`.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = root ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `∫_{S^{2n-1}} f dσ` together with an error estimate: the standard error
/// across substreams for Monte Carlo, or the difference from the
/// half-resolution rule for the deterministic product rule.
pub fn sphere_integrate<F>(n_complex: usize, f: F, rule: &QuadratureRule) -> Result<(C64, f64)>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    let real_dim = 2 * n_complex;
    let rule = &rule.resolve(real_dim);
    let nodes = rule.nodes(real_dim)?;
    let batch_sums = integrate_batches(&nodes, &f)?;
    let total: C64 = batch_sums.iter().map(|(s, _)| s).sum();
    let err = if nodes.is_deterministic() {
        match rule.coarse() {
            Some(c) => {
                let coarse_nodes = c.nodes(real_dim)?;
                let coarse: C64 = integrate_batches(&coarse_nodes, &f)?.iter().map(|(s, _)| s).sum();
                (total - coarse).norm()
            }
            None => 0.0,
        }
    } else {
        // each batch, rescaled by total/batch weight, is an independent estimate
        let tw = nodes.total_weight();
        let ests: Vec<C64> = batch_sums.iter().map(|(s, w)| s * (tw / w)).collect();
        standard_error(&ests)
    };
    Ok((total, err))
}

fn integrate_batches<F>(nodes: &SphereNodes, f: &F) -> Result<Vec<(C64, f64)>>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    nodes
        .batches()
        .par_iter()
        .map(|range| {
            let mut acc = C64::new(0.0, 0.0);
            let mut wsum = 0.0;
            for i in range.clone() {
                let z = to_complex(nodes.point(i));
                let val = f(&z);
                if !val.re.is_finite() || !val.im.is_finite() {
                    return Err(Error::NonFinite {
                        context: "sphere integrand".into(),
                    });
                }
                acc += val * nodes.weight(i);
                wsum += nodes.weight(i);
            }
            Ok((acc, wsum))
        })
        .collect()
}

pub(crate) fn standard_error(ests: &[C64]) -> f64 {
    let b = ests.len();
    if b < 2 {
        return 0.0;
    }
    let mean: C64 = ests.iter().sum::<C64>() / b as f64;
    let var: f64 = ests.iter().map(|e| (e - mean).norm_sqr()).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(6) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_sphere_measure() {
        let r = QuadratureRule::sphere_product();
        for d in [2, 4] {
            let nodes = r.nodes(d).unwrap();
            assert!((nodes.total_weight() - sphere_area(d)).abs() < 1e-10);
            for i in 0..nodes.len() {
                let p = nodes.point(i);
                assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-13);
                assert!(nodes.weight(i) > 0.0);
            }
        }
        assert!(r.node_count(4) >= 10_000);
        assert!(r.node_count(2) >= 10_000);
    }

    #[test]
    fn constant_integrands() {
        let r = QuadratureRule::sphere_product();
        let one = |_: &[C64]| C64::new(1.0, 0.0);
        let (v1, _) = sphere_integrate(1, one, &r).unwrap();
        assert!((v1.re - 2.0 * PI).abs() < 1e-10);
        let (v2, e2) = sphere_integrate(2, one, &r).unwrap();
        assert!((v2.re - 2.0 * PI * PI).abs() < 1e-10);
        assert!(e2 < 1e-10);
        let mc = QuadratureRule::monte_carlo(20_000, 3);
        let (v3, _) = sphere_integrate(3, one, &mc).unwrap();
        assert!((v3.re - PI.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let r = QuadratureRule::sphere_product();
        let (v, _) = sphere_integrate(2, |w: &[C64]| w[0], &r).unwrap();
        assert!(v.norm() < 1e-12);
        let mc = QuadratureRule::monte_carlo(50_000, 9);
        let (v, err) = sphere_integrate(2, |w: &[C64]| w[0], &mc).unwrap();
        assert!(v.norm() < 5.0 * err + 1e-3, "{v} vs {err}");
    }

    #[test]
    fn second_moment_on_s3() {
        // ∫_{S^3} |ω_1|^2 dσ = π^2 by symmetry.
        let r = QuadratureRule::sphere_product();
        let (v, _) = sphere_integrate(2, |w: &[C64]| C64::new(w[0].norm_sqr(), 0.0), &r).unwrap();
        assert!((v.re - PI * PI).abs() < 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = QuadratureRule::sphere_product();
        let res = sphere_integrate(1, |_: &[C64]| C64::new(f64::NAN, 0.0), &r);
        assert!(matches!(res, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let r = QuadratureRule::monte_carlo(10_000, 42);
        let a = r.nodes(6).unwrap();
        let b = r.nodes(6).unwrap();
        assert_eq!(a.coords, b.coords);
        let c = r.substream("pilot").nodes(6).unwrap();
        assert_ne!(a.coords, c.coords);
    }

    #[test]
    fn deterministic_rule_rejects_higher_spheres() {
        assert!(QuadratureRule::sphere_product().nodes(6).is_err());
    }
}
