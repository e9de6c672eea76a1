//! Real and complex Binet-Legendre transforms.
//!
//! For a pseudonorm `F` on `C^n` with unit ball `Ω = {F < 1}`, the dual form
//! has Gram `M_jk = (n+1)/|Ω| ∫_Ω η_j conj(η_k) dη` and the transform is the
//! form dual to it. Both integrals are reduced to the unit sphere:
//!
//! ```text
//! ∫_Ω η_j conj(η_k) dη = (2n+2)^{-1} ∫_S ω_j conj(ω_k) F(ω)^{-(2n+2)} dσ
//! |Ω|                  = (2n)^{-1}   ∫_S F(ω)^{-2n} dσ
//! ```
//!
//! so `M = n · ∫ ω ω^H F^{-2n-2} / ∫ F^{-2n}`.
//!
//! Strongly anisotropic gauges concentrate these integrands near a few
//! directions. Each transform therefore runs a pilot pass, rescales the
//! gauge by the Cholesky factor `A` of the pilot estimate, integrates the
//! nearly round gauge `F∘A`, and maps back with `M_F = A M_{F∘A} A^H`,
//! `|Ω_F| = |det A|^2 |Ω_{F∘A}|`. Both identities are exact.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler::{to_complex, Pseudonorm, QuadratureRule, RealGauge, SphereNodes};
use crate::linalg::{lower_cholesky, CMatrix, HermitianForm, C64};

/// Dual moment matrices above this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative error estimates above this are reported as divergence.
const UNSETTLED: f64 = 0.1;

/// Output of [`complex_bl_dual`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentMatrix {
    /// Gram of the dual form in the dual coordinate basis.
    pub gram_dual: HermitianForm,
    /// Lebesgue measure of the unit ball `{F < 1}`.
    pub volume: f64,
    /// Relative Frobenius error estimate of `gram_dual`: the change against
    /// the half-resolution rule (deterministic) or the batch standard error
    /// (Monte Carlo).
    pub error_estimate: f64,
    pub condition_number: f64,
}

struct Pass {
    gram: CMatrix,
    volume: f64,
    batch_estimates: Vec<CMatrix>,
}

fn gauge_at(f: &dyn Pseudonorm, a: &CMatrix, omega: &[C64]) -> Result<f64> {
    let x = a * DVector::from_column_slice(omega);
    let r = f.eval(x.as_slice());
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Divergent {
            context: format!("F = {r:e} at a sphere node"),
        });
    }
    Ok(r)
}

/// One quadrature pass of the moment integrals of `F∘A`, mapped back to the
/// coordinates of `F`.
fn complex_pass(f: &dyn Pseudonorm, a: &CMatrix, nodes: &SphereNodes) -> Result<Pass> {
    let n = f.dim();
    let sums: Vec<(f64, CMatrix)> = nodes
        .batches()
        .par_iter()
        .map(|range| {
            let mut s0 = 0.0;
            let mut s = CMatrix::zeros(n, n);
            for i in range.clone() {
                let omega = to_complex(nodes.point(i));
                let r = gauge_at(f, a, &omega)?;
                let w = nodes.weight(i);
                let base = r.powi(-2 * n as i32);
                s0 += w * base;
                let wm = w * base / (r * r);
                for j in 0..n {
                    for k in 0..n {
                        s[(j, k)] += omega[j] * omega[k].conj() * wm;
                    }
                }
            }
            Ok((s0, s))
        })
        .collect::<Result<_>>()?;
    let s0: f64 = sums.iter().map(|p| p.0).sum();
    let s: CMatrix = sums.iter().fold(CMatrix::zeros(n, n), |acc, p| acc + &p.1);
    let back = |m: &CMatrix| a * m * a.adjoint();
    let det2 = a.determinant().norm_sqr();
    let batch_estimates = if nodes.is_deterministic() {
        Vec::new()
    } else {
        sums.iter()
            .filter(|p| p.0 > 0.0)
            .map(|p| back(&(&p.1 * C64::from(n as f64 / p.0))))
            .collect()
    };
    Ok(Pass {
        gram: back(&(s * C64::from(n as f64 / s0))),
        volume: det2 * s0 / (2 * n) as f64,
        batch_estimates,
    })
}

/// Pilot passes used at most to bring `F∘A` close to isotropic.
const PRECONDITION_ROUNDS: usize = 6;
const ISOTROPY_TOL: f64 = 0.05;

/// Largest `|λ − 1|` of `A^{-1} M A^{-H}`.
fn isotropy_defect(a: &CMatrix, m: &CMatrix) -> Result<f64> {
    let inv = a
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let inner = HermitianForm::symmetrized(&inv * m * inv.adjoint());
    Ok(inner.eigenvalues().iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max))
}

fn relative_batch_error(mean: &CMatrix, batches: &[CMatrix]) -> f64 {
    let b = batches.len();
    if b < 2 {
        return 0.0;
    }
    let var: f64 = batches.iter().map(|m| (m - mean).norm_squared()).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt() / mean.norm()
}

/// Dual Binet-Legendre moment matrix of `F`.
pub fn complex_bl_dual(f: &dyn Pseudonorm, rule: &QuadratureRule) -> Result<MomentMatrix> {
    let n = f.dim();
    if n == 0 {
        return Err(Error::InvalidSpec("gauge of dimension 0".into()));
    }
    if !f.is_positive_definite() {
        return Err(Error::Divergent {
            context: "gauge is not positive definite".into(),
        });
    }
    let rule = rule.resolve(2 * n);
    let identity = CMatrix::identity(n, n);

    let pilot_rule = match &rule {
        QuadratureRule::MonteCarlo { samples, .. } => match rule.substream("pilot") {
            QuadratureRule::MonteCarlo { seed, substreams, .. } => QuadratureRule::MonteCarlo {
                samples: (samples / 4).max(1000),
                seed,
                substreams,
            },
            other => other,
        },
        det => det.clone(),
    };
    let pilot_nodes = pilot_rule.nodes(2 * n)?;
    // Refine while each round at least halves the isotropy defect; a gauge
    // vanishing on the sphere never settles and is caught below.
    let mut pilot = complex_pass(f, &identity, &pilot_nodes)?;
    let mut a = identity;
    let mut defect = f64::INFINITY;
    for round in 0..PRECONDITION_ROUNDS {
        let pilot_form = HermitianForm::symmetrized(pilot.gram.clone());
        match check_condition(&pilot_form) {
            Ok(_) => {}
            Err(_) if round > 0 => break,
            Err(e) => return Err(e),
        }
        let next = lower_cholesky(&pilot_form)?;
        let candidate = complex_pass(f, &next, &pilot_nodes)?;
        let d = isotropy_defect(&next, &candidate.gram)?;
        if round > 0 && d > 0.5 * defect {
            break;
        }
        a = next;
        pilot = candidate;
        defect = d;
        if defect <= ISOTROPY_TOL {
            break;
        }
    }

    let fine = complex_pass(f, &a, &rule.nodes(2 * n)?)?;
    let error_estimate = match rule.coarse() {
        Some(coarse) => {
            let c = complex_pass(f, &a, &coarse.nodes(2 * n)?)?;
            (&fine.gram - &c.gram).norm() / fine.gram.norm()
        }
        None => relative_batch_error(&fine.gram, &fine.batch_estimates),
    };
    check_settled(error_estimate)?;
    let gram_dual = HermitianForm::symmetrized(fine.gram);
    let condition_number = check_condition(&gram_dual)?;
    if !(fine.volume > 0.0) || !fine.volume.is_finite() {
        return Err(Error::NonFinite {
            context: "unit ball volume".into(),
        });
    }
    Ok(MomentMatrix {
        gram_dual,
        volume: fine.volume,
        error_estimate,
        condition_number,
    })
}

/// A gauge vanishing somewhere on the sphere makes the radial integrals
/// diverge; on a finite rule this shows up as estimates that refuse to settle.
fn check_settled(error_estimate: f64) -> Result<()> {
    if error_estimate.is_finite() && error_estimate <= UNSETTLED {
        Ok(())
    } else {
        Err(Error::Divergent {
            context: format!(
                "relative quadrature error {error_estimate:.3e}; the gauge vanishes on the sphere or is too anisotropic to resolve"
            ),
        })
    }
}

fn check_condition(form: &HermitianForm) -> Result<f64> {
    if form.gram().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite {
            context: "dual moment matrix".into(),
        });
    }
    let c = form.condition_number();
    if !(c <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition: c });
    }
    Ok(c)
}

/// The form dual to `dual`: `conj(M^{-1})` under the
/// `evaluate(G, v, w) = v^T G conj(w)` convention.
pub fn dualize(dual: &HermitianForm) -> Result<HermitianForm> {
    let inv = dual.invert()?;
    Ok(HermitianForm::symmetrized(inv.gram().map(|z| z.conj())))
}

/// Complex Binet-Legendre form of `F`.
pub fn complex_bl(f: &dyn Pseudonorm, rule: &QuadratureRule) -> Result<HermitianForm> {
    dualize(&complex_bl_dual(f, rule)?.gram_dual)
}

/// Moment data of a real gauge on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMoment {
    /// `(d+2)/|Ω| ∫_Ω x x^T dx`.
    pub gram_dual: DMatrix<f64>,
    pub volume: f64,
    pub error_estimate: f64,
}

fn real_pass(
    g: &dyn RealGauge,
    a: &DMatrix<f64>,
    nodes: &SphereNodes,
) -> Result<(DMatrix<f64>, f64, Vec<DMatrix<f64>>)> {
    let d = g.dim();
    let sums: Vec<(f64, DMatrix<f64>)> = nodes
        .batches()
        .par_iter()
        .map(|range| {
            let mut s0 = 0.0;
            let mut s = DMatrix::<f64>::zeros(d, d);
            for i in range.clone() {
                let omega = nodes.point(i);
                let x = a * DVector::from_column_slice(omega);
                let r = g.eval(x.as_slice());
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::Divergent {
                        context: format!("real gauge = {r:e} at a sphere node"),
                    });
                }
                let w = nodes.weight(i);
                let base = r.powi(-(d as i32));
                s0 += w * base;
                let wm = w * base / (r * r);
                for j in 0..d {
                    for k in 0..d {
                        s[(j, k)] += omega[j] * omega[k] * wm;
                    }
                }
            }
            Ok((s0, s))
        })
        .collect::<Result<_>>()?;
    let s0: f64 = sums.iter().map(|p| p.0).sum();
    let s = sums.iter().fold(DMatrix::<f64>::zeros(d, d), |acc, p| acc + &p.1);
    let back = |m: DMatrix<f64>| {
        let m = a * m * a.transpose();
        (&m + m.transpose()) * 0.5
    };
    let batches = if nodes.is_deterministic() {
        Vec::new()
    } else {
        sums.iter()
            .filter(|p| p.0 > 0.0)
            .map(|p| back(&p.1 * (d as f64 / p.0)))
            .collect()
    };
    Ok((
        back(s * (d as f64 / s0)),
        a.determinant().abs() * s0 / d as f64,
        batches,
    ))
}

/// Dual real Binet-Legendre moment matrix of an even gauge on `R^d`.
pub fn real_bl_dual(g: &dyn RealGauge, rule: &QuadratureRule) -> Result<RealMoment> {
    let d = g.dim();
    if d == 0 {
        return Err(Error::InvalidSpec("gauge of dimension 0".into()));
    }
    let rule = rule.resolve(d);
    let pilot_rule = match &rule {
        QuadratureRule::MonteCarlo { samples, .. } => match rule.substream("pilot") {
            QuadratureRule::MonteCarlo { seed, substreams, .. } => QuadratureRule::MonteCarlo {
                samples: (samples / 4).max(1000),
                seed,
                substreams,
            },
            other => other,
        },
        det => det.clone(),
    };
    let (pilot, _, _) = real_pass(g, &DMatrix::identity(d, d), &pilot_rule.nodes(d)?)?;
    let a = pilot
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: pilot.clone().symmetric_eigen().eigenvalues.min(),
        })?
        .l();
    let (m, volume, batches) = real_pass(g, &a, &rule.nodes(d)?)?;
    let error_estimate = match rule.coarse() {
        Some(c) => (&m - real_pass(g, &a, &c.nodes(d)?)?.0).norm() / m.norm(),
        None => {
            let b = batches.len();
            if b < 2 {
                0.0
            } else {
                let var: f64 = batches.iter().map(|e| (e - &m).norm_squared()).sum::<f64>() / (b - 1) as f64;
                (var / b as f64).sqrt() / m.norm()
            }
        }
    };
    check_settled(error_estimate)?;
    Ok(RealMoment {
        gram_dual: m,
        volume,
        error_estimate,
    })
}

/// Real Binet-Legendre inner product: the inverse of [`real_bl_dual`].
pub fn real_bl(g: &dyn RealGauge, rule: &QuadratureRule) -> Result<DMatrix<f64>> {
    let m = real_bl_dual(g, rule)?.gram_dual;
    let inv = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: m.symmetric_eigen().eigenvalues.min(),
        })?
        .inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}

fn real_form(g: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += x[i] * g[(i, j)] * y[j];
        }
    }
    s
}

/// Largest relative deviation from `𝔤(v, w) = g(v, w) − i g(Jv, w)` over
/// `pairs` random unit pairs, where `𝔤` is the complex transform of `F`, `g`
/// the real transform of `F` on `R^{2n}` and `J` multiplication by `i`.
/// Deviations are scaled by `sqrt(𝔤(v,v) 𝔤(w,w))`.
pub fn real_complex_consistency(
    f: crate::finsler::Norm,
    rule: &QuadratureRule,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    use crate::finsler::{to_real, Realified};
    use crate::linalg::random;
    use rand::SeedableRng;

    let n = f.dim();
    let hc = complex_bl(f.as_ref(), rule)?;
    let gr = real_bl(&Realified(f.clone()), rule)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for k in 0..pairs {
        let (v, w) = if k < n * n {
            let mut v = vec![C64::new(0.0, 0.0); n];
            let mut w = v.clone();
            v[k / n] = C64::new(1.0, 0.0);
            w[k % n] = C64::new(1.0, 0.0);
            (v, w)
        } else {
            (random::unit_vector(n, &mut rng), random::unit_vector(n, &mut rng))
        };
        let jv: Vec<C64> = v.iter().map(|z| z * C64::i()).collect();
        let (xv, xw, xjv) = (to_real(&v), to_real(&w), to_real(&jv));
        let rhs = C64::new(real_form(&gr, &xv, &xw), -real_form(&gr, &xjv, &xw));
        let lhs = hc.evaluate(&v, &w)?;
        let scale = (hc.quadratic(&v) * hc.quadratic(&w)).sqrt();
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Ok(worst)
}

/// Transform of `max_j F_j(π_j v)` assembled from the factor transforms:
/// block `j` is `(n_j + 1)/(n + 1) · complex_bl(F_j)`.
pub fn product_bl(factors: &[&dyn Pseudonorm], rule: &QuadratureRule) -> Result<HermitianForm> {
    if factors.is_empty() {
        return Err(Error::InvalidSpec("product of zero factors".into()));
    }
    let n: usize = factors.iter().map(|f| f.dim()).sum();
    let blocks = factors
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let sub = rule.substream(&format!("factor-{j}"));
            let factor_rule = if rule.is_deterministic() && !rule.supports(2 * f.dim()) {
                QuadratureRule::auto(0).resolve(2 * f.dim())
            } else {
                sub
            };
            complex_bl(*f, &factor_rule).map(|h| h.scaled((f.dim() + 1) as f64 / (n + 1) as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HermitianForm::block_diagonal(&blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{
        max_norm, Euclidean, HermitianNorm, LinearPullback, Norm, RealQuadratic, RealSup, Realified, Scaled,
    };
    use crate::linalg::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn det() -> QuadratureRule {
        QuadratureRule::sphere_product()
    }

    #[test]
    fn euclidean_dual_is_identity() {
        for n in 1..=2 {
            let m = complex_bl_dual(&Euclidean { n }, &det()).unwrap();
            assert!(m.gram_dual.relative_error(&HermitianForm::identity(n)) < 1e-10);
            let ball = std::f64::consts::PI.powi(n as i32) / (1..=n).product::<usize>() as f64;
            assert!((m.volume - ball).abs() < 1e-10 * ball);
        }
    }

    #[test]
    fn euclidean_monte_carlo_in_c3() {
        let m = complex_bl_dual(&Euclidean { n: 3 }, &QuadratureRule::monte_carlo(200_000, 3)).unwrap();
        assert!(m.gram_dual.relative_error(&HermitianForm::identity(3)) < 1e-2);
        assert!(m.error_estimate > 0.0 && m.error_estimate < 1e-2);
    }

    #[test]
    fn bidisc_moments() {
        // ∫_{Δ×Δ} |η_1|^2 = π^2/2, |Δ×Δ| = π^2
        let f = max_norm(2);
        let m = complex_bl_dual(f.as_ref(), &det()).unwrap();
        assert!(
            m.gram_dual.relative_error(&HermitianForm::identity(2).scaled(1.5)) < 1e-3,
            "{:?}",
            m.gram_dual
        );
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((m.volume - pi2).abs() < 1e-3 * pi2);
        let g = complex_bl(f.as_ref(), &det()).unwrap();
        assert!(g.relative_error(&HermitianForm::identity(2).scaled(2.0 / 3.0)) < 1e-3);
    }

    #[test]
    fn anisotropic_hermitian_gauge() {
        let h = HermitianForm::from_real_diagonal(&[4.0, 1.0]);
        let m = complex_bl_dual(&HermitianNorm::new(h.clone()), &det()).unwrap();
        assert!(
            m.gram_dual
                .relative_error(&HermitianForm::from_real_diagonal(&[0.25, 1.0]))
                < 1e-10
        );
        let g = complex_bl(&HermitianNorm::new(h.clone()), &det()).unwrap();
        assert!(g.relative_error(&h) < 1e-10);
    }

    #[test]
    fn reproduces_random_hermitian_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=2 {
            for _ in 0..5 {
                let h = random::pd_form(n, 100.0, &mut rng);
                let g = complex_bl(&HermitianNorm::new(h.clone()), &det()).unwrap();
                assert!(g.relative_error(&h) < 1e-8, "n={n} err={}", g.relative_error(&h));
            }
        }
    }

    #[test]
    fn thullen_origin_oracle() {
        // E(2,1): E|η1|^2 = 3/8, E|η2|^2 = 2/5 over the unit ball
        let f = crate::finsler::FnNorm::new(2, "E(2,1)", true, |v| {
            let a = v[0].norm();
            let b = v[1].norm();
            // t solves a^4/t^4 + b^2/t^2 = 1
            let s = b * b / 2.0;
            (s + (s * s + a.powi(4)).sqrt()).sqrt()
        });
        let g = complex_bl(&f, &det()).unwrap();
        let want = HermitianForm::from_real_diagonal(&[8.0 / 9.0, 5.0 / 6.0]);
        assert!(g.relative_error(&want) < 1e-4, "{:?}", g);
    }

    #[test]
    fn equivariance_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: Norm = max_norm(2);
        let base = complex_bl(f.as_ref(), &det()).unwrap();
        for _ in 0..3 {
            let a = random::invertible(2, 5.0, &mut rng);
            let pulled = complex_bl(&LinearPullback::new(f.clone(), a.clone()), &det()).unwrap();
            let want = base.congruence(&a).unwrap();
            assert!(pulled.relative_error(&want) < 1e-2, "{}", pulled.relative_error(&want));
        }
        let scaled = complex_bl(
            &Scaled {
                inner: f.clone(),
                factor: 3.0,
            },
            &det(),
        )
        .unwrap();
        assert!(scaled.relative_error(&base.scaled(9.0)) < 1e-12);
    }

    #[test]
    fn real_transforms() {
        let id = real_bl(
            &RealQuadratic {
                q: DMatrix::identity(4, 4),
            },
            &det(),
        )
        .unwrap();
        assert!((id - DMatrix::<f64>::identity(4, 4)).norm() < 1e-10);
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 1.0]));
        let g = real_bl(&RealQuadratic { q: q.clone() }, &det()).unwrap();
        assert!((g - q).norm() < 1e-9);
        // square [-1,1]^2: (d+2)/|Ω| ∫ x^2 = 4 · (4/3)/4 = 4/3
        let s = real_bl(&RealSup { d: 2 }, &det()).unwrap();
        assert!((s - DMatrix::<f64>::identity(2, 2) * 0.75).norm() < 1e-3);
    }

    #[test]
    fn real_and_complex_agree() {
        let e: Norm = Arc::new(Euclidean { n: 2 });
        assert!(real_complex_consistency(e, &det(), 32, 1).unwrap() < 1e-8);
        let d = real_complex_consistency(max_norm(2), &det(), 32, 1).unwrap();
        assert!(d < 2e-2, "{d}");
    }

    #[test]
    fn realified_euclidean_is_identity() {
        let g = real_bl(&Realified(Arc::new(Euclidean { n: 2 })), &det()).unwrap();
        assert!((g - DMatrix::<f64>::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn product_coefficients() {
        let disc = Euclidean { n: 1 };
        let g = product_bl(&[&disc, &disc], &det()).unwrap();
        assert!(g.relative_error(&HermitianForm::identity(2).scaled(2.0 / 3.0)) < 1e-10);
        let ball = Euclidean { n: 2 };
        let g = product_bl(&[&disc, &ball], &det()).unwrap();
        let want = HermitianForm::from_real_diagonal(&[0.5, 0.75, 0.75]);
        assert!(g.relative_error(&want) < 1e-10);
        let single = product_bl(&[&ball], &det()).unwrap();
        assert!(single.relative_error(&HermitianForm::identity(2)) < 1e-10);
    }

    #[test]
    fn degenerate_gauge_is_divergent() {
        let f = crate::finsler::FnNorm::new(2, "first coordinate", false, |v| v[0].norm());
        let r = complex_bl(&f, &det());
        assert!(matches!(r, Err(Error::Divergent { .. })), "{r:?}");
    }
}
