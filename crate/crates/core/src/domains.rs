//! Kobayashi-Royden and Kobayashi-Busemann metrics of model domains.
//!
//! Supported (domain, point) pairs:
//!
//! * ball and disc: every interior point, through the automorphism sending
//!   the point to the origin;
//! * polydisc and finite products: every interior point, factorwise;
//! * complex ellipsoid `E(p) = {Σ |z_j|^{2p_j} < 1}`: the origin, where the
//!   indicatrix is the domain itself, and the orbit of the origin under the
//!   automorphisms `z_k ↦ (z_k − a)/(1 − ā z_k)` that exist for each
//!   coordinate with `p_k = 1`, i.e. points with a single nonzero coordinate
//!   `k` of that kind;
//! * punctured disc: every point `0 < |z| < 1`.
//!
//! Anything else returns [`Error::Unsupported`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::finsler::{
    busemann_convexify, Euclidean, HermitianNorm, HullConfig, LinearPullback, Norm, ProductNorm, Pseudonorm,
};
use crate::linalg::{norm2, CMatrix, HermitianForm, C64};

/// Declarative description of a model domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Ball { n: usize },
    Disc,
    Polydisc { n: usize },
    Ellipsoid { p: Vec<f64> },
    Product { factors: Vec<DomainSpec> },
    PuncturedDisc,
}

/// A point of the domain and a tangent vector there.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSample {
    pub point: Vec<C64>,
    pub vector: Vec<C64>,
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { n } | DomainSpec::Polydisc { n } => *n,
            DomainSpec::Disc | DomainSpec::PuncturedDisc => 1,
            DomainSpec::Ellipsoid { p } => p.len(),
            DomainSpec::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Ball { n } | DomainSpec::Polydisc { n } if *n == 0 => {
                Err(Error::InvalidSpec("dimension must be positive".into()))
            }
            DomainSpec::Ellipsoid { p } => {
                if p.is_empty() {
                    Err(Error::InvalidSpec("ellipsoid needs at least one exponent".into()))
                } else if p.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    Err(Error::InvalidSpec(format!(
                        "ellipsoid exponents must be positive, got {p:?}"
                    )))
                } else {
                    Ok(())
                }
            }
            DomainSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidSpec("product of zero factors".into()));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable label, e.g. `ellipsoid(2,1)`.
    pub fn label(&self) -> String {
        match self {
            DomainSpec::Ball { n } => format!("ball({n})"),
            DomainSpec::Disc => "disc".into(),
            DomainSpec::Polydisc { n } => format!("polydisc({n})"),
            DomainSpec::Ellipsoid { p } => {
                let ps: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
                format!("ellipsoid({})", ps.join(","))
            }
            DomainSpec::Product { factors } => {
                let fs: Vec<String> = factors.iter().map(|f| f.label()).collect();
                format!("product({})", fs.join(" x "))
            }
            DomainSpec::PuncturedDisc => "punctured-disc".into(),
        }
    }

    /// Whether `point` lies in the open domain.
    pub fn contains(&self, point: &[C64]) -> bool {
        if point.len() != self.dim() || point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return false;
        }
        match self {
            DomainSpec::Ball { .. } | DomainSpec::Disc => norm2(point) < 1.0,
            DomainSpec::Polydisc { .. } => point.iter().all(|z| z.norm() < 1.0),
            DomainSpec::Ellipsoid { p } => EllipsoidGauge::new(p.clone()).eval(point) < 1.0,
            DomainSpec::Product { factors } => split(factors, point).all(|(f, z)| f.contains(z)),
            DomainSpec::PuncturedDisc => {
                let r = point[0].norm();
                r > 0.0 && r < 1.0
            }
        }
    }
}

fn split<'a>(factors: &'a [DomainSpec], v: &'a [C64]) -> impl Iterator<Item = (&'a DomainSpec, &'a [C64])> {
    let mut off = 0;
    factors.iter().map(move |f| {
        let k = f.dim();
        let s = &v[off..off + k];
        off += k;
        (f, s)
    })
}

/// Minkowski gauge of `E(p)`: the `t > 0` with `Σ |v_j / t|^{2p_j} = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidGauge {
    p: Vec<f64>,
}

impl EllipsoidGauge {
    pub fn new(p: Vec<f64>) -> Self {
        EllipsoidGauge { p }
    }

    pub fn exponents(&self) -> &[f64] {
        &self.p
    }
}

impl Pseudonorm for EllipsoidGauge {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn eval(&self, v: &[C64]) -> f64 {
        let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        // With b_j = |v_j|/m and s = ln(t/m), φ(s) = Σ b_j^{2p_j} e^{-2 p_j s} - 1
        // is convex and decreasing with φ(0) ≥ 0, so Newton from s = 0
        // increases monotonically to the root.
        let terms: Vec<(f64, f64)> = v
            .iter()
            .zip(&self.p)
            .filter(|(z, _)| z.norm() > 0.0)
            .map(|(z, &p)| ((z.norm() / m).powf(2.0 * p), 2.0 * p))
            .collect();
        let mut s = 0.0_f64;
        for _ in 0..200 {
            let mut phi = -1.0;
            let mut dphi = 0.0;
            for &(c, q) in &terms {
                let e = c * (-q * s).exp();
                phi += e;
                dphi -= q * e;
            }
            let step = phi / dphi;
            s -= step;
            if step.abs() <= 1e-13 * (1.0 + s.abs()) {
                break;
            }
        }
        m * s.exp()
    }

    fn claims_triangle(&self) -> bool {
        self.p.iter().all(|&p| p >= 0.5)
    }
}

/// Derivative at `a` of the ball automorphism exchanging `a` and `0`:
/// `−(P/(1−|a|²) + Q/sqrt(1−|a|²))`, with `P` the orthogonal projection
/// onto `C a` and `Q = I − P`.
pub fn ball_automorphism_derivative(a: &[C64]) -> Result<CMatrix> {
    let n = a.len();
    let r2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if !(r2 < 1.0) {
        return Err(Error::OutsideDomain(format!("|a|^2 = {r2} is not < 1")));
    }
    let s2 = 1.0 - r2;
    if r2 == 0.0 {
        return Ok(-CMatrix::identity(n, n));
    }
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = a[i] * a[j].conj() / r2;
            let q = if i == j { C64::new(1.0, 0.0) - p } else { -p };
            d[(i, j)] = -(p / s2 + q / s2.sqrt());
        }
    }
    Ok(d)
}

/// The ball automorphism `φ_a`, an involution with `φ_a(a) = 0`.
pub fn ball_automorphism(a: &[C64], z: &[C64]) -> Result<Vec<C64>> {
    check_dim(a.len(), z.len())?;
    let r2: f64 = a.iter().map(|w| w.norm_sqr()).sum();
    if !(r2 < 1.0) {
        return Err(Error::OutsideDomain(format!("|a|^2 = {r2} is not < 1")));
    }
    let za: C64 = z.iter().zip(a).map(|(x, y)| x * y.conj()).sum();
    let denom = C64::new(1.0, 0.0) - za;
    let s = (1.0 - r2).sqrt();
    Ok((0..a.len())
        .map(|i| {
            let (pz, qz) = if r2 == 0.0 {
                (C64::new(0.0, 0.0), z[i])
            } else {
                let pz = a[i] * za / r2;
                (pz, z[i] - pz)
            };
            (a[i] - pz - qz * s) / denom
        })
        .collect())
}

/// Disc Möbius map `ζ ↦ (ζ − a)/(1 − ā ζ)`.
pub fn disc_moebius(a: C64, z: C64) -> C64 {
    (z - a) / (C64::new(1.0, 0.0) - a.conj() * z)
}

/// Kobayashi distance of the unit ball: `artanh |φ_z(w)|`, using
/// `1 − |φ_z(w)|² = (1−|z|²)(1−|w|²)/|1−⟨w,z⟩|²`.
pub fn kobayashi_distance_ball(z: &[C64], w: &[C64]) -> Result<f64> {
    check_dim(z.len(), w.len())?;
    let nz: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    let nw: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    if !(nz < 1.0) || !(nw < 1.0) {
        return Err(Error::OutsideDomain("distance needs interior points".into()));
    }
    let wz: C64 = w.iter().zip(z).map(|(x, y)| x * y.conj()).sum();
    let one_minus = (1.0 - nz) * (1.0 - nw) / (C64::new(1.0, 0.0) - wz).norm_sqr();
    let rho = (1.0 - one_minus).max(0.0).sqrt();
    Ok(rho.min(1.0 - f64::EPSILON).atanh())
}

fn ensure_inside(spec: &DomainSpec, point: &[C64]) -> Result<()> {
    check_dim(spec.dim(), point.len())?;
    if !spec.contains(point) {
        return Err(Error::OutsideDomain(format!(
            "{} does not contain {point:?}",
            spec.label()
        )));
    }
    Ok(())
}

/// Pseudonorm `v ↦ k_M(point; v)`.
pub fn indicatrix(spec: &DomainSpec, point: &[C64]) -> Result<Norm> {
    spec.validate()?;
    ensure_inside(spec, point)?;
    match spec {
        DomainSpec::Ball { .. } | DomainSpec::Disc => {
            let d = ball_automorphism_derivative(point)?;
            let n = point.len();
            Ok(Arc::new(LinearPullback::new(Arc::new(Euclidean { n }), d)))
        }
        DomainSpec::Polydisc { n } => {
            let factors = vec![DomainSpec::Disc; *n];
            product_indicatrix(&factors, point)
        }
        DomainSpec::Product { factors } => product_indicatrix(factors, point),
        DomainSpec::Ellipsoid { p } => ellipsoid_indicatrix(p, point),
        DomainSpec::PuncturedDisc => {
            let r = point[0].norm();
            let c = 1.0 / (2.0 * r * (1.0 / r).ln());
            Ok(Arc::new(HermitianNorm::new(HermitianForm::from_real_diagonal(
                &[c * c],
            ))))
        }
    }
}

fn product_indicatrix(factors: &[DomainSpec], point: &[C64]) -> Result<Norm> {
    let parts = split(factors, point)
        .map(|(f, z)| indicatrix(f, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(ProductNorm::new(parts)))
}

/// Coordinate `k` along which `point` lies on the orbit of the origin, if any.
fn thullen_axis(p: &[f64], point: &[C64]) -> Option<usize> {
    let nonzero: Vec<usize> = (0..p.len()).filter(|&j| point[j].norm() > 0.0).collect();
    match nonzero.as_slice() {
        [] => Some(0),
        [k] if p[*k] == 1.0 => Some(*k),
        _ => None,
    }
}

fn ellipsoid_indicatrix(p: &[f64], point: &[C64]) -> Result<Norm> {
    let gauge: Norm = Arc::new(EllipsoidGauge::new(p.to_vec()));
    let k = thullen_axis(p, point).ok_or_else(|| {
        Error::Unsupported(format!(
            "ellipsoid metric at {point:?}: only the origin and points with a single nonzero coordinate of exponent 1 are supported"
        ))
    })?;
    let r2 = point[k].norm_sqr();
    if r2 == 0.0 {
        return Ok(gauge);
    }
    let s = 1.0 - r2;
    let n = p.len();
    let mut d = CMatrix::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = C64::from(if j == k { 1.0 / s } else { s.powf(-1.0 / (2.0 * p[j])) });
    }
    Ok(Arc::new(LinearPullback::new(gauge, d)))
}

/// Kobayashi-Royden pseudometric `k_M(p; v)`.
pub fn kobayashi_royden(spec: &DomainSpec, sample: &TangentSample) -> Result<f64> {
    check_dim(spec.dim(), sample.vector.len())?;
    Ok(indicatrix(spec, &sample.point)?.eval(&sample.vector))
}

/// Kobayashi-Busemann metric: the convex hull gauge of the indicatrix.
pub fn kobayashi_busemann(spec: &DomainSpec, point: &[C64], cfg: &HullConfig) -> Result<Norm> {
    busemann_convexify(&indicatrix(spec, point)?, cfg)
}

/// Whether [`indicatrix`] supports `point` without evaluating anything.
pub fn supports(spec: &DomainSpec, point: &[C64]) -> bool {
    if spec.validate().is_err() || !spec.contains(point) {
        return false;
    }
    match spec {
        DomainSpec::Ellipsoid { p } => thullen_axis(p, point).is_some(),
        DomainSpec::Product { factors } => split(factors, point).all(|(f, z)| supports(f, z)),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn closed_form_ball(z: &[C64], v: &[C64]) -> f64 {
        let s = 1.0 - z.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let vz: C64 = v.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
        (norm2(v).powi(2) / s + vz.norm_sqr() / (s * s)).sqrt()
    }

    fn random_ball_point<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
        let u = random::unit_vector(n, rng);
        let r = rng.random::<f64>().powf(1.0 / (2 * n) as f64) * 0.95;
        u.iter().map(|x| x * r).collect()
    }

    #[test]
    fn ball_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = DomainSpec::Ball { n: 2 };
        for _ in 0..200 {
            let z = random_ball_point(2, &mut rng);
            let v = random::unit_vector(2, &mut rng);
            let k = kobayashi_royden(
                &spec,
                &TangentSample {
                    point: z.clone(),
                    vector: v.clone(),
                },
            )
            .unwrap();
            let want = closed_form_ball(&z, &v);
            assert!((k - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn automorphism_derivative_matches_difference_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_ball_point(2, &mut rng);
        let v = random::unit_vector(2, &mut rng);
        let d = ball_automorphism_derivative(&a).unwrap();
        let h = 1e-6;
        let plus: Vec<C64> = a.iter().zip(&v).map(|(x, y)| x + y * h).collect();
        let minus: Vec<C64> = a.iter().zip(&v).map(|(x, y)| x - y * h).collect();
        let fp = ball_automorphism(&a, &plus).unwrap();
        let fm = ball_automorphism(&a, &minus).unwrap();
        let dv = crate::linalg::mat_vec(&d, &v);
        for i in 0..2 {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            assert!((fd - dv[i]).norm() < 1e-7, "{fd} vs {}", dv[i]);
        }
        let at_a = ball_automorphism(&a, &a).unwrap();
        assert!(norm2(&at_a) < 1e-14);
    }

    #[test]
    fn ball_center_and_disc() {
        let v = [c(0.3, -0.4), c(1.0, 2.0)];
        let k = kobayashi_royden(
            &DomainSpec::Ball { n: 2 },
            &TangentSample {
                point: vec![C64::default(); 2],
                vector: v.to_vec(),
            },
        )
        .unwrap();
        assert!((k - norm2(&v)).abs() < 1e-14);
        let z = c(0.3, 0.4);
        let k = kobayashi_royden(
            &DomainSpec::Disc,
            &TangentSample {
                point: vec![z],
                vector: vec![c(1.0, 0.0)],
            },
        )
        .unwrap();
        assert!((k - 1.0 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn polydisc_and_product() {
        let s = DomainSpec::Polydisc { n: 2 };
        let k = kobayashi_royden(
            &s,
            &TangentSample {
                point: vec![C64::default(); 2],
                vector: vec![c(1.0, 0.0), c(2.0, 0.0)],
            },
        )
        .unwrap();
        assert!((k - 2.0).abs() < 1e-14);
        let z = vec![c(0.5, 0.0), c(0.0, -0.2)];
        let v = vec![c(1.0, 1.0), c(-1.0, 0.5)];
        let k = kobayashi_royden(
            &s,
            &TangentSample {
                point: z.clone(),
                vector: v.clone(),
            },
        )
        .unwrap();
        let want = (v[0].norm() / 0.75).max(v[1].norm() / 0.96);
        assert!((k - want).abs() < 1e-12);

        let prod = DomainSpec::Product {
            factors: vec![DomainSpec::Disc, DomainSpec::Ball { n: 2 }],
        };
        let z = vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, 0.4)];
        let v = vec![c(0.5, 0.0), c(1.0, -1.0), c(0.2, 0.3)];
        let k = kobayashi_royden(
            &prod,
            &TangentSample {
                point: z.clone(),
                vector: v.clone(),
            },
        )
        .unwrap();
        let want = closed_form_ball(&z[..1], &v[..1]).max(closed_form_ball(&z[1..], &v[1..]));
        assert!((k - want).abs() < 1e-12 * want);
    }

    #[test]
    fn ellipsoid_gauge_against_bisection() {
        let g = EllipsoidGauge::new(vec![2.0, 1.0]);
        assert!((g.eval(&[c(0.7, 0.0), C64::default()]) - 0.7).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = random::unit_vector(2, &mut rng);
            let eq = |t: f64| (v[0].norm() / t).powi(4) + (v[1].norm() / t).powi(2) - 1.0;
            let (mut lo, mut hi) = (1e-6, 10.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if eq(mid) > 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((g.eval(&v) - lo).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_indicatrix_below_linear_discs() {
        // the disc ζ ↦ ζ v/F(v) lies in E(p), so k(0; v) ≤ F(v); at the
        // origin of a balanced domain equality holds
        let spec = DomainSpec::Ellipsoid { p: vec![2.0, 1.0] };
        let f = indicatrix(&spec, &[C64::default(); 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let v = random::unit_vector(2, &mut rng);
            let t = f.eval(&v);
            let boundary: Vec<C64> = v.iter().map(|x| x / t * 0.999_999).collect();
            assert!(spec.contains(&boundary));
            let outside: Vec<C64> = v.iter().map(|x| x / t * 1.000_001).collect();
            assert!(!spec.contains(&outside));
        }
    }

    #[test]
    fn thullen_orbit_matches_automorphism() {
        // E(2,1) at (0, a): k = F_0(dφ v) with dφ = diag(s^{-1/4}, 1/s)
        let spec = DomainSpec::Ellipsoid { p: vec![2.0, 1.0] };
        let a = c(0.3, 0.2);
        let s = 1.0 - a.norm_sqr();
        let f = indicatrix(&spec, &[C64::default(), a]).unwrap();
        let k2 = f.eval(&[C64::default(), c(1.0, 0.0)]);
        assert!((k2 - 1.0 / s).abs() < 1e-12);
        let k1 = f.eval(&[c(1.0, 0.0), C64::default()]);
        assert!((k1 - s.powf(-0.25)).abs() < 1e-12);
        assert!(matches!(
            indicatrix(&spec, &[c(0.2, 0.0), C64::default()]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn punctured_disc_metric() {
        let z = c(0.2, -0.1);
        let r = z.norm();
        let k = kobayashi_royden(
            &DomainSpec::PuncturedDisc,
            &TangentSample {
                point: vec![z],
                vector: vec![c(0.0, 2.0)],
            },
        )
        .unwrap();
        assert!((k - 2.0 / (2.0 * r * (1.0 / r).ln())).abs() < 1e-12);
        assert!(indicatrix(&DomainSpec::PuncturedDisc, &[C64::default()]).is_err());
    }

    #[test]
    fn busemann_of_nonconvex_ellipsoid_is_l1() {
        let spec = DomainSpec::Ellipsoid { p: vec![0.25, 0.25] };
        let hull = kobayashi_busemann(&spec, &[C64::default(); 2], &HullConfig::default()).unwrap();
        let royden = indicatrix(&spec, &[C64::default(); 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let v = random::unit_vector(2, &mut rng);
            let l1 = v[0].norm() + v[1].norm();
            assert!((hull.eval(&v) - l1).abs() < 1e-3 * l1);
            assert!(hull.eval(&v) <= royden.eval(&v) * (1.0 + 1e-6));
        }
    }

    #[test]
    fn ball_distance() {
        let z = [c(0.0, 0.0)];
        let w = [c(0.6, 0.0)];
        assert!((kobayashi_distance_ball(&z, &w).unwrap() - 0.6f64.atanh()).abs() < 1e-14);
        assert_eq!(kobayashi_distance_ball(&w, &w).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_ball_point(2, &mut rng);
            let b = random_ball_point(2, &mut rng);
            let d1 = kobayashi_distance_ball(&a, &b).unwrap();
            let d2 = kobayashi_distance_ball(&b, &a).unwrap();
            assert!((d1 - d2).abs() < 1e-12);
            // invariance under φ_a
            let fa = ball_automorphism(&a, &a).unwrap();
            let fb = ball_automorphism(&a, &b).unwrap();
            assert!((kobayashi_distance_ball(&fa, &fb).unwrap() - d1).abs() < 1e-9);
        }
        assert!(kobayashi_distance_ball(&z, &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s: DomainSpec = serde_json::from_str(r#"{"kind":"ellipsoid","p":[2,1]}"#).unwrap();
        assert_eq!(s, DomainSpec::Ellipsoid { p: vec![2.0, 1.0] });
        let s: DomainSpec =
            serde_json::from_str(r#"{"kind":"product","factors":[{"kind":"disc"},{"kind":"ball","n":2}]}"#).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(DomainSpec::Ellipsoid { p: vec![1.0, -1.0] }.validate().is_err());
    }
}
