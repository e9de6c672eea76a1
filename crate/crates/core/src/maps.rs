//! Holomorphic maps between model domains with analytic Jacobians, for the
//! distance-decreasing checks.

use std::sync::Arc;

use crate::domains::DomainSpec;
use crate::linalg::{CMatrix, C64};

type MapFn = dyn Fn(&[C64]) -> Vec<C64> + Send + Sync;
type JacFn = dyn Fn(&[C64]) -> CMatrix + Send + Sync;

#[derive(Clone)]
pub struct HolomorphicMap {
    pub name: &'static str,
    pub source: DomainSpec,
    pub target: DomainSpec,
    pub map: Arc<MapFn>,
    /// `target dim × source dim`.
    pub jacobian: Arc<JacFn>,
    pub sample_points: Vec<Vec<C64>>,
}

impl std::fmt::Debug for HolomorphicMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HolomorphicMap")
            .field("name", &self.name)
            .field("source", &self.source)
            .field("target", &self.target)
            .finish()
    }
}

impl HolomorphicMap {
    /// Whether the Kobayashi metric of the source is Hermitian (ball, disc),
    /// which allows the sharper constant.
    pub fn hermitian_source(&self) -> bool {
        matches!(self.source, DomainSpec::Ball { .. } | DomainSpec::Disc)
    }

    /// `n^{n+1} m^{m+1}` with `m` the source and `n` the target dimension, or
    /// `n^{n+1}` for Hermitian sources.
    pub fn bound(&self) -> f64 {
        let m = self.source.dim() as f64;
        let n = self.target.dim() as f64;
        let target = n.powf(n + 1.0);
        if self.hermitian_source() {
            target
        } else {
            target * m.powf(m + 1.0)
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn col(entries: &[C64]) -> CMatrix {
    CMatrix::from_column_slice(entries.len(), 1, entries)
}

fn disc_points() -> Vec<Vec<C64>> {
    vec![vec![c(0.0, 0.0)], vec![c(0.4, 0.1)], vec![c(-0.2, 0.55)]]
}

fn ball2_points() -> Vec<Vec<C64>> {
    vec![
        vec![c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.3, 0.1), c(-0.2, 0.2)],
        vec![c(0.0, -0.5), c(0.4, 0.0)],
    ]
}

fn bidisc_points() -> Vec<Vec<C64>> {
    vec![
        vec![c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.5, 0.2), c(-0.3, 0.0)],
        vec![c(0.0, -0.6), c(0.7, 0.1)],
    ]
}

/// The ten catalog maps.
pub fn catalog() -> Vec<HolomorphicMap> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = c(0.3, 0.2);
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let disc = DomainSpec::Disc;
    let ball2 = DomainSpec::Ball { n: 2 };
    let bidisc = DomainSpec::Polydisc { n: 2 };
    vec![
        HolomorphicMap {
            name: "disc-to-ball-slice",
            source: disc.clone(),
            target: ball2.clone(),
            map: Arc::new(|z| vec![z[0], c(0.0, 0.0)]),
            jacobian: Arc::new(move |_| col(&[one, zero])),
            sample_points: disc_points(),
        },
        HolomorphicMap {
            name: "disc-to-ball-tilted-slice",
            source: disc.clone(),
            target: ball2.clone(),
            map: Arc::new(move |z| vec![z[0] * s, z[0] * s]),
            jacobian: Arc::new(move |_| col(&[C64::from(s), C64::from(s)])),
            sample_points: disc_points(),
        },
        HolomorphicMap {
            name: "disc-to-bidisc-inclusion",
            source: disc.clone(),
            target: bidisc.clone(),
            map: Arc::new(|z| vec![z[0], c(0.0, 0.0)]),
            jacobian: Arc::new(move |_| col(&[one, zero])),
            sample_points: disc_points(),
        },
        HolomorphicMap {
            name: "disc-to-bidisc-diagonal",
            source: disc.clone(),
            target: bidisc.clone(),
            map: Arc::new(|z| vec![z[0], z[0]]),
            jacobian: Arc::new(move |_| col(&[one, one])),
            sample_points: disc_points(),
        },
        HolomorphicMap {
            name: "disc-moebius",
            source: disc.clone(),
            target: disc.clone(),
            map: Arc::new(move |z| vec![crate::domains::disc_moebius(a, z[0])]),
            jacobian: Arc::new(move |z| {
                let d = one - a.conj() * z[0];
                col(&[(1.0 - a.norm_sqr()) / (d * d)])
            }),
            sample_points: disc_points(),
        },
        HolomorphicMap {
            name: "disc-square",
            source: disc.clone(),
            target: disc.clone(),
            map: Arc::new(|z| vec![z[0] * z[0]]),
            jacobian: Arc::new(|z| col(&[z[0] * 2.0])),
            sample_points: disc_points(),
        },
        HolomorphicMap {
            name: "ball-to-disc-projection",
            source: ball2.clone(),
            target: disc.clone(),
            map: Arc::new(|z| vec![z[0]]),
            jacobian: Arc::new(move |_| CMatrix::from_row_slice(1, 2, &[one, zero])),
            sample_points: ball2_points(),
        },
        HolomorphicMap {
            name: "ball-to-bidisc-inclusion",
            source: ball2.clone(),
            target: bidisc.clone(),
            map: Arc::new(|z| z.to_vec()),
            jacobian: Arc::new(|_| CMatrix::identity(2, 2)),
            sample_points: ball2_points(),
        },
        HolomorphicMap {
            name: "bidisc-to-ball-scaling",
            source: bidisc.clone(),
            target: ball2.clone(),
            map: Arc::new(move |z| z.iter().map(|x| x * s).collect()),
            jacobian: Arc::new(move |_| CMatrix::identity(2, 2) * C64::from(s)),
            sample_points: bidisc_points(),
        },
        HolomorphicMap {
            name: "disc-to-thullen-axis",
            source: disc,
            target: DomainSpec::Ellipsoid { p: vec![2.0, 1.0] },
            map: Arc::new(|z| vec![c(0.0, 0.0), z[0]]),
            jacobian: Arc::new(move |_| col(&[zero, one])),
            sample_points: disc_points(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_land_in_targets_and_jacobians_match() {
        let h = 1e-6;
        for m in catalog() {
            assert_eq!(m.source.dim(), m.sample_points[0].len());
            for p in &m.sample_points {
                assert!(m.source.contains(p), "{}", m.name);
                let fp = (m.map)(p);
                assert!(m.target.contains(&fp), "{}", m.name);
                let j = (m.jacobian)(p);
                assert_eq!((j.nrows(), j.ncols()), (m.target.dim(), m.source.dim()));
                for k in 0..m.source.dim() {
                    let mut plus = p.clone();
                    let mut minus = p.clone();
                    plus[k] += h;
                    minus[k] -= h;
                    let (a, b) = ((m.map)(&plus), (m.map)(&minus));
                    for i in 0..m.target.dim() {
                        let fd = (a[i] - b[i]) / (2.0 * h);
                        assert!((fd - j[(i, k)]).norm() < 1e-7, "{} d{i}/d{k}", m.name);
                    }
                }
            }
        }
        assert_eq!(catalog().len(), 10);
    }
}
