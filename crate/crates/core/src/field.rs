//! Pointwise `κ_M` fields: evaluation, pullbacks, curve lengths, the
//! affine-disc curvature proxy and grid sweeps.
//!
//! `κ_M(p)` is the complex Binet-Legendre form of the Kobayashi-Busemann
//! gauge at `p`: indicatrix, then convex hull, then transform.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bl::complex_bl_dual;
use crate::bl::dualize;
use crate::domains::{indicatrix, DomainSpec};
use crate::error::{check_dim, Error, Result};
use crate::finsler::{busemann_convexify, HullConfig, QuadratureRule};
use crate::linalg::{CMatrix, HermitianForm, C64};
use crate::wu::{mvee_balanced, MveeConfig};

/// Settings shared by every `κ` evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaConfig {
    pub rule: QuadratureRule,
    pub hull: HullConfig,
}

impl Default for KappaConfig {
    fn default() -> Self {
        KappaConfig {
            rule: QuadratureRule::auto(0),
            hull: HullConfig::default(),
        }
    }
}

impl KappaConfig {
    pub fn with_rule(rule: QuadratureRule) -> Self {
        KappaConfig {
            rule,
            ..Default::default()
        }
    }
}

/// `κ` (and optionally the Wu form) at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub point: Vec<[f64; 2]>,
    pub kappa: HermitianForm,
    pub wu: Option<HermitianForm>,
    /// Kobayashi-Busemann gauge on the coordinate axes.
    pub busemann_gauge_values: Option<Vec<f64>>,
    /// Relative error estimate of the dual moment matrix.
    pub error_estimate: f64,
}

pub(crate) fn point_pairs(z: &[C64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn axes(n: usize) -> impl Iterator<Item = Vec<C64>> {
    (0..n).map(move |j| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        e
    })
}

/// `κ_M` at `point`. Errors carry the name of the failing stage.
pub fn kappa_at(spec: &DomainSpec, point: &[C64], cfg: &KappaConfig) -> Result<MetricSample> {
    let k = indicatrix(spec, point).map_err(|e| e.at("indicatrix"))?;
    let khat = busemann_convexify(&k, &cfg.hull).map_err(|e| e.at("convexify"))?;
    let moments = complex_bl_dual(khat.as_ref(), &cfg.rule).map_err(|e| e.at("transform"))?;
    let kappa = dualize(&moments.gram_dual).map_err(|e| e.at("dualize"))?;
    Ok(MetricSample {
        point: point_pairs(point),
        busemann_gauge_values: Some(axes(point.len()).map(|e| khat.eval(&e)).collect()),
        kappa,
        wu: None,
        error_estimate: moments.error_estimate,
    })
}

/// `f^*H` for the Jacobian `J` (target × source) of `f` at a point.
pub fn pullback(j: &CMatrix, h: &HermitianForm) -> Result<HermitianForm> {
    check_dim(h.dim(), j.nrows())?;
    h.congruence(j)
}

type CurveFn = dyn Fn(f64) -> Vec<C64> + Send + Sync;

/// A piecewise differentiable curve `γ : [0, 1] → C^n`.
#[derive(Clone)]
pub struct CurveSpec {
    pub gamma: Arc<CurveFn>,
    pub derivative: Arc<CurveFn>,
    /// Initial number of midpoint-rule segments.
    pub segments: usize,
}

impl std::fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveSpec").field("segments", &self.segments).finish()
    }
}

impl CurveSpec {
    /// The straight segment from `a` to `b`.
    pub fn segment(a: Vec<C64>, b: Vec<C64>) -> Self {
        let d: Vec<C64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
        let d2 = d.clone();
        CurveSpec {
            gamma: Arc::new(move |t| a.iter().zip(&d).map(|(x, y)| x + y * t).collect()),
            derivative: Arc::new(move |_| d2.clone()),
            segments: 8,
        }
    }
}

const MAX_SEGMENTS: usize = 1024;
const LENGTH_TOL: f64 = 1e-4;

/// Length of `curve` in `κ`, by the composite midpoint rule with the number
/// of segments doubled until successive estimates agree to `1e-4` relative.
pub fn integrated_length(spec: &DomainSpec, curve: &CurveSpec, cfg: &KappaConfig) -> Result<f64> {
    let speed = |t: f64| -> Result<f64> {
        let z = (curve.gamma)(t);
        let v = (curve.derivative)(t);
        if v.iter().all(|c| c.norm() == 0.0) {
            return Ok(0.0);
        }
        let s = kappa_at(spec, &z, cfg)?.kappa.quadratic(&v);
        if !s.is_finite() || s < 0.0 {
            return Err(Error::NonFinite {
                context: format!("metric along the curve at t = {t}"),
            });
        }
        Ok(s.sqrt())
    };
    let midpoint = |m: usize| -> Result<f64> {
        let h = 1.0 / m as f64;
        let vals = (0..m)
            .into_par_iter()
            .map(|i| speed((i as f64 + 0.5) * h))
            .collect::<Result<Vec<_>>>()?;
        Ok(vals.iter().sum::<f64>() * h)
    };
    let mut m = curve.segments.max(1);
    let mut prev = midpoint(m)?;
    while m < MAX_SEGMENTS {
        m *= 2;
        let next = midpoint(m)?;
        if (next - prev).abs() <= LENGTH_TOL * next.abs() || next == 0.0 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Convergence {
        what: "curve length refinement",
        iterations: m,
        best: prev,
    })
}

/// Gauss curvature at `ζ = 0` of `λ(ζ) |dζ|^2`, `K = −Δ log λ / (2λ)`, from
/// the five-point Laplacian at steps `h` and `h/2` combined by one
/// Richardson extrapolation.
pub fn hsc_from_field(lambda: &dyn Fn(C64) -> Result<f64>, step: f64) -> Result<f64> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "curvature step must be positive, got {step}"
        )));
    }
    let log_l = |z: C64| -> Result<f64> {
        let v = lambda(z)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonFinite {
                context: format!("metric coefficient {v:e} on the affine disc"),
            });
        }
        Ok(v.ln())
    };
    let l0 = log_l(C64::new(0.0, 0.0))?;
    let lap = |h: f64| -> Result<f64> {
        let s =
            log_l(C64::new(h, 0.0))? + log_l(C64::new(-h, 0.0))? + log_l(C64::new(0.0, h))? + log_l(C64::new(0.0, -h))?;
        Ok((s - 4.0 * l0) / (h * h))
    };
    let lh = lap(step)?;
    let lh2 = lap(step / 2.0)?;
    let laplacian = (4.0 * lh2 - lh) / 3.0;
    Ok(-laplacian / (2.0 * l0.exp()))
}

/// Curvature proxy of `κ` along the affine disc `ζ ↦ point + ζ·direction`.
///
/// Needs a deterministic rule: second differences amplify quadrature noise
/// quadratically, so Monte Carlo fields are refused.
pub fn hsc_estimate(spec: &DomainSpec, point: &[C64], direction: &[C64], step: f64, cfg: &KappaConfig) -> Result<f64> {
    let n = spec.dim();
    check_dim(n, point.len())?;
    check_dim(n, direction.len())?;
    if !cfg.rule.resolve(2 * n).is_deterministic() {
        return Err(Error::Unsupported(
            "curvature estimates need a deterministic quadrature rule".into(),
        ));
    }
    let at = |zeta: C64| -> Vec<C64> { point.iter().zip(direction).map(|(p, d)| p + d * zeta).collect() };
    for zeta in [
        C64::new(2.0 * step, 0.0),
        C64::new(-2.0 * step, 0.0),
        C64::new(0.0, 2.0 * step),
        C64::new(0.0, -2.0 * step),
    ] {
        let z = at(zeta);
        if !spec.contains(&z) {
            return Err(Error::OutsideDomain(format!(
                "affine disc of radius {} leaves the domain",
                2.0 * step
            )));
        }
        if !crate::domains::supports(spec, &z) {
            return Err(Error::Unsupported(format!(
                "metric of {} is unavailable along this affine disc",
                spec.label()
            )));
        }
    }
    let lambda = |zeta: C64| -> Result<f64> { Ok(kappa_at(spec, &at(zeta), cfg)?.kappa.quadratic(direction)) };
    hsc_from_field(&lambda, step)
}

/// Point sets for [`field_sweep`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    Origin,
    /// `radii × angles` points `r (cos θ, sin θ, 0, …)` (`r e^{iθ}` in
    /// dimension 1), radii `0, R/K, …, (K−1)R/K` with `R = max_radius`, angles
    /// at the midpoints of `angles` equal cells of `[0, π/2]`.
    Radial {
        radii: usize,
        angles: usize,
        max_radius: f64,
    },
    Points {
        points: Vec<Vec<[f64; 2]>>,
    },
}

impl GridSpec {
    /// Parses `origin`, `radial:K`, `radial:KxA` or
    /// `points:z;z;…` where each `z` is a comma-separated complex vector.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse grid '{s}'"));
        if s == "origin" {
            return Ok(GridSpec::Origin);
        }
        if let Some(rest) = s.strip_prefix("radial:") {
            let (k, a) = match rest.split_once('x') {
                Some((k, a)) => (k, a),
                None => (rest, "1"),
            };
            let radii: usize = k.trim().parse().map_err(|_| bad())?;
            let angles: usize = a.trim().parse().map_err(|_| bad())?;
            if radii == 0 || angles == 0 {
                return Err(bad());
            }
            return Ok(GridSpec::Radial {
                radii,
                angles,
                max_radius: 0.9,
            });
        }
        if let Some(rest) = s.strip_prefix("points:") {
            let points = rest
                .split(';')
                .map(|p| parse_complex_vector(p).map(|v| point_pairs(&v)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(GridSpec::Points { points });
        }
        Err(bad())
    }

    pub fn points(&self, n: usize) -> Result<Vec<Vec<C64>>> {
        match self {
            GridSpec::Origin => Ok(vec![vec![C64::new(0.0, 0.0); n]]),
            GridSpec::Radial {
                radii,
                angles,
                max_radius,
            } => {
                let mut out = Vec::with_capacity(radii * angles);
                for k in 0..*radii {
                    let r = max_radius * k as f64 / *radii as f64;
                    for a in 0..*angles {
                        let theta = (a as f64 + 0.5) * (PI / 2.0) / *angles as f64;
                        let mut z = vec![C64::new(0.0, 0.0); n];
                        if n == 1 {
                            z[0] = C64::from_polar(r, theta);
                        } else {
                            z[0] = C64::new(r * theta.cos(), 0.0);
                            z[1] = C64::new(r * theta.sin(), 0.0);
                        }
                        out.push(z);
                    }
                }
                Ok(out)
            }
            GridSpec::Points { points } => points
                .iter()
                .map(|p| {
                    check_dim(n, p.len())?;
                    Ok(p.iter().map(|c| C64::new(c[0], c[1])).collect())
                })
                .collect(),
        }
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidSpec(format!("cannot parse complex number '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent or leading
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(C64::new(body[..i].parse().map_err(|_| bad())?, imag(&body[i..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

pub fn parse_complex_vector(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

/// One row of a [`FieldTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub index: usize,
    pub point: Vec<[f64; 2]>,
    /// `ok`, or the error that stopped this point.
    pub status: String,
    pub sample: Option<MetricSample>,
    /// Extremes of `κ(v,v)/w(v,v)`.
    pub kappa_wu_ratio: Option<(f64, f64)>,
    pub wu_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldTable {
    pub domain: DomainSpec,
    pub dim: usize,
    pub rows: Vec<FieldRow>,
}

/// Evaluates `κ` (and the Wu form when `with_wu`) at every grid point.
/// Points are processed in parallel; per-point failures are recorded in the
/// row and the sweep continues. Monte Carlo rules use the per-point
/// substream `point-<index>`.
pub fn field_sweep(
    spec: &DomainSpec,
    grid: &GridSpec,
    cfg: &KappaConfig,
    mvee: &MveeConfig,
    with_wu: bool,
) -> Result<FieldTable> {
    spec.validate()?;
    let n = spec.dim();
    let points = grid.points(n)?;
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, z)| {
            let local = KappaConfig {
                rule: cfg.rule.substream(&format!("point-{index}")),
                hull: cfg.hull.clone(),
            };
            let local = if cfg.rule.resolve(2 * n).is_deterministic() {
                cfg.clone()
            } else {
                local
            };
            let result = kappa_at(spec, z, &local).and_then(|mut s| {
                if !with_wu {
                    return Ok((s, None, None));
                }
                let k = indicatrix(spec, z)?;
                let e = mvee_balanced(k.as_ref(), mvee).map_err(|e| e.at("wu"))?;
                let ratio = s.kappa.relative_spectrum(&e.form)?;
                s.wu = Some(e.form);
                Ok((s, Some(ratio), Some(e.gap)))
            });
            match result {
                Ok((s, ratio, gap)) => FieldRow {
                    index,
                    point: point_pairs(z),
                    status: "ok".into(),
                    sample: Some(s),
                    kappa_wu_ratio: ratio,
                    wu_gap: gap,
                },
                Err(e) => FieldRow {
                    index,
                    point: point_pairs(z),
                    status: e.to_string(),
                    sample: None,
                    kappa_wu_ratio: None,
                    wu_gap: None,
                },
            }
        })
        .collect();
    Ok(FieldTable {
        domain: spec.clone(),
        dim: n,
        rows,
    })
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl FieldTable {
    pub fn csv_header(&self) -> String {
        let n = self.dim;
        let mut cols = vec!["index".to_string(), "status".to_string()];
        for j in 0..n {
            cols.push(format!("z{}_re", j + 1));
            cols.push(format!("z{}_im", j + 1));
        }
        for name in ["kappa", "wu"] {
            for j in 0..n {
                for k in 0..n {
                    cols.push(format!("{name}_{}{}_re", j + 1, k + 1));
                    cols.push(format!("{name}_{}{}_im", j + 1, k + 1));
                }
            }
        }
        cols.extend(["kappa_wu_ratio_min", "kappa_wu_ratio_max", "wu_gap", "error_estimate"].map(String::from));
        cols.join(",")
    }

    /// CSV with `#` comment lines stating units and conventions, then the
    /// column header, then one line per row. Missing values are empty.
    pub fn to_csv(&self) -> String {
        let n = self.dim;
        let mut out = String::new();
        let _ = writeln!(out, "# domain: {}", self.domain.label());
        let _ = writeln!(
            out,
            "# units: coordinates and metric coefficients are dimensionless; metric entries are Gram coefficients of squared lengths"
        );
        let _ = writeln!(
            out,
            "# convention: G(v,w) = sum_jk v_j G_jk conj(w_k); kappa_jk and wu_jk are G_jk; Wu unit ball is {{G(v,v) <= 1}}"
        );
        let _ = writeln!(
            out,
            "# kappa_wu_ratio: extreme values of kappa(v,v)/wu(v,v); error_estimate: relative error of the dual moment matrix"
        );
        out.push_str(&self.csv_header());
        out.push('\n');
        let empty = |out: &mut Vec<String>, count: usize| out.extend(std::iter::repeat_n(String::new(), count));
        for row in &self.rows {
            let mut f = vec![row.index.to_string(), csv_escape(&row.status)];
            for c in &row.point {
                f.push(fmt_f64(c[0]));
                f.push(fmt_f64(c[1]));
            }
            for form in [
                row.sample.as_ref().map(|s| &s.kappa),
                row.sample.as_ref().and_then(|s| s.wu.as_ref()),
            ] {
                match form {
                    Some(h) => {
                        for j in 0..n {
                            for k in 0..n {
                                let z = h.gram()[(j, k)];
                                f.push(fmt_f64(z.re));
                                f.push(fmt_f64(z.im));
                            }
                        }
                    }
                    None => empty(&mut f, 2 * n * n),
                }
            }
            match row.kappa_wu_ratio {
                Some((a, b)) => {
                    f.push(fmt_f64(a));
                    f.push(fmt_f64(b));
                }
                None => empty(&mut f, 2),
            }
            f.push(row.wu_gap.map(fmt_f64).unwrap_or_default());
            f.push(
                row.sample
                    .as_ref()
                    .map(|s| fmt_f64(s.error_estimate))
                    .unwrap_or_default(),
            );
            out.push_str(&f.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det() -> KappaConfig {
        KappaConfig::with_rule(QuadratureRule::sphere_product())
    }

    #[test]
    fn kappa_examples() {
        let z0 = vec![C64::default(); 2];
        let ball = kappa_at(&DomainSpec::Ball { n: 2 }, &z0, &det()).unwrap();
        assert!(ball.kappa.relative_error(&HermitianForm::identity(2)) < 1e-10);
        let pd = kappa_at(&DomainSpec::Polydisc { n: 2 }, &z0, &det()).unwrap();
        assert!(pd.kappa.relative_error(&HermitianForm::identity(2).scaled(2.0 / 3.0)) < 2e-2);
        let z = C64::new(0.3, -0.5);
        let disc = kappa_at(&DomainSpec::Disc, &[z], &det()).unwrap();
        let want = (1.0 - z.norm_sqr()).powi(-2);
        assert!((disc.kappa.gram()[(0, 0)].re - want).abs() < 1e-10 * want);
    }

    #[test]
    fn stage_tags() {
        let e = kappa_at(&DomainSpec::Disc, &[C64::new(2.0, 0.0)], &det()).unwrap_err();
        assert_eq!(e.stage(), Some("indicatrix"));
        assert!(e.is_config_error());
    }

    #[test]
    fn pullback_examples() {
        let h = HermitianForm::identity(2);
        let col = CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!((pullback(&col, &h).unwrap().gram()[(0, 0)].re - 1.0).abs() < 1e-15);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let p = pullback(&d, &h).unwrap();
        assert!(p.relative_error(&HermitianForm::from_real_diagonal(&[4.0, 1.0])) < 1e-15);
        assert!(pullback(&col, &HermitianForm::identity(3)).is_err());
    }

    #[test]
    fn lengths() {
        let r = 0.6;
        let seg = CurveSpec::segment(vec![C64::default()], vec![C64::new(r, 0.0)]);
        let l = integrated_length(&DomainSpec::Disc, &seg, &det()).unwrap();
        assert!((l - r.atanh()).abs() < 1e-3 * r.atanh(), "{l}");
        let constant = CurveSpec::segment(vec![C64::new(0.1, 0.0)], vec![C64::new(0.1, 0.0)]);
        assert_eq!(integrated_length(&DomainSpec::Disc, &constant, &det()).unwrap(), 0.0);
    }

    #[test]
    fn curvature_of_disc_and_flat_field() {
        let k = hsc_estimate(
            &DomainSpec::Disc,
            &[C64::default()],
            &[C64::new(1.0, 0.0)],
            1e-2,
            &det(),
        )
        .unwrap();
        assert!((k + 4.0).abs() < 0.05, "{k}");
        let flat = hsc_from_field(&|_| Ok(2.5), 1e-2).unwrap();
        assert!(flat.abs() < 1e-6);
        let mc = KappaConfig::with_rule(QuadratureRule::monte_carlo(10_000, 1));
        assert!(hsc_estimate(&DomainSpec::Disc, &[C64::default()], &[C64::new(1.0, 0.0)], 1e-2, &mc).is_err());
        assert!(hsc_estimate(
            &DomainSpec::Disc,
            &[C64::new(0.95, 0.0)],
            &[C64::new(1.0, 0.0)],
            0.1,
            &det()
        )
        .is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(GridSpec::parse("origin").unwrap(), GridSpec::Origin);
        let g = GridSpec::parse("radial:5x5").unwrap();
        assert_eq!(g.points(2).unwrap().len(), 25);
        assert_eq!(GridSpec::parse("radial:5").unwrap().points(2).unwrap().len(), 5);
        let p = GridSpec::parse("points:0,0.1+0.2i;0.3-1e-2i,-i").unwrap();
        let pts = p.points(2).unwrap();
        assert_eq!(pts[1], vec![C64::new(0.3, -0.01), C64::new(0.0, -1.0)]);
        assert!(GridSpec::parse("cube:3").is_err());
        assert!(p.points(3).is_err());
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_complex("-1e-3+4e+1i").unwrap(), C64::new(-1e-3, 40.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn sweep_polydisc() {
        let t = field_sweep(
            &DomainSpec::Polydisc { n: 2 },
            &GridSpec::parse("radial:10").unwrap(),
            &det(),
            &MveeConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!(t.rows.len(), 10);
        for row in &t.rows {
            let s = row.sample.as_ref().unwrap();
            let d: Vec<f64> = row
                .point
                .iter()
                .map(|c| (1.0 - c[0] * c[0] - c[1] * c[1]).powi(-2) * 2.0 / 3.0)
                .collect();
            assert!(s.kappa.relative_error(&HermitianForm::from_real_diagonal(&d)) < 2e-2);
        }
        let csv = t.to_csv();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 11);
    }

    #[test]
    fn sweep_records_failures() {
        let t = field_sweep(
            &DomainSpec::Ellipsoid { p: vec![2.0, 1.0] },
            &GridSpec::parse("points:0,0;0.2,0.1").unwrap(),
            &det(),
            &MveeConfig::default(),
            true,
        )
        .unwrap();
        assert_eq!(t.rows[0].status, "ok");
        assert!(t.rows[0].sample.as_ref().unwrap().wu.is_some());
        assert!(t.rows[1].status.contains("unsupported"));
    }
}
