//! Named property checks run by the `verify` command.
//!
//! Every claim draws its randomness from `derive_seed(seed, name)`, so the
//! report text is a pure function of the configuration.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bl::{complex_bl, complex_bl_dual, dualize, product_bl, real_complex_consistency};
use crate::domains::{
    ball_automorphism_derivative, indicatrix, kobayashi_busemann, kobayashi_royden, DomainSpec, EllipsoidGauge,
    TangentSample,
};
use crate::error::{Error, Result};
use crate::field::{hsc_estimate, hsc_from_field, integrated_length, kappa_at, pullback, CurveSpec, KappaConfig};
use crate::finsler::{
    busemann_convexify, derive_seed, dual_norm, max_norm, maximize_on_sphere, to_complex, AscentConfig, Euclidean,
    HermitianNorm, HullConfig, LinearPullback, LpNorm, Norm, ProductNorm, Pseudonorm, QuadratureRule, Scaled,
};
use crate::linalg::{mat_vec, random, CMatrix, HermitianForm, C64};
use crate::maps::catalog;
use crate::wu::{mvee_balanced, wu_ellipsoid, wu_sandwich_report, MveeConfig};

/// Test hooks that deliberately break one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Inverts the dual moment matrix without the conjugation.
    BrokenDualization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Run only these claims; empty means all.
    pub only: Vec<String>,
    pub fault: Option<Fault>,
    /// Monte Carlo sample count for `n ≥ 3`.
    pub mc_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20240601,
            only: Vec::new(),
            fault: None,
            mc_samples: 200_000,
        }
    }
}

/// One measured quantity and its limit; passes when `measured ≤ limit`.
/// A `NaN` limit marks a reported value without an assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub limit: f64,
}

impl Check {
    fn new(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            limit,
        }
    }

    fn report(label: impl Into<String>, measured: f64) -> Self {
        Check::new(label, measured, f64::NAN)
    }

    pub fn is_report(&self) -> bool {
        self.limit.is_nan()
    }

    pub fn passed(&self) -> bool {
        self.is_report() || self.measured <= self.limit
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub name: String,
    pub title: String,
    pub checks: Vec<Check>,
    /// Error that stopped the claim, if any; such a claim fails.
    pub error: Option<String>,
    pub notes: Vec<String>,
}

impl ClaimOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, label: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub outcomes: Vec<ClaimOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(ClaimOutcome::passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&ClaimOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    /// Fixed-width text table, one line per check.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<26} {:<6} {:<44} {:>14} {:>14}",
            "claim", "status", "check", "measured", "limit"
        );
        for o in &self.outcomes {
            let status = if o.passed() { "PASS" } else { "FAIL" };
            if let Some(e) = &o.error {
                let _ = writeln!(out, "{:<26} {:<6} error: {e}", o.name, status);
            }
            for c in &o.checks {
                let limit = if c.is_report() {
                    "report".to_string()
                } else {
                    format!("{:.6e}", c.limit)
                };
                let _ = writeln!(
                    out,
                    "{:<26} {:<6} {:<44} {:>14} {:>14}",
                    o.name,
                    if c.passed() { status } else { "FAIL" },
                    c.label,
                    format!("{:.6e}", c.measured),
                    limit
                );
            }
            for n in &o.notes {
                let _ = writeln!(out, "{:<26} {:<6} note: {n}", o.name, "");
            }
        }
        let passed = self.outcomes.iter().filter(|o| o.passed()).count();
        let _ = writeln!(out, "{passed}/{} claims passed", self.outcomes.len());
        out
    }
}

struct Ctx<'a> {
    cfg: &'a VerifyConfig,
    name: &'static str,
}

impl Ctx<'_> {
    fn seed(&self, label: &str) -> u64 {
        derive_seed(derive_seed(self.cfg.seed, self.name), label)
    }

    fn rng(&self, label: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed(label))
    }

    fn rule(&self, n: usize, label: &str) -> QuadratureRule {
        QuadratureRule::Auto {
            samples: self.cfg.mc_samples,
            seed: self.seed(label),
        }
        .resolve(2 * n)
    }

    fn kappa_cfg(&self, n: usize, label: &str) -> KappaConfig {
        KappaConfig {
            rule: self.rule(n, label),
            hull: HullConfig {
                seed: self.seed(&format!("{label}-hull")),
                ..Default::default()
            },
        }
    }

    /// Complex transform, honouring the fault hook.
    fn transform(&self, f: &dyn Pseudonorm, rule: &QuadratureRule) -> Result<HermitianForm> {
        let dual = complex_bl_dual(f, rule)?.gram_dual;
        match self.cfg.fault {
            Some(Fault::BrokenDualization) => dual.invert(),
            None => dualize(&dual),
        }
    }
}

type ClaimFn = fn(&Ctx, &mut ClaimOutcome) -> Result<()>;

const CLAIMS: &[(&str, &str, ClaimFn)] = &[
    ("hermitian-real", "evaluate(H,v,v) is real", hermitian_real),
    (
        "congruence-roundtrip",
        "congruence by A then A^-1 is the identity",
        congruence_roundtrip,
    ),
    (
        "invert-involution",
        "inversion is an involution on PD forms",
        invert_involution,
    ),
    (
        "dual-triangle",
        "dual norms satisfy the triangle inequality",
        dual_triangle,
    ),
    (
        "convexify",
        "convex hull gauge: below F, homogeneous, idempotent",
        convexify,
    ),
    (
        "normalization",
        "Euclidean dual moment matrix is the identity",
        normalization,
    ),
    ("basic-1", "reproducing property: transform of sqrt(h) is h", basic_1),
    ("basic-2", "equivariance under invertible linear maps", basic_2),
    ("basic-3", "comparability sandwich for norm pairs", basic_3),
    (
        "basic-4",
        "scaling: transform of bF is b^2 times the transform of F",
        basic_4,
    ),
    (
        "basic-5",
        "norm sandwich n^(-(n+1)/2) F <= sqrt(g) <= n^((n+1)/2) F",
        basic_5,
    ),
    (
        "product-formula",
        "kappa of products from factor transforms",
        product_formula,
    ),
    (
        "product-direct",
        "block product transform equals direct transform",
        product_direct,
    ),
    ("real-complex", "complex form equals g(v,w) - i g(Jv,w)", real_complex),
    (
        "busemann-below-royden",
        "Kobayashi-Busemann <= Kobayashi-Royden",
        busemann_below_royden,
    ),
    (
        "provider-homogeneity",
        "metric providers scale with |c|",
        provider_homogeneity,
    ),
    (
        "product-provider-max",
        "product provider is the max of its factors",
        product_provider_max,
    ),
    (
        "ball-automorphism",
        "ball metric pulled back from the origin",
        ball_automorphism,
    ),
    (
        "ball-formula",
        "kappa of the ball is the squared ball gauge",
        ball_formula,
    ),
    ("wu-containment", "Wu ellipsoid contains the indicatrix", wu_containment),
    ("wu-john", "Wu ratio spread within the John bound", wu_john),
    ("wu-monotone", "shrinking the body increases log det", wu_monotone),
    ("wu-thullen", "Wu metric at the origin of E(2,1)", wu_thullen),
    ("kappa-wu", "kappa/Wu comparability", kappa_wu),
    (
        "unitary-invariance",
        "kappa of the ball is unitarily invariant",
        unitary_invariance,
    ),
    (
        "distance-decreasing",
        "f* kappa_N <= C kappa_M on the map catalog",
        distance_decreasing,
    ),
    ("covering", "exponential covering of the punctured disc", covering),
    (
        "kappa-khat",
        "m^(-(m+1)/2) khat <= sqrt(kappa) <= m^((m+1)/2) khat",
        kappa_khat,
    ),
    ("curvature", "affine-disc curvature proxy", curvature),
    ("lengths", "integrated lengths of radial segments", lengths),
];

pub fn claim_names() -> Vec<&'static str> {
    CLAIMS.iter().map(|c| c.0).collect()
}

/// Runs the selected claims in registry order.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    for name in &cfg.only {
        if !CLAIMS.iter().any(|c| c.0 == name) {
            return Err(Error::InvalidSpec(format!("unknown claim '{name}'")));
        }
    }
    let outcomes = CLAIMS
        .iter()
        .filter(|c| cfg.only.is_empty() || cfg.only.iter().any(|o| o == c.0))
        .map(|&(name, title, f)| {
            let mut out = ClaimOutcome {
                name: name.into(),
                title: title.into(),
                checks: Vec::new(),
                error: None,
                notes: Vec::new(),
            };
            if let Err(e) = f(&Ctx { cfg, name }, &mut out) {
                out.error = Some(e.to_string());
            }
            out
        })
        .collect();
    Ok(VerifyReport {
        seed: cfg.seed,
        outcomes,
    })
}

fn det() -> QuadratureRule {
    QuadratureRule::sphere_product()
}

fn zero(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ball_point<R: Rng>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    let u = random::unit_vector(n, rng);
    let r = rng.random::<f64>().powf(1.0 / (2 * n) as f64) * radius;
    u.iter().map(|x| x * r).collect()
}

/// `δ_jk/s + conj(z_j) z_k / s^2` with `s = 1 − |z|^2`.
fn ball_closed_form(z: &[C64]) -> HermitianForm {
    let n = z.len();
    let s = 1.0 - z.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let g = CMatrix::from_fn(n, n, |j, k| {
        let d = if j == k { 1.0 / s } else { 0.0 };
        C64::from(d) + z[j].conj() * z[k] / (s * s)
    });
    HermitianForm::symmetrized(g)
}

/// Largest `max(ratio/upper, lower/ratio)` of `sqrt(g(v,v))/F(v)` against
/// the band `[lower, upper]`.
fn band_violation(g: &HermitianForm, f: &dyn Pseudonorm, lower: f64, upper: f64, dirs: &[Vec<C64>]) -> (f64, f64, f64) {
    let mut worst = 0.0_f64;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for v in dirs {
        let r = g.quadratic(v).sqrt() / f.eval(v);
        lo = lo.min(r);
        hi = hi.max(r);
        worst = worst.max(r / upper).max(lower / r);
    }
    (worst, lo, hi)
}

fn directions<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let mut dirs: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = zero(n);
            e[j] = c(1.0, 0.0);
            e
        })
        .collect();
    dirs.extend((0..count.saturating_sub(n)).map(|_| random::unit_vector(n, rng)));
    dirs
}

fn hermitian_real(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("forms");
    let mut worst = 0.0_f64;
    for n in 1..=4 {
        let h = random::pd_form(n, 100.0, &mut rng);
        for _ in 0..250 {
            let v = random::unit_vector(n, &mut rng);
            let z = h.evaluate(&v, &v)?;
            worst = worst.max(z.im.abs() / z.re.abs());
        }
    }
    out.checks
        .push(Check::new("max |Im H(v,v)|/|H(v,v)| (1000 v)", worst, 1e-12));
    Ok(())
}

fn congruence_roundtrip(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("forms");
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = 1 + k % 4;
        let h = random::pd_form(n, 100.0, &mut rng);
        let a = random::invertible(n, 20.0, &mut rng);
        let ainv = a
            .clone()
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
        worst = worst.max(h.congruence(&a)?.congruence(&ainv)?.relative_error(&h));
    }
    let u = random::unitary(3, &mut rng);
    out.checks
        .push(Check::new("max relative error, 50 random A", worst, 1e-9));
    out.checks.push(Check::new(
        "unitary congruence of I",
        HermitianForm::identity(3)
            .congruence(&u)?
            .relative_error(&HermitianForm::identity(3)),
        1e-12,
    ));
    Ok(())
}

fn invert_involution(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("forms");
    let mut worst = 0.0_f64;
    let mut identity_err = 0.0_f64;
    for k in 0..50 {
        let n = 1 + k % 4;
        let h = random::pd_form(n, 100.0, &mut rng);
        let inv = h.invert()?;
        worst = worst.max(inv.invert()?.relative_error(&h));
        let prod = inv.gram() * h.gram();
        identity_err = identity_err.max((prod - CMatrix::identity(n, n)).norm());
    }
    out.checks.push(Check::new("invert(invert(H)) vs H", worst, 1e-9));
    out.checks.push(Check::new("invert(H) H vs I", identity_err, 1e-10));
    Ok(())
}

fn dual_triangle(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("triples");
    let primal: Norm = Arc::new(LpNorm { n: 2, q: 0.5 });
    let acfg = AscentConfig {
        seed: ctx.seed("ascent"),
        ..Default::default()
    };
    let dual = dual_norm(&primal, &acfg)?;
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let a: Vec<C64> = (0..2).map(|_| random::complex_gaussian(&mut rng)).collect();
        let b: Vec<C64> = (0..2).map(|_| random::complex_gaussian(&mut rng)).collect();
        let s: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (fa, fb, fs) = (
            dual.evaluate_checked(&a)?,
            dual.evaluate_checked(&b)?,
            dual.evaluate_checked(&s)?,
        );
        worst = worst.max((fs - fa - fb) / (fa + fb));
    }
    out.checks
        .push(Check::new("max (F*(a+b) - F*(a) - F*(b))/(F*(a)+F*(b))", worst, 1e-9));
    Ok(())
}

fn convexify(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("norms");
    let mut idem = 0.0_f64;
    let mut below = 0.0_f64;
    let mut homog = 0.0_f64;
    for k in 0..10 {
        let q = [0.5, 0.7, 0.6, 0.8, 0.9][k % 5];
        let a = random::invertible(2, 4.0, &mut rng);
        let f: Norm = Arc::new(LinearPullback::new(Arc::new(LpNorm { n: 2, q }), a));
        let hcfg = HullConfig {
            seed: ctx.seed(&format!("hull-{k}")),
            ..Default::default()
        };
        let hull = busemann_convexify(&f, &hcfg)?;
        let again = busemann_convexify(&hull, &hcfg)?;
        for _ in 0..100 {
            let v = random::unit_vector(2, &mut rng);
            let h = hull.eval(&v);
            idem = idem.max((again.eval(&v) - h).abs() / h);
            below = below.max(h / f.eval(&v) - 1.0);
            let s = random::complex_gaussian(&mut rng);
            let sv: Vec<C64> = v.iter().map(|x| x * s).collect();
            homog = homog.max((hull.eval(&sv) - s.norm() * h).abs() / (s.norm() * h));
        }
    }
    out.checks.push(Check::new("idempotence, 10 hulls", idem, 1e-6));
    out.checks.push(Check::new("max Fhat/F - 1", below, 1e-6));
    out.checks.push(Check::new("homogeneity", homog, 1e-9));
    Ok(())
}

fn normalization(_ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    for n in 1..=3 {
        let rule = QuadratureRule::Auto {
            samples: _ctx.cfg.mc_samples,
            seed: _ctx.seed("mc"),
        };
        let m = complex_bl_dual(&Euclidean { n }, &rule)?;
        out.checks.push(Check::new(
            format!("n={n}: dual Gram vs identity"),
            m.gram_dual.relative_error(&HermitianForm::identity(n)),
            1e-2,
        ));
    }
    Ok(())
}

fn basic_1(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("forms");
    let mut worst_det = 0.0_f64;
    let mut worst_mc = 0.0_f64;
    let mut counts = [0usize; 3];
    for k in 0..100 {
        let n = 1 + k % 3;
        counts[n - 1] += 1;
        let h = random::pd_form(n, 100.0, &mut rng);
        let g = ctx.transform(&HermitianNorm::new(h.clone()), &ctx.rule(n, &format!("form-{k}")))?;
        let e = g.relative_error(&h);
        if n <= 2 {
            worst_det = worst_det.max(e);
        } else {
            worst_mc = worst_mc.max(e);
        }
    }
    out.checks.push(Check::new(
        format!("n<=2 sphere-product, {} forms", counts[0] + counts[1]),
        worst_det,
        0.02,
    ));
    out.checks.push(Check::new(
        format!("n=3 Monte Carlo, {} forms", counts[2]),
        worst_mc,
        0.05,
    ));
    Ok(())
}

fn basic_2(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("maps");
    let gauges: Vec<Norm> = vec![
        max_norm(2),
        Arc::new(EllipsoidGauge::new(vec![2.0, 1.0])),
        Arc::new(LpNorm { n: 2, q: 3.0 }),
        Arc::new(HermitianNorm::new(random::pd_form(2, 10.0, &mut rng))),
    ];
    let bases = gauges
        .iter()
        .map(|f| ctx.transform(f.as_ref(), &det()))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let j = k % gauges.len();
        let a = random::invertible(2, 10.0, &mut rng);
        let pulled = ctx.transform(&LinearPullback::new(gauges[j].clone(), a.clone()), &det())?;
        worst = worst.max(pulled.relative_error(&bases[j].congruence(&a)?));
    }
    out.checks
        .push(Check::new("max relative error, 20 random A", worst, 0.02));
    Ok(())
}

/// `α = inf F2/F1`, `β = sup F2/F1` over the sphere, by ascent and sampling.
fn ratio_range(f1: &dyn Pseudonorm, f2: &dyn Pseudonorm, dirs: &[Vec<C64>], seed: u64) -> (f64, f64) {
    let n = f1.dim();
    let cfg = AscentConfig {
        seed,
        ..Default::default()
    };
    let up = maximize_on_sphere(
        2 * n,
        &|y: &[f64]| {
            let v = to_complex(y);
            f2.eval(&v) / f1.eval(&v)
        },
        &[],
        &cfg,
    );
    let down = maximize_on_sphere(
        2 * n,
        &|y: &[f64]| {
            let v = to_complex(y);
            f1.eval(&v) / f2.eval(&v)
        },
        &[],
        &cfg,
    );
    let mut alpha = 1.0 / down.value;
    let mut beta = up.value;
    for v in dirs {
        let r = f2.eval(v) / f1.eval(v);
        alpha = alpha.min(r);
        beta = beta.max(r);
    }
    (alpha, beta)
}

fn basic_3(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("pairs");
    let n = 2;
    let nf = n as f64;
    let dirs = directions(n, 1000, &mut rng);
    let mut worst = 0.0_f64;
    for k in 0..10 {
        let f1: Norm = match k % 3 {
            0 => Arc::new(LinearPullback::new(max_norm(2), random::invertible(2, 3.0, &mut rng))),
            1 => Arc::new(HermitianNorm::new(random::pd_form(2, 10.0, &mut rng))),
            _ => Arc::new(LinearPullback::new(
                Arc::new(EllipsoidGauge::new(vec![2.0, 1.0])),
                random::invertible(2, 3.0, &mut rng),
            )),
        };
        let f2: Norm = match k % 2 {
            0 => Arc::new(LinearPullback::new(
                Arc::new(LpNorm { n: 2, q: 1.5 }),
                random::invertible(2, 3.0, &mut rng),
            )),
            _ => Arc::new(HermitianNorm::new(random::pd_form(2, 10.0, &mut rng))),
        };
        let (alpha, beta) = ratio_range(f1.as_ref(), f2.as_ref(), &dirs, ctx.seed(&format!("pair-{k}")));
        let g1 = ctx.transform(f1.as_ref(), &det())?;
        let g2 = ctx.transform(f2.as_ref(), &det())?;
        let lower = alpha.powf(nf + 1.0) / beta.powf(nf);
        let upper = beta.powf(nf + 1.0) / alpha.powf(nf);
        for v in &dirs {
            let r = (g2.quadratic(v) / g1.quadratic(v)).sqrt();
            worst = worst.max(r / upper).max(lower / r);
        }
    }
    out.checks
        .push(Check::new("max band ratio, 10 pairs x 1000 v", worst, 1.01));
    Ok(())
}

fn basic_4(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let f: Norm = Arc::new(EllipsoidGauge::new(vec![2.0, 1.0]));
    let g = ctx.transform(f.as_ref(), &det())?;
    let mut worst = 0.0_f64;
    for beta in [0.25, 3.0, 17.0] {
        let gb = ctx.transform(
            &Scaled {
                inner: f.clone(),
                factor: beta,
            },
            &det(),
        )?;
        worst = worst.max(gb.relative_error(&g.scaled(beta * beta)));
    }
    out.checks
        .push(Check::new("transform(bF) vs b^2 transform(F)", worst, 1e-9));
    out.notes
        .push("only the forward implication F2 = bF1 => g2 = b^2 g1 is tested".into());
    Ok(())
}

fn basic_5(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("gauges");
    let cases: Vec<(&str, Norm)> = vec![
        ("max norm C^2", max_norm(2)),
        ("E(2,1)", Arc::new(EllipsoidGauge::new(vec![2.0, 1.0]))),
        (
            "l3 pullback C^2",
            Arc::new(LinearPullback::new(
                Arc::new(LpNorm { n: 2, q: 3.0 }),
                random::invertible(2, 5.0, &mut rng),
            )),
        ),
        (
            "disc x ball C^3",
            Arc::new(ProductNorm::new(vec![
                Arc::new(Euclidean { n: 1 }),
                Arc::new(Euclidean { n: 2 }),
            ])),
        ),
    ];
    for (label, f) in cases {
        let n = f.dim();
        let g = ctx.transform(f.as_ref(), &ctx.rule(n, label))?;
        let b = (n as f64).powf((n as f64 + 1.0) / 2.0);
        let dirs = directions(n, 1000, &mut rng);
        let (worst, _, _) = band_violation(&g, f.as_ref(), 1.0 / b, b, &dirs);
        out.checks
            .push(Check::new(format!("{label}: max band ratio"), worst, 1.01));
    }
    Ok(())
}

fn product_formula(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let bidisc = kappa_at(&DomainSpec::Polydisc { n: 2 }, &zero(2), &ctx.kappa_cfg(2, "bidisc"))?;
    out.checks.push(Check::new(
        "bidisc at 0 vs (2/3) I",
        bidisc
            .kappa
            .relative_error(&HermitianForm::identity(2).scaled(2.0 / 3.0)),
        0.02,
    ));
    let spec = DomainSpec::Product {
        factors: vec![DomainSpec::Disc, DomainSpec::Ball { n: 2 }],
    };
    let want = HermitianForm::from_real_diagonal(&[0.5, 0.75, 0.75]);
    let direct = kappa_at(&spec, &zero(3), &ctx.kappa_cfg(3, "disc-ball"))?;
    out.checks.push(Check::new(
        "disc x ball at 0 vs blockdiag(1/2, 3/4 I)",
        direct.kappa.relative_error(&want),
        0.02,
    ));
    let blocks = product_bl(&[&Euclidean { n: 1 }, &Euclidean { n: 2 }], &det())?;
    out.checks.push(Check::new(
        "block formula, Euclidean factors",
        blocks.relative_error(&want),
        0.02,
    ));
    Ok(())
}

fn product_direct(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("factors");
    let h = random::pd_form(1, 1.0, &mut rng);
    let a = random::invertible(2, 3.0, &mut rng);
    let cases: Vec<(&str, Vec<Norm>)> = vec![
        (
            "disc x disc",
            vec![Arc::new(Euclidean { n: 1 }), Arc::new(Euclidean { n: 1 })],
        ),
        (
            "scaled disc x disc",
            vec![
                Arc::new(HermitianNorm::new(h)),
                Arc::new(Scaled {
                    inner: Arc::new(Euclidean { n: 1 }),
                    factor: 2.0,
                }),
            ],
        ),
        (
            "disc x skewed ball",
            vec![
                Arc::new(Euclidean { n: 1 }),
                Arc::new(LinearPullback::new(Arc::new(Euclidean { n: 2 }), a)),
            ],
        ),
    ];
    for (label, factors) in cases {
        let refs: Vec<&dyn Pseudonorm> = factors.iter().map(|f| f.as_ref()).collect();
        let blocks = product_bl(&refs, &det())?;
        let max = ProductNorm::new(factors.clone());
        let n = max.dim();
        let direct = complex_bl(&max, &ctx.rule(n, label))?;
        out.checks.push(Check::new(
            format!("{label}: block vs direct"),
            blocks.relative_error(&direct),
            0.02,
        ));
    }
    Ok(())
}

fn real_complex(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let e: Norm = Arc::new(Euclidean { n: 2 });
    let m = complex_bl_dual(e.as_ref(), &det())?;
    let d = real_complex_consistency(e, &det(), 64, ctx.seed("euclidean"))?;
    out.checks
        .push(Check::new("Euclidean C^2", d, (2.0 * m.error_estimate).max(1e-9)));
    let d = real_complex_consistency(max_norm(2), &det(), 64, ctx.seed("max"))?;
    out.checks.push(Check::new("max norm C^2", d, 0.02));
    let d = real_complex_consistency(
        Arc::new(EllipsoidGauge::new(vec![2.0, 1.0])),
        &det(),
        64,
        ctx.seed("thullen"),
    )?;
    out.checks.push(Check::new("E(2,1) gauge", d, 0.02));
    Ok(())
}

/// (domain, point) pairs covering every provider.
fn provider_cases() -> Vec<(DomainSpec, Vec<C64>)> {
    vec![
        (DomainSpec::Ball { n: 2 }, vec![c(0.3, -0.2), c(0.1, 0.4)]),
        (DomainSpec::Disc, vec![c(-0.5, 0.3)]),
        (DomainSpec::Polydisc { n: 2 }, vec![c(0.5, 0.1), c(-0.2, -0.6)]),
        (DomainSpec::Ellipsoid { p: vec![2.0, 1.0] }, zero(2)),
        (
            DomainSpec::Ellipsoid { p: vec![2.0, 1.0] },
            vec![c(0.0, 0.0), c(0.4, 0.3)],
        ),
        (DomainSpec::Ellipsoid { p: vec![0.25, 0.25] }, zero(2)),
        (
            DomainSpec::Product {
                factors: vec![DomainSpec::Disc, DomainSpec::Ball { n: 2 }],
            },
            vec![c(0.2, 0.1), c(0.3, 0.0), c(0.0, -0.4)],
        ),
        (DomainSpec::PuncturedDisc, vec![c(0.3, 0.2)]),
    ]
}

fn busemann_below_royden(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("samples");
    let hull = HullConfig {
        seed: ctx.seed("hull"),
        ..Default::default()
    };
    let mut worst = f64::NEG_INFINITY;
    for (spec, z) in provider_cases() {
        let khat = kobayashi_busemann(&spec, &z, &hull)?;
        let k = indicatrix(&spec, &z)?;
        for v in directions(spec.dim(), 200, &mut rng) {
            worst = worst.max(khat.eval(&v) / k.eval(&v) - 1.0);
        }
    }
    out.checks.push(Check::new("max khat/k - 1", worst, 1e-6));
    Ok(())
}

fn provider_homogeneity(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("samples");
    let hull = HullConfig {
        seed: ctx.seed("hull"),
        ..Default::default()
    };
    let mut worst = 0.0_f64;
    for (spec, z) in provider_cases() {
        let khat = kobayashi_busemann(&spec, &z, &hull)?;
        for v in directions(spec.dim(), 100, &mut rng) {
            let s = random::complex_gaussian(&mut rng);
            let sv: Vec<C64> = v.iter().map(|x| x * s).collect();
            let k = kobayashi_royden(
                &spec,
                &TangentSample {
                    point: z.clone(),
                    vector: v.clone(),
                },
            )?;
            let ks = kobayashi_royden(
                &spec,
                &TangentSample {
                    point: z.clone(),
                    vector: sv.clone(),
                },
            )?;
            worst = worst.max((ks - s.norm() * k).abs() / (s.norm() * k));
            let h = khat.eval(&v);
            worst = worst.max((khat.eval(&sv) - s.norm() * h).abs() / (s.norm() * h));
        }
    }
    out.checks
        .push(Check::new("max |k(cv) - |c| k(v)| / |c| k(v)", worst, 1e-9));
    Ok(())
}

fn product_provider_max(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("samples");
    let factors = vec![
        DomainSpec::Disc,
        DomainSpec::Ball { n: 2 },
        DomainSpec::Ellipsoid { p: vec![2.0, 1.0] },
    ];
    let spec = DomainSpec::Product {
        factors: factors.clone(),
    };
    let z = vec![c(0.2, 0.1), c(0.3, 0.0), c(0.0, -0.4), c(0.0, 0.0), c(0.0, 0.0)];
    let mut worst = 0.0_f64;
    for v in directions(5, 200, &mut rng) {
        let k = kobayashi_royden(
            &spec,
            &TangentSample {
                point: z.clone(),
                vector: v.clone(),
            },
        )?;
        let mut off = 0;
        let mut m = 0.0_f64;
        for f in &factors {
            let d = f.dim();
            m = m.max(kobayashi_royden(
                f,
                &TangentSample {
                    point: z[off..off + d].to_vec(),
                    vector: v[off..off + d].to_vec(),
                },
            )?);
            off += d;
        }
        worst = worst.max((k - m).abs());
    }
    out.checks.push(Check::new("max |k - max_j k_j|", worst, 0.0));
    Ok(())
}

fn ball_automorphism(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("points");
    let mut worst = 0.0_f64;
    for n in 1..=3 {
        for _ in 0..50 {
            let z = ball_point(n, 0.97, &mut rng);
            let v = random::unit_vector(n, &mut rng);
            let d = ball_automorphism_derivative(&z)?;
            let at_origin = crate::linalg::norm2(&mat_vec(&d, &v));
            let closed = ball_closed_form(&z).quadratic(&v).sqrt();
            worst = worst.max((at_origin - closed).abs() / closed);
        }
    }
    out.checks
        .push(Check::new("pullback from origin vs closed form", worst, 1e-8));
    Ok(())
}

fn ball_formula(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("points");
    let spec = DomainSpec::Ball { n: 2 };
    let cfg = ctx.kappa_cfg(2, "ball");
    let at0 = kappa_at(&spec, &zero(2), &cfg)?;
    out.checks.push(Check::new(
        "z = 0 vs identity",
        at0.kappa.relative_error(&HermitianForm::identity(2)),
        0.01,
    ));
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let z = ball_point(2, 0.9, &mut rng);
        let k = kappa_at(&spec, &z, &cfg)?;
        worst = worst.max(k.kappa.relative_error(&ball_closed_form(&z)));
    }
    out.checks
        .push(Check::new("20 random z vs squared ball gauge", worst, 0.02));
    Ok(())
}

fn mvee_cfg(ctx: &Ctx, label: &str) -> MveeConfig {
    MveeConfig {
        seed: ctx.seed(label),
        ..Default::default()
    }
}

fn wu_containment(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("samples");
    let cases: Vec<(&str, Norm)> = vec![
        ("E(2,1)", Arc::new(EllipsoidGauge::new(vec![2.0, 1.0]))),
        ("max norm C^2", max_norm(2)),
        ("E(1/4,1/4)", Arc::new(EllipsoidGauge::new(vec![0.25, 0.25]))),
    ];
    for (label, f) in cases {
        let e = mvee_balanced(f.as_ref(), &mvee_cfg(ctx, label))?;
        let mut worst = 0.0_f64;
        for v in directions(2, 10_000, &mut rng) {
            let fv = f.eval(&v);
            let x: Vec<C64> = v.iter().map(|z| z / fv).collect();
            worst = worst.max(e.form.quadratic(&x));
        }
        out.checks.push(Check::new(
            format!("{label}: max E(v,v) on F(v)=1, 10^4 v"),
            worst,
            1.0 + 1e-6,
        ));
    }
    Ok(())
}

fn wu_john(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let cases = vec![
        (DomainSpec::Ball { n: 2 }, zero(2)),
        (DomainSpec::Polydisc { n: 2 }, zero(2)),
        (DomainSpec::Polydisc { n: 2 }, vec![c(0.4, 0.0), c(0.0, -0.3)]),
        (DomainSpec::Ellipsoid { p: vec![2.0, 1.0] }, zero(2)),
        (DomainSpec::Ellipsoid { p: vec![0.25, 0.25] }, zero(2)),
    ];
    let hull = HullConfig {
        seed: ctx.seed("hull"),
        ..Default::default()
    };
    for (k, (spec, z)) in cases.into_iter().enumerate() {
        let e = wu_ellipsoid(&spec, &z, &mvee_cfg(ctx, &format!("case-{k}")))?;
        let r = wu_sandwich_report(&spec, &z, &e.form, &hull, 1000, ctx.seed(&format!("dirs-{k}")))?;
        let m = spec.dim() as f64;
        out.checks.push(Check::new(
            format!("{}: spread / sqrt(m)", spec.label()),
            r.ratio_high / r.ratio_low / m.sqrt(),
            1.0 + 1e-3,
        ));
    }
    Ok(())
}

fn wu_monotone(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let f: Norm = Arc::new(EllipsoidGauge::new(vec![2.0, 1.0]));
    let ld = |e: &crate::wu::EllipsoidForm| e.form.eigenvalues().iter().map(|x| x.ln()).sum::<f64>();
    let a = mvee_balanced(f.as_ref(), &mvee_cfg(ctx, "base"))?;
    let b = mvee_balanced(&Scaled { inner: f, factor: 1.1 }, &mvee_cfg(ctx, "shrunk"))?;
    // log det must grow by 2n ln 1.1 exactly; require growth
    out.checks
        .push(Check::new("-(log det shrunk - log det base)", -(ld(&b) - ld(&a)), 0.0));
    out.checks
        .push(Check::report("log det growth (expected 4 ln 1.1)", ld(&b) - ld(&a)));
    Ok(())
}

fn wu_thullen(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let spec = DomainSpec::Ellipsoid { p: vec![2.0, 1.0] };
    let e = wu_ellipsoid(&spec, &zero(2), &mvee_cfg(ctx, "mvee"))?;
    out.checks.push(Check::new("MVEE gap", e.gap, 1e-7));
    let oracle = HermitianForm::from_real_diagonal(&[3f64.sqrt() / 2.0, 0.75]);
    out.checks.push(Check::new(
        "Wu form vs diag(sqrt(3)/2, 3/4)",
        e.form.relative_error(&oracle),
        1e-4,
    ));
    let hull = HullConfig {
        seed: ctx.seed("hull"),
        ..Default::default()
    };
    let r = wu_sandwich_report(&spec, &zero(2), &e.form, &hull, 1000, ctx.seed("dirs"))?;
    out.checks.push(Check::new(
        "ratio spread / sqrt(2)",
        r.ratio_high / r.ratio_low / 2f64.sqrt(),
        1.0 + 1e-3,
    ));
    out.checks.push(Check::report("min sqrt(w)/khat", r.ratio_low));
    out.checks.push(Check::report("max sqrt(w)/khat", r.ratio_high));
    out.notes.push(format!(
        "measured direction: sqrt(w) <= khat <= sqrt(m) sqrt(w) {}; khat <= sqrt(w) <= sqrt(m) khat {}",
        if r.containment_direction { "holds" } else { "fails" },
        if r.reversed_direction { "holds" } else { "fails" },
    ));
    Ok(())
}

fn kappa_wu(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("dirs");
    let cases = vec![
        (DomainSpec::Ellipsoid { p: vec![2.0, 1.0] }, zero(2)),
        (DomainSpec::Polydisc { n: 2 }, vec![c(0.3, 0.0), c(0.0, 0.5)]),
        (DomainSpec::Ball { n: 2 }, vec![c(0.3, 0.2), c(-0.1, 0.0)]),
        (DomainSpec::Ellipsoid { p: vec![0.25, 0.25] }, zero(2)),
    ];
    for (k, (spec, z)) in cases.into_iter().enumerate() {
        let m = spec.dim() as f64;
        let kappa = kappa_at(&spec, &z, &ctx.kappa_cfg(spec.dim(), &format!("kappa-{k}")))?.kappa;
        let w = wu_ellipsoid(&spec, &z, &mvee_cfg(ctx, &format!("wu-{k}")))?.form;
        let lower = m.powf(-(m + 2.0) / 2.0);
        let upper = m.powf((m + 1.0) / 2.0);
        let wnorm = HermitianNorm::new(w);
        let (worst, _, _) = band_violation(&kappa, &wnorm, lower, upper, &directions(spec.dim(), 1000, &mut rng));
        out.checks.push(Check::new(
            format!("{} at {}: max band ratio", spec.label(), point_label(&z)),
            worst,
            1.01,
        ));
    }
    Ok(())
}

fn point_label(z: &[C64]) -> String {
    let parts: Vec<String> = z.iter().map(|c| format!("{}{:+}i", c.re, c.im)).collect();
    parts.join(",")
}

fn unitary_invariance(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("pairs");
    let spec = DomainSpec::Ball { n: 2 };
    let cfg = ctx.kappa_cfg(2, "ball");
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let z = ball_point(2, 0.85, &mut rng);
        let u = random::unitary(2, &mut rng);
        let uz = mat_vec(&u, &z);
        let at_z = kappa_at(&spec, &z, &cfg)?.kappa;
        let at_uz = kappa_at(&spec, &uz, &cfg)?.kappa;
        worst = worst.max(pullback(&u, &at_uz)?.relative_error(&at_z));
    }
    out.checks
        .push(Check::new("U* kappa(Uz) vs kappa(z), 10 pairs", worst, 0.02));
    Ok(())
}

fn distance_decreasing(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    for (k, map) in catalog().into_iter().enumerate() {
        let mut worst = 0.0_f64;
        for (i, p) in map.sample_points.iter().enumerate() {
            let km = kappa_at(
                &map.source,
                p,
                &ctx.kappa_cfg(map.source.dim(), &format!("src-{k}-{i}")),
            )?
            .kappa;
            let fp = (map.map)(p);
            let kn = kappa_at(
                &map.target,
                &fp,
                &ctx.kappa_cfg(map.target.dim(), &format!("tgt-{k}-{i}")),
            )?
            .kappa;
            let pulled = pullback(&(map.jacobian)(p), &kn)?;
            let (_, hi) = pulled.relative_spectrum(&km)?;
            worst = worst.max(hi / map.bound());
        }
        let which = if map.hermitian_source() {
            "n^(n+1)"
        } else {
            "n^(n+1) m^(m+1)"
        };
        out.checks
            .push(Check::new(format!("{}: max eig / {which}", map.name), worst, 1.01));
    }
    Ok(())
}

fn covering(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("points");
    let cfg = ctx.kappa_cfg(1, "kappa");
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let zeta = ball_point(1, 0.8, &mut rng)[0];
        let one = c(1.0, 0.0);
        let w = (-(one + zeta) / (one - zeta)).exp();
        let dw = w * (-2.0) / ((one - zeta) * (one - zeta));
        let target = kappa_at(&DomainSpec::PuncturedDisc, &[w], &cfg)?.kappa;
        let pulled = pullback(&CMatrix::from_element(1, 1, dw), &target)?;
        let source = kappa_at(&DomainSpec::Disc, &[zeta], &cfg)?.kappa;
        worst = worst.max(pulled.relative_error(&source));
    }
    out.checks
        .push(Check::new("pi* kappa vs kappa of the disc, 10 points", worst, 0.01));
    Ok(())
}

fn kappa_khat(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let mut rng = ctx.rng("dirs");
    for (k, (spec, z)) in provider_cases().into_iter().enumerate() {
        let m = spec.dim() as f64;
        let cfg = ctx.kappa_cfg(spec.dim(), &format!("case-{k}"));
        let kappa = kappa_at(&spec, &z, &cfg)?.kappa;
        let khat = kobayashi_busemann(&spec, &z, &cfg.hull)?;
        let b = m.powf((m + 1.0) / 2.0);
        let (worst, _, _) = band_violation(
            &kappa,
            khat.as_ref(),
            1.0 / b,
            b,
            &directions(spec.dim(), 1000, &mut rng),
        );
        out.checks.push(Check::new(
            format!("{} at {}: max band ratio", spec.label(), point_label(&z)),
            worst,
            1.01,
        ));
    }
    Ok(())
}

fn curvature(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let cfg = ctx.kappa_cfg(2, "kappa");
    let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
    let e2 = vec![c(0.0, 0.0), c(1.0, 0.0)];
    let disc = hsc_estimate(&DomainSpec::Disc, &[c(0.0, 0.0)], &[c(1.0, 0.0)], 1e-2, &cfg)?;
    out.checks
        .push(Check::new("disc at 0: |K + 4|", (disc + 4.0).abs(), 0.05));
    let flat = hsc_from_field(&|_| Ok(1.7), 1e-2)?;
    out.checks
        .push(Check::new("injected flat field: |K|", flat.abs(), 1e-6));
    let ball = hsc_estimate(&DomainSpec::Ball { n: 2 }, &zero(2), &e1, 1e-2, &cfg)?;
    out.checks
        .push(Check::new("ball C^2 at 0, axis: |K + 4|", (ball + 4.0).abs(), 0.2));
    let thullen = DomainSpec::Ellipsoid { p: vec![2.0, 1.0] };
    let k2 = hsc_estimate(&thullen, &zero(2), &e2, 1e-2, &cfg)?;
    out.checks.push(Check::report("E(2,1) at 0, direction e2: K proxy", k2));
    match hsc_estimate(&thullen, &zero(2), &e1, 1e-2, &cfg) {
        Ok(k1) => out.checks.push(Check::report("E(2,1) at 0, direction e1: K proxy", k1)),
        Err(e) => out.notes.push(format!("E(2,1) at 0, direction e1: {e}")),
    }
    Ok(())
}

fn lengths(ctx: &Ctx, out: &mut ClaimOutcome) -> Result<()> {
    let r = 0.7;
    let cfg = ctx.kappa_cfg(2, "kappa");
    let disc = integrated_length(
        &DomainSpec::Disc,
        &CurveSpec::segment(vec![c(0.0, 0.0)], vec![c(r, 0.0)]),
        &cfg,
    )?;
    out.checks.push(Check::new(
        "disc 0 -> r: |L - artanh r|",
        (disc - r.atanh()).abs(),
        1e-3,
    ));
    let ball = integrated_length(
        &DomainSpec::Ball { n: 2 },
        &CurveSpec::segment(zero(2), vec![c(r, 0.0), c(0.0, 0.0)]),
        &cfg,
    )?;
    out.checks.push(Check::new(
        "ball C^2 0 -> (r,0): |L - artanh r|",
        (ball - r.atanh()).abs(),
        1e-3,
    ));
    let constant = integrated_length(
        &DomainSpec::Disc,
        &CurveSpec::segment(vec![c(0.2, 0.0)], vec![c(0.2, 0.0)]),
        &cfg,
    )?;
    out.checks.push(Check::new("constant curve", constant, 0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_claim_is_rejected() {
        let cfg = VerifyConfig {
            only: vec!["no-such-claim".into()],
            ..Default::default()
        };
        assert!(matches!(run_verify(&cfg), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn filter_selects_one_claim() {
        let cfg = VerifyConfig {
            only: vec!["hermitian-real".into()],
            ..Default::default()
        };
        let r = run_verify(&cfg).unwrap();
        assert_eq!(r.outcomes.len(), 1);
        assert!(r.all_passed());
    }

    #[test]
    fn names_are_unique() {
        let mut names = claim_names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CLAIMS.len());
    }
}
