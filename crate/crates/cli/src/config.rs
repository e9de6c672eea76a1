use std::path::{Path, PathBuf};

use kappa_core::field::{parse_complex_vector, GridSpec};
use kappa_core::{DomainSpec, Error, QuadratureRule, Result, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Mc,
    SphereProduct,
}

/// Domain as written in a config file: either a label such as
/// `ellipsoid(2,1)` or the structured form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainInput {
    Label(String),
    Spec(DomainSpec),
}

/// Every field optional; flags override values read from `--config`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub domain: Option<DomainInput>,
    pub n: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub point: Option<String>,
    pub grid: Option<String>,
    pub quadrature: Option<QuadratureKind>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub only: Option<Vec<String>>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            domain: over.domain.or(self.domain),
            n: over.n.or(self.n),
            p: over.p.or(self.p),
            point: over.point.or(self.point),
            grid: over.grid.or(self.grid),
            quadrature: over.quadrature.or(self.quadrature),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
            tol: over.tol.or(self.tol),
            out: over.out.or(self.out),
            only: over.only.or(self.only),
        }
    }
}

/// Fully resolved run configuration; its canonical JSON is hashed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub point: Vec<[f64; 2]>,
    pub grid: GridSpec,
    pub quadrature: QuadratureRule,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub only: Vec<String>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_TOL: f64 = 1e-7;

impl RunConfig {
    pub fn resolve(p: PartialConfig) -> Result<Self> {
        let n = p.n;
        let domain = match p.domain {
            None => DomainSpec::Ball { n: n.unwrap_or(2) },
            Some(DomainInput::Spec(s)) => s,
            Some(DomainInput::Label(l)) => parse_domain(&l, n, p.p.as_deref())?,
        };
        domain.validate()?;
        if let Some(n) = n {
            if n != domain.dim() {
                return Err(Error::InvalidSpec(format!(
                    "--n {n} conflicts with {} of dimension {}",
                    domain.label(),
                    domain.dim()
                )));
            }
        }
        let dim = domain.dim();
        let point = match &p.point {
            None => vec![C64::new(0.0, 0.0); dim],
            Some(s) => parse_complex_vector(s)?,
        };
        if point.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: point.len(),
            });
        }
        if !domain.contains(&point) {
            return Err(Error::OutsideDomain(format!(
                "{} is not in {}",
                p.point.unwrap_or_default(),
                domain.label()
            )));
        }
        let grid = GridSpec::parse(p.grid.as_deref().unwrap_or("origin"))?;
        let samples = p.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 1000 {
            return Err(Error::InvalidSpec(format!("--samples {samples} is below 1000")));
        }
        let seed = p.seed.unwrap_or(DEFAULT_SEED);
        let quadrature = match p.quadrature {
            None => QuadratureRule::Auto { samples, seed },
            Some(QuadratureKind::Mc) => QuadratureRule::monte_carlo(samples, seed),
            Some(QuadratureKind::SphereProduct) => {
                let rule = QuadratureRule::sphere_product();
                if !rule.supports(2 * dim) {
                    return Err(Error::Unsupported(format!(
                        "sphere-product quadrature in complex dimension {dim}"
                    )));
                }
                rule
            }
        };
        let tol = p.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidSpec(format!("--tol {tol} must lie in (0, 1)")));
        }
        Ok(RunConfig {
            domain,
            point: point.iter().map(|c| [c.re, c.im]).collect(),
            grid,
            quadrature,
            samples,
            seed,
            tol,
            only: p.only.unwrap_or_default(),
            out: p.out,
        })
    }

    pub fn point(&self) -> Vec<C64> {
        self.point.iter().map(|&[re, im]| C64::new(re, im)).collect()
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn bad_domain(s: &str) -> Error {
    Error::InvalidSpec(format!(
        "cannot parse domain '{s}' (expected ball, disc, polydisc, ellipsoid, punctured-disc or product(A x B))"
    ))
}

/// Splits `a x b x c` at top-level separators.
fn split_factors(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b' ' if depth == 0 && s[i..].starts_with(" x ") => {
                out.push(s[start..i].trim());
                i += 3;
                start = i;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    out.push(s[start..].trim());
    out
}

/// Parses a domain label; `n` and `p` fill in missing parameters.
pub fn parse_domain(s: &str, n: Option<usize>, p: Option<&[f64]>) -> Result<DomainSpec> {
    let s = s.trim();
    let (head, args) = match s.find('(') {
        Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
        Some(_) => return Err(bad_domain(s)),
        None => (s, None),
    };
    let count = |args: Option<&str>| -> Result<usize> {
        match args {
            Some(a) => a.trim().parse().map_err(|_| bad_domain(s)),
            None => Ok(n.unwrap_or(2)),
        }
    };
    match head {
        "ball" => Ok(DomainSpec::Ball { n: count(args)? }),
        "disc" => Ok(DomainSpec::Disc),
        "punctured-disc" => Ok(DomainSpec::PuncturedDisc),
        "polydisc" => Ok(DomainSpec::Polydisc { n: count(args)? }),
        "ellipsoid" | "thullen" => {
            let p = match args {
                Some(a) => a
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| bad_domain(s)))
                    .collect::<Result<Vec<_>>>()?,
                None => p
                    .ok_or_else(|| Error::InvalidSpec("ellipsoid domain needs --p".into()))?
                    .to_vec(),
            };
            Ok(DomainSpec::Ellipsoid { p })
        }
        "product" => {
            let inner = args.ok_or_else(|| bad_domain(s))?;
            let factors = split_factors(inner)
                .into_iter()
                .map(|f| parse_domain(f, None, None))
                .collect::<Result<Vec<_>>>()?;
            Ok(DomainSpec::Product { factors })
        }
        _ => Err(bad_domain(s)),
    }
}
