//! `kappa`: batch front end for kappa-core.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical failure.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kappa_core::field::{field_sweep, hsc_estimate, FieldTable, MetricSample};
use kappa_core::verify::{run_verify, Fault, VerifyConfig, VerifyReport};
use kappa_core::wu::{wu_sandwich_report, MveeConfig, WuSandwich};
use kappa_core::{kappa_at, Error, HullConfig, KappaConfig, C64};
use serde::Serialize;

use config::{PartialConfig, QuadratureKind, RunConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "kappa",
    version,
    about = "Invariant Hermitian metrics of model hyperbolic domains"
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// ball, disc, polydisc, ellipsoid, punctured-disc, or labels such as
    /// ball(3), ellipsoid(2,1), product(disc x ball(2)).
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Complex dimension for ball and polydisc.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Ellipsoid exponents, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Base point, comma-separated complex numbers such as 0.1+0.2i,0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,
    /// origin, radial:K, radial:KxA, or points:z;z.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true, value_enum)]
    quadrature: Option<QuadratureKind>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// MVEE tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file; `.csv` selects CSV for tabular commands, JSON otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Verification claims to run, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    only: Option<Vec<String>>,
    #[arg(long, global = true, hide = true)]
    inject_fault: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// kappa at one point.
    Transform,
    /// Run the named property checks.
    Verify,
    /// kappa over a grid.
    Sweep,
    /// Curvature proxy along each coordinate direction.
    Curvature,
    /// kappa, Wu metric and their comparison over a grid.
    CompareWu,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Curvature => "curvature",
            Command::CompareWu => "compare-wu",
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: String,
    config: &'a RunConfig,
    result: T,
}

enum Failure {
    Verification,
    /// Some grid points failed; results for the rest were written.
    Partial(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Partial(msg)) => {
            eprintln!("kappa: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Run(e)) => {
            eprintln!("kappa: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let flags = PartialConfig {
        domain: cli.domain.clone().map(config::DomainInput::Label),
        n: cli.n,
        p: cli.p.clone(),
        point: cli.point.clone(),
        grid: cli.grid.clone(),
        quadrature: cli.quadrature,
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        out: cli.out.clone(),
        only: cli.only.clone(),
    };
    let base = match &cli.config {
        Some(path) => PartialConfig::load(path)?,
        None => PartialConfig::default(),
    };
    let cfg = RunConfig::resolve(base.merge(flags))?;
    let fault = match cli.inject_fault.as_deref() {
        None => None,
        Some("broken-dualization") => Some(Fault::BrokenDualization),
        Some(other) => return Err(Error::InvalidSpec(format!("unknown fault '{other}'")).into()),
    };
    match cli.command {
        Command::Transform => transform(&cfg),
        Command::Verify => verify(&cfg, fault),
        Command::Sweep => sweep(&cfg, Command::Sweep),
        Command::CompareWu => sweep(&cfg, Command::CompareWu),
        Command::Curvature => curvature(&cfg),
    }
}

fn kappa_config(cfg: &RunConfig) -> KappaConfig {
    KappaConfig {
        rule: cfg.quadrature.clone(),
        hull: HullConfig {
            seed: cfg.seed,
            ..Default::default()
        },
    }
}

fn mvee_config(cfg: &RunConfig) -> MveeConfig {
    MveeConfig {
        tol: cfg.tol,
        seed: cfg.seed,
        ..Default::default()
    }
}

fn envelope_json<T: Serialize>(cfg: &RunConfig, command: Command, result: T) -> String {
    let env = Envelope {
        tool: "kappa",
        version: VERSION,
        command: command.name(),
        config_hash: cfg.hash(),
        config: cfg,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("result serializes");
    s.push('\n');
    s
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Error::InvalidSpec(format!("cannot write {}: {e}", path.display())).into())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes JSON to `--out` (with a one-line note on stdout) or to stdout.
fn emit_json(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => {
            write_out(path, text)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TransformResult {
    sample: MetricSample,
    eigenvalues: Vec<f64>,
}

fn transform(cfg: &RunConfig) -> Result<(), Failure> {
    let sample = kappa_at(&cfg.domain, &cfg.point(), &kappa_config(cfg))?;
    let eigenvalues = sample.kappa.eigenvalues();
    emit_json(
        cfg,
        &envelope_json(cfg, Command::Transform, TransformResult { sample, eigenvalues }),
    )
}

fn verify(cfg: &RunConfig, fault: Option<Fault>) -> Result<(), Failure> {
    let vcfg = VerifyConfig {
        seed: cfg.seed,
        only: cfg.only.clone(),
        fault,
        mc_samples: cfg.samples,
    };
    let report: VerifyReport = run_verify(&vcfg)?;
    print!("{}", report.to_table());
    if let Some(path) = &cfg.out {
        write_out(path, &envelope_json(cfg, Command::Verify, &report))?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[derive(Serialize)]
struct WuRow {
    index: usize,
    sandwich: Option<WuSandwich>,
    status: String,
}

#[derive(Serialize)]
struct SweepResult {
    table: FieldTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    wu_sandwich: Option<Vec<WuRow>>,
}

fn sweep(cfg: &RunConfig, command: Command) -> Result<(), Failure> {
    let with_wu = command == Command::CompareWu;
    let kcfg = kappa_config(cfg);
    let table = field_sweep(&cfg.domain, &cfg.grid, &kcfg, &mvee_config(cfg), with_wu)?;
    let wu_sandwich = with_wu.then(|| {
        table
            .rows
            .iter()
            .map(|row| {
                let z: Vec<C64> = row.point.iter().map(|&[re, im]| C64::new(re, im)).collect();
                let wu = row.sample.as_ref().and_then(|s| s.wu.as_ref());
                match wu {
                    None => WuRow {
                        index: row.index,
                        sandwich: None,
                        status: row.status.clone(),
                    },
                    Some(w) => match wu_sandwich_report(&cfg.domain, &z, w, &kcfg.hull, 1000, cfg.seed) {
                        Ok(s) => WuRow {
                            index: row.index,
                            sandwich: Some(s),
                            status: "ok".into(),
                        },
                        Err(e) => WuRow {
                            index: row.index,
                            sandwich: None,
                            status: e.to_string(),
                        },
                    },
                }
            })
            .collect::<Vec<_>>()
    });
    let failed = table.rows.iter().filter(|r| r.status != "ok").count();
    let csv = || {
        format!(
            "# tool: kappa {VERSION}\n# command: {}\n# config_hash: {}\n{}",
            command.name(),
            cfg.hash(),
            table.to_csv()
        )
    };
    match &cfg.out {
        Some(path) if is_csv(path) => {
            write_out(path, &csv())?;
            println!(
                "wrote {} ({} points, {failed} failed)",
                path.display(),
                table.rows.len()
            );
        }
        Some(_) => {
            let text = envelope_json(
                cfg,
                command,
                SweepResult {
                    table: table.clone(),
                    wu_sandwich,
                },
            );
            emit_json(cfg, &text)?;
        }
        None => print!("{}", csv()),
    }
    if failed > 0 {
        let first = table
            .rows
            .iter()
            .find(|r| r.status != "ok")
            .map(|r| r.status.clone())
            .unwrap_or_default();
        return Err(Failure::Partial(format!(
            "{failed} of {} points failed; first: {first}",
            table.rows.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct CurvatureRow {
    direction: usize,
    curvature: Option<f64>,
    status: String,
}

fn curvature(cfg: &RunConfig) -> Result<(), Failure> {
    let kcfg = kappa_config(cfg);
    let z = cfg.point();
    let n = z.len();
    let mut rows = Vec::with_capacity(n);
    let mut errors = Vec::new();
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        match hsc_estimate(&cfg.domain, &z, &e, 1e-2, &kcfg) {
            Ok(k) => rows.push(CurvatureRow {
                direction: j + 1,
                curvature: Some(k),
                status: "ok".into(),
            }),
            Err(err) => {
                rows.push(CurvatureRow {
                    direction: j + 1,
                    curvature: None,
                    status: err.to_string(),
                });
                errors.push(err);
            }
        }
    }
    let all_failed = errors.len() == n;
    emit_json(cfg, &envelope_json(cfg, Command::Curvature, &rows))?;
    if all_failed {
        return Err(errors.remove(0).into());
    }
    Ok(())
}
