//! Acceptance suite: one line per criterion, tolerances pinned here.

use std::time::{Duration, Instant};

use kappa_core::verify::{run_verify, Check, VerifyConfig, VerifyReport};

struct Criterion {
    id: usize,
    title: &'static str,
    failures: Vec<String>,
    summary: Vec<String>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            failures: Vec::new(),
            summary: Vec::new(),
        }
    }

    /// Finds the check of `claim` whose label starts with `prefix`, pins its
    /// limit and records the outcome.
    fn expect(&mut self, report: &VerifyReport, claim: &str, prefix: &str, limit: f64) {
        let Some(outcome) = report.outcome(claim) else {
            self.failures.push(format!("{claim}: missing"));
            return;
        };
        if let Some(e) = &outcome.error {
            self.failures.push(format!("{claim}: {e}"));
            return;
        }
        let checks: Vec<&Check> = outcome.checks.iter().filter(|c| c.label.starts_with(prefix)).collect();
        if checks.is_empty() {
            self.failures.push(format!("{claim}: no check '{prefix}'"));
        }
        for c in checks {
            if c.limit != limit {
                self.failures.push(format!(
                    "{claim}/{}: limit {} is not the pinned {limit}",
                    c.label, c.limit
                ));
            }
            if c.measured <= limit {
                self.summary.push(format!("{:.3e}<={limit:e}", c.measured));
            } else {
                self.failures
                    .push(format!("{claim}/{}: {:.6e} > {limit:e}", c.label, c.measured));
            }
        }
    }

    fn report_value(&mut self, report: &VerifyReport, claim: &str, label: &str) {
        match report.outcome(claim).and_then(|o| o.check(label)) {
            Some(c) if c.measured.is_finite() => self.summary.push(format!("{label} = {:.4}", c.measured)),
            Some(c) => self
                .failures
                .push(format!("{claim}/{label}: not finite ({})", c.measured)),
            None => self.failures.push(format!("{claim}/{label}: missing")),
        }
    }

    fn require(&mut self, ok: bool, msg: String) {
        if ok {
            self.summary.push(msg);
        } else {
            self.failures.push(msg);
        }
    }

    fn line(&self) -> String {
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if self.failures.is_empty() {
            self.summary.join(", ")
        } else {
            self.failures.join("; ")
        };
        format!("criterion {:>2} {status} {}: {detail}", self.id, self.title)
    }
}

fn only(names: &[&str]) -> VerifyConfig {
    VerifyConfig {
        only: names.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    }
}

#[test]
fn acceptance() {
    let t = Instant::now();
    let reproducing = run_verify(&only(&["basic-1"])).unwrap();
    let reproducing_time = t.elapsed();

    let t = Instant::now();
    let first = run_verify(&VerifyConfig::default()).unwrap();
    let verify_time = t.elapsed();
    let second = run_verify(&VerifyConfig::default()).unwrap();
    println!("{}", first.to_table());

    let mut all = Vec::new();

    let mut c = Criterion::new(1, "reproducing property");
    c.expect(&reproducing, "basic-1", "n<=2 sphere-product", 0.02);
    c.expect(&reproducing, "basic-1", "n=3 Monte Carlo", 0.05);
    c.require(
        reproducing_time <= Duration::from_secs(120),
        format!("runtime {:.1}s <= 120s", reproducing_time.as_secs_f64()),
    );
    all.push(c);

    let mut c = Criterion::new(2, "normalization constant");
    c.expect(&first, "normalization", "n=", 0.01);
    all.push(c);

    let mut c = Criterion::new(3, "ball closed form");
    c.expect(&first, "ball-formula", "z = 0", 0.01);
    c.expect(&first, "ball-formula", "20 random z", 0.02);
    all.push(c);

    let mut c = Criterion::new(4, "product formula");
    c.expect(&first, "product-formula", "bidisc at 0", 0.02);
    c.expect(&first, "product-formula", "disc x ball at 0", 0.02);
    all.push(c);

    let mut c = Criterion::new(5, "equivariance");
    c.expect(&first, "basic-2", "max relative error, 20 random A", 0.02);
    all.push(c);

    let mut c = Criterion::new(6, "sandwiches");
    c.expect(&first, "basic-5", "", 1.01);
    c.expect(&first, "kappa-khat", "", 1.01);
    c.expect(&first, "basic-3", "max band ratio, 10 pairs", 1.01);
    all.push(c);

    let mut c = Criterion::new(7, "Wu comparison on E(2,1)");
    c.expect(&first, "wu-thullen", "MVEE gap", 1e-7);
    c.expect(&first, "wu-thullen", "ratio spread / sqrt(2)", 1.0 + 1e-3);
    c.expect(&first, "kappa-wu", "ellipsoid(2,1) at 0+0i,0+0i", 1.01);
    match first.outcome("wu-thullen") {
        Some(o) if !o.notes.is_empty() => c.summary.push(o.notes.join(" ")),
        _ => c.failures.push("sandwich direction not logged".into()),
    }
    all.push(c);

    let mut c = Criterion::new(8, "distance-decreasing bound");
    c.expect(&first, "distance-decreasing", "", 1.01);
    let maps = first.outcome("distance-decreasing").map_or(0, |o| o.checks.len());
    c.require(maps == 10, format!("{maps} maps"));
    all.push(c);

    let mut c = Criterion::new(9, "covering of the punctured disc");
    c.expect(&first, "covering", "pi* kappa", 0.01);
    all.push(c);

    let mut c = Criterion::new(10, "curvature estimator");
    c.expect(&first, "curvature", "disc at 0", 0.05);
    c.expect(&first, "curvature", "injected flat field", 1e-6);
    c.expect(&first, "curvature", "ball C^2 at 0", 0.2);
    c.report_value(&first, "curvature", "E(2,1) at 0, direction e2: K proxy");
    all.push(c);

    let mut c = Criterion::new(11, "real/complex consistency");
    c.expect(&first, "real-complex", "max norm", 0.02);
    c.expect(&first, "real-complex", "E(2,1)", 0.02);
    match first.outcome("real-complex").and_then(|o| o.check("Euclidean C^2")) {
        Some(e) => c.require(
            e.measured <= e.limit && e.limit <= 0.02,
            format!("Euclidean {:.3e}<={:e}", e.measured, e.limit),
        ),
        None => c.failures.push("Euclidean case missing".into()),
    }
    all.push(c);

    let mut c = Criterion::new(12, "reproducibility");
    let identical = first.to_table() == second.to_table()
        && serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    c.require(identical, "two runs byte-identical".into());
    all.push(c);

    println!("verify runtime {:.1}s", verify_time.as_secs_f64());
    for c in &all {
        println!("{}", c.line());
    }
    let failed: Vec<usize> = all.iter().filter(|c| !c.failures.is_empty()).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
