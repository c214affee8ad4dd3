//! Acceptance suite: one line per criterion, full-size configurations,
//! tolerances pinned here independently of the experiment defaults.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;
use stokeslab::{run_experiment, ExperimentConfig, ExperimentId, ExperimentReport, Status};

type Outcome = Result<(bool, String), String>;

struct Run {
    report: ExperimentReport,
    elapsed: Duration,
}

fn run(cfg: &ExperimentConfig, id: ExperimentId) -> Run {
    let start = Instant::now();
    let report = run_experiment(id, cfg).report;
    Run {
        report,
        elapsed: start.elapsed(),
    }
}

impl Run {
    fn get(&self, check: &str, key: &str) -> Result<&Value, String> {
        let c = self
            .report
            .checks
            .iter()
            .find(|c| c.name == check)
            .ok_or_else(|| format!("no check {check}"))?;
        if c.status == Status::Error {
            return Err(format!("{check}: {}", c.note.as_deref().unwrap_or("error")));
        }
        c.values
            .get(key)
            .ok_or_else(|| format!("{check} has no value {key}"))
    }

    fn num(&self, check: &str, key: &str) -> Result<f64, String> {
        self.get(check, key)?
            .as_f64()
            .ok_or_else(|| format!("{check}.{key} is not a number"))
    }

    fn nums(&self, check: &str, key: &str) -> Result<Vec<f64>, String> {
        self.get(check, key)?
            .as_array()
            .and_then(|a| a.iter().map(Value::as_f64).collect())
            .ok_or_else(|| format!("{check}.{key} is not a list of numbers"))
    }

    fn secs(&self) -> f64 {
        self.elapsed.as_secs_f64()
    }
}

fn kernel_identities(r: &Run) -> Outcome {
    let semigroup = r.num("semigroup", "max_error")?;
    let mass = r.num("heat_mass", "error")?;
    let scaling = r.num("parabolic_scaling", "max_relative_error")?;
    let pass = semigroup < 1e-6 && mass < 1e-8 && scaling <= 1e-14 && r.secs() < 10.0;
    Ok((
        pass,
        format!(
            "semigroup {semigroup:.1e} (< 1e-6), mass {mass:.1e} (< 1e-8), scaling {scaling:.1e} (<= 1e-14), {:.1} s (< 10 s)",
            r.secs()
        ),
    ))
}

fn tensor_identities(r: &Run) -> Outcome {
    let trace = r.num("trace_identity", "max_residual")?;
    let relation = r.num("l_b_relation_stated", "max_residual")?;
    let flipped = r.num("l_b_relation_observed", "max_residual")?;
    let points = r.num("trace_identity", "points")?;
    let pass = trace < 1e-4 && relation < 1e-4 && points >= 5.0 && r.secs() < 120.0;
    Ok((
        pass,
        format!(
            "trace {trace:.1e}, L_1n - L_n1 + B_1n {relation:.1e} (both < 1e-4), {points} points, {:.1} s; with +B_1n flipped to -B_1n the residual is {flipped:.1e}",
            r.secs()
        ),
    ))
}

fn riesz(r: &Run) -> Outcome {
    let change = r.num("remainder_bound_stability", "relative_change")?;
    let lo = r.num("leading_ratio", "min_ratio")?;
    let hi = r.num("leading_ratio", "max_ratio")?;
    let pass = change <= 0.10 && lo >= 0.95 && hi <= 1.05 && r.secs() < 60.0;
    Ok((
        pass,
        format!(
            "bound change {change:.2e} (<= 0.10), total/leading in [{lo:.5}, {hi:.5}] (within [0.95, 1.05]), {:.1} s (< 60 s)",
            r.secs()
        ),
    ))
}

fn boundedness(r: &Run) -> Outcome {
    let sups = r.nums("sup_refinement", "sups")?;
    let change = r.num("sup_refinement", "relative_change")?;
    let pass = sups.len() >= 3 && change < 0.01;
    Ok((
        pass,
        format!("sups {sups:?}, change between the two finest {change:.2e} (< 0.01)"),
    ))
}

fn gradient(r: &Run) -> Outcome {
    let slope = r.num("log_slope_regression", "slope")?;
    let r2 = r.num("log_slope_regression", "r_squared")?;
    let growth = r.nums("epsilon_divergence", "growth_factors")?;
    let last = &growth[growth.len().saturating_sub(3)..];
    let pass = slope > 0.0
        && r2 > 0.99
        && last.len() == 3
        && last.iter().all(|g| *g > 1.2)
        && r.secs() < 300.0;
    Ok((
        pass,
        format!(
            "slope {slope:.3e} (> 0), R^2 {r2:.5} (> 0.99), last growth factors {last:.3?} (> 1.2), {:.1} s (< 300 s)",
            r.secs()
        ),
    ))
}

fn besov(r: &Run) -> Outcome {
    let mismatch = r.num("slope_match", "relative_mismatch")?;
    let slope = r.num("slope_match", "slope")?;
    let companion = r.num("slope_match", "companion_slope")?;
    Ok((
        mismatch < 0.10,
        format!("slope {slope:.4} vs companion {companion:.4}, mismatch {mismatch:.3} (< 0.10)"),
    ))
}

fn plancherel(r: &Run) -> Outcome {
    let change = r.num("ratio_resolution", "relative_change")?;
    let mass = r.num("kernel_mass", "total")?.abs();
    let points = r.nums("khat_linear_scaling", "points")?;
    if points != [0.01, 0.02, 0.04] {
        return Err(format!("linear scaling probed at {points:?}"));
    }
    let spread = r.num("khat_linear_scaling", "spread")?;
    let slope = r.num("khat_linear_scaling", "log_log_slope")?;
    let pass = change < 0.05 && mass < 1e-8 && spread < 0.10;
    Ok((
        pass,
        format!(
            "ratio change {change:.1e} (< 0.05), |int K| {mass:.1e} (< 1e-8), |K^(x)|/x spread {spread:.3} (< 0.10; log-log slope {slope:.3})"
        ),
    ))
}

fn harmonic(r: &Run) -> Outcome {
    let factor = r.num("factorization", "relative_difference")?;
    let theta = r.num("factorization", "theta")?;
    let radius = r.num("factorization", "radius")?;
    let p0 = r.num("lower_exponent_stable", "p0")?;
    let change = r.num("lower_exponent_stable", "relative_change")?;
    let increments = r.nums("upper_exponent_growth", "increments")?;
    let pass = factor < 1e-3
        && theta == 2.0
        && radius == 0.5
        && p0 == 9.0
        && change < 0.01
        && !increments.is_empty()
        && increments.iter().all(|d| *d > 0.0);
    Ok((
        pass,
        format!(
            "factorization {factor:.1e} (< 1e-3), p0 = {p0}, L^(p0-1) change {change:.2e} (< 0.01), L^(p0+1) increments [{}] (all > 0)",
            sci(&increments)
        ),
    ))
}

fn sci(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.2e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn quick_suite() -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_stokeslab"))
        .args(["run", "all", "--quick", "--out"])
        .arg(out.path())
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let secs = start.elapsed().as_secs_f64();
    let code = status.code().map_or("none".to_string(), |c| c.to_string());
    Ok((
        status.code() == Some(0) && secs < 60.0,
        format!("exit code {code} (0), {secs:.1} s (< 60 s)"),
    ))
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::defaults("all", false);
    let mut failed = 0;
    let mut report = |n: usize, title: &str, outcome: Outcome| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        println!(
            "criterion {n}  {}  {title}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        failed += usize::from(!pass);
    };

    let kernels = run(&cfg, ExperimentId::KernelIdentities);
    report(1, "kernel identities", kernel_identities(&kernels));
    report(2, "tensor identities", tensor_identities(&kernels));
    report(
        3,
        "Riesz remainder and leading term",
        riesz(&run(&cfg, ExperimentId::RieszAsymptotics)),
    );
    report(
        4,
        "boundedness under refinement",
        boundedness(&run(&cfg, ExperimentId::Boundedness)),
    );
    report(
        5,
        "normal-derivative blow-up",
        gradient(&run(&cfg, ExperimentId::GradientBlowup)),
    );
    report(
        6,
        "seminorm divergence rate",
        besov(&run(&cfg, ExperimentId::BesovDivergence)),
    );
    report(
        7,
        "Plancherel ratio and kernel transform",
        plancherel(&run(&cfg, ExperimentId::Plancherel)),
    );
    report(
        8,
        "harmonic-flow dichotomy",
        harmonic(&run(&cfg, ExperimentId::HarmonicFlow)),
    );
    report(9, "quick suite", quick_suite());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
