//! Shared fixtures for the integration suites: reference traces are
//! expensive, so they are computed once per (member, range) key, cached on
//! disk as bit-exact checkpoints under the target tmp dir, and shared both
//! across test threads and across test binaries.
#![allow(dead_code)]

use pochxi::afamily::AFunctionSpec;
use pochxi::betatrace::{read_checkpoint, run_trace, BetaTrace};
use pochxi::Ctx;
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

pub fn ctx() -> Ctx {
    Ctx::default()
}

/// Key -> (spec, n0, n_max) for every reference trace the suites use.
pub fn trace_plan(key: &str) -> (AFunctionSpec, u32, u32) {
    let c = ctx();
    match key {
        "step" => (AFunctionSpec::step(c.one()).unwrap(), 4, 200),
        "riemann" => (AFunctionSpec::riemann(), 10, 200),
        "bessel1" => (AFunctionSpec::bessel(c.one()).unwrap(), 10, 200),
        "bessel005" => (AFunctionSpec::bessel(c.parse("0.005")).unwrap(), 4, 170),
        "incgamma1" => (AFunctionSpec::incgamma(c.one()).unwrap(), 10, 200),
        "incgamma001" => (AFunctionSpec::incgamma(c.parse("0.01")).unwrap(), 4, 252),
        "tau5" => (AFunctionSpec::tau(5).unwrap(), 10, 200),
        "dirichlet5" => (AFunctionSpec::dirichlet5(5).unwrap(), 10, 200),
        other => panic!("unknown trace key {other}"),
    }
}

fn cache_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("pochxi-traces");
    let _ = std::fs::create_dir_all(&dir);
    dir
}

type Registry = Mutex<HashMap<String, Arc<Mutex<()>>>>;

fn key_lock(key: &str) -> Arc<Mutex<()>> {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
    reg.lock()
        .unwrap()
        .entry(key.to_string())
        .or_insert_with(|| Arc::new(Mutex::new(())))
        .clone()
}

/// Compute (or load) a reference trace. Concurrent requests for the same
/// key serialize; different keys run in parallel.
pub fn trace(key: &str) -> BetaTrace {
    let c = ctx();
    let (spec, n0, n_max) = trace_plan(key);
    let path = cache_dir().join(format!("{key}.ckpt"));
    let lock = key_lock(key);
    let _guard = lock.lock().unwrap();
    if path.exists() {
        if let Ok(t) = read_checkpoint(c, &path) {
            if t.last().n >= n_max && t.error.is_none() {
                return t;
            }
        }
    }
    let t0 = std::time::Instant::now();
    let trace = run_trace(c, &spec, n0, n_max, 25, Some(&path), |_| {}).unwrap_or_else(|e| {
        panic!("reference trace '{key}' failed: {e}");
    });
    eprintln!(
        "[fixtures] trace {key}: n {}..{} in {:.1?}{}",
        n0,
        trace.last().n,
        t0.elapsed(),
        trace
            .error
            .as_ref()
            .map(|e| format!(" (TRUNCATED: {e})"))
            .unwrap_or_default()
    );
    assert!(
        trace.error.is_none() && trace.last().n >= n_max,
        "reference trace '{key}' incomplete: {:?}",
        trace.error
    );
    trace
}

/// One acceptance sub-check result.
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

/// Collects sub-checks and prints the per-criterion verdict line.
pub struct Criterion {
    pub id: &'static str,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn new(id: &'static str) -> Self {
        Criterion { id, checks: Vec::new() }
    }

    pub fn check(&mut self, label: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            label: label.to_string(),
            pass,
            detail,
        });
    }

    /// |got - want| <= tol
    pub fn check_abs(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check(
            label,
            (got - want).abs() <= tol,
            format!("got {got:.6}, want {want} +- {tol}"),
        );
    }

    pub fn finish(self) {
        let failed: Vec<&Check> = self.checks.iter().filter(|c| !c.pass).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "ACCEPTANCE {}: {verdict} ({}/{} sub-checks)",
            self.id,
            self.checks.len() - failed.len(),
            self.checks.len()
        );
        for c in &self.checks {
            println!(
                "  [{}] {}: {}",
                if c.pass { "ok" } else { "FAIL" },
                c.label,
                c.detail
            );
        }
        assert!(
            failed.is_empty(),
            "criterion {} failed: {}",
            self.id,
            failed
                .iter()
                .map(|c| format!("{} ({})", c.label, c.detail))
                .collect::<Vec<_>>()
                .join("; ")
        );
    }
}
