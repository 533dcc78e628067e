//! Minimal beta-sequence tracking: onset initialization, continuation by
//! the first-order beta/t increment equations with full Newton polish of
//! the double-root conditions, t-jump detection, and checkpointing.
//!
//! Every accepted row satisfies |Xi_n(t_n, b_n)| and |Xi_n'(t_n, b_n)|
//! below 1e-20 times the coefficient-sum scale. A sign flip of
//! P_{n+1}^+(u_n) between consecutive steps signals a candidate t-jump and
//! triggers a wider extremum search; minimality audits (the all-real
//! predicate just above and just below the tracked beta) run at jump
//! candidates, on any beta decrease, and every `recheck_stride` rows, with
//! a full onset re-scan as the fallback when an audit fails.

use crate::afamily::AFunctionSpec;
use crate::approximant::{build, recursion_sums};
use crate::coefficients::{coeff_vector, CoeffVector};
use crate::pochhammer::eval_pair;
use crate::real::{fmt_hex, parse_hex, Ctx};
use crate::rootfinder::{classify, onset_beta, real_regime};
use crate::{Error, Result};
use rug::ops::Pow;
use rug::Float;
use std::fmt::Write as _;
use std::path::Path;

/// One accepted continuation row.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub n: u32,
    pub beta: Float,
    pub t: Float,
    /// u_n = t_n / beta_n
    pub u: Float,
    /// Marks rows where the double root hopped to the next extremum.
    pub jumped: bool,
    /// |Xi_n(t_n, beta_n)| after polishing.
    pub res_xi: Float,
    /// |Xi_n'(t_n, beta_n)| after polishing.
    pub res_dxi: Float,
}

/// The minimal beta-sequence (n, beta_n, t_n, u_n, markers).
#[derive(Clone, Debug)]
pub struct BetaTrace {
    pub spec: AFunctionSpec,
    pub rows: Vec<TraceRow>,
    pub precision_bits: u32,
    pub recheck_stride: u32,
    /// Relative error of the first-order beta prediction per step (health
    /// metric; the paper's typical figure is 3%).
    pub prediction_errors: Vec<(u32, f64)>,
    /// Set when the trace was truncated by a certification failure.
    pub error: Option<String>,
}

impl BetaTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has at least the seed row")
    }

    pub fn rows_f64(&self) -> Vec<(u32, f64)> {
        self.rows.iter().map(|r| (r.n, r.beta.to_f64())).collect()
    }

    pub fn jump_rows(&self) -> Vec<u32> {
        self.rows.iter().filter(|r| r.jumped).map(|r| r.n).collect()
    }
}

/// Hard cap on trace length.
pub const N_CAP: u32 = 2000;

const DEFAULT_RECHECK_STRIDE: u32 = 25;

/// Residual scale for the double-root conditions: 1e-20 * max(1, Xi_n(0)).
fn residual_tol(ctx: Ctx, cv: &CoeffVector) -> Float {
    let sum = cv.values.iter().fold(ctx.zero(), |acc, b| acc + b);
    sum.abs().max(&ctx.one()) * ctx.f(10).pow(-20)
}

struct Polished {
    t: Float,
    beta: Float,
    res_xi: Float,
    res_dxi: Float,
    cv: CoeffVector,
}

/// Full Newton iteration on the 2x2 double-root system
/// (Xi_n, Xi_n') = (0, 0) in (t, beta).
fn newton_double_root(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n: u32,
    t0: &Float,
    beta0: &Float,
) -> Result<Polished> {
    let mut t = t0.clone();
    let mut beta = beta0.clone();
    let mut last_cv: Option<CoeffVector> = None;
    for iter in 0..60 {
        if !(beta.is_sign_positive() && !beta.is_zero()) || !t.is_sign_positive() {
            return Err(Error::Numerical(format!(
                "double-root iteration left the domain (t={t}, beta={beta})"
            )));
        }
        let cv = coeff_vector(ctx, spec, n, &beta, true)?;
        let tol = residual_tol(ctx, &cv);
        let s = recursion_sums(ctx, &cv, &beta, &t);
        let (dbeta, dbeta_dt) = (s.dbeta.clone().unwrap(), s.dbeta_dt.clone().unwrap());
        if s.xi.clone().abs() <= tol && s.dt.clone().abs() <= tol {
            return Ok(Polished {
                t,
                beta,
                res_xi: s.xi.abs(),
                res_dxi: s.dt.abs(),
                cv,
            });
        }
        let det = s.dt.clone() * &dbeta_dt - dbeta.clone() * &s.dtt;
        if det.is_zero() {
            return Err(Error::Numerical("singular Jacobian in double-root solve".into()));
        }
        let dt_step = (s.xi.clone() * &dbeta_dt - dbeta.clone() * &s.dt) / &det;
        let db_step = (s.dt.clone() * &s.dt - s.xi.clone() * &s.dtt) / &det;
        // damping against overshoot far from the solution
        let max_rel = ctx.f(0.25);
        let lim_t = (t.clone().abs() + 1u32) * &max_rel;
        let lim_b = beta.clone() * &max_rel;
        let dt_step = dt_step.clone().min(&lim_t).max(&(-lim_t.clone()));
        let db_step = db_step.clone().min(&lim_b).max(&(-lim_b.clone()));
        t -= &dt_step;
        beta -= &db_step;
        last_cv = Some(cv);
        let _ = iter;
    }
    let _ = last_cv;
    Err(Error::Numerical(format!(
        "double-root Newton did not converge at n = {n}"
    )))
}

/// Zeros of dXi_{n}/dt above `t_from + margin` inside a window, by grid
/// scan plus bisection; used for the post-jump restart.
fn next_extremum(
    ctx: Ctx,
    cv: &CoeffVector,
    beta: &Float,
    t_from: &Float,
    window: &Float,
) -> Option<Float> {
    let grid = 256u32;
    let margin = window.clone() / ctx.f(grid) * 4u32;
    let start = t_from.clone() + &margin;
    let mut last_t = start.clone();
    let mut last_v = recursion_sums(ctx, cv, beta, &start).dt;
    for i in 1..=grid {
        let ti = start.clone() + window.clone() * ctx.f(i) / ctx.f(grid);
        let vi = recursion_sums(ctx, cv, beta, &ti).dt;
        if !vi.is_zero() && vi.is_sign_positive() != last_v.is_sign_positive() {
            // bisect the bracket
            let (mut lo, mut hi, mut flo) = (last_t, ti, last_v);
            for _ in 0..80 {
                let mid = (lo.clone() + &hi) / 2u32;
                let fm = recursion_sums(ctx, cv, beta, &mid).dt;
                if fm.is_zero() {
                    return Some(mid);
                }
                if fm.is_sign_positive() == flo.is_sign_positive() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            return Some((lo + &hi) / 2u32);
        }
        last_t = ti;
        last_v = vi;
    }
    None
}

/// Minimality audit: all-real just above the candidate beta, complex pairs
/// just below.
fn audit_minimal(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<bool> {
    let above = beta.clone() * ctx.parse("1.001");
    let below = beta.clone() * ctx.parse("0.99");
    Ok(real_regime(ctx, spec, n, &above)? && !real_regime(ctx, spec, n, &below)?)
}

/// Initialize a trace by onset search at n0 with an automatic bracket.
pub fn init_trace(ctx: Ctx, spec: &AFunctionSpec, n0: u32) -> Result<BetaTrace> {
    if n0 < crate::approximant::N_MIN {
        return Err(Error::Domain(format!("trace needs n0 >= 4, got {n0}")));
    }
    let mut lo = ctx.parse("1e-3");
    let mut hi = ctx.parse("1e3");
    for _ in 0..4 {
        if real_regime(ctx, spec, n0, &hi)? {
            break;
        }
        hi *= 100u32;
    }
    for _ in 0..4 {
        if !real_regime(ctx, spec, n0, &lo)? {
            break;
        }
        lo /= 100u32;
    }
    let tol = hi.clone() * ctx.parse("1e-7");
    let onset = onset_beta(ctx, spec, n0, &lo, &hi, &tol)?;
    let polished = newton_double_root(ctx, spec, n0, &onset.t_star, &onset.beta_star)?;
    let row = TraceRow {
        n: n0,
        u: polished.t.clone() / &polished.beta,
        t: polished.t,
        beta: polished.beta,
        jumped: false,
        res_xi: polished.res_xi,
        res_dxi: polished.res_dxi,
    };
    Ok(BetaTrace {
        spec: spec.clone(),
        rows: vec![row],
        precision_bits: ctx.prec,
        recheck_stride: DEFAULT_RECHECK_STRIDE,
        prediction_errors: Vec::new(),
        error: None,
    })
}

/// Jump detection as a standalone probe: when the sign of P_{n+1}^+(u_n)
/// flips against the previous accepted step, run the widened extremum
/// search and report the t-branch the continuation would restart from.
/// Returns None without a sign flip.
pub fn detect_jump(ctx: Ctx, trace: &BetaTrace) -> Result<Option<Float>> {
    let last = trace.last();
    let n_next = last.n + 1;
    let sign_now = eval_pair(ctx, n_next, &last.u).plus.is_sign_positive();
    let sign_prev = if trace.rows.len() >= 2 {
        let prev = &trace.rows[trace.rows.len() - 2];
        eval_pair(ctx, last.n, &prev.u).plus.is_sign_positive()
    } else {
        sign_now
    };
    if sign_now == sign_prev {
        return Ok(None);
    }
    let cv = coeff_vector(ctx, &trace.spec, n_next, &last.beta, true)?;
    let mut window = ctx.pi() * 2u32 * last.beta.clone().max(&ctx.one());
    for _ in 0..3 {
        if let Some(t_ext) = next_extremum(ctx, &cv, &last.beta, &last.t, &window) {
            return Ok(Some(t_ext));
        }
        window *= 2u32;
    }
    Err(Error::Numerical(format!(
        "no extremum found in the widened search window at n = {n_next}"
    )))
}

/// Advance the trace by one order. Returns the appended row.
pub fn step(ctx: Ctx, trace: &mut BetaTrace) -> Result<TraceRow> {
    let spec = trace.spec.clone();
    let last = trace.last().clone();
    let n_next = last.n + 1;

    // jump signal: sign change of P_{n+1}^+(u_n) against the previous step
    let sign_now = eval_pair(ctx, n_next, &last.u).plus.is_sign_positive();
    let sign_prev = if trace.rows.len() >= 2 {
        let prev = &trace.rows[trace.rows.len() - 2];
        eval_pair(ctx, last.n, &prev.u).plus.is_sign_positive()
    } else {
        sign_now
    };
    let jump_signal = sign_now != sign_prev;

    // first-order increments (Eqs 6.5/6.6 evaluated at (t_n, beta_n))
    let cv = coeff_vector(ctx, &spec, n_next, &last.beta, true)?;
    let s = recursion_sums(ctx, &cv, &last.beta, &last.t);
    let dbeta = s.dbeta.clone().unwrap();
    let dbeta_dt = s.dbeta_dt.clone().unwrap();
    if dbeta.is_zero() || s.dtt.is_zero() {
        return Err(Error::Numerical("degenerate increment equations".into()));
    }
    let delta_beta = -(s.xi.clone() / &dbeta);
    let delta_t = -((s.dt.clone() - s.xi.clone() * &dbeta_dt / &dbeta) / &s.dtt);

    let predicted_beta = last.beta.clone() + &delta_beta;
    let predicted_t = last.t.clone() + &delta_t;

    // candidate A: plain Newton from the first-order prediction
    let plain = newton_double_root(ctx, &spec, n_next, &predicted_t, &predicted_beta);

    // acceptance: the plain candidate is audited whenever anything looks
    // suspicious; the wider extremum search only engages when the plain
    // continuation fails its audit (the tracked extremum stopped being the
    // minimal coalescence)
    let need_audit = |cand: &Polished| -> bool {
        jump_signal
            || cand.beta <= last.beta
            || (cand.t.clone() - &last.t).abs() > 0.4
            || n_next % trace.recheck_stride == 0
    };
    let mut accepted: Option<(Polished, bool)> = None; // (row, via_jump_branch)
    if let Ok(p) = plain {
        if p.t.clone() >= last.t.clone() * ctx.parse("0.999")
            && (!need_audit(&p) || audit_minimal(ctx, &spec, n_next, &p.beta)?)
        {
            accepted = Some((p, false));
        }
    }
    if accepted.is_none() && jump_signal {
        let mut window = ctx.pi() * 2u32 * last.beta.clone().max(&ctx.one());
        for _ in 0..3 {
            let beta_for_search = predicted_beta.clone().max(&(last.beta.clone() / 2u32));
            let cv_search = coeff_vector(ctx, &spec, n_next, &beta_for_search, true)?;
            if let Some(t_ext) = next_extremum(ctx, &cv_search, &beta_for_search, &last.t, &window)
            {
                if let Ok(jc) = newton_double_root(ctx, &spec, n_next, &t_ext, &beta_for_search) {
                    if jc.t > last.t && audit_minimal(ctx, &spec, n_next, &jc.beta)? {
                        accepted = Some((jc, true));
                        break;
                    }
                }
            }
            window *= 2u32;
        }
    }
    let (polished, via_jump) = match accepted {
        Some(x) => x,
        None => {
            // authoritative fallback: full onset re-scan around the current beta
            let lo = last.beta.clone() / 4u32;
            let hi = last.beta.clone() * 4u32;
            let tol = last.beta.clone() * ctx.parse("1e-7");
            let onset = onset_beta(ctx, &spec, n_next, &lo, &hi, &tol)?;
            let p = newton_double_root(ctx, &spec, n_next, &onset.t_star, &onset.beta_star)?;
            let big_move = (p.t.clone() - &last.t).abs() > 0.4;
            (p, big_move)
        }
    };

    // health metric: first-order prediction quality in beta
    let pred_err = ((predicted_beta - &polished.beta) / polished.beta.clone())
        .abs()
        .to_f64();
    trace.prediction_errors.push((n_next, pred_err));

    let jumped = via_jump || (polished.t.clone() - &last.t) > 0.45;
    let row = TraceRow {
        n: n_next,
        u: polished.t.clone() / &polished.beta,
        t: polished.t,
        beta: polished.beta,
        jumped,
        res_xi: polished.res_xi,
        res_dxi: polished.res_dxi,
    };
    let _ = polished.cv;
    trace.rows.push(row.clone());
    Ok(row)
}

/// Stride re-certification: the minimality brackets must hold, and the
/// pair that goes complex just below the tracked beta must be the tracked
/// one (the lowest coalescence). Far-field real roots can sit closer in
/// relative gap without coalescing, so the test runs on the complex side.
fn recheck(ctx: Ctx, trace: &BetaTrace) -> Result<()> {
    let last = trace.last();
    let spec = &trace.spec;
    if !audit_minimal(ctx, spec, last.n, &last.beta)? {
        return Err(Error::Certification(format!(
            "minimality brackets failed at n = {}",
            last.n
        )));
    }
    let below = last.beta.clone() * ctx.parse("0.99");
    let approx = build(ctx, spec, last.n, &below, false)?;
    let profile = classify(ctx, &approx.poly_u)?;
    let near = profile.complex_pairs.iter().any(|(re, _)| {
        re.is_sign_positive()
            && ((re.clone() - &last.t).abs() / (last.t.clone() + 1u32)).to_f64() <= 0.05
    });
    if !near {
        let pairs: Vec<(f64, f64)> = profile
            .complex_pairs
            .iter()
            .map(|(r, i)| (r.to_f64(), i.to_f64()))
            .collect();
        return Err(Error::Certification(format!(
            "tracked root t = {} is not the lowest coalescence (complex pairs below beta: {pairs:?}) at n = {}",
            last.t, last.n
        )));
    }
    Ok(())
}

/// Run (or resume) a full trace with periodic re-certification and
/// checkpointing.
pub fn run_trace(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n0: u32,
    n_max: u32,
    checkpoint_every: u32,
    checkpoint: Option<&Path>,
    mut observer: impl FnMut(&TraceRow),
) -> Result<BetaTrace> {
    if n_max > N_CAP {
        return Err(Error::Domain(format!("n_max capped at {N_CAP}, got {n_max}")));
    }
    if n_max < n0 {
        return Err(Error::Domain("n_max must be >= n0".into()));
    }
    let mut trace = match checkpoint {
        Some(path) if path.exists() => {
            let mut t = read_checkpoint(ctx, path)?;
            check_resume_compatible(ctx, spec, &t)?;
            // a recorded truncation belongs to the previous run; resume
            // retries from the last certified row
            t.error = None;
            t
        }
        _ => {
            let t = init_trace(ctx, spec, n0)?;
            if let Some(path) = checkpoint {
                write_checkpoint(ctx, &t, path)?;
            }
            t
        }
    };
    for r in &trace.rows {
        observer(r);
    }
    while trace.last().n < n_max && trace.error.is_none() {
        match step(ctx, &mut trace) {
            Ok(row) => {
                observer(&row);
                if row.n % trace.recheck_stride == 0 {
                    if let Err(e) = recheck(ctx, &trace) {
                        trace.rows.pop();
                        trace.error = Some(e.to_string());
                        break;
                    }
                }
                if let Some(path) = checkpoint {
                    if row.n % checkpoint_every == 0 || row.n == n_max {
                        write_checkpoint(ctx, &trace, path)?;
                    }
                }
            }
            Err(e) => {
                trace.error = Some(e.to_string());
                break;
            }
        }
    }
    if let Some(path) = checkpoint {
        write_checkpoint(ctx, &trace, path)?;
    }
    Ok(trace)
}

fn fnv1a(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in data {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Header hash binding a checkpoint to (spec, precision).
pub fn numerics_hash(ctx: Ctx, spec: &AFunctionSpec) -> u64 {
    let mut s = String::new();
    for (k, v) in spec.to_kv(ctx) {
        let _ = write!(s, "{k}={v};");
    }
    let _ = write!(s, "prec={};tol={}", ctx.prec, ctx.tol_log10);
    fnv1a(s.as_bytes())
}

/// Versioned checkpoint: header plus hex-exact rows, written atomically
/// (temp file then rename).
pub fn write_checkpoint(ctx: Ctx, trace: &BetaTrace, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("pochxi-trace-v1\n");
    let _ = writeln!(out, "hash = {:016x}", numerics_hash(ctx, &trace.spec));
    for (k, v) in trace.spec.to_kv(ctx) {
        let _ = writeln!(out, "{k} = {v}");
    }
    let _ = writeln!(out, "precision_bits = {}", trace.precision_bits);
    let _ = writeln!(out, "recheck_stride = {}", trace.recheck_stride);
    if let Some(e) = &trace.error {
        let _ = writeln!(out, "error = {}", e.replace('\n', " "));
    }
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "row,{},{},{},{},{},{},{}",
            r.n,
            fmt_hex(&r.beta),
            fmt_hex(&r.t),
            fmt_hex(&r.u),
            r.jumped as u8,
            fmt_hex(&r.res_xi),
            fmt_hex(&r.res_dxi)
        );
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, out)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a checkpoint written by [`write_checkpoint`], bit-exact at the same
/// precision.
pub fn read_checkpoint(ctx: Ctx, path: &Path) -> Result<BetaTrace> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("pochxi-trace-v1") {
        return Err(Error::Config(format!(
            "{} is not a pochxi-trace-v1 checkpoint",
            path.display()
        )));
    }
    let mut kv: Vec<(String, String)> = Vec::new();
    let mut rows = Vec::new();
    let mut error = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("row,") {
            let f: Vec<&str> = rest.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Config(format!("malformed row: {line}")));
            }
            let n: u32 = f[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad n in row: {line}")))?;
            let fx = |s: &str| {
                parse_hex(s, ctx.prec)
                    .ok_or_else(|| Error::Config(format!("bad float in row: {s}")))
            };
            rows.push(TraceRow {
                n,
                beta: fx(f[1])?,
                t: fx(f[2])?,
                u: fx(f[3])?,
                jumped: f[4] == "1",
                res_xi: fx(f[5])?,
                res_dxi: fx(f[6])?,
            });
        } else if let Some((k, v)) = line.split_once('=') {
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "error" {
                error = Some(v);
            } else {
                kv.push((k, v));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config("checkpoint holds no rows".into()));
    }
    let get_u = |key: &str| -> Result<u32> {
        kv.iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.parse().ok())
            .ok_or_else(|| Error::Config(format!("missing '{key}' in checkpoint")))
    };
    let precision_bits = get_u("precision_bits")?;
    let recheck_stride = get_u("recheck_stride")?;
    let spec = AFunctionSpec::from_kv(ctx, &kv)?;
    let stored_hash = kv
        .iter()
        .find(|(k, _)| k == "hash")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| Error::Config("missing 'hash' in checkpoint".into()))?;
    let trace = BetaTrace {
        spec,
        rows,
        precision_bits,
        recheck_stride,
        prediction_errors: Vec::new(),
        error,
    };
    let expect = format!("{:016x}", numerics_hash(ctx, &trace.spec));
    if precision_bits != ctx.prec || stored_hash != expect {
        return Err(Error::Config(
            "checkpoint numerics (spec, precision) differ from the current run".into(),
        ));
    }
    Ok(trace)
}

fn check_resume_compatible(ctx: Ctx, spec: &AFunctionSpec, trace: &BetaTrace) -> Result<()> {
    if numerics_hash(ctx, spec) != numerics_hash(ctx, &trace.spec) {
        return Err(Error::Config(
            "resume refused: checkpoint was produced with a different spec".into(),
        ));
    }
    Ok(())
}
