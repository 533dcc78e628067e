//! Expansion coefficients b_k(beta), B_n(beta), their beta-derivatives,
//! remainder terms, and Laplace-method estimates.
//!
//! The workhorse is a fused quadrature pass: for one (member, beta) the
//! integrand factor A_I(y^{-2/beta}) (and its beta-derivative) is sampled
//! once per node on an adaptively refined panel set, then every power
//! (1-y)^k for k = 0..n is accumulated from the same samples. All the
//! integration mass sits near y ~ 1/n, so panels start on a geometric
//! ladder reaching down to the decay cut of A_I.

use crate::afamily::{AFunctionSpec, Variant};
use crate::pochhammer::PochState;
use crate::quad::{gl_rule, integrate};
use crate::real::{gamma_abs_one_minus_iu, Ctx};
use crate::{Error, Result};
use rug::ops::Pow;
use rug::Float;

/// Coefficient vector b_0..b_n at one (member, beta), optionally with
/// beta-derivatives.
#[derive(Clone, Debug)]
pub struct CoeffVector {
    pub beta: Float,
    pub values: Vec<Float>,
    pub dvalues: Option<Vec<Float>>,
    /// Per-entry achieved relative quadrature tolerance (upper bound).
    pub achieved_tol: Vec<f64>,
}

impl CoeffVector {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }
}

/// Laplace-method estimate with its regime flag.
#[derive(Clone, Debug)]
pub struct LaplaceEstimate {
    pub value: Float,
    /// Whether eps(n) = 2/beta sits in the band 1/sublog(n) >= eps >> 1/log(n).
    pub in_regime: bool,
}

/// Global pass counter for performance diagnostics.
pub static PASS_COUNT: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

/// b_k(beta) for k = 0..n, one fused pass.
pub fn coeff_vector(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n: u32,
    beta: &Float,
    want_deriv: bool,
) -> Result<CoeffVector> {
    if !(beta.is_sign_positive() && !beta.is_zero()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    if let Variant::Step { w } = &spec.variant {
        return Ok(step_closed_form(ctx, &ctx.f(w), n, beta, want_deriv));
    }
    PASS_COUNT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let pass = VectorPass::run(ctx, spec, n, beta, want_deriv)?;
    let four_over_beta = ctx.f(4) / beta;
    let values: Vec<Float> = pass
        .i_vals
        .iter()
        .map(|i| four_over_beta.clone() * i)
        .collect();
    let dvalues = pass.j_vals.map(|js| {
        js.iter()
            .zip(&values)
            .map(|(j, b)| four_over_beta.clone() * j - b.clone() / beta)
            .collect()
    });
    if spec.nonnegative() {
        for (k, b) in values.iter().enumerate() {
            if !b.is_sign_positive() || b.is_zero() {
                return Err(Error::Numerical(format!(
                    "b_{k}({beta}) = {b} is not positive for {}",
                    spec.variant_name()
                )));
            }
        }
    }
    Ok(CoeffVector {
        beta: beta.clone(),
        values,
        dvalues,
        achieved_tol: pass.tols,
    })
}

/// b_k(beta) = (4/beta) \int_0^1 A_I(y^{-2/beta}) (1-y)^k dy.
pub fn coeff_bk(ctx: Ctx, spec: &AFunctionSpec, k: u32, beta: &Float) -> Result<Float> {
    Ok(coeff_vector(ctx, spec, k, beta, false)?
        .values
        .pop()
        .unwrap())
}

/// B_n(beta) = beta * b_n(beta).
pub fn coeff_bn(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<Float> {
    Ok(coeff_bk(ctx, spec, n, beta)? * beta)
}

/// dB_n/dbeta via the analytically differentiated integrand.
pub fn coeff_bn_dbeta(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<Float> {
    let v = coeff_vector(ctx, spec, n, beta, true)?;
    let b = v.values.last().unwrap();
    let db = v.dvalues.as_ref().unwrap().last().unwrap();
    // B = beta b => B' = b + beta b'
    Ok(b.clone() + beta.clone() * db)
}

fn step_closed_form(ctx: Ctx, w: &Float, n: u32, beta: &Float, want_deriv: bool) -> CoeffVector {
    // b_k = 4 (1 - e^{-w beta})^{k+1} / (beta (k+1))
    let ewb = (-(w.clone() * beta)).exp();
    let eps = ctx.one() - &ewb;
    let mut values = Vec::with_capacity(n as usize + 1);
    let mut dvalues = want_deriv.then(Vec::new);
    let mut pow = eps.clone(); // eps^{k+1}
    for k in 0..=n {
        let b = ctx.f(4) * &pow / (beta.clone() * (k + 1));
        if let Some(ds) = dvalues.as_mut() {
            // b' = -b/beta + (4/beta) eps^k w e^{-w beta}
            let epsk = pow.clone() / &eps;
            let d = -(b.clone() / beta) + ctx.f(4) / beta * epsk * w * &ewb;
            ds.push(d);
        }
        values.push(b);
        pow *= &eps;
    }
    CoeffVector {
        beta: beta.clone(),
        values,
        dvalues,
        achieved_tol: vec![0.0; n as usize + 1],
    }
}

struct VectorPass {
    i_vals: Vec<Float>,
    j_vals: Option<Vec<Float>>,
    tols: Vec<f64>,
}

struct PanelData {
    nodes: Vec<(Float, Float, Float)>, // (y, w*A, w*dA)
    probe: Vec<Float>,
    delta: Float,
}

impl VectorPass {
    fn run(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float, want_deriv: bool) -> Result<Self> {
        // Below tol*1e-4 the skipped measure is itself under the quadrature
        // tolerance for the bounded kernels (1-y)^k, so the ladder need not
        // descend further even when A_I decays only at much smaller y.
        let y_floor = y_floor(ctx, spec, beta).max(&ctx.f(10).pow(ctx.tol_log10 - 4));
        let rule = gl_rule(ctx, 32);
        let rule_lo = gl_rule(ctx, 16);
        let probes: Vec<u32> = {
            let mut p = vec![0, n / 4, n / 2, n];
            p.dedup();
            p
        };

        let eval_panel = |a: &Float, b: &Float, full: bool| -> PanelData {
            let r = if full { &rule } else { &rule_lo };
            let half = (b.clone() - a) / 2u32;
            let mid = (a.clone() + b) / 2u32;
            let mut nodes = Vec::with_capacity(r.nodes.len());
            let mut probe = vec![ctx.zero(); probes.len()];
            for (xn, wn) in r.nodes.iter().zip(&r.weights) {
                let y = mid.clone() + Float::with_val(ctx.prec, xn * &half);
                let lnx = -(y.clone().ln() * 2u32) / beta;
                let x = lnx.clone().exp();
                let (av, adx) = spec.eval_ai_unchecked(ctx, &x);
                let ad = if want_deriv {
                    -(adx * &x * lnx) / beta
                } else {
                    ctx.zero()
                };
                let wa = av * wn * &half;
                let wd = ad * wn * &half;
                let q = ctx.one() - &y;
                for (pi, &pk) in probes.iter().enumerate() {
                    probe[pi] += wa.clone() * q.clone().pow(pk);
                }
                nodes.push((y, wa, wd));
            }
            PanelData {
                nodes,
                probe,
                delta: ctx.zero(),
            }
        };

        // Initial edges: a geometric ladder in y resolves the (1-y)^k
        // concentration near y ~ 1/n, and a geometric ladder in
        // x = y^{-2/beta} (i.e. y_j = 2^{-j beta/2}) resolves the A_I decay,
        // which for small beta happens entirely near y = 1.
        let mut edges = vec![ctx.one(), y_floor.clone()];
        let mut e = ctx.f(0.5);
        while e.clone() > y_floor && edges.len() < 2000 {
            edges.push(e.clone());
            e /= 2u32;
        }
        let xstep: Float = ctx.f(2).pow(&(-(beta.clone()) / 2u32));
        let mut ex = xstep.clone();
        while ex.clone() > y_floor && edges.len() < 4000 {
            edges.push(ex.clone());
            ex *= &xstep;
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|hi, lo| {
            // drop near-duplicate edges (micro panels add nothing)
            hi.clone() <= lo.clone() * ctx.f(1.02)
        });
        if edges.last().map_or(true, |e| e.clone() < 1u32) {
            edges.push(ctx.one());
        }
        if edges.len() < 2 {
            edges = vec![y_floor.clone(), ctx.one()];
        }

        let tol = ctx.tol();
        let mut accepted: Vec<PanelData> = Vec::new();
        // (a, b, full-rule data, depth)
        let mut stack: Vec<(Float, Float, PanelData, u32)> = Vec::new();
        for w in edges.windows(2) {
            let pd = eval_panel(&w[0], &w[1], true);
            stack.push((w[0].clone(), w[1].clone(), pd, 0));
        }
        let mut scale = vec![ctx.zero(); probes.len()];
        for (_, _, pd, _) in &stack {
            for (s, p) in scale.iter_mut().zip(&pd.probe) {
                *s += p.clone().abs();
            }
        }
        let mut panel_budget = 6_000usize;
        while let Some((a, b, pd, depth)) = stack.pop() {
            if panel_budget == 0 {
                return Err(Error::Quadrature {
                    achieved: f64::NAN,
                    requested: tol.to_f64(),
                });
            }
            panel_budget -= 1;
            // embedded lower-order estimate first: agreement with the
            // 16-point rule accepts an easy panel at 48 samples total
            let lo = eval_panel(&a, &b, false);
            let mut worst = ctx.zero();
            for (pi, p) in pd.probe.iter().enumerate() {
                let delta = (p.clone() - &lo.probe[pi]).abs();
                let s = scale[pi].clone().max(&ctx.f(1e-300));
                let rel = delta / s;
                worst = worst.max(&rel);
            }
            if worst <= tol || depth >= 40 {
                let mut pd = pd;
                pd.delta = worst;
                accepted.push(pd);
                continue;
            }
            // otherwise split and judge by the actual full-rule improvement
            let mid = (a.clone() + &b) / 2u32;
            let mut l = eval_panel(&a, &mid, true);
            let mut r = eval_panel(&mid, &b, true);
            let mut worst = ctx.zero();
            for (pi, p) in pd.probe.iter().enumerate() {
                let refined = l.probe[pi].clone() + &r.probe[pi];
                let delta = (p.clone() - &refined).abs();
                let s = scale[pi].clone().max(&ctx.f(1e-300));
                let rel = delta / s;
                worst = worst.max(&rel);
            }
            if worst <= tol || depth >= 39 {
                l.delta = worst.clone();
                r.delta = worst;
                accepted.push(l);
                accepted.push(r);
            } else {
                stack.push((a, mid.clone(), l, depth + 1));
                stack.push((mid, b, r, depth + 1));
            }
        }

        // final accumulation over all k from the stored samples
        let m = n as usize + 1;
        let mut i_vals = vec![ctx.zero(); m];
        let mut j_vals = want_deriv.then(|| vec![ctx.zero(); m]);
        let mut worst_tol = 0f64;
        for p in &accepted {
            worst_tol = worst_tol.max(p.delta.to_f64());
            for (y, wa, wd) in &p.nodes {
                let q = ctx.one() - y;
                let mut pw = ctx.one();
                for k in 0..m {
                    i_vals[k] += wa.clone() * &pw;
                    if let Some(js) = j_vals.as_mut() {
                        js[k] += wd.clone() * &pw;
                    }
                    pw *= &q;
                }
            }
        }
        Ok(VectorPass {
            i_vals,
            j_vals,
            tols: vec![worst_tol; m],
        })
    }
}

/// Lower integration limit: below it A_I(y^{-2/beta}) is negligible (or
/// exactly zero for compact support).
fn y_floor(ctx: Ctx, spec: &AFunctionSpec, beta: &Float) -> Float {
    if let Some(up) = spec.support_upper(ctx) {
        // support edge: y = up^{-beta/2}
        return up.pow(&(-(beta.clone()) / 2u32));
    }
    let (b, a) = spec.exp_order(ctx).expect("exponential member");
    let digits = ctx.decimal_digits() as u32;
    let target = ctx.f(digits + 30) * ctx.f(10).ln();
    let x_cut = (target / a).pow(&(ctx.one() / b)) * 2u32;
    x_cut.pow(&(-(beta.clone()) / 2u32))
}

/// Laplace-method estimate of B_n(beta) for members of exponential order 1
/// and type a, with eps(n) = 2/beta:
/// `(4/n) sqrt(2 pi a eps n^eps) exp(-a n^eps - a eps n^eps)`,
/// times (n^eps)^{9/4} for the riemann_bessel_approx member.
///
/// The leading factor 4 comes from the definition B_n = 4 \int ...; the bare
/// saddle-point expression without it underestimates the quadrature by ~4x.
pub fn laplace_bn(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<LaplaceEstimate> {
    let (order, a) = spec
        .exp_order(ctx)
        .ok_or_else(|| Error::Domain("Laplace estimate needs an exponential member".into()))?;
    if order != 1u32 {
        return Err(Error::Domain(format!(
            "Laplace estimate covers exponential order 1, got order {order}"
        )));
    }
    if a.is_zero() || a.is_sign_negative() {
        return Err(Error::Domain("Laplace estimate needs type a > 0".into()));
    }
    if n == 0 {
        return Err(Error::Domain("Laplace estimate needs n >= 1".into()));
    }
    let eps = ctx.f(2) / beta;
    let neps = ctx.f(n).pow(&eps);
    let two_pi = ctx.pi() * 2u32;
    let mut value = ctx.f(4) / n
        * (two_pi * a.clone() * &eps * &neps).sqrt()
        * (-(a.clone() * &neps) - a.clone() * &eps * &neps).exp();
    if matches!(spec.variant, Variant::RiemannBesselApprox { .. }) {
        value *= neps.clone().pow(&ctx.f(2.25));
    }
    // regime: 1/sublog(n) >= eps >> 1/log(n)
    let ln_n = ctx.f(n).ln();
    let sublog = crate::asymptotics::sublog(ctx, &ctx.f(n))?;
    let in_regime = eps.clone() * &sublog <= ctx.f(1.05) && eps * &ln_n >= ctx.f(1.1);
    Ok(LaplaceEstimate { value, in_regime })
}

/// Exact remainder at t = 0:
/// `R_n(0) = (4/beta) \int_0^1 A_I(y^{-2/beta}) (1-y)^{n+1} / y dy`.
pub fn remainder_at_zero(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<Float> {
    if !(beta.is_sign_positive() && !beta.is_zero()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let floor = y_floor(ctx, spec, beta);
    let tol = ctx.tol();
    let q = integrate(
        ctx,
        |y| {
            let lnx = -(y.clone().ln() * 2u32) / beta;
            let x = lnx.exp();
            let a = spec.eval_ai_unchecked(ctx, &x).0;
            a * (ctx.one() - y).pow(n + 1) / y
        },
        &floor,
        &ctx.one(),
        &tol,
        None,
        32,
    )?;
    Ok(q.value * 4u32 / beta)
}

/// Exact remainder R_n(t, beta) = sum_{k>n} b_k(beta) P_k^+(t/beta),
/// summed until the envelope-bounded tail is negligible.
///
/// At t = 0 this reduces to the closed integral form, which is used
/// directly.
pub fn remainder(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float, t: &Float) -> Result<Float> {
    if t.is_zero() {
        return remainder_at_zero(ctx, spec, n, beta);
    }
    let u = t.clone() / beta;
    let env = tail_envelope(ctx, &u);
    // extend the coefficient vector until b_k * env is far below the
    // accumulated scale
    let mut kmax = n + 64;
    let cutoff: Float = ctx.f(10).pow(ctx.tol_log10 - 5);
    loop {
        let cv = coeff_vector(ctx, spec, kmax, beta, false)?;
        let tail_term = cv.values.last().unwrap().clone() * &env;
        let mut acc = ctx.zero();
        let mut st = PochState::start(ctx, &u);
        for (k, b) in cv.values.iter().enumerate() {
            if k > n as usize {
                acc += b.clone() * &st.plus;
            }
            st.advance();
        }
        let scale = acc
            .clone()
            .abs()
            .max(&remainder_at_zero(ctx, spec, n, beta)?.abs())
            .max(&ctx.f(1e-60));
        if tail_term <= cutoff.clone() * &scale {
            return Ok(acc);
        }
        if kmax > n + 20_000 {
            return Err(Error::Quadrature {
                achieved: (tail_term / scale).to_f64(),
                requested: cutoff.to_f64(),
            });
        }
        kmax = n + (kmax - n) * 2;
    }
}

/// Uniform bound for |R_n(t)| on |Im t| <= m_im:
/// `env * sum_{k>n} b_k(beta) k^{m_im/beta}` (the Hurwitz–Lerch form of
/// Eq-type tail bounds, summed termwise).
pub fn remainder_bound(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n: u32,
    beta: &Float,
    u_eval: &Float,
    m_im: &Float,
) -> Result<Float> {
    let env = tail_envelope(ctx, u_eval);
    if m_im.is_zero() {
        // sum_{k>n} b_k = R_n(0) exactly (P_k^+(0) = 1)
        return Ok(remainder_at_zero(ctx, spec, n, beta)? * env);
    }
    let sigma = m_im.clone() / beta;
    let cutoff: Float = ctx.f(10).pow(-35);
    let mut kmax = n + 256;
    loop {
        let cv = coeff_vector(ctx, spec, kmax, beta, false)?;
        let mut acc = ctx.zero();
        for (k, b) in cv.values.iter().enumerate().skip(n as usize + 1) {
            acc += b.clone() * ctx.f(k as u32).pow(&sigma);
        }
        let last = cv.values.last().unwrap().clone() * ctx.f(kmax).pow(&sigma);
        if last <= cutoff.clone() * &acc {
            return Ok(acc * env);
        }
        if kmax > n + 40_000 {
            return Err(Error::Quadrature {
                achieved: (last / acc).to_f64(),
                requested: cutoff.to_f64(),
            });
        }
        kmax = n + (kmax - n) * 2;
    }
}

/// Envelope max_k |P_k^+(u)| ~ 1.1 / r(u) used in tail bounds.
pub fn tail_envelope(ctx: Ctx, u: &Float) -> Float {
    let r = gamma_abs_one_minus_iu(ctx, &u.clone().abs());
    (ctx.one() / r).max(&ctx.one()) * ctx.f(1.1)
}

/// Hurwitz–Lerch transcendent Phi(z, s, a) = sum_k z^k / (k+a)^s for
/// 0 <= z < 1, by direct summation with a relative cutoff of 1e-35.
pub fn hurwitz_lerch_phi(ctx: Ctx, z: &Float, s: &Float, a: &Float) -> Result<Float> {
    if z.clone().abs() >= 1u32 {
        return Err(Error::Domain("hurwitz_lerch_phi needs |z| < 1".into()));
    }
    let cutoff: Float = ctx.f(10).pow(-35);
    let mut acc = ctx.zero();
    let mut zk = ctx.one();
    let mut k = 0u64;
    loop {
        let term = zk.clone() * (a.clone() + ctx.f(k)).pow(&-s.clone());
        acc += &term;
        if term.clone().abs() < cutoff.clone() * acc.clone().abs() && k > 4 {
            return Ok(acc);
        }
        if k > 50_000_000 {
            return Err(Error::Quadrature {
                achieved: (term / acc).abs().to_f64(),
                requested: cutoff.to_f64(),
            });
        }
        zk *= z;
        k += 1;
    }
}
