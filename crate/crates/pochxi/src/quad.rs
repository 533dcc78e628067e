//! Gauss–Legendre nodes at working precision and an adaptive panel
//! integrator with interval bisection.
//!
//! Nodes are found by Newton iteration on the Legendre recurrence from
//! Chebyshev seeds and cached per (order, precision) per thread. The
//! adaptive driver compares a panel's rule value against the sum over its
//! halves and bisects until the discrepancy is below the requested share of
//! the running L1 scale; a hard cap on panel width keeps oscillatory
//! integrands resolved.

use crate::real::Ctx;
use crate::{Error, Result};
use rug::ops::Pow;
use rug::Float;
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

/// One Gauss–Legendre rule on [-1, 1].
pub struct GlRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

fn legendre_with_deriv(ctx: Ctx, m: u32, x: &Float) -> (Float, Float) {
    let mut p_prev = ctx.one();
    let mut p = x.clone();
    for j in 1..m {
        // (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
        let next = (x.clone() * &p * (2 * j + 1) - p_prev.clone() * j) / (j + 1);
        p_prev = p;
        p = next;
    }
    // P'_m = m (x P_m - P_{m-1}) / (x^2 - 1)
    let dp = (x.clone() * &p - &p_prev) * m / (x.clone().square() - 1u32);
    (p, dp)
}

fn compute_gl(ctx: Ctx, m: u32) -> GlRule {
    let mut nodes = Vec::with_capacity(m as usize);
    let mut weights = Vec::with_capacity(m as usize);
    let pi = ctx.pi();
    for i in 1..=m {
        // Chebyshev seed, then Newton
        let seed = (pi.clone() * ctx.f(i as f64 - 0.25) / ctx.f(m as f64 + 0.5)).cos();
        let mut x = seed;
        for _ in 0..200 {
            let (p, dp) = legendre_with_deriv(ctx, m, &x);
            let step = p / dp;
            x -= &step;
            if step.abs() < ctx.f(2).pow(-(ctx.prec as i32) + 2) {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(ctx, m, &x);
        let w = ctx.f(2) / ((ctx.one() - x.clone().square()) * dp.square());
        nodes.push(x);
        weights.push(w);
    }
    GlRule { nodes, weights }
}

thread_local! {
    static GL_CACHE: RefCell<HashMap<(u32, u32), Rc<GlRule>>> = RefCell::new(HashMap::new());
}

/// Cached Gauss–Legendre rule of order `m` at the context precision.
pub fn gl_rule(ctx: Ctx, m: u32) -> Rc<GlRule> {
    GL_CACHE.with(|c| {
        c.borrow_mut()
            .entry((m, ctx.prec))
            .or_insert_with(|| Rc::new(compute_gl(ctx, m)))
            .clone()
    })
}

/// Apply a rule to `f` on [a, b].
pub fn gl_apply<F: FnMut(&Float) -> Float>(rule: &GlRule, a: &Float, b: &Float, f: &mut F) -> Float {
    let prec = a.prec();
    let half = Float::with_val(prec, b - a) / 2u32;
    let mid = Float::with_val(prec, a + b) / 2u32;
    let mut acc = Float::new(prec);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let point = mid.clone() + Float::with_val(prec, x * &half);
        acc += f(&point) * w;
    }
    acc * &half
}

/// Adaptive integration result.
pub struct Quadrature {
    pub value: Float,
    /// Estimated absolute error.
    pub err: Float,
    /// Accumulated L1 mass, the scale against which `err` is relative.
    pub l1: Float,
}

/// Integrate `f` over [a, b] to relative tolerance `rel_tol` (relative to
/// the L1 mass), bisecting panels adaptively.
///
/// `max_width` caps the initial panel width (oscillation control); the
/// evaluation budget caps runaway refinement and reports the achieved
/// tolerance on failure.
pub fn integrate<F: FnMut(&Float) -> Float>(
    ctx: Ctx,
    mut f: F,
    a: &Float,
    b: &Float,
    rel_tol: &Float,
    max_width: Option<&Float>,
    order: u32,
) -> Result<Quadrature> {
    let rule = gl_rule(ctx, order);
    let width = Float::with_val(ctx.prec, b - a);
    if width.is_zero() {
        return Ok(Quadrature {
            value: ctx.zero(),
            err: ctx.zero(),
            l1: ctx.zero(),
        });
    }

    // initial panels, honoring the width cap
    let n_init = match max_width {
        Some(mw) => {
            let n = (width.clone() / mw).ceil().to_f64();
            (n as usize).clamp(1, 100_000)
        }
        None => 1,
    };
    struct Panel {
        a: Float,
        b: Float,
        value: Float,
        depth: u32,
    }
    let mut pending: Vec<Panel> = Vec::new();
    for i in 0..n_init {
        let pa = a.clone() + width.clone() * ctx.f(i as u32) / ctx.f(n_init as u32);
        let pb = a.clone() + width.clone() * ctx.f(i as u32 + 1) / ctx.f(n_init as u32);
        let v = gl_apply(&rule, &pa, &pb, &mut f);
        pending.push(Panel {
            a: pa,
            b: pb,
            value: v,
            depth: 0,
        });
    }

    let mut value = ctx.zero();
    let mut err = ctx.zero();
    let mut l1 = ctx.zero();
    // first-pass scale for the acceptance test; updated as panels settle
    let mut scale = ctx.zero();
    for p in &pending {
        scale += p.value.clone().abs();
    }
    if scale.is_zero() {
        scale = ctx.one();
    }
    let max_evals: usize = 3_000;
    let mut evals = n_init;

    while let Some(p) = pending.pop() {
        if evals > max_evals {
            let achieved = if scale.is_zero() {
                f64::INFINITY
            } else {
                (err.clone() / &scale).to_f64()
            };
            return Err(Error::Quadrature {
                achieved,
                requested: rel_tol.to_f64(),
            });
        }
        let mid = (p.a.clone() + &p.b) / 2u32;
        let left = gl_apply(&rule, &p.a, &mid, &mut f);
        let right = gl_apply(&rule, &mid, &p.b, &mut f);
        evals += 2;
        let refined = left.clone() + &right;
        let delta = (p.value.clone() - &refined).abs();
        let local_scale = scale.clone().max(&l1);
        if delta <= rel_tol.clone() * &local_scale || p.depth >= 60 {
            value += &refined;
            err += delta;
            l1 += refined.abs();
        } else {
            pending.push(Panel {
                a: p.a,
                b: mid.clone(),
                value: left,
                depth: p.depth + 1,
            });
            pending.push(Panel {
                a: mid,
                b: p.b,
                value: right,
                depth: p.depth + 1,
            });
        }
    }
    Ok(Quadrature { value, err, l1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::default()
    }

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        let c = ctx();
        let rule = gl_rule(c, 16);
        // integral of x^10 over [-1,1] = 2/11
        let v = gl_apply(&rule, &c.f(-1), &c.one(), &mut |x: &Float| {
            x.clone().pow(10u32)
        });
        let expect = c.f(2) / c.f(11);
        assert!((v - expect).abs() < c.f(10).pow(-70));
    }

    #[test]
    fn adaptive_exp_integral() {
        let c = ctx();
        let tol = c.f(10).pow(-35);
        let q = integrate(c, |x| x.clone().exp(), &c.zero(), &c.one(), &tol, None, 32).unwrap();
        let expect = c.e() - 1u32;
        assert!((q.value - expect).abs() < c.f(10).pow(-33));
    }

    #[test]
    fn adaptive_oscillatory_integral() {
        let c = ctx();
        // integral_0^20 cos(40 x) dx = sin(800)/40
        let tol = c.f(10).pow(-30);
        let cap = c.f(0.15);
        let q = integrate(
            c,
            |x| (x.clone() * 40u32).cos(),
            &c.zero(),
            &c.f(20),
            &tol,
            Some(&cap),
            32,
        )
        .unwrap();
        let expect = c.f(800).sin() / 40u32;
        assert!((q.value - expect).abs() < c.f(10).pow(-25));
    }

    #[test]
    fn adaptive_peaked_integral() {
        let c = ctx();
        // integral_0^1 x^200 * 201 dx = 1, mass near x=1
        let tol = c.f(10).pow(-30);
        let q = integrate(
            c,
            |x| x.clone().pow(200u32) * 201u32,
            &c.zero(),
            &c.one(),
            &tol,
            None,
            32,
        )
        .unwrap();
        assert!((q.value - 1u32).abs() < c.f(10).pow(-25));
    }
}
