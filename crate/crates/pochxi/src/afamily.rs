//! The admissible A_I(x) weight family and reference Xi(t) evaluators.
//!
//! A member is admissible when A_I is non-negative on [1, inf), positive and
//! continuous at x = 1, and decays exponentially (like exp(-a x^b)) or has
//! compact support. Xi(t) is the cosine transform
//! `Xi(t) = 4 \int_0^inf A_I(e^{2y}) cos(t y) dy`; the compact-support
//! members (step, linear, cosine) carry closed forms, everything else goes
//! through adaptive quadrature with an explicit tail cut.
//!
//! The dirichlet5 family is the engineered counterexample: its A_I takes
//! negative values for moderate x and its Xi has no real zeros, so the
//! non-negativity checks exempt it.

use crate::quad::{gl_rule, integrate, GlRule};
use crate::real::{Cplx, Ctx};
use crate::{Error, Result};
use rug::ops::Pow;
use rug::Float;
use std::rc::Rc;

/// Weight-function variant with its parameters.
#[derive(Clone, Debug)]
pub enum Variant {
    /// Elliptic-theta weight of the Riemann xi-function; `theta_terms`
    /// optionally caps the series length.
    Riemann { theta_terms: Option<u32> },
    /// A_I(x) = exp(-a (x + 1/x)); Xi(t) = 2 K_{it/2}(2a).
    Bessel { a: Float },
    /// A_I(x) = exp(-a x); Xi is a symmetrized incomplete gamma function.
    IncGamma { a: Float },
    /// A_I = 1 on [1, e^{2w}]; Xi(t) = 4 sin(wt)/t.
    Step { w: Float },
    /// A_I(x) = 1 - log(x)/(2w) on [1, e^{2w}]; Xi(t) = 8 sin^2(wt/2)/(w t^2).
    Linear { w: Float },
    /// A_I(x) = cos(log(x) pi/(4w)) on [1, e^{2w}].
    Cosine { w: Float },
    /// Ramanujan-tau-related family, exponential order 1/2; k a positive
    /// integer excluding {1,2,3,4,6,8,12,24}.
    Tau { k: u32 },
    /// Quadratic-character mod-5 family of exponential order 2, k >= 4;
    /// the no-real-zeros counterexample.
    Dirichlet5 { k: u32 },
    /// Bessel-type approximation to the Riemann weight:
    /// A_I = 2 pi^2 sum_j j^4 (x+1/x)^{9/4} exp(-pi j^2 (x+1/x)).
    RiemannBesselApprox { terms: u32 },
    /// Power transform of another member: A_I(x) = inner(x^{1/w}).
    Power { inner: Box<AFunctionSpec>, w: Float },
}

/// A member of the A(x)/A_I(x) family: evaluator plus metadata.
#[derive(Clone, Debug)]
pub struct AFunctionSpec {
    pub variant: Variant,
}

fn require_positive(name: &str, v: &Float) -> Result<()> {
    if v.is_sign_positive() && !v.is_zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

const TAU_EXCLUDED: &[u32] = &[1, 2, 3, 4, 6, 8, 12, 24];

impl AFunctionSpec {
    pub fn riemann() -> Self {
        AFunctionSpec {
            variant: Variant::Riemann { theta_terms: None },
        }
    }

    pub fn bessel(a: Float) -> Result<Self> {
        require_positive("a", &a)?;
        Ok(AFunctionSpec {
            variant: Variant::Bessel { a },
        })
    }

    pub fn incgamma(a: Float) -> Result<Self> {
        require_positive("a", &a)?;
        Ok(AFunctionSpec {
            variant: Variant::IncGamma { a },
        })
    }

    pub fn step(w: Float) -> Result<Self> {
        require_positive("w", &w)?;
        Ok(AFunctionSpec {
            variant: Variant::Step { w },
        })
    }

    pub fn linear(w: Float) -> Result<Self> {
        require_positive("w", &w)?;
        Ok(AFunctionSpec {
            variant: Variant::Linear { w },
        })
    }

    pub fn cosine(w: Float) -> Result<Self> {
        require_positive("w", &w)?;
        Ok(AFunctionSpec {
            variant: Variant::Cosine { w },
        })
    }

    pub fn tau(k: u32) -> Result<Self> {
        if k == 0 || TAU_EXCLUDED.contains(&k) {
            return Err(Error::Domain(format!(
                "tau requires a positive integer k outside {TAU_EXCLUDED:?}, got {k}"
            )));
        }
        Ok(AFunctionSpec {
            variant: Variant::Tau { k },
        })
    }

    pub fn dirichlet5(k: u32) -> Result<Self> {
        if k < 4 {
            return Err(Error::Domain(format!("dirichlet5 requires k >= 4, got {k}")));
        }
        Ok(AFunctionSpec {
            variant: Variant::Dirichlet5 { k },
        })
    }

    pub fn riemann_bessel_approx(terms: u32) -> Result<Self> {
        if terms == 0 {
            return Err(Error::Domain("riemann_bessel_approx needs terms >= 1".into()));
        }
        Ok(AFunctionSpec {
            variant: Variant::RiemannBesselApprox { terms },
        })
    }

    pub fn variant_name(&self) -> &'static str {
        match &self.variant {
            Variant::Riemann { .. } => "riemann",
            Variant::Bessel { .. } => "bessel",
            Variant::IncGamma { .. } => "incgamma",
            Variant::Step { .. } => "step",
            Variant::Linear { .. } => "linear",
            Variant::Cosine { .. } => "cosine",
            Variant::Tau { .. } => "tau",
            Variant::Dirichlet5 { .. } => "dirichlet5",
            Variant::RiemannBesselApprox { .. } => "riemann_bessel_approx",
            Variant::Power { .. } => "power",
        }
    }

    /// Upper support bound in x (None = infinite support).
    pub fn support_upper(&self, ctx: Ctx) -> Option<Float> {
        match &self.variant {
            Variant::Step { w } | Variant::Linear { w } | Variant::Cosine { w } => {
                Some((ctx.f(w) * 2u32).exp())
            }
            Variant::Power { inner, w } => {
                let up = inner.support_upper(ctx)?;
                Some(up.pow(&ctx.f(w)))
            }
            _ => None,
        }
    }

    /// Exponential decay metadata (order b, type a) for A_I ~ exp(-a x^b),
    /// None for compact support.
    pub fn exp_order(&self, ctx: Ctx) -> Option<(Float, Float)> {
        match &self.variant {
            Variant::Riemann { .. } => Some((ctx.one(), ctx.pi())),
            Variant::Bessel { a } | Variant::IncGamma { a } => Some((ctx.one(), ctx.f(a))),
            Variant::Tau { k } => Some((ctx.f(0.5), ctx.pi() * *k / 12u32)),
            Variant::Dirichlet5 { .. } => Some((ctx.f(2), ctx.pi() / 5u32)),
            Variant::RiemannBesselApprox { .. } => Some((ctx.one(), ctx.pi())),
            Variant::Power { inner, w } => {
                let (b, a) = inner.exp_order(ctx)?;
                Some((b / ctx.f(w), a))
            }
            Variant::Step { .. } | Variant::Linear { .. } | Variant::Cosine { .. } => None,
        }
    }

    pub fn has_closed_xi(&self) -> bool {
        matches!(
            self.variant,
            Variant::Step { .. } | Variant::Linear { .. } | Variant::Cosine { .. }
        )
    }

    /// Whether A_I is non-negative on its support (everything except the
    /// engineered dirichlet5 counterexample).
    pub fn nonnegative(&self) -> bool {
        match &self.variant {
            Variant::Dirichlet5 { .. } => false,
            Variant::Power { inner, .. } => inner.nonnegative(),
            _ => true,
        }
    }

    pub fn a_i_at_one(&self, ctx: Ctx) -> Float {
        self.eval_ai(ctx, &ctx.one())
            .expect("A_I(1) must be evaluable")
    }

    /// A_I(x). Defined for x >= 1; the inversion-symmetric members
    /// (riemann, bessel) and power wrappers of them extend to 0 < x < 1.
    pub fn eval_ai(&self, ctx: Ctx, x: &Float) -> Result<Float> {
        if !x.is_finite() || x.is_sign_negative() || x.is_zero() {
            return Err(Error::Domain(format!("A_I needs x > 0, got {x}")));
        }
        let below_one = x.clone() < 1u32;
        if below_one {
            let symmetric = match &self.variant {
                Variant::Riemann { .. } | Variant::Bessel { .. } => true,
                Variant::Power { inner, .. } => matches!(
                    inner.variant,
                    Variant::Riemann { .. } | Variant::Bessel { .. }
                ),
                _ => false,
            };
            if !symmetric {
                return Err(Error::Domain(format!("A_I defined on x >= 1, got {x}")));
            }
        }
        Ok(self.eval_ai_unchecked(ctx, x).0)
    }

    /// dA_I/dx inside the support (one-sided at the edges).
    pub fn eval_ai_deriv(&self, ctx: Ctx, x: &Float) -> Result<Float> {
        self.eval_ai(ctx, x)?;
        Ok(self.eval_ai_unchecked(ctx, x).1)
    }

    /// (A_I(x), A_I'(x)) with no domain checks; 0 beyond compact support.
    pub(crate) fn eval_ai_unchecked(&self, ctx: Ctx, x: &Float) -> (Float, Float) {
        let digits = ctx.decimal_digits() as i32;
        let series_cut: Float = ctx.f(10).pow(-digits - 10);
        match &self.variant {
            Variant::Riemann { theta_terms } => {
                // A_I(x) = sum_n (2 n^4 pi^2 x - 3 n^2 pi) x^{5/4} e^{-n^2 pi x}
                let pi = ctx.pi();
                let x54 = x.clone().pow(&ctx.f(1.25));
                let x14 = x.clone().pow(&ctx.f(0.25));
                let cap = theta_terms.unwrap_or_else(|| {
                    ((40.0 / (core::f64::consts::PI * x.to_f64().max(1e-6)))
                        .sqrt()
                        .ceil() as u32)
                        + 3
                });
                let trunc: Float = ctx.f(10).pow(-40);
                let mut val = ctx.zero();
                let mut der = ctx.zero();
                for n in 1..=cap.max(1) {
                    let n2 = ctx.f(n).square();
                    let n2pi = n2.clone() * &pi;
                    let poly = ctx.f(2) * n2.clone().square() * pi.clone().square() * x
                        - ctx.f(3) * &n2pi;
                    let e = (-(n2pi.clone() * x)).exp();
                    let term = poly.clone() * &x54 * &e;
                    let dpoly = ctx.f(2) * n2.clone().square() * pi.clone().square();
                    let dterm = (dpoly * &x54 + poly.clone() * &x14 * ctx.f(1.25)
                        - n2pi.clone() * poly * &x54)
                        * &e;
                    val += &term;
                    der += &dterm;
                    if term.abs() < trunc.clone() * val.clone().abs() && n > 2 {
                        break;
                    }
                }
                (val, der)
            }
            Variant::Bessel { a } => {
                let a = ctx.f(a);
                let inv = ctx.one() / x;
                let v = (-(a.clone() * (x.clone() + &inv))).exp();
                let d = -(a * (ctx.one() - inv.clone().square())) * &v;
                (v, d)
            }
            Variant::IncGamma { a } => {
                let a = ctx.f(a);
                let v = (-(a.clone() * x)).exp();
                let d = -(a * &v);
                (v, d)
            }
            Variant::Step { w } => {
                let lim = ctx.f(w) * 2u32;
                if x.clone().ln() > lim {
                    (ctx.zero(), ctx.zero())
                } else {
                    (ctx.one(), ctx.zero())
                }
            }
            Variant::Linear { w } => {
                let w = ctx.f(w);
                let lnx = x.clone().ln();
                if lnx.clone() > w.clone() * 2u32 {
                    (ctx.zero(), ctx.zero())
                } else {
                    let v = ctx.one() - lnx / (w.clone() * 2u32);
                    let d = -ctx.one() / (w * 2u32 * x);
                    (v, d)
                }
            }
            Variant::Cosine { w } => {
                let w = ctx.f(w);
                let lnx = x.clone().ln();
                if lnx.clone() > w.clone() * 2u32 {
                    (ctx.zero(), ctx.zero())
                } else {
                    let rate = ctx.pi() / (w * 4u32);
                    let arg = lnx * &rate;
                    let v = arg.clone().cos();
                    let d = -arg.sin() * rate / x;
                    (v, d)
                }
            }
            Variant::Tau { k } => {
                // base(x) = x^{1/8} exp(-pi sqrt(x)/12) prod_n (1 - e^{-2 pi n sqrt(x)}),
                // A_I = base^k; the product is accumulated and logged once,
                // and q/(1-q) collapses to q once q is below half precision
                let pi = ctx.pi();
                let sx = x.clone().sqrt();
                let mut logv = x.clone().ln() / 8u32 - pi.clone() * &sx / 12u32;
                let mut dlog = ctx.one() / (x.clone() * 8u32) - pi.clone() / (sx.clone() * 24u32);
                let q1 = (-(pi.clone() * 2u32 * &sx)).exp();
                let tiny: Float = ctx.f(2).pow(-(ctx.prec as i32) / 2);
                let mut prod = ctx.one();
                let mut dsum = ctx.zero();
                let mut qn = q1.clone();
                let mut n = 1u32;
                loop {
                    let one_m = ctx.one() - &qn;
                    prod *= &one_m;
                    if qn < tiny {
                        dsum += qn.clone() * n;
                    } else {
                        dsum += qn.clone() * n / &one_m;
                    }
                    if qn < series_cut || n > 10_000 {
                        break;
                    }
                    qn *= &q1;
                    n += 1;
                }
                logv += prod.ln();
                dlog += pi.clone() / &sx * &dsum;
                let v = (logv * *k).exp();
                let d = v.clone() * &dlog * *k;
                (v, d)
            }
            Variant::Dirichlet5 { k } => {
                // sum_n [k g(s_n) - chi(n) g(s_n/5)], s_n = pi n^2 x^2,
                // g(s) = (4 s^2 - 6 s) e^{-s}
                let pi = ctx.pi();
                let x2 = x.clone().square();
                let g = |s: &Float| -> (Float, Float) {
                    let e = (-s.clone()).exp();
                    let v = (s.clone().square() * 4u32 - s.clone() * 6u32) * &e;
                    let d = (-(s.clone().square() * 4u32) + s.clone() * 14u32 - 6u32) * &e;
                    (v, d)
                };
                let chi = |n: u32| -> i32 {
                    match n % 5 {
                        1 | 4 => 1,
                        2 | 3 => -1,
                        _ => 0,
                    }
                };
                let mut val = ctx.zero();
                let mut der = ctx.zero();
                let mut scale = ctx.zero();
                let mut n = 1u32;
                loop {
                    let s = pi.clone() * ctx.f(n).square() * &x2;
                    let ds_dx = pi.clone() * ctx.f(n).square() * x * 2u32;
                    let (g1, dg1) = g(&s);
                    let s5 = s.clone() / 5u32;
                    let (g2, dg2) = g(&s5);
                    let c = chi(n);
                    let term = g1.clone() * *k - g2.clone() * c;
                    let dterm = (dg1 * *k - dg2 * c / 5u32) * &ds_dx;
                    val += &term;
                    der += &dterm;
                    scale += term.clone().abs();
                    if (term.abs() < series_cut.clone() * &scale && n > 2) || n > 10_000 {
                        break;
                    }
                    n += 1;
                }
                (val, der)
            }
            Variant::RiemannBesselApprox { terms } => {
                let pi = ctx.pi();
                let s = x.clone() + ctx.one() / x;
                let s94 = s.clone().pow(&ctx.f(2.25));
                let s54 = s.clone().pow(&ctx.f(1.25));
                let ds_dx = ctx.one() - (ctx.one() / x.clone()).square();
                let mut val = ctx.zero();
                let mut der = ctx.zero();
                for j in 1..=*terms {
                    let j2pi = pi.clone() * ctx.f(j).square();
                    let e = (-(j2pi.clone() * &s)).exp();
                    let j4 = ctx.f(j).pow(4u32);
                    let term = j4.clone() * &s94 * &e;
                    let dterm = j4 * (s54.clone() * ctx.f(2.25) - j2pi * &s94) * &e * &ds_dx;
                    val += term;
                    der += dterm;
                }
                let norm = ctx.pi().square() * 2u32;
                (val * &norm, der * &norm)
            }
            Variant::Power { inner, w } => {
                let winv = ctx.one() / ctx.f(w);
                let xw = x.clone().pow(&winv);
                let (v, d) = inner.eval_ai_unchecked(ctx, &xw);
                // d/dx inner(x^{1/w}) = inner'(x^{1/w}) (1/w) x^{1/w - 1}
                let dx = d * &winv * xw / x;
                (v, dx)
            }
        }
    }

    /// A_I(y^{-2/beta}) with the exponent taken in log space; exact 0 when
    /// the argument exceeds the support.
    pub fn eval_ai_of_y(&self, ctx: Ctx, y: &Float, beta: &Float) -> Result<Float> {
        Ok(self.ai_of_y_with_dbeta(ctx, y, beta)?.0)
    }

    /// (A_I(y^{-2/beta}), d/dbeta A_I(y^{-2/beta})) at fixed y.
    pub fn ai_of_y_with_dbeta(&self, ctx: Ctx, y: &Float, beta: &Float) -> Result<(Float, Float)> {
        if !(y.is_sign_positive() && !y.is_zero() && y.clone() <= 1u32) {
            return Err(Error::Domain(format!("need 0 < y <= 1, got {y}")));
        }
        require_positive("beta", beta)?;
        let lnx = -(y.clone().ln() * 2u32) / beta;
        if let Some(up) = self.support_upper(ctx) {
            if lnx > up.ln() {
                return Ok((ctx.zero(), ctx.zero()));
            }
        }
        let x = lnx.clone().exp();
        let (v, dx) = self.eval_ai_unchecked(ctx, &x);
        // dx/dbeta = -x ln(x) / beta
        let dbeta = -(dx * &x * lnx) / beta;
        Ok((v, dbeta))
    }

    /// Flat key-value record for config files and checkpoints. Float
    /// parameters carry the full decimal digit budget, so parsing them back
    /// at the same precision is bit-exact.
    pub fn to_kv(&self, ctx: Ctx) -> Vec<(String, String)> {
        let d = ctx.decimal_digits();
        let fx = |v: &Float| crate::real::fmt_decimal(v, d);
        let mut kv = vec![("variant".to_string(), self.variant_name().to_string())];
        match &self.variant {
            Variant::Riemann { theta_terms } => {
                if let Some(t) = theta_terms {
                    kv.push(("theta_terms".into(), t.to_string()));
                }
            }
            Variant::Bessel { a } | Variant::IncGamma { a } => kv.push(("a".into(), fx(a))),
            Variant::Step { w } | Variant::Linear { w } | Variant::Cosine { w } => {
                kv.push(("w".into(), fx(w)))
            }
            Variant::Tau { k } | Variant::Dirichlet5 { k } => kv.push(("k".into(), k.to_string())),
            Variant::RiemannBesselApprox { terms } => {
                kv.push(("terms".into(), terms.to_string()))
            }
            Variant::Power { inner, w } => {
                kv.push(("power_w".into(), fx(w)));
                for (k, v) in inner.to_kv(ctx) {
                    let key = if k == "variant" { "inner_variant".into() } else { format!("inner_{k}") };
                    kv.push((key, v));
                }
            }
        }
        kv
    }

    /// Parse the record produced by [`to_kv`] (also the run-config format).
    pub fn from_kv(ctx: Ctx, kv: &[(String, String)]) -> Result<AFunctionSpec> {
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let parse_f = |key: &str| -> Result<Float> {
            let s = get(key).ok_or_else(|| Error::Config(format!("missing parameter '{key}'")))?;
            Float::parse(s)
                .map(|i| Float::with_val(ctx.prec, i))
                .map_err(|_| Error::Config(format!("bad float for '{key}': {s}")))
        };
        let parse_u = |key: &str| -> Result<u32> {
            let s = get(key).ok_or_else(|| Error::Config(format!("missing parameter '{key}'")))?;
            s.parse()
                .map_err(|_| Error::Config(format!("bad integer for '{key}': {s}")))
        };
        let name = get("variant").ok_or_else(|| Error::Config("missing 'variant'".into()))?;
        match name {
            "riemann" => Ok(match get("theta_terms") {
                Some(_) => AFunctionSpec {
                    variant: Variant::Riemann {
                        theta_terms: Some(parse_u("theta_terms")?),
                    },
                },
                None => AFunctionSpec::riemann(),
            }),
            "bessel" => AFunctionSpec::bessel(parse_f("a")?),
            "incgamma" => AFunctionSpec::incgamma(parse_f("a")?),
            "step" => AFunctionSpec::step(parse_f("w")?),
            "linear" => AFunctionSpec::linear(parse_f("w")?),
            "cosine" => AFunctionSpec::cosine(parse_f("w")?),
            "tau" => AFunctionSpec::tau(parse_u("k")?),
            "dirichlet5" => AFunctionSpec::dirichlet5(parse_u("k")?),
            "riemann_bessel_approx" => AFunctionSpec::riemann_bessel_approx(parse_u("terms")?),
            "power" => {
                let w = parse_f("power_w")?;
                let inner_kv: Vec<(String, String)> = kv
                    .iter()
                    .filter_map(|(k, v)| {
                        if k == "inner_variant" {
                            Some(("variant".to_string(), v.clone()))
                        } else {
                            k.strip_prefix("inner_").map(|s| (s.to_string(), v.clone()))
                        }
                    })
                    .collect();
                let inner = AFunctionSpec::from_kv(ctx, &inner_kv)?;
                inner.power_transform(ctx, &w)
            }
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }

    /// Power transformation x -> x^{1/w}: the new member's Xi satisfies
    /// Xi_new(t) = w Xi_old(w t).
    pub fn power_transform(&self, ctx: Ctx, w: &Float) -> Result<AFunctionSpec> {
        require_positive("w", w)?;
        if *w == 1u32 {
            return Ok(self.clone());
        }
        let variant = match &self.variant {
            Variant::Step { w: w0 } => Variant::Step { w: ctx.f(w0) * w },
            Variant::Linear { w: w0 } => Variant::Linear { w: ctx.f(w0) * w },
            Variant::Cosine { w: w0 } => Variant::Cosine { w: ctx.f(w0) * w },
            Variant::Power { inner, w: w0 } => Variant::Power {
                inner: inner.clone(),
                w: ctx.f(w0) * w,
            },
            _ => Variant::Power {
                inner: Box::new(self.clone()),
                w: w.clone(),
            },
        };
        Ok(AFunctionSpec { variant })
    }

    /// Integration cut for the y-representation: beyond y_cut the integrand
    /// A_I(e^{2y}) is negligible at the working tolerance.
    pub(crate) fn y_cut(&self, ctx: Ctx) -> Float {
        if let Some(up) = self.support_upper(ctx) {
            return up.ln() / 2u32;
        }
        let (b, a) = self
            .exp_order(ctx)
            .expect("non-compact members carry exponential order");
        let digits = ctx.decimal_digits() as u32;
        // a x^b = (digits + 30) ln 10; the margin covers power prefactors
        let target = ctx.f(digits + 30) * ctx.f(10).ln();
        let x = (target / a).pow(&(ctx.one() / b));
        let y = x.ln() / 2u32;
        y.max(&ctx.one())
    }

    /// Xi(t) for real t: closed form when available, otherwise adaptive
    /// quadrature of the cosine-transform representation with a bounded tail.
    pub fn xi_exact(&self, ctx: Ctx, t: &Float) -> Result<Float> {
        if let Some(v) = self.xi_closed_form(ctx, t) {
            return Ok(v);
        }
        let y_cut = self.y_cut(ctx);
        let tol = ctx.tol();
        let cap = xi_panel_cap(ctx, &t.clone().abs());
        let q = integrate(
            ctx,
            |y| {
                let x = (y.clone() * 2u32).exp();
                let a = self.eval_ai_unchecked(ctx, &x).0;
                a * (t.clone() * y).cos()
            },
            &ctx.zero(),
            &y_cut,
            &tol,
            Some(&cap),
            32,
        )?;
        Ok(q.value * 4u32)
    }

    /// Xi(t) for complex t, |Im t| <= 10 (quadrature validity window).
    pub fn xi_exact_complex(&self, ctx: Ctx, t: &Cplx) -> Result<Cplx> {
        if t.im.clone().abs() > 10u32 {
            return Err(Error::Domain(
                "xi_exact is validated for |Im t| <= 10 only".into(),
            ));
        }
        if t.is_real() {
            let v = self.xi_exact(ctx, &t.re)?;
            return Ok(Cplx::from_real(ctx, v));
        }
        if let Some(v) = self.xi_closed_form_complex(ctx, t) {
            return Ok(v);
        }
        let y_cut = self.y_cut(ctx);
        let tol = ctx.tol();
        let tabs = t.abs();
        let cap = xi_panel_cap(ctx, &tabs);
        let re = integrate(
            ctx,
            |y| {
                let x = (y.clone() * 2u32).exp();
                let a = self.eval_ai_unchecked(ctx, &x).0;
                a * t.mul_real(y).cos().re
            },
            &ctx.zero(),
            &y_cut,
            &tol,
            Some(&cap),
            32,
        )?;
        let im = integrate(
            ctx,
            |y| {
                let x = (y.clone() * 2u32).exp();
                let a = self.eval_ai_unchecked(ctx, &x).0;
                a * t.mul_real(y).cos().im
            },
            &ctx.zero(),
            &y_cut,
            &tol,
            Some(&cap),
            32,
        )?;
        Ok(Cplx::new(re.value * 4u32, im.value * 4u32))
    }

    fn xi_closed_form(&self, ctx: Ctx, t: &Float) -> Option<Float> {
        match &self.variant {
            Variant::Step { w } => {
                let w = ctx.f(w);
                if t.is_zero() {
                    Some(w * 4u32)
                } else {
                    Some((w * t).sin() * 4u32 / t)
                }
            }
            Variant::Linear { w } => {
                // 4 (1 - cos(w t)) / (w t^2) = 8 sin^2(wt/2) / (w t^2)
                let w = ctx.f(w);
                if t.is_zero() {
                    Some(w * 2u32)
                } else {
                    let s = (w.clone() * t / 2u32).sin().square();
                    Some(s * 8u32 / (w * t.clone().square()))
                }
            }
            Variant::Cosine { w } => {
                // 4 a cos(w t) / (a^2 - t^2), a = pi/(2w); removable at |t| = a
                let w = ctx.f(w);
                let a = ctx.pi() / (w.clone() * 2u32);
                let den = a.clone().square() - t.clone().square();
                if den.is_zero() {
                    return Some(w * 2u32);
                }
                Some(a * (w * t).cos() * 4u32 / den)
            }
            _ => None,
        }
    }

    fn xi_closed_form_complex(&self, ctx: Ctx, t: &Cplx) -> Option<Cplx> {
        match &self.variant {
            Variant::Step { w } => {
                let w = ctx.f(w);
                let wt = t.mul_real(&w);
                // sin z = cos(z - pi/2)
                let half_pi = ctx.pi() / 2u32;
                let shifted = Cplx::new(wt.re.clone() - &half_pi, wt.im.clone());
                Some(shifted.cos().div(t).mul_real(&ctx.f(4)))
            }
            Variant::Linear { w } => {
                let w = ctx.f(w);
                let one = Cplx::from_real(ctx, ctx.one());
                let num = one.sub(&t.mul_real(&w).cos()).mul_real(&ctx.f(4));
                let den = t.mul(t).mul_real(&w);
                Some(num.div(&den))
            }
            Variant::Cosine { w } => {
                let w = ctx.f(w);
                let a = ctx.pi() / (w.clone() * 2u32);
                let a2 = Cplx::from_real(ctx, a.clone().square());
                let den = a2.sub(&t.mul(t));
                let num = t.mul_real(&w).cos().mul_real(&(a * 4u32));
                Some(num.div(&den))
            }
            _ => None,
        }
    }
}

/// Asymptotic large-t form associated with a member, as a handle into the
/// asymptotics toolbox.
#[derive(Clone, Debug)]
pub enum AsymptoticForm {
    /// Oscillatory Bessel-member form with type a.
    Bessel { a: Float },
    /// Quadratic-decay incomplete-gamma form with type a.
    IncGamma { a: Float },
    /// The Riemann-Bessel approximation form.
    RiemannBessel,
}

impl AsymptoticForm {
    pub fn eval(&self, ctx: Ctx, t: &Float) -> Float {
        match self {
            AsymptoticForm::Bessel { a } => crate::asymptotics::bessel_xi_asymptotic(ctx, a, t),
            AsymptoticForm::IncGamma { a } => crate::asymptotics::incgamma_asymptotic(ctx, a, t),
            AsymptoticForm::RiemannBessel => crate::asymptotics::riemann_bessel_asymptotic(ctx, t),
        }
    }
}

/// A member bundled with reference data: known zeros and the asymptotic
/// form where one applies.
#[derive(Clone, Debug)]
pub struct XiReference {
    pub spec: AFunctionSpec,
    pub known_zeros: Option<Vec<Float>>,
    pub asymptotic_form: Option<AsymptoticForm>,
}

impl XiReference {
    pub fn new(
        ctx: Ctx,
        spec: AFunctionSpec,
        known_zeros: Option<Vec<Float>>,
    ) -> Result<XiReference> {
        if let Some(zs) = &known_zeros {
            for w in zs.windows(2) {
                if !(w[0] < w[1]) {
                    return Err(Error::Domain(
                        "known_zeros must be strictly increasing".into(),
                    ));
                }
            }
            if zs.iter().any(|z| !z.is_sign_positive()) {
                return Err(Error::Domain("known_zeros must be positive".into()));
            }
        }
        let asymptotic_form = match &spec.variant {
            Variant::Bessel { a } => Some(AsymptoticForm::Bessel { a: ctx.f(a) }),
            Variant::IncGamma { a } => Some(AsymptoticForm::IncGamma { a: ctx.f(a) }),
            Variant::RiemannBesselApprox { .. } => Some(AsymptoticForm::RiemannBessel),
            _ => None,
        };
        Ok(XiReference {
            spec,
            known_zeros,
            asymptotic_form,
        })
    }
}

/// Panel-width cap for the oscillatory cosine transform.
fn xi_panel_cap(ctx: Ctx, t_abs: &Float) -> Float {
    let two_pi = ctx.pi() * 2u32;
    let t1 = t_abs.clone().max(&ctx.one());
    (two_pi / t1).min(&ctx.one()) / 4u32
}

/// Shared-node Xi evaluator for scanning many t against one member: the
/// A_I(e^{2y}) factor is sampled once on a fixed panel set sized for
/// `t_max`, after which each Xi(t) costs only cosines.
pub struct XiScanner {
    nodes: Vec<(Float, Float)>, // (y_i, 4 w_i A_I(e^{2 y_i}))
}

impl XiScanner {
    pub fn build(ctx: Ctx, spec: &AFunctionSpec, t_max: f64) -> Result<Self> {
        let y_cut = spec.y_cut(ctx);
        let cap = xi_panel_cap(ctx, &ctx.f(t_max.abs()));
        let n_panels = ((y_cut.to_f64() / cap.to_f64()).ceil() as usize).max(1) * 2;
        let rule: Rc<GlRule> = gl_rule(ctx, 32);
        let mut nodes = Vec::with_capacity(32 * n_panels);
        for i in 0..n_panels {
            let a = y_cut.clone() * ctx.f(i as u32) / ctx.f(n_panels as u32);
            let b = y_cut.clone() * ctx.f(i as u32 + 1) / ctx.f(n_panels as u32);
            let half = (b.clone() - &a) / 2u32;
            let mid = (a + &b) / 2u32;
            for (xn, wn) in rule.nodes.iter().zip(&rule.weights) {
                let y = mid.clone() + Float::with_val(ctx.prec, xn * &half);
                let x = (y.clone() * 2u32).exp();
                let a_val = spec.eval_ai_unchecked(ctx, &x).0;
                nodes.push((y, a_val * wn * &half * 4u32));
            }
        }
        Ok(XiScanner { nodes })
    }

    pub fn xi(&self, t: &Float) -> Float {
        let mut acc = Float::new(t.prec());
        for (y, wa) in &self.nodes {
            acc += (t.clone() * y).cos() * wa;
        }
        acc
    }

    /// Sign changes of Xi on a uniform grid over (lo, hi].
    pub fn count_sign_changes(&self, ctx: Ctx, lo: f64, hi: f64, steps: usize) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for i in 0..=steps {
            let t = ctx.f(lo + (hi - lo) * i as f64 / steps as f64);
            let v = self.xi(&t);
            if v.is_zero() {
                continue;
            }
            let s = v.is_sign_positive();
            if let Some(prev) = last {
                if prev != s {
                    count += 1;
                }
            }
            last = Some(s);
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::default()
    }

    fn tol(c: Ctx, e: i32) -> Float {
        c.f(10).pow(e)
    }

    #[test]
    fn step_ai_support() {
        let c = ctx();
        let s = AFunctionSpec::step(c.one()).unwrap();
        assert_eq!(s.eval_ai(c, &c.f(2)).unwrap(), 1);
        let beyond = c.e().square() * ctx().f(1.01);
        assert_eq!(s.eval_ai(c, &beyond).unwrap(), 0);
        assert!(s.eval_ai(c, &c.f(0.5)).is_err());
    }

    #[test]
    fn bessel_ai_at_one() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let v = s.eval_ai(c, &c.one()).unwrap();
        assert!((v - c.f(-2).exp()).abs() < tol(c, -70));
    }

    #[test]
    fn riemann_ai_matches_long_theta_oracle() {
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let v = s.eval_ai(c, &c.one()).unwrap();
        let long = AFunctionSpec {
            variant: Variant::Riemann {
                theta_terms: Some(2000),
            },
        };
        let vo = long.eval_ai(c, &c.one()).unwrap();
        assert!(v.is_sign_positive());
        let rel = (v.clone() - &vo).abs() / vo;
        assert!(rel < tol(c, -30));
    }

    #[test]
    fn riemann_inversion_symmetry() {
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let a1 = s.a_i_at_one(c);
        for x in ["1.3", "1.9", "2.0"] {
            let xv = c.parse(x);
            let v1 = s.eval_ai(c, &xv).unwrap();
            let v2 = s.eval_ai(c, &(c.one() / &xv)).unwrap();
            assert!((v1 - v2).abs() <= a1.clone() * tol(c, -30), "x={x}");
        }
    }

    #[test]
    fn bessel_inversion_symmetry() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.parse("0.75")).unwrap();
        let a1 = s.a_i_at_one(c);
        let xv = c.parse("1.7");
        let v1 = s.eval_ai(c, &xv).unwrap();
        let v2 = s.eval_ai(c, &(c.one() / &xv)).unwrap();
        assert!((v1 - v2).abs() <= a1 * tol(c, -30));
    }

    #[test]
    fn ai_of_y_values() {
        let c = ctx();
        // step boundary: zero just below e^{-w beta}, one just above
        let s = AFunctionSpec::step(c.one()).unwrap();
        let beta = c.parse("0.7");
        let yb = (-(beta.clone())).exp();
        let lo = yb.clone() * c.parse("0.999");
        let hi = yb.clone() * c.parse("1.001");
        assert_eq!(s.eval_ai_of_y(c, &lo, &beta).unwrap(), 0);
        assert_eq!(s.eval_ai_of_y(c, &hi, &beta).unwrap(), 1);

        // y = 1 gives A_I(1) for any member
        let r = AFunctionSpec::riemann();
        let v = r.eval_ai_of_y(c, &c.one(), &beta).unwrap();
        assert!((v - r.a_i_at_one(c)).abs() < tol(c, -40));

        // incgamma(0.01), y = 0.5, beta = 2: x = 0.5^{-1} = 2, so exp(-0.02)
        let g = AFunctionSpec::incgamma(c.parse("0.01")).unwrap();
        let v = g.eval_ai_of_y(c, &c.f(0.5), &c.f(2)).unwrap();
        let expect = c.parse("-0.02").exp();
        assert!((v - expect).abs() < tol(c, -70));
    }

    #[test]
    fn ai_dbeta_matches_finite_difference() {
        let c = ctx();
        for spec in [
            AFunctionSpec::riemann(),
            AFunctionSpec::bessel(c.one()).unwrap(),
            AFunctionSpec::tau(5).unwrap(),
            AFunctionSpec::dirichlet5(5).unwrap(),
            AFunctionSpec::riemann_bessel_approx(4).unwrap(),
        ] {
            let y = c.parse("0.37");
            let beta = c.parse("2.1");
            let h: Float = c.f(10).pow(-20);
            let (_, d) = spec.ai_of_y_with_dbeta(c, &y, &beta).unwrap();
            let vp = spec.eval_ai_of_y(c, &y, &(beta.clone() + &h)).unwrap();
            let vm = spec.eval_ai_of_y(c, &y, &(beta.clone() - &h)).unwrap();
            let fd = (vp - vm) / (h * 2u32);
            let rel = (fd - &d).abs() / d.clone().abs();
            assert!(rel < tol(c, -12), "{} rel={rel}", spec.variant_name());
        }
    }

    #[test]
    fn xi_step_closed_form_zero_at_pi() {
        let c = ctx();
        let s = AFunctionSpec::step(c.one()).unwrap();
        let v = s.xi_exact(c, &c.pi()).unwrap();
        assert!(v.abs() < tol(c, -25));
        // quadrature route agrees with the closed form
        let t = c.parse("1.7");
        let closed = s.xi_exact(c, &t).unwrap();
        let y_cut = s.y_cut(c);
        let q = integrate(
            c,
            |y| {
                let x = (y.clone() * 2u32).exp();
                s.eval_ai_unchecked(c, &x).0 * (t.clone() * y).cos()
            },
            &c.zero(),
            &y_cut,
            &c.tol(),
            Some(&c.f(0.25)),
            32,
        )
        .unwrap();
        assert!((q.value * 4u32 - closed).abs() < tol(c, -28));
    }

    #[test]
    fn xi_linear_double_zero_at_two_pi() {
        let c = ctx();
        let s = AFunctionSpec::linear(c.one()).unwrap();
        let t = c.pi() * 2u32;
        let v = s.xi_exact(c, &t).unwrap();
        assert!(v.abs() < tol(c, -70));
        // double zero: nonnegative on both sides
        let eps = c.parse("1e-6");
        let vm = s.xi_exact(c, &(t.clone() - &eps)).unwrap();
        let vp = s.xi_exact(c, &(t.clone() + &eps)).unwrap();
        assert!(vm.is_sign_positive() && vp.is_sign_positive());
    }

    #[test]
    fn xi_cosine_removable_singularity() {
        let c = ctx();
        let s = AFunctionSpec::cosine(c.one()).unwrap();
        let half_pi = c.pi() / 2u32;
        let v = s.xi_exact(c, &half_pi).unwrap();
        assert!((v - 2u32).abs() < tol(c, -60));
        let near = half_pi + tol(c, -20);
        let vn = s.xi_exact(c, &near).unwrap();
        assert!((vn - 2u32).abs() < tol(c, -18));
    }

    #[test]
    fn xi_riemann_value_at_zero() {
        // Xi(0) = xi(1/2) = 0.4971207781883141...
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let v = s.xi_exact(c, &c.zero()).unwrap();
        let reference = c.parse("0.4971207781883141099127737396853977198073");
        assert!((v.clone() - &reference).abs() < tol(c, -25), "Xi(0) = {v}");
    }

    #[test]
    fn xi_riemann_first_zero_bracket() {
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let a = s.xi_exact(c, &c.f(14)).unwrap();
        let b = s.xi_exact(c, &c.parse("14.2")).unwrap();
        assert!(a.is_sign_positive() != b.is_sign_positive());
    }

    #[test]
    fn xi_even_in_t() {
        let c = ctx();
        for spec in [
            AFunctionSpec::riemann(),
            AFunctionSpec::bessel(c.one()).unwrap(),
            AFunctionSpec::incgamma(c.f(0.5)).unwrap(),
            AFunctionSpec::tau(5).unwrap(),
            AFunctionSpec::dirichlet5(5).unwrap(),
        ] {
            let t = c.parse("3.7");
            let vp = spec.xi_exact(c, &t).unwrap();
            let vm = spec.xi_exact(c, &(-t)).unwrap();
            assert!(
                (vp.clone() - &vm).abs() <= vp.abs() * tol(c, -30),
                "{}",
                spec.variant_name()
            );
        }
    }

    #[test]
    fn power_transform_step_scaling() {
        let c = ctx();
        let s = AFunctionSpec::step(c.one()).unwrap();
        let s2 = s.power_transform(c, &c.f(2)).unwrap();
        // Xi_new(t) = 2 Xi_old(2t) = 2 * 4 sin(2t)/(2t)
        let t = c.parse("0.9");
        let got = s2.xi_exact(c, &t).unwrap();
        let want = s.xi_exact(c, &(t.clone() * 2u32)).unwrap() * 2u32;
        assert!((got - want).abs() < tol(c, -70));
    }

    #[test]
    fn power_transform_identity() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let s1 = s.power_transform(c, &c.one()).unwrap();
        assert_eq!(s1.variant_name(), "bessel");
    }

    #[test]
    fn power_transform_bessel_scaling_by_quadrature() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let w = c.f(3);
        let sw = s.power_transform(c, &w).unwrap();
        let t = c.parse("0.7");
        let got = sw.xi_exact(c, &t).unwrap();
        let want = s.xi_exact(c, &(t.clone() * &w)).unwrap() * &w;
        assert!(
            (got.clone() - &want).abs() <= want.clone().abs() * tol(c, -20),
            "got {got} want {want}"
        );
    }

    #[test]
    fn xi_complex_is_even() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let t = Cplx::new(c.parse("2.2"), c.parse("0.4"));
        let v = s.xi_exact_complex(c, &t).unwrap();
        let tneg = t.neg();
        let vn = s.xi_exact_complex(c, &tneg).unwrap();
        assert!((v.re.clone() - &vn.re).abs() < tol(c, -25));
        assert!((v.im.clone() - &vn.im).abs() < tol(c, -25));
    }

    #[test]
    fn scanner_matches_direct_quadrature() {
        let c = Ctx::new(128);
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let scan = XiScanner::build(c, &s, 12.0).unwrap();
        for t in ["0.0", "3.3", "8.0", "11.5"] {
            let tv = c.parse(t);
            let direct = s.xi_exact(c, &tv).unwrap();
            let fast = scan.xi(&tv);
            assert!(
                (direct.clone() - &fast).abs() < tol(c, -20),
                "t={t}: {direct} vs {fast}"
            );
        }
    }

    #[test]
    fn dirichlet5_takes_negative_values() {
        let c = ctx();
        let s = AFunctionSpec::dirichlet5(5).unwrap();
        assert!(s.a_i_at_one(c).is_sign_positive());
        let v = s.eval_ai(c, &c.f(2)).unwrap();
        assert!(v.is_sign_negative());
        assert!(!s.nonnegative());
    }

    #[test]
    fn parameter_validation() {
        let c = ctx();
        assert!(AFunctionSpec::bessel(c.f(-1)).is_err());
        assert!(AFunctionSpec::tau(24).is_err());
        assert!(AFunctionSpec::tau(5).is_ok());
        assert!(AFunctionSpec::dirichlet5(3).is_err());
    }
}
