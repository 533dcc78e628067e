//! Assembly and evaluation of the polynomial approximants Xi_n(t, beta).
//!
//! Two evaluation routes exist on purpose. The dense route accumulates the
//! exact rational Pochhammer coefficient triangle against the b_k vector at
//! doubled precision into a polynomial in u = t^2 (the alternating
//! coefficients nearly cancel near the top root, which makes this the
//! precision-critical step), then evaluates by Horner. The recursion route
//! sums b_k P_k^+(t/beta) term by term with the forward recursion and also
//! yields every derivative the double-root tracker needs in one O(n) pass.

use crate::afamily::AFunctionSpec;
use crate::coefficients::{coeff_vector, CoeffVector};
use crate::pochhammer::{with_table, EvenPolynomial, Parity, PochState};
use crate::real::{Cplx, Ctx};
use crate::{Error, Result};
use rug::Float;

/// Dense approximant for one (member, n, beta).
#[derive(Clone, Debug)]
pub struct XiApproximant {
    pub spec: AFunctionSpec,
    pub n: u32,
    pub beta: Float,
    pub coeffs: CoeffVector,
    pub poly_u: EvenPolynomial,
}

/// Value and derivative bundle from the recursion route, everything the
/// double-root conditions consume.
#[derive(Clone, Debug)]
pub struct SumEval {
    /// Xi_n(t, beta)
    pub xi: Float,
    /// d/dt
    pub dt: Float,
    /// d^2/dt^2
    pub dtt: Float,
    /// d/dbeta (needs derivative-enabled coefficients)
    pub dbeta: Option<Float>,
    /// d^2/(dt dbeta)
    pub dbeta_dt: Option<Float>,
}

/// Minimum meaningful order: below n = 4 the root structure is degenerate.
pub const N_MIN: u32 = 4;

/// Build the approximant: coefficients via quadrature (closed forms where
/// available), dense u-polynomial from the exact coefficient triangle.
pub fn build(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n: u32,
    beta: &Float,
    with_derivs: bool,
) -> Result<XiApproximant> {
    if n < N_MIN {
        return Err(Error::Domain(format!("approximant needs n >= {N_MIN}, got {n}")));
    }
    let coeffs = coeff_vector(ctx, spec, n, beta, with_derivs)?;
    let poly_u = assemble_poly(ctx, &coeffs.values, beta);
    let approx = XiApproximant {
        spec: spec.clone(),
        n,
        beta: beta.clone(),
        coeffs,
        poly_u,
    };
    approx.check_invariants(ctx)?;
    Ok(approx)
}

/// Accumulate sum_k b_k P_k^+(t/beta) as a dense polynomial in u = t^2,
/// at doubled precision, rounded to working precision on output.
pub fn assemble_poly(ctx: Ctx, b: &[Float], beta: &Float) -> EvenPolynomial {
    let hi = ctx.double();
    let n = b.len() - 1;
    let m = n / 2;
    let beta2 = hi.f(beta).square();
    let b_hi: Vec<Float> = b.iter().map(|x| hi.f(x)).collect();
    let mut coeffs_hi = with_table(n, |tab| {
        let mut acc = vec![hi.zero(); m + 1];
        for (j, a) in acc.iter_mut().enumerate() {
            for k in (2 * j)..=n {
                let c = &tab.cp[k][j];
                if c.cmp0() != std::cmp::Ordering::Equal {
                    *a += b_hi[k].clone() * hi.f(c);
                }
            }
        }
        acc
    });
    let mut scale = hi.one();
    for a in coeffs_hi.iter_mut() {
        *a *= &scale;
        scale /= &beta2;
    }
    EvenPolynomial {
        coeffs: coeffs_hi.into_iter().map(|a| ctx.f(a)).collect(),
        parity: Parity::EvenInT,
    }
}

impl XiApproximant {
    fn check_invariants(&self, ctx: Ctx) -> Result<()> {
        let m = self.n as usize / 2;
        if self.poly_u.degree_u() != m {
            return Err(Error::Numerical(format!(
                "degree {} in u, expected {m}",
                self.poly_u.degree_u()
            )));
        }
        if self.spec.nonnegative() {
            if !self.poly_u.signs_alternate() {
                return Err(Error::Numerical(
                    "u-coefficients do not alternate in sign".into(),
                ));
            }
            let at_zero = self.eval(&ctx.zero());
            if !at_zero.is_sign_positive() || at_zero.is_zero() {
                return Err(Error::Numerical(format!("Xi_n(0) = {at_zero} not positive")));
            }
        }
        Ok(())
    }

    /// Horner evaluation of the dense form.
    pub fn eval(&self, t: &Float) -> Float {
        let u = t.clone().square();
        self.poly_u.eval_u(&u)
    }

    /// dXi/dt = 2 t p'(u).
    pub fn eval_dt(&self, t: &Float) -> Float {
        let u = t.clone().square();
        self.poly_u.eval_du(&u) * 2u32 * t
    }

    /// d2Xi/dt2 = 2 p'(u) + 4 t^2 p''(u).
    pub fn eval_dtt(&self, t: &Float) -> Float {
        let prec = t.prec();
        let u = t.clone().square();
        let dp = self.poly_u.eval_du(&u);
        let mut ddp = Float::new(prec);
        for (j, c) in self.poly_u.coeffs.iter().enumerate().skip(2).rev() {
            ddp *= &u;
            ddp += Float::with_val(prec, c * (j as u32 * (j as u32 - 1)));
        }
        dp * 2u32 + ddp * 4u32 * u
    }

    /// Horner evaluation at complex t.
    pub fn eval_complex(&self, ctx: Ctx, t: &Cplx) -> Cplx {
        let u = t.mul(t);
        let mut acc = Cplx::zero(ctx);
        for c in self.poly_u.coeffs.iter().rev() {
            acc = acc.mul(&u);
            acc.re += c;
        }
        acc
    }

    /// Recursion-route bundle at t; beta-derivatives present when the
    /// approximant was built with derivative-enabled coefficients.
    pub fn sums_at(&self, ctx: Ctx, t: &Float) -> SumEval {
        recursion_sums(ctx, &self.coeffs, &self.beta, t)
    }

    /// dXi_n/dbeta at t (recursion route).
    pub fn eval_dbeta(&self, ctx: Ctx, t: &Float) -> Result<Float> {
        self.sums_at(ctx, t).dbeta.ok_or_else(|| {
            Error::Domain("approximant was built without beta-derivative coefficients".into())
        })
    }
}

/// sum_k b_k P_k^+(t/beta) and its t/beta derivatives in one forward pass.
pub fn recursion_sums(ctx: Ctx, coeffs: &CoeffVector, beta: &Float, t: &Float) -> SumEval {
    let u = t.clone() / beta;
    let mut st = PochState::start(ctx, &u);
    let mut xi = ctx.zero();
    let mut dt = ctx.zero();
    let mut dtt = ctx.zero();
    let has_d = coeffs.dvalues.is_some();
    let mut dbeta = ctx.zero();
    let mut dbeta_dt = ctx.zero();
    let inv_beta = ctx.one() / beta;
    let t_over_beta2 = t.clone() / beta.clone().square();
    let t_over_beta3 = t_over_beta2.clone() / beta;
    for k in 0..=coeffs.n() {
        let b = &coeffs.values[k];
        xi += b.clone() * &st.plus;
        dt += b.clone() * &st.dplus;
        dtt += b.clone() * &st.ddplus;
        if has_d {
            let db = &coeffs.dvalues.as_ref().unwrap()[k];
            // d/dbeta [b_k P(u)] = b' P - b P' t/beta^2
            dbeta += db.clone() * &st.plus - Float::with_val(ctx.prec, b * &st.dplus) * &t_over_beta2;
            // d/dbeta [b_k P'(u)/beta] = b' P'/beta - b P'/beta^2 - b P'' t/beta^3
            dbeta_dt += db.clone() * &st.dplus * &inv_beta
                - Float::with_val(ctx.prec, b * &st.dplus) / beta.clone().square()
                - Float::with_val(ctx.prec, b * &st.ddplus) * &t_over_beta3;
        }
        st.advance();
    }
    SumEval {
        xi,
        dt: dt * &inv_beta,
        dtt: dtt * inv_beta.clone().square(),
        dbeta: has_d.then_some(dbeta),
        dbeta_dt: has_d.then_some(dbeta_dt),
    }
}

/// Relative residual of the large-beta limit
/// `Xi_n(t, beta) ~ (-4 A_I(1)/t) P_{n+1}^-(t/beta)`; decreasing in beta.
pub fn large_beta_residual(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n: u32,
    beta: &Float,
    t: &Float,
) -> Result<Float> {
    let approx = build(ctx, spec, n, beta, false)?;
    let xi = approx.eval(t);
    let a1 = spec.a_i_at_one(ctx);
    let u = t.clone() / beta;
    let limit = if t.clone().abs() < ctx.f(2).pow(-(ctx.prec as i32) / 2) {
        // t -> 0: -4 A_I(1) (P_{n+1}^-/t)(0) / ... evaluated via the odd
        // polynomial's constant term, scaled by 1/beta for the argument
        let c0 = ctx.f(&crate::pochhammer::coeffs_minus_over_t_exact(n + 1)[0]);
        -(a1 * 4u32 * c0) / beta
    } else {
        let pair = crate::pochhammer::eval_pair(ctx, n + 1, &u);
        -(a1 * 4u32 * pair.minus) / t
    };
    Ok((xi.clone() - limit).abs() / xi.abs())
}

use rug::ops::Pow;

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
    fn degree_and_alternation() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let a = build(c, &s, 4, &c.f(2), false).unwrap();
        assert_eq!(a.poly_u.degree_u(), 2);
        assert!(a.poly_u.signs_alternate());
        let a = build(c, &s, 11, &c.f(2), false).unwrap();
        assert_eq!(a.poly_u.degree_u(), 5);
        assert!(a.poly_u.signs_alternate());
        assert!(build(c, &s, 3, &c.f(2), false).is_err());
    }

    #[test]
    fn eval_at_zero_is_coefficient_sum() {
        let c = ctx();
        let s = AFunctionSpec::step(c.one()).unwrap();
        let a = build(c, &s, 7, &c.f(1), false).unwrap();
        let sum = a.coeffs.values.iter().fold(c.zero(), |acc, b| acc + b);
        assert!((a.eval(&c.zero()) - sum).abs() < tol(c, -70));
        assert_eq!(a.eval_dt(&c.zero()), 0);
    }

    #[test]
    fn dense_matches_recursion_sums() {
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let a = build(c, &s, 10, &c.f(3), false).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let t = c.f(rng.gen_range(-12.0..12.0));
            let dense = a.eval(&t);
            let sums = a.sums_at(c, &t);
            let scale = dense.clone().abs().max(&c.one());
            assert!((dense - &sums.xi).abs() <= scale * tol(c, -25));
            // derivative routes agree as well
            let ddense = a.eval_dt(&t);
            let scale = ddense.clone().abs().max(&c.one());
            assert!((ddense - &sums.dt).abs() <= scale * tol(c, -25));
            let dd = a.eval_dtt(&t);
            let scale = dd.clone().abs().max(&c.one());
            assert!((dd - &sums.dtt).abs() <= scale * tol(c, -25));
        }
    }

    #[test]
    fn step_near_double_root_at_paper_point() {
        // at (n, beta) = (4, 0.074) the approximant dips to a near-double
        // zero around t = 3.46
        let c = ctx();
        let s = AFunctionSpec::step(c.one()).unwrap();
        let a = build(c, &s, 4, &c.parse("0.074"), false).unwrap();
        let inside = a.eval(&c.parse("3.4645"));
        let left = a.eval(&c.parse("3.2"));
        let right = a.eval(&c.parse("3.7"));
        assert!(left.is_sign_positive() && right.is_sign_positive());
        assert!(inside < left && inside < right);
        assert!(inside.clone().abs() < a.eval(&c.zero()) * c.f(10).pow(-3));
    }

    #[test]
    fn dbeta_matches_finite_difference() {
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let beta = c.f(3);
        let t = c.f(10);
        let a = build(c, &s, 10, &beta, true).unwrap();
        let d = a.eval_dbeta(c, &t).unwrap();
        let h: Float = beta.clone() * tol(c, -8);
        let ap = build(c, &s, 10, &(beta.clone() + &h), false).unwrap();
        let am = build(c, &s, 10, &(beta.clone() - &h), false).unwrap();
        let fd = (ap.eval(&t) - am.eval(&t)) / (h * 2u32);
        let rel = (fd - &d).abs() / d.clone().abs();
        assert!(rel < tol(c, -6), "rel={rel}");
    }

    #[test]
    fn dbeta_dt_matches_finite_difference() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let beta = c.f(2);
        let t = c.f(5);
        let a = build(c, &s, 12, &beta, true).unwrap();
        let sums = a.sums_at(c, &t);
        let h: Float = beta.clone() * tol(c, -8);
        let ap = build(c, &s, 12, &(beta.clone() + &h), false).unwrap();
        let am = build(c, &s, 12, &(beta.clone() - &h), false).unwrap();
        let fd = (ap.eval_dt(&t) - am.eval_dt(&t)) / (h * 2u32);
        let d = sums.dbeta_dt.unwrap();
        let rel = (fd - &d).abs() / d.clone().abs();
        assert!(rel < tol(c, -6), "rel={rel}");
    }

    #[test]
    fn step_closed_form_dbeta_at_zero() {
        // t = 0: dXi/dbeta = sum db_k, against the closed-form derivative
        let c = ctx();
        let s = AFunctionSpec::step(c.one()).unwrap();
        let beta = c.parse("0.9");
        let a = build(c, &s, 6, &beta, true).unwrap();
        let d = a.eval_dbeta(c, &c.zero()).unwrap();
        let sum: Float = a
            .coeffs
            .dvalues
            .as_ref()
            .unwrap()
            .iter()
            .fold(c.zero(), |acc, x| acc + x);
        assert!((d - sum).abs() < tol(c, -60));
    }

    #[test]
    fn large_beta_limit_residual_decreases() {
        let c = ctx();
        let s = AFunctionSpec::riemann();
        let t = c.f(5);
        let r3 = large_beta_residual(c, &s, 8, &c.f(1000), &t).unwrap();
        let r4 = large_beta_residual(c, &s, 8, &c.f(10000), &t).unwrap();
        assert!(r4 < r3, "r(1e3)={r3} r(1e4)={r4}");
        assert!(r4 < 1e-3);
        // removable singularity route at t = 0
        let r0 = large_beta_residual(c, &s, 8, &c.f(10000), &c.zero()).unwrap();
        assert!(r0 < 1e-3);
    }

    #[test]
    fn complex_eval_consistent_with_real() {
        let c = ctx();
        let s = AFunctionSpec::bessel(c.one()).unwrap();
        let a = build(c, &s, 8, &c.f(2), false).unwrap();
        let t = c.parse("2.5");
        let via_real = a.eval(&t);
        let via_cplx = a.eval_complex(c, &Cplx::from_real(c, t));
        assert!((via_real - &via_cplx.re).abs() < tol(c, -70));
        assert!(via_cplx.im.is_zero());
    }
}
