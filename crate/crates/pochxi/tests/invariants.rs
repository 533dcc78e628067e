//! Module-level invariants and property tests that sit outside the
//! acceptance criteria: uniform growth bounds, dual quadrature routes,
//! coefficient tail shape, large-beta root reality, and the oscillation
//! structure of the increment equations along a reference trace.

mod common;

use common::{ctx, trace};
use pochxi::afamily::AFunctionSpec;
use pochxi::approximant::{build, recursion_sums};
use pochxi::coefficients::{coeff_vector, remainder_at_zero, tail_envelope};
use pochxi::intpoly::IntPoly;
use pochxi::pochhammer::{coeffs_minus_over_t_exact, coeffs_plus_exact, eval_pair, pochhammer_abs_complex};
use pochxi::quad::integrate;
use pochxi::real::Cplx;
use pochxi::rootfinder::{all_real, classify};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

#[test]
fn uniform_growth_bound_on_compact_grid() {
    // |P_k(i t / beta)| <= C k^{Im t / beta}: fit C once at k = 64, then the
    // larger k stay within a modest factor of the fitted bound
    let c = ctx();
    let beta = c.f(2);
    for (re, im) in [(0.0, 0.5), (2.0, 0.5), (5.0, 0.3), (1.0, 0.1)] {
        let z = Cplx::new(c.f(re) / &beta, c.f(im) / &beta);
        let exponent = c.f(im) / &beta;
        let cfit = pochhammer_abs_complex(c, 64, &z) / c.f(64).pow(&exponent);
        for k in [128u32, 256, 512] {
            let bound = cfit.clone() * ctx().f(1.6) * c.f(k).pow(&exponent);
            let val = pochhammer_abs_complex(c, k, &z);
            assert!(
                val <= bound,
                "re={re} im={im} k={k}: |P| = {val} exceeds fitted bound {bound}"
            );
        }
    }
}

#[test]
fn p_minus_real_roots_high_degree_spot_checks() {
    // real-root property of P_k^+ and P_k^-/t extends through k = 200
    for k in [150u32, 200] {
        let plus = IntPoly::from_rationals(&coeffs_plus_exact(k));
        let minus = IntPoly::from_rationals(&coeffs_minus_over_t_exact(k));
        assert_eq!(
            plus.isolate_positive_roots(2048).unwrap().len(),
            plus.degree(),
            "P_{k}^+"
        );
        assert_eq!(
            minus.isolate_positive_roots(2048).unwrap().len(),
            minus.degree(),
            "P_{k}^-/t"
        );
    }
}

#[test]
fn xi_zero_matches_x_space_quadrature() {
    // independent route: Xi(0) = 2 int_1^inf A(x) x^{-1/4} dx
    //                          = 2 int_1^inf A_I(x) / x dx
    let c = ctx();
    let spec = AFunctionSpec::riemann();
    let via_y = spec.xi_exact(c, &c.zero()).unwrap();
    let tol = c.tol();
    let x_cut = c.f(60);
    let q = integrate(
        c,
        |x| spec.eval_ai(c, x).unwrap() / x,
        &c.one(),
        &x_cut,
        &tol,
        None,
        32,
    )
    .unwrap();
    let via_x = q.value * 2u32;
    let diff = (via_y.clone() - &via_x).abs();
    assert!(diff < c.f(10).pow(-25), "y-route {via_y} vs x-route {via_x}");
}

#[test]
fn coefficient_tail_shape_riemann() {
    // b_k at beta = 2 decays super-polynomially: the log-log slope over
    // k in [50, 500] is steep and monotone, and a fitted power law with a
    // doubled constant majorizes the grid (the Eq-style C2 k^{-m} shape)
    let c = ctx();
    let spec = AFunctionSpec::riemann();
    let cv = coeff_vector(c, &spec, 500, &c.f(2), false).unwrap();
    let grid: Vec<(f64, f64)> = (50..=500)
        .step_by(30)
        .map(|k| ((k as f64).ln(), cv.values[k].to_f64().ln()))
        .collect();
    // least squares slope
    let n = grid.len() as f64;
    let sx: f64 = grid.iter().map(|p| p.0).sum();
    let sy: f64 = grid.iter().map(|p| p.1).sum();
    let sxx: f64 = grid.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = grid.iter().map(|p| p.0 * p.1).sum();
    let m = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(m < -3.0, "slope {m} not steeply decaying");
    let intercept = (sy - m * sx) / n;
    for (lk, lb) in &grid {
        let fit_val = intercept + m * lk;
        assert!(*lb <= fit_val + 2.0f64.ln() + 1.0, "point above doubled fit");
    }
    // monotone decreasing tail
    for k in 50..500 {
        assert!(cv.values[k] > cv.values[k + 1]);
    }
}

#[test]
fn partial_sum_matches_xi_within_remainder_bound() {
    // sum_{k<=N} b_k P_k^+(t/beta) vs Xi(t), N = 400, riemann, beta = 2
    let c = ctx();
    let spec = AFunctionSpec::riemann();
    let beta = c.f(2);
    let cv = coeff_vector(c, &spec, 400, &beta, false).unwrap();
    let tail = remainder_at_zero(c, &spec, 400, &beta).unwrap();
    for t in [0.0f64, 5.0, 10.0] {
        let tv = c.f(t);
        let sums = recursion_sums(c, &cv, &beta, &tv);
        let xi = spec.xi_exact(c, &tv).unwrap();
        let bound = tail.clone() * tail_envelope(c, &(tv / &beta));
        let diff = (sums.xi.clone() - &xi).abs();
        assert!(
            diff <= bound,
            "t={t}: |sum - Xi| = {diff} exceeds bound {bound}"
        );
    }
}

#[test]
fn approximant_convergence_within_remainder_bound_n200() {
    let c = ctx();
    let spec = AFunctionSpec::riemann();
    let beta = c.f(2);
    let approx = build(c, &spec, 200, &beta, false).unwrap();
    let tail = remainder_at_zero(c, &spec, 200, &beta).unwrap();
    for t in [0.0f64, 5.0, 10.0] {
        let tv = c.f(t);
        let xi = spec.xi_exact(c, &tv).unwrap();
        let diff = (approx.eval(&tv) - &xi).abs();
        let bound = tail.clone() * tail_envelope(c, &(tv / &beta));
        assert!(diff <= bound, "t={t}: {diff} > {bound}");
    }
}

#[test]
fn large_beta_all_roots_real() {
    // beta >= 100 n: all roots real and distinct for n in {4..40}
    let c = ctx();
    for spec in [AFunctionSpec::riemann(), AFunctionSpec::bessel(c.one()).unwrap()] {
        for n in [4u32, 16, 28, 40] {
            let beta = c.f(100 * n);
            assert!(
                all_real(c, &spec, n, &beta).unwrap(),
                "{} n={n}",
                spec.variant_name()
            );
            // distinct: classification reports n/2 separated real u-roots
            let a = build(c, &spec, n, &beta, false).unwrap();
            let profile = classify(c, &a.poly_u).unwrap();
            assert_eq!(profile.real_roots_t.len(), n as usize / 2);
            assert!(profile.complex_pairs.is_empty());
        }
    }
}

#[test]
fn trace_oscillation_and_increment_structure() {
    // along the step reference trace: t-increments always positive,
    // beta-increments positive away from jump neighborhoods, and the
    // oscillatory numerator/denominator of the beta-increment equation
    // carry opposite signs on >= 90% of non-jump steps
    let c = ctx();
    let tr = trace("step");
    let jump_set: Vec<u32> = tr.jump_rows();
    let near_jump = |n: u32| jump_set.iter().any(|&j| (n as i64 - j as i64).abs() <= 2);

    let mut opposite = 0usize;
    let mut total = 0usize;
    for w in tr.rows.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        assert!(cur.t >= prev.t, "t-increment negative at n = {}", cur.n);
        if !near_jump(cur.n) {
            assert!(
                cur.beta >= prev.beta,
                "beta decreased at n = {} outside a jump patch",
                cur.n
            );
        }
        // oscillation structure at the accepted rows, away from jumps
        if !near_jump(cur.n) && cur.n <= 100 {
            let spec = AFunctionSpec::step(c.one()).unwrap();
            let cv = coeff_vector(c, &spec, cur.n + 1, &cur.beta, true).unwrap();
            let s = recursion_sums(c, &cv, &cur.beta, &cur.t);
            let p_next = eval_pair(c, cur.n + 1, &cur.u).plus;
            let dbeta = s.dbeta.unwrap();
            if !p_next.is_zero() && !dbeta.is_zero() {
                total += 1;
                if p_next.is_sign_positive() != dbeta.is_sign_positive() {
                    opposite += 1;
                }
            }
        }
    }
    assert!(total > 50);
    let frac = opposite as f64 / total as f64;
    assert!(frac >= 0.9, "opposite-sign fraction {frac:.3}");
}

#[test]
fn trace_residuals_and_health() {
    // double-root residuals below 1e-20 * scale on every row, and the
    // first-order prediction is typically within 3% for n in [10, 100]
    let c = ctx();
    let spec = AFunctionSpec::step(c.one()).unwrap();
    let tr = pochxi::betatrace::run_trace(c, &spec, 4, 100, 1000, None, |_| {}).unwrap();
    for r in &tr.rows {
        let scale: Float = c.f(10).pow(-19);
        assert!(r.res_xi < scale && r.res_dxi < scale, "residuals at n = {}", r.n);
    }
    let mut errs: Vec<f64> = tr
        .prediction_errors
        .iter()
        .filter(|(n, _)| *n >= 10 && *n <= 100)
        .map(|(_, e)| *e)
        .collect();
    errs.sort_by(f64::total_cmp);
    let median = errs[errs.len() / 2];
    assert!(median <= 0.03, "median prediction error {median:.4}");
}

#[test]
fn trace_minimality_recertification_spot_checks() {
    // away from jump patches: all-real just above the row beta, complex
    // pair just below
    let c = ctx();
    let tr = trace("riemann");
    let spec = AFunctionSpec::riemann();
    for n in [25u32, 100, 175] {
        let row = tr.rows.iter().find(|r| r.n == n).unwrap();
        let above = row.beta.clone() * c.parse("1.001");
        let below = row.beta.clone() * c.parse("0.99");
        assert!(all_real(c, &spec, n, &above).unwrap(), "above at n={n}");
        assert!(!all_real(c, &spec, n, &below).unwrap(), "below at n={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn prop_pair_matches_exact_polynomial(k in 2u32..36, tf in -9.0f64..9.0) {
        let c = ctx();
        let t = c.f(tf);
        let pair = eval_pair(c, k, &t);
        let u = t.clone().square();
        let cp = coeffs_plus_exact(k);
        let mut acc = c.zero();
        for coeff in cp.iter().rev() {
            acc *= &u;
            acc += c.f(coeff);
        }
        let tol: Float = acc.clone().abs().max(&c.one()) * c.f(10).pow(-70);
        prop_assert!((acc - &pair.plus).abs() <= tol);
    }

    #[test]
    fn prop_harmonic_identity(n in 1u32..60, tf in 0.05f64..12.0) {
        let c = ctx();
        let t = c.f(tf);
        let lhs = pochxi::pochhammer::harmonic_sum(c, n, &t);
        let rhs = pochxi::pochhammer::harmonic_sum_identity_rhs(c, n, &t).unwrap();
        let tol: Float = lhs.clone().abs().max(&c.one()) * c.f(10).pow(-60);
        prop_assert!((lhs - rhs).abs() <= tol);
    }

    #[test]
    fn prop_interlacing_small_k(k in 3u32..24) {
        // roots of P_k^+ and P_{k+1}^+ strictly interlace
        let a = IntPoly::from_rationals(&coeffs_plus_exact(k));
        let b = IntPoly::from_rationals(&coeffs_plus_exact(k + 1));
        let ra: Vec<_> = a.isolate_positive_roots(512).unwrap().iter().map(|i| a.refine(i, 64)).collect();
        let rb: Vec<_> = b.isolate_positive_roots(512).unwrap().iter().map(|i| b.refine(i, 64)).collect();
        // merged ordering alternates b, a, b, a, ... (b has one more root
        // exactly when its u-degree is larger)
        let mut merged: Vec<(rug::Rational, u8)> = ra.iter().map(|i| (i.lo.clone(), 0u8)).chain(
            rb.iter().map(|i| (i.lo.clone(), 1u8))).collect();
        merged.sort_by(|x, y| x.0.cmp(&y.0));
        for w in merged.windows(2) {
            prop_assert_ne!(w[0].1, w[1].1, "same-family neighbors for k={}", k);
        }
    }
}
