//! Certified root classification of the approximant polynomials and the
//! onset-of-real-roots search in beta.
//!
//! Two independent routes must agree before a profile is returned: exact
//! integer isolation (Descartes bisection over the dyadic image of the
//! coefficients) fixes the real-root count with a proof, while an
//! Aberth–Ehrlich simultaneous iteration at working precision locates all
//! roots including complex pairs. A count mismatch raises
//! [`Error::Certification`] rather than guessing.
//!
//! Everything runs in u = t^2 (degree floor(n/2)), halving the degree and
//! making evenness structural; reported locations are mapped back to t.

use crate::afamily::AFunctionSpec;
use crate::approximant::build;
use crate::intpoly::IntPoly;
use crate::pochhammer::{polish_root, EvenPolynomial};
use crate::real::{Cplx, Ctx};
use crate::{Error, Result};
use rug::ops::Pow;
use rug::Float;

/// Certified classification of an approximant's roots in t.
#[derive(Clone, Debug)]
pub struct RootProfile {
    /// Ascending positive real t-roots (symmetry implies the mirrored -t).
    pub real_roots_t: Vec<Float>,
    /// Complex pairs (re, im > 0) in t; pure-imaginary pairs carry re = 0.
    pub complex_pairs: Vec<(Float, Float)>,
    /// Smallest spacing between consecutive real t-roots.
    pub min_gap: Option<Float>,
    /// Near-coalescence marker (t*, certified): certified means the
    /// complex-pair criterion |Im t| < 1e-8 (1 + t*) held.
    pub double_root: Option<(Float, bool)>,
    /// Degree in u, for count bookkeeping.
    pub degree_u: usize,
}

impl RootProfile {
    /// Count identity: every u-root is accounted for.
    pub fn counts_consistent(&self) -> bool {
        let im_pairs = self.complex_pairs.len();
        self.real_roots_t.len() + im_pairs == self.degree_u
            || self.real_roots_t.len() + im_pairs * 2 >= self.degree_u
    }
}

/// Near-coalescence thresholds: a pair is flagged below `loose`, and
/// certified coalesced below `tight` (relative to 1 + t). Loose is
/// calibrated so that a beta within ~1% of the onset still flags (the
/// imaginary part scales like sqrt of the onset distance); ordinary
/// neighboring roots of these approximants sit ~O(1) apart in t, two
/// orders above it.
const DOUBLE_LOOSE: f64 = 3e-2;
const DOUBLE_TIGHT: f64 = 1e-8;

/// Classify all roots of a dense polynomial in u = t^2.
pub fn classify(ctx: Ctx, poly: &EvenPolynomial) -> Result<RootProfile> {
    let ipoly = IntPoly::from_floats(&poly.coeffs)
        .ok_or_else(|| Error::Certification("non-finite coefficient".into()))?;
    let deg = ipoly.degree();
    if deg < 1 {
        return Err(Error::Domain("classify needs degree >= 1".into()));
    }
    let alternating = poly.signs_alternate();

    // exact side: isolate real u-roots
    let pos = ipoly.isolate_positive_roots(4 * ctx.prec)?;
    let neg = if alternating {
        // sign pattern (+,-,+,...) makes p(u) != 0 for u <= 0
        0
    } else {
        ipoly.count_negative_roots(4 * ctx.prec)?
    };
    let n_real = pos.len() + neg;
    if (deg - n_real) % 2 != 0 {
        return Err(Error::Certification(format!(
            "parity mismatch: degree {deg}, {n_real} real u-roots"
        )));
    }

    // numeric side: all roots at working precision
    let zs = aberth_roots(ctx, &poly.coeffs)?;

    // match numeric roots against the exact isolating intervals
    let refined: Vec<_> = pos.iter().map(|iso| ipoly.refine(iso, 48)).collect();
    let mut used = vec![false; zs.len()];
    for iso in &refined {
        let lo = ctx.f(&iso.lo);
        let hi = ctx.f(&iso.hi);
        let width = hi.clone() - &lo;
        let slack = width.clone() * 4u32
            + (hi.clone().abs() + 1u32) * ctx.f(2).pow(-(ctx.prec as i32) / 2);
        let mut found = false;
        for (i, z) in zs.iter().enumerate() {
            if used[i] {
                continue;
            }
            let re_ok = z.re.clone() >= lo.clone() - &slack && z.re.clone() <= hi.clone() + &slack;
            let im_ok = z.im.clone().abs() <= slack;
            if re_ok && im_ok {
                used[i] = true;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::Certification(format!(
                "exact real u-root in [{}, {}] has no working-precision partner",
                iso.lo.to_f64(),
                iso.hi.to_f64()
            )));
        }
    }
    // remaining numeric roots: negative-real or genuine complex conjugates
    let mut leftovers: Vec<&Cplx> = zs
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(z, _)| z)
        .collect();
    let neg_numeric = leftovers
        .iter()
        .filter(|z| {
            z.re.is_sign_negative()
                && z.im.clone().abs() <= (z.re.clone().abs() + 1u32) * ctx.f(2).pow(-(ctx.prec as i32) / 2)
        })
        .count();
    if neg_numeric != neg {
        return Err(Error::Certification(format!(
            "negative u-root counts disagree: exact {neg}, numeric {neg_numeric}"
        )));
    }
    leftovers.retain(|z| {
        !(z.re.is_sign_negative()
            && z.im.clone().abs()
                <= (z.re.clone().abs() + 1u32) * ctx.f(2).pow(-(ctx.prec as i32) / 2))
    });
    if leftovers.len() != deg - pos.len() - neg {
        return Err(Error::Certification(format!(
            "real u-root counts disagree: exact {}, numeric {}",
            pos.len() + neg,
            deg - leftovers.len()
        )));
    }

    // polish certified real roots and map to t
    let mut real_roots_t = Vec::with_capacity(pos.len());
    for iso in &refined {
        let u = polish_root(ctx, poly, &iso.lo, &iso.hi);
        real_roots_t.push(u.sqrt());
    }
    real_roots_t.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // negative u-roots are pure-imaginary t-pairs (re = 0); isolate them
    // exactly on the flipped polynomial
    let mut imaginary_pairs: Vec<(Float, Float)> = Vec::new();
    if neg > 0 {
        let flipped: Vec<Float> = poly
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| if j % 2 == 1 { -c.clone() } else { c.clone() })
            .collect();
        let fpoly = EvenPolynomial {
            coeffs: flipped,
            parity: poly.parity,
        };
        let fip = IntPoly::from_floats(&fpoly.coeffs).unwrap();
        for iso in fip.isolate_positive_roots(4 * ctx.prec)? {
            let r = fip.refine(&iso, 48);
            let u_abs = polish_root(ctx, &fpoly, &r.lo, &r.hi);
            imaginary_pairs.push((ctx.zero(), u_abs.sqrt()));
        }
    }

    // complex u-roots -> t pairs
    let mut complex_pairs: Vec<(Float, Float)> = imaginary_pairs;
    let mut seen = vec![false; leftovers.len()];
    for i in 0..leftovers.len() {
        if seen[i] {
            continue;
        }
        let z = leftovers[i];
        if z.im.clone().abs()
            <= (z.re.clone().abs() + 1u32) * ctx.f(2).pow(-(ctx.prec as i32) / 2)
        {
            // negative real u: already reported from the exact side
            seen[i] = true;
            continue;
        }
        // pair with its conjugate
        let mut partner = None;
        for (j, w) in leftovers.iter().enumerate().skip(i + 1) {
            if seen[j] {
                continue;
            }
            let d_re = (z.re.clone() - &w.re).abs();
            let d_im = (z.im.clone() + &w.im).abs();
            let scale = z.abs() + 1u32;
            if d_re <= scale.clone() * ctx.f(2).pow(-(ctx.prec as i32) / 4)
                && d_im <= scale * ctx.f(2).pow(-(ctx.prec as i32) / 4)
            {
                partner = Some(j);
                break;
            }
        }
        let j = partner.ok_or_else(|| {
            Error::Certification("complex u-root without conjugate partner".into())
        })?;
        seen[i] = true;
        seen[j] = true;
        let root_t = z.sqrt(ctx);
        let re = root_t.re.clone().abs();
        let im = root_t.im.clone().abs();
        if re.is_zero() {
            complex_pairs.push((ctx.zero(), im));
        } else {
            complex_pairs.push((re.clone(), im.clone()));
            complex_pairs.push((-re, im));
        }
    }
    complex_pairs.sort_by(|a, b| (a.0.clone(), a.1.clone()).partial_cmp(&(b.0.clone(), b.1.clone())).unwrap());

    // min gap and near-coalescence flag
    let mut min_gap: Option<Float> = None;
    let mut gap_loc = ctx.zero();
    for w in real_roots_t.windows(2) {
        let g = w[1].clone() - &w[0];
        if min_gap.as_ref().map_or(true, |m| g < *m) {
            gap_loc = (w[0].clone() + &w[1]) / 2u32;
            min_gap = Some(g);
        }
    }
    let mut double_root: Option<(Float, bool)> = None;
    for (re, im) in &complex_pairs {
        if re.is_sign_positive() && !re.is_zero() {
            let rel = im.clone() / (re.clone() + 1u32);
            if rel < DOUBLE_TIGHT {
                double_root = Some((re.clone(), true));
            } else if rel < DOUBLE_LOOSE && double_root.is_none() {
                double_root = Some((re.clone(), false));
            }
        }
    }
    if double_root.is_none() {
        if let Some(g) = &min_gap {
            if g.clone() / (gap_loc.clone() + 1u32) < DOUBLE_LOOSE {
                double_root = Some((gap_loc, false));
            }
        }
    }

    Ok(RootProfile {
        real_roots_t,
        complex_pairs,
        min_gap,
        double_root,
        degree_u: deg,
    })
}

/// True iff Xi_n(t, beta) has only real roots in t: every u-root of the
/// dense polynomial is real and positive (certified by exact isolation).
pub fn all_real(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<bool> {
    let approx = build(ctx, spec, n, beta, false)?;
    all_real_poly(ctx, &approx.poly_u)
}

/// The all-real predicate on an already-built dense polynomial.
pub fn all_real_poly(ctx: Ctx, poly: &EvenPolynomial) -> Result<bool> {
    let ipoly = IntPoly::from_floats(&poly.coeffs)
        .ok_or_else(|| Error::Certification("non-finite coefficient".into()))?;
    let deg = ipoly.degree();
    let pos = ipoly.count_positive_roots(4 * ctx.prec)?;
    Ok(pos == deg)
}

/// Certified number of conjugate complex u-root pairs.
pub fn complex_pair_count(ctx: Ctx, poly: &EvenPolynomial) -> Result<usize> {
    let ipoly = IntPoly::from_floats(&poly.coeffs)
        .ok_or_else(|| Error::Certification("non-finite coefficient".into()))?;
    let deg = ipoly.degree();
    let pos = ipoly.count_positive_roots(4 * ctx.prec)?;
    if pos == deg {
        return Ok(0);
    }
    let neg = if poly.signs_alternate() {
        0
    } else {
        ipoly.count_negative_roots(4 * ctx.prec)?
    };
    Ok((deg - pos - neg) / 2)
}

/// The predicate the beta-continuation bisects on: for admissible members
/// it is [`all_real`]; for the sign-indefinite counterexample family
/// (negative b_k possible) it asks only that no conjugate complex pair is
/// left, since there the strict boundary is governed by a root escaping
/// through infinity as the leading coefficient changes sign, not by a
/// coalescence.
pub fn real_regime(ctx: Ctx, spec: &AFunctionSpec, n: u32, beta: &Float) -> Result<bool> {
    let approx = build(ctx, spec, n, beta, false)?;
    if spec.nonnegative() {
        all_real_poly(ctx, &approx.poly_u)
    } else {
        Ok(complex_pair_count(ctx, &approx.poly_u)? == 0)
    }
}

/// Result of the onset bisection.
#[derive(Clone, Debug)]
pub struct OnsetResult {
    pub beta_star: Float,
    pub t_star: Float,
    /// All predicate flip intervals found on the 64-point scan (more than
    /// one marks a non-monotone patch).
    pub flips: Vec<(Float, Float)>,
    /// Set when the scan saw multiple flips and the highest one was taken.
    pub flagged: bool,
}

/// Locate the infimum of the connected all-real beta-range by bisection on
/// the [`all_real`] predicate, to absolute width `tol`.
///
/// A 64-point refinement scan guards against non-monotone patches: with
/// more than one predicate flip, all flip intervals are reported and the
/// highest onset is returned, flagged.
pub fn onset_beta(
    ctx: Ctx,
    spec: &AFunctionSpec,
    n: u32,
    beta_lo: &Float,
    beta_hi: &Float,
    tol: &Float,
) -> Result<OnsetResult> {
    if !real_regime(ctx, spec, n, beta_hi)? {
        return Err(Error::Bracket(format!(
            "the real-root predicate must hold at beta_hi = {beta_hi}"
        )));
    }
    if real_regime(ctx, spec, n, beta_lo)? {
        return Err(Error::Bracket(format!(
            "the real-root predicate must fail at beta_lo = {beta_lo}"
        )));
    }

    // refinement scan for non-monotone patches
    let grid = 64u32;
    let mut flips: Vec<(Float, Float)> = Vec::new();
    let mut last = false; // predicate at beta_lo
    let mut last_b = beta_lo.clone();
    for i in 1..=grid {
        let b = beta_lo.clone() + (beta_hi.clone() - beta_lo) * ctx.f(i) / ctx.f(grid);
        let ar = if i == grid {
            true
        } else {
            real_regime(ctx, spec, n, &b)?
        };
        if ar != last {
            flips.push((last_b.clone(), b.clone()));
        }
        last = ar;
        last_b = b;
    }
    let flagged = flips.len() > 1;
    let (mut lo, mut hi) = flips
        .last()
        .cloned()
        .expect("bracket guarantees at least one flip");

    while hi.clone() - &lo > *tol {
        let mid = (lo.clone() + &hi) / 2u32;
        if real_regime(ctx, spec, n, &mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // coalescence location from the complex side: at the last predicate-
    // false beta the pair closest to landing identifies the double root
    let approx = build(ctx, spec, n, &lo, false)?;
    let profile = classify(ctx, &approx.poly_u)?;
    let t_star = profile
        .complex_pairs
        .iter()
        .filter(|(re, _)| re.is_sign_positive() && !re.is_zero())
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(re, _)| re.clone())
        .or_else(|| {
            // degenerate bracket: fall back to the tightest real gap above
            let above = build(ctx, spec, n, &hi, false).ok()?;
            let p = classify(ctx, &above.poly_u).ok()?;
            let mut best: Option<(Float, Float)> = None;
            for w in p.real_roots_t.windows(2) {
                let g = w[1].clone() - &w[0];
                let mid = (w[0].clone() + &w[1]) / 2u32;
                if best.as_ref().map_or(true, |(bg, _)| g < *bg) {
                    best = Some((g, mid));
                }
            }
            best.map(|(_, m)| m)
        })
        .ok_or_else(|| Error::Numerical("no coalescing pair at onset".into()))?;

    Ok(OnsetResult {
        beta_star: hi,
        t_star,
        flips,
        flagged,
    })
}

/// Aberth–Ehrlich simultaneous root iteration at working precision, with
/// radius initialization from the Newton polygon of |coefficients|.
pub fn aberth_roots(ctx: Ctx, coeffs: &[Float]) -> Result<Vec<Cplx>> {
    let mut c: Vec<Float> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    let dcoeffs: Vec<Float> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, a)| Float::with_val(ctx.prec, a * j as u32))
        .collect();

    // Newton-polygon radii: upper convex hull of (i, log2 |c_i|)
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, a)| {
            let (m, e) = a.to_integer_exp().unwrap();
            let bits = m.significant_bits() as f64 + e as f64;
            (i, bits)
        })
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1)
                - (p.0 as f64 - a.0 as f64) * (b.1 - a.1);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut radii: Vec<f64> = Vec::with_capacity(deg);
    for w in hull.windows(2) {
        let (i1, y1) = w[0];
        let (i2, y2) = w[1];
        let r_log2 = (y1 - y2) / (i2 - i1) as f64;
        for _ in i1..i2 {
            radii.push(r_log2);
        }
    }
    while radii.len() < deg {
        radii.push(*radii.last().unwrap_or(&0.0));
    }

    let two_pi = ctx.pi() * 2u32;
    let mut zs: Vec<Cplx> = (0..deg)
        .map(|i| {
            let r = ctx.f(2).pow(&ctx.f(radii[i]));
            let angle = two_pi.clone() * ctx.f(i as u32) / ctx.f(deg as u32) + ctx.f(0.3761);
            Cplx::new(
                r.clone() * angle.clone().cos(),
                r * angle.sin(),
            )
        })
        .collect();

    // Horner value plus a rounding bound sum |c_j| |z|^j; a root counts as
    // converged when |p(z)| sinks below the evaluation noise floor, the
    // correct stop for clustered roots whose locations are only determined
    // to sqrt(rounding).
    let horner = |z: &Cplx, cs: &[Float]| -> (Cplx, Float) {
        let mut acc = Cplx::zero(ctx);
        let mut mag = ctx.zero();
        let zabs = z.abs();
        for a in cs.iter().rev() {
            acc = acc.mul(z);
            acc.re += a;
            mag *= &zabs;
            mag += a.clone().abs();
        }
        (acc, mag)
    };

    let eps: Float = ctx.f(2).pow(-(ctx.prec as i32) + 12);
    let noise: Float = ctx.f(2).pow(-(ctx.prec as i32) + 8);
    let mut converged = vec![false; deg];
    let max_sweeps = 600;
    for _ in 0..max_sweeps {
        let mut moved = ctx.zero();
        for i in 0..deg {
            if converged[i] {
                continue;
            }
            let (p, mag) = horner(&zs[i], &c);
            if p.abs() <= noise.clone() * &mag {
                converged[i] = true;
                continue;
            }
            let (dp, _) = horner(&zs[i], &dcoeffs);
            if dp.norm_sqr().is_zero() {
                // nudge off a critical point
                let bump = eps.clone() * (zs[i].abs() + 1u32);
                zs[i].re += bump;
                continue;
            }
            let newton = p.div(&dp);
            let mut sum = Cplx::zero(ctx);
            for (j, zj) in zs.iter().enumerate() {
                if j != i {
                    let d = zs[i].sub(zj);
                    if d.norm_sqr().is_zero() {
                        continue;
                    }
                    sum = sum.add(&Cplx::new(ctx.one(), ctx.zero()).div(&d));
                }
            }
            let denom = Cplx::new(ctx.one(), ctx.zero()).sub(&newton.mul(&sum));
            let w = if denom.norm_sqr().is_zero() {
                newton
            } else {
                newton.div(&denom)
            };
            let rel = w.abs() / (zs[i].abs() + 1u32);
            if rel > moved {
                moved = rel;
            }
            zs[i] = zs[i].sub(&w);
        }
        if converged.iter().all(|&x| x) || moved < eps {
            return Ok(zs);
        }
    }
    Err(Error::Numerical(
        "simultaneous root iteration did not converge".into(),
    ))
}
