//! Symmetrized Pochhammer polynomials `P_k^+`, `P_k^-` and the identities
//! the rest of the library is built on.
//!
//! `P_k(it) = P_k^+(t) + i P_k^-(t)` splits the Pochhammer polynomial at an
//! imaginary argument into even and odd parts; both have only real, simple,
//! interlacing roots. Evaluation runs the forward recursion
//! `P_{k+1}^+ = P_k^+ + t P_k^-/(k+1)`, `P_{k+1}^- = P_k^- - t P_k^+/(k+1)`;
//! coefficient vectors in `u = t^2` are kept as exact rationals because the
//! entries alternate violently for large k and root certification needs
//! exact signs.

use crate::intpoly::IntPoly;
use crate::real::{gamma_abs_one_minus_iu, gamma_arg_one_minus_iu, Cplx, Ctx};
use crate::{Error, Result};
use rug::ops::Pow;
use rug::{Complete, Float, Rational};
use std::cell::RefCell;

/// Value pair (P_k^+(t), P_k^-(t)).
#[derive(Clone, Debug)]
pub struct PochPair {
    pub k: u32,
    pub plus: Float,
    pub minus: Float,
}

/// Parity of an even polynomial in `u = t^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// Represents an even polynomial p(u), u = t^2.
    EvenInT,
    /// Represents t * p(u), i.e. an odd polynomial in t.
    TTimesEven,
}

/// Dense polynomial in `u = t^2` with working-precision coefficients.
#[derive(Clone, Debug)]
pub struct EvenPolynomial {
    pub coeffs: Vec<Float>,
    pub parity: Parity,
}

impl EvenPolynomial {
    pub fn degree_u(&self) -> usize {
        let mut d = self.coeffs.len();
        while d > 1 && self.coeffs[d - 1].is_zero() {
            d -= 1;
        }
        d - 1
    }

    pub fn eval_u(&self, u: &Float) -> Float {
        let prec = u.prec().max(self.coeffs.first().map_or(64, |c| c.prec()));
        let mut acc = Float::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= u;
            acc += c;
        }
        acc
    }

    pub fn eval_du(&self, u: &Float) -> Float {
        let prec = u.prec().max(self.coeffs.first().map_or(64, |c| c.prec()));
        let mut acc = Float::new(prec);
        for (j, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc *= u;
            acc += Float::with_val(prec, c * j as u32);
        }
        acc
    }

    /// Strict sign alternation c_0 > 0, c_1 < 0, ... over nonzero entries.
    pub fn signs_alternate(&self) -> bool {
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let want_positive = j % 2 == 0;
            if c.is_sign_positive() != want_positive {
                return false;
            }
        }
        true
    }
}

/// Asymptotic modulus/phase data at scaled argument u.
#[derive(Clone, Debug)]
pub struct PochAsymptotics {
    pub u: Float,
    pub r_u: Float,
    pub phi_u: Float,
}

impl PochAsymptotics {
    /// r(u) = |Gamma(1-iu)| = sqrt(pi u / sinh(pi u)), phi(u) = Arg Gamma(1-iu)
    /// from the exact complex log-gamma.
    pub fn new(ctx: Ctx, u: &Float) -> Self {
        PochAsymptotics {
            u: u.clone(),
            r_u: gamma_abs_one_minus_iu(ctx, u),
            phi_u: gamma_arg_one_minus_iu(ctx, u),
        }
    }
}

/// Forward-recursion state for P_k^+/-, with first and second t-derivatives.
///
/// `advance()` moves k -> k+1; all six entries update in O(1).
#[derive(Clone, Debug)]
pub struct PochState {
    pub k: u32,
    pub t: Float,
    pub plus: Float,
    pub minus: Float,
    pub dplus: Float,
    pub dminus: Float,
    pub ddplus: Float,
    pub ddminus: Float,
}

impl PochState {
    pub fn start(ctx: Ctx, t: &Float) -> Self {
        PochState {
            k: 0,
            t: t.clone(),
            plus: ctx.one(),
            minus: ctx.zero(),
            dplus: ctx.zero(),
            dminus: ctx.zero(),
            ddplus: ctx.zero(),
            ddminus: ctx.zero(),
        }
    }

    pub fn advance(&mut self) {
        let kp1 = self.k + 1;
        let t = &self.t;
        let p = self.plus.clone();
        let m = self.minus.clone();
        let dp = self.dplus.clone();
        let dm = self.dminus.clone();
        let ddp = self.ddplus.clone();
        let ddm = self.ddminus.clone();

        self.plus += Float::with_val(t.prec(), t * &m) / kp1;
        self.minus -= Float::with_val(t.prec(), t * &p) / kp1;
        self.dplus += (m.clone() + Float::with_val(t.prec(), t * &dm)) / kp1;
        self.dminus -= (p.clone() + Float::with_val(t.prec(), t * &dp)) / kp1;
        self.ddplus += (dm * 2u32 + Float::with_val(t.prec(), t * &ddm)) / kp1;
        self.ddminus -= (dp * 2u32 + Float::with_val(t.prec(), t * &ddp)) / kp1;
        self.k = kp1;
    }
}

/// (P_k^+(t), P_k^-(t)) by forward recursion at working precision.
pub fn eval_pair(ctx: Ctx, k: u32, t: &Float) -> PochPair {
    let mut st = PochState::start(ctx, t);
    for _ in 0..k {
        st.advance();
    }
    PochPair {
        k,
        plus: st.plus,
        minus: st.minus,
    }
}

/// Exact coefficient triangle for P_k^+ and P_k^-/t in u = t^2.
pub struct PochTable {
    /// cp[k][j]: coefficient of u^j in P_k^+(t), u = t^2.
    pub cp: Vec<Vec<Rational>>,
    /// cm[k][j]: coefficient of u^j in P_k^-(t)/t.
    pub cm: Vec<Vec<Rational>>,
}

impl PochTable {
    fn new() -> Self {
        PochTable {
            cp: vec![vec![Rational::from(1)]],
            cm: vec![vec![]],
        }
    }

    fn ensure(&mut self, k: usize) {
        while self.cp.len() <= k {
            let kk = self.cp.len() - 1; // extending from index kk to kk+1
            let kp1 = Rational::from((kk as u32 + 1, 1u32));
            let cpk = &self.cp[kk];
            let cmk = &self.cm[kk];
            // P_{k+1}^+ = P_k^+ + t P_k^- / (k+1); t * P_k^- = u * (P_k^-/t)
            let mut newp = cpk.clone();
            if newp.len() < cmk.len() + 1 {
                newp.resize(cmk.len() + 1, Rational::new());
            }
            for (j, c) in cmk.iter().enumerate() {
                newp[j + 1] += (c / &kp1).complete();
            }
            // P_{k+1}^-/t = P_k^-/t - P_k^+ / (k+1)
            let mut newm = cmk.clone();
            if newm.len() < cpk.len() {
                newm.resize(cpk.len(), Rational::new());
            }
            for (j, c) in cpk.iter().enumerate() {
                newm[j] -= (c / &kp1).complete();
            }
            self.cp.push(newp);
            self.cm.push(newm);
        }
    }
}

thread_local! {
    static TABLE: RefCell<PochTable> = RefCell::new(PochTable::new());
}

/// Run `f` with the exact coefficient table extended through degree `k`.
pub fn with_table<R>(k: usize, f: impl FnOnce(&PochTable) -> R) -> R {
    TABLE.with(|t| {
        t.borrow_mut().ensure(k);
        f(&t.borrow())
    })
}

/// Exact rational coefficients of P_k^+ in u = t^2 (degree floor(k/2)).
pub fn coeffs_plus_exact(k: u32) -> Vec<Rational> {
    with_table(k as usize, |t| t.cp[k as usize].clone())
}

/// Exact rational coefficients of P_k^-(t)/t in u = t^2.
pub fn coeffs_minus_over_t_exact(k: u32) -> Vec<Rational> {
    with_table(k as usize, |t| t.cm[k as usize].clone())
}

/// P_k^+ as a working-precision even polynomial in u.
pub fn coeffs_plus(ctx: Ctx, k: u32) -> EvenPolynomial {
    let coeffs = coeffs_plus_exact(k).iter().map(|c| ctx.f(c)).collect();
    EvenPolynomial {
        coeffs,
        parity: Parity::EvenInT,
    }
}

/// Ascending positive u-roots of P_k^+, isolated exactly and polished at
/// working precision.
///
/// Fails if any root of the exact polynomial is certified non-real in u
/// (that would contradict the real-root structure and signals a bug).
pub fn roots_plus(ctx: Ctx, k: u32) -> Result<Vec<Float>> {
    if k < 2 {
        return Err(Error::Domain(format!("roots_plus needs k >= 2, got {k}")));
    }
    let exact = coeffs_plus_exact(k);
    let ipoly = IntPoly::from_rationals(&exact);
    let deg = ipoly.degree();
    let isos = ipoly.isolate_positive_roots(4 * ctx.prec)?;
    if isos.len() != deg {
        return Err(Error::Certification(format!(
            "P_{k}^+ expected {deg} positive real u-roots, isolated {}",
            isos.len()
        )));
    }
    let poly = coeffs_plus(ctx, k);
    let mut out = Vec::with_capacity(isos.len());
    for iso in &isos {
        let refined = ipoly.refine(iso, 40);
        out.push(polish_root(ctx, &poly, &refined.lo, &refined.hi));
    }
    Ok(out)
}

/// Newton polish inside an exact bracket, falling back to bisection when a
/// step leaves the bracket.
pub(crate) fn polish_root(
    ctx: Ctx,
    poly: &EvenPolynomial,
    lo: &Rational,
    hi: &Rational,
) -> Float {
    let mut lo = ctx.f(lo);
    let mut hi = ctx.f(hi);
    if lo == hi {
        return lo;
    }
    let s_lo = poly.eval_u(&lo).is_sign_positive();
    let mut x = (lo.clone() + &hi) / 2u32;
    for _ in 0..ctx.prec {
        let f = poly.eval_u(&x);
        if f.is_zero() {
            return x;
        }
        // maintain the bracket
        if f.is_sign_positive() == s_lo {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let df = poly.eval_du(&x);
        let mut next = if df.is_zero() {
            (lo.clone() + &hi) / 2u32
        } else {
            x.clone() - f / df
        };
        if !(next > lo && next < hi) {
            next = (lo.clone() + &hi) / 2u32;
        }
        let step = (next.clone() - &x).abs();
        x = next;
        let scale = x.clone().abs().max(&ctx.one());
        if step < scale * ctx.f(2).pow(-(ctx.prec as i32) + 4) {
            break;
        }
    }
    x
}

/// Harmonic sum S_n^+(t) = sum_{k=0..n} P_k^+(t)/(k+1).
pub fn harmonic_sum(ctx: Ctx, n: u32, t: &Float) -> Float {
    let mut st = PochState::start(ctx, t);
    let mut acc = ctx.zero();
    for k in 0..=n {
        acc += st.plus.clone() / (k + 1);
        st.advance();
    }
    acc
}

/// Right-hand side of the harmonic-sum identity: -P_{n+1}^-(t)/t.
pub fn harmonic_sum_identity_rhs(ctx: Ctx, n: u32, t: &Float) -> Result<Float> {
    if t.is_zero() {
        return Err(Error::Domain("identity right-hand side needs t != 0".into()));
    }
    let pair = eval_pair(ctx, n + 1, t);
    Ok(-(pair.minus / t))
}

/// Large-k asymptotic form cos(u log k + phi(u)) / r(u).
pub fn asymptotic_plus(ctx: Ctx, k: u32, u: &Float) -> Float {
    let asy = PochAsymptotics::new(ctx, u);
    let arg = u.clone() * ctx.f(k).ln() + &asy.phi_u;
    arg.cos() / &asy.r_u
}

/// Residual of the polynomial Euler formula at (y, beta, t) with n_terms+1
/// terms: |exp(iyt) - sum_k e^{-beta y}(1-e^{-beta y})^k (P_k^+ + i P_k^-)(t/beta)|.
pub fn euler_formula_check(ctx: Ctx, y: &Float, beta: &Float, t: &Float, n_terms: u32) -> Result<Float> {
    if !(y.is_sign_positive() && !y.is_zero()) {
        return Err(Error::Domain("euler formula needs y > 0".into()));
    }
    if !(beta.is_sign_positive() && !beta.is_zero()) {
        return Err(Error::Domain("euler formula needs beta > 0".into()));
    }
    let u = t.clone() / beta;
    let eby = (-(beta.clone() * y)).exp();
    let q = ctx.one() - &eby;
    let mut st = PochState::start(ctx, &u);
    let mut sum_re = ctx.zero();
    let mut sum_im = ctx.zero();
    let mut w = eby.clone();
    for _ in 0..=n_terms {
        sum_re += w.clone() * &st.plus;
        sum_im += w.clone() * &st.minus;
        w *= &q;
        st.advance();
    }
    // The series converges to exp(-iyt); |exp(iyt) - sum(P+ - iP-)| equals
    // |exp(-iyt) - sum(P+ + iP-)| by conjugation, so compare against the
    // conjugate target.
    let yt = y.clone() * t;
    let target = Cplx::new(yt.clone().cos(), -yt.sin());
    Ok(target.sub(&Cplx::new(sum_re, sum_im)).abs())
}

/// P_k(s) for real s by the defining product.
pub fn pochhammer_real(ctx: Ctx, k: u32, s: &Float) -> Float {
    let mut acc = ctx.one();
    for j in 1..=k {
        acc *= ctx.one() - Float::with_val(ctx.prec, s / j);
    }
    acc
}

/// |P_k(z)| for complex z by the defining product.
pub fn pochhammer_abs_complex(ctx: Ctx, k: u32, z: &Cplx) -> Float {
    let one = Cplx::new(ctx.one(), ctx.zero());
    let mut acc = one.clone();
    for j in 1..=k {
        let f = one.sub(&Cplx::new(z.re.clone() / j, z.im.clone() / j));
        acc = acc.mul(&f);
    }
    acc.abs()
}
