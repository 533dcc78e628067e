//! Working-precision context and small numeric helpers shared by all modules.
//!
//! Every value in the hot paths is a [`rug::Float`] carrying its own MPFR
//! precision. A [`Ctx`] fixes the working precision (bits) and the default
//! relative quadrature tolerance; it is `Copy` and threaded through the
//! public APIs so that a whole run is reproducible from `(config, precision)`
//! alone.

use rug::float::Special;
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

/// Working-precision context.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ctx {
    /// Mantissa precision in bits for all derived `Float`s.
    pub prec: u32,
    /// Default relative tolerance for quadratures (log10, e.g. -30 for 1e-30).
    pub tol_log10: i32,
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx {
            prec: 256,
            tol_log10: -30,
        }
    }
}

impl Ctx {
    pub fn new(prec: u32) -> Self {
        Ctx {
            prec,
            ..Ctx::default()
        }
    }

    /// Context with doubled precision, for accumulation-critical steps.
    pub fn double(self) -> Self {
        Ctx {
            prec: self.prec * 2,
            tol_log10: self.tol_log10,
        }
    }

    pub fn f<T>(self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.prec, v)
    }

    pub fn zero(self) -> Float {
        Float::with_val(self.prec, 0)
    }

    pub fn one(self) -> Float {
        Float::with_val(self.prec, 1)
    }

    pub fn pi(self) -> Float {
        Float::with_val(self.prec, rug::float::Constant::Pi)
    }

    /// Euler-Mascheroni constant.
    pub fn euler(self) -> Float {
        Float::with_val(self.prec, rug::float::Constant::Euler)
    }

    pub fn e(self) -> Float {
        self.one().exp()
    }

    /// Default quadrature tolerance as a value (10^tol_log10).
    pub fn tol(self) -> Float {
        self.f(10).pow(self.tol_log10)
    }

    /// Parse a decimal literal at working precision.
    ///
    /// Panics on malformed input; intended for constants in code and tests.
    pub fn parse(self, s: &str) -> Float {
        Float::with_val(self.prec, Float::parse(s).expect("bad float literal"))
    }

    /// Significant decimal digits carried by this precision (ceil(bits * 0.302)).
    pub fn decimal_digits(self) -> usize {
        ((self.prec as f64) * 0.302).ceil() as usize
    }
}

/// Exact decimal rendering with the context's digit budget.
pub fn fmt_decimal(x: &Float, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.into();
    }
    let (sign, mantissa, exp) = x.to_sign_string_exp(10, Some(digits));
    if mantissa.chars().all(|c| c == '0') {
        return "0".into();
    }
    let s = if sign { "-" } else { "" };
    // to_sign_string_exp returns digits d1 d2 ... with value 0.d1d2... * 10^exp
    let e = exp.unwrap_or(0) - 1;
    let (first, rest) = mantissa.split_at(1);
    format!("{s}{first}.{rest}e{e}")
}

/// Exact hexadecimal rendering (bit-exact round trip at the same precision).
pub fn fmt_hex(x: &Float) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.into();
    }
    let (sign, mantissa, exp) = x.to_sign_string_exp(16, None);
    let s = if sign { "-" } else { "" };
    format!("{s}0.{}@{}", mantissa, exp.unwrap_or(0))
}

/// Parse the output of [`fmt_hex`] back, bit-exact at precision `prec`.
pub fn parse_hex(s: &str, prec: u32) -> Option<Float> {
    match s {
        "nan" => return Some(Float::with_val(prec, Special::Nan)),
        "inf" => return Some(Float::with_val(prec, Special::Infinity)),
        "-inf" => return Some(Float::with_val(prec, Special::NegInfinity)),
        _ => {}
    }
    let incomplete = Float::parse_radix(s, 16).ok()?;
    Some(Float::with_val(prec, incomplete))
}

/// A complex value as an explicit (re, im) pair of working-precision reals.
///
/// Only the handful of operations the library needs; this is not a general
/// complex tower.
#[derive(Clone, Debug)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn from_real(ctx: Ctx, re: Float) -> Self {
        Cplx {
            re,
            im: ctx.zero(),
        }
    }

    pub fn zero(ctx: Ctx) -> Self {
        Cplx {
            re: ctx.zero(),
            im: ctx.zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, o: &Cplx) -> Cplx {
        Cplx {
            re: self.re.clone() + &o.re,
            im: self.im.clone() + &o.im,
        }
    }

    pub fn sub(&self, o: &Cplx) -> Cplx {
        Cplx {
            re: self.re.clone() - &o.re,
            im: self.im.clone() - &o.im,
        }
    }

    pub fn mul(&self, o: &Cplx) -> Cplx {
        let re = self.re.clone() * &o.re - Float::with_val(self.re.prec(), &self.im * &o.im);
        let im = self.re.clone() * &o.im + Float::with_val(self.re.prec(), &self.im * &o.re);
        Cplx { re, im }
    }

    pub fn mul_real(&self, s: &Float) -> Cplx {
        Cplx {
            re: self.re.clone() * s,
            im: self.im.clone() * s,
        }
    }

    pub fn div(&self, o: &Cplx) -> Cplx {
        let d = o.norm_sqr();
        let re = (self.re.clone() * &o.re + Float::with_val(self.re.prec(), &self.im * &o.im)) / &d;
        let im = (self.im.clone() * &o.re - Float::with_val(self.re.prec(), &self.re * &o.im)) / &d;
        Cplx { re, im }
    }

    pub fn neg(&self) -> Cplx {
        Cplx {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        self.re.clone().square() + self.im.clone().square()
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    /// Principal complex logarithm.
    pub fn ln(&self) -> Cplx {
        let re = self.norm_sqr().ln() / 2u32;
        let im = self.im.clone().atan2(&self.re);
        Cplx { re, im }
    }

    /// cos(a + ib) = cos a cosh b - i sin a sinh b.
    pub fn cos(&self) -> Cplx {
        let (sin_a, cos_a) = self.re.clone().sin_cos(Float::new(self.re.prec()));
        let (sinh_b, cosh_b) = self.im.clone().sinh_cosh(Float::new(self.im.prec()));
        Cplx {
            re: cos_a * &cosh_b,
            im: -(sin_a * &sinh_b),
        }
    }

    /// Principal square root.
    pub fn sqrt(&self, ctx: Ctx) -> Cplx {
        if self.im.is_zero() {
            if self.re.is_sign_negative() {
                return Cplx {
                    re: ctx.zero(),
                    im: self.re.clone().abs().sqrt(),
                };
            }
            return Cplx {
                re: self.re.clone().sqrt(),
                im: ctx.zero(),
            };
        }
        let r = self.abs();
        let re = ((r.clone() + &self.re) / 2u32).sqrt();
        let mut im = ((r - &self.re) / 2u32).sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Cplx { re, im }
    }
}

/// Exact Bernoulli numbers B_0..B_n (B_1 = -1/2 convention).
///
/// Plain recurrence over rationals; only used to seed the Stirling series,
/// so n stays small (< 200).
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        // B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j
        let mut acc = Rational::new();
        let mut binom = Integer::from(1); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate().take(m) {
            acc += bj.clone() * &binom;
            // C(m+1, j+1) = C(m+1, j) * (m+1-j)/(j+1)
            binom = binom * (m as u32 + 1 - j as u32) / (j as u32 + 1);
        }
        if m == 0 {
            b.push(Rational::from(1));
        } else {
            acc /= -Rational::from((m as u32 + 1, 1u32));
            b.push(acc);
        }
    }
    b
}

/// log Gamma(z) for complex z with Re z > 0, via argument shifting and the
/// Stirling series with exact Bernoulli coefficients.
///
/// The shift threshold scales with the precision so the asymptotic series
/// tail stays below 2^-prec.
pub fn ln_gamma_complex(ctx: Ctx, z: &Cplx) -> Cplx {
    let prec = ctx.prec;
    // |z| >= sigma0 makes term j of the series ~ |B_2j|/(2j(2j-1)|z|^(2j-1));
    // sigma0 = max(12, 0.18*prec) keeps ~prec bits with n_terms = prec/4.
    let sigma0 = f64::max(12.0, 0.18 * prec as f64);
    let n_terms = (prec as usize / 4).max(20);

    // Shift z -> z + m so that |z + m| >= sigma0.
    let mut shift_sum = Cplx::zero(ctx);
    let mut zs = z.clone();
    let sigma0f = ctx.f(sigma0);
    while zs.abs() < sigma0f {
        shift_sum = shift_sum.add(&zs.ln());
        zs.re += 1u32;
    }

    // Stirling: (z-1/2) ln z - z + ln(2 pi)/2 + sum B_2j / (2j(2j-1) z^(2j-1))
    let ln_z = zs.ln();
    let half = ctx.f(0.5);
    let zm = Cplx {
        re: zs.re.clone() - &half,
        im: zs.im.clone(),
    };
    let mut res = zm.mul(&ln_z).sub(&zs);
    res.re += (ctx.pi() * 2u32).ln() / 2u32;

    let bern = bernoulli(2 * n_terms);
    let inv_z = Cplx {
        re: ctx.one(),
        im: ctx.zero(),
    }
    .div(&zs);
    let inv_z2 = inv_z.mul(&inv_z);
    let mut zpow = inv_z; // z^-(2j-1), starting at j=1
    let mut tail = Cplx::zero(ctx);
    for j in 1..=n_terms {
        let c = ctx.f(&bern[2 * j]) / ctx.f(2 * j as u32 * (2 * j as u32 - 1));
        let term = zpow.mul_real(&c);
        let before = tail.clone();
        tail = tail.add(&term);
        // stop once the term is below the last representable bit of the sum
        let cutoff = Float::with_val(prec, 2).pow(-2i32 * prec as i32 - 8);
        if term.norm_sqr() < before.norm_sqr() * cutoff {
            break;
        }
        zpow = zpow.mul(&inv_z2);
    }
    res = res.add(&tail);
    res.sub(&shift_sum)
}

/// Modulus factor r(u) = |Gamma(1-iu)| = sqrt(pi*u / sinh(pi*u)), r(0) = 1.
pub fn gamma_abs_one_minus_iu(ctx: Ctx, u: &Float) -> Float {
    if u.is_zero() {
        return ctx.one();
    }
    let pu = ctx.pi() * u;
    let s = pu.clone().sinh();
    (pu / s).sqrt()
}

/// Phase factor phi(u) = Arg Gamma(1-iu), computed from the exact complex
/// log-gamma (not the small-u linearization).
pub fn gamma_arg_one_minus_iu(ctx: Ctx, u: &Float) -> Float {
    if u.is_zero() {
        return ctx.zero();
    }
    let z = Cplx {
        re: ctx.one(),
        im: -u.clone(),
    };
    ln_gamma_complex(ctx, &z).im
}
