//! Exact integer polynomials and certified real-root isolation.
//!
//! Root counting and isolation run on exact GMP integers, so the results
//! are proofs about the polynomial actually given (typically the dyadic
//! image of a working-precision coefficient vector). Isolation uses
//! Descartes' rule of signs with interval bisection (Vincent–Collins–Akritas
//! style): shift/scale transforms keep everything in integer arithmetic.
//!
//! An unresolved cluster (sign variations that never drop to 0/1 before the
//! depth cap) is reported as such, never guessed away; for coefficient
//! vectors rounded from floats this only happens when two roots coincide
//! beyond the working precision.

use crate::{Error, Result};
use rug::{Complete, Float, Integer, Rational};

/// Dense integer polynomial, ascending coefficients, exact degree
/// (leading coefficient nonzero unless the polynomial is zero).
#[derive(Clone, Debug, PartialEq)]
pub struct IntPoly {
    pub coeffs: Vec<Integer>,
}

/// Isolating interval for one real root: the open interval `(lo, hi)`,
/// or an exact root when `lo == hi`.
#[derive(Clone, Debug)]
pub struct Iso {
    pub lo: Rational,
    pub hi: Rational,
}

impl Iso {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid_f64(&self) -> f64 {
        let m = Rational::from(&self.lo + &self.hi) / 2u32;
        m.to_f64()
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.cmp0() == std::cmp::Ordering::Equal) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.cmp0() == std::cmp::Ordering::Equal)
    }

    /// Exact conversion from working-precision floats: scales by the common
    /// power of two so that every coefficient becomes an integer.
    ///
    /// Returns `None` if any coefficient is non-finite.
    pub fn from_floats(coeffs: &[Float]) -> Option<Self> {
        let mut parts = Vec::with_capacity(coeffs.len());
        let mut min_exp: Option<i32> = None;
        for c in coeffs {
            if !c.is_finite() {
                return None;
            }
            if c.is_zero() {
                parts.push(None);
                continue;
            }
            let (m, e) = c.to_integer_exp().unwrap();
            min_exp = Some(min_exp.map_or(e, |me| me.min(e)));
            parts.push(Some((m, e)));
        }
        let min_exp = min_exp.unwrap_or(0);
        let ints = parts
            .into_iter()
            .map(|p| match p {
                None => Integer::new(),
                Some((m, e)) => m << (e - min_exp) as u32,
            })
            .collect();
        Some(Self::new(ints).shrink_two_content())
    }

    /// Exact conversion from rationals via the common denominator.
    pub fn from_rationals(coeffs: &[Rational]) -> Self {
        let mut lcm = Integer::from(1);
        for c in coeffs {
            lcm.lcm_mut(c.denom());
        }
        let ints = coeffs
            .iter()
            .map(|c| (c.numer() * &lcm).complete() / c.denom())
            .collect();
        Self::new(ints).shrink_two_content()
    }

    /// Divide out the common power of two (does not change roots or signs
    /// up to a positive factor).
    fn shrink_two_content(mut self) -> Self {
        let mut min_tz: Option<u32> = None;
        for c in &self.coeffs {
            if c.cmp0() != std::cmp::Ordering::Equal {
                let tz = c.find_one(0).unwrap_or(0);
                min_tz = Some(min_tz.map_or(tz, |m| m.min(tz)));
                if min_tz == Some(0) {
                    break;
                }
            }
        }
        if let Some(tz) = min_tz {
            if tz > 0 {
                for c in &mut self.coeffs {
                    *c >>= tz;
                }
            }
        }
        self
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::new(vec![Integer::new()]);
        }
        let d: Vec<Integer> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| Integer::from(c * Integer::from(j)))
            .collect();
        IntPoly::new(d)
    }

    /// Sign of `p(a / 2^s)` computed exactly:
    /// `p(a/2^s) * 2^(s d) = sum c_j a^j 2^(s(d-j))` in Horner form.
    pub fn sign_at_dyadic(&self, a: &Integer, s: u32) -> i32 {
        let mut acc = Integer::new();
        let d = self.degree();
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if j < d {
                acc *= a;
            }
            acc += (c << (s * (d - j) as u32)).complete();
        }
        acc.cmp0() as i32
    }

    /// Sign of `p(q)` at an arbitrary rational point, exact.
    pub fn sign_at_rational(&self, q: &Rational) -> i32 {
        let num = q.numer();
        let den = q.denom();
        let d = self.degree();
        let mut acc = Integer::new();
        let mut den_pow = Integer::from(1);
        // sum c_j num^j den^(d-j), Horner in num with running den powers
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if j < d {
                acc *= num;
            }
            acc += (c * &den_pow).complete();
            if j > 0 {
                den_pow *= den;
            }
        }
        acc.cmp0() as i32
    }

    /// Number of sign variations in the coefficient sequence.
    pub fn sign_variations(&self) -> usize {
        let mut v = 0;
        let mut last = 0i32;
        for c in &self.coeffs {
            let s = c.cmp0() as i32;
            if s != 0 {
                if last != 0 && s != last {
                    v += 1;
                }
                last = s;
            }
        }
        v
    }

    /// p(x + 1) by iterated Horner addition, in place.
    fn taylor_shift_one(&mut self) {
        let n = self.coeffs.len();
        for i in 0..n.saturating_sub(1) {
            for j in (i..n - 1).rev() {
                let (lo, hi) = self.coeffs.split_at_mut(j + 1);
                lo[j] += &hi[0];
            }
        }
    }

    /// 2^d p(x/2), in place: roots are doubled.
    fn stretch_double(&mut self) {
        let d = self.coeffs.len().saturating_sub(1);
        for (j, c) in self.coeffs.iter_mut().enumerate() {
            *c <<= (d - j) as u32;
        }
    }

    /// Variation bound for the number of roots in the open interval (0, 1):
    /// variations of (1+x)^d p(1/(1+x)).
    fn variations_01(&self) -> usize {
        let mut rev = IntPoly {
            coeffs: self.coeffs.iter().rev().cloned().collect(),
        };
        rev.taylor_shift_one();
        rev.sign_variations()
    }

    /// Smallest `m` with all positive roots < 2^m (Fujiwara-style bound:
    /// |x| <= 2 max_i |a_i / a_d|^{1/(d-i)}). The per-term exponent keeps
    /// the bound tight even when the coefficient magnitudes span hundreds
    /// of orders, where the plain Cauchy bound would waste as many
    /// bisection levels.
    pub fn positive_root_bound_exp(&self) -> u32 {
        let d = self.degree();
        let lead_bits = self.coeffs[d].significant_bits() as i64;
        let mut max_exp: i64 = 0;
        for (i, c) in self.coeffs.iter().enumerate().take(d) {
            if c.cmp0() != std::cmp::Ordering::Equal {
                let rel = c.significant_bits() as i64 - lead_bits + 1;
                let per = rel.div_euclid((d - i) as i64) + 1;
                max_exp = max_exp.max(per);
            }
        }
        (max_exp + 2).max(1) as u32
    }

    /// Isolate all roots in the open interval `(0, 2^bound_exp)`.
    ///
    /// Requires the polynomial to be square-free over that range at the
    /// resolution of `max_depth` bisections; a tighter cluster raises
    /// [`Error::Certification`].
    pub fn isolate_positive_roots(&self, max_depth: u32) -> Result<Vec<Iso>> {
        if self.is_zero() {
            return Err(Error::Certification("zero polynomial".into()));
        }
        let mut p = self.clone();
        // strip roots at x = 0; they are not positive roots
        while p.coeffs.first().map_or(false, |c| c.cmp0() == std::cmp::Ordering::Equal) {
            p.coeffs.remove(0);
        }
        let bexp = p.positive_root_bound_exp();
        // q(x) = p(2^bexp * x) maps roots of p in (0, 2^bexp) into (0, 1)
        let mut q = p.clone();
        for (j, c) in q.coeffs.iter_mut().enumerate() {
            *c <<= bexp * j as u32;
        }
        q = q.shrink_two_content();
        let mut out = Vec::new();
        // interval stack: (poly, c, k) represents (c/2^k, (c+1)/2^k) in q-space
        let mut stack: Vec<(IntPoly, Integer, u32)> = vec![(q, Integer::new(), 0)];
        while let Some((node, c, k)) = stack.pop() {
            let v = node.variations_01();
            if v == 0 {
                continue;
            }
            let scale = |num: Integer, k: u32| -> Rational {
                // back-map from q-space to p-space: multiply by 2^bexp
                Rational::from((num, Integer::from(1) << k)) << bexp
            };
            if v == 1 {
                out.push(Iso {
                    lo: scale(c.clone(), k),
                    hi: scale((&c + 1u32).complete(), k),
                });
                continue;
            }
            if k >= max_depth {
                return Err(Error::Certification(format!(
                    "unresolved root cluster of multiplicity <= {v} near {} after {k} bisections",
                    scale(c, k).to_f64()
                )));
            }
            let mut left = node;
            left.stretch_double(); // roots of left in (0,1) <-> node in (0,1/2)
            left = left.shrink_two_content();
            let mut right = left.clone();
            right.taylor_shift_one(); // node in (1/2,1)
            right = right.shrink_two_content();
            let c2 = (&c << 1u32).complete();
            let cmid = (&c2 + 1u32).complete();
            if right.coeffs.first().map_or(false, |x| x.cmp0() == std::cmp::Ordering::Equal) {
                // exact root at the midpoint
                let m = scale(cmid.clone(), k + 1);
                out.push(Iso {
                    lo: m.clone(),
                    hi: m,
                });
                right.coeffs.remove(0);
            }
            stack.push((left, c2, k + 1));
            stack.push((right, cmid, k + 1));
        }
        out.sort_by(|a, b| a.lo.cmp(&b.lo));
        Ok(out)
    }

    /// Certified count of distinct real roots in `(0, +inf)`.
    pub fn count_positive_roots(&self, max_depth: u32) -> Result<usize> {
        Ok(self.isolate_positive_roots(max_depth)?.len())
    }

    /// Certified count of distinct real roots in `(-inf, 0)`, via x -> -x.
    pub fn count_negative_roots(&self, max_depth: u32) -> Result<usize> {
        let flipped: Vec<Integer> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| if j % 2 == 1 { (-c).complete() } else { c.clone() })
            .collect();
        IntPoly::new(flipped).count_positive_roots(max_depth)
    }

    /// Refine an isolating interval by exact bisection until its width is
    /// below `2^-extra_bits` times the initial width, or the root is hit
    /// exactly.
    pub fn refine(&self, iso: &Iso, extra_bits: u32) -> Iso {
        if iso.is_exact() {
            return iso.clone();
        }
        let mut lo = iso.lo.clone();
        let mut hi = iso.hi.clone();
        let s_lo = self.sign_at_rational(&lo);
        if s_lo == 0 {
            return Iso {
                lo: lo.clone(),
                hi: lo,
            };
        }
        for _ in 0..extra_bits {
            let mid = Rational::from(&lo + &hi) / 2u32;
            let s_mid = self.sign_at_rational(&mid);
            if s_mid == 0 {
                return Iso {
                    lo: mid.clone(),
                    hi: mid,
                };
            }
            if s_mid == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Iso { lo, hi }
    }
}
