//! Binary floating point with a runtime-selected mantissa width.
//!
//! The ascending Bessel series lose roughly `2|z|/ln 2` bits to cancellation
//! when the modified function `K` is assembled from `I_{±ν}`, and similar
//! amounts for the Hankel functions at complex argument. Native `f64` cannot
//! absorb that, so those paths run on [`MpFloat`] with the working precision
//! chosen from a measured loss estimate. Arithmetic is delegated to
//! `astro-float`; this wrapper pins the rounding mode, keeps a per-thread
//! constants cache and exposes the handful of operations the kernel needs.

use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone, Debug)]
pub struct MpFloat {
    v: BigFloat,
    prec: u32,
}

impl MpFloat {
    fn wrap(v: BigFloat, prec: u32) -> Self {
        debug_assert!(!v.is_nan(), "MpFloat operation produced NaN");
        MpFloat { v, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Self::wrap(BigFloat::from_f64(0.0, prec as usize), prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::wrap(BigFloat::from_f64(1.0, prec as usize), prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        debug_assert!(x.is_finite(), "non-finite value {x} promoted to MpFloat");
        Self::wrap(BigFloat::from_f64(x, prec as usize), prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::wrap(BigFloat::from_i64(n, prec as usize), prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        if prec == self.prec {
            return self.clone();
        }
        let mut v = self.v.clone();
        v.set_precision(prec as usize, RM)
            .expect("astro-float precision change");
        Self::wrap(v, prec)
    }

    /// Signed mantissa in `[0.5, 1)` and binary exponent.
    pub fn to_f64_exp(&self) -> (f64, i64) {
        if self.is_zero() {
            return (0.0, 0);
        }
        let (words, _, sign, e, _) = self.v.as_raw_parts().expect("finite MpFloat");
        let top = *words.last().expect("non-empty mantissa");
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        let m = top as f64 / 18446744073709551616.0
            + next as f64 / 18446744073709551616.0 / 18446744073709551616.0;
        let (m, e) = if m >= 1.0 { (0.5, e as i64 + 1) } else { (m, e as i64) };
        (if sign == Sign::Neg { -m } else { m }, e)
    }

    pub fn to_f64(&self) -> f64 {
        let (m, e) = self.to_f64_exp();
        ldexp(m, e)
    }

    /// Approximate `log2 |x|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.to_f64_exp();
        m.abs().log2() + e as f64
    }

    pub fn neg(&self) -> Self {
        Self::wrap(self.v.neg(), self.prec)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.prec)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut v = self.v.clone();
        let e = v.exponent().expect("finite MpFloat") as i64 + k;
        v.set_exponent(e as i32);
        Self::wrap(v, self.prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self::wrap(self.v.add(&o.v, p as usize, RM), p)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self::wrap(self.v.sub(&o.v, p as usize, RM), p)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self::wrap(self.v.mul(&o.v, p as usize, RM), p)
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(n, self.prec))
    }

    pub fn div(&self, o: &Self) -> Self {
        debug_assert!(!o.is_zero(), "MpFloat division by zero");
        let p = self.prec.max(o.prec);
        Self::wrap(self.v.div(&o.v, p as usize, RM), p)
    }

    pub fn div_i64(&self, n: i64) -> Self {
        self.div(&Self::from_i64(n, self.prec))
    }

    pub fn sqrt(&self) -> Self {
        debug_assert!(!self.is_negative(), "square root of a negative MpFloat");
        Self::wrap(self.v.sqrt(self.prec as usize, RM), self.prec)
    }

    pub fn cmp_abs(&self, o: &Self) -> Ordering {
        match self.v.abs_cmp(&o.v) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }

    pub fn pi(prec: u32) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(prec as usize, RM)), prec)
    }

    pub fn ln2(prec: u32) -> Self {
        Self::wrap(with_consts(|cc| cc.ln_2(prec as usize, RM)), prec)
    }

    pub fn exp(&self) -> Self {
        let p = self.prec as usize;
        Self::wrap(with_consts(|cc| self.v.exp(p, RM, cc)), self.prec)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Self {
        debug_assert!(!self.is_negative() && !self.is_zero(), "ln of non-positive MpFloat");
        let p = self.prec as usize;
        Self::wrap(with_consts(|cc| self.v.ln(p, RM, cc)), self.prec)
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let p = self.prec as usize;
        with_consts(|cc| {
            (
                Self::wrap(self.v.sin(p, RM, cc), self.prec),
                Self::wrap(self.v.cos(p, RM, cc), self.prec),
            )
        })
    }

    pub fn sinh_cosh(&self) -> (Self, Self) {
        let p = self.prec as usize;
        with_consts(|cc| {
            (
                Self::wrap(self.v.sinh(p, RM, cc), self.prec),
                Self::wrap(self.v.cosh(p, RM, cc), self.prec),
            )
        })
    }

    pub fn atan(&self) -> Self {
        let p = self.prec as usize;
        Self::wrap(with_consts(|cc| self.v.atan(p, RM, cc)), self.prec)
    }

    /// Four-quadrant arctangent of `y / x`.
    pub fn atan2(y: &Self, x: &Self) -> Self {
        let prec = y.prec.max(x.prec);
        if x.is_zero() {
            let half_pi = Self::pi(prec).mul_pow2(-1);
            return if y.is_negative() {
                half_pi.neg()
            } else if y.is_zero() {
                Self::zero(prec)
            } else {
                half_pi
            };
        }
        let base = y.div(x).atan();
        if x.is_negative() {
            let pi = Self::pi(prec);
            if y.is_negative() {
                base.sub(&pi)
            } else {
                base.add(&pi)
            }
        } else {
            base
        }
    }
}

/// `m · 2^e` without intermediate overflow; saturates to `±inf` / `0`.
pub fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if e > 2100 {
        return m.signum() * f64::INFINITY;
    }
    if e < -2200 {
        return 0.0 * m.signum();
    }
    let mut v = m;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

/// Complex number over [`MpFloat`].
#[derive(Clone, Debug)]
pub struct MpComplex {
    pub re: MpFloat,
    pub im: MpFloat,
}

impl MpComplex {
    pub fn new(re: MpFloat, im: MpFloat) -> Self {
        MpComplex { re, im }
    }

    pub fn from_c64(z: Complex64, prec: u32) -> Self {
        MpComplex {
            re: MpFloat::from_f64(z.re, prec),
            im: MpFloat::from_f64(z.im, prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        MpComplex::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        MpComplex::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> Self {
        MpComplex::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        MpComplex::new(re, im)
    }

    pub fn mul_real(&self, x: &MpFloat) -> Self {
        MpComplex::new(self.re.mul(x), self.im.mul(x))
    }

    /// Multiply by `i`.
    pub fn mul_i(&self) -> Self {
        MpComplex::new(self.im.neg(), self.re.clone())
    }

    pub fn norm_sqr(&self) -> MpFloat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn div(&self, o: &Self) -> Self {
        let d = o.norm_sqr();
        let re = self.re.mul(&o.re).add(&self.im.mul(&o.im)).div(&d);
        let im = self.im.mul(&o.re).sub(&self.re.mul(&o.im)).div(&d);
        MpComplex::new(re, im)
    }

    pub fn log2_abs(&self) -> f64 {
        let a = self.re.log2_abs();
        let b = self.im.log2_abs();
        let hi = a.max(b);
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        let lo = a.min(b);
        hi + 0.5 * (1.0 + (2.0 * (lo - hi)).exp2()).log2()
    }

    pub fn exp(&self) -> Self {
        let r = self.re.exp();
        let (s, c) = self.im.sin_cos();
        MpComplex::new(r.mul(&c), r.mul(&s))
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        if self.im.is_zero() && !self.re.is_negative() && !self.re.is_zero() {
            return MpComplex::new(self.re.ln(), MpFloat::zero(self.im.prec()));
        }
        let wp = self.prec() + 16;
        let re = MpFloat::ln(&self.norm_sqr().with_prec(wp)).mul_pow2(-1);
        let im = MpFloat::atan2(&self.im, &self.re);
        MpComplex::new(re.with_prec(self.prec()), im)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.re.sin_cos();
        let (sh, ch) = self.im.sinh_cosh();
        MpComplex::new(s.mul(&ch), c.mul(&sh))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.re.sin_cos();
        let (sh, ch) = self.im.sinh_cosh();
        MpComplex::new(c.mul(&ch), s.mul(&sh).neg())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        MpComplex::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
