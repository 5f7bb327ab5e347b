//! The arithmetic the series kernel needs, over either `f64` or [`MpComplex`].

use num_complex::Complex64;

use super::gamma;
use super::mp::{MpComplex, MpFloat};
use super::scaled::Scaled;

pub(crate) trait Field: Clone {
    fn from_c64(z: Complex64, prec: u32) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul_i(&self) -> Self;
    fn scale_i64(&self, n: i64) -> Self;
    fn div_i64(&self, n: i64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn pi(prec: u32) -> Self;
    /// `1 / Γ(self)`.
    fn rgamma(&self) -> Self;
    /// `(mult, log)` with `1/Γ(self) = mult · e^{log}`; `sin_pi` is
    /// `sin(π·self)`.
    fn ln_rgamma(&self, sin_pi: &Self) -> (Self, Self);
    /// Round to working precision `prec` (a no-op for `f64`).
    fn round(&self, prec: u32) -> Self;
    fn log2_abs(&self) -> f64;
    fn to_scaled(&self) -> Scaled;

    fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_c64(Complex64::new(n as f64, 0.0), prec)
    }
}

impl Field for Complex64 {
    fn from_c64(z: Complex64, _prec: u32) -> Self {
        z
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul_i(&self) -> Self {
        Complex64::new(-self.im, self.re)
    }
    fn scale_i64(&self, n: i64) -> Self {
        self * n as f64
    }
    fn div_i64(&self, n: i64) -> Self {
        self / n as f64
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn pi(_prec: u32) -> Self {
        Complex64::new(std::f64::consts::PI, 0.0)
    }
    fn rgamma(&self) -> Self {
        gamma::rgamma_f64(*self)
    }
    fn ln_rgamma(&self, _sin_pi: &Self) -> (Self, Self) {
        gamma::ln_rgamma_f64(*self)
    }
    fn round(&self, _prec: u32) -> Self {
        *self
    }
    fn log2_abs(&self) -> f64 {
        self.norm().log2()
    }
    fn to_scaled(&self) -> Scaled {
        Scaled::from_complex(*self)
    }
}

impl Field for MpComplex {
    fn from_c64(z: Complex64, prec: u32) -> Self {
        MpComplex::from_c64(z, prec)
    }
    fn add(&self, o: &Self) -> Self {
        MpComplex::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        MpComplex::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        MpComplex::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        MpComplex::div(self, o)
    }
    fn neg(&self) -> Self {
        MpComplex::neg(self)
    }
    fn mul_i(&self) -> Self {
        MpComplex::mul_i(self)
    }
    fn scale_i64(&self, n: i64) -> Self {
        MpComplex::new(self.re.mul_i64(n), self.im.mul_i64(n))
    }
    fn div_i64(&self, n: i64) -> Self {
        MpComplex::new(self.re.div_i64(n), self.im.div_i64(n))
    }
    fn exp(&self) -> Self {
        MpComplex::exp(self)
    }
    fn ln(&self) -> Self {
        MpComplex::ln(self)
    }
    fn pi(prec: u32) -> Self {
        MpComplex::new(MpFloat::pi(prec), MpFloat::zero(prec))
    }
    fn rgamma(&self) -> Self {
        gamma::rgamma_mp(self)
    }
    fn ln_rgamma(&self, sin_pi: &Self) -> (Self, Self) {
        gamma::ln_rgamma_mp(self, Some(sin_pi))
    }
    fn round(&self, prec: u32) -> Self {
        self.with_prec(prec)
    }
    fn log2_abs(&self) -> f64 {
        MpComplex::log2_abs(self)
    }
    fn to_scaled(&self) -> Scaled {
        let (mr, er) = self.re.to_f64_exp();
        let (mi, ei) = self.im.to_f64_exp();
        if mr == 0.0 && mi == 0.0 {
            return Scaled::ZERO;
        }
        let e = if mr == 0.0 {
            ei
        } else if mi == 0.0 {
            er
        } else {
            er.max(ei)
        };
        let re = super::mp::ldexp(mr, er - e);
        let im = super::mp::ldexp(mi, ei - e);
        Scaled::new(Complex64::new(re, im), e)
    }
}
