//! Complex values carried as `mantissa · 2^exp2`.
//!
//! Factors such as `e^{pπa}` and `K_ν(z)` far in the right tail leave the
//! `f64` range long before the reflection amplitude (a ratio of such values)
//! does. Kernel results are returned in this form and only collapsed to a
//! plain [`Complex64`] by the caller.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::mp::ldexp;

/// `mantissa · 2^exp2` with `max(|re|, |im|)` of the mantissa in `[0.5, 1)`,
/// or an all-zero value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub exp2: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64;
    if e == 0 {
        // subnormal: renormalise through a power-of-two multiply
        let (m, e2) = frexp(x * 2f64.powi(64));
        return (m, e2 - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e - 1022)
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: Complex64::new(0.0, 0.0),
        exp2: 0,
    };

    pub fn new(mantissa: Complex64, exp2: i64) -> Self {
        let big = mantissa.re.abs().max(mantissa.im.abs());
        if big == 0.0 || !big.is_finite() {
            return Scaled { mantissa, exp2: if big == 0.0 { 0 } else { exp2 } };
        }
        let (_, e) = frexp(big);
        Scaled {
            mantissa: Complex64::new(ldexp(mantissa.re, -e), ldexp(mantissa.im, -e)),
            exp2: exp2 + e,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0)
    }

    /// `e^w` without overflow for any finite `w`.
    pub fn exp(w: Complex64) -> Self {
        let n = (w.re / std::f64::consts::LN_2).floor();
        let rest = w.re - n * std::f64::consts::LN_2;
        Self::new(Complex64::from_polar(rest.exp(), w.im), n as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// Collapse to `f64`; saturates to infinity or flushes to zero.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            ldexp(self.mantissa.re, self.exp2),
            ldexp(self.mantissa.im, self.exp2),
        )
    }

    /// True when [`Scaled::to_complex`] would lose the value to underflow.
    pub fn underflows(&self) -> bool {
        !self.is_zero() && self.exp2 < -1070
    }

    pub fn overflows(&self) -> bool {
        self.exp2 > 1023
    }

    /// `ln |self|`.
    pub fn ln_norm(&self) -> f64 {
        self.mantissa.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    pub fn log2_norm(&self) -> f64 {
        self.mantissa.norm().log2() + self.exp2 as f64
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    pub fn conj(&self) -> Self {
        Scaled {
            mantissa: self.mantissa.conj(),
            exp2: self.exp2,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.mantissa * c, self.exp2)
    }

    /// Relative distance `|self - other| / max(|self|, |other|)`.
    pub fn rel_diff(&self, other: &Scaled) -> f64 {
        let d = (*self - *other).log2_norm();
        let m = self.log2_norm().max(other.log2_norm());
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        (d - m).exp2()
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled::new(self.mantissa * o.mantissa, self.exp2 + o.exp2)
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        Scaled::new(self.mantissa / o.mantissa, self.exp2 - o.exp2)
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, o: Scaled) -> Scaled {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let e = self.exp2.max(o.exp2);
        let a = self.mantissa * ldexp(1.0, self.exp2 - e);
        let b = o.mantissa * ldexp(1.0, o.exp2 - e);
        Scaled::new(a + b, e)
    }
}

impl Sub for Scaled {
    type Output = Scaled;
    fn sub(self, o: Scaled) -> Scaled {
        self + (-o)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled {
            mantissa: -self.mantissa,
            exp2: self.exp2,
        }
    }
}

impl Mul<Complex64> for Scaled {
    type Output = Scaled;
    fn mul(self, c: Complex64) -> Scaled {
        self.scale(c)
    }
}

impl From<Complex64> for Scaled {
    fn from(z: Complex64) -> Self {
        Scaled::from_complex(z)
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i)·2^{}", self.mantissa.re, self.mantissa.im, self.exp2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalises_and_collapses() {
        let s = Scaled::from_complex(Complex64::new(3.0, -12.0));
        assert!(s.mantissa.im.abs() >= 0.5 && s.mantissa.im.abs() < 1.0);
        assert_eq!(s.to_complex(), Complex64::new(3.0, -12.0));
    }

    #[test]
    fn exp_beyond_f64_range() {
        let big = Scaled::exp(Complex64::new(1000.0, 0.3));
        let small = Scaled::exp(Complex64::new(-999.0, 0.3));
        let prod = big * small;
        let expect = Complex64::new(1.0, 0.6).exp();
        assert!((prod.to_complex() - expect).norm() < 1e-12 * expect.norm());
        assert!((big.ln_norm() - 1000.0).abs() < 1e-9);
        assert!(big.to_complex().re.is_infinite());
        assert!(small.underflows());
    }

    #[test]
    fn addition_aligns_exponents() {
        let a = Scaled::new(Complex64::new(0.75, 0.0), 2000);
        let b = Scaled::new(Complex64::new(-0.5, 0.25), 1999);
        let s = a + b;
        assert_eq!(s.exp2, 2000);
        assert!((s.mantissa - Complex64::new(0.5, 0.125)).norm() < 1e-16);
        assert!(((a - a).is_zero()));
    }
}
