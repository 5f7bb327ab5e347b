//! Large-argument expansions of `H^{(1,2)}_ν` and `K_ν`.
//!
//! All use the coefficients `a_k(ν) = a_{k-1} (4ν² - (2k-1)²) / (8k)`. A call
//! returns `None` unless the terms fall below double-precision resolution
//! without first growing, so a `Some` result is accurate to a few ulps.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use super::scaled::Scaled;

/// Smallest `|z|` at which the expansions are attempted.
pub const MIN_ARGUMENT: f64 = 20.0;
const MAX_TERMS: usize = 200;
const EPS: f64 = 1.0 / 18014398509481984.0; // 2^-54
const MAX_GROWTH: f64 = 16.0;

/// Partial sums `Σ c^k a_k z^{-k}` and `Σ -k c^k a_k z^{-k-1}`.
struct Sums {
    s: Complex64,
    d: Complex64,
}

fn sums(nu: Complex64, z: Complex64, c: Complex64) -> Option<Sums> {
    let mu = 4.0 * nu * nu;
    let zi = 1.0 / z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut ck = Complex64::new(1.0, 0.0);
    let mut s = term;
    let mut d = Complex64::new(0.0, 0.0);
    let mut peak = 1.0f64;
    for k in 1..=MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64) * zi;
        ck *= c;
        let size = term.norm();
        peak = peak.max(size);
        if peak > MAX_GROWTH {
            return None;
        }
        s += ck * term;
        d -= k as f64 * ck * term * zi;
        if size * (1.0 + k as f64 * zi.norm()) < EPS * s.norm().min(1.0) {
            return Some(Sums { s, d });
        }
    }
    None
}

fn applicable(z: Complex64) -> bool {
    z.norm() >= MIN_ARGUMENT && z.re > 0.0
}

/// `(H1_ν, H1'_ν, H2_ν, H2'_ν)`.
pub(crate) fn hankel(nu: Complex64, z: Complex64) -> Option<[Scaled; 4]> {
    if !applicable(z) {
        return None;
    }
    let i = Complex64::new(0.0, 1.0);
    let p = sums(nu, z, i)?;
    let m = sums(nu, z, -i)?;
    let omega = z - nu * FRAC_PI_2 - FRAC_PI_4;
    let ln_pref = 0.5 * (2.0 / (PI * z)).ln();
    let e1 = Scaled::exp(i * omega + ln_pref);
    let e2 = Scaled::exp(-i * omega + ln_pref);
    let half_zi = 0.5 / z;
    Some([
        e1 * p.s,
        e1 * ((i - half_zi) * p.s + p.d),
        e2 * m.s,
        e2 * ((-i - half_zi) * m.s + m.d),
    ])
}

/// `(K_ν, K'_ν)`.
pub(crate) fn bessel_k(nu: Complex64, z: Complex64) -> Option<[Scaled; 2]> {
    if !applicable(z) {
        return None;
    }
    let p = sums(nu, z, Complex64::new(1.0, 0.0))?;
    let e = Scaled::exp(0.5 * (PI / (2.0 * z)).ln() - z);
    Some([e * p.s, e * ((-1.0 - 0.5 / z) * p.s + p.d)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_order_is_exact() {
        // K_{1/2}(z) = sqrt(π/2z) e^{-z}; the series terminates after a_0
        let z = Complex64::new(25.0, 3.0);
        let [k, kp] = bessel_k(Complex64::new(0.5, 0.0), z).unwrap();
        let exact = (PI / (2.0 * z)).sqrt() * (-z).exp();
        let err = (k.to_complex() - exact).norm() / exact.norm();
        assert!(err < 1e-14, "{err:e}");
        let exact_d = -exact * (1.0 + 0.5 / z);
        assert!((kp.to_complex() - exact_d).norm() < 1e-14 * exact.norm());
    }

    #[test]
    fn leading_modulus() {
        let [h1, ..] = hankel(Complex64::new(0.0, 0.0), Complex64::new(50.0, 0.0)).unwrap();
        let lead = (2.0 / (PI * 50.0)).sqrt();
        assert!((h1.to_complex().norm() / lead - 1.0).abs() < 0.01);
    }

    #[test]
    fn refuses_large_order() {
        assert!(hankel(Complex64::new(0.0, 12.0), Complex64::new(25.0, 0.0)).is_none());
        assert!(bessel_k(Complex64::new(1.0, 0.0), Complex64::new(5.0, 0.0)).is_none());
    }
}
