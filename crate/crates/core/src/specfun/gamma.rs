//! Complex gamma function.
//!
//! Double precision uses the Lanczos approximation (g = 7, nine terms). The
//! multi-precision path uses Stirling's series after an upward shift of the
//! argument; its Bernoulli numbers come from exactly computed tangent numbers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::mp::{MpComplex, MpFloat};
use super::SpecfunError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// `ln Γ(z)` for `Re z ≥ 0.5`, on some branch of the logarithm.
fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `Γ(z)` for complex `z`, reflecting for `Re z < 0.5`.
pub fn complex_gamma(z: Complex64) -> Result<Complex64, SpecfunError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecfunError::InvalidInput("non-finite gamma argument"));
    }
    if is_gamma_pole(z) {
        return Err(SpecfunError::GammaPole(z.re));
    }
    let g = if z.re < 0.5 {
        let s = (PI * z).sin();
        PI / (s * ln_gamma_lanczos(1.0 - z).exp())
    } else {
        ln_gamma_lanczos(z).exp()
    };
    if g.re.is_finite() && g.im.is_finite() {
        Ok(g)
    } else {
        Err(SpecfunError::Overflow("gamma"))
    }
}

/// `1 / Γ(z)`; entire, so exact zeros at the non-positive integers.
pub(crate) fn rgamma_f64(z: Complex64) -> Complex64 {
    if is_gamma_pole(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        (PI * z).sin() / PI * ln_gamma_lanczos(1.0 - z).exp()
    } else {
        (-ln_gamma_lanczos(z)).exp()
    }
}

const TABLE_PREC: u32 = 2304;
const MAX_TERMS: usize = 120;

/// `B_{2k} / (2k(2k-1))` for `k = 1..=MAX_TERMS`, at `TABLE_PREC` bits.
fn stirling_coefficients() -> &'static [MpFloat] {
    static TABLE: OnceLock<Vec<MpFloat>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = MAX_TERMS;
        let p = TABLE_PREC;
        // tangent numbers, exact in the integer range of the mantissa
        let mut t: Vec<MpFloat> = (0..=n).map(|_| MpFloat::zero(p)).collect();
        t[1] = MpFloat::one(p);
        for k in 2..=n {
            t[k] = t[k - 1].mul_i64(k as i64 - 1);
        }
        for k in 2..=n {
            for j in k..=n {
                t[j] = t[j - 1]
                    .mul_i64((j - k) as i64)
                    .add(&t[j].mul_i64((j - k + 2) as i64));
            }
        }
        (1..=n)
            .map(|k| {
                // B_{2k} = (-1)^{k-1} 2k T_k / (4^k (4^k - 1))
                let four_k = MpFloat::one(p).mul_pow2(2 * k as i64);
                let denom = four_k.mul(&four_k.sub(&MpFloat::one(p)));
                let b = t[k].mul_i64(2 * k as i64).div(&denom);
                let b = if k % 2 == 0 { b.neg() } else { b };
                b.div_i64((2 * k * (2 * k - 1)) as i64)
            })
            .collect()
    })
}

struct StirlingTable {
    coeffs: Vec<MpFloat>,
    half_ln_2pi: MpFloat,
}

thread_local! {
    static TABLES: RefCell<HashMap<u32, Rc<StirlingTable>>> = RefCell::new(HashMap::new());
}

fn stirling_table(prec: u32) -> Rc<StirlingTable> {
    TABLES.with(|cell| {
        cell.borrow_mut()
            .entry(prec)
            .or_insert_with(|| {
                let coeffs = stirling_coefficients()
                    .iter()
                    .map(|c| c.with_prec(prec))
                    .collect();
                let two_pi = MpFloat::pi(prec).mul_pow2(1);
                Rc::new(StirlingTable {
                    coeffs,
                    half_ln_2pi: two_pi.ln().mul_pow2(-1),
                })
            })
            .clone()
    })
}

/// `(prod, lg)` with `Γ(w) = exp(lg) / prod`, for `Re w ≥ 0.5`.
fn gamma_parts(w: &MpComplex, wp: u32) -> (MpComplex, MpComplex) {
    let table = stirling_table(wp);
    // shift so that the truncated series reaches 2^-wp within MAX_TERMS terms
    let radius = (MAX_TERMS as f64 / (PI * std::f64::consts::E))
        * ((wp as f64 + 10.0) / (2.0 * MAX_TERMS as f64)).exp2();
    let radius = radius.max(12.0);
    let w0 = w.to_c64();
    let mut shift = 0i64;
    while (w0 + shift as f64).norm() < radius {
        shift += 1;
    }
    let one = MpComplex::from_c64(Complex64::new(1.0, 0.0), wp);
    let mut prod = one.clone();
    let mut x = w.with_prec(wp);
    for _ in 0..shift {
        prod = prod.mul(&x);
        x = x.add(&one);
    }
    let half = MpFloat::one(wp).mul_pow2(-1);
    let ln_x = x.ln();
    let x_minus_half = MpComplex::new(x.re.sub(&half), x.im.clone());
    let mut lg = x_minus_half
        .mul(&ln_x)
        .sub(&x)
        .add(&MpComplex::new(table.half_ln_2pi.clone(), MpFloat::zero(wp)));
    let inv = one.div(&x);
    let inv2 = inv.mul(&inv);
    let mut pow = inv;
    let cutoff = -(wp as f64) - 8.0;
    for c in &table.coeffs {
        let term = pow.mul_real(c);
        let size = term.log2_abs();
        lg = lg.add(&term);
        if size < cutoff {
            break;
        }
        pow = pow.mul(&inv2);
    }
    (prod, lg)
}

/// `(mult, log)` with `1/Γ(z) = mult · e^{log}`.
pub(crate) fn ln_rgamma_f64(z: Complex64) -> (Complex64, Complex64) {
    if z.re < 0.5 {
        ((PI * z).sin() / PI, ln_gamma_lanczos(1.0 - z))
    } else {
        (Complex64::new(1.0, 0.0), -ln_gamma_lanczos(z))
    }
}

/// Working precision for a gamma evaluation at `w`: `ln Γ` must be accurate
/// in absolute terms before it is exponentiated.
fn gamma_precision(prec: u32, w0: Complex64) -> u32 {
    let lg_scale = (w0.norm() + 16.0) * (w0.norm() + 16.0).ln();
    prec + 32 + lg_scale.log2().ceil().max(0.0) as u32
}

/// `(mult, log)` with `1/Γ(w) = mult · e^{log}`, both at a precision above
/// that of `w`. `sin_pi_w`, if given, must be `sin(πw)`; it saves a
/// transcendental evaluation when `Re w < 1/2`.
pub(crate) fn ln_rgamma_mp(w: &MpComplex, sin_pi_w: Option<&MpComplex>) -> (MpComplex, MpComplex) {
    let w0 = w.to_c64();
    let wp = gamma_precision(w.prec(), w0);
    if w0.re >= 0.5 {
        let (prod, lg) = gamma_parts(w, wp);
        (prod, lg.neg())
    } else {
        // 1/Γ(w) = Γ(1-w) sin(πw) / π
        let one = MpComplex::from_c64(Complex64::new(1.0, 0.0), wp);
        let (prod, lg) = gamma_parts(&one.sub(&w.with_prec(wp)), wp);
        let pi = MpFloat::pi(wp);
        let s = match sin_pi_w {
            Some(s) => s.with_prec(wp),
            None => w.with_prec(wp).mul_real(&pi).sin(),
        };
        (s.div(&prod.mul_real(&pi)), lg)
    }
}

/// `1 / Γ(w)` at the precision of `w`.
pub(crate) fn rgamma_mp(w: &MpComplex) -> MpComplex {
    let prec = w.prec();
    let w0 = w.to_c64();
    if is_gamma_pole(w0) && w.im.is_zero() {
        // only exact integers reach here through the f64 image test
        let r = w.re.sub(&MpFloat::from_f64(w0.re, prec));
        if r.is_zero() {
            return MpComplex::from_c64(Complex64::new(0.0, 0.0), prec);
        }
    }
    let (mult, log) = ln_rgamma_mp(w, None);
    mult.mul(&log.exp()).with_prec(prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn classical_values() {
        let c = |re, im| Complex64::new(re, im);
        assert!(rel(complex_gamma(c(1.0, 0.0)).unwrap(), c(1.0, 0.0)) < 1e-14);
        assert!(rel(complex_gamma(c(0.5, 0.0)).unwrap(), c(PI.sqrt(), 0.0)) < 1e-14);
        assert!(rel(complex_gamma(c(5.0, 0.0)).unwrap(), c(24.0, 0.0)) < 1e-14);
        assert!(rel(complex_gamma(c(-0.5, 0.0)).unwrap(), c(-2.0 * PI.sqrt(), 0.0)) < 1e-14);
    }

    #[test]
    fn poles_are_errors() {
        for n in [0.0, -1.0, -7.0] {
            assert!(matches!(
                complex_gamma(Complex64::new(n, 0.0)),
                Err(SpecfunError::GammaPole(_))
            ));
            assert_eq!(rgamma_f64(Complex64::new(n, 0.0)), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn bernoulli_numbers_are_exact() {
        let c = stirling_coefficients();
        // B_2 = 1/6, B_4 = -1/30, B_12 = -691/2730
        let b2 = c[0].mul_i64(2);
        let b4 = c[1].mul_i64(12);
        let b12 = c[5].mul_i64(132);
        assert_eq!(b2.to_f64(), 1.0 / 6.0);
        assert_eq!(b4.to_f64(), -1.0 / 30.0);
        assert_eq!(b12.to_f64(), -691.0 / 2730.0);
        // B_60 numerator check through the last retained double
        let b60 = c[29].mul_i64(60 * 59).to_f64();
        assert!((b60 / -2.139994925722533e34 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn multiprecision_matches_lanczos() {
        for &(re, im) in &[(0.7, 0.0), (1.0, 1.0), (-3.3, 2.0), (10.0, -25.0), (1.0, 40.0), (-0.5, 0.1)] {
            let z = Complex64::new(re, im);
            let r = rgamma_mp(&MpComplex::from_c64(z, 256)).to_c64();
            assert!(rel(r, 1.0 / complex_gamma(z).unwrap()) < 5e-13, "{z}");
        }
    }

    #[test]
    fn multiprecision_functional_equation() {
        // Γ(w+1) = w Γ(w) checked far beyond double precision
        let w = MpComplex::from_c64(Complex64::new(0.3, 7.25), 400);
        let one = MpComplex::from_c64(Complex64::new(1.0, 0.0), 400);
        let lhs = rgamma_mp(&w);
        let rhs = rgamma_mp(&w.add(&one)).mul(&w);
        assert!(lhs.sub(&rhs).log2_abs() - lhs.log2_abs() < -390.0);
        // reflection branch: Γ(w)Γ(1-w) = π / sin(πw)
        let w = MpComplex::from_c64(Complex64::new(-2.6, 1.5), 300);
        let prod = rgamma_mp(&w).mul(&rgamma_mp(&one.with_prec(300).sub(&w)));
        let pi = MpFloat::pi(300);
        let expect = w.mul_real(&pi).sin().mul_real(&MpFloat::one(300).div(&pi));
        assert!(prod.sub(&expect).log2_abs() - expect.log2_abs() < -290.0);
    }
}
