//! Cylindrical Bessel functions of complex order and argument.
//!
//! Two evaluation routes are used:
//!
//! * the large-argument expansion ([`asymptotic`]) when it converges to
//!   double precision, and
//! * the ascending series for `J_{±ν}` / `I_{±ν}`, combined into Hankel
//!   functions and `K_ν`.
//!
//! The series route cancels heavily once `|z|` or `|Im ν|` grows (forming
//! `K_{iμ}` from `I_{±iμ}` loses about `πμ/ln 2` bits), so it first runs in
//! `f64` when the predicted loss is small and otherwise in multi-precision
//! arithmetic at a width chosen from the measured loss. Orders within `1e-6`
//! of an integer are handled by Richardson extrapolation over `ν ± h`,
//! `ν ± 2h`.
//!
//! Results that may leave the `f64` range are returned as [`Scaled`].

pub mod asymptotic;
mod field;
mod gamma;
pub mod mp;
pub mod scaled;
mod series;

use num_complex::Complex64;
use thiserror::Error;

use field::Field;
use mp::MpComplex;
pub use gamma::complex_gamma;
pub use scaled::Scaled;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("argument is zero")]
    ZeroArgument,
    #[error("gamma function pole at {0}")]
    GammaPole(f64),
    #[error("{0} did not converge within the precision budget")]
    NonConvergence(&'static str),
    #[error("{0} overflows double precision")]
    Overflow(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

type Result<T> = std::result::Result<T, SpecfunError>;

/// Bits of agreement required of a multi-precision result.
const TARGET_BITS: f64 = 60.0;
/// Bits of agreement required of an `f64` series result.
const TARGET_BITS_F64: f64 = 44.0;
/// Working precision ceiling.
pub const MAX_PRECISION: u32 = 2048;
const NEAR_INTEGER: f64 = 1e-6;
const RICHARDSON_STEP: f64 = 1e-5;

/// `H^{(1)}`, `H^{(2)}` and their derivatives at one order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HankelPair {
    pub h1: Scaled,
    pub h1p: Scaled,
    pub h2: Scaled,
    pub h2p: Scaled,
}

/// Hankel functions at orders `ν` (`plus`) and `-ν` (`minus`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HankelSet {
    pub plus: HankelPair,
    pub minus: HankelPair,
}

/// `K_ν(z)` and `K'_ν(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KPair {
    pub k: Scaled,
    pub kp: Scaled,
}

/// `I_ν`, `K_ν` and derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModifiedSet {
    pub i: Scaled,
    pub ip: Scaled,
    pub k: Scaled,
    pub kp: Scaled,
}

trait Blend: Sized + Copy {
    fn map2(a: &Self, b: &Self, f: &dyn Fn(Scaled, Scaled) -> Scaled) -> Self;
}

impl Blend for Scaled {
    fn map2(a: &Self, b: &Self, f: &dyn Fn(Scaled, Scaled) -> Scaled) -> Self {
        f(*a, *b)
    }
}

impl Blend for HankelPair {
    fn map2(a: &Self, b: &Self, f: &dyn Fn(Scaled, Scaled) -> Scaled) -> Self {
        HankelPair {
            h1: f(a.h1, b.h1),
            h1p: f(a.h1p, b.h1p),
            h2: f(a.h2, b.h2),
            h2p: f(a.h2p, b.h2p),
        }
    }
}

impl Blend for HankelSet {
    fn map2(a: &Self, b: &Self, f: &dyn Fn(Scaled, Scaled) -> Scaled) -> Self {
        HankelSet {
            plus: HankelPair::map2(&a.plus, &b.plus, f),
            minus: HankelPair::map2(&a.minus, &b.minus, f),
        }
    }
}

impl Blend for ModifiedSet {
    fn map2(a: &Self, b: &Self, f: &dyn Fn(Scaled, Scaled) -> Scaled) -> Self {
        ModifiedSet {
            i: f(a.i, b.i),
            ip: f(a.ip, b.ip),
            k: f(a.k, b.k),
            kp: f(a.kp, b.kp),
        }
    }
}

impl Blend for KPair {
    fn map2(a: &Self, b: &Self, f: &dyn Fn(Scaled, Scaled) -> Scaled) -> Self {
        KPair {
            k: f(a.k, b.k),
            kp: f(a.kp, b.kp),
        }
    }
}

fn near_integer(nu: Complex64) -> bool {
    nu.im.abs() < NEAR_INTEGER && (nu.re - nu.re.round()).abs() < NEAR_INTEGER
}

/// `(4 avg(h) - avg(2h)) / 3` over `ν ± h`, `ν ± 2h`.
fn richardson<T: Blend>(nu: Complex64, eval: impl Fn(Complex64) -> Result<T>) -> Result<T> {
    let h = RICHARDSON_STEP;
    let a = eval(nu + h)?;
    let b = eval(nu - h)?;
    let c = eval(nu + 2.0 * h)?;
    let d = eval(nu - 2.0 * h)?;
    let near = T::map2(&a, &b, &|x, y| x + y);
    let far = T::map2(&c, &d, &|x, y| x + y);
    Ok(T::map2(&near, &far, &|x, y| {
        (x.scale(Complex64::new(2.0, 0.0)) - y.scale(Complex64::new(0.5, 0.0)))
            .scale(Complex64::new(1.0 / 3.0, 0.0))
    }))
}

fn round_prec(bits: f64) -> u32 {
    (((bits.max(64.0)) / 64.0).ceil() * 64.0) as u32
}

/// Runs a series evaluation in `f64` when that is predicted to suffice, then
/// in multi-precision, raising the width until the measured loss leaves
/// [`TARGET_BITS`] of accuracy.
fn adaptive<T>(
    predicted_loss: f64,
    f64_ok: bool,
    eval_f64: impl Fn() -> Result<(T, f64)>,
    eval_mp: impl Fn(u32) -> Result<(T, f64)>,
) -> Result<T> {
    if f64_ok && predicted_loss <= 53.0 - TARGET_BITS_F64 {
        if let Ok((v, loss)) = eval_f64() {
            if 53.0 - loss >= TARGET_BITS_F64 {
                return Ok(v);
            }
        }
    }
    let mut prec = round_prec(predicted_loss + TARGET_BITS + 24.0);
    for _ in 0..6 {
        if prec > MAX_PRECISION {
            break;
        }
        let (v, loss) = eval_mp(prec)?;
        if !loss.is_finite() {
            break;
        }
        if prec as f64 - loss >= TARGET_BITS {
            return Ok(v);
        }
        log::trace!("specfun: {loss:.0} bits lost at {prec}, retrying");
        prec = round_prec(loss + TARGET_BITS + 32.0).max(prec + 64);
    }
    Err(SpecfunError::NonConvergence("series evaluation"))
}

fn check_args(nu: Complex64, z: Complex64) -> Result<()> {
    if !(nu.re.is_finite() && nu.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecfunError::InvalidInput("non-finite order or argument"));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(SpecfunError::ZeroArgument);
    }
    Ok(())
}

fn f64_feasible(nu: Complex64) -> bool {
    nu.norm() <= 20.0 && nu.im.abs() * std::f64::consts::PI < 600.0
}

fn sin_pi_bits(nu: Complex64) -> f64 {
    let s = (std::f64::consts::PI * nu).sin().norm();
    (-s.log2()).max(0.0)
}

/// Predicted cancellation in the `J` series (the terms follow `I_ν(|z|)`).
fn j_series_bits(nu: Complex64, z: Complex64) -> f64 {
    std::f64::consts::LOG2_E * (z.norm() - 0.5 * nu.norm()).max(0.0)
}

fn i_series_bits(z: Complex64) -> f64 {
    std::f64::consts::LOG2_E * (z.norm() - z.re).max(0.0)
}

fn hankel_series(nu: Complex64, z: Complex64) -> Result<HankelSet> {
    let predicted = j_series_bits(nu, z) + sin_pi_bits(nu);
    let pack = |h: series::Hankel<Complex64>| (h.h1, h.h1p, h.h2, h.h2p, h.h1m, h.h1mp, h.h2m, h.h2mp);
    let build = |v: [Scaled; 8]| HankelSet {
        plus: HankelPair { h1: v[0], h1p: v[1], h2: v[2], h2p: v[3] },
        minus: HankelPair { h1: v[4], h1p: v[5], h2: v[6], h2p: v[7] },
    };
    adaptive(
        predicted,
        f64_feasible(nu),
        || {
            let h = series::hankel::<Complex64>(nu, z, 53)?;
            let loss = h.loss;
            let v = pack(h);
            let arr = [v.0, v.1, v.2, v.3, v.4, v.5, v.6, v.7];
            if arr.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(SpecfunError::Overflow("f64 series"));
            }
            Ok((build(arr.map(Scaled::from_complex)), loss))
        },
        |prec| {
            let h = series::hankel::<MpComplex>(nu, z, prec)?;
            let arr = [&h.h1, &h.h1p, &h.h2, &h.h2p, &h.h1m, &h.h1mp, &h.h2m, &h.h2mp];
            Ok((build(arr.map(|c| c.to_scaled())), h.loss))
        },
    )
}

fn modified_series(nu: Complex64, z: Complex64) -> Result<ModifiedSet> {
    let predicted = i_series_bits(z)
        + sin_pi_bits(nu)
        + std::f64::consts::LOG2_E
            * (std::f64::consts::PI * nu.im.abs() + 2.0 * (z.re - 0.5 * nu.re.abs()).max(0.0));
    adaptive(
        predicted,
        f64_feasible(nu),
        || {
            let m = series::modified::<Complex64>(nu, z, 53)?;
            let arr = [m.i, m.ip, m.k, m.kp];
            if arr.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(SpecfunError::Overflow("f64 series"));
            }
            let [i, ip, k, kp] = arr.map(Scaled::from_complex);
            Ok((ModifiedSet { i, ip, k, kp }, m.loss))
        },
        |prec| {
            let m = series::modified::<MpComplex>(nu, z, prec)?;
            let [i, ip, k, kp] = [&m.i, &m.ip, &m.k, &m.kp].map(|c| c.to_scaled());
            Ok((ModifiedSet { i, ip, k, kp }, m.loss))
        },
    )
}

fn hankel_from_asymptotic(nu: Complex64, z: Complex64) -> Option<HankelSet> {
    let [h1, h1p, h2, h2p] = asymptotic::hankel(nu, z)?;
    // H1_{-ν} = e^{iνπ} H1_ν,  H2_{-ν} = e^{-iνπ} H2_ν
    let i_pi_nu = Complex64::new(0.0, std::f64::consts::PI) * nu;
    let ep = Scaled::exp(i_pi_nu);
    let em = Scaled::exp(-i_pi_nu);
    Some(HankelSet {
        plus: HankelPair { h1, h1p, h2, h2p },
        minus: HankelPair {
            h1: ep * h1,
            h1p: ep * h1p,
            h2: em * h2,
            h2p: em * h2p,
        },
    })
}

/// Hankel functions of both kinds at orders `±ν`, with derivatives.
pub fn hankel_set(nu: Complex64, z: Complex64) -> Result<HankelSet> {
    check_args(nu, z)?;
    if let Some(set) = hankel_from_asymptotic(nu, z) {
        return Ok(set);
    }
    if near_integer(nu) {
        return richardson(nu, |v| hankel_series(v, z));
    }
    hankel_series(nu, z)
}

/// `K_ν(z)` and `K'_ν(z)`.
pub fn bessel_k_pair(nu: Complex64, z: Complex64) -> Result<KPair> {
    check_args(nu, z)?;
    if let Some([k, kp]) = asymptotic::bessel_k(nu, z) {
        return Ok(KPair { k, kp });
    }
    let m = modified_set(nu, z)?;
    Ok(KPair { k: m.k, kp: m.kp })
}

/// `I_ν`, `I'_ν`, `K_ν`, `K'_ν`, all from the ascending series.
pub fn modified_set(nu: Complex64, z: Complex64) -> Result<ModifiedSet> {
    check_args(nu, z)?;
    if near_integer(nu) {
        return richardson(nu, |v| modified_series(v, z));
    }
    modified_series(nu, z)
}

/// A single ascending series `C_ν` (no combination), with its derivative.
fn single_series(nu: Complex64, z: Complex64, sigma: i64) -> Result<(Scaled, Scaled)> {
    // C_{-n} = (±1)^n C_n: the series form has a removable 0·∞ there
    if nu.im == 0.0 && nu.re < 0.0 && nu.re.fract() == 0.0 {
        let n = -nu.re;
        let (v, d) = single_series(Complex64::new(n, 0.0), z, sigma)?;
        let sign = if sigma < 0 && (n as i64) % 2 == 1 { -1.0 } else { 1.0 };
        let c = Complex64::new(sign, 0.0);
        return Ok((v.scale(c), d.scale(c)));
    }
    let predicted = if sigma < 0 { j_series_bits(nu, z) } else { i_series_bits(z) };
    adaptive(
        predicted,
        f64_feasible(nu),
        || {
            let s = series::single::<Complex64>(nu, z, sigma, 53)?;
            if !(s.value.re.is_finite() && s.value.im.is_finite() && s.deriv.re.is_finite()) {
                return Err(SpecfunError::Overflow("f64 series"));
            }
            Ok(((Scaled::from_complex(s.value), Scaled::from_complex(s.deriv)), s.loss))
        },
        |prec| {
            let s = series::single::<MpComplex>(nu, z, sigma, prec)?;
            Ok(((s.value.to_scaled(), s.deriv.to_scaled()), s.loss))
        },
    )
}

fn collapse(s: Scaled, what: &'static str) -> Result<Complex64> {
    if s.overflows() || !s.is_finite() {
        return Err(SpecfunError::Overflow(what));
    }
    Ok(s.to_complex())
}

/// `J_ν(z)`.
pub fn bessel_j(nu: Complex64, z: Complex64) -> Result<Complex64> {
    check_args(nu, z)?;
    if let Some(set) = hankel_from_asymptotic(nu, z) {
        let half = Complex64::new(0.5, 0.0);
        return collapse((set.plus.h1 + set.plus.h2).scale(half), "J");
    }
    collapse(single_series(nu, z, -1)?.0, "J")
}

/// `Y_ν(z) = (H1_ν - H2_ν) / 2i`.
pub fn bessel_y(nu: Complex64, z: Complex64) -> Result<Complex64> {
    let p = hankel_set(nu, z)?.plus;
    collapse((p.h1 - p.h2).scale(Complex64::new(0.0, -0.5)), "Y")
}

pub fn hankel1(nu: Complex64, z: Complex64) -> Result<Complex64> {
    collapse(hankel_set(nu, z)?.plus.h1, "H1")
}

pub fn hankel2(nu: Complex64, z: Complex64) -> Result<Complex64> {
    collapse(hankel_set(nu, z)?.plus.h2, "H2")
}

pub fn hankel1_deriv(nu: Complex64, z: Complex64) -> Result<Complex64> {
    collapse(hankel_set(nu, z)?.plus.h1p, "H1'")
}

pub fn hankel2_deriv(nu: Complex64, z: Complex64) -> Result<Complex64> {
    collapse(hankel_set(nu, z)?.plus.h2p, "H2'")
}

/// `I_ν(z)`.
pub fn bessel_i(nu: Complex64, z: Complex64) -> Result<Complex64> {
    check_args(nu, z)?;
    collapse(single_series(nu, z, 1)?.0, "I")
}

/// `K_ν(z)`.
pub fn bessel_k(nu: Complex64, z: Complex64) -> Result<Complex64> {
    collapse(bessel_k_pair(nu, z)?.k, "K")
}

pub fn bessel_k_deriv(nu: Complex64, z: Complex64) -> Result<Complex64> {
    collapse(bessel_k_pair(nu, z)?.kp, "K'")
}
