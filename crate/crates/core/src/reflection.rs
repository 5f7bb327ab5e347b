//! Reflection amplitude `r(E)` in closed form.
//!
//! On the left the solution is `A α H2_ν(y) + B β H1_ν(y)` with `ν = ipa`,
//! `y = sa e^{-x/a}`, `α = e^{pπa/2} e^{-iπ/4}`, `β = e^{-pπa/2} e^{iπ/4}`.
//! These prefactors make both terms tend to `√(2/πsa)` times the unit-flux
//! waves `e^{x/2a} e^{∓iy}`, so `r = B/A`. Matching value and slope at
//! `x = 0` against `C K_{iqb}(ub e^{x/b})` gives
//!
//! ```text
//! r = i [η K' H2_{-ν}(sa) + K H2'_{-ν}(sa)] / [η K' H1_ν(sa) + K H1'_ν(sa)]
//! ```
//!
//! where `e^{pπa} H2_ν = H2_{-ν}` has absorbed the exponential prefactor.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BranchMode, PotentialParams, Regime, Wavenumbers};
use crate::specfun::{self, HankelSet, KPair, Scaled};

/// `|D| < POLE_GUARD · |numerator|` is treated as sitting on a pole.
pub const POLE_GUARD: f64 = 1e-13;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Overall phase of the `V2 = 0` amplitude.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RightFreeSign {
    /// `r = +i e^{pπa} (ik H2 + s H2') / (ik H1 + s H1')`, from matching to
    /// the transmitted wave `C e^{ikx}`.
    #[default]
    Matched,
    /// The same expression with the opposite overall sign.
    Flipped,
}

/// Which expression produced a [`ScatterPoint`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScatterRegime {
    General,
    LeftFree,
    RightFree,
    OnePiece,
}

impl From<Regime> for ScatterRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::General => ScatterRegime::General,
            Regime::LeftFree => ScatterRegime::LeftFree,
            Regime::RightFree => ScatterRegime::RightFree,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterPoint {
    pub e: Complex64,
    pub r: Complex64,
    /// Principal phase of `r`.
    pub theta: f64,
    /// `|r|²`
    pub reflectivity: f64,
    /// Transmitted fraction; zero where no transmitted channel exists.
    pub transmittance: f64,
    pub regime: ScatterRegime,
}

/// Evaluation options shared by the closed forms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Options {
    pub branch: BranchMode,
    pub right_free_sign: RightFreeSign,
}

/// Left-side Hankel data at `x = 0`.
pub(crate) struct LeftData {
    pub w: Wavenumbers,
    pub set: HankelSet,
}

pub(crate) fn left_data(params: &PotentialParams, e: Complex64, branch: BranchMode) -> Result<LeftData> {
    let w = params.wavenumbers(e, branch);
    let nu = I * w.p * params.a;
    let set = specfun::hankel_set(nu, Complex64::new(w.s * params.a, 0.0))?;
    Ok(LeftData { w, set })
}

pub(crate) fn right_data(params: &PotentialParams, w: &Wavenumbers) -> Result<KPair> {
    let mu = I * w.q * params.b;
    Ok(specfun::bessel_k_pair(mu, Complex64::new(w.u * params.b, 0.0))?)
}

fn require(params: &PotentialParams, expected: Regime) -> Result<()> {
    let actual = params.regime();
    if actual != expected {
        return Err(Error::WrongRegime { expected, actual });
    }
    Ok(())
}

fn ratio(e: Complex64, num: Scaled, den: Scaled) -> Result<Complex64> {
    if den.is_zero() || (den.log2_norm() - num.log2_norm()).exp2() < POLE_GUARD {
        return Err(Error::PoleProximity(e));
    }
    let r = (num / den).to_complex();
    if r.re.is_finite() && r.im.is_finite() {
        Ok(r)
    } else {
        Err(Error::PoleProximity(e))
    }
}

/// Numerator and denominator of the general amplitude.
fn general_parts(params: &PotentialParams, e: Complex64, branch: BranchMode) -> Result<(Scaled, Scaled, LeftData, KPair)> {
    let left = left_data(params, e, branch)?;
    let kk = right_data(params, &left.w)?;
    let eta = Complex64::new(left.w.eta.expect("general regime has V1 > 0"), 0.0);
    let ek = kk.kp.scale(eta);
    let m = &left.set.minus;
    let p = &left.set.plus;
    let num = (ek * m.h2 + kk.k * m.h2p).scale(I);
    let den = ek * p.h1 + kk.k * p.h1p;
    Ok((num, den, left, kk))
}

/// `r(E)` for `V1, V2 > 0`, with the exponential prefactor absorbed.
pub fn reflection_general(params: &PotentialParams, e: Complex64, branch: BranchMode) -> Result<Complex64> {
    require(params, Regime::General)?;
    let (num, den, ..) = general_parts(params, e, branch)?;
    ratio(e, num, den)
}

/// `r(E)` with the explicit `e^{pπa}` prefactor and `H2_ν` in the
/// numerator. Equal to [`reflection_general`]; kept as a cross-check.
pub fn reflection_form15(params: &PotentialParams, e: Complex64, branch: BranchMode) -> Result<Complex64> {
    require(params, Regime::General)?;
    let left = left_data(params, e, branch)?;
    let kk = right_data(params, &left.w)?;
    let eta = Complex64::new(left.w.eta.expect("general regime has V1 > 0"), 0.0);
    let ek = kk.kp.scale(eta);
    let p = &left.set.plus;
    let pref = Scaled::exp(left.w.p * PI * params.a).scale(I);
    let num = pref * (ek * p.h2 + kk.k * p.h2p);
    let den = ek * p.h1 + kk.k * p.h1p;
    ratio(e, num, den)
}

/// `r(E)` for `V1 = 0`: `(ikK - uK') / (ikK + uK')`.
pub fn reflection_left_free(params: &PotentialParams, e: Complex64, branch: BranchMode) -> Result<Complex64> {
    require(params, Regime::LeftFree)?;
    let w = params.wavenumbers(e, branch);
    let kk = right_data(params, &w)?;
    let ikk = kk.k.scale(I * w.k);
    let ukp = kk.kp.scale(Complex64::new(w.u, 0.0));
    ratio(e, ikk - ukp, ikk + ukp)
}

/// Amplitudes for `V2 = 0`: reflection `r` and transmitted coefficient `C`
/// (of `e^{ikx}`) per unit incident amplitude.
fn right_free_parts(params: &PotentialParams, e: Complex64, opts: Options) -> Result<(Complex64, Scaled, LeftData)> {
    let left = left_data(params, e, opts.branch)?;
    let w = &left.w;
    let ik = I * w.k;
    let s = Complex64::new(w.s, 0.0);
    let m = &left.set.minus;
    let p = &left.set.plus;
    let sign = match opts.right_free_sign {
        RightFreeSign::Matched => 1.0,
        RightFreeSign::Flipped => -1.0,
    };
    let num = (m.h2.scale(ik) + m.h2p.scale(s)).scale(I * sign);
    let den = p.h1.scale(ik) + p.h1p.scale(s);
    let r = ratio(e, num, den)?;
    // C = α H2_ν + r β H1_ν = e^{-pπa/2} (e^{-iπ/4} H2_{-ν} + r e^{iπ/4} H1_ν)
    let damp = Scaled::exp(-0.5 * w.p * PI * params.a);
    let c = damp * (m.h2.scale(Complex64::from_polar(1.0, -FRAC_PI_4)) + p.h1.scale(r * Complex64::from_polar(1.0, FRAC_PI_4)));
    Ok((r, c, left))
}

/// Scatter point for `V2 = 0`, with the transmittance taken from the
/// transmitted flux (not from `1 - |r|²`).
pub fn reflection_right_free(params: &PotentialParams, e: Complex64, opts: Options) -> Result<ScatterPoint> {
    require(params, Regime::RightFree)?;
    let (r, c, left) = right_free_parts(params, e, opts)?;
    let w = &left.w;
    // incident flux of √(2/πsa) ψ_i is (2/πsa)·s; transmitted is |C|² k
    let transmittance = if e.im == 0.0 && e.re > 0.0 {
        let c2 = c.to_complex().norm_sqr();
        c2 * w.k.re * PI * params.a / 2.0
    } else {
        0.0
    };
    Ok(point(e, r, transmittance, ScatterRegime::RightFree))
}

/// Reflectivity of the smooth one-piece potential `V1 (1 - e^{-2x/a})`:
/// `e^{-√((E + V1)/Δ)}` above `V1`, total reflection below.
pub fn reflectivity_one_piece(params: &PotentialParams, e: f64) -> f64 {
    if e > params.v1 {
        (-((e + params.v1) / params.delta()).sqrt()).exp()
    } else {
        1.0
    }
}

/// Analytic function whose zeros are the poles of `r`.
pub fn denominator(params: &PotentialParams, e: Complex64, branch: BranchMode) -> Result<Scaled> {
    match params.regime() {
        Regime::General => Ok(general_parts(params, e, branch)?.1),
        Regime::LeftFree => {
            let w = params.wavenumbers(e, branch);
            let kk = right_data(params, &w)?;
            Ok(kk.k.scale(I * w.k) + kk.kp.scale(Complex64::new(w.u, 0.0)))
        }
        Regime::RightFree => {
            let left = left_data(params, e, branch)?;
            let p = &left.set.plus;
            Ok(p.h1.scale(I * left.w.k) + p.h1p.scale(Complex64::new(left.w.s, 0.0)))
        }
    }
}

fn point(e: Complex64, r: Complex64, transmittance: f64, regime: ScatterRegime) -> ScatterPoint {
    ScatterPoint {
        e,
        r,
        theta: r.arg(),
        reflectivity: r.norm_sqr(),
        transmittance,
        regime,
    }
}

/// Regime dispatcher.
pub fn reflection(params: &PotentialParams, e: Complex64, opts: Options) -> Result<ScatterPoint> {
    match params.regime() {
        Regime::General => Ok(point(e, reflection_general(params, e, opts.branch)?, 0.0, ScatterRegime::General)),
        Regime::LeftFree => Ok(point(e, reflection_left_free(params, e, opts.branch)?, 0.0, ScatterRegime::LeftFree)),
        Regime::RightFree => reflection_right_free(params, e, opts),
    }
}

/// `r` at a real energy with default options.
pub fn r_real(params: &PotentialParams, e: f64) -> Result<Complex64> {
    Ok(reflection(params, Complex64::new(e, 0.0), Options::default())?.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unimodular_on_the_real_axis() {
        let p = Preset::P1.params();
        for e in [-3.0, 0.0, 0.5, 1.0, 2.0, 3.7, 20.0] {
            let r = reflection_general(&p, c(e, 0.0), BranchMode::Principal).unwrap();
            assert!((r.norm() - 1.0).abs() < 1e-10, "E={e}: |r|={}", r.norm());
        }
        let p7 = Preset::P7.params();
        let r = reflection_left_free(&p7, c(1.0, 0.0), BranchMode::Principal).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forms_agree() {
        for (preset, e) in [(Preset::P1, 2.0), (Preset::P2, 5.0), (Preset::P4, 0.3), (Preset::P5, 12.0)] {
            let p = preset.params();
            let a = reflection_general(&p, c(e, 0.0), BranchMode::Principal).unwrap();
            let b = reflection_form15(&p, c(e, 0.0), BranchMode::Principal).unwrap();
            assert!((a - b).norm() < 1e-9, "{preset} E={e}");
        }
    }

    #[test]
    fn denominator_vanishes_at_listed_poles() {
        let cases = [
            (Preset::P1, c(1.8305, -2.4867)),
            (Preset::P2, c(1.19, -0.51)),
            (Preset::P3, c(0.77, -0.22)),
            (Preset::P7, c(1.76, -0.91)),
        ];
        for (preset, pole) in cases {
            let p = preset.params();
            let at = denominator(&p, pole, BranchMode::Principal).unwrap();
            let away = denominator(&p, pole + c(0.3, 0.3), BranchMode::Principal).unwrap();
            assert!(at.log2_norm() < away.log2_norm() - 3.0, "{preset}");
        }
        let d = denominator(&Preset::P1.params(), c(2.0, 0.0), BranchMode::Principal).unwrap();
        assert!(!d.is_zero());
    }

    #[test]
    fn right_free_flux_balance() {
        let p = PotentialParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        for e in [0.05, 0.5, 1.0, 2.0, 7.5, 30.0] {
            let s = reflection_right_free(&p, c(e, 0.0), Options::default()).unwrap();
            assert!((s.reflectivity + s.transmittance - 1.0).abs() < 1e-10, "E={e}");
            assert!(s.reflectivity < 1.0);
        }
        let s = reflection_right_free(&p, c(-0.5, 0.0), Options::default()).unwrap();
        assert!((s.reflectivity - 1.0).abs() < 1e-10);
        assert_eq!(s.transmittance, 0.0);
    }

    #[test]
    fn right_free_sign_flag_flips_r() {
        let p = PotentialParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let a = reflection_right_free(&p, c(2.0, 0.0), Options::default()).unwrap().r;
        let opts = Options {
            right_free_sign: RightFreeSign::Flipped,
            ..Options::default()
        };
        let b = reflection_right_free(&p, c(2.0, 0.0), opts).unwrap().r;
        assert!((a + b).norm() < 1e-14);
    }

    #[test]
    fn one_piece_reflectivity() {
        let p = PotentialParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!((reflectivity_one_piece(&p, 3.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(reflectivity_one_piece(&p, 0.5), 1.0);
        let edge = reflectivity_one_piece(&p, 1.0 + 1e-12);
        assert!((edge - (-(2.0f64).sqrt()).exp()).abs() < 1e-9);
    }

    #[test]
    fn regime_checks() {
        let p7 = Preset::P7.params();
        assert!(matches!(
            reflection_general(&p7, c(1.0, 0.0), BranchMode::Principal),
            Err(Error::WrongRegime { .. })
        ));
        assert_eq!(reflection(&p7, c(1.0, 0.0), Options::default()).unwrap().regime, ScatterRegime::LeftFree);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn unitarity_general(a in 0.1..10.0f64, b in 0.1..10.0f64, v1 in 0.1..10.0f64,
                             v2 in 0.1..10.0f64, e in -5.0..50.0f64) {
            let p = PotentialParams::new(a, b, v1, v2).unwrap();
            let r = reflection_general(&p, c(e, 0.0), BranchMode::Principal).unwrap();
            prop_assert!((r.norm() - 1.0).abs() <= 1e-8, "|r| = {}", r.norm());
        }
    }
}
