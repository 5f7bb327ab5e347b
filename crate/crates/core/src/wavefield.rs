//! Matched wavefunctions, probability flux and the pole-state envelope test.
//!
//! On the left (`x ≤ 0`, `y = sa e^{-x/a}`, `ν = ipa`)
//!
//! ```text
//! ψ = α H2_ν(y) + r β H1_ν(y) = e^{-pπa/2} [e^{-iπ/4} H2_{-ν}(y) + r e^{iπ/4} H1_ν(y)]
//! ```
//!
//! and on the right `ψ = C K_{iqb}(ub e^{x/b})`. For large `y` the two left
//! terms approach `√(2/πsa)` times
//!
//! ```text
//! ψ_i = e^{x/2a} e^{-iy},   ψ_r = e^{x/2a} e^{+iy}
//! ```
//!
//! A point of constant phase of `ψ_i e^{-iEt/ħ}` obeys `sa e^{-x/a} + Et/ħ =
//! const`, so `x` grows with `t`: `ψ_i` travels toward the potential and
//! `ψ_r` away from it. Neither depends on the energy, and their common
//! envelope `e^{x/2a}` decays toward `-∞`. That is why resonant states of the
//! rising side show no spatial growth even at complex energy.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BranchMode, PotentialParams, Regime};
use crate::specfun::{self, Scaled};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest `y` at which [`asymptotic_waves`] is accepted.
pub const ASYMPTOTIC_THRESHOLD: f64 = 20.0;

/// `ψ` and `dψ/dx` at `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveSample {
    pub x: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Growing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatastropheReport {
    /// `(x_far, x_near)`
    pub window: (f64, f64),
    /// `max|ψ|` over the far third of the window over `max|ψ|` over the near third.
    pub envelope_ratio: f64,
    pub verdict: Verdict,
    /// The ratio lies within 10% of the threshold 1.
    pub marginal: bool,
}

fn left_prefactor(params: &PotentialParams, p: Complex64) -> Scaled {
    Scaled::exp(-0.5 * p * PI * params.a)
}

fn collapse(v: Scaled) -> Complex64 {
    if v.underflows() {
        Complex64::new(0.0, 0.0)
    } else {
        v.to_complex()
    }
}

/// Left-side solution with unit incident amplitude and reflected amplitude `r`.
pub fn psi_left(params: &PotentialParams, e: Complex64, r: Complex64, x: f64) -> Result<WaveSample> {
    let (psi, dpsi) = psi_left_scaled(params, e, r, x)?;
    Ok(WaveSample {
        x,
        psi: collapse(psi),
        dpsi: collapse(dpsi),
    })
}

fn psi_left_scaled(params: &PotentialParams, e: Complex64, r: Complex64, x: f64) -> Result<(Scaled, Scaled)> {
    if x > 0.0 {
        return Err(Error::InvalidParams(format!("psi_left needs x <= 0, got {x}")));
    }
    let w = params.wavenumbers(e, BranchMode::Principal);
    if params.regime() == Regime::LeftFree {
        let ik = I * w.k;
        let fi = (ik * x).exp();
        let fr = r * (-ik * x).exp();
        return Ok((Scaled::from(fi + fr), Scaled::from(ik * (fi - fr))));
    }
    let a = params.a;
    let y = w.s * a * (-x / a).exp();
    let set = specfun::hankel_set(I * w.p * a, Complex64::new(y, 0.0))?;
    let pre = left_prefactor(params, w.p);
    let ci = Complex64::from_polar(1.0, -FRAC_PI_4);
    let cr = r * Complex64::from_polar(1.0, FRAC_PI_4);
    let psi = pre * (set.minus.h2.scale(ci) + set.plus.h1.scale(cr));
    let dpsi = pre * (set.minus.h2p.scale(ci) + set.plus.h1p.scale(cr)).scale(Complex64::new(-y / a, 0.0));
    Ok((psi, dpsi))
}

/// Right-side solution `C K_{iqb}(ub e^{x/b})` (or `C e^{ikx}` when `V2 = 0`).
/// The flag is set when the value has underflowed and is returned as zero.
pub fn psi_right(params: &PotentialParams, e: Complex64, c: Scaled, x: f64) -> Result<(WaveSample, bool)> {
    if x < 0.0 {
        return Err(Error::InvalidParams(format!("psi_right needs x >= 0, got {x}")));
    }
    let w = params.wavenumbers(e, BranchMode::Principal);
    let (psi, dpsi) = if params.regime() == Regime::RightFree {
        let ik = I * w.k;
        let f = (ik * x).exp();
        (c.scale(f), c.scale(ik * f))
    } else {
        let z = w.u * params.b * (x / params.b).exp();
        let kk = specfun::bessel_k_pair(I * w.q * params.b, Complex64::new(z, 0.0))?;
        (c * kk.k, (c * kk.kp).scale(Complex64::new(z / params.b, 0.0)))
    };
    let under = psi.underflows();
    Ok((
        WaveSample {
            x,
            psi: collapse(psi),
            dpsi: collapse(dpsi),
        },
        under,
    ))
}

/// Right-side amplitude `C` fixed by continuity of `ψ` at `x = 0`.
pub fn match_constant(params: &PotentialParams, e: Complex64, r: Complex64) -> Result<Scaled> {
    let (psi0, _) = psi_left_scaled(params, e, r, 0.0)?;
    if params.regime() == Regime::RightFree {
        return Ok(psi0);
    }
    let w = params.wavenumbers(e, BranchMode::Principal);
    let kk = specfun::bessel_k_pair(I * w.q * params.b, Complex64::new(w.u * params.b, 0.0))?;
    if kk.k.is_zero() || (psi0.log2_norm() - kk.k.log2_norm()) > 1000.0 {
        return Err(Error::NonConvergence(format!("K vanishes at the matching point for E = {e}")));
    }
    Ok(psi0 / kk.k)
}

/// Matched scattering solution at `x`, with `r` the reflection amplitude at `e`.
pub fn psi(params: &PotentialParams, e: Complex64, r: Complex64, c: Scaled, x: f64) -> Result<WaveSample> {
    if x <= 0.0 {
        psi_left(params, e, r, x)
    } else {
        Ok(psi_right(params, e, c, x)?.0)
    }
}

/// Probability flux `(ψ* ψ' - ψ'* ψ) / (2imħ)`.
pub fn flux(sample: &WaveSample, params: &PotentialParams) -> f64 {
    (sample.psi.conj() * sample.dpsi).im / (params.mass * params.hbar)
}

/// Leading asymptotic incident and reflected waves `e^{x/2a} e^{∓iy}` with
/// their exact derivatives.
pub fn asymptotic_waves(params: &PotentialParams, x: f64) -> Result<(WaveSample, WaveSample)> {
    if params.regime() == Regime::LeftFree {
        return Err(Error::WrongRegime {
            expected: Regime::General,
            actual: Regime::LeftFree,
        });
    }
    let a = params.a;
    let s = (params.energy_to_k2() * params.v1).sqrt();
    let y = s * a * (-x / a).exp();
    if y < ASYMPTOTIC_THRESHOLD {
        return Err(Error::InvalidParams(format!(
            "x = {x} gives sa e^(-x/a) = {y:.3}, below {ASYMPTOTIC_THRESHOLD}"
        )));
    }
    let env = (x / (2.0 * a)).exp();
    let wave = |sign: f64| {
        let f = env * (I * sign * y).exp();
        WaveSample {
            x,
            psi: f,
            dpsi: f * (1.0 / (2.0 * a) - I * sign * y / a),
        }
    };
    Ok((wave(-1.0), wave(1.0)))
}

/// State at a pole `E`: on the left the outgoing component alone, normalised
/// to `ψ(0) = 1`.
pub fn pole_state_left(params: &PotentialParams, e: Complex64, x: f64) -> Result<Complex64> {
    let w = params.wavenumbers(e, BranchMode::Principal);
    if params.regime() == Regime::LeftFree {
        return Ok((-I * w.k * x).exp());
    }
    let a = params.a;
    let nu = I * w.p * a;
    let h = |y: f64| -> Result<Scaled> { Ok(specfun::hankel_set(nu, Complex64::new(y, 0.0))?.plus.h1) };
    let h0 = h(w.s * a)?;
    let hx = h(w.s * a * (-x / a).exp())?;
    Ok(collapse(hx / h0))
}

/// State at a pole `E` over the whole line: the outgoing left component
/// `H1_ν(y)/H1_ν(sa)` and the decaying right solution `K(z)/K(ub)`, both equal
/// to one at `x = 0`. The derivatives agree at the origin only at an exact pole.
pub fn pole_state(params: &PotentialParams, e: Complex64, x: f64) -> Result<WaveSample> {
    let w = params.wavenumbers(e, BranchMode::Principal);
    let (psi, dpsi) = if x <= 0.0 {
        if params.regime() == Regime::LeftFree {
            let f = (-I * w.k * x).exp();
            (Scaled::from(f), Scaled::from(-I * w.k * f))
        } else {
            let a = params.a;
            let nu = I * w.p * a;
            let y = w.s * a * (-x / a).exp();
            let h0 = specfun::hankel_set(nu, Complex64::new(w.s * a, 0.0))?.plus.h1;
            let hx = specfun::hankel_set(nu, Complex64::new(y, 0.0))?.plus;
            (hx.h1 / h0, (hx.h1p / h0).scale(Complex64::new(-y / a, 0.0)))
        }
    } else if params.regime() == Regime::RightFree {
        let f = (I * w.k * x).exp();
        (Scaled::from(f), Scaled::from(I * w.k * f))
    } else {
        let b = params.b;
        let mu = I * w.q * b;
        let z = w.u * b * (x / b).exp();
        let k0 = specfun::bessel_k_pair(mu, Complex64::new(w.u * b, 0.0))?.k;
        let kx = specfun::bessel_k_pair(mu, Complex64::new(z, 0.0))?;
        (kx.k / k0, (kx.kp / k0).scale(Complex64::new(z / b, 0.0)))
    };
    Ok(WaveSample {
        x,
        psi: collapse(psi),
        dpsi: collapse(dpsi),
    })
}

/// Envelope comparison of `|ψ|` between the far and near thirds of a window.
pub fn envelope_report(window: (f64, f64), samples: &[(f64, Complex64)]) -> CatastropheReport {
    let (far, near) = window;
    let third = (near - far) / 3.0;
    let peak = |lo: f64, hi: f64| {
        samples
            .iter()
            .filter(|(x, _)| *x >= lo && *x <= hi)
            .fold(0.0f64, |m, (_, v)| m.max(v.norm()))
    };
    let ratio = peak(far, far + third) / peak(near - third, near);
    CatastropheReport {
        window,
        envelope_ratio: ratio,
        verdict: if ratio <= 1.0 { Verdict::Bounded } else { Verdict::Growing },
        marginal: (ratio - 1.0).abs() <= 0.1,
    }
}

fn window_grid(x_far: f64, x_near: f64, n: usize) -> Result<Vec<f64>> {
    if !(x_far < x_near && x_near <= 0.0) || n < 6 {
        return Err(Error::InvalidParams(format!(
            "catastrophe window [{x_far}, {x_near}] with {n} points"
        )));
    }
    Ok((0..n)
        .map(|j| x_far + (x_near - x_far) * j as f64 / (n - 1) as f64)
        .collect())
}

/// Envelope test of the pole state over `[x_far, x_near]`.
pub fn catastrophe_metric(params: &PotentialParams, e: Complex64, x_far: f64, x_near: f64, n: usize) -> Result<CatastropheReport> {
    let xs = window_grid(x_far, x_near, n)?;
    let samples = xs
        .iter()
        .map(|&x| Ok((x, pole_state_left(params, e, x)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(envelope_report((x_far, x_near), &samples))
}

/// The same test on a mock state whose envelope `e^{x/2a}` is replaced by
/// `e^{-x/2a}`; it must come out growing.
pub fn catastrophe_metric_mock(params: &PotentialParams, e: Complex64, x_far: f64, x_near: f64, n: usize) -> Result<CatastropheReport> {
    let xs = window_grid(x_far, x_near, n)?;
    let samples = xs
        .iter()
        .map(|&x| Ok((x, pole_state_left(params, e, x)? * (-x / params.a).exp())))
        .collect::<Result<Vec<_>>>()?;
    Ok(envelope_report((x_far, x_near), &samples))
}

/// Default window `[-12a, 0]`.
pub fn default_window(params: &PotentialParams) -> (f64, f64) {
    (-12.0 * params.a, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use crate::reflection::{self, Options};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matched(params: &PotentialParams, e: Complex64) -> (Complex64, Scaled) {
        let r = reflection::reflection(params, e, Options::default()).unwrap().r;
        (r, match_constant(params, e, r).unwrap())
    }

    #[test]
    fn continuous_at_the_origin() {
        for (preset, e) in [(Preset::P2, c(3.0, 0.0)), (Preset::P5, c(1.51, 0.0)), (Preset::P1, c(2.0, -0.3)), (Preset::P7, c(1.0, 0.0))] {
            let p = preset.params();
            let (r, cc) = matched(&p, e);
            let l = psi_left(&p, e, r, 0.0).unwrap();
            let (rt, _) = psi_right(&p, e, cc, 0.0).unwrap();
            assert!((l.psi - rt.psi).norm() <= 1e-10 * l.psi.norm(), "{preset}");
            assert!((l.dpsi - rt.dpsi).norm() <= 1e-9 * l.dpsi.norm().max(l.psi.norm()), "{preset}: {} vs {}", l.dpsi, rt.dpsi);
        }
    }

    #[test]
    fn right_free_continuity() {
        let p = PotentialParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let e = c(2.0, 0.0);
        let (r, cc) = matched(&p, e);
        let l = psi_left(&p, e, r, 0.0).unwrap();
        let (rt, _) = psi_right(&p, e, cc, 0.0).unwrap();
        assert!((l.dpsi - rt.dpsi).norm() <= 1e-9 * l.dpsi.norm());
    }

    #[test]
    fn schrodinger_residual() {
        let p = Preset::P2.params();
        let e = c(3.0, 0.0);
        let (r, cc) = matched(&p, e);
        let k2 = p.energy_to_k2();
        let h = 1e-4;
        for x in [-2.0, -0.7, 0.4, 1.5] {
            let s = |x: f64| psi(&p, e, r, cc, x).unwrap();
            let d2 = (s(x + h).dpsi - s(x - h).dpsi) / (2.0 * h);
            let want = (c(p.potential(x), 0.0) - e) * k2 * s(x).psi;
            assert!((d2 - want).norm() <= 1e-6 * want.norm().max(1e-3), "x={x}: {d2} vs {want}");
        }
    }

    #[test]
    fn total_reflection_carries_no_net_flux() {
        let p = Preset::P1.params();
        let e = c(2.0, 0.0);
        let (r, cc) = matched(&p, e);
        for x in [-6.0, -1.0, 0.5] {
            let s = psi(&p, e, r, cc, x).unwrap();
            let scale = s.psi.norm() * s.dpsi.norm();
            assert!(flux(&s, &p).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn flux_of_simple_waves() {
        let p = Preset::P1.params();
        let k = 1.7;
        let x = 0.3;
        let pw = WaveSample {
            x,
            psi: (I * k * x).exp(),
            dpsi: I * k * (I * k * x).exp(),
        };
        assert!((flux(&pw, &p) - p.hbar * k / p.mass).abs() < 1e-12);
        let real = WaveSample {
            x,
            psi: c(0.3, 0.0),
            dpsi: c(-1.2, 0.0),
        };
        assert_eq!(flux(&real, &p), 0.0);
        let (wi, wr) = asymptotic_waves(&p, -4.0).unwrap();
        let s = (p.energy_to_k2() * p.v1).sqrt();
        let unit = s / (p.mass * p.hbar);
        assert!((flux(&wi, &p) - unit).abs() < 1e-9 * unit);
        assert!((flux(&wr, &p) + unit).abs() < 1e-9 * unit);
        assert!((wi.psi.norm() - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn exact_left_solution_approaches_asymptotic_form() {
        let p = Preset::P1.params();
        let e = c(2.0, 0.0);
        let x = -8.0;
        let s = (p.energy_to_k2() * p.v1).sqrt();
        let y = s * p.a * (-x / p.a).exp();
        let exact = psi_left(&p, e, c(0.0, 0.0), x).unwrap().psi;
        let (wi, _) = asymptotic_waves(&p, x).unwrap();
        let ratio = exact / (wi.psi * (2.0 / (PI * s * p.a)).sqrt());
        assert!((ratio - 1.0).norm() < 2.0 / y, "{ratio}");
        assert!(asymptotic_waves(&p, 0.0).is_err());
    }

    #[test]
    fn pole_states_are_bounded() {
        let p1 = Preset::P1.params();
        let pole = c(1.8305, -2.4867);
        let rep = catastrophe_metric(&p1, pole, -12.0, 0.0, 400).unwrap();
        assert_eq!(rep.verdict, Verdict::Bounded, "{rep:?}");
        let mock = catastrophe_metric_mock(&p1, pole, -12.0, 0.0, 400).unwrap();
        assert_eq!(mock.verdict, Verdict::Growing, "{mock:?}");
        let p3 = Preset::P3.params();
        let rep = catastrophe_metric(&p3, c(0.7712, -0.2195), -12.0, 0.0, 400).unwrap();
        assert_eq!(rep.verdict, Verdict::Bounded);
    }

    #[test]
    fn matching_constant_diverges_near_a_pole() {
        let p = Preset::P2.params();
        let pole = crate::spectral::find_poles(
            &p,
            crate::spectral::Region {
                re_min: 0.0,
                re_max: 3.0,
                im_min: -2.0,
                im_max: 0.0,
            },
            &[c(1.2, -0.5)],
        )
        .unwrap()[0]
            .pole;
        let amp = |d: f64| {
            let e = pole + c(d, 0.0);
            let r = reflection::reflection_general(&p, e, BranchMode::Principal).unwrap();
            match_constant(&p, e, r).unwrap().to_complex().norm()
        };
        let ratio = amp(1e-4) / amp(1e-3);
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn pole_state_derivative_is_continuous_only_at_the_pole() {
        let p = Preset::P1.params();
        let region = crate::spectral::Region {
            re_min: 0.0,
            re_max: 4.0,
            im_min: -4.0,
            im_max: 0.0,
        };
        let pole = crate::spectral::find_poles(&p, region, &[c(1.8, -2.5)]).unwrap()[0].pole;
        let jump = |e: Complex64| {
            let l = pole_state(&p, e, 0.0).unwrap();
            let r = pole_state(&p, e, 1e-300).unwrap();
            assert!((l.psi - 1.0).norm() < 1e-12 && (r.psi - 1.0).norm() < 1e-12);
            (l.dpsi - r.dpsi).norm()
        };
        assert!(jump(pole) < 1e-8, "{}", jump(pole));
        assert!(jump(pole + c(0.1, 0.0)) > 1e-3);
    }
}
