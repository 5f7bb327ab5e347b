//! Self-check suites: kernel Wronskians and identities, unitarity of the
//! closed forms, and agreement with the integration oracle.
//!
//! Every check draws from a fixed-seed generator, so a suite reports the
//! same numbers on every run.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BranchMode, PotentialParams, Preset, Regime};
use crate::oracle::{self, IntegrationSpec};
use crate::reflection::{self, Options};
use crate::specfun::{self, Scaled};

pub const SEED: u64 = 0x5eed_2019;

pub const WRONSKIAN_TOL: f64 = 1e-9;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const FORM_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-4;
pub const FLUX_TOL: f64 = 1e-6;
pub const MATCH_POINT_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Wronskian,
    Unitarity,
    Oracle,
    Identities,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Wronskian, Suite::Unitarity, Suite::Oracle, Suite::Identities];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Wronskian => "wronskian",
            Suite::Unitarity => "unitarity",
            Suite::Oracle => "oracle",
            Suite::Identities => "identities",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one check: the worst error seen over `count` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub count: usize,
    pub worst: f64,
    pub tol: f64,
    /// Where the worst case occurred.
    pub at: String,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.worst <= self.tol
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} samples={} worst={:.3e} tol={:.0e} at={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.count,
            self.worst,
            self.tol,
            self.at
        )
    }
}

/// Fold `(error, label)` results into a line; evaluation failures count as
/// infinite error.
fn summarise(name: &'static str, tol: f64, results: Vec<Result<(f64, String)>>) -> CheckLine {
    let mut line = CheckLine {
        name,
        count: results.len(),
        worst: 0.0,
        tol,
        at: String::from("-"),
    };
    for r in results {
        let (err, at) = match r {
            Ok((e, at)) if e.is_nan() => (f64::INFINITY, at),
            Ok(v) => v,
            Err(e) => (f64::INFINITY, e.to_string()),
        };
        if err > line.worst || line.at == "-" && err >= line.worst {
            line.worst = err;
            line.at = at;
        }
    }
    line
}

/// `|x y' - x' y - expect|` relative to the larger product.
fn wronskian_error(x: Scaled, xp: Scaled, y: Scaled, yp: Scaled, expect: Complex64) -> f64 {
    let (a, b) = (x * yp, xp * y);
    let scale = a.log2_norm().max(b.log2_norm()).max(expect.norm().log2());
    let err = (a - b - Scaled::from_complex(expect)).log2_norm();
    (err - scale).exp2()
}

/// Orders `|ν| ≤ 5` and arguments `0.1 ≤ |z| ≤ 40`, `|arg z| ≤ 1.4`.
fn order_and_argument(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    let nu = Complex64::from_polar(rng.gen_range(0.0..5.0), rng.gen_range(0.0..2.0 * PI));
    let z = Complex64::from_polar(rng.gen_range(0.1..40.0), rng.gen_range(-1.4..1.4));
    (nu, z)
}

/// Imaginary orders as met in scattering: `ν = iμ`, `|μ| ≤ 40`, real `z`.
fn imaginary_order(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    (
        Complex64::new(0.0, rng.gen_range(-40.0..40.0)),
        Complex64::new(rng.gen_range(0.1..40.0), 0.0),
    )
}

fn draws<T>(n: usize, salt: u64, f: impl Fn(&mut ChaCha8Rng) -> T) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ salt);
    (0..n).map(|_| f(&mut rng)).collect()
}

/// Kernel Wronskians. `perturb` scales `H1` and `I` by `1 + perturb`, which
/// must make the suite fail for any perturbation well above the tolerance.
pub fn wronskian(perturb: f64) -> Vec<CheckLine> {
    let mut pts = draws(200, 1, order_and_argument);
    pts.extend(draws(100, 2, imaginary_order));
    let bump = Complex64::new(1.0 + perturb, 0.0);
    let h: Vec<_> = pts
        .par_iter()
        .map(|&(nu, z)| {
            let p = specfun::hankel_set(nu, z)?.plus;
            let e = wronskian_error(p.h1.scale(bump), p.h1p.scale(bump), p.h2, p.h2p, Complex64::new(0.0, -4.0 / PI) / z);
            Ok((e, format!("nu={nu:.4} z={z:.4}")))
        })
        .collect();
    let k: Vec<_> = pts
        .par_iter()
        .map(|&(nu, z)| {
            let m = specfun::modified_set(nu, z)?;
            let e = wronskian_error(m.i.scale(bump), m.ip.scale(bump), m.k, m.kp, -1.0 / z);
            Ok((e, format!("nu={nu:.4} z={z:.4}")))
        })
        .collect();
    vec![
        summarise("hankel_wronskian", WRONSKIAN_TOL, h),
        summarise("modified_wronskian", WRONSKIAN_TOL, k),
    ]
}

/// Conjugation, order reflection and evenness of `K`, plus agreement of the
/// two printed forms of the general amplitude.
pub fn identities() -> Vec<CheckLine> {
    let conj: Vec<_> = draws(200, 3, imaginary_order)
        .par_iter()
        .map(|&(nu, z)| {
            // [H1_{iμ}(x)]* = H2_{-iμ}(x)
            let a = specfun::hankel_set(nu, z)?;
            let e = a.plus.h1.conj().rel_diff(&a.minus.h2).max(a.plus.h1p.conj().rel_diff(&a.minus.h2p));
            Ok((e, format!("nu={nu:.4} z={z:.4}")))
        })
        .collect();
    let refl: Vec<_> = draws(200, 4, order_and_argument)
        .par_iter()
        .map(|&(nu, z)| {
            let s = specfun::hankel_set(nu, z)?;
            let ep = Scaled::exp(Complex64::new(0.0, PI) * nu);
            let em = Scaled::exp(Complex64::new(0.0, -PI) * nu);
            let e = s.minus.h1.rel_diff(&(ep * s.plus.h1)).max(s.minus.h2.rel_diff(&(em * s.plus.h2)));
            Ok((e, format!("nu={nu:.4} z={z:.4}")))
        })
        .collect();
    let even: Vec<_> = draws(200, 5, order_and_argument)
        .par_iter()
        .map(|&(nu, z)| {
            let a = specfun::bessel_k_pair(nu, z)?;
            let b = specfun::bessel_k_pair(-nu, z)?;
            Ok((a.k.rel_diff(&b.k).max(a.kp.rel_diff(&b.kp)), format!("nu={nu:.4} z={z:.4}")))
        })
        .collect();
    vec![
        summarise("hankel_conjugation", IDENTITY_TOL, conj),
        summarise("order_reflection", IDENTITY_TOL, refl),
        summarise("k_even_in_order", IDENTITY_TOL, even),
        form_equivalence(),
    ]
}

/// Relative difference of the two printed general forms over `E ∈ [0, 30]`
/// for P1–P6.
pub fn form_equivalence() -> CheckLine {
    let cases: Vec<(Preset, f64)> = Preset::ALL[..6]
        .iter()
        .flat_map(|&p| (0..=30).map(move |j| (p, j as f64)))
        .collect();
    let res = cases
        .par_iter()
        .map(|&(preset, e)| {
            let p = preset.params();
            let ec = Complex64::new(e, 0.0);
            let a = reflection::reflection_general(&p, ec, BranchMode::Principal)?;
            let b = reflection::reflection_form15(&p, ec, BranchMode::Principal)?;
            Ok(((a - b).norm() / a.norm(), format!("{preset} E={e}")))
        })
        .collect();
    summarise("form_equivalence", FORM_TOL, res)
}

/// `||r| - 1|` for random general-regime parameters with `E ∈ [-5, 50]` and
/// for `V1 = 0` with `E ∈ (0, 50]`.
pub fn unitarity(n: usize) -> Vec<CheckLine> {
    let general = draws(n, 6, |g| {
        let p = PotentialParams::new(
            g.gen_range(0.1..10.0),
            g.gen_range(0.1..10.0),
            g.gen_range(0.1..10.0),
            g.gen_range(0.1..10.0),
        )
        .expect("drawn parameters are valid");
        (p, g.gen_range(-5.0..50.0))
    });
    let left_free = draws(n / 5, 7, |g| {
        let p = PotentialParams::new(1.0, g.gen_range(0.1..10.0), 0.0, g.gen_range(0.1..10.0)).expect("valid");
        (p, g.gen_range(1e-3..50.0))
    });
    let run = |cases: &[(PotentialParams, f64)]| -> Vec<Result<(f64, String)>> {
        cases
            .par_iter()
            .map(|(p, e)| {
                let r = reflection::r_real(p, *e)?;
                Ok(((r.norm() - 1.0).abs(), format!("a={:.3} b={:.3} V1={:.3} V2={:.3} E={e:.4}", p.a, p.b, p.v1, p.v2)))
            })
            .collect()
    };
    vec![
        summarise("unitarity_general", UNITARITY_TOL, run(&general)),
        summarise("unitarity_left_free", UNITARITY_TOL, run(&left_free)),
    ]
}

/// Parameters used for the `V2 = 0` checks.
pub fn right_free_reference() -> PotentialParams {
    PotentialParams::new(1.0, 1.0, 1.0, 0.0).expect("valid")
}

/// Oracle agreement on `n` random `(system, E)` pairs spanning all three
/// regimes, flux balance for `V2 = 0`, and independence of the matching point.
pub fn oracle_suite(n: usize) -> Vec<CheckLine> {
    let spec = IntegrationSpec::default();
    let systems: Vec<(String, PotentialParams)> = Preset::ALL
        .iter()
        .map(|p| (p.name().to_string(), p.params()))
        .chain(std::iter::once(("V2=0".to_string(), right_free_reference())))
        .collect();
    let cases = draws(n, 8, |g| {
        let k = g.gen_range(0..systems.len());
        (k, g.gen_range(0.05..10.0))
    });
    let agree: Vec<_> = cases
        .par_iter()
        .map(|&(k, e)| {
            let (name, p) = &systems[k];
            let ro = if p.regime() == Regime::RightFree {
                oracle::transmission_oracle(p, e, &spec)?.0
            } else {
                oracle::reflection_oracle(p, Complex64::new(e, 0.0), &spec)?
            };
            let rc = reflection::r_real(p, e)?;
            Ok(((ro - rc).norm(), format!("{name} E={e:.4}")))
        })
        .collect();
    let p = right_free_reference();
    let flux: Vec<_> = draws(20, 9, |g| g.gen_range(0.05..10.0))
        .par_iter()
        .map(|&e| {
            let pt = reflection::reflection(&p, Complex64::new(e, 0.0), Options::default())?;
            let (_, t) = oracle::transmission_oracle(&p, e, &spec)?;
            let err = (pt.reflectivity + pt.transmittance - 1.0).abs().max((pt.transmittance - t).abs());
            Ok((err, format!("E={e:.4}")))
        })
        .collect();
    let barrier: Vec<_> = draws(20, 10, |g| g.gen_range(-5.0..-0.05))
        .par_iter()
        .map(|&e| {
            let rc = reflection::r_real(&p, e)?;
            let (ro, _) = oracle::transmission_oracle(&p, e, &spec)?;
            Ok(((rc.norm_sqr() - 1.0).abs().max((ro.norm_sqr() - 1.0).abs()), format!("E={e:.4}")))
        })
        .collect();
    let matching: Vec<_> = [(Preset::P1, 2.0), (Preset::P2, 5.0), (Preset::P4, 3.3)]
        .par_iter()
        .map(|&(preset, e)| {
            let p = preset.params();
            let at = |x: f64| {
                oracle::reflection_oracle(
                    &p,
                    Complex64::new(e, 0.0),
                    &IntegrationSpec {
                        x_left: Some(x * p.a),
                        ..spec
                    },
                )
            };
            Ok(((at(-8.0)? - at(-9.0)?).norm(), format!("{preset} E={e}")))
        })
        .collect();
    vec![
        summarise("oracle_agreement", ORACLE_TOL, agree),
        summarise("right_free_flux_balance", FLUX_TOL, flux),
        summarise("right_free_total_reflection_below_zero", FLUX_TOL, barrier),
        summarise("oracle_matching_point", MATCH_POINT_TOL, matching),
    ]
}

/// Run one suite with its standard sample counts.
pub fn run(suite: Suite, perturb: f64) -> Vec<CheckLine> {
    match suite {
        Suite::Wronskian => wronskian(perturb),
        Suite::Unitarity => unitarity(1000),
        Suite::Oracle => oracle_suite(50),
        Suite::Identities => identities(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_breaks_the_wronskian() {
        assert!(wronskian(0.0).iter().all(CheckLine::passed));
        assert!(!wronskian(1e-6).iter().all(CheckLine::passed));
    }

    #[test]
    fn identities_hold() {
        for line in identities() {
            assert!(line.passed(), "{line}");
        }
    }

    #[test]
    fn summary_counts_failures_as_infinite() {
        let line = summarise("x", 1.0, vec![Ok((0.5, "a".into())), Err(Error::Config("boom".into()))]);
        assert!(!line.passed());
        assert_eq!(line.worst, f64::INFINITY);
    }
}
