//! The two-piece rising exponential potential
//!
//! ```text
//! V(x) = V1 (1 - e^{-2x/a})   x ≤ 0
//! V(x) = V2 (e^{2x/b} - 1)    x > 0
//! ```
//!
//! and the wavenumbers derived from it at a possibly complex energy.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which closed form applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `V1 > 0`, `V2 > 0`.
    General,
    /// `V1 = 0`: free motion on the left.
    LeftFree,
    /// `V2 = 0`: free motion on the right.
    RightFree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialParams {
    pub a: f64,
    pub b: f64,
    pub v1: f64,
    pub v2: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl PotentialParams {
    /// Parameters in units with `2m = 1 = ħ²`.
    pub fn new(a: f64, b: f64, v1: f64, v2: f64) -> Result<Self> {
        Self::with_units(a, b, v1, v2, 1.0, 0.5)
    }

    pub fn with_units(a: f64, b: f64, v1: f64, v2: f64, hbar: f64, mass: f64) -> Result<Self> {
        let p = PotentialParams {
            a,
            b,
            v1,
            v2,
            hbar,
            mass,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)?;
        for (name, v) in [("V1", self.v1), ("V2", self.v2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.v1 == 0.0 && self.v2 == 0.0 {
            return Err(Error::InvalidParams(
                "V1 and V2 cannot both vanish: the limits of the general amplitude do not commute".into(),
            ));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        if self.v1 == 0.0 {
            Regime::LeftFree
        } else if self.v2 == 0.0 {
            Regime::RightFree
        } else {
            Regime::General
        }
    }

    /// `2m / ħ²`.
    pub fn energy_to_k2(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }

    /// `Δ = ħ² / (2ma²)`.
    pub fn delta(&self) -> f64 {
        1.0 / (self.energy_to_k2() * self.a * self.a)
    }

    pub fn potential(&self, x: f64) -> f64 {
        if x <= 0.0 {
            -self.v1 * (-2.0 * x / self.a).exp_m1()
        } else {
            self.v2 * (2.0 * x / self.b).exp_m1()
        }
    }

    pub fn wavenumbers(&self, e: Complex64, mode: BranchMode) -> Wavenumbers {
        Wavenumbers::new(self, e, mode)
    }

    /// Parse `key = value` lines (`a`, `b`, `V1`, `V2`, `hbar`, `mass`; `#`
    /// starts a comment). `a` or `b` may be omitted when the matching side is
    /// free, `hbar` and `mass` default to `2m = 1 = ħ²`.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 6] = [None; 6];
        const KEYS: [&str; 6] = ["a", "b", "V1", "V2", "hbar", "mass"];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let idx = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if vals[idx].is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            let v = value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {key}: {e}", lineno + 1)))?;
            vals[idx] = Some(v);
        }
        let [a, b, v1, v2, hbar, mass] = vals;
        let v1 = v1.ok_or_else(|| Error::Config("missing key `V1`".into()))?;
        let v2 = v2.ok_or_else(|| Error::Config("missing key `V2`".into()))?;
        let a = match a {
            Some(a) => a,
            None if v1 == 0.0 => 1.0,
            None => return Err(Error::Config("missing key `a`".into())),
        };
        let b = match b {
            Some(b) => b,
            None if v2 == 0.0 => 1.0,
            None => return Err(Error::Config("missing key `b`".into())),
        };
        Self::with_units(a, b, v1, v2, hbar.unwrap_or(1.0), mass.unwrap_or(0.5))
    }
}

/// Sheet of `√(E - V1)` (and `√(E + V2)`) used off the real axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BranchMode {
    /// Principal root; on the cut (real `E < V1`) the limit from above, so
    /// `p = +iκ`.
    #[default]
    Principal,
    /// Below the real axis with `Re E < V1`, the root continued from real
    /// `E < V1` through the cut, i.e. the negative of the principal root.
    ContinuedLower,
}

impl FromStr for BranchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "principal" => Ok(BranchMode::Principal),
            "continued-lower" | "continued_lower" => Ok(BranchMode::ContinuedLower),
            _ => Err(Error::Config(format!("unknown branch mode `{s}`"))),
        }
    }
}

/// `√w` on the sheet selected by `mode`, for `w = c (E - threshold)`.
fn root(w: Complex64, mode: BranchMode) -> Complex64 {
    // a real argument is the limit from above, whatever the sign of its zero
    let w = if w.im == 0.0 { Complex64::new(w.re, 0.0) } else { w };
    let r = w.sqrt();
    match mode {
        BranchMode::ContinuedLower if w.im < 0.0 && w.re < 0.0 => -r,
        _ => r,
    }
}

/// Wavenumbers at energy `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavenumbers {
    pub e: Complex64,
    /// `√(2m(E - V1)) / ħ`
    pub p: Complex64,
    /// `√(2m V1) / ħ`
    pub s: f64,
    /// `√(2m(E + V2)) / ħ`
    pub q: Complex64,
    /// `√(2m V2) / ħ`
    pub u: f64,
    /// `√(V2 / V1)`, absent when `V1 = 0`
    pub eta: Option<f64>,
    /// `√(2mE) / ħ`
    pub k: Complex64,
    /// `-ip`, real and positive below the left threshold
    pub kappa: Complex64,
    /// `ħ² / (2ma²)`
    pub delta: f64,
}

impl Wavenumbers {
    pub fn new(params: &PotentialParams, e: Complex64, mode: BranchMode) -> Self {
        let c = params.energy_to_k2();
        let p = root(c * (e - params.v1), mode);
        Wavenumbers {
            e,
            p,
            s: (c * params.v1).sqrt(),
            q: root(c * (e + params.v2), mode),
            u: (c * params.v2).sqrt(),
            eta: (params.v1 > 0.0).then(|| (params.v2 / params.v1).sqrt()),
            k: root(c * e, mode),
            kappa: Complex64::new(0.0, -1.0) * p,
            delta: params.delta(),
        }
    }
}

/// Built-in parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::P1,
        Preset::P2,
        Preset::P3,
        Preset::P4,
        Preset::P5,
        Preset::P6,
        Preset::P7,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::P1 => "P1",
            Preset::P2 => "P2",
            Preset::P3 => "P3",
            Preset::P4 => "P4",
            Preset::P5 => "P5",
            Preset::P6 => "P6",
            Preset::P7 => "P7",
        }
    }

    /// `(a, b, V1, V2)`.
    pub fn shape(&self) -> (f64, f64, f64, f64) {
        match self {
            Preset::P1 => (1.0, 1.0, 1.0, 1.0),
            Preset::P2 => (1.0, 5.0, 1.0, 1.0),
            Preset::P3 => (1.0, 10.0, 1.0, 1.0),
            Preset::P4 => (1.0, 5.0, 10.0, 1.0),
            Preset::P5 => (0.1, 5.0, 1.0, 1.0),
            Preset::P6 => (0.1, 5.0, 1.0, 0.1),
            // a plays no role when V1 = 0
            Preset::P7 => (1.0, 10.0, 0.0, 2.0),
        }
    }

    pub fn params(&self) -> PotentialParams {
        let (a, b, v1, v2) = self.shape();
        PotentialParams::new(a, b, v1, v2).expect("preset parameters are valid")
    }

    /// Published two-decimal values of the first five poles `E_n - iΓ_n/2`.
    pub fn reference_poles(&self) -> [Complex64; 5] {
        let c = Complex64::new;
        match self {
            Preset::P1 => [c(1.83, -2.49), c(5.39, -6.09), c(10.08, -8.67), c(14.33, -12.50), c(21.63, -15.08)],
            Preset::P2 => [c(1.19, -0.51), c(2.87, -0.84), c(4.71, -1.22), c(6.83, -1.56), c(9.03, -1.74)],
            Preset::P3 => [c(0.77, -0.22), c(1.68, -0.31), c(2.58, -0.39), c(3.51, -0.48), c(4.46, -0.57)],
            Preset::P4 => [c(1.49, -0.29), c(3.29, -0.44), c(5.18, -0.58), c(7.18, -0.72), c(9.29, -0.86)],
            Preset::P5 => [c(1.53, -0.11), c(3.34, -0.16), c(5.23, -0.21), c(7.21, -0.26), c(9.30, -0.31)],
            Preset::P6 => [c(0.46, -0.02), c(1.11, -0.03), c(1.85, -0.05), c(2.69, -0.07), c(3.60, -0.08)],
            Preset::P7 => [c(1.76, -0.91), c(3.16, -1.03), c(4.51, -1.13), c(5.86, -1.22), c(7.22, -1.29)],
        }
    }

    /// Published time-delay peak positions; `None` where no peak exists.
    pub fn reference_peaks(&self) -> [Option<f64>; 5] {
        match self {
            Preset::P1 => [Some(2.09), None, None, None, None],
            Preset::P2 => [Some(1.26), Some(2.98), Some(4.77), Some(6.96), Some(9.13)],
            Preset::P3 => [Some(0.77), Some(1.69), Some(2.58), Some(3.50), Some(4.45)],
            Preset::P4 => [Some(1.46), Some(3.28), Some(5.17), Some(7.19), Some(9.29)],
            Preset::P5 => [Some(1.51), Some(3.33), Some(5.22), Some(7.21), Some(9.29)],
            Preset::P6 => [Some(0.45), Some(1.10), Some(1.84), Some(2.67), Some(3.59)],
            Preset::P7 => [Some(1.89), Some(3.25), Some(4.55), Some(5.88), Some(7.25)],
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}` (expected P1..P7)")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn potential_values() {
        let p = Preset::P1.params();
        assert_eq!(p.potential(0.0), 0.0);
        assert!((p.potential(-0.5) - (1.0 - std::f64::consts::E)).abs() < 1e-14);
        assert!(p.potential(-40.0) < -1e30);
        assert!(p.potential(40.0) > 1e30);
        assert_eq!(p.potential(1e6), f64::INFINITY);
    }

    #[test]
    fn derivative_jump_at_origin() {
        let p = PotentialParams::new(0.7, 2.0, 1.5, 0.4).unwrap();
        let h = 1e-7;
        let left = (p.potential(0.0) - p.potential(-h)) / h;
        let right = (p.potential(h) - p.potential(0.0)) / h;
        let expect = 2.0 * p.v1 / p.a - 2.0 * p.v2 / p.b;
        assert!((left - right - expect).abs() < 1e-5);
    }

    #[test]
    fn wavenumber_examples() {
        let p = Preset::P1.params();
        let w = p.wavenumbers(c(2.0, 0.0), BranchMode::Principal);
        assert!((w.p - c(1.0, 0.0)).norm() < 1e-15 && w.s == 1.0);
        let w = p.wavenumbers(c(0.0, 0.0), BranchMode::Principal);
        assert!((w.p - c(0.0, 1.0)).norm() < 1e-15);
        assert!((w.kappa - c(1.0, 0.0)).norm() < 1e-15);
        // a negative-zero imaginary part is still the limit from above
        let w = p.wavenumbers(c(0.5, -0.0), BranchMode::Principal);
        assert!(w.p.im > 0.0);
        let e = c(1.83, -2.49);
        let w = p.wavenumbers(e, BranchMode::Principal);
        assert!((w.p * w.p - (e - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn branch_modes_differ_only_below_the_cut() {
        let p = Preset::P6.params();
        let below = c(0.46, -0.02);
        let a = p.wavenumbers(below, BranchMode::Principal).p;
        let b = p.wavenumbers(below, BranchMode::ContinuedLower).p;
        assert!((a + b).norm() < 1e-15);
        let right = c(1.5, -0.2);
        assert_eq!(
            p.wavenumbers(right, BranchMode::Principal).p,
            p.wavenumbers(right, BranchMode::ContinuedLower).p
        );
    }

    #[test]
    fn regimes_and_validation() {
        assert_eq!(Preset::P1.params().regime(), Regime::General);
        assert_eq!(Preset::P7.params().regime(), Regime::LeftFree);
        assert_eq!(PotentialParams::new(1.0, 1.0, 1.0, 0.0).unwrap().regime(), Regime::RightFree);
        assert!(PotentialParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(PotentialParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PotentialParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn config_parsing() {
        let p = PotentialParams::from_config("# right-free\na = 1\nV1 = 1 # depth\nV2 = 0\n").unwrap();
        assert_eq!(p.regime(), Regime::RightFree);
        assert_eq!((p.a, p.v1, p.hbar, p.mass), (1.0, 1.0, 1.0, 0.5));
        assert!(PotentialParams::from_config("a = 1\nb = 1\nV1 = 1").is_err());
        assert!(PotentialParams::from_config("a = 1\nb = 1\nV1 = 1\nV2 = x").is_err());
        assert!(PotentialParams::from_config("a = 1\nb = 1\nV1 = 1\nV2 = 1\nc = 3").is_err());
        assert!(PotentialParams::from_config("a = 1\na = 2\nb = 1\nV1 = 1\nV2 = 1").is_err());
    }

    #[test]
    fn presets_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            p.params().validate().unwrap();
        }
        assert!("P8".parse::<Preset>().is_err());
    }

    proptest! {
        #[test]
        fn wavenumber_consistency(a in 0.1..10.0f64, b in 0.1..10.0f64, v1 in 0.1..10.0f64,
                                  v2 in 0.1..10.0f64, er in -5.0..50.0f64, ei in -5.0..5.0f64) {
            let p = PotentialParams::new(a, b, v1, v2).unwrap();
            let w = p.wavenumbers(c(er, ei), BranchMode::Principal);
            let lhs = w.p * w.p + w.s * w.s;
            let rhs = w.q * w.q - w.u * w.u;
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
            let diff = w.p * w.p - w.q * w.q;
            prop_assert!((diff + p.energy_to_k2() * (v1 + v2)).norm() <= 1e-12 * (v1 + v2));
        }

        #[test]
        fn potential_is_monotone(x in -20.0..3.0f64, dx in 1e-3..1.0f64) {
            let p = Preset::P2.params();
            prop_assert!(p.potential(x + dx) > p.potential(x));
        }
    }
}
