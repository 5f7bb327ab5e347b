//! Phase curves, Wigner time delays, time-delay peaks and resonance poles.
//!
//! With `r(E) = e^{iθ(E)}` the time delay is `τ = ħ dθ/dE`. Poles of `r` are
//! the zeros of [`denominator`] in the lower half plane; they are located
//! with Muller's method, seeded from time-delay peaks and from local minima
//! of `|D|` on a coarse grid.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BranchMode, PotentialParams};
use crate::reflection::{denominator, reflection, Options};
use crate::specfun::Scaled;

/// Largest number of grid points `phase_scan` may hold after refinement.
const MAX_REFINED_POINTS: usize = 1 << 20;
/// Smallest interval `phase_scan` will bisect.
const MIN_INTERVAL: f64 = 1e-12;
/// Peaks below this fraction of `max τ` in prominence are discarded.
pub const PROMINENCE_FLOOR: f64 = 1e-3;
/// Golden-section tolerance on a peak position.
pub const PEAK_TOL: f64 = 1e-4;
/// Muller iteration cap per seed.
const MAX_ITER: usize = 80;
/// Poles closer than this are merged.
const MERGE_TOL: f64 = 1e-6;
/// Grid spacing and depth of the `|D|` seed scan.
const SEED_STEP: f64 = 0.5;
const SEED_DEPTH: f64 = 20.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseCurve {
    pub energies: Vec<f64>,
    /// Unwrapped phase of `r`.
    pub theta: Vec<f64>,
    /// Time delay `ħ dθ/dE`.
    pub tau: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonance {
    pub pole: Complex64,
    /// `Re 𝓔`
    pub energy: f64,
    /// `-2 Im 𝓔`
    pub gamma: f64,
    /// Matched time-delay peak, if any.
    pub peak: Option<f64>,
    /// `E_n / Γ_n`
    pub quality: f64,
}

impl Resonance {
    pub fn new(pole: Complex64, peak: Option<f64>) -> Self {
        let gamma = -2.0 * pole.im;
        Resonance {
            pole,
            energy: pole.re,
            gamma,
            peak,
            quality: pole.re / gamma,
        }
    }
}

/// Axis-aligned rectangle in the complex energy plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Phase difference `θ(b) - θ(a)` reduced to `(-π, π]`.
fn phase_step(ra: Complex64, rb: Complex64) -> f64 {
    (rb * ra.conj()).arg()
}

fn r_at(params: &PotentialParams, e: f64) -> Result<Complex64> {
    Ok(reflection(params, Complex64::new(e, 0.0), Options::default())?.r)
}

fn eval_all(params: &PotentialParams, es: &[f64]) -> Result<Vec<Complex64>> {
    es.par_iter().map(|&e| r_at(params, e)).collect()
}

fn uniform(emin: f64, emax: f64, n: usize) -> Vec<f64> {
    let h = (emax - emin) / (n - 1) as f64;
    (0..n)
        .map(|j| if j + 1 == n { emax } else { emin + h * j as f64 })
        .collect()
}

/// Sample `r` on a uniform grid and bisect every interval whose phase step
/// is not below `π/2`. Returns the refined energies with their amplitudes.
fn refined_grid(params: &PotentialParams, emin: f64, emax: f64, n: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    if !(emin < emax) || n < 2 {
        return Err(Error::InvalidParams(format!("empty energy range [{emin}, {emax}] with {n} points")));
    }
    let mut es = uniform(emin, emax, n);
    let mut rs = eval_all(params, &es)?;
    loop {
        let bad: Vec<usize> = (0..es.len() - 1)
            .filter(|&j| phase_step(rs[j], rs[j + 1]).abs() >= PI / 2.0)
            .collect();
        if bad.is_empty() {
            return Ok((es, rs));
        }
        if let Some(&j) = bad.iter().find(|&&j| es[j + 1] - es[j] < MIN_INTERVAL) {
            return Err(Error::RefinementBudget { lo: es[j], hi: es[j + 1] });
        }
        if es.len() + bad.len() > MAX_REFINED_POINTS {
            let j = bad[0];
            return Err(Error::RefinementBudget { lo: es[j], hi: es[j + 1] });
        }
        let mids: Vec<f64> = bad.iter().map(|&j| 0.5 * (es[j] + es[j + 1])).collect();
        let rm = eval_all(params, &mids)?;
        let mut ne = Vec::with_capacity(es.len() + mids.len());
        let mut nr = Vec::with_capacity(es.len() + mids.len());
        let mut k = 0;
        for j in 0..es.len() {
            ne.push(es[j]);
            nr.push(rs[j]);
            if k < bad.len() && bad[k] == j {
                ne.push(mids[k]);
                nr.push(rm[k]);
                k += 1;
            }
        }
        es = ne;
        rs = nr;
    }
}

fn unwrap(rs: &[Complex64]) -> Vec<f64> {
    let mut theta = Vec::with_capacity(rs.len());
    let mut t = rs[0].arg();
    theta.push(t);
    for w in rs.windows(2) {
        t += phase_step(w[0], w[1]);
        theta.push(t);
    }
    theta
}

/// Unwrapped phase and time delay on `[emin, emax]`, starting from `n`
/// uniform points and refined until every phase step is below `π/2`. The
/// time delay at each point comes from [`time_delay`].
pub fn phase_scan(params: &PotentialParams, emin: f64, emax: f64, n: usize) -> Result<PhaseCurve> {
    let (energies, rs) = refined_grid(params, emin, emax, n)?;
    let theta = unwrap(&rs);
    let tau = energies
        .par_iter()
        .map(|&e| time_delay(params, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseCurve { energies, theta, tau })
}

/// Like [`phase_scan`] but with the time delay taken from the grid itself
/// (three-point differences on the possibly non-uniform grid). Much cheaper;
/// accurate enough to locate peaks before refinement.
pub fn phase_scan_coarse(params: &PotentialParams, emin: f64, emax: f64, n: usize) -> Result<PhaseCurve> {
    let (energies, rs) = refined_grid(params, emin, emax, n)?;
    let theta = unwrap(&rs);
    let tau = grid_derivative(&energies, &theta)
        .into_iter()
        .map(|d| params.hbar * d)
        .collect();
    Ok(PhaseCurve { energies, theta, tau })
}

/// Second-order derivative of `f` on a non-uniform grid.
fn grid_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        let d = (f[n - 1] - f[0]) / (x[n - 1] - x[0]);
        return vec![d; n];
    }
    let three_point = |i0: usize, at: usize| {
        let (x0, x1, x2) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let (f0, f1, f2) = (f[i0], f[i0 + 1], f[i0 + 2]);
        let t = x[at];
        f0 * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + f1 * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + f2 * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| match i {
            0 => three_point(0, 0),
            i if i == n - 1 => three_point(n - 3, i),
            i => three_point(i - 1, i),
        })
        .collect()
}

/// `ħ dθ/dE` at a real energy: five-point central differences at steps `h`
/// and `2h`, combined by one Richardson step, with `h = max(1e-6, 1e-6 |E|)`.
pub fn time_delay(params: &PotentialParams, e: f64) -> Result<f64> {
    let h = (1e-6 * e.abs()).max(1e-6);
    let offsets = [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0];
    let rs: Vec<Complex64> = offsets
        .iter()
        .map(|&k| r_at(params, e + k * h))
        .collect::<Result<_>>()?;
    // symmetric phase differences over ±h, ±2h, ±4h
    let d1 = phase_step(rs[2], rs[3]);
    let d2 = phase_step(rs[1], rs[4]);
    let d4 = phase_step(rs[0], rs[5]);
    let five = |da: f64, db: f64, step: f64| (8.0 * da - db) / (12.0 * step);
    let fh = five(d1, d2, h);
    let f2h = five(d2, d4, 2.0 * h);
    Ok(params.hbar * (16.0 * fh - f2h) / 15.0)
}

/// Strict interior local maxima of `τ` whose prominence exceeds
/// `PROMINENCE_FLOOR` times the highest of them. Returns grid indices.
///
/// The scale is taken over interior maxima rather than the whole grid: for
/// `V1 = 0` the time delay diverges like `1/√E` at the threshold, and the
/// floor would otherwise depend on how close the grid starts to `E = 0`.
pub fn grid_peaks(curve: &PhaseCurve) -> Vec<usize> {
    let tau = &curve.tau;
    let candidates = local_maxima(tau);
    let scale = candidates.iter().fold(0.0f64, |m, &j| m.max(tau[j].abs()));
    let floor = PROMINENCE_FLOOR * scale;
    candidates
        .into_iter()
        .filter(|&j| prominence(tau, j) > floor)
        .collect()
}

fn local_maxima(tau: &[f64]) -> Vec<usize> {
    let n = tau.len();
    if n < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut j = 1;
    while j + 1 < n {
        if tau[j] > tau[j - 1] {
            // extend across a flat top
            let mut k = j;
            while k + 1 < n && tau[k + 1] == tau[j] {
                k += 1;
            }
            if k + 1 < n && tau[k + 1] < tau[j] {
                out.push((j + k) / 2);
            }
            j = k + 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Height of `tau[j]` above the higher of the two minima that separate it
/// from higher ground (or the ends of the curve).
fn prominence(tau: &[f64], j: usize) -> f64 {
    let top = tau[j];
    let mut left = top;
    for &t in tau[..j].iter().rev() {
        if t > top {
            break;
        }
        left = left.min(t);
    }
    let mut right = top;
    for &t in &tau[j + 1..] {
        if t > top {
            break;
        }
        right = right.min(t);
    }
    top - left.max(right)
}

/// Half-width of the peak at grid index `j`, measured where `τ` has fallen
/// by half the peak's prominence.
fn half_width(curve: &PhaseCurve, j: usize) -> Option<f64> {
    let (e, tau) = (&curve.energies, &curve.tau);
    let level = tau[j] - 0.5 * prominence(tau, j);
    let cross = |k0: usize, k1: usize| {
        let t = (tau[k0] - level) / (tau[k0] - tau[k1]);
        e[k0] + t * (e[k1] - e[k0])
    };
    let right = (j..tau.len() - 1).find(|&k| tau[k + 1] < level).map(|k| cross(k, k + 1) - e[j]);
    let left = (1..=j).rev().find(|&k| tau[k - 1] < level).map(|k| e[j] - cross(k, k - 1));
    match (left, right) {
        (Some(l), Some(r)) => Some(l.min(r)),
        (Some(w), None) | (None, Some(w)) => Some(w),
        (None, None) => None,
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Time-delay peak positions, each refined by golden section on
/// [`time_delay`] to within `PEAK_TOL`.
pub fn find_peaks(params: &PotentialParams, curve: &PhaseCurve) -> Result<Vec<f64>> {
    let e = &curve.energies;
    grid_peaks(curve)
        .par_iter()
        .map(|&j| golden_max(e[j - 1], e[j + 1], PEAK_TOL, |x| time_delay(params, x)))
        .collect()
}

/// `D(E)` relative to a reference magnitude, as a plain complex number.
fn rel(d: Scaled, reference: Scaled) -> Complex64 {
    if reference.is_zero() {
        return d.to_complex();
    }
    Scaled::new(d.mantissa, d.exp2 - reference.exp2).to_complex()
}

/// A zero of `f` near the seed, by Muller's method with a secant fallback.
fn muller(f: &impl Fn(Complex64) -> Result<Scaled>, seed: Complex64, spread: f64) -> Option<Complex64> {
    let mut x = [
        seed - Complex64::new(spread, 0.0),
        seed + Complex64::new(spread, 0.0),
        seed + Complex64::new(0.0, -spread),
    ];
    let mut fx = [f(x[0]).ok()?, f(x[1]).ok()?, f(x[2]).ok()?];
    let max_step = 1.0f64.max(8.0 * spread);
    for _ in 0..MAX_ITER {
        if fx[2].is_zero() {
            return Some(x[2]);
        }
        let reference = fx[2];
        let (f0, f1, f2) = (rel(fx[0], reference), rel(fx[1], reference), rel(fx[2], reference));
        let q = (x[2] - x[1]) / (x[1] - x[0]);
        let a = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
        let b = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
        let c = (1.0 + q) * f2;
        let root = (b * b - 4.0 * a * c).sqrt();
        let den = if (b + root).norm() >= (b - root).norm() { b + root } else { b - root };
        let mut step = if den.norm() > 0.0 && den.is_finite() {
            -(x[2] - x[1]) * 2.0 * c / den
        } else {
            // secant on the last two points
            -f2 * (x[2] - x[1]) / (f2 - f1)
        };
        if !step.is_finite() {
            return None;
        }
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        let next = x[2] + step;
        let f_next = f(next).ok()?;
        x = [x[1], x[2], next];
        fx = [fx[1], fx[2], f_next];
        if step.norm() <= 1e-9 * next.norm().max(1.0) {
            return converged(f, next, f_next).then_some(next);
        }
    }
    None
}

/// Accept `z` when `|D(z)|` is below `1e-10` of the local derivative scale.
fn converged(f: &impl Fn(Complex64) -> Result<Scaled>, z: Complex64, fz: Scaled) -> bool {
    let rho = 1e-3;
    match f(z + Complex64::new(rho, 0.0)) {
        Ok(near) if !near.is_zero() => rel(fz, near).norm() * rho <= 1e-10,
        _ => false,
    }
}

/// Local maxima of `|r|` on a grid over `region` (spacing `SEED_STEP`).
/// Using `r = N/D` rather than `D` alone removes the exponential trend the
/// special functions impose on `D`; `N` has no zeros in the lower half plane
/// for the unimodular regimes (they sit at the conjugates of the poles).
pub fn grid_seeds(params: &PotentialParams, region: Region) -> Vec<Complex64> {
    let nr = ((region.re_max - region.re_min) / SEED_STEP).floor() as usize + 1;
    let ni = ((region.im_max - region.im_min) / SEED_STEP).floor() as usize + 1;
    let points: Vec<Complex64> = (0..ni)
        .flat_map(|i| {
            (0..nr).map(move |j| {
                Complex64::new(
                    region.re_min + SEED_STEP * j as f64,
                    region.im_max - SEED_STEP * (i as f64 + 0.5),
                )
            })
        })
        .collect();
    let vals: Vec<f64> = points
        .par_iter()
        .map(|&e| match reflection(params, e, Options::default()) {
            Ok(pt) => -pt.r.norm().ln(),
            Err(Error::PoleProximity(_)) => f64::NEG_INFINITY,
            Err(_) => f64::NAN,
        })
        .collect();
    let at = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || i >= ni as isize || j >= nr as isize {
            None
        } else {
            Some(vals[i as usize * nr + j as usize])
        }
    };
    let mut seeds = Vec::new();
    for i in 0..ni as isize {
        for j in 0..nr as isize {
            let v = at(i, j).unwrap();
            if v.is_nan() {
                continue;
            }
            let mut lowest = true;
            for di in -1..=1 {
                for dj in -1..=1 {
                    if (di, dj) == (0, 0) {
                        continue;
                    }
                    if let Some(w) = at(i + di, j + dj) {
                        if w < v {
                            lowest = false;
                        }
                    }
                }
            }
            if lowest {
                seeds.push(points[i as usize * nr + j as usize]);
            }
        }
    }
    seeds
}

/// Zeros of the denominator in `region` found from `seeds`, merged within
/// `1e-6` and sorted by real part. Zeros in the upper half plane are
/// reported as defects and dropped.
pub fn find_poles(params: &PotentialParams, region: Region, seeds: &[Complex64]) -> Result<Vec<Resonance>> {
    params.validate()?;
    let f = |e: Complex64| denominator(params, e, BranchMode::Principal);
    let found: Vec<Option<Complex64>> = seeds.par_iter().map(|&s| muller(&f, s, 0.05)).collect();
    let mut poles: Vec<Complex64> = Vec::new();
    for (seed, z) in seeds.iter().zip(found) {
        let Some(z) = z else {
            log::debug!("no convergence from seed {seed}");
            continue;
        };
        if z.im > 0.0 {
            log::warn!("denominator zero in the upper half plane at {z} (from seed {seed})");
            continue;
        }
        if !region.contains(z) || z.im == 0.0 {
            continue;
        }
        if poles.iter().all(|p| (p - z).norm() > MERGE_TOL) {
            poles.push(z);
        }
    }
    poles.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(poles.into_iter().map(|p| Resonance::new(p, None)).collect())
}

/// Seeds below each time-delay peak, at its half-width and at twice and
/// half that depth.
fn peak_seeds(curve: &PhaseCurve, peaks: &[usize], refined: &[f64]) -> Vec<Complex64> {
    peaks
        .iter()
        .zip(refined)
        .flat_map(|(&j, &eps)| {
            let w = half_width(curve, j).unwrap_or(SEED_STEP).clamp(1e-3, SEED_DEPTH);
            [w, 2.0 * w, 0.5 * w].map(|d| Complex64::new(eps, -d))
        })
        .collect()
}

/// Pair each pole with the nearest peak by real part within `3Γ`; a peak
/// is used at most once, by the pole nearest to it.
pub fn pair_peaks(poles: &mut [Resonance], peaks: &[f64]) {
    for r in poles.iter_mut() {
        r.peak = None;
    }
    for &eps in peaks {
        let best = poles
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (a.energy - eps).abs().total_cmp(&(b.energy - eps).abs()));
        if let Some((i, r)) = best {
            let d = (r.energy - eps).abs();
            let taken = r.peak.map(|p| (r.energy - p).abs() <= d).unwrap_or(false);
            if d <= 3.0 * r.gamma && !taken {
                poles[i].peak = Some(eps);
            }
        }
    }
}

/// The first `n_max` resonances (by real part), each paired with its
/// time-delay peak where one exists.
///
/// Poles are sought below the time-delay peaks first. Only when those do not
/// supply `n_max` poles (spectra with few or no peaks) is the `|D|` grid
/// scanned as well; the grid also turns up deep zeros that produce no peak.
pub fn resonance_table(params: &PotentialParams, n_max: usize) -> Result<Vec<Resonance>> {
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    params.validate()?;
    let enough = |poles: &[Resonance], emax: f64| poles.len() >= n_max && poles[n_max - 1].energy < emax - SEED_STEP;
    let mut emax = 10.0f64;
    let mut done = Vec::new();
    for _ in 0..8 {
        let curve = phase_scan_coarse(params, 0.0, emax, (40.0 * emax) as usize + 1)?;
        let idx = grid_peaks(&curve);
        let peaks = find_peaks(params, &curve)?;
        let region = Region {
            re_min: 0.0,
            re_max: emax,
            im_min: -SEED_DEPTH,
            im_max: 0.0,
        };
        let mut seeds = peak_seeds(&curve, &idx, &peaks);
        let mut poles = find_poles(params, region, &seeds)?;
        if !enough(&poles, emax) {
            seeds.extend(grid_seeds(params, region));
            poles = find_poles(params, region, &seeds)?;
        }
        pair_peaks(&mut poles, &peaks);
        let stop = enough(&poles, emax);
        done = poles;
        if stop {
            break;
        }
        emax *= 2.0;
    }
    if done.is_empty() {
        return Err(Error::NonConvergence("no poles found".into()));
    }
    done.truncate(n_max);
    Ok(done)
}

/// Winding number of `D` along a circle of radius `rho` around `center`.
pub fn winding_number(params: &PotentialParams, center: Complex64, rho: f64, n: usize) -> Result<i64> {
    let pts: Vec<Complex64> = (0..n)
        .map(|k| center + Complex64::from_polar(rho, TAU * k as f64 / n as f64))
        .collect();
    let ds = pts
        .par_iter()
        .map(|&e| denominator(params, e, BranchMode::Principal))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for k in 0..n {
        let a = ds[k];
        let b = ds[(k + 1) % n];
        total += (b / a).arg();
    }
    Ok((total / TAU).round() as i64)
}
