//! Ascending power series for `J_{±ν}` / `I_{±ν}` and the combinations that
//! build Hankel functions and `K_ν` from them.
//!
//! With `t_0 = 1`, `t_k = t_{k-1} σ (z/2)^2 / (k (ν + k))`, the function and
//! its derivative are
//!
//! ```text
//! C_ν(z)  = A_ν Σ t_k,            A_ν = (z/2)^ν / Γ(ν + 1)
//! C'_ν(z) = A_ν Σ (ν + 2k) t_k / z
//! ```
//!
//! with `σ = -1` for `J` and `σ = +1` for `I`. Every routine reports the
//! number of bits lost to cancellation so the caller can raise the working
//! precision and retry.

use num_complex::Complex64;

use super::field::Field;
use super::SpecfunError;

const MAX_TERMS: usize = 20_000;

pub(crate) struct Sums<F> {
    pub s: F,
    pub d: F,
    pub loss: f64,
}

fn ascending<F: Field>(nu: &F, nu0: Complex64, q: &F, q0: Complex64, prec: u32) -> Result<Sums<F>, SpecfunError> {
    let mut t = F::from_i64(1, prec);
    let mut s = t.clone();
    let mut d = nu.clone();
    let mut max_t = 0.0f64;
    let mut max_d = nu0.norm().log2();
    let qn = q0.norm();
    for k in 1..=MAX_TERMS {
        let kk = k as i64;
        let denom = nu.add(&F::from_i64(kk, prec)).scale_i64(kk);
        t = t.mul(q).div(&denom);
        let weight = nu.add(&F::from_i64(2 * kk, prec));
        let dt = weight.mul(&t);
        s = s.add(&t);
        d = d.add(&dt);
        let lt = t.log2_abs();
        let ld = dt.log2_abs();
        max_t = max_t.max(lt);
        max_d = max_d.max(ld);
        let shrinking = qn < 0.5 * (kk as f64) * (nu0 + kk as f64).norm();
        if shrinking {
            let floor = s.log2_abs().max(d.log2_abs()) - prec as f64 - 8.0;
            if lt.max(ld) < floor || (lt == f64::NEG_INFINITY) {
                let loss_s = (max_t - s.log2_abs()).max(0.0);
                let loss_d = (max_d - d.log2_abs()).max(0.0);
                return Ok(Sums {
                    s,
                    d,
                    loss: loss_s.max(loss_d),
                });
            }
        }
    }
    Err(SpecfunError::NonConvergence("ascending series"))
}

/// `C_ν`, `C'_ν` for a single order.
pub(crate) struct Single<F> {
    pub value: F,
    pub deriv: F,
    pub loss: f64,
}

pub(crate) fn single<F: Field>(nu0: Complex64, z0: Complex64, sigma: i64, prec: u32) -> Result<Single<F>, SpecfunError> {
    let nu = F::from_c64(nu0, prec);
    let z = F::from_c64(z0, prec);
    let half_z = z.div_i64(2);
    let q = half_z.mul(&half_z).scale_i64(sigma);
    let sums = ascending(&nu, nu0, &q, (z0 * 0.5) * (z0 * 0.5) * sigma as f64, prec)?;
    let one = F::from_i64(1, prec);
    let amp = nu.mul(&half_z.ln()).exp().mul(&nu.add(&one).rgamma());
    Ok(Single {
        value: amp.mul(&sums.s),
        deriv: amp.mul(&sums.d).div(&z),
        loss: sums.loss,
    })
}

/// `C_{±ν}` and derivatives, sharing one gamma evaluation.
pub(crate) struct Pair<F> {
    pub plus: F,
    pub plus_d: F,
    pub minus: F,
    pub minus_d: F,
    /// `sin(πν)`, `e^{iπν}`, `e^{-iπν}`
    pub sin: F,
    pub ep: F,
    pub em: F,
    pub loss: f64,
}

pub(crate) fn pair<F: Field>(nu0: Complex64, z0: Complex64, sigma: i64, prec: u32) -> Result<Pair<F>, SpecfunError> {
    let nu = F::from_c64(nu0, prec);
    let neg_nu = nu.neg();
    let z = F::from_c64(z0, prec);
    let half_z = z.div_i64(2);
    let q = half_z.mul(&half_z).scale_i64(sigma);
    let q0 = (z0 * 0.5) * (z0 * 0.5) * sigma as f64;
    let sp = ascending(&nu, nu0, &q, q0, prec)?;
    let sm = ascending(&neg_nu, -nu0, &q, q0, prec)?;

    let one = F::from_i64(1, prec);
    let pi_nu = nu.mul(&F::pi(prec));
    let ep = pi_nu.mul_i().exp();
    let em = one.div(&ep);
    // sin(πν) = (e^{iπν} - e^{-iπν}) / 2i
    let (diff, sin_loss) = diff(&ep, &em);
    let sin = diff.mul_i().neg().div_i64(2);
    // A_ν = (z/2)^ν / Γ(1+ν), and A_ν A_{-ν} = sin(πν) / (πν)
    let (mult, log) = nu.add(&one).ln_rgamma(&sin.neg());
    let a_plus = nu.mul(&half_z.ln()).add(&log).exp().mul(&mult).round(prec);
    let a_minus = sin.div(&pi_nu.mul(&a_plus));
    Ok(Pair {
        plus: a_plus.mul(&sp.s),
        plus_d: a_plus.mul(&sp.d).div(&z),
        minus: a_minus.mul(&sm.s),
        minus_d: a_minus.mul(&sm.d).div(&z),
        sin,
        ep,
        em,
        loss: sp.loss.max(sm.loss).max(sin_loss),
    })
}

/// `a - b` together with the bits cancelled in forming it.
fn diff<F: Field>(a: &F, b: &F) -> (F, f64) {
    let r = a.sub(b);
    let loss = (a.log2_abs().max(b.log2_abs()) - r.log2_abs()).max(0.0);
    (r, if loss.is_nan() { f64::INFINITY } else { loss })
}

/// Hankel functions of orders `ν` and `-ν`, with derivatives.
pub(crate) struct Hankel<F> {
    pub h1: F,
    pub h1p: F,
    pub h2: F,
    pub h2p: F,
    pub h1m: F,
    pub h1mp: F,
    pub h2m: F,
    pub h2mp: F,
    pub loss: f64,
}

pub(crate) fn hankel<F: Field>(nu0: Complex64, z0: Complex64, prec: u32) -> Result<Hankel<F>, SpecfunError> {
    let p = pair::<F>(nu0, z0, -1, prec)?;
    let (ep, em) = (&p.ep, &p.em);
    let is = p.sin.mul_i();
    let neg_is = is.neg();

    let mut loss = p.loss;
    let mut comb = |a: &F, c: &F, b: &F, den: &F| {
        let (r, l) = diff(a, &c.mul(b));
        loss = loss.max(l);
        r.div(den)
    };
    // H1_ν = (J_{-ν} - e^{-iνπ} J_ν) / (i sin νπ)
    let h1 = comb(&p.minus, em, &p.plus, &is);
    let h1p = comb(&p.minus_d, em, &p.plus_d, &is);
    // H2_ν = (J_{-ν} - e^{iνπ} J_ν) / (-i sin νπ)
    let h2 = comb(&p.minus, ep, &p.plus, &neg_is);
    let h2p = comb(&p.minus_d, ep, &p.plus_d, &neg_is);
    // H1_{-ν} = (J_ν - e^{iνπ} J_{-ν}) / (-i sin νπ)
    let h1m = comb(&p.plus, ep, &p.minus, &neg_is);
    let h1mp = comb(&p.plus_d, ep, &p.minus_d, &neg_is);
    // H2_{-ν} = (J_ν - e^{-iνπ} J_{-ν}) / (i sin νπ)
    let h2m = comb(&p.plus, em, &p.minus, &is);
    let h2mp = comb(&p.plus_d, em, &p.minus_d, &is);
    Ok(Hankel {
        h1,
        h1p,
        h2,
        h2p,
        h1m,
        h1mp,
        h2m,
        h2mp,
        loss,
    })
}

/// `I_ν`, `K_ν` and derivatives.
pub(crate) struct Modified<F> {
    pub i: F,
    pub ip: F,
    pub k: F,
    pub kp: F,
    pub loss: f64,
}

pub(crate) fn modified<F: Field>(nu0: Complex64, z0: Complex64, prec: u32) -> Result<Modified<F>, SpecfunError> {
    let p = pair::<F>(nu0, z0, 1, prec)?;
    // K_ν = π (I_{-ν} - I_ν) / (2 sin νπ)
    let factor = F::pi(prec).div(&p.sin.scale_i64(2));
    let (k, lk) = diff(&p.minus, &p.plus);
    let (kp, lkp) = diff(&p.minus_d, &p.plus_d);
    Ok(Modified {
        i: p.plus,
        ip: p.plus_d,
        k: k.mul(&factor),
        kp: kp.mul(&factor),
        loss: p.loss.max(lk).max(lkp),
    })
}
