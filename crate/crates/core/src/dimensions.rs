//! Closed-form and root-solved dimension quantities.
//!
//! All roots are found by bisection on monotone functions, capped at
//! [`MAX_ITERATIONS`] steps.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{check_a, Scalar};

pub const MAX_ITERATIONS: usize = 200;
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// A bracketed root and how well it solves the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<Root> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(Root {
            value: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fhi == 0.0 {
        return Ok(Root {
            value: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NotBracketed(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} share a sign"
        )));
    }
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // Report whichever endpoint solves the equation better.
    let (rl, rh) = (f(lo).abs(), f(hi).abs());
    let (value, residual) = if rl <= rh { (lo, rl) } else { (hi, rh) };
    Ok(Root {
        value,
        residual,
        iterations,
    })
}

/// Expands `hi` by doubling until `f(hi)` changes sign relative to `f(lo)`.
fn bracket_up<F: Fn(f64) -> f64>(f: &F, lo: f64, mut hi: f64) -> Result<f64> {
    let s = f(lo).signum();
    for _ in 0..64 {
        if f(hi).signum() != s {
            return Ok(hi);
        }
        hi = lo + 2.0 * (hi - lo);
    }
    Err(Error::NotBracketed(format!("no sign change above {lo}")))
}

fn check_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::Invalid("empty ratio list".into()));
    }
    if let Some(r) = ratios.iter().find(|r| !(r.abs() > 0.0 && r.abs() < 1.0)) {
        return Err(Error::Domain {
            name: "ratio",
            value: r.to_string(),
            domain: "0 < |r| < 1",
        });
    }
    Ok(())
}

/// Root of `Σ |r_i|^s = 1`.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    check_ratios(ratios)?;
    let f = |s: f64| ratios.iter().map(|r| r.abs().powf(s)).sum::<f64>() - 1.0;
    let hi = bracket_up(&f, 0.0, 1.0)?;
    Ok(bisect(f, 0.0, hi)?.value)
}

/// `s₀ = 1 + log(4a − 1)/log 3`.
pub fn okamoto_s0(a: f64) -> Result<f64> {
    check_a(&a)?;
    Ok(1.0 + (4.0 * a - 1.0).ln() / 3f64.ln())
}

/// `s₀` by bisection on `(4a − 1)(1/3)^{s−1} = 1`.
pub fn okamoto_s0_bisect(a: f64) -> Result<Root> {
    check_a(&a)?;
    bisect(
        |s| (4.0 * a - 1.0) * (1.0 / 3.0f64).powf(s - 1.0) - 1.0,
        1.0,
        2.0,
    )
}

/// Singular-value pressure of a diagonal system at `s`.
pub fn diagonal_pressure(alphas: &[f64], betas: &[f64], s: f64) -> f64 {
    let pairs = || alphas.iter().zip(betas).map(|(a, b)| (a.abs(), b.abs()));
    if s <= 1.0 {
        let x: f64 = pairs().map(|(a, _)| a.powf(s)).sum();
        let y: f64 = pairs().map(|(_, b)| b.powf(s)).sum();
        x.max(y)
    } else if s < 2.0 {
        let x: f64 = pairs().map(|(a, b)| a * b.powf(s - 1.0)).sum();
        let y: f64 = pairs().map(|(a, b)| b * a.powf(s - 1.0)).sum();
        x.max(y)
    } else {
        pairs().map(|(a, b)| (a * b).powf(s / 2.0)).sum()
    }
}

/// Root of the diagonal pressure `P(s) = 1`, capped at 2.
pub fn affinity_dimension(alphas: &[f64], betas: &[f64]) -> Result<f64> {
    if alphas.len() != betas.len() {
        return Err(Error::Invalid(
            "alpha and beta lists differ in length".into(),
        ));
    }
    check_ratios(alphas)?;
    check_ratios(betas)?;
    if diagonal_pressure(alphas, betas, 2.0) >= 1.0 {
        return Ok(2.0);
    }
    Ok(bisect(|s| diagonal_pressure(alphas, betas, s) - 1.0, 0.0, 2.0)?.value)
}

/// Natural weights `(a, 2a − 1, a)/(4a − 1)`; `p₂` is taken as `1 − 2p₁`
/// so that `(p₁ + p₃) + p₂` is exactly 1 in floating point.
pub fn natural_weights(a: f64) -> Result<[f64; 3]> {
    check_a(&a)?;
    let p1 = a / (4.0 * a - 1.0);
    Ok([p1, 1.0 - 2.0 * p1, p1])
}

/// Natural weights in exact arithmetic.
pub fn natural_weights_exact(a: &BigRational) -> Result<[BigRational; 3]> {
    check_a(a)?;
    let two = BigRational::from_ratio(2, 1);
    let d = BigRational::from_ratio(4, 1) * a - BigRational::one();
    let p1 = a / &d;
    let p2 = (two * a - BigRational::one()) / &d;
    Ok([p1.clone(), p2, p1])
}

/// Vertical contraction ratios `(a, 1 − 2a, a)` of the Okamoto system.
pub fn okamoto_y_ratios(a: f64) -> [f64; 3] {
    [a, 1.0 - 2.0 * a, a]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyLyapunov {
    /// `−Σ p_i log p_i` in nats, with `0 log 0 = 0`.
    pub h: f64,
    /// `−Σ p_i log |β_i|`.
    pub chi1: f64,
    /// `log 3`.
    pub chi2: f64,
}

pub fn entropy_lyapunov(p: &[f64], y_ratios: &[f64]) -> Result<EntropyLyapunov> {
    if p.len() != y_ratios.len() || p.is_empty() {
        return Err(Error::Invalid(
            "weights and ratios must be nonempty and equal length".into(),
        ));
    }
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(
            "weights must form a probability vector".into(),
        ));
    }
    check_ratios(y_ratios)?;
    let h = -p
        .iter()
        .map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })
        .sum::<f64>();
    let chi1 = -p
        .iter()
        .zip(y_ratios)
        .map(|(&x, r)| if x > 0.0 { x * r.abs().ln() } else { 0.0 })
        .sum::<f64>();
    Ok(EntropyLyapunov {
        h,
        chi1,
        chi2: 3f64.ln(),
    })
}

/// `1 + (h − χ₁)/χ₂` for the natural measure, assuming the projected
/// measure has dimension 1.
pub fn feng_hu_dim(a: f64) -> Result<f64> {
    let p = natural_weights(a)?;
    let e = entropy_lyapunov(&p, &okamoto_y_ratios(a))?;
    Ok(1.0 + (e.h - e.chi1) / e.chi2)
}

/// `G(τ) = (1/3)^{(s−1)q} (2 a^{q−τ} + b^{q−τ})` with `b = 2a − 1`.
pub fn tau_pressure(a: f64, q: f64, tau: f64) -> f64 {
    let s = 1.0 + (4.0 * a - 1.0).ln() / 3f64.ln();
    let b = 2.0 * a - 1.0;
    let e = q - tau;
    // log-sum-exp of ln 2 + e ln a and e ln b
    let x = 2f64.ln() + e * a.ln();
    let y = e * b.ln();
    let m = x.max(y);
    let lse = m + ((x - m).exp() + (y - m).exp()).ln();
    (-(s - 1.0) * q * 3f64.ln() + lse).exp()
}

/// `τ(q)`: the root of `G(τ) = 1`; `G` increases in `τ`.
pub fn tau_q(a: f64, q: f64) -> Result<Root> {
    check_a(&a)?;
    if !q.is_finite() || q < 1.0 {
        return Err(Error::Domain {
            name: "q",
            value: q.to_string(),
            domain: "[1,∞)",
        });
    }
    let f = |t: f64| tau_pressure(a, q, t) - 1.0;
    let mut lo = q - 2.0;
    let mut step = 1.0;
    while f(lo) > 0.0 {
        lo -= step;
        step *= 2.0;
        if step > 1e6 {
            return Err(Error::NotBracketed(format!("τ({q}) lower bracket")));
        }
    }
    let hi = bracket_up(&f, lo, q)?;
    let root = bisect(f, lo, hi)?;
    if root.residual >= RESIDUAL_TOLERANCE {
        return Err(Error::NotBracketed(format!(
            "τ({q}) residual {} above tolerance",
            root.residual
        )));
    }
    Ok(root)
}

/// `D(q) = min{τ(q)/(q − 1), 1}` for `q > 1`.
pub fn lq_dimension(a: f64, q: f64) -> Result<f64> {
    if q.is_nan() || q <= 1.0 {
        return Err(Error::Domain {
            name: "q",
            value: q.to_string(),
            domain: "(1,∞)",
        });
    }
    let tau = tau_q(a, q)?.value;
    Ok((tau / (q - 1.0)).min(1.0))
}

/// `max{s₀, 1 + sup_y dim L_y}`.
pub fn assouad_bound(a: f64, slice_sup_estimate: f64) -> Result<f64> {
    let s0 = okamoto_s0(a)?;
    if slice_sup_estimate.is_nan() || slice_sup_estimate < 0.0 {
        return Err(Error::Domain {
            name: "slice_sup_estimate",
            value: slice_sup_estimate.to_string(),
            domain: "[0,∞)",
        });
    }
    Ok(s0.max(1.0 + slice_sup_estimate))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauEntry {
    pub q: f64,
    pub tau: f64,
    pub residual: f64,
    pub lq_dimension: f64,
}

/// Every closed-form quantity at one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimReport {
    pub a: f64,
    pub b: f64,
    pub s0: f64,
    pub s0_bisection: f64,
    pub affinity_dim: f64,
    pub weights: [f64; 3],
    pub entropy: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub fenghu_dim: f64,
    pub level_set_bound: f64,
    pub assouad_bound: f64,
    pub tau: Vec<TauEntry>,
}

pub fn dim_report(a: f64, qs: &[f64]) -> Result<DimReport> {
    let s0 = okamoto_s0(a)?;
    let weights = natural_weights(a)?;
    let e = entropy_lyapunov(&weights, &okamoto_y_ratios(a))?;
    let tau = qs
        .iter()
        .map(|&q| {
            let root = tau_q(a, q)?;
            let lq = if q > 1.0 {
                (root.value / (q - 1.0)).min(1.0)
            } else {
                f64::NAN
            };
            Ok(TauEntry {
                q,
                tau: root.value,
                residual: root.residual,
                lq_dimension: lq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DimReport {
        a,
        b: 2.0 * a - 1.0,
        s0,
        s0_bisection: okamoto_s0_bisect(a)?.value,
        affinity_dim: affinity_dimension(&[1.0 / 3.0; 3], &okamoto_y_ratios(a))?,
        weights,
        entropy: e.h,
        chi1: e.chi1,
        chi2: e.chi2,
        fenghu_dim: 1.0 + (e.h - e.chi1) / e.chi2,
        level_set_bound: s0 - 1.0,
        assouad_bound: assouad_bound(a, s0 - 1.0)?,
        tau,
    })
}

/// Exact sanity helper: `Σ p_i` of [`natural_weights_exact`].
pub fn exact_weight_sum(a: &BigRational) -> Result<BigRational> {
    let p = natural_weights_exact(a)?;
    Ok(p.iter()
        .cloned()
        .fold(BigRational::from_ratio(0, 1), |acc, x| acc + x))
}
