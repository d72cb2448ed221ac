//! Analytic fidelity model for approximate state preparation under noise.
//!
//! A circuit with l physical CNOTs and error rate p is modelled as reaching
//! total fidelity F(l) = (1−p)^l · (1 − ε(l)²), where the approximation
//! error ε decays exponentially with the number of logical CNOTs l/l_ph.
//! The decay constants come from a volume-counting argument on the
//! projective state space. Factorials and Gamma functions are evaluated in
//! log space throughout.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Register width, CNOT error rate and physical CNOTs per logical CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub n: usize,
    pub p: f64,
    pub l_ph: f64,
}

impl TheoryParams {
    pub fn new(n: usize, p: f64, l_ph: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n = {n} must be at least 2")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p = {p} must lie in (0, 1)")));
        }
        if !(l_ph >= 1.0 && l_ph.is_finite()) {
            return Err(Error::Domain(format!("l_ph = {l_ph} must be at least 1")));
        }
        Ok(Self { n, p, l_ph })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be at least 2")));
    }
    if n > 1000 {
        return Err(Error::Domain(format!("n = {n} is too large")));
    }
    Ok(())
}

/// 2^n − n − 1.
fn codim(n: usize) -> f64 {
    2f64.powi(n as i32) - n as f64 - 1.0
}

fn pair_count(n: usize) -> f64 {
    (n * (n - 1)) as f64 / 2.0
}

/// A(n) = ((2 ln 2)n + ln(n(n−1)/2)) / (2^n − n − 1).
pub fn coeff_a(n: usize) -> Result<f64> {
    check_n(n)?;
    Ok((2.0 * LN_2 * n as f64 + pair_count(n).ln()) / codim(n))
}

/// B(n) = (ln 2)n² / (2^n − n − 1).
pub fn coeff_b(n: usize) -> Result<f64> {
    check_n(n)?;
    Ok(LN_2 * (n * n) as f64 / codim(n))
}

/// ε(l) = exp(−(A/2)(l/l_ph) − B/2).
pub fn epsilon_bound(n: usize, l: f64, l_ph: f64) -> Result<f64> {
    if !(l >= 0.0) {
        return Err(Error::Domain(format!("l = {l} must be non-negative")));
    }
    Ok((-(coeff_a(n)? / 2.0) * (l / l_ph) - coeff_b(n)? / 2.0).exp())
}

/// (1−p)^l · (1 − exp(−A·l/l_ph − B)).
pub fn total_fidelity(params: &TheoryParams, l: f64) -> f64 {
    (1.0 - params.p).powf(l) * noiseless_bound(params.n, l, params.l_ph)
}

/// 1 − ε(l)², the noiseless part of [`total_fidelity`].
pub fn noiseless_bound(n: usize, l: f64, l_ph: f64) -> f64 {
    let a = coeff_a(n).expect("validated n");
    let b = coeff_b(n).expect("validated n");
    -(-a * l / l_ph - b).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalLength {
    pub l_star: u64,
    pub f_max: f64,
    /// Stationary point of the continuous fidelity curve.
    pub continuous: f64,
    /// Set when the continuous optimum is at or below zero.
    pub noise_too_high: bool,
}

/// Integer circuit length maximizing [`total_fidelity`].
///
/// The continuous optimum solves e^{A·l/l_ph + B} = 1 − A/(l_ph·ln(1−p)).
/// The curve is log-concave, so the best integer is one of its two
/// neighbours.
pub fn optimal_length(params: &TheoryParams) -> OptimalLength {
    let a = coeff_a(params.n).expect("validated n");
    let b = coeff_b(params.n).expect("validated n");
    let ln_keep = (-params.p).ln_1p();
    let continuous = (params.l_ph / a) * ((1.0 - a / (params.l_ph * ln_keep)).ln() - b);
    if !(continuous > 0.0) {
        return OptimalLength {
            l_star: 0,
            f_max: total_fidelity(params, 0.0),
            continuous,
            noise_too_high: true,
        };
    }
    let lo = continuous.floor();
    let hi = continuous.ceil();
    let (l, f) = [lo, hi]
        .into_iter()
        .map(|l| (l, total_fidelity(params, l)))
        .fold((lo, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    OptimalLength { l_star: l as u64, f_max: f, continuous, noise_too_high: false }
}

/// The closed form l* = (l_ph/A)[ln(1 − A/ln(1−p)) − B], which leaves l_ph
/// out of the logarithm. It does not maximize [`total_fidelity`] unless
/// l_ph = 1 and is reported for comparison only.
pub fn optimal_length_closed_form(params: &TheoryParams) -> f64 {
    let a = coeff_a(params.n).expect("validated n");
    let b = coeff_b(params.n).expect("validated n");
    (params.l_ph / a) * ((1.0 - a / (-params.p).ln_1p()).ln() - b)
}

/// ln Vol(CP_d) = d ln π − ln d!.
pub fn ln_volume_cp(d: usize) -> f64 {
    d as f64 * PI.ln() - ln_gamma(d as f64 + 1.0)
}

/// Vol(CP_d) = π^d / d!.
pub fn volume_cp(d: usize) -> f64 {
    if d <= 20 {
        let fact: f64 = (1..=d).map(|k| k as f64).product();
        PI.powi(d as i32) / fact
    } else {
        ln_volume_cp(d).exp()
    }
}

/// ln of the volume of the d-dimensional ball of radius r.
pub fn ln_volume_ball(d: usize, r: f64) -> f64 {
    let h = d as f64 / 2.0;
    h * PI.ln() + d as f64 * r.ln() - ln_gamma(h + 1.0)
}

/// π^{d/2} r^d / Γ(d/2 + 1).
pub fn volume_ball(d: usize, r: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    ln_volume_ball(d, r).exp()
}

fn check_eta_domain(n: usize, l: usize) -> Result<f64> {
    check_n(n)?;
    if n > 60 {
        return Err(Error::Domain(format!("n = {n} too large for the volume fraction")));
    }
    let dim = 1u64 << n;
    let used = (n + 2 * l + 1) as u64;
    if used > dim {
        return Err(Error::Domain(format!("n + 2l + 1 = {used} exceeds 2^n = {dim}")));
    }
    Ok((dim - used) as f64)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1]")));
    }
    Ok(())
}

/// ln η_{n,l}(ε) with
/// η = [(2^n−1)!/(2^n−n−2l−1)!] · ε^{2(2^n−n−2l−1)} · (n(n−1)/2)^l.
pub fn ln_volume_fraction_eta(n: usize, l: usize, eps: f64) -> Result<f64> {
    let m = check_eta_domain(n, l)?;
    check_eps(eps)?;
    let dim = 2f64.powi(n as i32);
    Ok(ln_gamma(dim) - ln_gamma(m + 1.0) + 2.0 * m * eps.ln() + l as f64 * pair_count(n).ln())
}

pub fn volume_fraction_eta(n: usize, l: usize, eps: f64) -> Result<f64> {
    Ok(ln_volume_fraction_eta(n, l, eps)?.exp())
}

/// ln η with the factorial ratio replaced by 2^{n(n+2l)}.
pub fn ln_volume_fraction_eta_approx(n: usize, l: usize, eps: f64) -> Result<f64> {
    let m = check_eta_domain(n, l)?;
    check_eps(eps)?;
    Ok((n * (n + 2 * l)) as f64 * LN_2 + 2.0 * m * eps.ln() + l as f64 * pair_count(n).ln())
}

/// The ε at which the exact η_{n,l}(ε) equals one.
pub fn eta_unit_radius(n: usize, l: usize) -> Result<f64> {
    let m = check_eta_domain(n, l)?;
    if m == 0.0 {
        return Err(Error::Domain("exponent of ε vanishes".into()));
    }
    let rest = ln_volume_fraction_eta(n, l, 1.0)?;
    Ok((-rest / (2.0 * m)).exp())
}

/// l*/l_ph ≈ 1/ln(1/(1−p)) − n/2, scaled by l_ph.
pub fn asymptotic_optimal_length(n: usize, p: f64, l_ph: f64) -> f64 {
    l_ph * (1.0 / -(-p).ln_1p() - n as f64 / 2.0)
}

/// 1 − e^{−2/n}: above this error rate the asymptotic optimum is l* = 0.
pub fn threshold_error_rate(n: usize) -> f64 {
    -(-2.0 / n as f64).exp_m1()
}

/// (1−p)^{(1/p − n/2)·l_ph} · (1 − 2^n ln(1−p)/((2 ln 2)n))^{−1}.
pub fn asymptotic_max_fidelity(n: usize, p: f64, l_ph: f64) -> f64 {
    let ln_keep = (-p).ln_1p();
    let first = ((1.0 / p - n as f64 / 2.0) * l_ph * ln_keep).exp();
    let second = 1.0 - 2f64.powi(n as i32) * ln_keep / (2.0 * LN_2 * n as f64);
    first / second
}

/// Error rate keeping the second factor of [`asymptotic_max_fidelity`]
/// at `f2`: (ln 2)(1/f2 − 1)·n/2^n.
pub fn required_error_rate(n: usize, f2: f64) -> Result<f64> {
    if !(f2 > 0.0 && f2 < 1.0) {
        return Err(Error::Domain(format!("f2 = {f2} must lie in (0, 1)")));
    }
    Ok(LN_2 * (1.0 / f2 - 1.0) * n as f64 / 2f64.powi(n as i32))
}

/// Fits l_ph to `(l, F)` points by least squares on
/// ln(1 − F) = −A·l/l_ph − B with the intercept fixed at −B.
///
/// Points with F ≥ 1 are skipped. Needs three usable points and a
/// decreasing trend.
pub fn fit_lph(points: &[(f64, f64)], n: usize) -> Result<f64> {
    let a = coeff_a(n)?;
    let b = coeff_b(n)?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(l, f)| l.is_finite() && *f < 1.0 && f.is_finite())
        .map(|&(l, f)| (l, (-f).ln_1p()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::Domain(format!("{} usable points, need at least 3", usable.len())));
    }
    let sxx: f64 = usable.iter().map(|(l, _)| l * l).sum();
    let sxy: f64 = usable.iter().map(|(l, y)| l * (y + b)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all points have l = 0".into()));
    }
    let s = -sxy / (a * sxx);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("fitted slope {s} is not a decay")));
    }
    Ok(1.0 / s)
}
