use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::records::parse_front_csv;
use crate::error::{Error, Result};
use crate::theory::{noiseless_bound, total_fidelity, TheoryParams};

/// Equal-width bins over [min, max]; `edges` has one more entry than
/// `counts`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Domain("no values".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite value {v}")));
    }
    Ok(())
}

/// The last bin is closed on the right. Constant data lands in the first
/// bin of a zero-width range.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    check_finite(values)?;
    if bins == 0 {
        return Err(Error::Domain("bin count must be positive".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let k = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Maximum-likelihood normal parameters: the mean and the 1/N standard
/// deviation.
pub fn gaussian_fit(values: &[f64]) -> Result<(f64, f64)> {
    check_finite(values)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares y = slope·x + intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::Domain(format!("{} points, need at least 2", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain("non-finite point".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

pub const OVERLAY_CSV_HEADER: &str = "l_ph,l,noiseless_f,total_f";

/// Model curves for every l_ph over l = 0..=max CX count of the front CSV,
/// one row per (l_ph, l).
pub fn theory_overlay(front_csv: &str, n: usize, p: f64, lph_list: &[f64]) -> Result<String> {
    let rows = parse_front_csv(front_csv)?;
    let max_l = rows.iter().map(|r| r.cnot_count).max().ok_or_else(|| Error::Domain("front has no rows".into()))?;
    theory_curves(n, p, lph_list, max_l)
}

/// The same table for an explicit l range.
pub fn theory_curves(n: usize, p: f64, lph_list: &[f64], max_l: usize) -> Result<String> {
    if lph_list.is_empty() {
        return Err(Error::Domain("empty l_ph list".into()));
    }
    let mut out = format!("{OVERLAY_CSV_HEADER}\n");
    for &l_ph in lph_list {
        let params = TheoryParams::new(n, p, l_ph)?;
        for l in 0..=max_l {
            let l = l as f64;
            let _ = writeln!(out, "{l_ph},{l},{},{}", noiseless_bound(n, l, l_ph), total_fidelity(&params, l));
        }
    }
    Ok(out)
}
