//! Least-squares fits shared by the spectrum and correlation estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fit of `y = slope x + intercept` with coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InsufficientData(format!("linear fit needs >= 2 matched points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit { slope, intercept, r2 })
}

/// `y = amplitude * x^slope` fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub amplitude: f64,
    pub r2: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
}

/// Log-log least squares over the given points; needs at least `min_points`
/// and strictly positive values.
pub fn power_law_fit(x: &[f64], y: &[f64], min_points: usize) -> Result<PowerLawFit> {
    if x.len() < min_points {
        return Err(Error::InsufficientData(format!("power-law fit needs >= {min_points} points, got {}", x.len())));
    }
    for (&a, &b) in x.iter().zip(y) {
        if !(b > 0.0) || !(a > 0.0) {
            return Err(Error::NonPositiveValue { at: a, value: b });
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let f = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit {
        slope: f.slope,
        amplitude: f.intercept.exp(),
        r2: f.r2,
        x_lo: x.iter().cloned().fold(f64::INFINITY, f64::min),
        x_hi: x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        points: x.len(),
    })
}

/// `y = -A exp(-r^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub sigma: f64,
    pub r2: f64,
}

fn gauss_residuals(r: &[f64], y: &[f64], w: &[f64], a: f64, s: f64) -> f64 {
    r.iter().zip(y).zip(w).map(|((&x, &v), &wi)| wi * (v + a * (-s * x * x).exp()).powi(2)).sum()
}

/// Levenberg-Marquardt fit of a negative Gaussian in `(A, s = 1/(2 sigma^2))`,
/// seeded by a straight-line fit of `ln(-y)` against `r^2` over the leading
/// negative points.
pub fn negative_gaussian_fit(r: &[f64], y: &[f64]) -> Result<GaussianFit> {
    negative_gaussian_fit_weighted(r, y, &vec![1.0; r.len()])
}

/// Weighted variant; `r2` is the weighted coefficient of determination.
pub fn negative_gaussian_fit_weighted(r: &[f64], y: &[f64], w: &[f64]) -> Result<GaussianFit> {
    if w.len() != r.len() || w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("weights must be finite, non-negative and one per point".into()));
    }
    if r.len() < 5 || y.len() != r.len() {
        return Err(Error::InsufficientData(format!("Gaussian fit needs >= 5 points, got {}", r.len())));
    }
    let lead: Vec<usize> = (0..y.len()).take_while(|&i| y[i] < 0.0).collect();
    if lead.is_empty() {
        return Err(Error::NoScreeningSignal);
    }
    let (mut a, mut s) = if lead.len() >= 2 {
        let x2: Vec<f64> = lead.iter().map(|&i| r[i] * r[i]).collect();
        let ly: Vec<f64> = lead.iter().map(|&i| (-y[i]).ln()).collect();
        let f = linear_fit(&x2, &ly)?;
        (f.intercept.exp(), (-f.slope).max(1e-12 / (r[lead[0]].max(1e-300)).powi(2)))
    } else {
        (-y[lead[0]], 1.0 / (2.0 * r[lead[0]] * r[lead[0]]).max(1e-300))
    };
    let mut cost = gauss_residuals(r, y, w, a, s);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for ((&x, &v), &wi) in r.iter().zip(y).zip(w) {
            let e = (-s * x * x).exp();
            let res = v + a * e;
            let j = [e, -a * x * x * e];
            for p in 0..2 {
                jtr[p] += wi * j[p] * res;
                for q in 0..2 {
                    jtj[p][q] += wi * j[p] * j[q];
                }
            }
        }
        let mut improved = false;
        for _ in 0..40 {
            let m = [[jtj[0][0] * (1.0 + lambda), jtj[0][1]], [jtj[1][0], jtj[1][1] * (1.0 + lambda)]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let da = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
            let ds = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
            let (na, ns) = (a + da, s + ds);
            if ns > 0.0 {
                let c = gauss_residuals(r, y, w, na, ns);
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    a = na;
                    s = ns;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-15);
                    improved = rel > 1e-15 && (da.abs() > 1e-14 * a.abs() || ds.abs() > 1e-14 * s);
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !(a > 0.0) {
        return Err(Error::NoScreeningSignal);
    }
    let sw: f64 = w.iter().sum();
    let my = y.iter().zip(w).map(|(v, wi)| v * wi).sum::<f64>() / sw;
    let ss_tot: f64 = y.iter().zip(w).map(|(v, wi)| wi * (v - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - cost / ss_tot };
    Ok(GaussianFit { amplitude: a, sigma: (0.5 / s).sqrt(), r2 })
}
