use super::ResidualSeries;
use crate::{Error, Result};

/// Minimum number of usable points for any fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Residuals below `FLOOR_REL·|target|` are treated as numerically zero.
pub const FLOOR_REL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    AllPoints,
    /// Least squares on the per-dyadic-block maxima of `|R|`.
    DyadicEnvelope,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    /// Natural-log intercept: `ln|R| ≈ intercept + slope·ln ρ`.
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub method: FitMethod,
    pub floor_dropped: usize,
    /// Points (or block maxima) entering the regression.
    pub points_used: usize,
}

impl ExponentFit {
    pub fn predict(&self, rho: f64) -> f64 {
        (self.intercept + self.slope * rho.ln()).exp()
    }
}

/// Ordinary least squares `y ≈ a + b x`, returning `(b, a, r²)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fit `|value| ≈ C·ρ^slope` over `window` from `(ρ, value)` pairs.
pub fn fit_power_law(
    points: &[(f64, f64)],
    window: (f64, f64),
    method: FitMethod,
    floor: f64,
) -> Result<ExponentFit> {
    let in_window: Vec<(f64, f64)> = points
        .iter()
        .filter(|(r, _)| *r >= window.0 && *r <= window.1)
        .map(|(r, v)| (*r, v.abs()))
        .collect();
    let usable: Vec<(f64, f64)> = in_window.iter().copied().filter(|(_, v)| *v >= floor && *v > 0.0).collect();
    let floor_dropped = in_window.len() - usable.len();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            got: usable.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let chosen: Vec<(f64, f64)> = match method {
        FitMethod::AllPoints => usable,
        FitMethod::DyadicEnvelope => {
            let mut blocks: Vec<(i32, f64, f64)> = Vec::new();
            for (r, v) in usable {
                let b = r.log2().floor() as i32;
                match blocks.last_mut() {
                    Some(last) if last.0 == b => {
                        if v > last.2 {
                            last.1 = r;
                            last.2 = v;
                        }
                    }
                    _ => blocks.push((b, r, v)),
                }
            }
            if blocks.len() < 2 {
                return Err(Error::TooFewPoints {
                    got: blocks.len(),
                    need: 2,
                });
            }
            blocks.into_iter().map(|(_, r, v)| (r, v)).collect()
        }
    };
    let xs: Vec<f64> = chosen.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = chosen.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        window,
        method,
        floor_dropped,
        points_used: chosen.len(),
    })
}

/// Envelope exponent of `|R|` for a residual series.
pub fn fit_envelope_exponent(
    series: &ResidualSeries,
    window: (f64, f64),
    method: FitMethod,
) -> Result<ExponentFit> {
    let target = series.records.first().map_or(0.0, |r| r.target);
    let points: Vec<(f64, f64)> = series.records.iter().map(|r| (r.rho, r.residual)).collect();
    fit_power_law(&points, window, method, FLOOR_REL * target.abs())
}
