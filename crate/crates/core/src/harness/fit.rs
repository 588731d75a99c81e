//! Least-squares slopes on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Ordinary least squares of `log value` against `log parameter`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(invalid("points", format!("need at least 4, got {}", points.len())));
    }
    for &(p, v) in points {
        if !(p > 0.0) || !p.is_finite() {
            return Err(invalid("parameter", format!("{p} is not positive and finite")));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid("value", format!("{v} at parameter {p} is not positive and finite")));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("parameter", "all parameters coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, stderr, intercept, points: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&p: &f64| (p, p.powi(3))).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn constant_is_flat() {
        let pts: Vec<_> = [3.0, 5.0, 7.0, 11.0].iter().map(|&p| (p, 2.5)).collect();
        assert!(fit_loglog_slope(&pts).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn perturbed_square() {
        // alpha in {4..64} as in the scaling sweeps; the sin(log p) wobble shifts the slope by about 0.01
        let pts: Vec<_> = [4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&p: &f64| (p, p * p * (1.0 + 0.01 * p.ln().sin()))).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 0.02, "{}", f.slope);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0), (4.0, 4.0)]).is_err());
    }
}
