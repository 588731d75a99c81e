//! `p^(eta, mu, xi) = (2 pi)^{-d} iint e^{-i w.eta - i z.mu} p(w, z, xi) dw dz`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbols::{Amplitude, Factor, SeparableAmplitude};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    /// Midpoint nodes per unit length, raised automatically for high frequencies.
    pub points_per_unit: f64,
    pub boundary_tol: f64,
    pub max_half_width: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions { points_per_unit: 16.0, boundary_tol: 1e-10, max_half_width: 64.0 }
    }
}

#[derive(Clone, Debug)]
pub struct FourierSamples {
    pub values: Vec<C64>,
    /// Set when `|p|` on the truncation boundary exceeds the tolerance.
    pub warning: Option<String>,
    pub half_width: f64,
}

fn split(pt: &[f64], d: usize) -> (&[f64], &[f64], &[f64]) {
    (&pt[..d], &pt[d..2 * d], &pt[2 * d..])
}

/// Direct quadrature over a `(w, z)` box grown until `|p|` on its boundary is
/// below `boundary_tol` at every requested `xi`. Each point is `(eta, mu, xi)`.
pub fn amplitude_fourier(p: &dyn Amplitude, points: &[Vec<f64>], opts: FourierOptions) -> Result<FourierSamples> {
    let d = p.dim();
    if !p.depends_on_z() {
        return Err(Error::Precondition("p(., ., xi) is not integrable in z; the transform is a measure in mu".into()));
    }
    if points.iter().any(|pt| pt.len() != 3 * d) {
        return Err(Error::ShapeMismatch(format!("frequency points need {} coordinates", 3 * d)));
    }
    if !(opts.points_per_unit > 0.0) || !(opts.max_half_width >= 1.0) {
        return Err(invalid("fourier_options", "resolution and max half-width must be positive"));
    }
    let mut xis: Vec<Vec<f64>> = points.iter().map(|pt| pt[2 * d..].to_vec()).collect();
    xis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xis.dedup();
    let boundary = |half: f64| -> f64 {
        let k: usize = 17;
        let mut worst = 0.0f64;
        let total = k.pow(2 * d as u32);
        let mut pt = vec![0.0; 2 * d];
        for flat in 0..total {
            let mut rem = flat;
            let mut edge = false;
            for a in (0..2 * d).rev() {
                let i = rem % k;
                rem /= k;
                edge |= i == 0 || i == k - 1;
                pt[a] = -half + 2.0 * half * i as f64 / (k - 1) as f64;
            }
            if edge {
                for xi in &xis {
                    worst = worst.max(p.eval(&pt[..d], &pt[d..], xi).norm());
                }
            }
        }
        worst
    };
    let mut half = 1.0;
    let mut edge = boundary(half);
    while edge >= opts.boundary_tol && 2.0 * half <= opts.max_half_width {
        half *= 2.0;
        edge = boundary(half);
    }
    let warning = (edge >= opts.boundary_tol).then(|| {
        let msg = format!("truncation box half-width {half} leaves |p| = {edge:.3e} on its boundary");
        log::warn!("{msg}");
        msg
    });
    let fmax = points.iter().flat_map(|pt| pt[..2 * d].iter().map(|v| v.abs())).fold(0.0, f64::max);
    let ppu = opts.points_per_unit.max(4.0 * fmax / PI);
    let k = (2.0 * half * ppu).ceil() as usize;
    let h = 2.0 * half / k as f64;
    let nodes: Vec<f64> = (0..k).map(|i| -half + (i as f64 + 0.5) * h).collect();
    let pref = h.powi(2 * d as i32) / (2.0 * PI).powi(d as i32);
    let values = points
        .iter()
        .map(|pt| {
            let (eta, mu, xi) = split(pt, d);
            let total = k.pow(2 * d as u32);
            let mut acc = C64::new(0.0, 0.0);
            let mut wz = vec![0.0; 2 * d];
            for flat in 0..total {
                let mut rem = flat;
                for a in (0..2 * d).rev() {
                    wz[a] = nodes[rem % k];
                    rem /= k;
                }
                let v = p.eval(&wz[..d], &wz[d..], xi);
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                let phase: f64 = -(0..d).map(|i| wz[i] * eta[i] + wz[d + i] * mu[i]).sum::<f64>();
                acc += v * C64::from_polar(1.0, phase);
            }
            acc * pref
        })
        .collect();
    Ok(FourierSamples { values, warning, half_width: half })
}

/// Transform of a separable amplitude from one-dimensional factor transforms:
/// closed forms where available, otherwise a fine midpoint rule on the factor's support.
pub struct FourierField<'a> {
    p: &'a SeparableAmplitude,
    fallback_points: usize,
}

/// `int e^{i kappa x} f(x) dx`.
fn factor_transform(f: &Factor, kappa: f64, n: usize) -> Result<C64> {
    if let Some(v) = f.fourier_closed_form(kappa) {
        return Ok(v);
    }
    let (lo, hi) = f
        .support()
        .ok_or_else(|| Error::Precondition("factor without closed-form transform needs compact support".into()))?;
    let n = n.max((4.0 * kappa.abs() * (hi - lo) / PI).ceil() as usize);
    let h = (hi - lo) / n as f64;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        let x = lo + (i as f64 + 0.5) * h;
        acc += C64::from_polar(f.eval(x), kappa * x);
    }
    Ok(acc * h)
}

impl<'a> FourierField<'a> {
    pub fn new(p: &'a SeparableAmplitude) -> Result<Self> {
        if p.terms.iter().any(|t| t.z.is_empty() || t.z.iter().any(Factor::is_constant)) {
            return Err(Error::Precondition("every term must decay in z for the transform to be a function".into()));
        }
        if p.terms.iter().any(|t| t.w.iter().any(Factor::is_constant)) {
            return Err(Error::Precondition("every term must decay in w for the transform to be a function".into()));
        }
        Ok(FourierField { p, fallback_points: 4096 })
    }

    pub fn eval(&self, eta: &[f64], mu: &[f64], xi: &[f64]) -> Result<C64> {
        let d = self.p.d;
        let mut total = C64::new(0.0, 0.0);
        for t in &self.p.terms {
            let mut v = t.coeff;
            for i in 0..d {
                v *= t.xi[i].eval(xi[i]);
                if v.re == 0.0 && v.im == 0.0 {
                    break;
                }
                v *= factor_transform(&t.w[i], -eta[i], self.fallback_points)?;
                v *= factor_transform(&t.z[i], -mu[i], self.fallback_points)?;
            }
            total += v;
        }
        Ok(total / (2.0 * PI).powi(d as i32))
    }

    /// `|p^|` at the concatenated point, NaN on failure.
    pub fn modulus(&self, pt: &[f64]) -> f64 {
        let d = self.p.d;
        let (eta, mu, xi) = split(pt, d);
        self.eval(eta, mu, xi).map(|v| v.norm()).unwrap_or(f64::NAN)
    }
}
