//! `[sum_n (int_{C_n} |h|^r)^(delta/r)]^(1/delta)` over unit cubes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeNormParams {
    pub r: f64,
    /// `f64::INFINITY` selects the sup over sliding cubes.
    pub delta: f64,
    /// Cubes with `|n - center|_inf <= truncation_radius` are included.
    pub truncation_radius: f64,
    /// Midpoint nodes per axis per cube.
    pub cube_points: usize,
    /// Lattice point the truncation is centered on; empty means the origin.
    #[serde(default)]
    pub center: Vec<i64>,
    /// Repeat at twice the resolution and report the relative change.
    #[serde(default)]
    pub self_check: bool,
}

impl LatticeNormParams {
    pub fn new(r: f64, delta: f64, truncation_radius: f64) -> Result<Self> {
        let p = LatticeNormParams { r, delta, truncation_radius, cube_points: 16, center: vec![], self_check: false };
        p.validate()?;
        Ok(p)
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.cube_points = n;
        self
    }

    pub fn centered(mut self, c: Vec<i64>) -> Self {
        self.center = c;
        self
    }

    pub fn checked(mut self) -> Self {
        self.self_check = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(invalid("lattice.r", "must be positive and finite"));
        }
        if !(self.delta > 0.0) {
            return Err(invalid("lattice.delta", "must be positive or infinite"));
        }
        if !(self.truncation_radius >= 1.0) {
            return Err(invalid("lattice.truncation_radius", "must be at least 1"));
        }
        if self.cube_points == 0 {
            return Err(invalid("lattice.cube_points", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeNorm {
    pub value: f64,
    /// `|v(2N) - v(N)| / v(2N)` when the self-check ran.
    pub doubling_change: Option<f64>,
    pub cubes: usize,
}

fn cube_centers(k: usize, params: &LatticeNormParams) -> Vec<Vec<f64>> {
    let r = params.truncation_radius.floor() as i64;
    let center: Vec<i64> = if params.center.is_empty() { vec![0; k] } else { params.center.clone() };
    let offsets: &[f64] = if params.delta.is_infinite() { &[0.0, 0.25, 0.5, 0.75] } else { &[0.0] };
    let per_axis: Vec<f64> = (-r..=r).flat_map(|n| offsets.iter().map(move |o| n as f64 + o)).collect();
    let mut out = vec![vec![]];
    for axis in 0..k {
        let mut next = Vec::with_capacity(out.len() * per_axis.len());
        for prefix in &out {
            for &v in &per_axis {
                let mut p = prefix.clone();
                p.push(center[axis] as f64 + v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn cube_mass(h: &(dyn Fn(&[f64]) -> f64 + Sync), c: &[f64], r: f64, np: usize) -> Result<f64> {
    let k = c.len();
    let step = 1.0 / np as f64;
    let total = np.pow(k as u32);
    let mut x = vec![0.0; k];
    let mut s = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..k).rev() {
            x[a] = c[a] - 0.5 + ((rem % np) as f64 + 0.5) * step;
            rem /= np;
        }
        let v = h(&x);
        if !v.is_finite() {
            return Err(Error::NonFinite { cube: c.iter().map(|v| v.floor() as i64).collect() });
        }
        s += v.abs().powf(r);
    }
    Ok(s * step.powi(k as i32))
}

fn evaluate(h: &(dyn Fn(&[f64]) -> f64 + Sync), k: usize, params: &LatticeNormParams, np: usize) -> Result<(f64, usize)> {
    let centers = cube_centers(k, params);
    let masses: Vec<f64> = centers.par_iter().map(|c| cube_mass(h, c, params.r, np)).collect::<Result<Vec<_>>>()?;
    let value = if params.delta.is_infinite() {
        masses.iter().fold(0.0f64, |m, v| m.max(*v)).powf(1.0 / params.r)
    } else {
        // sequential sum keeps the result independent of the worker count
        let e = params.delta / params.r;
        masses.iter().map(|m| m.powf(e)).sum::<f64>().powf(1.0 / params.delta)
    };
    Ok((value, centers.len()))
}

/// The lattice quasi-norm of `h` on `R^k` over the truncated cube family.
/// For `delta = inf` the cube centers also run over quarter-cell offsets.
pub fn lattice_qnorm(h: &(dyn Fn(&[f64]) -> f64 + Sync), k: usize, params: &LatticeNormParams) -> Result<LatticeNorm> {
    params.validate()?;
    if !params.center.is_empty() && params.center.len() != k {
        return Err(invalid("lattice.center", format!("has length {}, expected {k}", params.center.len())));
    }
    let (value, cubes) = evaluate(h, k, params, params.cube_points)?;
    let doubling_change = if params.self_check {
        let (fine, _) = evaluate(h, k, params, 2 * params.cube_points)?;
        Some(if fine == 0.0 { (fine - value).abs() } else { (fine - value).abs() / fine })
    } else {
        None
    };
    Ok(LatticeNorm { value, doubling_change, cubes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_indicator() {
        let h = |x: &[f64]| if x[0].abs() < 0.5 { 1.0 } else { 0.0 };
        for delta in [0.5, 1.0, 2.0, f64::INFINITY] {
            let p = LatticeNormParams::new(2.0, delta, 4.0).unwrap();
            assert!((lattice_qnorm(&h, 1, &p).unwrap().value - 1.0).abs() < 1e-14, "delta {delta}");
        }
    }

    #[test]
    fn constant_sup_norm() {
        let p = LatticeNormParams::new(2.0, f64::INFINITY, 3.0).unwrap();
        let v = lattice_qnorm(&|_: &[f64]| 1.0, 2, &p).unwrap().value;
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_cube_masses() {
        // sum_n (int_{C_n} e^{-2x^2})^{1/2} from erf differences at 30 digits
        let want = 1.896_494_706_168_104;
        let h = |x: &[f64]| (-x[0] * x[0]).exp();
        let p = LatticeNormParams::new(2.0, 1.0, 6.0).unwrap().with_points(512);
        let got = lattice_qnorm(&h, 1, &p).unwrap().value;
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn nan_names_cube() {
        let p = LatticeNormParams::new(1.0, 1.0, 3.0).unwrap();
        let h = |x: &[f64]| if x[0] > 2.5 { f64::NAN } else { 0.0 };
        match lattice_qnorm(&h, 1, &p) {
            Err(Error::NonFinite { cube }) => assert_eq!(cube, vec![3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LatticeNormParams::new(0.0, 1.0, 1.0).is_err());
        assert!(LatticeNormParams::new(1.0, 1.0, 0.5).is_err());
        assert!(LatticeNormParams::new(1.0, -1.0, 2.0).is_err());
    }
}
