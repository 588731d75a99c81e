//! Fourier multipliers `Op_alpha(a)` with `a` depending on `xi` only.
//!
//! Indicators of intervals and polygons are integrated in closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;

use super::assemble::{assemble_t_quant, check_grid_resolution, default_quadrature};
use super::{Grid, OperatorMatrix, Provenance};
use crate::error::{invalid, Error, Result};
use crate::symbols::profile::interval_fourier;
use crate::symbols::{SeparableSymbol, Symbol};
use crate::C64;

#[derive(Clone)]
pub enum Multiplier {
    /// `chi_(lo, hi)` in d = 1.
    Interval { lo: f64, hi: f64 },
    /// Indicator of a simple polygon in d = 2. Orientation is normalized on construction.
    Polygon { vertices: Vec<[f64; 2]> },
    /// A smooth symbol whose `w`-factors are constant.
    Smooth(Arc<SeparableSymbol>),
    Zero { d: usize },
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|i| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        a[0] * b[1] - a[1] * b[0]
    })
    .sum::<f64>()
        / 2.0
}

impl Multiplier {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid("interval", format!("need finite lo < hi, got ({lo}, {hi})")));
        }
        Ok(Multiplier::Interval { lo, hi })
    }

    pub fn polygon(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(invalid("polygon", "needs at least three vertices"));
        }
        let a = signed_area(&vertices);
        if a.abs() < 1e-14 {
            return Err(invalid("polygon", "has zero area"));
        }
        if a < 0.0 {
            vertices.reverse();
        }
        Ok(Multiplier::Polygon { vertices })
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::polygon(vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    }

    pub fn smooth(a: Arc<SeparableSymbol>) -> Result<Self> {
        if a.0.terms.iter().any(|t| t.w.iter().any(|f| !f.is_constant())) {
            return Err(invalid("multiplier", "symbol depends on w"));
        }
        Ok(Multiplier::Smooth(a))
    }

    pub fn dim(&self) -> usize {
        match self {
            Multiplier::Interval { .. } => 1,
            Multiplier::Polygon { .. } => 2,
            Multiplier::Smooth(a) => a.dim(),
            Multiplier::Zero { d } => *d,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Multiplier::Interval { lo, hi } => format!("chi({lo}, {hi})"),
            Multiplier::Polygon { vertices } => format!("chi(polygon, {} vertices)", vertices.len()),
            Multiplier::Smooth(a) => a.describe(),
            Multiplier::Zero { .. } => "0".into(),
        }
    }

    /// Largest `|xi_i|` over the support, used for the grid resolution guard.
    pub fn xi_max(&self) -> f64 {
        match self {
            Multiplier::Interval { lo, hi } => lo.abs().max(hi.abs()),
            Multiplier::Polygon { vertices } => vertices.iter().flat_map(|v| [v[0].abs(), v[1].abs()]).fold(0.0, f64::max),
            Multiplier::Smooth(a) => a.support().map(|s| s.xi.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + s.xi.radius).unwrap_or(f64::INFINITY),
            Multiplier::Zero { .. } => 0.0,
        }
    }
}

/// Complete homogeneous symmetric polynomial of degree `k` in three variables.
fn h3(k: usize, a: C64, b: C64, c: C64) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    let mut ai = C64::new(1.0, 0.0);
    for i in 0..=k {
        let mut bj = C64::new(1.0, 0.0);
        for j in 0..=(k - i) {
            total += ai * bj * c.powu((k - i - j) as u32);
            bj *= b;
        }
        ai *= a;
    }
    total
}

/// `int_Omega e^{i kappa . xi} dxi` over a counter-clockwise polygon.
pub fn polygon_fourier(vertices: &[[f64; 2]], kappa: [f64; 2]) -> C64 {
    let n = vertices.len();
    let area = signed_area(vertices);
    let mut c = [0.0; 2];
    for v in vertices {
        c[0] += v[0] / n as f64;
        c[1] += v[1] / n as f64;
    }
    let radius = vertices.iter().map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)).sqrt()).fold(0.0, f64::max);
    let k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1];
    let kr = k2.sqrt() * radius;
    let dot = |p: [f64; 2]| kappa[0] * (p[0] - c[0]) + kappa[1] * (p[1] - c[1]);
    let shift = C64::from_polar(1.0, kappa[0] * c[0] + kappa[1] * c[1]);
    if kr < 1.0 {
        // power series of e^{i f} with f linear, using exact triangle moments:
        // int_T f^k = 2|T| k!/(k+2)! h_k(f(a), f(b), f(c))
        if k2 == 0.0 {
            return C64::new(area, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        let p0 = vertices[0];
        for i in 1..n - 1 {
            let (p1, p2) = (vertices[i], vertices[i + 1]);
            let tri = ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])) / 2.0;
            let (fa, fb, fc) = (C64::new(dot(p0), 0.0), C64::new(dot(p1), 0.0), C64::new(dot(p2), 0.0));
            let mut ik = C64::new(1.0, 0.0);
            let mut s = C64::new(0.0, 0.0);
            for k in 0..32usize {
                // i^k / k! * 2 k!/(k+2)! = 2 i^k / (k+2)!
                let fact: f64 = (1..=k + 2).map(|j| j as f64).product();
                s += ik * h3(k, fa, fb, fc) * (2.0 / fact);
                ik *= C64::new(0.0, 1.0);
            }
            acc += s * tri;
        }
        return acc * shift;
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let nu = kappa[0] * dy - kappa[1] * dx;
        let half = (kappa[0] * dx + kappa[1] * dy) / 2.0;
        let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
        let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        acc += C64::from_polar(nu * sinc, dot(m));
    }
    acc * C64::new(0.0, -1.0 / k2) * shift
}

/// Nyström matrix of `Op_alpha(a)` for a `w`-independent symbol.
pub fn assemble_multiplier(m: &Multiplier, alpha: f64, grid: &Grid) -> Result<OperatorMatrix> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha", "must be positive and finite"));
    }
    if m.dim() != grid.d {
        return Err(Error::GridMismatch(format!("multiplier d={} on grid d={}", m.dim(), grid.d)));
    }
    let n = grid.n_per_axis;
    let h = grid.h();
    let size = grid.size();
    let prov = Provenance {
        operator: format!("Op[{}]", m.describe()),
        alpha: Some(alpha),
        ..Default::default()
    };
    let mat = match m {
        Multiplier::Zero { .. } => Mat::zeros(size, size),
        Multiplier::Smooth(a) => {
            let quad = default_quadrature(a.as_ref(), alpha, grid)?;
            let mut out = assemble_t_quant(a.as_ref(), 0.0, alpha, grid, &quad)?;
            out.provenance = Provenance { n_xi: Some(quad.n_xi), ..prov };
            return Ok(out);
        }
        Multiplier::Interval { lo, hi } => {
            check_grid_resolution(alpha, m.xi_max(), grid)?;
            let pref = alpha / (2.0 * PI) * h;
            let table: Vec<C64> = (0..n).map(|s| interval_fourier(*lo, *hi, alpha * h * s as f64) * pref).collect();
            Mat::from_fn(n, n, |i, j| if i >= j { table[i - j] } else { table[j - i].conj() })
        }
        Multiplier::Polygon { vertices } => {
            check_grid_resolution(alpha, m.xi_max(), grid)?;
            let pref = (alpha / (2.0 * PI) * h).powi(2);
            let w = 2 * n - 1;
            let table: Vec<C64> = (0..w * w)
                .into_par_iter()
                .map(|k| {
                    let (da, db) = ((k / w) as f64 - (n - 1) as f64, (k % w) as f64 - (n - 1) as f64);
                    polygon_fourier(vertices, [alpha * h * da, alpha * h * db]) * pref
                })
                .collect();
            Mat::from_fn(size, size, |r, c| {
                let (ra, rb) = (r / n, r % n);
                let (ca, cb) = (c / n, c % n);
                table[(ra + n - 1 - ca) * w + (rb + n - 1 - cb)]
            })
        }
    };
    Ok(OperatorMatrix::square(mat, grid.clone(), prov))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_fourier_factorizes() {
        let v = vec![[-0.3, 0.2], [1.1, 0.2], [1.1, 0.9], [-0.3, 0.9]];
        for kappa in [[0.0, 0.0], [0.1, -0.2], [0.7, 0.4], [3.0, -5.0], [20.0, 0.0], [0.0, 13.0]] {
            let got = polygon_fourier(&v, kappa);
            let want = interval_fourier(-0.3, 1.1, kappa[0]) * interval_fourier(0.2, 0.9, kappa[1]);
            assert!((got - want).norm() < 1e-12, "{kappa:?}: {got} vs {want}");
        }
    }

    #[test]
    fn triangle_fourier_matches_midpoint_sum() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.2, 0.8]];
        let n = 800;
        let h = 1.0 / n as f64;
        for kappa in [[0.5, 0.3], [4.0, -2.5]] {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                    // inside test for this triangle
                    if y < 0.8 * x / 0.2 && y < 0.8 * (1.0 - x) / 0.8 {
                        acc += C64::from_polar(h * h, kappa[0] * x + kappa[1] * y);
                    }
                }
            }
            let got = polygon_fourier(&v, kappa);
            assert!((got - acc).norm() < 3e-3, "{got} vs {acc}");
        }
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Multiplier::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        let Multiplier::Polygon { vertices } = m else { unreachable!() };
        assert!(signed_area(&vertices) > 0.0);
    }
}
