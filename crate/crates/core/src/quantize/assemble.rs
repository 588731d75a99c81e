//! Kernels `(alpha/2pi)^d int e^{i alpha (x-y).xi} p(t11 x + t12 y, t21 x + t22 y, xi) dxi`.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Grid, OperatorMatrix, Provenance};
use crate::error::{invalid, Error, Result};
use crate::symbols::{Amplitude, Factor, SeparableAmplitude, Symbol, SymbolAmplitude, TMatrix};
use crate::C64;

/// Midpoint tensor rule on the bounding box of the ball `B(center, radius)`,
/// masked to the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiQuadrature {
    pub center: Vec<f64>,
    pub radius: f64,
    pub n_xi: usize,
}

pub const DEFAULT_SAFETY: f64 = 4.0;
pub const MIN_N_XI: usize = 64;

impl XiQuadrature {
    pub fn new(center: Vec<f64>, radius: f64, n_xi: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("quadrature.radius", "must be positive"));
        }
        if n_xi == 0 {
            return Err(invalid("quadrature.n_xi", "must be positive"));
        }
        Ok(XiQuadrature { center, radius, n_xi })
    }

    pub fn delta(&self) -> f64 {
        2.0 * self.radius / self.n_xi as f64
    }

    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        let c = self.center[axis];
        let h = self.delta();
        (0..self.n_xi).map(|k| c - self.radius + (k as f64 + 0.5) * h).collect()
    }

    /// Smallest `n_xi` with `alpha * dxi * diam(box) <= pi / safety`.
    pub fn required_n(radius: f64, alpha: f64, grid: &Grid, safety: f64) -> usize {
        (alpha * 2.0 * radius * grid.diameter() * safety / PI).ceil() as usize
    }

    /// Resolution chosen from the guard, never below `MIN_N_XI`.
    pub fn auto(center: Vec<f64>, radius: f64, alpha: f64, grid: &Grid, safety: f64) -> Result<Self> {
        let n = Self::required_n(radius, alpha, grid, safety).max(MIN_N_XI);
        Self::new(center, radius, n)
    }

    pub fn for_amplitude(p: &dyn Amplitude, alpha: f64, grid: &Grid, safety: f64) -> Result<Self> {
        let s = p
            .support()
            .ok_or_else(|| invalid("quadrature", "amplitude has no xi-support; give an explicit quadrature ball"))?;
        Self::auto(s.xi.center, s.xi.radius, alpha, grid, safety)
    }

    pub fn check(&self, alpha: f64, grid: &Grid, safety: f64) -> Result<()> {
        let lhs = alpha * self.delta() * grid.diameter();
        if lhs > PI / safety * (1.0 + 1e-12) {
            return Err(Error::Nyquist {
                what: format!("alpha*dxi*diam = {lhs:.4} exceeds pi/{safety}"),
                required: Self::required_n(self.radius, alpha, grid, safety),
                unit: "xi nodes per axis",
            });
        }
        Ok(())
    }
}

/// The x-grid must resolve the oscillation `e^{i alpha x xi}` for `|xi_i| <= xi_max`.
pub fn check_grid_resolution(alpha: f64, xi_max: f64, grid: &Grid) -> Result<()> {
    let v = alpha * xi_max * grid.h();
    if v >= PI {
        let required = (alpha * xi_max * 2.0 * grid.half_width / PI).floor() as usize + 1;
        return Err(Error::Nyquist {
            what: format!("alpha*xi_max*h = {v:.4} is not below pi"),
            required,
            unit: "grid points per axis",
        });
    }
    Ok(())
}

fn xi_max(quad: &XiQuadrature) -> f64 {
    quad.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + quad.radius
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha", "must be positive and finite"));
    }
    Ok(())
}

fn support_warning(p: &dyn Amplitude, grid: &Grid) -> Option<String> {
    let s = p.support()?;
    let reach = s.w.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + s.w.radius;
    if reach > grid.half_width {
        let mut mass = 0.0f64;
        let xi = s.xi.center.clone();
        for i in 0..grid.size() {
            let mi = grid.multi_index(i);
            if mi.iter().any(|&k| k == 0 || k + 1 == grid.n_per_axis) {
                let x = grid.point(i);
                mass = mass.max(p.eval(&x, &vec![0.0; grid.d], &xi).norm());
            }
        }
        let msg = format!("w-support reaches {reach} beyond the box half-width {}; boundary mass {mass:.3e}", grid.half_width);
        log::warn!("{msg}");
        return Some(msg);
    }
    None
}

/// `int e^{i kappa xi} f(xi) dxi` at `kappa = alpha h s`, `s = 0..n`.
/// Negative `s` follow by conjugation since profiles are real.
fn factor_fourier_table(f: &Factor, alpha_h: f64, n: usize, nodes: &[f64], dxi: f64) -> Vec<C64> {
    if f.has_closed_form_fourier() {
        return (0..n).map(|s| f.fourier_closed_form(alpha_h * s as f64).unwrap()).collect();
    }
    let vals: Vec<(f64, f64)> = nodes.iter().map(|&x| (x, f.eval(x) * dxi)).filter(|(_, v)| *v != 0.0).collect();
    (0..n)
        .into_par_iter()
        .map(|s| {
            let kappa = alpha_h * s as f64;
            let mut acc = C64::new(0.0, 0.0);
            for &(x, v) in &vals {
                let (sn, cs) = (kappa * x).sin_cos();
                acc += C64::new(cs * v, sn * v);
            }
            acc
        })
        .collect()
}

fn diff_lookup(table: &[C64], s: isize) -> C64 {
    if s >= 0 {
        table[s as usize]
    } else {
        table[(-s) as usize].conj()
    }
}

fn uses_sampling(p: &SeparableAmplitude) -> bool {
    p.terms.iter().any(|t| t.xi.iter().any(|f| !f.has_closed_form_fourier()))
}

fn assemble_separable(p: &SeparableAmplitude, t: &TMatrix, alpha: f64, grid: &Grid, quad: &XiQuadrature) -> Result<Mat<C64>> {
    let d = grid.d;
    let n = grid.n_per_axis;
    let x = grid.axis_points();
    let h = grid.h();
    let pref = (alpha / (2.0 * PI)).powi(d as i32) * grid.weight();
    let dxi = quad.delta();
    // per term, per axis: n x n table of W(w) Z(z) Ghat(alpha (x_a - x_b))
    let mut tables: Vec<(C64, Vec<Vec<C64>>)> = Vec::with_capacity(p.terms.len());
    for term in &p.terms {
        let mut per_axis = Vec::with_capacity(d);
        for i in 0..d {
            let nodes = quad.axis_nodes(i);
            let ghat = factor_fourier_table(&term.xi[i], alpha * h, n, &nodes, dxi);
            let wf = &term.w[i];
            let zf = term.z.get(i);
            let tab: Vec<C64> = (0..n * n)
                .into_par_iter()
                .map(|ab| {
                    let (a, b) = (ab / n, ab % n);
                    let mut v = wf.eval(t.t11 * x[a] + t.t12 * x[b]);
                    if v == 0.0 {
                        return C64::new(0.0, 0.0);
                    }
                    if let Some(zf) = zf {
                        v *= zf.eval(t.t21 * x[a] + t.t22 * x[b]);
                    }
                    diff_lookup(&ghat, a as isize - b as isize) * v
                })
                .collect();
            per_axis.push(tab);
        }
        tables.push((term.coeff, per_axis));
    }
    let size = grid.size();
    let mut data = vec![C64::new(0.0, 0.0); size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(row, out)| {
        let ri = grid.multi_index(row);
        for (col, slot) in out.iter_mut().enumerate() {
            let ci = grid.multi_index(col);
            let mut acc = C64::new(0.0, 0.0);
            for (coeff, per_axis) in &tables {
                let mut v = *coeff;
                for k in 0..d {
                    v *= per_axis[k][ri[k] * n + ci[k]];
                }
                acc += v;
            }
            *slot = acc * pref;
        }
    });
    Ok(Mat::from_fn(size, size, |i, j| data[i * size + j]))
}

/// Direct quadrature of the kernel, one amplitude evaluation per (x, y, xi) triple.
/// Independent of the separable fast path and used to cross-check it.
pub fn assemble_amplitude_generic(p: &dyn Amplitude, t: &TMatrix, alpha: f64, grid: &Grid, quad: &XiQuadrature) -> Result<OperatorMatrix> {
    check_alpha(alpha)?;
    let d = grid.d;
    if p.dim() != d || quad.center.len() != d {
        return Err(Error::GridMismatch(format!("amplitude d={} on grid d={d}", p.dim())));
    }
    let axis_nodes: Vec<Vec<f64>> = (0..d).map(|i| quad.axis_nodes(i)).collect();
    let mut nodes: Vec<Vec<f64>> = Vec::new();
    let total = quad.n_xi.pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut pt = vec![0.0; d];
        for k in (0..d).rev() {
            pt[k] = axis_nodes[k][rem % quad.n_xi];
            rem /= quad.n_xi;
        }
        let r2: f64 = pt.iter().zip(&quad.center).map(|(a, c)| (a - c) * (a - c)).sum();
        if d == 1 || r2 < quad.radius * quad.radius {
            nodes.push(pt);
        }
    }
    let pref = (alpha / (2.0 * PI)).powi(d as i32) * grid.weight() * quad.delta().powi(d as i32);
    let size = grid.size();
    let pts: Vec<Vec<f64>> = (0..size).map(|i| grid.point(i)).collect();
    let mut data = vec![C64::new(0.0, 0.0); size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(row, out)| {
        let xr = &pts[row];
        for (col, slot) in out.iter_mut().enumerate() {
            let yc = &pts[col];
            let (w, z) = t.forward(xr, yc);
            let mut acc = C64::new(0.0, 0.0);
            for xi in &nodes {
                let v = p.eval(&w, &z, xi);
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                let phase: f64 = alpha * (0..d).map(|k| (xr[k] - yc[k]) * xi[k]).sum::<f64>();
                let (sn, cs) = phase.sin_cos();
                acc += v * C64::new(cs, sn);
            }
            *slot = acc * pref;
        }
    });
    let mat = Mat::from_fn(size, size, |i, j| data[i * size + j]);
    let prov = Provenance {
        operator: format!("Op^a[{}] (direct quadrature)", p.describe()),
        alpha: Some(alpha),
        t_matrix: Some(*t),
        n_xi: Some(quad.n_xi),
        warnings: support_warning(p, grid).into_iter().collect(),
    };
    Ok(OperatorMatrix::square(mat, grid.clone(), prov))
}

/// Nyström matrix of `Op^a_alpha(p_T)`.
pub fn assemble_amplitude(p: &dyn Amplitude, t: &TMatrix, alpha: f64, grid: &Grid, quad: &XiQuadrature) -> Result<OperatorMatrix> {
    check_alpha(alpha)?;
    if p.dim() != grid.d || quad.center.len() != grid.d {
        return Err(Error::GridMismatch(format!("amplitude d={} on grid d={}", p.dim(), grid.d)));
    }
    check_grid_resolution(alpha, xi_max(quad), grid)?;
    let Some(sep) = p.separable() else {
        quad.check(alpha, grid, DEFAULT_SAFETY)?;
        return assemble_amplitude_generic(p, t, alpha, grid, quad);
    };
    if uses_sampling(sep) {
        quad.check(alpha, grid, DEFAULT_SAFETY)?;
    }
    let mat = if sep.is_zero() { Mat::zeros(grid.size(), grid.size()) } else { assemble_separable(sep, t, alpha, grid, quad)? };
    let prov = Provenance {
        operator: format!("Op^a[{}]", p.describe()),
        alpha: Some(alpha),
        t_matrix: Some(*t),
        n_xi: Some(quad.n_xi),
        warnings: support_warning(p, grid).into_iter().collect(),
    };
    Ok(OperatorMatrix::square(mat, grid.clone(), prov))
}

/// Nyström matrix of `Op_{alpha,t}(a)`.
pub fn assemble_t_quant(a: &dyn Symbol, t: f64, alpha: f64, grid: &Grid, quad: &XiQuadrature) -> Result<OperatorMatrix> {
    let tm = TMatrix::from_t(t)?;
    let mut m = assemble_amplitude(&SymbolAmplitude(a), &tm, alpha, grid, quad)?;
    m.provenance.operator = format!("Op_t[{}] t={t}", a.describe());
    Ok(m)
}

/// Quadrature for a symbol's own support ball at the default safety factor.
pub fn default_quadrature(a: &dyn Symbol, alpha: f64, grid: &Grid) -> Result<XiQuadrature> {
    XiQuadrature::for_amplitude(&SymbolAmplitude(a), alpha, grid, DEFAULT_SAFETY)
}
