//! Smoothness orders and the scaled sup-norms `N^{(n1, n2, m)}`.

use rayon::prelude::*;

use super::{Amplitude, Symbol, SymbolAmplitude};
use crate::error::{invalid, Result};

/// `(n, m) = (floor(d / q) + 1, floor((d + 1) / q) + 1)`.
pub fn smoothness_orders(d: usize, q: f64) -> Result<(usize, usize)> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid("q", format!("{q} is outside (0, 1]")));
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be positive"));
    }
    // guard against 1/q landing a hair below an integer
    let fl = |x: f64| (x + 1e-12).floor() as usize;
    Ok((fl(d as f64 / q) + 1, fl((d + 1) as f64 / q) + 1))
}

/// Sampling lattice for the sup in `N`. The sup is taken over a uniform
/// lattice covering the support ball plus a margin of one `l` (resp. `rho`),
/// so the result under-approximates the true sup. Density is counted per unit
/// of `l` (resp. `rho`); for `l = 1` it is points per unit length.
#[derive(Clone, Copy, Debug)]
pub struct NormSampling {
    pub density: f64,
    /// Upper bound on the number of lattice points; the density is reduced
    /// uniformly when exceeded.
    pub max_points: usize,
}

impl Default for NormSampling {
    fn default() -> Self {
        NormSampling { density: 64.0, max_points: 1 << 18 }
    }
}

struct Axis {
    center: f64,
    extent: f64,
    count: usize,
}

impl Axis {
    fn point(&self, i: usize) -> f64 {
        if self.count == 1 {
            return self.center;
        }
        self.center - self.extent + 2.0 * self.extent * i as f64 / (self.count - 1) as f64
    }
}

/// `max_{n <= n1, k <= n2, r <= m} sup l^{n+k} rho^r |grad_w^n grad_z^k grad_xi^r p|`.
pub fn norm_n(p: &dyn Amplitude, n1: usize, n2: usize, m: usize, ell: f64, rho: f64, sampling: NormSampling) -> Result<f64> {
    if !(ell > 0.0) || !(rho > 0.0) {
        return Err(invalid("scale", "l and rho must be positive"));
    }
    p.max_order().check(n1, n2, m)?;
    let d = p.dim();
    let support = p.support();
    let (wc, wr) = match &support {
        Some(s) => (s.w.center.clone(), s.w.radius),
        None => (vec![0.0; d], 3.0 * ell),
    };
    let (xc, xr) = match &support {
        Some(s) => (s.xi.center.clone(), s.xi.radius),
        None => (vec![0.0; d], 3.0 * rho),
    };
    let w_ext = wr + ell;
    let x_ext = xr + rho;
    let mut cw = (sampling.density * 2.0 * w_ext / ell).ceil() as usize + 1;
    let mut cx = (sampling.density * 2.0 * x_ext / rho).ceil() as usize + 1;
    let mut cz = if n2 > 0 || p.depends_on_z() { cw } else { 1 };
    let total = |cw: usize, cz: usize, cx: usize| (cw * cz * cx).pow(d as u32);
    while total(cw, cz, cx) > sampling.max_points && cw > 3 {
        cw = (cw * 3 / 4).max(3);
        cx = (cx * 3 / 4).max(3);
        if cz > 1 {
            cz = (cz * 3 / 4).max(3);
        }
    }
    let odd = |c: usize| if c % 2 == 0 { c + 1 } else { c };
    let (cw, cx) = (odd(cw), odd(cx));
    let cz = if cz > 1 { odd(cz) } else { 1 };
    let mut axes: Vec<Axis> = Vec::new();
    for i in 0..d {
        axes.push(Axis { center: wc[i], extent: w_ext, count: cw });
    }
    for _ in 0..d {
        axes.push(Axis { center: 0.0, extent: w_ext, count: cz });
    }
    for i in 0..d {
        axes.push(Axis { center: xc[i], extent: x_ext, count: cx });
    }
    let n_pts: usize = axes.iter().map(|a| a.count).product();
    let weights: Vec<f64> = {
        let mut v = Vec::new();
        for n in 0..=n1 {
            for k in 0..=n2 {
                for r in 0..=m {
                    v.push(ell.powi((n + k) as i32) * rho.powi(r as i32));
                }
            }
        }
        v
    };
    let best = (0..n_pts)
        .into_par_iter()
        .map(|flat| -> Result<f64> {
            let mut rem = flat;
            let mut pt = vec![0.0; 3 * d];
            for (slot, a) in axes.iter().enumerate() {
                pt[slot] = a.point(rem % a.count);
                rem /= a.count;
            }
            let (w, rest) = pt.split_at(d);
            let (z, xi) = rest.split_at(d);
            let g = p.grad_table(w, z, xi, n1, n2, m)?;
            let mut best = 0.0f64;
            let mut idx = 0;
            for n in 0..=n1 {
                for k in 0..=n2 {
                    for r in 0..=m {
                        best = best.max(weights[idx] * g.get(n, k, r));
                        idx += 1;
                    }
                }
            }
            Ok(best)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(best)
}

/// `N^{(n, m)}(a; l, rho)` for a symbol.
pub fn norm_n_symbol(a: &dyn Symbol, n: usize, m: usize, ell: f64, rho: f64, sampling: NormSampling) -> Result<f64> {
    let amp = SymbolAmplitude(a);
    norm_n(&amp, n, 0, m, ell, rho, sampling)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_examples() {
        assert_eq!(smoothness_orders(1, 1.0).unwrap(), (2, 3));
        assert_eq!(smoothness_orders(2, 0.5).unwrap(), (5, 7));
        assert_eq!(smoothness_orders(1, 0.5).unwrap(), (3, 5));
        assert!(smoothness_orders(1, 0.0).is_err());
        assert!(smoothness_orders(1, 1.5).is_err());
    }

    #[test]
    fn orders_at_non_integer_ratio() {
        // d/q = 1/0.3 = 3.33..
        assert_eq!(smoothness_orders(1, 0.3).unwrap(), (4, 7));
    }
}
