//! User-supplied symbols with finite-difference derivatives.
//!
//! Derivatives use the central stencil `sum_j (-1)^j C(k, j) f(x + (k/2 - j) h) / h^k`
//! along each coordinate, which is accurate to O(h^2). Beyond order 2 the
//! results are dominated by rounding, so `max_order` defaults to 2.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{Decay, Orders, Support, Symbol};
use crate::error::{Error, Result};
use crate::jet::binomial;

type SymbolFn = dyn Fn(&[f64], &[f64]) -> C64 + Send + Sync;

#[derive(Clone)]
pub struct FnSymbol {
    pub d: usize,
    f: Arc<SymbolFn>,
    pub support: Option<Support>,
    pub decay: Option<Decay>,
    pub step: f64,
    pub max_order: usize,
    pub label: String,
}

impl FnSymbol {
    pub fn new(d: usize, f: impl Fn(&[f64], &[f64]) -> C64 + Send + Sync + 'static) -> Self {
        FnSymbol { d, f: Arc::new(f), support: None, decay: None, step: 1e-4, max_order: 2, label: "user".into() }
    }

    pub fn with_support(mut self, s: Support) -> Self {
        self.support = Some(s);
        self
    }

    pub fn with_step(mut self, step: f64, max_order: usize) -> Self {
        self.step = step;
        self.max_order = max_order;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl Symbol for FnSymbol {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, w: &[f64], xi: &[f64]) -> C64 {
        (self.f)(w, xi)
    }

    fn deriv(&self, kw: &[usize], kxi: &[usize], w: &[f64], xi: &[f64]) -> Result<C64> {
        let (nw, nx): (usize, usize) = (kw.iter().sum(), kxi.iter().sum());
        for (group, req) in [("w", nw), ("xi", nx)] {
            if req > self.max_order {
                return Err(Error::UnsupportedOrder { group, requested: req, available: self.max_order });
            }
        }
        let orders: Vec<usize> = kw.iter().chain(kxi).copied().collect();
        let base: Vec<f64> = w.iter().chain(xi).copied().collect();
        let h = self.step;
        let mut pt = base.clone();
        let mut acc = C64::new(0.0, 0.0);
        // enumerate the tensor stencil
        let sizes: Vec<usize> = orders.iter().map(|k| k + 1).collect();
        let total: usize = sizes.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut weight = 1.0;
            for (axis, &k) in orders.iter().enumerate() {
                let j = rem % (k + 1);
                rem /= k + 1;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                weight *= sign * binomial(k, j) / h.powi(k as i32);
                pt[axis] = base[axis] + (k as f64 / 2.0 - j as f64) * h;
            }
            let (pw, px) = pt.split_at(self.d);
            acc += (self.f)(pw, px) * weight;
        }
        Ok(acc)
    }

    fn support(&self) -> Option<Support> {
        self.support.clone()
    }

    fn max_order(&self) -> Orders {
        Orders { w: self.max_order, z: usize::MAX, xi: self.max_order }
    }

    fn decay(&self) -> Option<Decay> {
        self.decay.clone()
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_differences_of_gaussian() {
        let s = FnSymbol::new(1, |w, xi| C64::new((-w[0] * w[0] - xi[0] * xi[0]).exp(), 0.0));
        let (w, xi): (f64, f64) = (0.4, -0.3);
        let e = (-w * w - xi * xi).exp();
        let dw = s.deriv(&[1], &[0], &[w], &[xi]).unwrap().re;
        assert!((dw - (-2.0 * w * e)).abs() < 1e-7);
        let dwx = s.deriv(&[1], &[1], &[w], &[xi]).unwrap().re;
        assert!((dwx - 4.0 * w * xi * e).abs() < 1e-6);
        let dxx = s.deriv(&[0], &[2], &[w], &[xi]).unwrap().re;
        assert!((dxx - (4.0 * xi * xi - 2.0) * e).abs() < 1e-6);
        assert!(s.deriv(&[3], &[0], &[w], &[xi]).is_err());
    }
}
