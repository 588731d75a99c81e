//! Symbols `a(w, xi)` and amplitudes `p(w, z, xi)` with derivative access.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod builtin;
pub mod finite_diff;
pub mod norm;
pub mod profile;
pub mod separable;
pub mod tmatrix;

pub use builtin::{builtin_family, list_families, FamilyParams, Fixture};
pub use finite_diff::FnSymbol;
pub use norm::{norm_n, norm_n_symbol, smoothness_orders, NormSampling};
pub use profile::{zeta, Factor, Profile, UNLIMITED};
pub use separable::{SeparableAmplitude, SeparableSymbol, Term};
pub use tmatrix::{Guards, TMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(&self.center, x) < self.radius
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Support balls: `w` in `B(u, l)` and `xi` in `B(mu, rho)`. `z` is unconstrained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub w: Ball,
    pub xi: Ball,
}

/// Highest guaranteed derivative order per variable group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orders {
    pub w: usize,
    pub z: usize,
    pub xi: usize,
}

impl Orders {
    pub fn check(&self, w: usize, z: usize, xi: usize) -> Result<()> {
        for (group, req, avail) in [("w", w, self.w), ("z", z, self.z), ("xi", xi, self.xi)] {
            if req > avail {
                return Err(Error::UnsupportedOrder { group, requested: req, available: avail });
            }
        }
        Ok(())
    }
}

/// `|d^k_w d^l_xi a| <= a (1 + |w|)^(-gamma_w) (1 + |xi|)^(-gamma_xi)` for `k, l <= order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub a: f64,
    pub gamma_w: f64,
    pub gamma_xi: f64,
    pub order: usize,
}

/// All multi-indices of dimension `d` with `|beta| = k`.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    match d {
        0 => {
            if k == 0 {
                vec![vec![]]
            } else {
                vec![]
            }
        }
        1 => vec![vec![k]],
        _ => {
            let mut out = Vec::new();
            for first in (0..=k).rev() {
                for mut rest in multi_indices(d - 1, k - first) {
                    rest.insert(0, first);
                    out.push(rest);
                }
            }
            out
        }
    }
}

/// `g[n][k][r] = sum over |beta|=n, |gamma|=k, |delta|=r of |d^beta_w d^gamma_z d^delta_xi p|`.
#[derive(Clone, Debug)]
pub struct GradTable {
    pub nw: usize,
    pub nz: usize,
    pub nxi: usize,
    data: Vec<f64>,
}

impl GradTable {
    pub fn zeros(nw: usize, nz: usize, nxi: usize) -> Self {
        GradTable { nw, nz, nxi, data: vec![0.0; (nw + 1) * (nz + 1) * (nxi + 1)] }
    }

    fn idx(&self, n: usize, k: usize, r: usize) -> usize {
        (n * (self.nz + 1) + k) * (self.nxi + 1) + r
    }

    pub fn get(&self, n: usize, k: usize, r: usize) -> f64 {
        self.data[self.idx(n, k, r)]
    }

    pub fn add(&mut self, n: usize, k: usize, r: usize, v: f64) {
        let i = self.idx(n, k, r);
        self.data[i] += v;
    }
}

pub trait Amplitude: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, w: &[f64], z: &[f64], xi: &[f64]) -> C64;
    fn deriv(&self, kw: &[usize], kz: &[usize], kxi: &[usize], w: &[f64], z: &[f64], xi: &[f64]) -> Result<C64>;
    fn support(&self) -> Option<Support>;
    fn max_order(&self) -> Orders;
    fn describe(&self) -> String;

    fn grad_table(&self, w: &[f64], z: &[f64], xi: &[f64], nw: usize, nz: usize, nxi: usize) -> Result<GradTable> {
        self.max_order().check(nw, nz, nxi)?;
        let d = self.dim();
        let mut g = GradTable::zeros(nw, nz, nxi);
        for n in 0..=nw {
            for bw in multi_indices(d, n) {
                for k in 0..=nz {
                    for bz in multi_indices(d, k) {
                        for r in 0..=nxi {
                            for bx in multi_indices(d, r) {
                                g.add(n, k, r, self.deriv(&bw, &bz, &bx, w, z, xi)?.norm());
                            }
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    fn depends_on_z(&self) -> bool {
        true
    }

    /// Fast-path access for sums of products of univariate factors.
    fn separable(&self) -> Option<&SeparableAmplitude> {
        None
    }
}

pub trait Symbol: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, w: &[f64], xi: &[f64]) -> C64;
    fn deriv(&self, kw: &[usize], kxi: &[usize], w: &[f64], xi: &[f64]) -> Result<C64>;
    fn support(&self) -> Option<Support>;
    /// `z` is meaningless for symbols and reported as unlimited.
    fn max_order(&self) -> Orders;
    fn decay(&self) -> Option<Decay> {
        None
    }
    fn describe(&self) -> String;

    fn grad_table(&self, w: &[f64], xi: &[f64], nw: usize, nxi: usize) -> Result<GradTable> {
        self.max_order().check(nw, 0, nxi)?;
        let d = self.dim();
        let mut g = GradTable::zeros(nw, 0, nxi);
        for n in 0..=nw {
            for bw in multi_indices(d, n) {
                for r in 0..=nxi {
                    for bx in multi_indices(d, r) {
                        g.add(n, 0, r, self.deriv(&bw, &bx, w, xi)?.norm());
                    }
                }
            }
        }
        Ok(g)
    }

    /// The same function viewed as a `z`-independent amplitude.
    fn separable(&self) -> Option<&SeparableAmplitude> {
        None
    }
}

/// A symbol used as the amplitude `p(w, z, xi) = a(w, xi)`.
#[derive(Clone, Copy)]
pub struct SymbolAmplitude<'a>(pub &'a dyn Symbol);

impl Amplitude for SymbolAmplitude<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, w: &[f64], _z: &[f64], xi: &[f64]) -> C64 {
        self.0.eval(w, xi)
    }

    fn deriv(&self, kw: &[usize], kz: &[usize], kxi: &[usize], w: &[f64], _z: &[f64], xi: &[f64]) -> Result<C64> {
        if kz.iter().any(|&k| k > 0) {
            return Ok(C64::new(0.0, 0.0));
        }
        self.0.deriv(kw, kxi, w, xi)
    }

    fn support(&self) -> Option<Support> {
        self.0.support()
    }

    fn max_order(&self) -> Orders {
        self.0.max_order()
    }

    fn describe(&self) -> String {
        self.0.describe()
    }

    fn grad_table(&self, w: &[f64], _z: &[f64], xi: &[f64], nw: usize, nz: usize, nxi: usize) -> Result<GradTable> {
        let inner = self.0.grad_table(w, xi, nw, nxi)?;
        let mut g = GradTable::zeros(nw, nz, nxi);
        for n in 0..=nw {
            for r in 0..=nxi {
                g.add(n, 0, r, inner.get(n, 0, r));
            }
        }
        Ok(g)
    }

    fn depends_on_z(&self) -> bool {
        false
    }

    fn separable(&self) -> Option<&SeparableAmplitude> {
        self.0.separable()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(2, 5).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(2, 0), vec![vec![0, 0]]);
    }

    #[test]
    fn orders_check_names_group() {
        let o = Orders { w: 3, z: 3, xi: 2 };
        assert!(o.check(3, 0, 2).is_ok());
        match o.check(0, 0, 3) {
            Err(Error::UnsupportedOrder { group, requested, available }) => {
                assert_eq!((group, requested, available), ("xi", 3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
