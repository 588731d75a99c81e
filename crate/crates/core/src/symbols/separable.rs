//! Sums of products of univariate factors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::profile::{Factor, UNLIMITED};
use super::{multi_indices, Amplitude, Ball, Decay, GradTable, Orders, Support, Symbol};
use crate::error::{invalid, Result};

/// `coeff * prod_i w[i](w_i) * z[i](z_i) * xi[i](xi_i)`. An empty `z` means
/// the term does not depend on `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub w: Vec<Factor>,
    #[serde(default)]
    pub z: Vec<Factor>,
    pub xi: Vec<Factor>,
}

impl Term {
    fn z_factor(&self, i: usize) -> Option<&Factor> {
        self.z.get(i)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableAmplitude {
    pub d: usize,
    pub terms: Vec<Term>,
    pub support: Option<Support>,
    pub decay: Option<Decay>,
    pub label: String,
}

fn group_order(factors: &[Factor]) -> usize {
    factors.iter().map(Factor::max_order).min().unwrap_or(UNLIMITED)
}

impl SeparableAmplitude {
    pub fn new(d: usize, terms: Vec<Term>, support: Option<Support>, label: impl Into<String>) -> Result<Self> {
        if d == 0 || d > 2 {
            return Err(invalid("d", format!("dimension {d} is outside 1..=2")));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.w.len() != d || t.xi.len() != d || !(t.z.is_empty() || t.z.len() == d) {
                return Err(invalid("terms", format!("term {i} has factor counts inconsistent with d={d}")));
            }
        }
        if let Some(s) = &support {
            if s.w.center.len() != d || s.xi.center.len() != d || s.w.radius <= 0.0 || s.xi.radius <= 0.0 {
                return Err(invalid("support", "ball centers must have length d and radii must be positive"));
            }
        }
        Ok(SeparableAmplitude { d, terms, support, decay: None, label: label.into() })
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == C64::new(0.0, 0.0))
    }

    pub fn depends_on_z(&self) -> bool {
        self.terms.iter().any(|t| t.z.iter().any(|f| !f.is_constant()))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.conj();
        }
        out.label = format!("conj({})", self.label);
        out
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= c;
        }
        if let Some(dec) = &mut out.decay {
            dec.a *= c.norm();
        }
        out
    }

    /// `p^{(l1, rho1)}(w, z, xi) = p(l1 w, l1 z, rho1 xi)`.
    pub fn rescale(&self, l1: f64, rho1: f64) -> Result<Self> {
        if !(l1 > 0.0) || !(rho1 > 0.0) {
            return Err(invalid("scale", "l1 and rho1 must be positive"));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff,
                w: t.w.iter().map(|f| f.dilate(l1)).collect(),
                z: t.z.iter().map(|f| f.dilate(l1)).collect(),
                xi: t.xi.iter().map(|f| f.dilate(rho1)).collect(),
            })
            .collect();
        let support = self.support.as_ref().map(|s| Support {
            w: Ball::new(s.w.center.iter().map(|c| c / l1).collect(), s.w.radius / l1),
            xi: Ball::new(s.xi.center.iter().map(|c| c / rho1).collect(), s.xi.radius / rho1),
        });
        // decay bounds do not survive dilation in the same form
        Ok(SeparableAmplitude {
            d: self.d,
            terms,
            support,
            decay: None,
            label: format!("{}^({l1},{rho1})", self.label),
        })
    }

    pub fn orders(&self) -> Orders {
        let mut o = Orders { w: UNLIMITED, z: UNLIMITED, xi: UNLIMITED };
        for t in &self.terms {
            o.w = o.w.min(group_order(&t.w));
            o.z = o.z.min(group_order(&t.z));
            o.xi = o.xi.min(group_order(&t.xi));
        }
        o
    }

    pub fn value(&self, w: &[f64], z: &[f64], xi: &[f64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = 1.0;
            for i in 0..self.d {
                v *= t.w[i].eval(w[i]) * t.xi[i].eval(xi[i]);
                if let Some(f) = t.z_factor(i) {
                    v *= f.eval(z[i]);
                }
                if v == 0.0 {
                    break;
                }
            }
            s += t.coeff * v;
        }
        s
    }

    pub fn derivative(&self, kw: &[usize], kz: &[usize], kxi: &[usize], w: &[f64], z: &[f64], xi: &[f64]) -> Result<C64> {
        let (nw, nz, nx) = (kw.iter().sum(), kz.iter().sum(), kxi.iter().sum());
        self.orders().check(nw, nz, nx)?;
        let mut s = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = 1.0;
            for i in 0..self.d {
                v *= t.w[i].derivatives(w[i], kw[i])[kw[i]];
                v *= t.xi[i].derivatives(xi[i], kxi[i])[kxi[i]];
                match t.z_factor(i) {
                    Some(f) => v *= f.derivatives(z[i], kz[i])[kz[i]],
                    None if kz[i] > 0 => v = 0.0,
                    None => {}
                }
            }
            s += t.coeff * v;
        }
        Ok(s)
    }

    /// Derivative sums via one jet per (term, axis, group) instead of one per multi-index.
    pub fn grad_table_fast(&self, w: &[f64], z: &[f64], xi: &[f64], nw: usize, nz: usize, nxi: usize) -> Result<GradTable> {
        self.orders().check(nw, nz, nxi)?;
        let d = self.d;
        struct Cache {
            w: Vec<Vec<f64>>,
            z: Vec<Vec<f64>>,
            xi: Vec<Vec<f64>>,
        }
        let caches: Vec<Cache> = self
            .terms
            .iter()
            .map(|t| Cache {
                w: (0..d).map(|i| t.w[i].derivatives(w[i], nw)).collect(),
                z: (0..d)
                    .map(|i| match t.z_factor(i) {
                        Some(f) => f.derivatives(z[i], nz),
                        None => {
                            let mut v = vec![0.0; nz + 1];
                            v[0] = 1.0;
                            v
                        }
                    })
                    .collect(),
                xi: (0..d).map(|i| t.xi[i].derivatives(xi[i], nxi)).collect(),
            })
            .collect();
        let mw: Vec<Vec<Vec<usize>>> = (0..=nw).map(|n| multi_indices(d, n)).collect();
        let mz: Vec<Vec<Vec<usize>>> = (0..=nz).map(|n| multi_indices(d, n)).collect();
        let mx: Vec<Vec<Vec<usize>>> = (0..=nxi).map(|n| multi_indices(d, n)).collect();
        let mut g = GradTable::zeros(nw, nz, nxi);
        for n in 0..=nw {
            for bw in &mw[n] {
                for k in 0..=nz {
                    for bz in &mz[k] {
                        for r in 0..=nxi {
                            for bx in &mx[r] {
                                let mut s = C64::new(0.0, 0.0);
                                for (t, c) in self.terms.iter().zip(&caches) {
                                    let mut v = 1.0;
                                    for i in 0..d {
                                        v *= c.w[i][bw[i]] * c.z[i][bz[i]] * c.xi[i][bx[i]];
                                    }
                                    s += t.coeff * v;
                                }
                                g.add(n, k, r, s.norm());
                            }
                        }
                    }
                }
            }
        }
        Ok(g)
    }
}

impl Amplitude for SeparableAmplitude {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, w: &[f64], z: &[f64], xi: &[f64]) -> C64 {
        self.value(w, z, xi)
    }

    fn deriv(&self, kw: &[usize], kz: &[usize], kxi: &[usize], w: &[f64], z: &[f64], xi: &[f64]) -> Result<C64> {
        self.derivative(kw, kz, kxi, w, z, xi)
    }

    fn support(&self) -> Option<Support> {
        self.support.clone()
    }

    fn max_order(&self) -> Orders {
        self.orders()
    }

    fn describe(&self) -> String {
        self.label.clone()
    }

    fn grad_table(&self, w: &[f64], z: &[f64], xi: &[f64], nw: usize, nz: usize, nxi: usize) -> Result<GradTable> {
        self.grad_table_fast(w, z, xi, nw, nz, nxi)
    }

    fn depends_on_z(&self) -> bool {
        SeparableAmplitude::depends_on_z(self)
    }

    fn separable(&self) -> Option<&SeparableAmplitude> {
        Some(self)
    }
}

/// A separable amplitude without `z` factors, exposed through the symbol interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableSymbol(pub SeparableAmplitude);

impl SeparableSymbol {
    pub fn new(inner: SeparableAmplitude) -> Result<Self> {
        if inner.depends_on_z() {
            return Err(invalid("terms", "a symbol may not carry z factors"));
        }
        Ok(SeparableSymbol(inner))
    }

    pub fn conj(&self) -> Self {
        SeparableSymbol(self.0.conj())
    }

    pub fn rescale(&self, l1: f64, rho1: f64) -> Result<Self> {
        Ok(SeparableSymbol(self.0.rescale(l1, rho1)?))
    }

    pub fn amplitude(&self) -> &SeparableAmplitude {
        &self.0
    }
}

impl Symbol for SeparableSymbol {
    fn dim(&self) -> usize {
        self.0.d
    }

    fn eval(&self, w: &[f64], xi: &[f64]) -> C64 {
        self.0.value(w, &[], xi)
    }

    fn deriv(&self, kw: &[usize], kxi: &[usize], w: &[f64], xi: &[f64]) -> Result<C64> {
        let kz = vec![0; self.0.d];
        let z = vec![0.0; self.0.d];
        self.0.derivative(kw, &kz, kxi, w, &z, xi)
    }

    fn support(&self) -> Option<Support> {
        self.0.support.clone()
    }

    fn max_order(&self) -> Orders {
        self.0.orders()
    }

    fn decay(&self) -> Option<Decay> {
        self.0.decay.clone()
    }

    fn describe(&self) -> String {
        self.0.label.clone()
    }

    fn grad_table(&self, w: &[f64], xi: &[f64], nw: usize, nxi: usize) -> Result<GradTable> {
        let z = vec![0.0; self.0.d];
        self.0.grad_table_fast(w, &z, xi, nw, 0, nxi)
    }

    fn separable(&self) -> Option<&SeparableAmplitude> {
        Some(&self.0)
    }
}
