//! The pointwise functionals `P_{n,m}`, `F°_{n,m}`, `F_{n,m}` and the integrated `Q_{n,m}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbols::{Amplitude, Symbol, TMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    P,
    Q,
    FCirc,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FVariant {
    Circ,
    Full,
}

enum Source<'a> {
    Amplitude(&'a dyn Amplitude),
    Symbol(&'a dyn Symbol),
}

/// A nonnegative field on `R^{3d}` (P) or `R^{2d}` (F), evaluated at the
/// concatenated point `(w, z, xi)` or `(w, xi)`.
pub struct BoundField<'a> {
    pub functional: Functional,
    pub n: usize,
    pub m: usize,
    pub tau: Option<f64>,
    pub source: String,
    d: usize,
    src: Source<'a>,
}

impl BoundField<'_> {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of real coordinates of an evaluation point.
    pub fn arity(&self) -> usize {
        match self.src {
            Source::Amplitude(_) => 3 * self.d,
            Source::Symbol(_) => 2 * self.d,
        }
    }

    /// NaN when the underlying derivative evaluation fails.
    pub fn eval(&self, pt: &[f64]) -> f64 {
        self.try_eval(pt).unwrap_or(f64::NAN)
    }

    pub fn try_eval(&self, pt: &[f64]) -> Result<f64> {
        if pt.len() != self.arity() {
            return Err(Error::ShapeMismatch(format!("point has {} coordinates, field needs {}", pt.len(), self.arity())));
        }
        let d = self.d;
        match self.src {
            Source::Amplitude(p) => {
                let (w, rest) = pt.split_at(d);
                let (z, xi) = rest.split_at(d);
                p_value(p, self.tau.unwrap_or(0.0), self.n, self.m, w, z, xi, true)
            }
            Source::Symbol(a) => {
                let (w, xi) = pt.split_at(d);
                let g = a.grad_table(w, xi, self.n, self.m)?;
                let mut s = 0.0;
                let ls: Vec<usize> = match self.functional {
                    Functional::FCirc => vec![self.m],
                    _ => (0..=self.m).collect(),
                };
                for k in 0..=self.n {
                    for &l in &ls {
                        s += g.get(k, 0, l);
                    }
                }
                Ok(s)
            }
        }
    }
}

fn p_value(p: &dyn Amplitude, tau: f64, n: usize, m: usize, w: &[f64], z: &[f64], xi: &[f64], decay: bool) -> Result<f64> {
    let nz = if p.depends_on_z() { n } else { 0 };
    let g = p.grad_table(w, z, xi, n, nz, m)?;
    let mut s = 0.0;
    for n1 in 0..=n {
        for n2 in 0..=nz {
            for l in 0..=m {
                s += g.get(n1, n2, l);
            }
        }
    }
    if m == 0 || !decay {
        return Ok(s);
    }
    let r: f64 = z.iter().zip(w).map(|(z, w)| (z - tau * w).powi(2)).sum::<f64>().sqrt();
    Ok(s / (1.0 + r.powi(m as i32)))
}

/// `P_{n,m}(w, z, xi; p)` with `tau = t21 + t22`. For `m = 0` the decay factor is 1.
pub fn bound_p<'a>(p: &'a dyn Amplitude, t: &TMatrix, n: usize, m: usize) -> Result<BoundField<'a>> {
    let nz = if p.depends_on_z() { n } else { 0 };
    p.max_order().check(n, nz, m)?;
    Ok(BoundField {
        functional: Functional::P,
        n,
        m,
        tau: Some(t.tau()),
        source: p.describe(),
        d: p.dim(),
        src: Source::Amplitude(p),
    })
}

/// `F°_{n,m}(w, xi; a)` or `F_{n,m}(w, xi; a)`.
pub fn bound_f(a: &dyn Symbol, n: usize, m: usize, variant: FVariant) -> Result<BoundField<'_>> {
    a.max_order().check(n, 0, m)?;
    Ok(BoundField {
        functional: match variant {
            FVariant::Circ => Functional::FCirc,
            FVariant::Full => Functional::F,
        },
        n,
        m,
        tau: None,
        source: a.describe(),
        d: a.dim(),
        src: Source::Symbol(a),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QOptions {
    /// Midpoint nodes per unit length along each `w` and `z` axis.
    pub points_per_unit: f64,
    /// Box growth stops once `|p|` on the box boundary is below this.
    pub boundary_tol: f64,
    /// Largest half-width tried for an automatic box.
    pub max_half_width: f64,
    pub self_check: bool,
}

impl Default for QOptions {
    fn default() -> Self {
        QOptions { points_per_unit: 16.0, boundary_tol: 1e-10, max_half_width: 256.0, self_check: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub value: f64,
    /// Relative change under doubling of the quadrature resolution.
    pub doubling_change: Option<f64>,
}

impl QValue {
    /// Doubling changed the value by at most 1% (or no check ran).
    pub fn converged(&self) -> bool {
        self.doubling_change.is_none_or(|c| c <= 0.01)
    }
}

/// `Q_{n,m}(xi; p) = iint P_{n,m}(w, z, xi) dw dz`.
pub struct QField<'a> {
    pub p: &'a dyn Amplitude,
    pub tau: f64,
    pub n: usize,
    pub m: usize,
    pub opts: QOptions,
    /// `int_{R^d} du / (1 + |u|^m)` when `p` does not depend on `z`.
    z_factor: Option<f64>,
}

/// `int_{R^d} du / (1 + |u|^m)` for `m > d`, `d` in {1, 2}.
pub fn decay_integral(d: usize, m: usize) -> Result<f64> {
    if m <= d {
        return Err(Error::Precondition(format!("int du/(1+|u|^{m}) diverges in dimension {d}")));
    }
    let mf = m as f64;
    match d {
        1 => Ok(2.0 * (PI / mf) / (PI / mf).sin()),
        2 => Ok(2.0 * PI * (PI / mf) / (2.0 * PI / mf).sin()),
        _ => Err(invalid("d", "only d = 1, 2 are supported")),
    }
}

pub fn bound_q<'a>(p: &'a dyn Amplitude, t: &TMatrix, n: usize, m: usize, opts: QOptions) -> Result<QField<'a>> {
    bound_p(p, t, n, m)?;
    if !(opts.points_per_unit > 0.0) || !(opts.boundary_tol > 0.0) || !(opts.max_half_width >= 1.0) {
        return Err(invalid("q_options", "resolution, tolerance and max half-width must be positive"));
    }
    let z_factor = if p.depends_on_z() {
        None
    } else {
        if m == 0 {
            return Err(Error::Precondition("Q_{n,0} of a z-independent amplitude is infinite".into()));
        }
        Some(decay_integral(p.dim(), m)?)
    };
    Ok(QField { p, tau: t.tau(), n, m, opts, z_factor })
}

struct AxisBox {
    lo: f64,
    hi: f64,
}

fn cartesian(boxes: &[AxisBox], per_axis: &[usize]) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for (b, &k) in boxes.iter().zip(per_axis) {
        let h = (b.hi - b.lo) / k as f64;
        let mut next = Vec::with_capacity(out.len() * k);
        for (pt, wgt) in &out {
            for i in 0..k {
                let mut p = pt.clone();
                p.push(b.lo + (i as f64 + 0.5) * h);
                next.push((p, wgt * h));
            }
        }
        out = next;
    }
    out
}

impl QField<'_> {
    fn boundary_max(&self, boxes: &[AxisBox], xi: &[f64]) -> f64 {
        let d = self.p.dim();
        let k: usize = 9;
        let mut worst = 0.0f64;
        let total = k.pow(boxes.len() as u32);
        let mut pt = vec![0.0; boxes.len()];
        for flat in 0..total {
            let mut rem = flat;
            let mut on_edge = false;
            for (a, b) in boxes.iter().enumerate().rev() {
                let i = rem % k;
                rem /= k;
                on_edge |= i == 0 || i == k - 1;
                pt[a] = b.lo + (b.hi - b.lo) * i as f64 / (k - 1) as f64;
            }
            if on_edge {
                let (w, z) = pt.split_at(d);
                let z = if z.is_empty() { vec![0.0; d] } else { z.to_vec() };
                worst = worst.max(self.p.eval(w, &z, xi).norm());
            }
        }
        worst
    }

    fn boxes(&self, xi: &[f64]) -> Result<Vec<AxisBox>> {
        let d = self.p.dim();
        let with_z = self.z_factor.is_none();
        let support = self.p.support();
        let mut half = 1.0;
        loop {
            let mut boxes = Vec::new();
            for i in 0..d {
                boxes.push(match &support {
                    Some(s) => AxisBox { lo: s.w.center[i] - s.w.radius, hi: s.w.center[i] + s.w.radius },
                    None => AxisBox { lo: -half, hi: half },
                });
            }
            if with_z {
                for _ in 0..d {
                    boxes.push(AxisBox { lo: -half, hi: half });
                }
            }
            let needs_growth = (with_z || support.is_none()) && self.boundary_max(&boxes, xi) >= self.opts.boundary_tol;
            if !needs_growth {
                return Ok(boxes);
            }
            half *= 2.0;
            if half > self.opts.max_half_width {
                return Err(Error::Convergence(format!(
                    "amplitude is not below {:e} on the boundary of a box of half-width {}",
                    self.opts.boundary_tol, self.opts.max_half_width
                )));
            }
        }
    }

    fn integrate(&self, boxes: &[AxisBox], xi: &[f64], ppu: f64) -> Result<f64> {
        let d = self.p.dim();
        let per_axis: Vec<usize> = boxes.iter().map(|b| ((b.hi - b.lo) * ppu).ceil().max(1.0) as usize).collect();
        let zero = vec![0.0; d];
        let mut s = 0.0;
        for (pt, wgt) in cartesian(boxes, &per_axis) {
            let (w, z) = pt.split_at(d);
            let z = if z.is_empty() { &zero[..] } else { z };
            // with the analytic z-integral the decay factor is already integrated out
            let v = p_value(self.p, self.tau, self.n, self.m, w, z, xi, self.z_factor.is_none())?;
            s += v * wgt;
        }
        Ok(s * self.z_factor.unwrap_or(1.0))
    }

    pub fn eval(&self, xi: &[f64]) -> Result<QValue> {
        if xi.len() != self.p.dim() {
            return Err(Error::ShapeMismatch(format!("xi has {} coordinates, expected {}", xi.len(), self.p.dim())));
        }
        if let Some(s) = self.p.support() {
            if crate::symbols::dist(&s.xi.center, xi) >= s.xi.radius {
                return Ok(QValue { value: 0.0, doubling_change: self.opts.self_check.then_some(0.0) });
            }
        }
        let boxes = self.boxes(xi)?;
        let value = self.integrate(&boxes, xi, self.opts.points_per_unit)?;
        let doubling_change = if self.opts.self_check {
            let fine = self.integrate(&boxes, xi, 2.0 * self.opts.points_per_unit)?;
            Some(if fine == 0.0 { (fine - value).abs() } else { (fine - value).abs() / fine })
        } else {
            None
        };
        Ok(QValue { value, doubling_change })
    }

    /// NaN on failure so that lattice norms report the offending cube.
    pub fn value(&self, xi: &[f64]) -> f64 {
        self.eval(xi).map(|q| q.value).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::profile::{Factor, Profile};
    use crate::symbols::{builtin_family, FamilyParams, SeparableAmplitude, SymbolAmplitude, Term};
    use crate::C64;

    fn gauss(c: f64, s: f64) -> Factor {
        Factor(vec![Profile::Gaussian { center: c, width: s }])
    }

    fn gaussian_amplitude() -> SeparableAmplitude {
        let t = Term { coeff: C64::new(1.0, 0.0), w: vec![gauss(0.0, 1.0)], z: vec![gauss(0.0, 1.0)], xi: vec![gauss(0.0, 1.0)] };
        SeparableAmplitude::new(1, vec![t], None, "g").unwrap()
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let p = gaussian_amplitude().scaled(C64::new(0.0, 0.0));
        let t = TMatrix::from_t(0.0).unwrap();
        let f = bound_p(&p, &t, 2, 2).unwrap();
        assert_eq!(f.eval(&[0.3, -0.2, 0.5]), 0.0);
        let q = bound_q(&p, &t, 1, 0, QOptions::default()).unwrap();
        assert_eq!(q.eval(&[0.1]).unwrap().value, 0.0);
    }

    #[test]
    fn order_zero_is_modulus() {
        let p = gaussian_amplitude();
        let t = TMatrix::from_t(0.0).unwrap();
        let f = bound_p(&p, &t, 0, 0).unwrap();
        let pt = [0.4, -1.1, 0.3];
        assert!((f.eval(&pt) - p.value(&[0.4], &[-1.1], &[0.3]).norm()).abs() < 1e-15);
    }

    #[test]
    fn decay_denominator_at_z_two() {
        // p = e^{-w^2 - z^2 - xi^2}, tau = 0, at (0, 2, 0): derivatives in xi vanish to odd order
        let p = gaussian_amplitude();
        let t = TMatrix::from_t(0.0).unwrap();
        let f = bound_p(&p, &t, 0, 2).unwrap();
        let v = (-4.0f64).exp();
        // |p| + |p_xi| + |p_xixi| at xi = 0: v + 0 + 2v
        let want = (v + 2.0 * v) / 5.0;
        assert!((f.eval(&[0.0, 2.0, 0.0]) - want).abs() < 1e-15);
    }

    #[test]
    fn f_variants_at_order_zero_coincide() {
        let s = builtin_family("gaussian_bump", &FamilyParams::default()).unwrap().as_symbol().unwrap();
        let a = bound_f(s.as_ref(), 0, 0, FVariant::Circ).unwrap();
        let b = bound_f(s.as_ref(), 0, 0, FVariant::Full).unwrap();
        let pt = [0.2, -0.3];
        let v = s.eval(&[0.2], &[-0.3]).norm();
        assert_eq!(a.eval(&pt), v);
        assert_eq!(b.eval(&pt), v);
    }

    #[test]
    fn odd_derivatives_vanish_at_origin() {
        let s = builtin_family("gaussian_bump", &FamilyParams::default()).unwrap().as_symbol().unwrap();
        let f = bound_f(s.as_ref(), 1, 1, FVariant::Circ).unwrap();
        assert!(f.eval(&[0.0, 0.0]).abs() < 1e-14);
    }

    #[test]
    fn separable_q_matches_product_quadrature() {
        // p = f(w) g(z) h(xi) with n = m = 0: Q(xi) = |h(xi)| int|f| int|g|
        let t = Term {
            coeff: C64::new(1.0, 0.0),
            w: vec![Factor(vec![Profile::Bump { center: 0.2, radius: 0.8 }])],
            z: vec![gauss(0.5, 0.7)],
            xi: vec![gauss(0.0, 1.3)],
        };
        let p = SeparableAmplitude::new(1, vec![t.clone()], None, "fgh").unwrap();
        let opts = QOptions { points_per_unit: 64.0, ..Default::default() };
        let q = bound_q(&p, &TMatrix::from_t(0.0).unwrap(), 0, 0, opts).unwrap();
        // independent 1-D oracles on fine midpoint grids
        let mid = |f: &Factor, lo: f64, hi: f64| {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| f.eval(lo + (i as f64 + 0.5) * h).abs()).sum::<f64>() * h
        };
        let iw = mid(&t.w[0], -0.6, 1.0);
        let iz = mid(&t.z[0], -12.0, 12.0);
        for xi in [0.0, 0.7, -1.9] {
            let want = t.xi[0].eval(xi) * iw * iz;
            let got = q.eval(&[xi]).unwrap().value;
            assert!((got - want).abs() < 1e-6 * want.max(1e-3), "{xi}: {got} vs {want}");
        }
    }

    #[test]
    fn z_independent_q_uses_decay_integral() {
        let s = builtin_family("gaussian_bump", &FamilyParams::default()).unwrap().as_symbol().unwrap();
        let amp = SymbolAmplitude(s.as_ref());
        let t = TMatrix::from_t(0.5).unwrap();
        assert!(bound_q(&amp, &t, 1, 0, QOptions::default()).is_err());
        let q = bound_q(&amp, &t, 0, 2, QOptions::default()).unwrap();
        // m = 2, d = 1: int du/(1+u^2) = pi
        let wint: f64 = {
            let n = 100_000;
            let h = 2.0 / n as f64;
            (0..n).map(|i| s.eval(&[-1.0 + (i as f64 + 0.5) * h], &[0.0]).norm()).sum::<f64>() * h
        };
        let got = q.eval(&[0.0]).unwrap().value;
        // Q_{0,2} adds |a_xi| + |a_xixi| at xi = 0: a_xixi = -2 a for the unit Gaussian
        let want = PI * 3.0 * wint;
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        assert!((decay_integral(2, 4).unwrap() - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn outside_xi_support_is_zero() {
        let f = builtin_family("tensor_bump", &FamilyParams::default()).unwrap();
        let p = f.as_amplitude();
        let q = bound_q(&p, &TMatrix::from_t(0.0).unwrap(), 1, 0, QOptions::default()).unwrap();
        assert_eq!(q.eval(&[1.5]).unwrap().value, 0.0);
    }
}
