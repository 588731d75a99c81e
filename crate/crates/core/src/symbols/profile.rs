//! Univariate building blocks for separable symbols.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::jet::{binomial, factorial, Jet};

/// Order reported for profiles whose derivatives exist to every order.
pub const UNLIMITED: usize = usize::MAX;

/// The C-infinity step `e^{-1/x}` for `x > 0`, zero otherwise.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth cutoff: 0 for |u| <= 1/2, 1 for |u| >= 1, monotone in between.
pub fn zeta(u: f64) -> f64 {
    let u = u.abs();
    if u <= 0.5 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = smooth_step(u - 0.5);
        let b = smooth_step(1.0 - u);
        a / (a + b)
    }
}

fn step_jet(arg: &Jet) -> Jet {
    if arg.value() <= 0.0 {
        Jet::constant(0.0, arg.order())
    } else {
        arg.recip().scale(-1.0).exp()
    }
}

/// Jet of `zeta(|u|)` where `u` is given as a jet. The kink of `|u|` at 0 is
/// harmless because zeta is flat there.
pub fn zeta_jet(u: &Jet) -> Jet {
    let k = u.order();
    let u = if u.value() < 0.0 { u.scale(-1.0) } else { u.clone() };
    let v = u.value();
    if v <= 0.5 {
        Jet::constant(0.0, k)
    } else if v >= 1.0 {
        Jet::constant(1.0, k)
    } else {
        let a = step_jet(&u.add_scalar(-0.5));
        let b = step_jet(&u.scale(-1.0).add_scalar(1.0));
        a.div(&a.add(&b))
    }
}

/// Bump `1 - zeta(|x - c| / r)`: equal to 1 on the inner half ball, supported in the ball.
pub fn bump_jet(x: f64, center: f64, radius: f64, order: usize) -> Jet {
    let u = Jet::variable(x, order).add_scalar(-center).scale(1.0 / radius);
    zeta_jet(&u).scale(-1.0).add_scalar(1.0)
}

pub fn bump(x: f64, center: f64, radius: f64) -> f64 {
    1.0 - zeta((x - center) / radius)
}

/// Radius of the one-dimensional lattice partition bumps.
pub const LATTICE_RADIUS_1D: f64 = 2.0;

/// `psi_j(x) = phi(x - j) / sum_k phi(x - k)` for the one-dimensional lattice
/// partition, summed over `j in lo..=hi`. Integer parts are split off first so
/// that integer translations act exactly.
pub fn lattice_window_jet(x: f64, lo: i64, hi: i64, order: usize) -> Jet {
    let base = x.floor();
    let frac = x - base;
    let b = base as i64;
    let mut num = Jet::constant(0.0, order);
    let mut den = Jet::constant(0.0, order);
    for k in (b - 2)..=(b + 3) {
        let y = frac - (k - b) as f64;
        if y.abs() >= LATTICE_RADIUS_1D {
            continue;
        }
        let phi = bump_jet(y, 0.0, LATTICE_RADIUS_1D, order);
        if k >= lo && k <= hi {
            num = num.add(&phi);
        }
        den = den.add(&phi);
    }
    num.div(&den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-((x - center) / width)^2)`
    Gaussian { center: f64, width: f64 },
    /// `1 - zeta(|x - center| / radius)`
    Bump { center: f64, radius: f64 },
    /// `(2 + 2 (scale x)^2)^(-gamma / 2)`, bounded by `(1 + |scale x|)^(-gamma)`.
    Decay { gamma: f64, scale: f64 },
    /// Cardinal B-spline of the given order (degree `order - 1`) on
    /// `[center - radius, center + radius]`, normalized to peak value 1.
    BSpline { center: f64, radius: f64, order: usize },
    /// Indicator of the open interval `(lo, hi)`.
    Indicator { lo: f64, hi: f64 },
    /// `cos(freq x + phase)`
    Cos { freq: f64, phase: f64 },
    /// `sum_{j = lo..=hi} psi_j(scale x)` for the one-dimensional lattice partition.
    LatticeWindow { lo: i64, hi: i64, scale: f64 },
}

fn cardinal_bspline(u: f64, m: usize, k: usize) -> f64 {
    // k-th derivative of M_m(u), valid for k < m
    if u <= 0.0 || u >= m as f64 || k >= m {
        return 0.0;
    }
    let p = (m - 1 - k) as i32;
    let mut s = 0.0;
    for j in 0..=m {
        let t = u - j as f64;
        if t > 0.0 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binomial(m, j) * t.powi(p);
        }
    }
    s / factorial(m - 1 - k)
}

fn bspline_peak(m: usize) -> f64 {
    cardinal_bspline(m as f64 / 2.0, m, 0)
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Gaussian { center, width } => {
                let v = (x - center) / width;
                (-v * v).exp()
            }
            Profile::Bump { center, radius } => bump(x, center, radius),
            Profile::Decay { gamma, scale } => {
                let v = scale * x;
                (2.0 + 2.0 * v * v).powf(-gamma / 2.0)
            }
            Profile::BSpline { center, radius, order } => {
                let u = order as f64 * (x - center + radius) / (2.0 * radius);
                cardinal_bspline(u, order, 0) / bspline_peak(order)
            }
            Profile::Indicator { lo, hi } => {
                if x > lo && x < hi {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Cos { freq, phase } => (freq * x + phase).cos(),
            Profile::LatticeWindow { lo, hi, scale } => lattice_window_jet(scale * x, lo, hi, 0).value(),
        }
    }

    /// Taylor jet at `x`. Orders above `max_order` carry the almost-everywhere
    /// pointwise derivative (zero for piecewise polynomials).
    pub fn jet(&self, x: f64, order: usize) -> Jet {
        match *self {
            Profile::Gaussian { center, width } => {
                let v = Jet::variable(x, order).add_scalar(-center).scale(1.0 / width);
                v.mul(&v).scale(-1.0).exp()
            }
            Profile::Bump { center, radius } => bump_jet(x, center, radius, order),
            Profile::Decay { gamma, scale } => {
                let v = Jet::variable(x, order).scale(scale);
                v.mul(&v).scale(2.0).add_scalar(2.0).powf(-gamma / 2.0)
            }
            Profile::BSpline { center, radius, order: m } => {
                let du = m as f64 / (2.0 * radius);
                let u = du * (x - center + radius);
                let peak = bspline_peak(m);
                let mut c = Vec::with_capacity(order + 1);
                let mut chain = 1.0;
                for k in 0..=order {
                    c.push(cardinal_bspline(u, m, k) * chain / peak / factorial(k));
                    chain *= du;
                }
                Jet::from_coefficients(c)
            }
            Profile::Indicator { .. } => Jet::constant(self.eval(x), order),
            Profile::Cos { freq, phase } => {
                let mut c = Vec::with_capacity(order + 1);
                let mut f = 1.0;
                for k in 0..=order {
                    let arg = freq * x + phase + k as f64 * std::f64::consts::FRAC_PI_2;
                    c.push(f * arg.cos() / factorial(k));
                    f *= freq;
                }
                Jet::from_coefficients(c)
            }
            Profile::LatticeWindow { lo, hi, scale } => {
                let j = lattice_window_jet(scale * x, lo, hi, order);
                let mut c = j.coefficients().to_vec();
                let mut f = 1.0;
                for ck in c.iter_mut() {
                    *ck *= f;
                    f *= scale;
                }
                Jet::from_coefficients(c)
            }
        }
    }

    pub fn max_order(&self) -> usize {
        match *self {
            Profile::BSpline { order, .. } => order - 1,
            Profile::Indicator { .. } => 0,
            _ => UNLIMITED,
        }
    }

    /// Closed support interval, if compact.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::Bump { center, radius } | Profile::BSpline { center, radius, .. } => {
                Some((center - radius, center + radius))
            }
            Profile::Indicator { lo, hi } => Some((lo, hi)),
            Profile::LatticeWindow { lo, hi, scale } => Some((
                (lo as f64 - LATTICE_RADIUS_1D) / scale,
                (hi as f64 + LATTICE_RADIUS_1D) / scale,
            )),
            _ => None,
        }
    }

    /// The profile `x -> self(s x)` for `s > 0`.
    pub fn dilate(&self, s: f64) -> Profile {
        match *self {
            Profile::Gaussian { center, width } => Profile::Gaussian { center: center / s, width: width / s },
            Profile::Bump { center, radius } => Profile::Bump { center: center / s, radius: radius / s },
            Profile::Decay { gamma, scale } => Profile::Decay { gamma, scale: scale * s },
            Profile::BSpline { center, radius, order } => {
                Profile::BSpline { center: center / s, radius: radius / s, order }
            }
            Profile::Indicator { lo, hi } => Profile::Indicator { lo: lo / s, hi: hi / s },
            Profile::Cos { freq, phase } => Profile::Cos { freq: freq * s, phase },
            Profile::LatticeWindow { lo, hi, scale } => Profile::LatticeWindow { lo, hi, scale: scale * s },
        }
    }
}

/// Product of profiles in one scalar variable; the empty product is 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Factor(pub Vec<Profile>);

impl Factor {
    pub fn one() -> Self {
        Factor(Vec::new())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = 1.0;
        for p in &self.0 {
            v *= p.eval(x);
            if v == 0.0 {
                break;
            }
        }
        v
    }

    pub fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        let mut j = Jet::constant(1.0, order);
        for p in &self.0 {
            j = j.mul(&p.jet(x, order));
        }
        j.derivatives()
    }

    pub fn max_order(&self) -> usize {
        self.0.iter().map(Profile::max_order).min().unwrap_or(UNLIMITED)
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for p in &self.0 {
            if let Some((a, b)) = p.support() {
                out = Some(match out {
                    None => (a, b),
                    Some((c, d)) => (a.max(c), b.min(d)),
                });
            }
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dilate(&self, s: f64) -> Factor {
        Factor(self.0.iter().map(|p| p.dilate(s)).collect())
    }

    /// Exact Fourier integral `int e^{i kappa x} f(x) dx` when a closed form exists.
    pub fn fourier_closed_form(&self, kappa: f64) -> Option<C64> {
        match self.0.as_slice() {
            [Profile::BSpline { center, radius, order }] => {
                let m = *order as f64;
                let y = radius * kappa / m;
                let sinc = if y.abs() < 1e-8 { 1.0 - y * y / 6.0 } else { y.sin() / y };
                let mag = 2.0 * radius / m * sinc.powi(*order as i32) / bspline_peak(*order);
                Some(C64::from_polar(1.0, kappa * center) * mag)
            }
            [Profile::Indicator { lo, hi }] => Some(interval_fourier(*lo, *hi, kappa)),
            [Profile::Gaussian { center, width }] => {
                let mag = width * std::f64::consts::PI.sqrt() * (-0.25 * (width * kappa).powi(2)).exp();
                Some(C64::from_polar(mag, kappa * center))
            }
            _ => None,
        }
    }

    pub fn has_closed_form_fourier(&self) -> bool {
        self.fourier_closed_form(0.0).is_some()
    }
}

/// `int_lo^hi e^{i kappa x} dx`, written so that small `kappa` is stable.
pub fn interval_fourier(lo: f64, hi: f64, kappa: f64) -> C64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let y = kappa * half;
    let sinc = if y.abs() < 1e-8 { 1.0 - y * y / 6.0 } else { y.sin() / y };
    C64::from_polar(2.0 * half * sinc, kappa * mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(p: &Profile, x: f64, k: usize) -> f64 {
        let h = 1e-4;
        match k {
            // one Richardson step removes the h^2 term, which the bump's large
            // higher derivatives would otherwise push above 1e-6
            1 => {
                let d1 = |h: f64| (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
                (4.0 * d1(h) - d1(2.0 * h)) / 3.0
            }
            2 => {
                let d2 = |h: f64| (p.eval(x + h) - 2.0 * p.eval(x) + p.eval(x - h)) / (h * h);
                (4.0 * d2(h) - d2(2.0 * h)) / 3.0
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn zeta_endpoints() {
        assert_eq!(zeta(0.5), 0.0);
        assert_eq!(zeta(1.0), 1.0);
        assert_eq!(zeta(-1.5), 1.0);
        assert_eq!(zeta(0.0), 0.0);
        assert!((zeta(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zeta_is_monotone_on_bridge() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let u = 0.5 + 0.5 * i as f64 / 1000.0;
            let v = zeta(u);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn profile_jets_match_finite_differences() {
        let profiles = [
            Profile::Gaussian { center: 0.3, width: 0.8 },
            Profile::Bump { center: 0.0, radius: 1.0 },
            Profile::Decay { gamma: 3.0, scale: 1.0 },
            Profile::BSpline { center: 0.0, radius: 1.0, order: 4 },
            Profile::Cos { freq: 2.0, phase: 0.4 },
            Profile::LatticeWindow { lo: -1, hi: 2, scale: 1.0 },
        ];
        for p in &profiles {
            for &x in &[-0.83, -0.61, 0.1, 0.66, 0.9] {
                let d = p.jet(x, 2).derivatives();
                assert!((d[0] - p.eval(x)).abs() < 1e-15, "{p:?}");
                for k in 1..=2 {
                    let f = fd(p, x, k);
                    let tol = 1e-6 * d[k].abs().max(1.0);
                    assert!((d[k] - f).abs() < tol, "{p:?} x={x} k={k}: {} vs {f}", d[k]);
                }
            }
        }
    }

    #[test]
    fn dilation_is_composition() {
        let p = Profile::Bump { center: 0.4, radius: 1.3 };
        let q = p.dilate(2.5);
        for &x in &[-0.2, 0.1, 0.3, 0.5] {
            assert!((q.eval(x) - p.eval(2.5 * x)).abs() < 1e-15);
            let dq = q.jet(x, 3).derivatives();
            let dp = p.jet(2.5 * x, 3).derivatives();
            for k in 0..=3 {
                assert!((dq[k] - dp[k] * 2.5f64.powi(k as i32)).abs() < 1e-10 * dp[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn bspline_fourier_matches_midpoint_sum() {
        let f = Factor(vec![Profile::BSpline { center: 0.2, radius: 1.5, order: 3 }]);
        let n = 20000;
        let (a, b) = (0.2 - 1.5, 0.2 + 1.5);
        let h = (b - a) / n as f64;
        for &kappa in &[0.0, 0.7, 3.1, 10.0] {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..n {
                let x = a + (i as f64 + 0.5) * h;
                s += C64::from_polar(f.eval(x) * h, kappa * x);
            }
            let c = f.fourier_closed_form(kappa).unwrap();
            assert!((c - s).norm() < 1e-7, "kappa={kappa}: {c} vs {s}");
        }
    }

    #[test]
    fn lattice_window_translation_is_exact() {
        for &x in &[0.125, -1.375, 2.5625] {
            for e in -3i64..=3 {
                let a = lattice_window_jet(x, 0, 0, 0).value();
                let b = lattice_window_jet(x + e as f64, e, e, 0).value();
                assert_eq!(a, b);
            }
        }
    }
}
