//! Named test families addressable from config files.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::profile::{Factor, Profile};
use super::separable::{SeparableAmplitude, SeparableSymbol, Term};
use super::{Amplitude, Ball, Decay, Support, Symbol};
use crate::error::{invalid, Error, Result};

/// Parameters shared by the builtin families. Unset fields take the family default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    pub d: Option<usize>,
    /// Center of the `w` support ball.
    pub u: Option<Vec<f64>>,
    pub ell: Option<f64>,
    /// Center of the `xi` support ball.
    pub mu: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub sigma_w: Option<f64>,
    pub sigma_xi: Option<f64>,
    pub sigma_z: Option<f64>,
    /// Gaussian width along the cut for `plane_cut_product`.
    pub sigma_par: Option<f64>,
    pub amplitude: Option<f64>,
    pub gamma_w: Option<f64>,
    pub gamma_xi: Option<f64>,
    pub order: Option<usize>,
}

#[derive(Clone)]
pub enum Fixture {
    Symbol(Arc<SeparableSymbol>),
    Amplitude(Arc<SeparableAmplitude>),
}

impl Fixture {
    pub fn as_symbol(&self) -> Result<Arc<SeparableSymbol>> {
        match self {
            Fixture::Symbol(s) => Ok(s.clone()),
            Fixture::Amplitude(a) => Err(invalid("symbol", format!("fixture `{}` is an amplitude, not a symbol", a.label))),
        }
    }

    pub fn as_amplitude(&self) -> SeparableAmplitude {
        match self {
            Fixture::Symbol(s) => s.0.clone(),
            Fixture::Amplitude(a) => (**a).clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Fixture::Symbol(s) => s.dim(),
            Fixture::Amplitude(a) => a.dim(),
        }
    }
}

pub struct FamilyInfo {
    pub name: &'static str,
    pub kind: &'static str,
    pub summary: &'static str,
}

pub fn list_families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            name: "gaussian_bump",
            kind: "symbol",
            summary: "exp(-|w-u|^2/sigma_w^2 - |xi-mu|^2/sigma_xi^2) times zeta-bumps on B(u,ell) x B(mu,rho)",
        },
        FamilyInfo {
            name: "smooth_cutoff_zeta",
            kind: "symbol",
            summary: "product of zeta-bumps (1 - zeta) on B(u,ell) x B(mu,rho)",
        },
        FamilyInfo {
            name: "tensor_bump",
            kind: "amplitude",
            summary: "gaussian_bump in (w, xi) times exp(-|z|^2/sigma_z^2)",
        },
        FamilyInfo {
            name: "poly_decay",
            kind: "symbol",
            summary: "A prod (2+2w_i^2)^(-gamma_w/2) (2+2xi_i^2)^(-gamma_xi/2), not compactly supported",
        },
        FamilyInfo {
            name: "plane_cut_product",
            kind: "symbol",
            summary: "d=2 product fixture straddling the plane w_2 = 0, widths sigma_par (along) and sigma_w (across)",
        },
        FamilyInfo {
            name: "bspline_bump",
            kind: "symbol",
            summary: "gaussian bump in w times a cardinal B-spline of the given order in xi (limited xi-regularity)",
        },
    ]
}

struct Common {
    d: usize,
    u: Vec<f64>,
    ell: f64,
    mu: Vec<f64>,
    rho: f64,
}

fn common(p: &FamilyParams, default_d: usize) -> Result<Common> {
    let d = p.d.unwrap_or(default_d);
    if d == 0 || d > 2 {
        return Err(invalid("d", format!("{d} is outside 1..=2")));
    }
    let u = p.u.clone().unwrap_or_else(|| vec![0.0; d]);
    let mu = p.mu.clone().unwrap_or_else(|| vec![0.0; d]);
    if u.len() != d {
        return Err(invalid("u", format!("expected {d} coordinates")));
    }
    if mu.len() != d {
        return Err(invalid("mu", format!("expected {d} coordinates")));
    }
    let ell = p.ell.unwrap_or(1.0);
    let rho = p.rho.unwrap_or(1.0);
    if !(ell > 0.0) {
        return Err(invalid("ell", "must be positive"));
    }
    if !(rho > 0.0) {
        return Err(invalid("rho", "must be positive"));
    }
    Ok(Common { d, u, ell, mu, rho })
}

fn positive(v: Option<f64>, default: f64, field: &str) -> Result<f64> {
    let v = v.unwrap_or(default);
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(field, "must be positive and finite"));
    }
    Ok(v)
}

fn support(c: &Common) -> Support {
    Support { w: Ball::new(c.u.clone(), c.ell), xi: Ball::new(c.mu.clone(), c.rho) }
}

/// Per-axis bump radius: the support cube of side `2 r / sqrt(d)` lies inside the ball.
fn axis_radius(r: f64, d: usize) -> f64 {
    r / (d as f64).sqrt()
}

fn gauss_bump(center: f64, width: f64, radius: f64) -> Factor {
    Factor(vec![Profile::Gaussian { center, width }, Profile::Bump { center, radius }])
}

pub fn builtin_family(name: &str, p: &FamilyParams) -> Result<Fixture> {
    match name {
        "gaussian_bump" => {
            let c = common(p, 1)?;
            let sw = positive(p.sigma_w, 1.0, "sigma_w")?;
            let sx = positive(p.sigma_xi, 1.0, "sigma_xi")?;
            let coeff = p.amplitude.unwrap_or(1.0);
            let term = Term {
                coeff: C64::new(coeff, 0.0),
                w: (0..c.d).map(|i| gauss_bump(c.u[i], sw, axis_radius(c.ell, c.d))).collect(),
                z: vec![],
                xi: (0..c.d).map(|i| gauss_bump(c.mu[i], sx, axis_radius(c.rho, c.d))).collect(),
            };
            let amp = SeparableAmplitude::new(c.d, vec![term], Some(support(&c)), "gaussian_bump")?;
            Ok(Fixture::Symbol(Arc::new(SeparableSymbol::new(amp)?)))
        }
        "smooth_cutoff_zeta" => {
            let c = common(p, 1)?;
            let coeff = p.amplitude.unwrap_or(1.0);
            let term = Term {
                coeff: C64::new(coeff, 0.0),
                w: (0..c.d)
                    .map(|i| Factor(vec![Profile::Bump { center: c.u[i], radius: axis_radius(c.ell, c.d) }]))
                    .collect(),
                z: vec![],
                xi: (0..c.d)
                    .map(|i| Factor(vec![Profile::Bump { center: c.mu[i], radius: axis_radius(c.rho, c.d) }]))
                    .collect(),
            };
            let amp = SeparableAmplitude::new(c.d, vec![term], Some(support(&c)), "smooth_cutoff_zeta")?;
            Ok(Fixture::Symbol(Arc::new(SeparableSymbol::new(amp)?)))
        }
        "tensor_bump" => {
            let c = common(p, 1)?;
            let sw = positive(p.sigma_w, 1.0, "sigma_w")?;
            let sx = positive(p.sigma_xi, 1.0, "sigma_xi")?;
            let sz = positive(p.sigma_z, 1.0, "sigma_z")?;
            let coeff = p.amplitude.unwrap_or(1.0);
            let term = Term {
                coeff: C64::new(coeff, 0.0),
                w: (0..c.d).map(|i| gauss_bump(c.u[i], sw, axis_radius(c.ell, c.d))).collect(),
                z: (0..c.d).map(|_| Factor(vec![Profile::Gaussian { center: 0.0, width: sz }])).collect(),
                xi: (0..c.d).map(|i| gauss_bump(c.mu[i], sx, axis_radius(c.rho, c.d))).collect(),
            };
            let amp = SeparableAmplitude::new(c.d, vec![term], Some(support(&c)), "tensor_bump")?;
            Ok(Fixture::Amplitude(Arc::new(amp)))
        }
        "poly_decay" => {
            let d = p.d.unwrap_or(1);
            if d == 0 || d > 2 {
                return Err(invalid("d", format!("{d} is outside 1..=2")));
            }
            let a = p.amplitude.unwrap_or(1.0);
            if !(a >= 0.0) {
                return Err(invalid("amplitude", "must be nonnegative"));
            }
            let gw = positive(p.gamma_w, 3.0, "gamma_w")?;
            let gx = positive(p.gamma_xi, 3.0, "gamma_xi")?;
            let term = Term {
                coeff: C64::new(a, 0.0),
                w: (0..d).map(|_| Factor(vec![Profile::Decay { gamma: gw, scale: 1.0 }])).collect(),
                z: vec![],
                xi: (0..d).map(|_| Factor(vec![Profile::Decay { gamma: gx, scale: 1.0 }])).collect(),
            };
            let order = 4;
            let cw = decay_constant(gw, order);
            let cx = decay_constant(gx, order);
            let decay = Decay { a: a * (cw * cx).powi(d as i32), gamma_w: gw, gamma_xi: gx, order };
            let amp = SeparableAmplitude::new(d, vec![term], None, "poly_decay")?.with_decay(decay);
            Ok(Fixture::Symbol(Arc::new(SeparableSymbol::new(amp)?)))
        }
        "plane_cut_product" => {
            let c = common(p, 2)?;
            if c.d != 2 {
                return Err(invalid("d", "plane_cut_product is a d=2 family"));
            }
            let s_par = positive(p.sigma_par, 1.0, "sigma_par")?;
            let s_perp = positive(p.sigma_w, 1.0, "sigma_w")?;
            let sx = positive(p.sigma_xi, 1.0, "sigma_xi")?;
            let r = axis_radius(c.ell, 2);
            let term = Term {
                coeff: C64::new(p.amplitude.unwrap_or(1.0), 0.0),
                w: vec![gauss_bump(c.u[0], s_par, r), gauss_bump(c.u[1], s_perp, r)],
                z: vec![],
                xi: (0..2).map(|i| gauss_bump(c.mu[i], sx, axis_radius(c.rho, 2))).collect(),
            };
            let amp = SeparableAmplitude::new(2, vec![term], Some(support(&c)), "plane_cut_product")?;
            Ok(Fixture::Symbol(Arc::new(SeparableSymbol::new(amp)?)))
        }
        "bspline_bump" => {
            let c = common(p, 1)?;
            if c.d != 1 {
                return Err(invalid("d", "bspline_bump is a d=1 family"));
            }
            let sw = positive(p.sigma_w, 1.0, "sigma_w")?;
            let order = p.order.unwrap_or(3);
            if order < 2 {
                return Err(invalid("order", "B-spline order must be at least 2"));
            }
            let term = Term {
                coeff: C64::new(p.amplitude.unwrap_or(1.0), 0.0),
                w: vec![gauss_bump(c.u[0], sw, c.ell)],
                z: vec![],
                xi: vec![Factor(vec![Profile::BSpline { center: c.mu[0], radius: c.rho, order }])],
            };
            let amp = SeparableAmplitude::new(1, vec![term], Some(support(&c)), "bspline_bump")?;
            Ok(Fixture::Symbol(Arc::new(SeparableSymbol::new(amp)?)))
        }
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// Smallest `C` with `|f^(k)(x)| <= C (1 + |x|)^(-gamma)` for `k <= order`, where
/// `f = (2 + 2x^2)^(-gamma/2)`. Sampled on a fine grid and inflated by 1%.
fn decay_constant(gamma: f64, order: usize) -> f64 {
    let prof = Profile::Decay { gamma, scale: 1.0 };
    let mut c = 0.0f64;
    let n = 20000;
    for i in 0..=n {
        let x = 100.0 * i as f64 / n as f64;
        let ders = prof.jet(x, order).derivatives();
        let weight = (1.0 + x).powf(gamma);
        for v in ders {
            c = c.max(v.abs() * weight);
        }
    }
    c * 1.01
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_bump_defaults() {
        let f = builtin_family("gaussian_bump", &FamilyParams::default()).unwrap();
        let s = f.as_symbol().unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.eval(&[0.0], &[0.0]).re - 1.0).abs() < 1e-15);
        // inside the flat part of the bump the factor is the bare Gaussian
        let v = s.eval(&[0.3], &[-0.2]).re;
        assert!((v - (-0.09f64 - 0.04).exp()).abs() < 1e-15);
        assert_eq!(s.eval(&[1.0], &[0.0]).norm(), 0.0);
        assert_eq!(s.eval(&[0.0], &[1.2]).norm(), 0.0);
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!(builtin_family("nope", &FamilyParams::default()), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn poly_decay_order_zero_bound() {
        let f = builtin_family("poly_decay", &FamilyParams::default()).unwrap();
        let s = f.as_symbol().unwrap();
        for i in 0..200 {
            let w = -20.0 + 0.2 * i as f64;
            for j in 0..50 {
                let xi = -10.0 + 0.4 * j as f64;
                let bound = (1.0 + w.abs()).powi(-3) * (1.0 + xi.abs()).powi(-3);
                assert!(s.eval(&[w], &[xi]).norm() <= bound);
            }
        }
        let dec = s.decay().unwrap();
        assert!(dec.a >= 1.0);
    }

    #[test]
    fn d2_support_cube_sits_inside_ball() {
        let p = FamilyParams { d: Some(2), ..Default::default() };
        let s = builtin_family("gaussian_bump", &p).unwrap().as_symbol().unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(s.eval(&[r, 0.0], &[0.0, 0.0]).norm(), 0.0);
        assert!(s.eval(&[0.99 * r / 2.0, 0.99 * r / 2.0], &[0.0, 0.0]).norm() > 0.0);
    }

    #[test]
    fn unknown_param_field_is_named() {
        let err = toml::from_str::<FamilyParams>("ell = 1.0\nbogus = 2.0").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
