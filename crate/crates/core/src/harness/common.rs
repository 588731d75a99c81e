//! Shared measurement helpers for the experiments.

use faer::MatRef;
use serde::{Deserialize, Serialize};

use super::report::Row;
use crate::error::{Error, Result};
use crate::quantize::assemble::DEFAULT_SAFETY;
use crate::quantize::{Grid, XiQuadrature};
use crate::schatten::{qnorm, singular_values_of, SingularSpectrum};
use crate::symbols::{Amplitude, Fixture};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub tail_mass: f64,
    /// Largest relative change when the tail cut is multiplied or divided by 10.
    pub sensitivity: Option<f64>,
}

impl Measurement {
    pub fn row(&self, parameter: f64) -> Row {
        let mut r = Row::new(parameter, self.value);
        r.tail_mass = self.tail_mass;
        r.tail_sensitivity = self.sensitivity;
        r
    }
}

pub fn measure_spectrum(spec: &SingularSpectrum, q: f64, tail_cut: f64) -> Result<Measurement> {
    let base = qnorm(spec, q, tail_cut)?;
    if base.zero {
        return Ok(Measurement { value: 0.0, tail_mass: 0.0, sensitivity: None });
    }
    let sensitivity = if tail_cut > 0.0 {
        let hi = qnorm(spec, q, (tail_cut * 10.0).min(1.0))?.value;
        let lo = qnorm(spec, q, tail_cut / 10.0)?.value;
        Some(((hi - base.value).abs().max((lo - base.value).abs())) / base.value)
    } else {
        None
    };
    Ok(Measurement { value: base.value, tail_mass: base.tail_mass, sensitivity })
}

pub fn measure(m: MatRef<'_, C64>, q: f64, tail_cut: f64, source: &str) -> Result<Measurement> {
    measure_spectrum(&singular_values_of(m, source)?, q, tail_cut)
}

/// The support-ball quadrature, at a fixed resolution when `n_xi` is given.
pub fn quadrature(p: &dyn Amplitude, alpha: f64, grid: &Grid, n_xi: Option<usize>) -> Result<XiQuadrature> {
    match n_xi {
        None => XiQuadrature::for_amplitude(p, alpha, grid, DEFAULT_SAFETY),
        Some(n) => {
            let s = p.support().ok_or_else(|| Error::Precondition(format!("`{}` has no xi-support", p.describe())))?;
            XiQuadrature::new(s.xi.center, s.xi.radius, n)
        }
    }
}

/// `(l, rho)`: the support radii of a compactly supported fixture.
pub fn support_scales(f: &Fixture) -> Result<(f64, f64)> {
    let amp = f.as_amplitude();
    let s = amp.support.as_ref().ok_or_else(|| Error::Precondition(format!("fixture `{}` is not compactly supported", amp.label)))?;
    Ok((s.w.radius, s.xi.radius))
}

pub fn require_fixture(f: Option<Fixture>, kind: &str) -> Result<Fixture> {
    f.ok_or_else(|| Error::Config(format!("fixture: is required for kind `{kind}`")))
}

/// `measured / bound`, or `None` for a vanishing bound.
pub fn ratio(measured: f64, bound: f64) -> Option<f64> {
    if bound > 0.0 && bound.is_finite() {
        Some(measured / bound)
    } else {
        None
    }
}

pub fn default_slope_tolerance(q: f64) -> f64 {
    if q == 1.0 {
        0.1
    } else {
        0.15
    }
}
