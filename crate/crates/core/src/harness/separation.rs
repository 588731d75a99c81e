//! Decay of `h1 Op_{alpha,t}(a) h2` in the distance between the weights.

use rayon::prelude::*;

use super::common::{measure, quadrature, require_fixture};
use super::config::{ExperimentConfig, SeparationVariant, Weights};
use super::report::{Criterion, Predicted, Row, ScalingReport, Scope};
use crate::error::{Error, Result};
use crate::quantize::assemble::DEFAULT_SAFETY;
use crate::quantize::{assemble_amplitude, Grid, XiQuadrature};
use crate::symbols::{Factor, SeparableAmplitude, TMatrix, Term};

/// Row and column masks for the two weights at separation `r`.
pub fn weight_masks(grid: &Grid, weights: &Weights, r: f64) -> (Vec<bool>, Vec<bool>) {
    let x: Vec<f64> = (0..grid.size()).map(|i| grid.point(i)[0]).collect();
    let half = r / 2.0;
    match weights {
        Weights::HalfLines => (x.iter().map(|&v| v < -half).collect(), x.iter().map(|&v| v > half).collect()),
        Weights::Intervals { width } => (
            x.iter().map(|&v| v < -half && v > -half - width).collect(),
            x.iter().map(|&v| v > half && v < half + width).collect(),
        ),
    }
}

/// The `xi`-factors of a one-dimensional symbol with the `w`-dependence dropped.
fn xi_only(amp: &SeparableAmplitude) -> Result<SeparableAmplitude> {
    let terms = amp
        .terms
        .iter()
        .map(|t| Term { coeff: t.coeff, w: vec![Factor::one(); amp.d], z: vec![], xi: t.xi.clone() })
        .collect();
    SeparableAmplitude::new(amp.d, terms, None, format!("{} (xi only)", amp.label))
}

pub fn run_separation_decay(cfg: &ExperimentConfig, seed: u64) -> Result<ScalingReport> {
    let sep = cfg.separation.as_ref().ok_or_else(|| Error::Config("separation: section is required".into()))?;
    let f = require_fixture(cfg.fixture()?, "separation_decay")?;
    let base = f.as_amplitude();
    let d = base.d;
    let grid = cfg.grid.grid(d)?;
    let q = cfg.q;
    if let Some(r) = sep.r.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Precondition(format!("the weights at r = {r} overlap")));
    }
    if let Some(bad) = sep.r.iter().find(|r| !(**r >= 1.0)) {
        return Err(Error::Config(format!("separation.r: {bad} is below r >= 1")));
    }
    let support = base.support.clone().ok_or_else(|| Error::Precondition("fixture needs a xi-support".into()))?;
    let alpha = sep.alpha;
    let (amp, quad, t) = match sep.variant {
        SeparationVariant::Symbol => {
            let quad = quadrature(&base, alpha, &grid, cfg.n_xi)?;
            (base.clone(), quad, cfg.t())
        }
        SeparationVariant::XiOnly => {
            if d != 1 {
                return Err(Error::Config("separation.variant: the xi-only variant is one-dimensional".into()));
            }
            let quad = match cfg.n_xi {
                Some(n) => XiQuadrature::new(support.xi.center.clone(), support.xi.radius, n)?,
                None => XiQuadrature::auto(support.xi.center.clone(), support.xi.radius, alpha, &grid, DEFAULT_SAFETY)?,
            };
            (xi_only(&base)?, quad, 0.0)
        }
    };
    let op = assemble_amplitude(&amp, &TMatrix::from_t(t)?, alpha, &grid, &quad)?;
    let e = d as f64 / q - sep.m as f64;
    let rows: Vec<Row> = sep
        .r
        .par_iter()
        .map(|&r| {
            let (rows, cols) = weight_masks(&grid, &sep.weights, r);
            if !rows.iter().any(|&b| b) || !cols.iter().any(|&b| b) {
                return Err(Error::Precondition(format!("a weight at r = {r} has no grid points inside the box")));
            }
            let block = op.compress(&rows, &cols);
            let m = measure(block.as_ref(), q, cfg.tail_cut, &format!("h1 A h2, r = {r}"))?;
            let mut row = m.row(r);
            row.bound = Some(r.powf(e));
            row.ratio = Some(m.value / r.powf(e));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let tol = cfg.tolerance.unwrap_or(0.3);
    let variant = match sep.variant {
        SeparationVariant::Symbol => format!("symbol a(w, xi), t = {t}"),
        SeparationVariant::XiOnly => "symbol a(xi)".to_string(),
    };
    let mut notes = vec![format!("{variant}, alpha = {alpha}, m = {}; the bound column is the r-law alone", sep.m)];
    notes.extend(op.provenance.warnings.iter().cloned());
    Ok(ScalingReport::build(
        cfg,
        seed,
        "r",
        rows,
        Predicted { exponent: Some(e), law: "r^(d/q - m)".into(), tolerance: Some(tol) },
        Criterion::Slope { exponent: e, tolerance: tol, max_ratio_growth: None, checks: vec![] },
        Scope::Proven,
        notes,
    ))
}
