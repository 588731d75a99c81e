//! Hankel-type operators with one or two jump discontinuities.

use faer::Mat;
use rayon::prelude::*;

use super::common::{measure, quadrature, ratio, require_fixture, support_scales};
use super::config::{ExperimentConfig, HankelVariant};
use super::report::{Criterion, Predicted, Row, RowCheck, ScalingReport, Scope};
use crate::domains::{Frame, LipschitzDomain, Phi};
use crate::error::{Error, Result};
use crate::quantize::{assemble_amplitude, assemble_multiplier, hankel_block, indicator_mask, Grid, OperatorMatrix, XiQuadrature};
use crate::symbols::{norm_n_symbol, smoothness_orders, NormSampling, SeparableAmplitude, TMatrix, Term};
use crate::C64;

fn frobenius(m: faer::MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// `||P^2 - P||_F / ||P||_F`.
pub fn projection_defect(p: &OperatorMatrix) -> Result<f64> {
    let p2 = p.mul(p)?;
    let diff = p2.sub(p)?;
    let den = frobenius(p.mat.as_ref());
    Ok(if den > 0.0 { frobenius(diff.mat.as_ref()) / den } else { 0.0 })
}

fn scope_for(t: f64, exploratory: bool, field: &str) -> Result<Scope> {
    if t == 0.0 || t == 1.0 {
        return Ok(Scope::Proven);
    }
    if !exploratory {
        return Err(Error::Config(format!("t: {t} is not 0 or 1; set {field}.exploratory = true to run outside the proven range")));
    }
    Ok(Scope::OutsideProvenScope)
}

fn mat_mul(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    a * b
}

/// The factors of a single-term symbol on the half-plane `{x_2 > 0}`:
/// the operator is `A_1 (x) A_2`, so `||chi A (1 - chi)|| = ||A_1|| ||chi_+ A_2 (1 - chi_+)||`.
fn tensor_estimate(amp: &SeparableAmplitude, t: &TMatrix, alpha: f64, grid: &Grid, quad: &XiQuadrature, q: f64, tail_cut: f64) -> Result<Option<f64>> {
    if amp.d != 2 || amp.terms.len() != 1 {
        return Ok(None);
    }
    let term = &amp.terms[0];
    let g1 = Grid::new(1, grid.half_width, grid.n_per_axis)?;
    let mut factors = Vec::new();
    for k in 0..2 {
        let coeff = if k == 0 { term.coeff } else { C64::new(1.0, 0.0) };
        let t1 = Term { coeff, w: vec![term.w[k].clone()], z: vec![], xi: vec![term.xi[k].clone()] };
        let a1 = SeparableAmplitude::new(1, vec![t1], None, format!("axis {k}"))?;
        let q1 = XiQuadrature::new(vec![quad.center[k]], quad.radius, quad.n_xi)?;
        factors.push(assemble_amplitude(&a1, t, alpha, &g1, &q1)?);
    }
    let full = measure(factors[0].mat.as_ref(), q, tail_cut, "axis 0")?;
    let block = hankel_block(&LipschitzDomain::HalflinePos, &factors[1])?;
    let h = measure(block.as_ref(), q, tail_cut, "axis 1 hankel")?;
    Ok(Some(full.value * h.value))
}

fn is_flat_half_plane(d: &LipschitzDomain) -> bool {
    matches!(d, LipschitzDomain::Epigraph { phi: Phi::Constant { c }, frame } if *c == 0.0 && *frame == Frame::default())
}

pub fn run_hankel_one_variable(cfg: &ExperimentConfig, seed: u64) -> Result<ScalingReport> {
    let h = cfg.hankel.as_ref().ok_or_else(|| Error::Config("hankel: section is required".into()))?;
    let f = require_fixture(cfg.fixture()?, "hankel_one_variable")?;
    let a = f.as_symbol()?;
    let amp = f.as_amplitude();
    let d = amp.d;
    if h.domain.dim() != d {
        return Err(Error::Config(format!("hankel.domain: dimension {} does not match the fixture ({d})", h.domain.dim())));
    }
    let grid = cfg.grid.grid(d)?;
    let q = cfg.q;
    let t = cfg.t();
    let scope = scope_for(t, h.exploratory, "hankel")?;
    let tm = TMatrix::from_t(t)?;
    let (n, m) = smoothness_orders(d, q)?;
    let (ell, rho) = support_scales(&f)?;
    let norm = match h.variant {
        HankelVariant::ProjectionSandwich => norm_n_symbol(a.as_ref(), m, n, ell, rho, NormSampling::default())?,
        _ => norm_n_symbol(a.as_ref(), n, m, ell, rho, NormSampling::default())?,
    };
    let omega = match (&h.variant, &h.omega) {
        (HankelVariant::ProjectionSandwich, Some(o)) => Some(o.build()?),
        (HankelVariant::ProjectionSandwich, None) => return Err(Error::Config("hankel.omega: required for projection_sandwich".into())),
        _ => None,
    };
    let tensor = h.tensor_check && d == 2 && is_flat_half_plane(&h.domain);
    let e = (d as f64 - 1.0) / q;
    let mask = indicator_mask(&h.domain, &grid)?;
    let outside: Vec<bool> = mask.iter().map(|v| !v).collect();
    let rows: Vec<Row> = cfg
        .alphas()
        .par_iter()
        .map(|&alpha| {
            let quad = quadrature(&amp, alpha, &grid, cfg.n_xi)?;
            let op = assemble_amplitude(&amp, &tm, alpha, &grid, &quad)?;
            let mut extra = std::collections::BTreeMap::new();
            let mut defect = None;
            let meas = match h.variant {
                HankelVariant::Hankel => measure(op.compress(&mask, &outside).as_ref(), q, cfg.tail_cut, "chi A (1 - chi)")?,
                HankelVariant::ProjectionSandwich => {
                    let p = assemble_multiplier(omega.as_ref().unwrap(), alpha, &grid)?;
                    defect = Some(projection_defect(&p)?);
                    let id = OperatorMatrix::identity(&grid);
                    let x = mat_mul(&mat_mul(&p.mat, &op.mat), &id.sub(&p)?.mat);
                    measure(x.as_ref(), q, cfg.tail_cut, "P A (1 - P)")?
                }
                HankelVariant::Commutator => {
                    let x = measure(op.compress(&mask, &outside).as_ref(), q, cfg.tail_cut, "chi A (1 - chi)")?;
                    let y = measure(op.compress(&outside, &mask).as_ref(), q, cfg.tail_cut, "(1 - chi) A chi")?;
                    let nn = op.nrows();
                    let c = Mat::from_fn(nn, nn, |i, j| {
                        if mask[i] == mask[j] {
                            C64::new(0.0, 0.0)
                        } else if mask[j] {
                            op.mat[(i, j)]
                        } else {
                            -op.mat[(i, j)]
                        }
                    });
                    let cm = measure(c.as_ref(), q, cfg.tail_cut, "[A, chi]")?;
                    let parts = x.value.powf(q) + y.value.powf(q);
                    let whole = cm.value.powf(q);
                    let margin = if whole > 0.0 { (parts - whole) / whole } else { 0.0 };
                    extra.insert("hankel".to_string(), x.value);
                    extra.insert("quasi_triangle_margin".to_string(), margin);
                    cm
                }
            };
            if tensor {
                if let Some(est) = tensor_estimate(&amp, &tm, alpha, &grid, &quad, q, cfg.tail_cut)? {
                    extra.insert("tensor_estimate".to_string(), est);
                    if meas.value > 0.0 {
                        extra.insert("tensor_rel_diff".to_string(), (est - meas.value).abs() / meas.value);
                    }
                }
            }
            let mut row = meas.row(alpha);
            let bound = (alpha * ell * rho).powf(e) * norm;
            row.bound = Some(bound);
            row.ratio = ratio(meas.value, bound);
            row.projection_defect = defect;
            row.extra = extra;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let tol = cfg.tolerance.unwrap_or(if d == 1 { 0.15 } else { 0.25 });
    let checks = match h.variant {
        HankelVariant::Commutator => vec![RowCheck { key: "quasi_triangle_margin".into(), min: -1e-8 }],
        _ => vec![],
    };
    let (law, which) = match h.variant {
        HankelVariant::ProjectionSandwich => ("(alpha l rho)^((d-1)/q) N^(m,n)", "P A (1 - P)"),
        HankelVariant::Hankel => ("(alpha l rho)^((d-1)/q) N^(n,m)", "chi A (1 - chi)"),
        HankelVariant::Commutator => ("(alpha l rho)^((d-1)/q) N^(n,m)", "[A, chi]"),
    };
    let mut notes = vec![format!("{which} on {}, t = {t}; n = {n}, m = {m}, N = {norm:.6e}", h.domain.describe())];
    if scope == Scope::OutsideProvenScope {
        notes.push("t is outside {0, 1}: exploratory run outside the proven range".into());
    }
    Ok(ScalingReport::build(
        cfg,
        seed,
        "alpha",
        rows,
        Predicted { exponent: Some(e), law: law.into(), tolerance: Some(tol) },
        Criterion::Slope { exponent: e, tolerance: tol, max_ratio_growth: Some(2.0), checks },
        scope,
        notes,
    ))
}

pub fn run_two_discontinuities(cfg: &ExperimentConfig, seed: u64) -> Result<ScalingReport> {
    let c = cfg.two_discontinuities.as_ref().ok_or_else(|| Error::Config("two_discontinuities: section is required".into()))?;
    let omega = c.omega.build()?;
    let d = c.lambda.dim();
    let q = cfg.q;
    let fixture = cfg.fixture()?;
    let t = cfg.t();
    let scope = if fixture.is_some() { scope_for(t, c.exploratory, "two_discontinuities")? } else { Scope::Proven };
    let alphas = cfg.alphas();
    if let Some(a) = alphas.iter().find(|a| **a < 2.0) {
        return Err(Error::Config(format!("alpha: {a} is below alpha >= 2")));
    }
    let (scale, norm_q, amp) = match &fixture {
        None => (1.0, 1.0, None),
        Some(f) => {
            let (n, m) = smoothness_orders(d, q)?;
            let (ell, rho) = support_scales(f)?;
            let nm = norm_n_symbol(f.as_symbol()?.as_ref(), n, m, ell, rho, NormSampling::default())?;
            (ell * rho, nm.powf(q), Some(f.as_amplitude()))
        }
    };
    let tm = TMatrix::from_t(t)?;
    let groups: Vec<String> = c.boxes.iter().map(|b| format!("L={},n={}", b.half_width, b.n)).collect();
    let jobs: Vec<(usize, f64)> = (0..c.boxes.len()).flat_map(|k| alphas.iter().map(move |&a| (k, a))).collect();
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(k, alpha)| {
            let grid = c.boxes[k].grid(d)?;
            let p = assemble_multiplier(&omega, alpha, &grid)?;
            let defect = projection_defect(&p)?;
            let x = match &amp {
                None => p,
                Some(amp) => {
                    let quad = quadrature(amp, alpha, &grid, cfg.n_xi)?;
                    assemble_amplitude(amp, &tm, alpha, &grid, &quad)?.mul(&p)?
                }
            };
            let mask = indicator_mask(&c.lambda, &grid)?;
            let outside: Vec<bool> = mask.iter().map(|v| !v).collect();
            let meas = measure(x.compress(&mask, &outside).as_ref(), q, cfg.tail_cut, "chi A P (1 - chi)")?;
            let s = alpha * scale;
            let law = s.powi(d as i32 - 1) * s.ln() * norm_q;
            let mut row = meas.row(alpha);
            row.group = groups[k].clone();
            row.bound = Some(law);
            row.ratio = ratio(meas.value.powf(q), law);
            row.projection_defect = Some(defect);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let what = if fixture.is_some() { "chi A P (1 - chi)" } else { "chi P (1 - chi)" };
    let mut notes = vec![
        format!("{what} with Lambda = {}, Omega = {}", c.lambda.describe(), omega.describe()),
        "measured is the quasi-norm; bound and ratio are in q-th power units: ratio = measured^q / bound".into(),
        "projection defect is ||P^2 - P||_F / ||P||_F on the box".into(),
    ];
    if scope == Scope::OutsideProvenScope {
        notes.push("t is outside {0, 1}: exploratory run outside the proven range".into());
    }
    Ok(ScalingReport::build(
        cfg,
        seed,
        "alpha",
        rows,
        Predicted { exponent: None, law: "((alpha l rho)^(d-1) log(alpha l rho))^(1/q)".into(), tolerance: Some(c.max_variation) },
        Criterion::RatioStability { max_variation: c.max_variation, box_consistency: c.box_consistency, groups },
        scope,
        notes,
    ))
}
