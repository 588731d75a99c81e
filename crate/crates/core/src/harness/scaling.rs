//! Sweeps in `alpha` for smooth symbols.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::common::{default_slope_tolerance, measure, quadrature, ratio, require_fixture, support_scales};
use super::config::ExperimentConfig;
use super::report::{Criterion, Predicted, Row, ScalingReport, Scope};
use crate::error::{Error, Result};
use crate::quantize::{assemble_amplitude, XiQuadrature};
use crate::symbols::profile::LATTICE_RADIUS_1D;
use crate::symbols::{norm_n, norm_n_symbol, smoothness_orders, Factor, Fixture, NormSampling, Profile, SeparableAmplitude, TMatrix, Term};

fn warnings_to_notes(notes: &mut Vec<String>, w: &[String]) {
    for msg in w {
        if !notes.contains(msg) {
            notes.push(msg.clone());
        }
    }
}

/// `N^{(n1, n2)}` for symbols and `N^{(n1, n1, n2)}` for amplitudes.
fn fixture_norm(f: &Fixture, n1: usize, n2: usize, ell: f64, rho: f64) -> Result<f64> {
    match f {
        Fixture::Symbol(s) => norm_n_symbol(s.as_ref(), n1, n2, ell, rho, NormSampling::default()),
        Fixture::Amplitude(a) => norm_n(a.as_ref(), n1, n1, n2, ell, rho, NormSampling::default()),
    }
}

pub fn run_smooth_scaling(cfg: &ExperimentConfig, seed: u64) -> Result<ScalingReport> {
    let f = require_fixture(cfg.fixture()?, "smooth_scaling")?;
    let d = f.dim();
    let grid = cfg.grid.grid(d)?;
    let q = cfg.q;
    let (n, _) = smoothness_orders(d, q)?;
    let (ell, rho) = support_scales(&f)?;
    let norm = fixture_norm(&f, n, n, ell, rho)?;
    let amp = f.as_amplitude();
    let tm = TMatrix::from_t(cfg.t())?;
    let e = d as f64 / q;
    let results: Vec<Result<(Row, Vec<String>)>> = cfg
        .alphas()
        .par_iter()
        .map(|&alpha| {
            let quad = quadrature(&amp, alpha, &grid, cfg.n_xi)?;
            let op = assemble_amplitude(&amp, &tm, alpha, &grid, &quad)?;
            let m = measure(op.mat.as_ref(), q, cfg.tail_cut, &op.provenance.describe())?;
            let mut row = m.row(alpha);
            let bound = (alpha * ell * rho).powf(e) * norm;
            row.bound = Some(bound);
            row.ratio = ratio(m.value, bound);
            Ok((row, op.provenance.warnings))
        })
        .collect();
    let mut rows = Vec::new();
    let mut notes = vec![format!("N^(n,n) with n = {n}: {norm:.6e}; l = {ell}, rho = {rho}")];
    for r in results {
        let (row, w) = r?;
        warnings_to_notes(&mut notes, &w);
        rows.push(row);
    }
    let tol = cfg.tolerance.unwrap_or_else(|| default_slope_tolerance(q));
    Ok(ScalingReport::build(
        cfg,
        seed,
        "alpha",
        rows,
        Predicted { exponent: Some(e), law: "(alpha l rho)^(d/q) N^(n,n)".into(), tolerance: Some(tol) },
        Criterion::Slope { exponent: e, tolerance: tol, max_ratio_growth: Some(2.0), checks: vec![] },
        Scope::Proven,
        notes,
    ))
}

pub fn run_quantization_difference(cfg: &ExperimentConfig, seed: u64) -> Result<ScalingReport> {
    let f = require_fixture(cfg.fixture()?, "quantization_difference")?;
    let a = f.as_symbol()?;
    let d = f.dim();
    let grid = cfg.grid.grid(d)?;
    let q = cfg.q;
    let (n, _) = smoothness_orders(d, q)?;
    let (ell, rho) = support_scales(&f)?;
    let norm = norm_n_symbol(a.as_ref(), n, n + 1, ell, rho, NormSampling::default())?;
    let (t, s) = (cfg.t(), cfg.s.unwrap_or(1.0));
    let amp = f.as_amplitude();
    let (tt, ts) = (TMatrix::from_t(t)?, TMatrix::from_t(s)?);
    let e = d as f64 / q - 1.0;
    let rows: Vec<Row> = cfg
        .alphas()
        .par_iter()
        .map(|&alpha| {
            let quad = quadrature(&amp, alpha, &grid, cfg.n_xi)?;
            let at = assemble_amplitude(&amp, &tt, alpha, &grid, &quad)?;
            let diff = if t == s { at.sub(&at)? } else { at.sub(&assemble_amplitude(&amp, &ts, alpha, &grid, &quad)?)? };
            let m = measure(diff.mat.as_ref(), q, cfg.tail_cut, &format!("Op_{t} - Op_{s}"))?;
            let mut row = m.row(alpha);
            let bound = (alpha * ell * rho).powf(e) * norm;
            row.bound = Some(bound);
            row.ratio = ratio(m.value, bound);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let tol = cfg.tolerance.unwrap_or(0.15);
    Ok(ScalingReport::build(
        cfg,
        seed,
        "alpha",
        rows,
        Predicted { exponent: Some(e), law: "(alpha l rho)^(d/q - 1) N^(n,n+1)".into(), tolerance: Some(tol) },
        Criterion::Slope { exponent: e, tolerance: tol, max_ratio_growth: Some(2.0), checks: vec![] },
        Scope::Proven,
        vec![format!("t = {t}, s = {s}; N^(n,n+1) with n = {n}: {norm:.6e}")],
    ))
}

/// `sum over j in [-k, k]^d of (1 + |j|)^(-g)`.
fn cube_sum(d: usize, g: f64, k: i64) -> f64 {
    match d {
        1 => (-k..=k).map(|j| (1.0 + j.abs() as f64).powf(-g)).sum(),
        _ => {
            let mut s = 0.0;
            for a in -k..=k {
                for b in -k..=k {
                    s += (1.0 + ((a * a + b * b) as f64).sqrt()).powf(-g);
                }
            }
            s
        }
    }
}

/// Whole-lattice sum: a large cube plus the integral of the tail outside it.
fn lattice_sum(d: usize, g: f64) -> f64 {
    let k: i64 = if d == 1 { 100_000 } else { 600 };
    let r = k as f64;
    let tail = if d == 1 { 2.0 * (1.0 + r).powf(1.0 - g) / (g - 1.0) } else { 2.0 * PI * r.powf(2.0 - g) / (g - 2.0) };
    cube_sum(d, g, k) + tail
}

/// Relative mass of the partition terms `(j, s)` outside `[-jmax, jmax]^d x [-smax, smax]^d`.
pub fn partition_tail_fraction(d: usize, g1: f64, g2: f64, jmax: i64, smax: i64) -> f64 {
    let kept = cube_sum(d, g1, jmax) * cube_sum(d, g2, smax);
    let total = lattice_sum(d, g1) * lattice_sum(d, g2);
    (1.0 - kept / total).max(0.0)
}

pub fn run_noncompact_symbol(cfg: &ExperimentConfig, seed: u64) -> Result<ScalingReport> {
    let f = require_fixture(cfg.fixture()?, "noncompact_symbol")?;
    let base = f.as_amplitude();
    let dec = base.decay.clone().ok_or_else(|| Error::Precondition("fixture carries no decay bound".into()))?;
    let d = base.d;
    let q = cfg.q;
    let thr = d as f64 / q;
    if !(dec.gamma_w > thr && dec.gamma_xi > thr) {
        return Err(Error::Precondition(format!("decay exponents ({}, {}) must exceed d/q = {thr}", dec.gamma_w, dec.gamma_xi)));
    }
    let grid = cfg.grid.grid(d)?;
    let alphas = cfg.alphas();
    let a_max = alphas.iter().cloned().fold(0.0, f64::max);
    let jmax = (grid.half_width - LATTICE_RADIUS_1D).floor() as i64;
    let sqd = (d as f64).sqrt();
    // alpha_max (S + R) sqrt(d) h < pi
    let smax = ((PI / (a_max * grid.h() * sqd) - LATTICE_RADIUS_1D) * (1.0 - 1e-9)).floor() as i64;
    if jmax < 0 || smax < 0 {
        return Err(Error::Precondition(format!(
            "the box (half-width {}, h = {}) cannot hold a single partition term at alpha = {a_max}",
            grid.half_width,
            grid.h()
        )));
    }
    let window = |k: i64| Profile::LatticeWindow { lo: -k, hi: k, scale: 1.0 };
    let terms: Vec<Term> = base
        .terms
        .iter()
        .map(|t| Term {
            coeff: t.coeff,
            w: t.w.iter().map(|fa| Factor(fa.0.iter().cloned().chain([window(jmax)]).collect())).collect(),
            z: vec![],
            xi: t.xi.iter().map(|fa| Factor(fa.0.iter().cloned().chain([window(smax)]).collect())).collect(),
        })
        .collect();
    let amp = SeparableAmplitude::new(d, terms, None, format!("{} truncated to |j| <= {jmax}, |s| <= {smax}", base.label))?;
    let xi_radius = (smax as f64 + LATTICE_RADIUS_1D) * sqd;
    let tm = TMatrix::from_t(cfg.t())?;
    let tail = partition_tail_fraction(d, dec.gamma_w * q, dec.gamma_xi * q, jmax, smax);
    let target = cfg.noncompact.as_ref().map(|c| c.tail_target).unwrap_or(1e-6);
    let rows: Vec<Row> = alphas
        .par_iter()
        .map(|&alpha| {
            let quad = match cfg.n_xi {
                Some(nx) => XiQuadrature::new(vec![0.0; d], xi_radius, nx)?,
                None => XiQuadrature::auto(vec![0.0; d], xi_radius, alpha, &grid, crate::quantize::assemble::DEFAULT_SAFETY)?,
            };
            let op = assemble_amplitude(&amp, &tm, alpha, &grid, &quad)?;
            let m = measure(op.mat.as_ref(), q, cfg.tail_cut, &op.provenance.describe())?;
            let mut row = m.row(alpha);
            let bound = dec.a * alpha.powf(thr);
            row.bound = Some(bound);
            row.ratio = ratio(m.value, bound);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut notes = vec![format!(
        "partition terms kept: |j|_inf <= {jmax} in w, |s|_inf <= {smax} in xi; relative tail of the term bounds {tail:.3e}"
    )];
    if tail > target {
        notes.push(format!(
            "truncation tail {tail:.3e} exceeds the target {target:.0e}: the box and the Nyquist limit at alpha = {a_max} cap the number of terms"
        ));
    }
    let tol = cfg.tolerance.unwrap_or(0.15);
    Ok(ScalingReport::build(
        cfg,
        seed,
        "alpha",
        rows,
        Predicted { exponent: Some(thr), law: "A alpha^(d/q)".into(), tolerance: Some(tol) },
        Criterion::Slope { exponent: thr, tolerance: tol, max_ratio_growth: Some(2.0), checks: vec![] },
        Scope::Proven,
        notes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_fraction_matches_zeta_sum() {
        // sum_{j in Z} (1+|j|)^-3 = 2 zeta(3) - 1
        let zeta3 = 1.202_056_903_159_594_3;
        let total = 2.0 * zeta3 - 1.0;
        assert!((lattice_sum(1, 3.0) - total).abs() < 1e-9);
        let kept = cube_sum(1, 3.0, 2);
        let want = 1.0 - kept * kept / (total * total);
        assert!((partition_tail_fraction(1, 3.0, 3.0, 2, 2) - want).abs() < 1e-9);
    }

    #[test]
    fn tail_fraction_decreases() {
        let a = partition_tail_fraction(2, 4.0, 4.0, 2, 2);
        let b = partition_tail_fraction(2, 4.0, 4.0, 4, 2);
        assert!(b < a && a < 1.0);
    }
}
