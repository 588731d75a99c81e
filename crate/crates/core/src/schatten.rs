//! Singular values, Schatten quasi-norms, and the ideal inequalities.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantize::OperatorMatrix;
use crate::C64;

/// Singular values sorted in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub source: String,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>, source: impl Into<String>) -> Self {
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        SingularSpectrum { values, source: source.into() }
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// CSV with header `index,value`, indices starting at 1.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            wr.write_record([(i + 1).to_string(), format!("{v:.17e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn singular_values_of(m: MatRef<'_, C64>, source: &str) -> Result<SingularSpectrum> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(SingularSpectrum::new(vec![], source));
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(invalid("matrix", format!("non-finite entry at ({i}, {j}) in `{source}`")));
            }
        }
    }
    let sv = m.singular_values().map_err(|_| Error::Svd { provenance: source.to_string() })?;
    Ok(SingularSpectrum::new(sv, source))
}

pub fn singular_values(op: &OperatorMatrix) -> Result<SingularSpectrum> {
    singular_values_of(op.mat.as_ref(), &op.provenance.describe())
}

/// A quasi-norm together with the q-mass of the excluded tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNorm {
    pub value: f64,
    /// `sum of s_k^q` over the singular values dropped by the tail cut.
    pub tail_mass: f64,
    pub kept: usize,
    /// Set when the spectrum is identically zero.
    pub zero: bool,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid("q", format!("{q} is outside (0, 1]")));
    }
    Ok(())
}

/// `(sum_{s_k >= tail_cut * s_1} s_k^q)^(1/q)`.
pub fn qnorm(spec: &SingularSpectrum, q: f64, tail_cut: f64) -> Result<QNorm> {
    check_q(q)?;
    if !(tail_cut >= 0.0) {
        return Err(invalid("tail_cut", "must be nonnegative"));
    }
    let s1 = spec.largest();
    if s1 == 0.0 {
        return Ok(QNorm { value: 0.0, tail_mass: 0.0, kept: 0, zero: true });
    }
    let cut = tail_cut * s1;
    let (mut kept_sum, mut tail, mut kept) = (0.0, 0.0, 0);
    // ascending order keeps the small terms from being swamped
    for &s in spec.values.iter().rev() {
        let v = s.powf(q);
        if s >= cut {
            kept_sum += v;
            kept += 1;
        } else {
            tail += v;
        }
    }
    Ok(QNorm { value: kept_sum.powf(1.0 / q), tail_mass: tail, kept, zero: false })
}

/// `(sum s_k^p)^(1/p)` for any `p > 0`, or the largest value for `p = inf`.
pub fn schatten_norm(spec: &SingularSpectrum, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(spec.largest());
    }
    if !(p > 0.0) {
        return Err(invalid("p", format!("{p} must be positive")));
    }
    let s: f64 = spec.values.iter().rev().map(|s| s.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TriangleReport {
    pub q: f64,
    /// `||A + B||^q`
    pub lhs: f64,
    /// `||A||^q + ||B||^q`
    pub rhs: f64,
    pub margin: f64,
}

impl TriangleReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }
}

fn same_shape(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

pub fn check_triangle(a: MatRef<'_, C64>, b: MatRef<'_, C64>, q: f64) -> Result<TriangleReport> {
    check_q(q)?;
    same_shape(a, b)?;
    let sum: Mat<C64> = a + b;
    let pow = |m: MatRef<'_, C64>| -> Result<f64> {
        let s = singular_values_of(m, "triangle")?;
        Ok(qnorm(&s, q, 0.0)?.value.powf(q))
    };
    let lhs = pow(sum.as_ref())?;
    let rhs = pow(a)? + pow(b)?;
    Ok(TriangleReport { q, lhs, rhs, margin: rhs - lhs })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HolderReport {
    pub q1: f64,
    pub q2: f64,
    pub q: f64,
    /// `||AB||_q`
    pub lhs: f64,
    /// `||A||_{q1} ||B||_{q2}`
    pub rhs: f64,
    pub margin: f64,
}

impl HolderReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol * self.rhs.max(1.0)
    }
}

/// `||AB||_q <= ||A||_{q1} ||B||_{q2}` with `1/q = 1/q1 + 1/q2` and `q <= 1`.
/// `q1` or `q2` may be infinite (spectral norm).
pub fn check_holder(a: MatRef<'_, C64>, b: MatRef<'_, C64>, q1: f64, q2: f64) -> Result<HolderReport> {
    if !(q1 > 0.0) || !(q2 > 0.0) {
        return Err(invalid("q1/q2", "exponents must be positive"));
    }
    let inv = 1.0 / q1 + 1.0 / q2;
    let q = 1.0 / inv;
    if q > 1.0 + 1e-12 {
        return Err(invalid("q1/q2", format!("1/q1 + 1/q2 = {inv} gives q = {q} > 1")));
    }
    if a.ncols() != b.nrows() {
        return Err(Error::ShapeMismatch(format!("cannot multiply {}x{} by {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    let ab: Mat<C64> = a * b;
    let lhs = schatten_norm(&singular_values_of(ab.as_ref(), "holder AB")?, q)?;
    let na = schatten_norm(&singular_values_of(a, "holder A")?, q1)?;
    let nb = schatten_norm(&singular_values_of(b, "holder B")?, q2)?;
    let rhs = na * nb;
    Ok(HolderReport { q1, q2, q, lhs, rhs, margin: rhs - lhs })
}
