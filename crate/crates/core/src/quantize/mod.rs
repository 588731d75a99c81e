//! Nyström discretization of the operators on a symmetric midpoint grid.
//!
//! Entries are `h^{d/2} K(x_i, x_j) h^{d/2}`, so the singular values of the
//! matrix approximate those of the integral operator on `L^2([-L, L]^d)`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::domains::LipschitzDomain;
use crate::error::{invalid, Error, Result};
use crate::symbols::TMatrix;
use crate::C64;

pub mod assemble;
pub mod export;
pub mod multiplier;

pub use assemble::{assemble_amplitude, assemble_t_quant, XiQuadrature};
pub use multiplier::{assemble_multiplier, Multiplier};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub half_width: f64,
    pub n_per_axis: usize,
}

impl Grid {
    pub fn new(d: usize, half_width: f64, n_per_axis: usize) -> Result<Self> {
        if d == 0 || d > 2 {
            return Err(invalid("grid.d", format!("{d} is outside 1..=2")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid("grid.half_width", "must be positive and finite"));
        }
        if n_per_axis == 0 {
            return Err(invalid("grid.n_per_axis", "must be positive"));
        }
        Ok(Grid { d, half_width, n_per_axis })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n_per_axis as f64
    }

    pub fn size(&self) -> usize {
        self.n_per_axis.pow(self.d as u32)
    }

    pub fn weight(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    /// Midpoint `-L + (i + 1/2) h`, written so that `x_{n-1-i} = -x_i` exactly.
    pub fn axis_point(&self, i: usize) -> f64 {
        let n = self.n_per_axis as f64;
        self.half_width * (2.0 * i as f64 + 1.0 - n) / n
    }

    pub fn axis_points(&self) -> Vec<f64> {
        (0..self.n_per_axis).map(|i| self.axis_point(i)).collect()
    }

    /// Row-major multi-index of a flat index (first axis slowest).
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let n = self.n_per_axis;
        let mut out = vec![0; self.d];
        let mut rem = flat;
        for k in (0..self.d).rev() {
            out[k] = rem % n;
            rem /= n;
        }
        out
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).into_iter().map(|i| self.axis_point(i)).collect()
    }

    /// Diameter of the box `[-L, L]^d`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.half_width * (self.d as f64).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Grid {
        Grid { d: self.d, half_width: self.half_width * s, n_per_axis: self.n_per_axis }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operator: String,
    pub alpha: Option<f64>,
    pub t_matrix: Option<TMatrix>,
    pub n_xi: Option<usize>,
    pub warnings: Vec<String>,
}

impl Provenance {
    pub fn named(operator: impl Into<String>) -> Self {
        Provenance { operator: operator.into(), ..Default::default() }
    }

    pub fn describe(&self) -> String {
        let mut s = self.operator.clone();
        if let Some(a) = self.alpha {
            s.push_str(&format!(" alpha={a}"));
        }
        if let Some(t) = &self.t_matrix {
            s.push_str(&format!(" T=[[{}, {}], [{}, {}]]", t.t11, t.t12, t.t21, t.t22));
        }
        if let Some(n) = self.n_xi {
            s.push_str(&format!(" n_xi={n}"));
        }
        s
    }
}

/// Dense matrix of an operator `L^2(col grid) -> L^2(row grid)`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub mat: Mat<C64>,
    pub grid: Grid,
    pub col_grid: Grid,
    pub provenance: Provenance,
}

impl OperatorMatrix {
    pub fn square(mat: Mat<C64>, grid: Grid, provenance: Provenance) -> Self {
        OperatorMatrix { mat, col_grid: grid.clone(), grid, provenance }
    }

    pub fn zeros(grid: &Grid, name: &str) -> Self {
        let n = grid.size();
        Self::square(Mat::zeros(n, n), grid.clone(), Provenance::named(name))
    }

    pub fn identity(grid: &Grid) -> Self {
        let n = grid.size();
        Self::square(Mat::identity(n, n), grid.clone(), Provenance::named("identity"))
    }

    pub fn nrows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.mat.ncols()
    }

    fn same_grids(&self, other: &OperatorMatrix, what: &str) -> Result<()> {
        if self.grid != other.grid || self.col_grid != other.col_grid {
            return Err(Error::GridMismatch(format!("{what}: `{}` vs `{}`", self.provenance.operator, other.provenance.operator)));
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_grids(other, "add")?;
        Ok(OperatorMatrix {
            mat: &self.mat + &other.mat,
            grid: self.grid.clone(),
            col_grid: self.col_grid.clone(),
            provenance: Provenance::named(format!("({}) + ({})", self.provenance.operator, other.provenance.operator)),
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_grids(other, "sub")?;
        Ok(OperatorMatrix {
            mat: &self.mat - &other.mat,
            grid: self.grid.clone(),
            col_grid: self.col_grid.clone(),
            provenance: Provenance::named(format!("({}) - ({})", self.provenance.operator, other.provenance.operator)),
        })
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.col_grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "product: `{}` * `{}`",
                self.provenance.operator, other.provenance.operator
            )));
        }
        Ok(OperatorMatrix {
            mat: &self.mat * &other.mat,
            grid: self.grid.clone(),
            col_grid: other.col_grid.clone(),
            provenance: Provenance::named(format!("({}) * ({})", self.provenance.operator, other.provenance.operator)),
        })
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            mat: self.mat.adjoint().to_owned(),
            grid: self.col_grid.clone(),
            col_grid: self.grid.clone(),
            provenance: Provenance::named(format!("({})^*", self.provenance.operator)),
        }
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        m
    }

    /// The submatrix on the selected rows and columns. Its nonzero singular
    /// values are those of `D_rows A D_cols`.
    pub fn compress(&self, rows: &[bool], cols: &[bool]) -> Mat<C64> {
        let ri: Vec<usize> = (0..self.nrows()).filter(|&i| rows[i]).collect();
        let ci: Vec<usize> = (0..self.ncols()).filter(|&j| cols[j]).collect();
        Mat::from_fn(ri.len(), ci.len(), |a, b| self.mat[(ri[a], ci[b])])
    }
}

/// Diagonal 0/1 mask of a domain on the grid points.
pub fn indicator_mask(domain: &LipschitzDomain, grid: &Grid) -> Result<Vec<bool>> {
    if domain.dim() != grid.d {
        return Err(Error::GridMismatch(format!("domain of dimension {} on a d={} grid", domain.dim(), grid.d)));
    }
    Ok((0..grid.size()).map(|i| domain.contains(&grid.point(i))).collect())
}

pub fn indicator_diag(domain: &LipschitzDomain, grid: &Grid) -> Result<OperatorMatrix> {
    let mask = indicator_mask(domain, grid)?;
    let n = grid.size();
    let mat = Mat::from_fn(n, n, |i, j| if i == j && mask[i] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    Ok(OperatorMatrix::square(mat, grid.clone(), Provenance::named(format!("chi[{}]", domain.describe()))))
}

/// `D A (I - D)` for the indicator `D` of the domain.
pub fn hankel(domain: &LipschitzDomain, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.grid != a.col_grid {
        return Err(Error::GridMismatch("hankel needs a square operator".into()));
    }
    let mask = indicator_mask(domain, &a.grid)?;
    let n = a.nrows();
    let mat = Mat::from_fn(n, n, |i, j| if mask[i] && !mask[j] { a.mat[(i, j)] } else { C64::new(0.0, 0.0) });
    Ok(OperatorMatrix::square(
        mat,
        a.grid.clone(),
        Provenance::named(format!("chi A (1 - chi) [{}; {}]", domain.describe(), a.provenance.operator)),
    ))
}

/// The nonzero block of `D A (I - D)`: rows inside the domain, columns outside.
pub fn hankel_block(domain: &LipschitzDomain, a: &OperatorMatrix) -> Result<Mat<C64>> {
    let mask = indicator_mask(domain, &a.grid)?;
    let out: Vec<bool> = mask.iter().map(|m| !m).collect();
    Ok(a.compress(&mask, &out))
}

/// `A P - P A`.
pub fn commutator(a: &OperatorMatrix, p: &OperatorMatrix) -> Result<OperatorMatrix> {
    let ap = a.mul(p)?;
    let pa = p.mul(a)?;
    let mut c = ap.sub(&pa)?;
    c.provenance = Provenance::named(format!("[{}, {}]", a.provenance.operator, p.provenance.operator));
    Ok(c)
}

/// Matrix of the operator with kernel `f(x) e^{i x . S y} g(y)` between two grids.
/// `s` is row-major with `rows = dim(x)` and `cols = dim(y)`.
pub fn bs_kernel_operator(
    f: &dyn Fn(&[f64]) -> C64,
    g: &dyn Fn(&[f64]) -> C64,
    s: &[Vec<f64>],
    grid_x: &Grid,
    grid_y: &Grid,
) -> Result<OperatorMatrix> {
    if s.len() != grid_x.d || s.iter().any(|row| row.len() != grid_y.d) {
        return Err(invalid("S", format!("expected a {}x{} matrix", grid_x.d, grid_y.d)));
    }
    let xs: Vec<Vec<f64>> = (0..grid_x.size()).map(|i| grid_x.point(i)).collect();
    let ys: Vec<Vec<f64>> = (0..grid_y.size()).map(|j| grid_y.point(j)).collect();
    let fx: Vec<C64> = xs.iter().map(|x| f(x)).collect();
    let gy: Vec<C64> = ys.iter().map(|y| g(y)).collect();
    let wx = grid_x.weight().sqrt();
    let wy = grid_y.weight().sqrt();
    let mat = Mat::from_fn(xs.len(), ys.len(), |i, j| {
        let mut phase = 0.0;
        for (a, row) in s.iter().enumerate() {
            for (b, sab) in row.iter().enumerate() {
                phase += xs[i][a] * sab * ys[j][b];
            }
        }
        fx[i] * gy[j] * C64::from_polar(wx * wy, phase)
    });
    Ok(OperatorMatrix { mat, grid: grid_x.clone(), col_grid: grid_y.clone(), provenance: Provenance::named("f e^{ixSy} g") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_midpoint() {
        let g = Grid::new(1, 2.0, 8).unwrap();
        assert_eq!(g.h(), 0.5);
        let p = g.axis_points();
        assert_eq!(p[0], -1.75);
        for i in 0..8 {
            assert_eq!(p[i], -p[7 - i]);
            assert!(p[i].abs() < 2.0);
        }
    }

    #[test]
    fn flat_index_is_row_major() {
        let g = Grid::new(2, 1.0, 4).unwrap();
        assert_eq!(g.multi_index(6), vec![1, 2]);
        assert_eq!(g.point(6), vec![g.axis_point(1), g.axis_point(2)]);
    }
}
