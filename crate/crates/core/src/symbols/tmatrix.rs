//! The 2x2 coefficient matrix mapping `(x, y)` to the amplitude arguments `(w, z)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    pub delta0: f64,
    pub t0: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { delta0: 1e-6, t0: 1e6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TMatrix {
    pub t11: f64,
    pub t12: f64,
    pub t21: f64,
    pub t22: f64,
}

impl TMatrix {
    pub fn new(t11: f64, t12: f64, t21: f64, t22: f64) -> Result<Self> {
        TMatrix { t11, t12, t21, t22 }.guarded(Guards::default())
    }

    pub fn guarded(self, g: Guards) -> Result<Self> {
        let entries = [self.t11, self.t12, self.t21, self.t22];
        if entries.iter().any(|t| !t.is_finite()) {
            return Err(invalid("T", "entries must be finite"));
        }
        let max = entries.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if max > g.t0 {
            return Err(invalid("T", format!("max |t_jk| = {max:e} exceeds t0 = {:e}", g.t0)));
        }
        if self.det().abs() < g.delta0 {
            return Err(Error::DegenerateMatrix { det: self.det(), guard: g.delta0 });
        }
        Ok(self)
    }

    /// `[[1 - t, t], [-1, 1]]`: the t-quantization.
    pub fn from_t(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid("t", format!("{t} is outside [0, 1]")));
        }
        Ok(TMatrix { t11: 1.0 - t, t12: t, t21: -1.0, t22: 1.0 })
    }

    pub fn tau(&self) -> f64 {
        self.t21 + self.t22
    }

    pub fn det(&self) -> f64 {
        self.t11 * self.t22 - self.t12 * self.t21
    }

    pub fn is_normalized(&self) -> bool {
        (self.t11 + self.t12 - 1.0).abs() <= 1e-12
    }

    pub fn forward(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = x.iter().zip(y).map(|(a, b)| self.t11 * a + self.t12 * b).collect();
        let z = x.iter().zip(y).map(|(a, b)| self.t21 * a + self.t22 * b).collect();
        (w, z)
    }

    pub fn recover_xy(&self, w: &[f64], z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::DegenerateMatrix { det, guard: 0.0 });
        }
        let x = w.iter().zip(z).map(|(a, b)| (self.t22 * a - self.t12 * b) / det).collect();
        let y = w.iter().zip(z).map(|(a, b)| (-self.t21 * a + self.t11 * b) / det).collect();
        Ok((x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_quantization_matrices() {
        let t0 = TMatrix::from_t(0.0).unwrap();
        assert_eq!((t0.t11, t0.t12, t0.t21, t0.t22), (1.0, 0.0, -1.0, 1.0));
        let weyl = TMatrix::from_t(0.5).unwrap();
        assert_eq!((weyl.t11, weyl.t12), (0.5, 0.5));
        let t1 = TMatrix::from_t(1.0).unwrap();
        assert_eq!((t1.t11, t1.t12, t1.t21, t1.t22), (0.0, 1.0, -1.0, 1.0));
        for t in [t0, weyl, t1] {
            assert_eq!(t.tau(), 0.0);
            assert_eq!(t.det(), 1.0);
            assert!(t.is_normalized());
        }
        assert!(TMatrix::from_t(1.5).is_err());
        assert!(TMatrix::from_t(-0.1).is_err());
    }

    #[test]
    fn recover_examples() {
        let t = TMatrix::from_t(0.0).unwrap();
        let (x, y) = t.recover_xy(&[1.0], &[2.0]).unwrap();
        assert_eq!((x[0], y[0]), (1.0, 3.0));
        let id = TMatrix::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let (x, y) = id.recover_xy(&[0.3], &[-0.7]).unwrap();
        assert_eq!((x[0], y[0]), (0.3, -0.7));
    }

    #[test]
    fn guards_reject_degenerate_and_large() {
        assert!(matches!(TMatrix::new(1.0, 1.0, 1.0, 1.0), Err(Error::DegenerateMatrix { .. })));
        assert!(TMatrix::new(2e6, 0.0, 0.0, 1.0).is_err());
        let singular = TMatrix { t11: 1.0, t12: 2.0, t21: 2.0, t22: 4.0 };
        assert!(singular.recover_xy(&[1.0], &[1.0]).is_err());
    }
}
