//! Smooth partition of unity subordinate to the balls `B(j, 2 sqrt(d))`, `j` in `Z^d`.

use crate::jet::Jet;
use crate::symbols::profile::{lattice_window_jet, LATTICE_RADIUS_1D};

/// Tensor product of the one-dimensional lattice windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticePartition {
    pub d: usize,
}

pub fn lattice_partition(d: usize) -> LatticePartition {
    LatticePartition { d }
}

impl LatticePartition {
    pub fn support_radius(&self) -> f64 {
        LATTICE_RADIUS_1D * (self.d as f64).sqrt()
    }

    pub fn axis_jet(&self, j: i64, x: f64, order: usize) -> Jet {
        lattice_window_jet(x, j, j, order)
    }

    pub fn psi(&self, j: &[i64], x: &[f64]) -> f64 {
        j.iter().zip(x).map(|(&j, &x)| lattice_window_jet(x, j, j, 0).value()).product()
    }

    /// Indices with `psi_j(x) != 0` possible.
    pub fn active(&self, x: &[f64]) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = vec![vec![]];
        for &xi in x {
            let b = xi.floor() as i64;
            let mut next = Vec::new();
            for prefix in &out {
                for k in (b - 1)..=(b + 2) {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// `max_y |d^k w(y)|` for the one-dimensional window, `k <= order`, from jets on a fine grid.
    pub fn axis_derivative_bounds(&self, order: usize) -> Vec<f64> {
        let mut b = vec![0.0f64; order + 1];
        let n = 4000;
        for i in 0..=n {
            let y = -LATTICE_RADIUS_1D + 2.0 * LATTICE_RADIUS_1D * i as f64 / n as f64;
            let jet = lattice_window_jet(y, 0, 0, order);
            for (k, v) in jet.derivatives().into_iter().enumerate() {
                b[k] = b[k].max(v.abs());
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sums_to_one_and_is_supported() {
        let p = lattice_partition(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)];
            let s: f64 = p.active(&x).iter().map(|j| p.psi(j, &x)).sum();
            assert!((s - 1.0).abs() < 1e-12);
            let j = [x[0].round() as i64 + 2, x[1].round() as i64];
            let r = ((x[0] - j[0] as f64).powi(2) + (x[1] - j[1] as f64).powi(2)).sqrt();
            if r >= p.support_radius() {
                assert_eq!(p.psi(&j, &x), 0.0);
            }
        }
    }

    #[test]
    fn translation_is_exact_on_dyadic_points() {
        let p = lattice_partition(1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = rng.random_range(-(1i64 << 24)..(1i64 << 24)) as f64 / (1u64 << 20) as f64;
            let j = rng.random_range(-10..10);
            assert_eq!(p.psi(&[j + 1], &[x + 1.0]), p.psi(&[j], &[x]));
        }
    }

    #[test]
    fn derivative_bounds_are_finite() {
        let b = lattice_partition(1).axis_derivative_bounds(3);
        assert!(b[0] > 0.3 && b[0] <= 1.0);
        assert!(b.iter().all(|v| v.is_finite()));
    }
}
