//! Truncated Taylor series in one real variable.
//!
//! A `Jet` stores normalized Taylor coefficients `c[k] = f^(k)(x0) / k!` up to a
//! fixed order. Arithmetic propagates the coefficients exactly, so builtin
//! profiles get derivatives of any order without finite differences.

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn from_coefficients(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn derivative(&self, k: usize) -> f64 {
        if k > self.order() {
            return 0.0;
        }
        self.c[k] * factorial(k)
    }

    /// All derivatives `f^(0..=order)(x0)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.c.len());
        let mut f = 1.0;
        for (k, &ck) in self.c.iter().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            out.push(ck * f);
        }
        out
    }

    pub fn add(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.order(), other.order());
        Jet { c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.order(), other.order());
        Jet { c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { c }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.order(), other.order());
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        let n = self.c.len();
        let f0 = self.c[0];
        let mut g = vec![0.0; n];
        g[0] = 1.0 / f0;
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * g[k - j];
            }
            g[k] = -s / f0;
        }
        Jet { c: g }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * g[k - j];
            }
            g[k] = s / k as f64;
        }
        Jet { c: g }
    }

    /// `f^a` for `f(x0) > 0`.
    pub fn powf(&self, a: f64) -> Jet {
        let n = self.c.len();
        let f0 = self.c[0];
        let mut g = vec![0.0; n];
        g[0] = f0.powf(a);
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += ((a + 1.0) * j as f64 - k as f64) * self.c[j] * g[k - j];
            }
            g[k] = s / (k as f64 * f0);
        }
        Jet { c: g }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable_has_unit_derivatives() {
        let j = Jet::variable(0.0, 6).exp();
        for d in j.derivatives() {
            assert!((d - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_derivatives_match_hermite() {
        // d^k/dx^k e^{-x^2} = (-1)^k H_k(x) e^{-x^2}
        let x = 0.7;
        let j = Jet::variable(x, 4).mul(&Jet::variable(x, 4)).scale(-1.0).exp();
        let e = (-x * x).exp();
        let h = [1.0, 2.0 * x, 4.0 * x * x - 2.0, 8.0 * x.powi(3) - 12.0 * x, 16.0 * x.powi(4) - 48.0 * x * x + 12.0];
        for k in 0..=4 {
            let expect = if k % 2 == 0 { h[k] * e } else { -h[k] * e };
            assert!((j.derivative(k) - expect).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn powf_matches_closed_form() {
        // (1 + x^2)^(-3/2) at x = 0.5
        let x = 0.5;
        let v = Jet::variable(x, 2);
        let g = v.mul(&v).add_scalar(1.0).powf(-1.5);
        let base = 1.0 + x * x;
        let d1 = -3.0 * x * base.powf(-2.5);
        let d2 = -3.0 * base.powf(-2.5) + 15.0 * x * x * base.powf(-3.5);
        assert!((g.value() - base.powf(-1.5)).abs() < 1e-15);
        assert!((g.derivative(1) - d1).abs() < 1e-14);
        assert!((g.derivative(2) - d2).abs() < 1e-14);
    }

    #[test]
    fn recip_times_self_is_one() {
        let v = Jet::variable(1.3, 7).exp().add_scalar(2.0);
        let p = v.mul(&v.recip());
        assert!((p.value() - 1.0).abs() < 1e-15);
        for k in 1..=7 {
            assert!(p.coefficients()[k].abs() < 1e-13);
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }
}
