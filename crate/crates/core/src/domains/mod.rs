//! Lipschitz domains, distance bounds, the tau scale function and coverings.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbols::Ball;

pub mod partition;
pub mod whitney;

pub use partition::{lattice_partition, LatticePartition};
pub use whitney::{whitney_cover, WhitneyCover, WhitneyOptions};

/// Lipschitz boundary functions `R -> R` for epigraphs in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    Constant { c: f64 },
    Linear { slope: f64, offset: f64 },
    /// `scale * |s|`
    Abs { scale: f64 },
    /// `amp * sin(freq * s)`
    Sin { amp: f64, freq: f64 },
    /// Lower arc of the circle of the given radius touching the origin,
    /// with `|s|` clipped at `clip < radius`.
    CircleArc { radius: f64, clip: f64 },
}

impl Phi {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Phi::Constant { c } => c,
            Phi::Linear { slope, offset } => slope * s + offset,
            Phi::Abs { scale } => scale * s.abs(),
            Phi::Sin { amp, freq } => amp * (freq * s).sin(),
            Phi::CircleArc { radius, clip } => {
                let c = s.abs().min(clip);
                radius - (radius * radius - c * c).sqrt()
            }
        }
    }

    /// The Lipschitz constant `M`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Phi::Constant { .. } => 0.0,
            Phi::Linear { slope, .. } => slope.abs(),
            Phi::Abs { scale } => scale.abs(),
            Phi::Sin { amp, freq } => (amp * freq).abs(),
            Phi::CircleArc { radius, clip } => clip / (radius * radius - clip * clip).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Phi::CircleArc { radius, clip } = *self {
            if !(radius > 0.0 && clip >= 0.0 && clip < radius) {
                return Err(invalid("phi", "circle_arc needs 0 <= clip < radius"));
            }
        }
        Ok(())
    }
}

/// Rigid motion: local coordinates are `R(-angle) (x - shift)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    #[serde(default)]
    pub angle: f64,
    #[serde(default)]
    pub shift: [f64; 2],
}

impl Frame {
    pub fn to_local(&self, x: &[f64]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x[0] - self.shift[0], x[1] - self.shift[1]);
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn to_global(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [c * p[0] - s * p[1] + self.shift[0], s * p[0] + c * p[1] + self.shift[1]]
    }
}

/// A ball in which a bounded domain coincides with an epigraph.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub ball: Ball,
    pub phi: Phi,
    pub frame: Frame,
}

impl Chart {
    pub fn epigraph_contains(&self, x: &[f64]) -> bool {
        let p = self.frame.to_local(x);
        p[1] > self.phi.eval(p[0])
    }
}

/// Open domains. Boundary points belong to the complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipschitzDomain {
    /// `(0, inf)`
    HalflinePos,
    /// `(-inf, 0)`
    HalflineNeg,
    Interval { a: f64, b: f64 },
    /// `{ x : x_2 > phi(x_1) }` in the local coordinates of `frame`.
    Epigraph {
        phi: Phi,
        #[serde(default)]
        frame: Frame,
    },
    Disc { center: [f64; 2], radius: f64 },
    /// Open axis-aligned rectangle.
    Square { lo: [f64; 2], hi: [f64; 2] },
}

impl LipschitzDomain {
    pub fn validate(&self) -> Result<()> {
        match self {
            LipschitzDomain::Interval { a, b } if !(a < b) => Err(invalid("domain.interval", format!("needs a < b, got ({a}, {b})"))),
            LipschitzDomain::Epigraph { phi, .. } => phi.validate(),
            LipschitzDomain::Disc { radius, .. } if !(*radius > 0.0) => Err(invalid("domain.disc.radius", "must be positive")),
            LipschitzDomain::Square { lo, hi } if !(lo[0] < hi[0] && lo[1] < hi[1]) => Err(invalid("domain.square", "needs lo < hi on both axes")),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LipschitzDomain::HalflinePos | LipschitzDomain::HalflineNeg | LipschitzDomain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// True for the half-lines and epigraphs.
    pub fn is_basic(&self) -> bool {
        matches!(self, LipschitzDomain::HalflinePos | LipschitzDomain::HalflineNeg | LipschitzDomain::Epigraph { .. })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            LipschitzDomain::HalflinePos => x[0] > 0.0,
            LipschitzDomain::HalflineNeg => x[0] < 0.0,
            LipschitzDomain::Interval { a, b } => x[0] > *a && x[0] < *b,
            LipschitzDomain::Epigraph { phi, frame } => {
                let p = frame.to_local(x);
                p[1] > phi.eval(p[0])
            }
            LipschitzDomain::Disc { center, radius } => {
                (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) < radius * radius
            }
            LipschitzDomain::Square { lo, hi } => x[0] > lo[0] && x[0] < hi[0] && x[1] > lo[1] && x[1] < hi[1],
        }
    }

    pub fn indicator(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }

    /// Lipschitz constant of the boundary: of `phi` for epigraphs, the largest
    /// chart constant for bounded domains, 0 in d = 1.
    pub fn lipschitz(&self) -> f64 {
        match self {
            LipschitzDomain::Epigraph { phi, .. } => phi.lipschitz(),
            LipschitzDomain::Disc { .. } | LipschitzDomain::Square { .. } => {
                self.charts().iter().map(|c| c.phi.lipschitz()).fold(0.0, f64::max)
            }
            _ => 0.0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            LipschitzDomain::HalflinePos => "(0, inf)".into(),
            LipschitzDomain::HalflineNeg => "(-inf, 0)".into(),
            LipschitzDomain::Interval { a, b } => format!("({a}, {b})"),
            LipschitzDomain::Epigraph { phi, frame } => format!("epigraph {phi:?} frame {frame:?}"),
            LipschitzDomain::Disc { center, radius } => format!("disc {center:?} r={radius}"),
            LipschitzDomain::Square { lo, hi } => format!("square {lo:?}-{hi:?}"),
        }
    }

    /// Charts for the bounded planar fixtures: eight per domain.
    pub fn charts(&self) -> Vec<Chart> {
        match self {
            LipschitzDomain::Disc { center, radius } => (0..8)
                .map(|k| {
                    let theta = k as f64 * std::f64::consts::FRAC_PI_4;
                    let b = [center[0] + radius * theta.cos(), center[1] + radius * theta.sin()];
                    // local y axis is the inward normal -(cos, sin) = R(angle) (0, 1)
                    let angle = theta + std::f64::consts::FRAC_PI_2;
                    Chart {
                        ball: Ball::new(b.to_vec(), 0.5 * radius),
                        phi: Phi::CircleArc { radius: *radius, clip: radius * std::f64::consts::FRAC_1_SQRT_2 },
                        frame: Frame { angle, shift: b },
                    }
                })
                .collect(),
            LipschitzDomain::Square { lo, hi } => {
                let side = (hi[0] - lo[0]).min(hi[1] - lo[1]);
                let r = side / 3.0;
                let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
                use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
                let mut out = Vec::new();
                // corners: local y axis along the inner bisector, boundary |s|
                for (p, bis) in [(*lo, FRAC_PI_4), ([hi[0], lo[1]], 3.0 * FRAC_PI_4), (*hi, -3.0 * FRAC_PI_4), ([lo[0], hi[1]], -FRAC_PI_4)] {
                    out.push(Chart {
                        ball: Ball::new(p.to_vec(), r),
                        phi: Phi::Abs { scale: 1.0 },
                        frame: Frame { angle: bis - FRAC_PI_2, shift: p },
                    });
                }
                // edges: local y axis along the inward normal
                for (p, normal) in [([mid[0], lo[1]], FRAC_PI_2), ([hi[0], mid[1]], PI), ([mid[0], hi[1]], -FRAC_PI_2), ([lo[0], mid[1]], 0.0)] {
                    out.push(Chart {
                        ball: Ball::new(p.to_vec(), r),
                        phi: Phi::Constant { c: 0.0 },
                        frame: Frame { angle: normal - FRAC_PI_2, shift: p },
                    });
                }
                out
            }
            _ => vec![],
        }
    }

    /// Points on the boundary of a bounded planar fixture.
    pub fn boundary_samples(&self, n: usize) -> Vec<[f64; 2]> {
        match self {
            LipschitzDomain::Disc { center, radius } => (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect(),
            LipschitzDomain::Square { lo, hi } => (0..n)
                .map(|k| {
                    let s = 4.0 * k as f64 / n as f64;
                    let (e, f) = (s.floor() as usize, s.fract());
                    match e {
                        0 => [lo[0] + f * (hi[0] - lo[0]), lo[1]],
                        1 => [hi[0], lo[1] + f * (hi[1] - lo[1])],
                        2 => [hi[0] - f * (hi[0] - lo[0]), hi[1]],
                        _ => [lo[0], hi[1] - f * (hi[1] - lo[1])],
                    }
                })
                .collect(),
            _ => vec![],
        }
    }
}

/// Checks `|x - y| >= (x_2 - phi(x_1)) / sqrt(1 + M^2)` in local coordinates
/// (d = 2 epigraphs) or `|x - y| >= dist(x, 0)` for half-lines.
pub fn separation_check(domain: &LipschitzDomain, x: &[f64], y: &[f64]) -> Result<bool> {
    if !domain.contains(x) || domain.contains(y) {
        return Err(Error::Precondition("need x inside and y outside the domain".into()));
    }
    let dist = crate::symbols::dist(x, y);
    match domain {
        LipschitzDomain::HalflinePos | LipschitzDomain::HalflineNeg => Ok(dist >= x[0].abs()),
        LipschitzDomain::Epigraph { phi, frame } => {
            let p = frame.to_local(x);
            let m = phi.lipschitz();
            Ok(dist >= (p[1] - phi.eval(p[0])) / (1.0 + m * m).sqrt())
        }
        _ => Err(Error::Precondition(format!("separation bound needs a basic domain, got {}", domain.describe()))),
    }
}

/// Scale function adapted to the boundary of `domain`: in d = 1
/// `(|xi|^2 + alpha^-2)^(1/2) / 32`, in d = 2
/// `((xi_2 - psi(xi_1))_+^2 + alpha^-2)^(1/2) / (32 sqrt(1 + M^2))` in local coordinates.
pub fn tau_metric(xi: &[f64], domain: &LipschitzDomain, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    let ia2 = alpha.powi(-2);
    match domain {
        LipschitzDomain::HalflinePos | LipschitzDomain::HalflineNeg => Ok((xi[0] * xi[0] + ia2).sqrt() / 32.0),
        LipschitzDomain::Epigraph { phi, frame } => {
            let p = frame.to_local(xi);
            let m = phi.lipschitz();
            let h = (p[1] - phi.eval(p[0])).max(0.0);
            Ok((h * h + ia2).sqrt() / (32.0 * (1.0 + m * m).sqrt()))
        }
        _ => Err(Error::Precondition(format!("tau needs a basic domain, got {}", domain.describe()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn indicator_examples() {
        assert!(LipschitzDomain::Interval { a: 0.0, b: 1.0 }.contains(&[0.5]));
        assert!(!LipschitzDomain::HalflinePos.contains(&[-0.1]));
        assert!(!LipschitzDomain::HalflinePos.contains(&[0.0]));
        let e = LipschitzDomain::Epigraph { phi: Phi::Abs { scale: 0.5 }, frame: Frame::default() };
        assert!(e.contains(&[1.0, 0.6]));
        assert_eq!(e.lipschitz(), 0.5);
    }

    #[test]
    fn interval_must_be_ordered() {
        assert!(LipschitzDomain::Interval { a: 1.0, b: 0.0 }.validate().is_err());
    }

    #[test]
    fn separation_examples() {
        let flat = LipschitzDomain::Epigraph { phi: Phi::Constant { c: 0.0 }, frame: Frame::default() };
        assert!(separation_check(&flat, &[0.0, 1.0], &[0.0, -1.0]).unwrap());
        assert!(separation_check(&LipschitzDomain::HalflinePos, &[0.3], &[-0.2]).unwrap());
        assert!(separation_check(&flat, &[0.0, -1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn tau_examples() {
        assert!((tau_metric(&[0.0], &LipschitzDomain::HalflinePos, 1.0).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        let flat = LipschitzDomain::Epigraph { phi: Phi::Constant { c: 0.0 }, frame: Frame::default() };
        let t = tau_metric(&[0.0, 3.0], &flat, 1e9).unwrap();
        assert!((t - 3.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn frame_round_trip() {
        let f = Frame { angle: 0.7, shift: [1.0, -2.0] };
        let g = f.to_global(f.to_local(&[0.3, 0.4]));
        assert!((g[0] - 0.3).abs() < 1e-14 && (g[1] - 0.4).abs() < 1e-14);
    }

    fn charts_agree(domain: &LipschitzDomain) {
        let charts = domain.charts();
        for b in domain.boundary_samples(400) {
            assert!(charts.iter().any(|c| c.ball.contains(&b)), "{b:?} not in any chart");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for c in &charts {
            for _ in 0..2000 {
                let r = c.ball.radius * rng.random::<f64>().sqrt();
                let t = rng.random::<f64>() * std::f64::consts::TAU;
                let x = [c.ball.center[0] + r * t.cos(), c.ball.center[1] + r * t.sin()];
                assert_eq!(domain.contains(&x), c.epigraph_contains(&x), "{x:?} in {:?}", c.frame);
            }
        }
    }

    #[test]
    fn disc_charts_cover_boundary_and_agree() {
        charts_agree(&LipschitzDomain::Disc { center: [0.2, -0.1], radius: 0.8 });
    }

    #[test]
    fn square_charts_cover_boundary_and_agree() {
        charts_agree(&LipschitzDomain::Square { lo: [-0.5, -0.25], hi: [0.5, 0.75] });
    }
}
