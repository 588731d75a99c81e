//! Experiment configuration files (TOML).

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domains::LipschitzDomain;
use crate::error::{Error, Result};
use crate::quantize::{Grid, Multiplier};
use crate::symbols::{builtin_family, FamilyParams, Fixture};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SmoothScaling,
    QuantizationDifference,
    SeparationDecay,
    HankelOneVariable,
    TwoDiscontinuities,
    NoncompactSymbol,
    BoundRatio,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SmoothScaling => "smooth_scaling",
            ExperimentKind::QuantizationDifference => "quantization_difference",
            ExperimentKind::SeparationDecay => "separation_decay",
            ExperimentKind::HankelOneVariable => "hankel_one_variable",
            ExperimentKind::TwoDiscontinuities => "two_discontinuities",
            ExperimentKind::NoncompactSymbol => "noncompact_symbol",
            ExperimentKind::BoundRatio => "bound_ratio",
        }
    }

    pub fn all() -> [ExperimentKind; 7] {
        [
            ExperimentKind::SmoothScaling,
            ExperimentKind::QuantizationDifference,
            ExperimentKind::SeparationDecay,
            ExperimentKind::HankelOneVariable,
            ExperimentKind::TwoDiscontinuities,
            ExperimentKind::NoncompactSymbol,
            ExperimentKind::BoundRatio,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureConfig {
    pub family: String,
    #[serde(default)]
    pub params: FamilyParams,
}

impl FixtureConfig {
    pub fn build(&self) -> Result<Fixture> {
        builtin_family(&self.family, &self.params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn grid(&self, d: usize) -> Result<Grid> {
        Grid::new(d, self.half_width, self.n)
    }
}

/// Either an explicit list or `start * factor^k`, `k < count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    List(Vec<f64>),
    Geometric {
        start: f64,
        #[serde(default = "two")]
        factor: f64,
        #[serde(default = "five")]
        count: usize,
    },
}

fn two() -> f64 {
    2.0
}

fn five() -> usize {
    5
}

impl AlphaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AlphaSpec::List(v) => v.clone(),
            AlphaSpec::Geometric { start, factor, count } => (0..*count).map(|k| start * factor.powi(k as i32)).collect(),
        }
    }
}

/// Frequency-side indicator `Omega`. Only shapes with exact Fourier integrals are accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaConfig {
    Interval { lo: f64, hi: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    /// Listed so that configs naming it get a clear rejection.
    Disc { center: [f64; 2], radius: f64 },
}

impl OmegaConfig {
    pub fn build(&self) -> Result<Multiplier> {
        match self {
            OmegaConfig::Interval { lo, hi } => Multiplier::interval(*lo, *hi),
            OmegaConfig::Polygon { vertices } => Multiplier::polygon(vertices.clone()),
            OmegaConfig::Rectangle { lo, hi } => Multiplier::rectangle(*lo, *hi),
            OmegaConfig::Disc { .. } => Err(Error::Config(
                "omega: a disc has no closed-form Fourier integral here and sampled indicators are not accepted; \
                 use an inscribed polygon"
                    .into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationVariant {
    /// The configured symbol `a(w, xi)`.
    Symbol,
    /// Only the `xi`-factor of the configured symbol (d = 1).
    XiOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weights {
    /// `h1 = chi(x_1 < -r/2)`, `h2 = chi(x_1 > r/2)` inside the box.
    HalfLines,
    /// `h1 = chi(-r/2 - width < x_1 < -r/2)`, `h2 = chi(r/2 < x_1 < r/2 + width)`.
    Intervals { width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationConfig {
    pub r: Vec<f64>,
    pub alpha: f64,
    pub m: usize,
    #[serde(default = "default_variant")]
    pub variant: SeparationVariant,
    #[serde(default = "default_weights")]
    pub weights: Weights,
}

fn default_variant() -> SeparationVariant {
    SeparationVariant::Symbol
}

fn default_weights() -> Weights {
    Weights::HalfLines
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HankelVariant {
    /// `chi A (1 - chi)`
    Hankel,
    /// `P A (1 - P)` with `P` the multiplier of `omega`.
    ProjectionSandwich,
    /// `[A, chi]` together with its two off-diagonal pieces.
    Commutator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HankelConfig {
    pub domain: LipschitzDomain,
    #[serde(default = "default_hankel_variant")]
    pub variant: HankelVariant,
    #[serde(default)]
    pub omega: Option<OmegaConfig>,
    /// Allow `t` outside {0, 1}; the verdict is then marked outside proven scope.
    #[serde(default)]
    pub exploratory: bool,
    /// In d = 2 with an axis-aligned half-plane, also compute the norm from the
    /// tensor factorization of the operator.
    #[serde(default)]
    pub tensor_check: bool,
}

fn default_hankel_variant() -> HankelVariant {
    HankelVariant::Hankel
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoDiscConfig {
    pub lambda: LipschitzDomain,
    pub omega: OmegaConfig,
    /// At least two box sizes; the first is the reference.
    pub boxes: Vec<GridConfig>,
    #[serde(default = "default_variation")]
    pub max_variation: f64,
    #[serde(default = "default_consistency")]
    pub box_consistency: f64,
    #[serde(default)]
    pub exploratory: bool,
}

fn default_variation() -> f64 {
    0.2
}

fn default_consistency() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoncompactConfig {
    /// Relative tail of the partition-term bounds that the truncation aims for.
    #[serde(default = "default_tail_target")]
    pub tail_target: f64,
}

fn default_tail_target() -> f64 {
    1e-6
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `||h1 Op(p_T) h2|| / (<<h1>>_{2,2q} <<h2>>_{2,2q} <<p^>>_{1,q})`
    Fourier,
    /// `... / (<<h1>>_{2,2q} <<h2>>_{2,2q} <<Q_{n,0}>>_{1,q})`
    QFunctional,
    /// `... / (<<h1>>_{2,inf} <<h2>>_{2,inf} <<P_{n,0}>>_{1,q})`
    PFunctional,
    /// `||h1 Op_t(a) h2|| / (<<h1>>_{2,inf} <<h2>>_{2,inf} <<F_{n,n}>>_{1,q})`
    FFunctional,
    /// `||f e^{ixSy} g|| / (<<f>>_{2,q} <<g>>_{2,q})`
    RankOne,
}

impl BoundVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BoundVariant::Fourier => "fourier",
            BoundVariant::QFunctional => "q_functional",
            BoundVariant::PFunctional => "p_functional",
            BoundVariant::FFunctional => "f_functional",
            BoundVariant::RankOne => "rank_one",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRatioConfig {
    pub variant: BoundVariant,
    #[serde(default = "default_family")]
    pub family_size: usize,
    /// Gaussian terms per random amplitude.
    #[serde(default = "default_terms")]
    pub max_terms: usize,
    /// Midpoint nodes per axis per lattice cube.
    #[serde(default = "default_cube_points")]
    pub cube_points: usize,
    /// Lattice truncation radius for the functionals.
    #[serde(default = "default_truncation")]
    pub truncation_radius: f64,
    /// Quadrature density for `Q`.
    #[serde(default = "default_q_density")]
    pub q_points_per_unit: f64,
    /// Append an identically zero fixture, which is excluded from the ratio.
    #[serde(default)]
    pub include_zero: bool,
    #[serde(default = "default_growth")]
    pub max_growth: f64,
}

fn default_family() -> usize {
    100
}

fn default_terms() -> usize {
    3
}

fn default_cube_points() -> usize {
    4
}

fn default_truncation() -> f64 {
    10.0
}

fn default_q_density() -> f64 {
    4.0
}

fn default_growth() -> f64 {
    2.0
}

fn default_tail_cut() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Report file stem; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
    pub q: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_tail_cut")]
    pub tail_cut: f64,
    /// Quantization parameter; 0 when absent.
    #[serde(default)]
    pub t: Option<f64>,
    /// Second quantization for the difference experiment; 1 when absent.
    #[serde(default)]
    pub s: Option<f64>,
    /// Slope tolerance override.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Fixed xi-quadrature resolution; chosen from the guard when absent.
    #[serde(default)]
    pub n_xi: Option<usize>,
    #[serde(default)]
    pub fixture: Option<FixtureConfig>,
    /// Spatial dimension when no fixture fixes it.
    #[serde(default)]
    pub d: Option<usize>,
    pub grid: GridConfig,
    #[serde(default)]
    pub alpha: Option<AlphaSpec>,
    #[serde(default)]
    pub separation: Option<SeparationConfig>,
    #[serde(default)]
    pub hankel: Option<HankelConfig>,
    #[serde(default)]
    pub two_discontinuities: Option<TwoDiscConfig>,
    #[serde(default)]
    pub noncompact: Option<NoncompactConfig>,
    #[serde(default)]
    pub bound_ratio: Option<BoundRatioConfig>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn v(field: &str, message: impl Into<String>) -> Violation {
    Violation { field: field.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn t(&self) -> f64 {
        self.t.unwrap_or(0.0)
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alpha.as_ref().map(AlphaSpec::values).unwrap_or_default()
    }

    pub fn fixture(&self) -> Result<Option<Fixture>> {
        self.fixture.as_ref().map(FixtureConfig::build).transpose()
    }

    /// Spatial dimension from the fixture, the domain, or `d`.
    pub fn dim(&self) -> usize {
        if let Ok(Some(f)) = self.fixture() {
            return f.dim();
        }
        if let Some(h) = &self.hankel {
            return h.domain.dim();
        }
        if let Some(t) = &self.two_discontinuities {
            return t.lambda.dim();
        }
        self.d.unwrap_or(1)
    }

    fn section_missing(&self, out: &mut Vec<Violation>) {
        let missing = match self.kind {
            ExperimentKind::SeparationDecay if self.separation.is_none() => Some("separation"),
            ExperimentKind::HankelOneVariable if self.hankel.is_none() => Some("hankel"),
            ExperimentKind::TwoDiscontinuities if self.two_discontinuities.is_none() => Some("two_discontinuities"),
            ExperimentKind::BoundRatio if self.bound_ratio.is_none() => Some("bound_ratio"),
            _ => None,
        };
        if let Some(s) = missing {
            out.push(v(s, format!("section is required for kind `{}`", self.kind.name())));
        }
    }

    /// Every violation found, each naming its field.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.q > 0.0 && self.q <= 1.0) {
            out.push(v("q", format!("{} is outside (0, 1]", self.q)));
        }
        if !(self.tail_cut >= 0.0 && self.tail_cut < 1.0) {
            out.push(v("tail_cut", "must lie in [0, 1)")); 
        }
        for (name, val) in [("t", self.t), ("s", self.s)] {
            if let Some(x) = val {
                if !(0.0..=1.0).contains(&x) {
                    out.push(v(name, format!("{x} is outside [0, 1]")));
                }
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                out.push(v("tolerance", "must be positive"));
            }
        }
        self.section_missing(&mut out);
        let fixture = match self.fixture() {
            Ok(f) => f,
            Err(e) => {
                out.push(v("fixture", e.to_string()));
                None
            }
        };
        let needs_fixture = !matches!(self.kind, ExperimentKind::TwoDiscontinuities | ExperimentKind::BoundRatio);
        if needs_fixture && self.fixture.is_none() {
            out.push(v("fixture", format!("is required for kind `{}`", self.kind.name())));
        }
        let d = self.dim();
        if let Err(e) = self.grid.grid(d) {
            out.push(v("grid", e.to_string()));
        }
        let alphas = self.alphas();
        let sweeps_alpha = !matches!(self.kind, ExperimentKind::SeparationDecay | ExperimentKind::BoundRatio);
        if sweeps_alpha {
            if alphas.len() < 4 {
                out.push(v("alpha", format!("slope fits need at least 4 values, got {}", alphas.len())));
            }
            if alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                out.push(v("alpha", "values must be positive and finite"));
            }
        }
        let a_max = alphas.iter().cloned().fold(0.0, f64::max);
        if let Some(f) = &fixture {
            let xi_max = fixture_xi_max(f);
            if sweeps_alpha && xi_max.is_finite() && a_max > 0.0 {
                nyquist(&mut out, "grid.n", a_max, xi_max, &self.grid);
            }
        }
        if matches!(
            self.kind,
            ExperimentKind::SmoothScaling | ExperimentKind::QuantizationDifference | ExperimentKind::HankelOneVariable
        ) {
            if let Some(f) = &fixture {
                match &f.as_amplitude().support {
                    None => out.push(v("fixture", "needs a compactly supported symbol")),
                    Some(s) => {
                        // the box holds B(u, l) with a margin of l
                        let reach = s.w.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + 2.0 * s.w.radius;
                        if reach > self.grid.half_width * (1.0 + 1e-12) {
                            out.push(v(
                                "grid.half_width",
                                format!("{} does not contain the w-support ball with a margin of l (needs {reach})", self.grid.half_width),
                            ));
                        }
                    }
                }
            }
        }
        match self.kind {
            ExperimentKind::SmoothScaling | ExperimentKind::QuantizationDifference => {}
            ExperimentKind::SeparationDecay => self.check_separation(&mut out, fixture.as_ref()),
            ExperimentKind::HankelOneVariable => self.check_hankel(&mut out, d),
            ExperimentKind::TwoDiscontinuities => self.check_two_disc(&mut out, d, a_max, fixture.as_ref()),
            ExperimentKind::NoncompactSymbol => {
                if let Some(f) = &fixture {
                    match f.as_amplitude().decay {
                        None => out.push(v("fixture", "needs a symbol with a decay bound (poly_decay)")),
                        Some(dec) => {
                            let thr = d as f64 / self.q;
                            if !(dec.gamma_w > thr) {
                                out.push(v("fixture.params.gamma_w", format!("{} must exceed d/q = {thr}", dec.gamma_w)));
                            }
                            if !(dec.gamma_xi > thr) {
                                out.push(v("fixture.params.gamma_xi", format!("{} must exceed d/q = {thr}", dec.gamma_xi)));
                            }
                        }
                    }
                }
            }
            ExperimentKind::BoundRatio => {
                if let Some(b) = &self.bound_ratio {
                    if b.family_size < 2 {
                        out.push(v("bound_ratio.family_size", "needs at least 2 fixtures"));
                    }
                    if b.max_terms == 0 {
                        out.push(v("bound_ratio.max_terms", "must be positive"));
                    }
                    if b.cube_points == 0 || !(b.truncation_radius >= 1.0) || !(b.q_points_per_unit > 0.0) {
                        out.push(v("bound_ratio", "cube_points, truncation_radius >= 1 and q_points_per_unit must be positive"));
                    }
                    if !(b.max_growth > 1.0) {
                        out.push(v("bound_ratio.max_growth", "must exceed 1"));
                    }
                }
                if d != 1 {
                    out.push(v("d", "bound-ratio families are one-dimensional"));
                }
            }
        }
        out
    }

    fn check_separation(&self, out: &mut Vec<Violation>, fixture: Option<&Fixture>) {
        let Some(s) = &self.separation else { return };
        if s.r.len() < 4 {
            out.push(v("separation.r", format!("slope fits need at least 4 values, got {}", s.r.len())));
        }
        if let Some(bad) = s.r.iter().find(|r| !(**r >= 1.0)) {
            out.push(v("separation.r", format!("{bad} is below the admissible threshold r >= 1")));
        }
        if !(s.alpha > 0.0) {
            out.push(v("separation.alpha", "must be positive"));
        }
        let d = self.dim();
        let n = (d as f64 / self.q + 1e-12).floor() as usize + 1;
        if s.m < n {
            out.push(v("separation.m", format!("must be at least n = {n}")));
        }
        let r_max = s.r.iter().cloned().fold(0.0, f64::max);
        let reach = r_max / 2.0
            + match s.weights {
                Weights::HalfLines => 1.0,
                Weights::Intervals { width } => width,
            };
        if reach > self.grid.half_width {
            out.push(v("separation.r", format!("weights at r = {r_max} reach {reach}, outside the box half-width {}", self.grid.half_width)));
        }
        if let Weights::Intervals { width } = s.weights {
            if !(width > 0.0) {
                out.push(v("separation.weights.width", "must be positive"));
            }
        }
        if s.variant == SeparationVariant::XiOnly && d != 1 {
            out.push(v("separation.variant", "the xi-only variant is one-dimensional"));
        }
        if let Some(f) = fixture {
            nyquist(out, "grid.n", s.alpha, fixture_xi_max(f), &self.grid);
        }
    }

    fn check_hankel(&self, out: &mut Vec<Violation>, d: usize) {
        let Some(h) = &self.hankel else { return };
        if let Err(e) = h.domain.validate() {
            out.push(v("hankel.domain", e.to_string()));
        }
        if h.domain.dim() != d {
            out.push(v("hankel.domain", format!("has dimension {}, fixture has {d}", h.domain.dim())));
        }
        let t = self.t();
        if t != 0.0 && t != 1.0 && !h.exploratory {
            out.push(v("t", format!("{t} is not 0 or 1; set hankel.exploratory = true to run outside the proven range")));
        }
        if h.variant == HankelVariant::ProjectionSandwich {
            match &h.omega {
                None => out.push(v("hankel.omega", "required for the projection_sandwich variant")),
                Some(o) => match o.build() {
                    Err(e) => out.push(v("hankel.omega", e.to_string())),
                    Ok(m) => {
                        if m.dim() != d {
                            out.push(v("hankel.omega", "dimension does not match"));
                        }
                        let a_max = self.alphas().into_iter().fold(0.0, f64::max);
                        nyquist(out, "grid.n", a_max, m.xi_max(), &self.grid);
                    }
                },
            }
        }
    }

    fn check_two_disc(&self, out: &mut Vec<Violation>, d: usize, a_max: f64, fixture: Option<&Fixture>) {
        let Some(c) = &self.two_discontinuities else { return };
        if let Some(a) = self.alphas().iter().find(|a| **a < 2.0) {
            out.push(v("alpha", format!("{a} is below the admissible range alpha >= 2")));
        }
        if let Err(e) = c.lambda.validate() {
            out.push(v("two_discontinuities.lambda", e.to_string()));
        }
        if c.lambda.dim() != d {
            out.push(v("two_discontinuities.lambda", "dimension does not match"));
        }
        if c.boxes.len() < 2 {
            out.push(v("two_discontinuities.boxes", "needs at least two box sizes"));
        }
        if fixture.is_some() {
            let t = self.t();
            if t != 0.0 && t != 1.0 && !c.exploratory {
                out.push(v("t", format!("{t} is not 0 or 1; set two_discontinuities.exploratory = true to run outside the proven range")));
            }
        }
        match c.omega.build() {
            Err(e) => out.push(v("two_discontinuities.omega", e.to_string())),
            Ok(m) => {
                if m.dim() != d {
                    out.push(v("two_discontinuities.omega", "dimension does not match"));
                }
                let mut xi_max = m.xi_max();
                if let Some(f) = fixture {
                    xi_max = xi_max.max(fixture_xi_max(f));
                }
                for (i, b) in c.boxes.iter().enumerate() {
                    if let Err(e) = b.grid(d) {
                        out.push(v(&format!("two_discontinuities.boxes[{i}]"), e.to_string()));
                    }
                    nyquist(out, &format!("two_discontinuities.boxes[{i}].n"), a_max, xi_max, b);
                }
            }
        }
        if !(c.max_variation > 0.0) || !(c.box_consistency > 0.0) {
            out.push(v("two_discontinuities", "max_variation and box_consistency must be positive"));
        }
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            return Ok(());
        }
        let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        Err(Error::Config(lines.join("; ")))
    }
}

/// Largest `|xi_i|` reached by the fixture's `xi`-support.
pub fn fixture_xi_max(f: &Fixture) -> f64 {
    let amp = f.as_amplitude();
    match &amp.support {
        Some(s) => s.xi.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + s.xi.radius,
        None => f64::INFINITY,
    }
}

/// `alpha xi_max h < pi` with the required number of points in the message.
fn nyquist(out: &mut Vec<Violation>, field: &str, alpha: f64, xi_max: f64, g: &GridConfig) {
    if !(g.n > 0) || !(g.half_width > 0.0) || !xi_max.is_finite() {
        return;
    }
    let h = 2.0 * g.half_width / g.n as f64;
    if alpha * xi_max * h >= PI {
        let required = (alpha * xi_max * 2.0 * g.half_width / PI).floor() as usize + 1;
        out.push(v(
            field,
            format!("alpha = {alpha} with |xi| <= {xi_max} needs at least {required} points per axis on half-width {}, got {}", g.half_width, g.n),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "smooth_scaling"
q = 1.0
alpha = [4, 8, 16, 32, 64]
[fixture]
family = "gaussian_bump"
[grid]
half_width = 2.0
n = 256
"#;

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert!(c.violations().is_empty(), "{:?}", c.violations());
        assert_eq!(c.alphas(), vec![4.0, 8.0, 16.0, 32.0, 64.0]);
        assert_eq!(c.stem(), "smooth_scaling");
    }

    #[test]
    fn q_out_of_range_names_field() {
        let c = ExperimentConfig::from_toml(&MINIMAL.replace("q = 1.0", "q = 1.5")).unwrap();
        let errs = c.violations();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "q");
    }

    #[test]
    fn nyquist_violation_reports_required_points() {
        // alpha xi_max h = 64 * 1 * 4/64 = 4 > pi; need floor(64*4/pi) + 1 = 82
        let c = ExperimentConfig::from_toml(&MINIMAL.replace("n = 256", "n = 64")).unwrap();
        let errs = c.violations();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "grid.n");
        assert!(errs[0].message.contains("82"), "{}", errs[0].message);
    }

    #[test]
    fn unknown_fixture_is_reported() {
        let c = ExperimentConfig::from_toml(&MINIMAL.replace("gaussian_bump", "nope")).unwrap();
        assert_eq!(c.violations()[0].field, "fixture");
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}\nbogus = 1")).is_err());
    }

    #[test]
    fn geometric_alpha() {
        let c = ExperimentConfig::from_toml(&MINIMAL.replace("alpha = [4, 8, 16, 32, 64]", "alpha = { start = 2.0 }")).unwrap();
        assert_eq!(c.alphas(), vec![2.0, 4.0, 8.0, 16.0, 32.0]);
    }
}
