//! Parameter sweeps that compare measured quasi-norms with the predicted laws.

pub mod bound_ratio;
pub mod common;
pub mod config;
pub mod discontinuity;
pub mod fit;
pub mod report;
pub mod scaling;
pub mod separation;

pub use config::{ExperimentConfig, ExperimentKind, Violation};
pub use fit::{fit_loglog_slope, SlopeFit};
pub use report::{Criterion, Row, ScalingReport, Scope, Verdict};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads for the sweep; the available parallelism when `None`.
    pub workers: Option<usize>,
    /// Overrides the config seed.
    pub seed: Option<u64>,
}

/// Seed precedence: explicit option, then config, then 0.
pub fn effective_seed(cfg: &ExperimentConfig, opts: &RunOptions) -> u64 {
    opts.seed.or(cfg.seed).unwrap_or(0)
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ScalingReport> {
    cfg.validate()?;
    // dense kernels run sequentially inside each sweep point so that results do
    // not depend on the worker count
    faer::set_global_parallelism(faer::Par::Seq);
    let seed = effective_seed(cfg, &opts);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        if w == 0 {
            return Err(Error::Config("workers: must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    log::info!("running {} ({}) with seed {seed}", cfg.stem(), cfg.kind.name());
    pool.install(|| match cfg.kind {
        ExperimentKind::SmoothScaling => scaling::run_smooth_scaling(cfg, seed),
        ExperimentKind::QuantizationDifference => scaling::run_quantization_difference(cfg, seed),
        ExperimentKind::NoncompactSymbol => scaling::run_noncompact_symbol(cfg, seed),
        ExperimentKind::SeparationDecay => separation::run_separation_decay(cfg, seed),
        ExperimentKind::HankelOneVariable => discontinuity::run_hankel_one_variable(cfg, seed),
        ExperimentKind::TwoDiscontinuities => discontinuity::run_two_discontinuities(cfg, seed),
        ExperimentKind::BoundRatio => bound_ratio::run_bound_ratio(cfg, seed),
    })
}
