use crate::error::{CkfError, Result};
use crate::probit::Partition;

/// Whether a geometric-Brownian drift process is kept per entity or shared by
/// a whole side of the dyad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftScope {
    Shared,
    PerEntity,
}

/// How latent-vector covariances grow between observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftMode {
    /// No drift: a purely online Bayesian filter whose posteriors contract.
    None,
    /// Constant per-unit-time drift rate, one value per side.
    Fixed { alpha_row: f64, alpha_col: f64 },
    /// Learned geometric Brownian motion drift, e^{a(t)}.
    Gbm {
        row_scope: DriftScope,
        col_scope: DriftScope,
    },
}

/// Model-level configuration shared by the engine, harness and CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Latent dimension d.
    pub latent_dim: usize,
    /// Observation noise standard deviation.
    pub obs_sigma: f64,
    pub drift_mode: DriftMode,
    /// Brownian variance rate of the log-drift, row side.
    pub c_row: f64,
    /// Brownian variance rate of the log-drift, column side.
    pub c_col: f64,
    /// Ordinal class partition; `None` means observations are real-valued.
    pub partition: Option<Partition>,
    /// Coordinate-ascent sweeps per event.
    pub iters: usize,
    pub seed: u64,
    /// Standard deviation of the randomly initialized prior means.
    pub init_scale: f64,
    /// Initial value of each log-drift process a(0).
    pub init_log_drift: f64,
}

impl ModelConfig {
    pub fn new(latent_dim: usize, obs_sigma: f64) -> Self {
        ModelConfig {
            latent_dim,
            obs_sigma,
            drift_mode: DriftMode::None,
            c_row: 0.0,
            c_col: 0.0,
            partition: None,
            iters: 5,
            seed: 0,
            init_scale: 1.0,
            init_log_drift: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(CkfError::Config("latent_dim must be >= 1".into()));
        }
        if !(self.obs_sigma > 0.0) {
            return Err(CkfError::Config("obs_sigma must be > 0".into()));
        }
        if self.iters == 0 {
            return Err(CkfError::Config("iters must be >= 1".into()));
        }
        if self.c_row < 0.0 || self.c_col < 0.0 {
            return Err(CkfError::Config("drift variance rates must be >= 0".into()));
        }
        if !(self.init_scale >= 0.0) {
            return Err(CkfError::Config("init_scale must be >= 0".into()));
        }
        if let DriftMode::Fixed {
            alpha_row,
            alpha_col,
        } = self.drift_mode
        {
            if alpha_row < 0.0 || alpha_col < 0.0 {
                return Err(CkfError::Config("fixed drift rates must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// True when observations are ordinal classes rather than raw reals.
    pub fn is_ordinal(&self) -> bool {
        self.partition.is_some()
    }
}
