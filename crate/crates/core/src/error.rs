//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario field violates its domain; names the offending field.
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("unknown preset `{0}` (expected fig3a..fig3c, fig4a..fig4c, fig5a..fig5e)")]
    UnknownPreset(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The closed-form solution is out of its domain; callers should fall
    /// back to the numeric propagator.
    #[error("degenerate eigenvalues: |lambda1 - lambda2| = {separation:.3e} below {threshold:.3e}; use the numeric propagator")]
    DegenerateEigenvalues { separation: f64, threshold: f64 },

    /// Requested an operation outside the regime it is defined for.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("Nyquist violation: sample spacing {dt:.3e} too coarse for max transform frequency {max_freq:.3e}")]
    NyquistViolation { dt: f64, max_freq: f64 },

    #[error("grid too narrow: fraction {outside:.3} of the spectral mass lies outside the grid (tolerance {tolerance})")]
    GridTooNarrow { outside: f64, tolerance: f64 },

    #[error("integration did not converge: residual norm {residual:.3e} at the time cap {t_cap}")]
    NoConvergence { residual: f64, t_cap: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("window [{lo}, {hi}] lies outside the grid [{grid_lo}, {grid_hi}]")]
    WindowOutsideGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("insufficient horizon: excited residual {residual:.3e} above tolerance {tolerance:.3e}")]
    InsufficientHorizon { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
