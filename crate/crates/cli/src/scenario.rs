//! Flag / preset / config-file resolution into a validated scenario.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::Args;
use vatom::model::{preset, ScenarioDoc};
use vatom::numeric::{ModeQuality, Quality};
use vatom::{AtomConfig, ModeGrid};

use crate::{CliError, CliResult};

/// Scenario selection shared by every subcommand. Precedence: neutral base
/// (or preset / config file), then individual field overrides.
#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Figure-panel preset (fig3a..fig3c, fig4a..fig4c, fig5a..fig5e).
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON scenario file (the eight config fields plus optional grid keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Decay rate of |2> in units of gamma1.
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Rabi frequency of the microwave drive.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Drive detuning.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Excited-doublet splitting.
    #[arg(long)]
    pub omega21: Option<f64>,
    /// Dipole alignment in [0, 1].
    #[arg(long)]
    pub p: Option<f64>,
    /// Preparation mixing angle (radians).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Relative drive phase (radians).
    #[arg(long)]
    pub dphi: Option<f64>,
    /// Lower edge of the emission-detuning grid.
    #[arg(long = "grid-min")]
    pub grid_min: Option<f64>,
    /// Upper edge of the emission-detuning grid.
    #[arg(long = "grid-max")]
    pub grid_max: Option<f64>,
    /// Number of grid points.
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Integrator tolerance (sets both rtol and atol).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Propagation stops below this excited-state norm.
    #[arg(long = "stop-threshold")]
    pub stop_threshold: Option<f64>,
    /// Bath modes per channel for the pre-Markov oracle.
    #[arg(long = "modes-n")]
    pub modes_n: Option<usize>,
    /// Oracle span as a multiple of the display grid extent.
    #[arg(long = "modes-span")]
    pub modes_span: Option<f64>,
    /// Oracle horizon as a multiple of the slowest decay time.
    #[arg(long = "modes-horizon")]
    pub modes_horizon: Option<f64>,
}

pub struct Scenario {
    pub config: AtomConfig,
    pub grid: ModeGrid,
    pub quality: Quality,
    /// Panel p-variants when a preset was selected.
    pub p_variants: Vec<f64>,
    pub label: String,
}

impl ScenarioArgs {
    pub fn resolve(&self) -> CliResult<Scenario> {
        if self.preset.is_some() && self.config.is_some() {
            return Err(CliError::Usage(
                "--preset and --config are mutually exclusive".into(),
            ));
        }
        let (mut config, mut grid, p_variants, label) = if let Some(name) = &self.preset {
            let p = preset(name)?;
            (p.config, p.grid, p.p_variants, p.name)
        } else if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let (config, grid) = ScenarioDoc::from_json(&text)?.into_parts()?;
            (
                config,
                grid,
                vec![config.p],
                path.display().to_string(),
            )
        } else {
            let config = AtomConfig {
                gamma1: 1.0,
                gamma2: 0.0,
                omega: 0.0,
                delta: 0.0,
                omega21: 1.0,
                p: 0.0,
                theta: FRAC_PI_2,
                dphi: 0.0,
            };
            let grid = ModeGrid::new(-4.0, 4.0, 2001)?;
            (config, grid, vec![0.0], "custom".to_string())
        };

        if let Some(v) = self.gamma2 {
            config.gamma2 = v;
        }
        if let Some(v) = self.omega {
            config.omega = v;
        }
        if let Some(v) = self.delta {
            config.delta = v;
        }
        if let Some(v) = self.omega21 {
            config.omega21 = v;
        }
        if let Some(v) = self.p {
            config.p = v;
        }
        if let Some(v) = self.theta {
            config.theta = v;
        }
        if let Some(v) = self.dphi {
            config.dphi = v;
        }
        let config = config.validate()?;

        let lo = self.grid_min.unwrap_or(grid.delta_min);
        let hi = self.grid_max.unwrap_or(grid.delta_max);
        let n = self.grid_points.unwrap_or(grid.n_points);
        grid = ModeGrid::new(lo, hi, n)?;

        let mut quality = Quality::default();
        if let Some(tol) = self.tol {
            quality.rtol = tol;
            quality.atol = tol;
        }
        if let Some(s) = self.stop_threshold {
            quality.stop_threshold = s;
        }
        let mut modes = ModeQuality::default();
        if let Some(n) = self.modes_n {
            modes.n_modes = n;
        }
        if let Some(f) = self.modes_span {
            modes.span_factor = f;
        }
        if let Some(f) = self.modes_horizon {
            modes.horizon_factor = f;
        }
        quality.modes = modes;

        Ok(Scenario {
            config,
            grid,
            quality,
            p_variants,
            label,
        })
    }
}
