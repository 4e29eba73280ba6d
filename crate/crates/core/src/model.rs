//! Scenario parameters, validation, unit conventions, and the figure presets.
//!
//! Every rate and frequency is measured in units of γ₁. The reference rate is
//! nevertheless stored explicitly (default 1.0) so that tests can scale a
//! whole scenario and check that observables transform accordingly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_PI_4: f64 = PI / 4.0;

/// Physical parameters of one scenario.
///
/// The atom starts in sin θ |1⟩ + cos θ |2⟩ (the preparation-pulse phase is
/// fixed to zero, so only the relative phase δφ of the microwave drive
/// survives) and is driven by a square microwave pulse of Rabi frequency Ω
/// switched on at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    /// Decay rate of |1⟩; the reference unit (> 0).
    pub gamma1: f64,
    /// Decay rate of |2⟩ (≥ 0).
    pub gamma2: f64,
    /// Rabi frequency Ω of the microwave drive (≥ 0).
    pub omega: f64,
    /// Drive detuning Δ = ω_c − ω₂₁.
    pub delta: f64,
    /// Excited-doublet splitting ω₂₁ (≥ 0).
    pub omega21: f64,
    /// Dipole alignment p = μ̂₂₀·μ̂₀₁ ∈ [0, 1]; 0 = orthogonal, 1 = parallel.
    pub p: f64,
    /// Preparation mixing angle θ ∈ [0, π/2] (radians).
    pub theta: f64,
    /// Relative phase δφ = φ_c − φ_p (radians).
    pub dphi: f64,
}

impl AtomConfig {
    /// Check every invariant, returning the config unchanged when all hold.
    pub fn validate(self) -> Result<Self> {
        fn finite(field: &'static str, v: f64) -> Result<f64> {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidConfig {
                    field,
                    reason: format!("non-finite value {v}"),
                })
            }
        }
        finite("gamma1", self.gamma1)?;
        finite("gamma2", self.gamma2)?;
        finite("omega", self.omega)?;
        finite("delta", self.delta)?;
        finite("omega21", self.omega21)?;
        finite("p", self.p)?;
        finite("theta", self.theta)?;
        finite("dphi", self.dphi)?;
        if self.gamma1 <= 0.0 {
            return Err(Error::InvalidConfig {
                field: "gamma1",
                reason: "reference rate must be positive".into(),
            });
        }
        if self.gamma2 < 0.0 {
            return Err(Error::InvalidConfig {
                field: "gamma2",
                reason: "decay rate must be non-negative".into(),
            });
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidConfig {
                field: "omega",
                reason: "Rabi frequency must be non-negative".into(),
            });
        }
        if self.omega21 < 0.0 {
            return Err(Error::InvalidConfig {
                field: "omega21",
                reason: "doublet splitting must be non-negative".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig {
                field: "p",
                reason: "alignment out of range [0, 1]".into(),
            });
        }
        if !(0.0..=PI / 2.0).contains(&self.theta) {
            return Err(Error::InvalidConfig {
                field: "theta",
                reason: "mixing angle out of range [0, pi/2]".into(),
            });
        }
        Ok(self)
    }

    /// Initial amplitudes (b₁(0), b₂(0)) = (sin θ, cos θ).
    pub fn initial_amplitudes(&self) -> (f64, f64) {
        (self.theta.sin(), self.theta.cos())
    }

    /// JSON object with the eight fields in canonical key order
    /// (declaration order: gamma1, gamma2, omega, delta, omega21, p, theta, dphi).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("AtomConfig serializes")
    }
}

/// Uniform grid of emission detunings δ_k, measured from the doublet midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeGrid {
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
}

impl ModeGrid {
    pub fn new(delta_min: f64, delta_max: f64, n_points: usize) -> Result<Self> {
        if !delta_min.is_finite() || !delta_max.is_finite() {
            return Err(Error::InvalidGrid("non-finite bound".into()));
        }
        if delta_min >= delta_max {
            return Err(Error::InvalidGrid(format!(
                "delta_min {delta_min} must be below delta_max {delta_max}"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            delta_min,
            delta_max,
            n_points,
        })
    }

    /// Uniform step between consecutive points.
    pub fn spacing(&self) -> f64 {
        (self.delta_max - self.delta_min) / (self.n_points - 1) as f64
    }

    /// The strictly increasing, evenly spaced points.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points)
            .map(|i| self.delta_min + h * i as f64)
            .collect()
    }

    /// Largest |δ| on the grid.
    pub fn max_abs(&self) -> f64 {
        self.delta_min.abs().max(self.delta_max.abs())
    }
}

/// Named scenario reproducing one figure panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPreset {
    pub name: String,
    pub config: AtomConfig,
    pub grid: ModeGrid,
    /// Alignment values the panel is evaluated at.
    pub p_variants: Vec<f64>,
}

/// All preset names, in figure order.
pub const PRESET_NAMES: [&str; 11] = [
    "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c", "fig5a", "fig5b", "fig5c", "fig5d",
    "fig5e",
];

/// Look up a figure panel by name.
///
/// fig3: γ₂ = 0, θ = π/4, Ω = 0.15γ₁, Δ = 0, ω₂₁ = γ₁, δφ ∈ {0, 0.5π, π}.
/// fig4: as fig3a but γ₂ ∈ {0.075, 0.15, 0.3}γ₁, compared at p ∈ {0, 1}.
/// fig5: γ₂ = γ₁, Ω = 5γ₁, Δ = 0, ω₂₁ = 3γ₁, δφ ∈ {0, 0.25π, 0.5π, 0.75π, π},
/// compared at p ∈ {0, 1}.
pub fn preset(name: &str) -> Result<ScenarioPreset> {
    let fig3 = |dphi: f64| AtomConfig {
        gamma1: 1.0,
        gamma2: 0.0,
        omega: 0.15,
        delta: 0.0,
        omega21: 1.0,
        p: 0.0,
        theta: FRAC_PI_4,
        dphi,
    };
    let fig4 = |gamma2: f64| AtomConfig {
        gamma2,
        ..fig3(0.0)
    };
    let fig5 = |dphi: f64| AtomConfig {
        gamma1: 1.0,
        gamma2: 1.0,
        omega: 5.0,
        delta: 0.0,
        omega21: 3.0,
        p: 0.0,
        theta: FRAC_PI_4,
        dphi,
    };
    // Narrow-structure panels get the +/-4 window, the strong-field panels
    // +/-12 so the sidebands at +/-(omega21/2 + Omega) = +/-6.5 fit.
    let narrow = ModeGrid::new(-4.0, 4.0, 2001)?;
    let wide = ModeGrid::new(-12.0, 12.0, 2001)?;
    let both = vec![0.0, 1.0];

    let (config, grid, p_variants) = match name {
        "fig3a" => (fig3(0.0), narrow, vec![0.0]),
        "fig3b" => (fig3(0.5 * PI), narrow, vec![0.0]),
        "fig3c" => (fig3(PI), narrow, vec![0.0]),
        "fig4a" => (fig4(0.075), narrow, both),
        "fig4b" => (fig4(0.15), narrow, both),
        "fig4c" => (fig4(0.3), narrow, both),
        "fig5a" => (fig5(0.0), wide, both),
        "fig5b" => (fig5(0.25 * PI), wide, both),
        "fig5c" => (fig5(0.5 * PI), wide, both),
        "fig5d" => (fig5(0.75 * PI), wide, both),
        "fig5e" => (fig5(PI), wide, both),
        other => return Err(Error::UnknownPreset(other.into())),
    };
    Ok(ScenarioPreset {
        name: name.into(),
        config: config.validate()?,
        grid,
        p_variants,
    })
}

/// Flat scenario document: the eight config fields plus optional grid fields.
/// Unknown keys are rejected on parse.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub gamma1: f64,
    pub gamma2: f64,
    pub omega: f64,
    pub delta: f64,
    pub omega21: f64,
    pub p: f64,
    pub theta: f64,
    pub dphi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
}

impl ScenarioDoc {
    pub fn from_parts(config: &AtomConfig, grid: &ModeGrid) -> Self {
        Self {
            gamma1: config.gamma1,
            gamma2: config.gamma2,
            omega: config.omega,
            delta: config.delta,
            omega21: config.omega21,
            p: config.p,
            theta: config.theta,
            dphi: config.dphi,
            delta_min: Some(grid.delta_min),
            delta_max: Some(grid.delta_max),
            n_points: Some(grid.n_points),
        }
    }

    /// Split into a validated config and grid; missing grid keys fall back to
    /// the narrow preset window [-4, 4] x 2001.
    pub fn into_parts(self) -> Result<(AtomConfig, ModeGrid)> {
        let config = AtomConfig {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            omega: self.omega,
            delta: self.delta,
            omega21: self.omega21,
            p: self.p,
            theta: self.theta,
            dphi: self.dphi,
        }
        .validate()?;
        let grid = ModeGrid::new(
            self.delta_min.unwrap_or(-4.0),
            self.delta_max.unwrap_or(4.0),
            self.n_points.unwrap_or(2001),
        )?;
        Ok((config, grid))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig {
            field: "document",
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ScenarioDoc serializes")
    }
}
