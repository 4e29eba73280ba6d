//! Feature extraction from spectra: peaks, minima, sum-rule evaluation, and
//! phase scans.
//!
//! Positions and extremal values are refined by three-point parabolic
//! interpolation around the winning sample, so a zero that falls between two
//! grid points is still recovered (the spectrum is locally |linear|^2 there,
//! i.e. exactly parabolic to fourth order).

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, Spectrum, TailMethod};
use crate::error::{Error, Result};
use crate::model::{AtomConfig, ModeGrid};
use crate::numeric::{self, Quality};

/// Largest fraction of the spectral mass allowed outside the grid before
/// sum-rule evaluation refuses the window.
pub const NARROW_GRID_TOLERANCE: f64 = 0.1;

/// One local maximum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    /// Half-width at half maximum by linear interpolation of the crossings;
    /// absent when a crossing leaves the grid.
    pub half_width: Option<f64>,
}

/// One local minimum between peaks (or between a peak and a grid boundary).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Minimum {
    pub position: f64,
    pub depth: f64,
    /// Depth relative to the global maximum.
    pub depth_ratio: f64,
}

/// Peaks, minima, and the window integral of one spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralFeatures {
    pub peaks: Vec<Peak>,
    pub minima: Vec<Minimum>,
    pub integral: f64,
    pub peak_count: usize,
}

/// Parabolic refinement through (x1 - h, y0), (x1, y1), (x1 + h, y2);
/// returns the vertex, clamped to the sampled neighborhood.
fn refine_vertex(x1: f64, h: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < 1e-300 {
        return (x1, y1);
    }
    let shift = 0.5 * (y0 - y2) / denom;
    let shift = shift.clamp(-1.0, 1.0);
    let value = y1 - 0.25 * (y0 - y2) * shift;
    (x1 + shift * h, value)
}

/// Amplitude-level refinement for near-zero minima. Near a spectral zero the
/// amplitude sqrt(S) is locally |linear|, so the two sampled flanks are fit
/// by straight lines whose intersection estimates the true minimum far more
/// accurately than a parabola in S when the zero falls between samples.
fn refine_zero_touch(points: &[f64], values: &[f64], imin: usize) -> Option<(f64, f64)> {
    if imin < 1 || imin + 1 >= values.len() {
        return None;
    }
    let (l0, l1, r0, r1) = if values[imin + 1] <= values[imin - 1] {
        if imin + 2 >= values.len() || imin < 1 {
            return None;
        }
        (imin - 1, imin, imin + 1, imin + 2)
    } else {
        if imin < 2 {
            return None;
        }
        (imin - 2, imin - 1, imin, imin + 1)
    };
    let u = |i: usize| values[i].max(0.0).sqrt();
    let sl = (u(l1) - u(l0)) / (points[l1] - points[l0]);
    let sr = (u(r1) - u(r0)) / (points[r1] - points[r0]);
    if !(sl < 0.0 && sr > 0.0) {
        return None;
    }
    let x_star = (u(r0) - u(l1) + sl * points[l1] - sr * points[r0]) / (sl - sr);
    let slack = points[r0] - points[l1];
    if x_star < points[l1] - slack || x_star > points[r0] + slack {
        return None;
    }
    let height = (u(l1) + sl * (x_star - points[l1])).max(0.0);
    Some((x_star, height * height))
}

/// Parabolic minimum refinement, switching to the amplitude-level fit when
/// the result indicates a near-zero touch.
fn refine_minimum(
    points: &[f64],
    values: &[f64],
    h: f64,
    imin: usize,
    refined_max: f64,
) -> (f64, f64) {
    let (mut position, mut depth) =
        refine_vertex(points[imin], h, values[imin - 1], values[imin], values[imin + 1]);
    depth = depth.max(0.0);
    if depth < 1e-3 * refined_max {
        if let Some((xz, dz)) = refine_zero_touch(points, values, imin) {
            if dz < depth {
                position = xz;
                depth = dz;
            }
        }
    }
    (position, depth)
}

fn refined_global_max(points: &[f64], values: &[f64], h: f64) -> f64 {
    let imax = (0..values.len())
        .max_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap();
    if imax == 0 || imax == values.len() - 1 {
        values[imax]
    } else {
        refine_vertex(
            points[imax],
            h,
            values[imax - 1],
            values[imax],
            values[imax + 1],
        )
        .1
    }
}

fn half_width_at_half_max(points: &[f64], values: &[f64], ipk: usize, height: f64) -> Option<f64> {
    let half = height / 2.0;
    let crossing = |mut i: usize, step: isize| -> Option<f64> {
        loop {
            let j = i as isize + step;
            if j < 0 || j as usize >= values.len() {
                return None;
            }
            let j = j as usize;
            if values[j] <= half {
                let frac = (values[i] - half) / (values[i] - values[j]);
                return Some(points[i] + frac * (points[j] - points[i]));
            }
            // A rising flank means we walked into the next feature.
            if values[j] > values[i] {
                return None;
            }
            i = j;
        }
    };
    let left = crossing(ipk, -1)?;
    let right = crossing(ipk, 1)?;
    Some(0.5 * (right - left))
}

/// Local maxima above `prominence_threshold` x global max, with parabolic
/// position refinement, plus the minima between them.
pub fn extract_features(spectrum: &Spectrum, prominence_threshold: f64) -> Result<SpectralFeatures> {
    extract_features_arrays(
        &spectrum.grid.points(),
        &spectrum.s_total,
        spectrum.grid.spacing(),
        prominence_threshold,
    )
}

/// Array-level feature extraction; `points` must be uniform with spacing `h`.
pub fn extract_features_arrays(
    points: &[f64],
    values: &[f64],
    h: f64,
    prominence_threshold: f64,
) -> Result<SpectralFeatures> {
    if points.len() != values.len() || points.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "feature extraction needs >= 3 uniform samples, got {}",
            points.len()
        )));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidGrid("non-positive spacing".into()));
    }
    let integral = analytic::trapezoid_uniform(values, h);
    let global_max = values.iter().cloned().fold(0.0, f64::max);
    if global_max <= 0.0 {
        return Ok(SpectralFeatures {
            peaks: Vec::new(),
            minima: Vec::new(),
            integral,
            peak_count: 0,
        });
    }
    let refined_max = refined_global_max(points, values, h);
    let floor = prominence_threshold * global_max;

    let mut peaks = Vec::new();
    let mut peak_indices = Vec::new();
    for i in 1..values.len() - 1 {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] >= floor {
            let (position, height) =
                refine_vertex(points[i], h, values[i - 1], values[i], values[i + 1]);
            peaks.push(Peak {
                position,
                height,
                half_width: half_width_at_half_max(points, values, i, values[i]),
            });
            peak_indices.push(i);
        }
    }

    // Minima: the deepest interior sample between consecutive accepted peaks
    // and between the boundaries and the outermost peaks.
    let mut minima = Vec::new();
    let mut segment_bounds = Vec::new();
    if let (Some(&first), Some(&last)) = (peak_indices.first(), peak_indices.last()) {
        segment_bounds.push((0, first));
        for w in peak_indices.windows(2) {
            segment_bounds.push((w[0], w[1]));
        }
        segment_bounds.push((last, values.len() - 1));
    }
    for (lo, hi) in segment_bounds {
        if hi - lo < 2 {
            continue;
        }
        let imin = (lo + 1..hi)
            .min_by(|&i, &j| values[i].total_cmp(&values[j]))
            .unwrap();
        // Interior local minimum only; a monotone segment has its smallest
        // value at the segment edge.
        if values[imin] > values[lo] || values[imin] > values[hi] {
            continue;
        }
        let (position, depth) = refine_minimum(points, values, h, imin, refined_max);
        minima.push(Minimum {
            position,
            depth,
            depth_ratio: depth / refined_max,
        });
    }

    let peak_count = peaks.len();
    Ok(SpectralFeatures {
        peaks,
        minima,
        integral,
        peak_count,
    })
}

/// Global minimum of s_total within `window`, with parabolic refinement;
/// depth is reported relative to the spectrum's global maximum.
pub fn deepest_minimum(spectrum: &Spectrum, window: (f64, f64)) -> Result<Minimum> {
    let (lo, hi) = window;
    let grid = &spectrum.grid;
    if lo < grid.delta_min || hi > grid.delta_max || lo >= hi {
        return Err(Error::WindowOutsideGrid {
            lo,
            hi,
            grid_lo: grid.delta_min,
            grid_hi: grid.delta_max,
        });
    }
    let points = grid.points();
    let h = grid.spacing();
    let values = &spectrum.s_total;
    let in_window: Vec<usize> = (0..points.len())
        .filter(|&i| points[i] >= lo && points[i] <= hi)
        .collect();
    let &imin = in_window
        .iter()
        .min_by(|&&i, &&j| values[i].total_cmp(&values[j]))
        .ok_or_else(|| Error::InvalidGrid("window contains no grid points".into()))?;
    let refined_max = refined_global_max(&points, values, h);
    let (position, depth) = if imin == 0 || imin == points.len() - 1 {
        (points[imin], values[imin].max(0.0))
    } else {
        refine_minimum(&points, values, h, imin, refined_max)
    };
    Ok(Minimum {
        position,
        depth,
        depth_ratio: if refined_max > 0.0 {
            depth / refined_max
        } else {
            0.0
        },
    })
}

/// Full-line sum-rule estimate: window trapezoid plus the spectrum's tail
/// correction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SumRule {
    /// Trapezoid integral over the stored grid.
    pub window_integral: f64,
    /// Estimated mass outside the grid.
    pub tail_correction: f64,
    /// window_integral + tail_correction; equals 1 for a fully decaying
    /// system, up to the residual bound.
    pub total: f64,
    /// Uncertainty of the tail estimate.
    pub residual_bound: f64,
}

/// Evaluate the sum rule. Errors with `GridTooNarrow` when more than
/// [`NARROW_GRID_TOLERANCE`] of the estimated mass lies outside the window
/// (the window no longer "captures the support"), or when the spectrum
/// carries no tail estimate at all.
pub fn sum_rule(spectrum: &Spectrum) -> Result<SumRule> {
    let window = spectrum.normalization;
    let outside = spectrum.tail.beyond_window.max(0.0);
    let total_mass = window + outside;
    let fraction = if total_mass > 0.0 {
        outside / total_mass
    } else {
        0.0
    };
    if spectrum.tail.method == TailMethod::None && total_mass > 0.0 {
        return Err(Error::Unsupported(
            "sum rule needs a tail estimate; this spectrum was built without one".into(),
        ));
    }
    if fraction > NARROW_GRID_TOLERANCE {
        return Err(Error::GridTooNarrow {
            outside: fraction,
            tolerance: NARROW_GRID_TOLERANCE,
        });
    }
    Ok(SumRule {
        window_integral: window,
        tail_correction: spectrum.tail.beyond_window,
        total: window + spectrum.tail.beyond_window,
        residual_bound: spectrum.tail.residual_bound,
    })
}

/// Features of the same base scenario across a set of drive phases.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseScan {
    pub phases: Vec<f64>,
    pub features: Vec<SpectralFeatures>,
    pub config: AtomConfig,
}

/// Compute the spectrum and its features for each phase in `phases`
/// (strictly increasing within [0, pi]). Orthogonal-dipole scenarios use the
/// closed form; p > 0 goes through the Fourier pipeline.
pub fn phase_scan(
    config: &AtomConfig,
    grid: &ModeGrid,
    phases: &[f64],
    quality: &Quality,
) -> Result<PhaseScan> {
    if phases.is_empty() {
        return Err(Error::InvalidGrid("empty phase list".into()));
    }
    for w in phases.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidGrid(
                "phases must be strictly increasing".into(),
            ));
        }
    }
    if phases[0] < 0.0 || *phases.last().unwrap() > std::f64::consts::PI {
        return Err(Error::InvalidGrid("phases must lie within [0, pi]".into()));
    }
    let features: Result<Vec<SpectralFeatures>> = phases
        .par_iter()
        .map(|&dphi| {
            let c = AtomConfig { dphi, ..*config };
            let spectrum = spectrum_auto(&c, grid, quality)?;
            extract_features(&spectrum, DEFAULT_PROMINENCE)
        })
        .collect();
    Ok(PhaseScan {
        phases: phases.to_vec(),
        features: features?,
        config: *config,
    })
}

/// Default peak prominence threshold (fraction of the global maximum).
pub const DEFAULT_PROMINENCE: f64 = 0.02;

/// Closed form when available (p = 0, non-degenerate), Fourier route
/// otherwise.
pub fn spectrum_auto(config: &AtomConfig, grid: &ModeGrid, quality: &Quality) -> Result<Spectrum> {
    if config.p == 0.0 {
        match analytic::spectrum_p0(config, grid) {
            Ok(s) => return Ok(s),
            Err(Error::DegenerateEigenvalues { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    numeric::spectrum(config, grid, quality)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{
        spectrum_p0, ChannelAmplitudes, SpectrumMethod, TailEstimate,
    };
    use crate::model::preset;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn synthetic_spectrum(grid: ModeGrid, values: Vec<f64>) -> Spectrum {
        let n = values.len();
        let normalization = analytic::trapezoid_uniform(&values, grid.spacing());
        Spectrum {
            grid,
            s_ch1: values.clone(),
            s_ch2: vec![0.0; n],
            s_cross: vec![0.0; n],
            s_total: values,
            channels: ChannelAmplitudes {
                a_of_delta: Vec::new(),
                b_of_delta: Vec::new(),
                truncation_bound: 0.0,
            },
            normalization,
            tail: TailEstimate {
                beyond_window: 0.0,
                residual_bound: 0.0,
                method: crate::analytic::TailMethod::ExactPoles,
            },
            method: SpectrumMethod::Analytic,
        }
    }

    fn lorentzian_sum(grid: &ModeGrid, comps: &[(f64, f64, f64)]) -> Vec<f64> {
        grid.points()
            .iter()
            .map(|&d| {
                comps
                    .iter()
                    .map(|&(center, width, amp)| amp * width * width / ((d - center).powi(2) + width * width))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn peaks_of_a_lorentzian_sum_sit_on_the_poles() {
        let grid = ModeGrid::new(-10.0, 10.0, 4001).unwrap();
        let comps = [(-3.0, 0.5, 1.0), (2.0, 0.7, 0.6), (6.0, 0.4, 0.9)];
        let s = synthetic_spectrum(grid, lorentzian_sum(&grid, &comps));
        let f = extract_features(&s, 0.02).unwrap();
        assert_eq!(f.peak_count, 3);
        for (peak, comp) in f.peaks.iter().zip(&comps) {
            assert!(
                (peak.position - comp.0).abs() <= grid.spacing(),
                "{} vs {}",
                peak.position,
                comp.0
            );
        }
        assert!(f.peaks.windows(2).all(|w| w[0].position < w[1].position));
        for m in &f.minima {
            assert!(
                f.peaks.iter().any(|p| p.position < m.position)
                    && f.peaks.iter().any(|p| p.position > m.position)
            );
        }
    }

    #[test]
    fn lorentzian_half_width_on_a_dense_grid() {
        let grid = ModeGrid::new(-6.0, 6.0, 24001).unwrap();
        let s = synthetic_spectrum(grid, lorentzian_sum(&grid, &[(0.0, 0.5, 1.0)]));
        let f = extract_features(&s, 0.02).unwrap();
        assert_eq!(f.peak_count, 1);
        let hw = f.peaks[0].half_width.unwrap();
        assert_abs_diff_eq!(hw, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn features_are_scale_invariant() {
        let grid = ModeGrid::new(-10.0, 10.0, 2001).unwrap();
        let base = lorentzian_sum(&grid, &[(-3.0, 0.5, 1.0), (2.0, 0.7, 0.6)]);
        let scaled: Vec<f64> = base.iter().map(|v| v * 37.5).collect();
        let fa = extract_features(&synthetic_spectrum(grid, base), 0.02).unwrap();
        let fb = extract_features(&synthetic_spectrum(grid, scaled), 0.02).unwrap();
        assert_eq!(fa.peak_count, fb.peak_count);
        for (a, b) in fa.peaks.iter().zip(&fb.peaks) {
            assert_abs_diff_eq!(a.position, b.position, epsilon = 1e-12);
        }
        for (a, b) in fa.minima.iter().zip(&fb.minima) {
            assert_abs_diff_eq!(a.depth_ratio, b.depth_ratio, epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_zero_spectrum_has_no_features() {
        let grid = ModeGrid::new(-1.0, 1.0, 101).unwrap();
        let s = synthetic_spectrum(grid, vec![0.0; 101]);
        let f = extract_features(&s, 0.02).unwrap();
        assert_eq!(f.peak_count, 0);
        assert!(f.minima.is_empty());
        assert_eq!(f.integral, 0.0);
        assert_eq!(sum_rule(&s).unwrap().total, 0.0);
    }

    #[test]
    fn fig3a_minimum_is_the_fano_zero() {
        let p = preset("fig3a").unwrap();
        let s = spectrum_p0(&p.config, &p.grid).unwrap();
        let m = deepest_minimum(&s, (-1.0, -0.3)).unwrap();
        assert!((m.position + 0.65).abs() <= p.grid.spacing());
        assert!(m.depth_ratio < 1e-6, "depth ratio {:.2e}", m.depth_ratio);
    }

    #[test]
    fn window_outside_grid_is_rejected() {
        let p = preset("fig3a").unwrap();
        let s = spectrum_p0(&p.config, &p.grid).unwrap();
        assert!(matches!(
            deepest_minimum(&s, (-9.0, -5.0)),
            Err(Error::WindowOutsideGrid { .. })
        ));
    }

    #[test]
    fn sum_rule_on_presets_matches_time_domain_oracle() {
        // Oracle: the time-domain decay integral of the propagated amplitudes.
        for name in ["fig3a", "fig3b", "fig3c"] {
            let p = preset(name).unwrap();
            let s = spectrum_p0(&p.config, &p.grid).unwrap();
            let rule = sum_rule(&s).unwrap();
            let traj = numeric::propagate(&p.config, &Quality::default()).unwrap();
            let oracle = traj.decay_integral(&p.config);
            assert_abs_diff_eq!(rule.total, oracle, epsilon = 1e-3);
            assert_abs_diff_eq!(rule.total, 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn narrow_window_is_refused() {
        let p = preset("fig5a").unwrap();
        let narrow = ModeGrid::new(-0.5, 0.5, 201).unwrap();
        let s = spectrum_p0(&p.config, &narrow).unwrap();
        assert!(matches!(sum_rule(&s), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn phase_scan_counts_fig5_peaks() {
        let p = preset("fig5a").unwrap();
        let phases = [0.0, 0.25 * PI, 0.5 * PI, 0.75 * PI, PI];
        let scan = phase_scan(&p.config, &p.grid, &phases, &Quality::default()).unwrap();
        let counts: Vec<usize> = scan.features.iter().map(|f| f.peak_count).collect();
        assert_eq!(counts, vec![2, 4, 4, 4, 2]);
    }

    #[test]
    fn phase_scan_tracks_fig3_zeros() {
        let p = preset("fig3a").unwrap();
        let phases = [0.0, 0.5 * PI, PI];
        let scan = phase_scan(&p.config, &p.grid, &phases, &Quality::default()).unwrap();
        // dphi = 0: zero at -0.65; dphi = pi: zero at -0.35; dphi = pi/2: none.
        let deep: Vec<Option<f64>> = scan
            .features
            .iter()
            .map(|f| {
                f.minima
                    .iter()
                    .find(|m| m.depth_ratio < 1e-6)
                    .map(|m| m.position)
            })
            .collect();
        assert!((deep[0].unwrap() + 0.65).abs() <= p.grid.spacing());
        assert!(deep[1].is_none());
        assert!((deep[2].unwrap() + 0.35).abs() <= p.grid.spacing());
    }

    #[test]
    fn single_phase_scan_reduces_to_extract_features() {
        let p = preset("fig5c").unwrap();
        let scan = phase_scan(&p.config, &p.grid, &[p.config.dphi], &Quality::default()).unwrap();
        let direct = extract_features(
            &spectrum_p0(&p.config, &p.grid).unwrap(),
            DEFAULT_PROMINENCE,
        )
        .unwrap();
        assert_eq!(scan.features[0].peak_count, direct.peak_count);
        for (a, b) in scan.features[0].peaks.iter().zip(&direct.peaks) {
            assert_abs_diff_eq!(a.position, b.position, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_phase_lists_rejected() {
        let p = preset("fig5a").unwrap();
        let q = Quality::default();
        assert!(phase_scan(&p.config, &p.grid, &[], &q).is_err());
        assert!(phase_scan(&p.config, &p.grid, &[0.5, 0.5], &q).is_err());
        assert!(phase_scan(&p.config, &p.grid, &[0.0, 4.0], &q).is_err());
    }
}
