//! Decoding-wave speed and windowed decoding, for any [`DeSystem`].
//!
//! The speed of the decoding wave is measured as `v = D / T_D`, where `T_D`
//! is the smallest number of iterations after which the profile sits
//! pointwise at or below its own copy shifted by `D` positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{
    bisect_threshold, DeControls, DeRunReport, DeSystem, ThresholdResult, Trajectory,
    STALL_RESIDUAL,
};
use crate::error::{Error, Result};

pub const DEFAULT_DISPLACEMENT: usize = 10;

/// Extra positions (on top of `w`) the `eps/2` crossing must advance before
/// the reference profile is taken.
pub const BURN_IN_MARGIN: usize = 5;

/// Which half-chain's front was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Front {
    /// The wave entering from `z = 1`, travelling towards larger `z`.
    Left,
    /// The wave entering from `z = L`, travelling towards smaller `z`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedOptions {
    /// Displacement `D` in positions.
    pub displacement: usize,
    /// Iterations added after the burn-in point before fixing the reference.
    pub extra_burn_in: usize,
    pub controls: DeControls,
}

impl Default for SpeedOptions {
    fn default() -> Self {
        Self {
            displacement: DEFAULT_DISPLACEMENT,
            extra_burn_in: 0,
            controls: DeControls::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    /// Positions per iteration, `displacement / iterations`.
    pub v: f64,
    pub displacement: usize,
    /// `T_D`.
    pub iterations: usize,
    /// Iteration `t*` at which the reference profile was taken.
    pub burn_in: usize,
    pub front: Front,
}

/// Measures `v = D / T_D` at channel erasure probability `epsilon`.
///
/// The reference profile is taken once the `epsilon/2` crossing of either
/// half-chain has advanced `w + 5` positions from its chain end (plus
/// `extra_burn_in` iterations). `T_D` is the first `T` for which one
/// half-chain satisfies `x_z(t*+T) <= x_{z-D}(t*)` (mirrored for the
/// right half) at every position whose shifted source lies inside the
/// chain; that front is reported.
pub fn estimate_speed<S: DeSystem + ?Sized>(
    system: &S,
    epsilon: f64,
    opts: &SpeedOptions,
) -> Result<SpeedEstimate> {
    let len = system.positions();
    let d = opts.displacement;
    let w = system.coupling_radius() + 1;
    if d == 0 {
        return Err(Error::InvalidParameter(
            "displacement D must be >= 1".into(),
        ));
    }
    if len < 4 * d + 2 * w {
        return Err(Error::InvalidParameter(format!(
            "L = {len} too short to measure D = {d} (need L >= 4D + 2w = {})",
            4 * d + 2 * w
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let cap = opts.controls.max_iters;
    let mut traj = Trajectory::new(system, epsilon, opts.controls.delta_conv);
    let half = epsilon / 2.0;
    let target = w + BURN_IN_MARGIN;

    let mut t = 0;
    loop {
        if t >= cap {
            return Err(Error::NoWave(format!(
                "no front formed within {cap} iterations"
            )));
        }
        let residual = traj.step();
        t += 1;
        if !traj.is_finite() {
            return Err(Error::NonFinite { iteration: t });
        }
        if residual < STALL_RESIDUAL {
            return Err(Error::NoWave("profile stalled before a wave formed".into()));
        }
        if traj.below_floor() {
            return Err(Error::NoWave(
                "profile converged before a wave formed".into(),
            ));
        }
        let left = (1..=len).find(|&z| traj.position_erasure(z) >= half);
        let right = (1..=len).rev().find(|&z| traj.position_erasure(z) >= half);
        let (Some(left), Some(right)) = (left, right) else {
            return Err(Error::NoWave(
                "whole chain dropped below epsilon/2 at once".into(),
            ));
        };
        if left - 1 >= target || len - right >= target {
            break;
        }
    }
    for _ in 0..opts.extra_burn_in {
        traj.step();
        t += 1;
    }
    let burn_in = t;
    let reference = traj.profile().values;
    let mid = len / 2;

    for shift in 1..=cap {
        let residual = traj.step();
        if !traj.is_finite() {
            return Err(Error::NonFinite {
                iteration: burn_in + shift,
            });
        }
        let left_ok = (d + 1..=mid).all(|z| traj.position_erasure(z) <= reference[z - d - 1]);
        let right_ok =
            (len + 1 - mid..=len - d).all(|z| traj.position_erasure(z) <= reference[z + d - 1]);
        if left_ok || right_ok {
            return Ok(SpeedEstimate {
                v: d as f64 / shift as f64,
                displacement: d,
                iterations: shift,
                burn_in,
                front: if left_ok { Front::Left } else { Front::Right },
            });
        }
        if residual < STALL_RESIDUAL {
            return Err(Error::NoWave(format!(
                "front stalled before moving {d} positions"
            )));
        }
    }
    Err(Error::NoWave(format!(
        "front did not move {d} positions within {cap} iterations"
    )))
}

/// One cell of a speed table; `v` is absent where no wave exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedPoint {
    pub param: f64,
    pub epsilon: f64,
    pub v: Option<f64>,
}

/// Speeds over a `param x epsilon` grid for a parameterized family of
/// systems. Rows are ordered by `(param, epsilon)` grid index.
pub fn speed_contours<S, F>(
    family: F,
    params: &[f64],
    epsilons: &[f64],
    opts: &SpeedOptions,
) -> Result<Vec<SpeedPoint>>
where
    S: DeSystem,
    F: Fn(f64) -> Result<S> + Sync,
{
    if params.is_empty() || epsilons.is_empty() {
        return Err(Error::InvalidParameter(
            "speed grid must be non-empty".into(),
        ));
    }
    let systems = params
        .iter()
        .map(|&p| family(p))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..params.len())
        .flat_map(|i| (0..epsilons.len()).map(move |j| (i, j)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let v = match estimate_speed(&systems[i], epsilons[j], opts) {
                Ok(s) => Some(s.v),
                Err(Error::NoWave(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(SpeedPoint {
                param: params[i],
                epsilon: epsilons[j],
                v,
            })
        })
        .collect()
}

/// Sliding-window configuration: `window` positions (`W_D`) updated
/// `iterations` (`I`) times per window position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window: usize,
    pub iterations: usize,
}

impl WindowConfig {
    pub fn new(window: usize, iterations: usize) -> Result<Self> {
        if window == 0 || iterations == 0 {
            return Err(Error::InvalidParameter(format!(
                "window size and iterations must be >= 1, got W_D = {window}, I = {iterations}"
            )));
        }
        Ok(Self { window, iterations })
    }
}

/// Windowed decoding DE. For each window start `c = 1..=L` the positions
/// `c..=min(c + W_D - 1, L)` receive `I` flooding iterations reading the
/// committed state elsewhere; the window is then committed and shifted.
/// Success iff every message ends below `delta_conv`.
pub fn windowed_decode<S: DeSystem + ?Sized>(
    system: &S,
    epsilon: f64,
    cfg: &WindowConfig,
    controls: &DeControls,
) -> Result<DeRunReport> {
    let len = system.positions();
    if cfg.window > len {
        return Err(Error::InvalidParameter(format!(
            "window W_D = {} exceeds L = {len}",
            cfg.window
        )));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let mut traj = Trajectory::new(system, epsilon, controls.delta_conv);
    let mut iterations = 0;
    let mut residual = 0.0;
    for c in 1..=len {
        let last = (c + cfg.window - 1).min(len);
        for _ in 0..cfg.iterations {
            residual = traj.step_range(c, last);
            iterations += 1;
            if !traj.is_finite() {
                return Err(Error::NonFinite {
                    iteration: iterations,
                });
            }
            // An exact fixed point of the window stays fixed.
            if residual == 0.0 {
                break;
            }
        }
    }
    Ok(DeRunReport {
        converged: traj.below_floor(),
        iterations,
        final_profile: traj.profile(),
        max_residual: residual,
        stalled: false,
    })
}

pub fn windowed_threshold<S: DeSystem + ?Sized>(
    system: &S,
    cfg: &WindowConfig,
    tol: f64,
    controls: &DeControls,
) -> Result<ThresholdResult> {
    bisect_threshold(tol, |eps| {
        Ok(windowed_decode(system, eps, cfg, controls)?.converged)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::de::{run_de, CoupledSystem};
    use crate::ensembles::CoupledEnsembleSpec;

    fn system(dv: u32, alpha: f64, len: usize) -> CoupledSystem {
        CoupledSystem::new(CoupledEnsembleSpec::half_rate_alpha(dv, alpha, len).unwrap())
    }

    #[test]
    fn zero_channel_windowed_succeeds() {
        let r = windowed_decode(
            &system(5, 0.3, 40),
            0.0,
            &WindowConfig::new(5, 2).unwrap(),
            &DeControls::default(),
        )
        .unwrap();
        assert!(r.converged);
    }

    #[test]
    fn window_config_validation() {
        assert!(WindowConfig::new(0, 3).is_err());
        assert!(WindowConfig::new(3, 0).is_err());
        let cfg = WindowConfig::new(50, 3).unwrap();
        assert!(windowed_decode(&system(5, 0.3, 40), 0.3, &cfg, &DeControls::default()).is_err());
    }

    #[test]
    fn full_window_matches_full_bp() {
        let sys = system(4, 0.4, 24);
        let controls = DeControls::default();
        let cfg = WindowConfig::new(24, controls.max_iters).unwrap();
        for eps in [0.40, 0.45, 0.47, 0.49, 0.50, 0.52] {
            let full = run_de(&sys, eps, &controls).unwrap().converged;
            let wd = windowed_decode(&sys, eps, &cfg, &controls)
                .unwrap()
                .converged;
            assert_eq!(full, wd, "eps = {eps}");
        }
    }

    #[test]
    fn speed_rejects_short_chain() {
        let err = estimate_speed(&system(5, 0.35, 30), 0.47, &SpeedOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn speed_reports_no_wave() {
        let sys = system(5, 0.35, 100);
        // below the uncoupled threshold everything decodes at once
        assert!(matches!(
            estimate_speed(&sys, 0.2, &SpeedOptions::default()),
            Err(Error::NoWave(_))
        ));
        // above the coupled threshold nothing moves
        let opts = SpeedOptions {
            controls: DeControls {
                max_iters: 20_000,
                ..DeControls::default()
            },
            ..SpeedOptions::default()
        };
        assert!(matches!(
            estimate_speed(&sys, 0.52, &opts),
            Err(Error::NoWave(_))
        ));
    }

    #[test]
    fn uniform_speed_is_side_symmetric() {
        let s = estimate_speed(&system(5, 0.5, 100), 0.47, &SpeedOptions::default()).unwrap();
        assert_eq!(s.v, s.displacement as f64 / s.iterations as f64);
        assert!(s.v > 0.0);
        let sys = system(5, 0.5, 100);
        let mut opts = SpeedOptions::default();
        opts.displacement = 10;
        let again = estimate_speed(&sys, 0.47, &opts).unwrap();
        assert_eq!(s, again);
    }
}
