//! Density evolution on the BEC and BP-threshold bisection.
//!
//! Every ensemble family implements [`DeSystem`]: a deterministic, monotone
//! map on a flat state vector of VN-to-CN erasure probabilities, addressed by
//! spatial position so that windowed decoding can restrict updates to a range
//! of positions. [`run_de`], [`bp_threshold`] and everything in
//! [`crate::dynamics`] are written against the trait only.

use serde::{Deserialize, Serialize};

use crate::ensembles::CoupledEnsembleSpec;
use crate::error::{Error, Result};

/// Default convergence floor on `max_z x_z`.
pub const DEFAULT_DELTA_CONV: f64 = 1e-10;
/// Default iteration cap for a single DE run.
pub const DEFAULT_MAX_ITERS: usize = 4_000_000;
/// Default bisection tolerance.
pub const DEFAULT_TOL: f64 = 1e-5;
/// A run whose largest per-iteration change falls below this has reached
/// a nonzero fixed point: the front could not cover one position within the
/// iteration cap at that rate.
pub const STALL_RESIDUAL: f64 = 1e-14;

/// A density-evolution recursion over `L` spatial positions.
///
/// The state is position-major: position `z` owns the `stride()` entries
/// starting at `(z - 1) * stride()`. The new messages at `z` may only read
/// positions within `coupling_radius()` of `z`.
///
/// Implementations must be monotone: a pointwise larger input state or a
/// larger `epsilon` never yields a pointwise smaller output.
pub trait DeSystem: Sync {
    /// Number of spatial positions `L`.
    fn positions(&self) -> usize;

    /// State entries per position.
    fn stride(&self) -> usize;

    fn coupling_radius(&self) -> usize;

    fn scratch_len(&self) -> usize;

    fn state_len(&self) -> usize {
        self.positions() * self.stride()
    }

    /// The start state: every message from a VN at `z in [1, L]` erased with
    /// probability `epsilon`.
    fn initial_state(&self, epsilon: f64, state: &mut [f64]) {
        state.fill(epsilon);
    }

    /// One flooding iteration for the VNs at positions `first..=last`
    /// (1-based). Writes only the `dst` entries of those positions; CN
    /// updates read `src`, where positions outside `[1, L]` are terminated.
    fn update(
        &self,
        epsilon: f64,
        src: &[f64],
        dst: &mut [f64],
        scratch: &mut [f64],
        first: usize,
        last: usize,
    );

    /// Largest erasure probability among the messages leaving position `z`.
    fn position_erasure(&self, state: &[f64], z: usize) -> f64 {
        let k = self.stride();
        state[(z - 1) * k..z * k]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    fn max_erasure(&self, state: &[f64]) -> f64 {
        state.iter().copied().fold(0.0, f64::max)
    }

    fn profile(&self, state: &[f64]) -> Vec<f64> {
        (1..=self.positions())
            .map(|z| self.position_erasure(state, z))
            .collect()
    }
}

impl<S: DeSystem + ?Sized> DeSystem for &S {
    fn positions(&self) -> usize {
        (**self).positions()
    }
    fn stride(&self) -> usize {
        (**self).stride()
    }
    fn coupling_radius(&self) -> usize {
        (**self).coupling_radius()
    }
    fn scratch_len(&self) -> usize {
        (**self).scratch_len()
    }
    fn initial_state(&self, epsilon: f64, state: &mut [f64]) {
        (**self).initial_state(epsilon, state)
    }
    fn update(
        &self,
        epsilon: f64,
        src: &[f64],
        dst: &mut [f64],
        scratch: &mut [f64],
        first: usize,
        last: usize,
    ) {
        (**self).update(epsilon, src, dst, scratch, first, last)
    }
    fn position_erasure(&self, state: &[f64], z: usize) -> f64 {
        (**self).position_erasure(state, z)
    }
    fn max_erasure(&self, state: &[f64]) -> f64 {
        (**self).max_erasure(state)
    }
}

/// Numeric controls shared by DE runs and bisections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeControls {
    pub delta_conv: f64,
    pub max_iters: usize,
}

impl Default for DeControls {
    fn default() -> Self {
        Self {
            delta_conv: DEFAULT_DELTA_CONV,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Erasure probabilities `x_z` by spatial position, plus the channel `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureProfile {
    pub values: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeRunReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_profile: ErasureProfile,
    /// Largest change of any message in the last iteration.
    pub max_residual: f64,
    /// The run stopped at a nonzero fixed point before the cap.
    pub stalled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub epsilon: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub bracket_width: f64,
    pub runs: usize,
    pub probes: Vec<Probe>,
}

impl ThresholdResult {
    /// Largest probed `epsilon` that converged, or 0.
    pub fn lower(&self) -> f64 {
        self.probes
            .iter()
            .filter(|p| p.converged)
            .map(|p| p.epsilon)
            .fold(0.0, f64::max)
    }

    /// Smallest probed `epsilon` that failed, or 1.
    pub fn upper(&self) -> f64 {
        self.probes
            .iter()
            .filter(|p| !p.converged)
            .map(|p| p.epsilon)
            .fold(1.0, f64::min)
    }
}

/// One DE trajectory with a work buffer and an active-position set.
///
/// The trajectory is pointwise non-increasing, and a position whose
/// neighborhood did not change in the last iteration maps to bit-identical
/// output, so only positions within the coupling radius of a change are
/// recomputed. The result equals a full flooding update exactly.
pub(crate) struct Trajectory<'a, S: DeSystem + ?Sized> {
    system: &'a S,
    epsilon: f64,
    pub(crate) current: Vec<f64>,
    next: Vec<f64>,
    scratch: Vec<f64>,
    changed: Vec<bool>,
    runs: Vec<(usize, usize)>,
    prev_runs: Vec<(usize, usize)>,
    finite: bool,
    floor: f64,
    /// Number of state entries at or above `floor`.
    above_floor: usize,
}

impl<'a, S: DeSystem + ?Sized> Trajectory<'a, S> {
    pub(crate) fn new(system: &'a S, epsilon: f64, floor: f64) -> Self {
        let mut current = vec![0.0; system.state_len()];
        system.initial_state(epsilon, &mut current);
        let above_floor = current.iter().filter(|&&v| !(v < floor)).count();
        Self {
            system,
            epsilon,
            next: current.clone(),
            current,
            scratch: vec![0.0; system.scratch_len()],
            changed: vec![true; system.positions()],
            runs: vec![(1, system.positions())],
            prev_runs: Vec::new(),
            finite: true,
            floor,
            above_floor,
        }
    }

    /// Advances positions `first..=last` by one iteration. Returns the
    /// largest change of any message.
    pub(crate) fn step_range(&mut self, first: usize, last: usize) -> f64 {
        self.system.update(
            self.epsilon,
            &self.current,
            &mut self.next,
            &mut self.scratch,
            first,
            last,
        );
        self.commit(first, last)
    }

    fn commit(&mut self, first: usize, last: usize) -> f64 {
        let k = self.system.stride();
        let mut residual = 0.0f64;
        for z in first..=last {
            let mut moved = false;
            for i in (z - 1) * k..z * k {
                let (old, new) = (self.current[i], self.next[i]);
                if old != new {
                    moved = true;
                    residual = residual.max((old - new).abs());
                    let (was, is) = (!(old < self.floor), !(new < self.floor));
                    if was && !is {
                        self.above_floor -= 1;
                    } else if is && !was {
                        self.above_floor += 1;
                    }
                    self.finite &= new.is_finite();
                    self.current[i] = new;
                }
            }
            self.changed[z - 1] = moved;
        }
        residual
    }

    /// One full flooding iteration, recomputing only the active positions.
    pub(crate) fn step(&mut self) -> f64 {
        let len = self.system.positions();
        let radius = self.system.coupling_radius();
        // Only positions inside the previous runs can have changed.
        std::mem::swap(&mut self.runs, &mut self.prev_runs);
        self.runs.clear();
        for &(first, last) in &self.prev_runs {
            for z in first..=last {
                if !self.changed[z - 1] {
                    continue;
                }
                let lo = z.saturating_sub(radius).max(1);
                let hi = (z + radius).min(len);
                match self.runs.last_mut() {
                    Some(run) if lo <= run.1 + 1 => run.1 = run.1.max(hi),
                    _ => self.runs.push((lo, hi)),
                }
            }
        }
        for &(first, last) in &self.prev_runs {
            self.changed[first - 1..last].fill(false);
        }
        // All runs read the same state before any of them is committed.
        for &(first, last) in &self.runs {
            self.system.update(
                self.epsilon,
                &self.current,
                &mut self.next,
                &mut self.scratch,
                first,
                last,
            );
        }
        let mut residual = 0.0f64;
        for i in 0..self.runs.len() {
            let (first, last) = self.runs[i];
            residual = residual.max(self.commit(first, last));
        }
        residual
    }

    /// Every message is below the convergence floor.
    pub(crate) fn below_floor(&self) -> bool {
        self.above_floor == 0
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.finite
    }

    pub(crate) fn position_erasure(&self, z: usize) -> f64 {
        self.system.position_erasure(&self.current, z)
    }

    pub(crate) fn profile(&self) -> ErasureProfile {
        ErasureProfile {
            values: self.system.profile(&self.current),
            epsilon: self.epsilon,
        }
    }
}

/// Iterates DE from the channel-initialized state until `max_z x_z` drops
/// below `delta_conv`, the state stalls at a nonzero fixed point, or
/// `max_iters` is reached.
pub fn run_de<S: DeSystem + ?Sized>(
    system: &S,
    epsilon: f64,
    controls: &DeControls,
) -> Result<DeRunReport> {
    run_de_observed(system, epsilon, controls, 0, |_, _| {})
}

/// [`run_de`] that hands the position profile to `observer` every `every`
/// iterations (and for the start state). `every = 0` disables observation.
pub fn run_de_observed<S, F>(
    system: &S,
    epsilon: f64,
    controls: &DeControls,
    every: usize,
    mut observer: F,
) -> Result<DeRunReport>
where
    S: DeSystem + ?Sized,
    F: FnMut(usize, &ErasureProfile),
{
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let mut traj = Trajectory::new(system, epsilon, controls.delta_conv);
    if every > 0 {
        observer(0, &traj.profile());
    }
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut stalled = false;
    while iterations < controls.max_iters {
        residual = traj.step();
        iterations += 1;
        if !traj.is_finite() {
            return Err(Error::NonFinite {
                iteration: iterations,
            });
        }
        if every > 0 && iterations % every == 0 {
            observer(iterations, &traj.profile());
        }
        if traj.below_floor() {
            converged = true;
            break;
        }
        if residual < STALL_RESIDUAL {
            stalled = true;
            break;
        }
    }
    Ok(DeRunReport {
        converged,
        iterations,
        final_profile: traj.profile(),
        max_residual: residual,
        stalled,
    })
}

/// Bisects `epsilon` over `[0, 1]` with an arbitrary feasibility oracle.
pub fn bisect_threshold<F>(tol: f64, feasible: F) -> Result<ThresholdResult>
where
    F: FnMut(f64) -> Result<bool>,
{
    let start = ThresholdResult {
        threshold: 0.5,
        bracket_width: 1.0,
        runs: 0,
        probes: Vec::new(),
    };
    refine_threshold(&start, tol, feasible)
}

/// Continues a bisection from the bracket of `previous` until it is at most
/// `tol` wide. Probe history is kept, so the result is identical to a single
/// bisection run at the tighter tolerance.
pub fn refine_threshold<F>(
    previous: &ThresholdResult,
    tol: f64,
    mut feasible: F,
) -> Result<ThresholdResult>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (mut lo, mut hi) = (previous.lower(), previous.upper());
    let mut probes = previous.probes.clone();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let converged = feasible(mid)?;
        probes.push(Probe {
            epsilon: mid,
            converged,
        });
        if converged {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        threshold: 0.5 * (lo + hi),
        bracket_width: hi - lo,
        runs: probes.len(),
        probes,
    })
}

/// BP threshold: the supremum of channel erasure probabilities for which DE
/// drives every message erasure probability to zero.
pub fn bp_threshold<S: DeSystem + ?Sized>(
    system: &S,
    tol: f64,
    controls: &DeControls,
) -> Result<ThresholdResult> {
    bisect_threshold(tol, |eps| Ok(run_de(system, eps, controls)?.converged))
}

/// The random `(dv, dc, nu, L)` ensemble:
/// `x_z <- eps (1 - sum_i nu_i (1 - sum_j nu_j x_{z+i-j})^(dc-1))^(dv-1)`.
///
/// State index `z - 1` holds `x_z` for `z in [1, L]`; positions outside read
/// as 0. Scratch holds the CN-side factor for CN positions `1..=L+w-1`.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    spec: CoupledEnsembleSpec,
}

impl CoupledSystem {
    pub fn new(spec: CoupledEnsembleSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &CoupledEnsembleSpec {
        &self.spec
    }
}

impl DeSystem for CoupledSystem {
    fn positions(&self) -> usize {
        self.spec.length
    }

    fn stride(&self) -> usize {
        1
    }

    fn coupling_radius(&self) -> usize {
        self.spec.width() - 1
    }

    fn scratch_len(&self) -> usize {
        self.spec.length + self.spec.width() - 1
    }

    fn update(
        &self,
        epsilon: f64,
        src: &[f64],
        dst: &mut [f64],
        scratch: &mut [f64],
        first: usize,
        last: usize,
    ) {
        let len = self.spec.length;
        let nu = self.spec.nu.weights();
        let w = nu.len();
        let cn_exp = self.spec.dc as i32 - 1;
        let vn_exp = self.spec.dv as i32 - 1;
        for c in first..=last + w - 1 {
            let mut mix = 0.0;
            for (j, &nj) in nu.iter().enumerate() {
                // x_{c-j}, zero outside [1, L]
                if c > j && c - j <= len {
                    mix += nj * src[c - j - 1];
                }
            }
            scratch[c - 1] = (1.0 - mix).powi(cn_exp);
        }
        for z in first..=last {
            let mut known = 0.0;
            for (i, &ni) in nu.iter().enumerate() {
                known += ni * scratch[z + i - 1];
            }
            dst[z - 1] = epsilon * (1.0 - known).powi(vn_exp);
        }
    }

    fn position_erasure(&self, state: &[f64], z: usize) -> f64 {
        state[z - 1]
    }
}

/// One DE iteration on a profile over positions `1..=L+w-1`; entries past
/// `L` are termination positions and stay 0.
pub fn de_step(profile: &ErasureProfile, spec: &CoupledEnsembleSpec) -> Result<ErasureProfile> {
    let len = spec.length;
    let expected = len + spec.width() - 1;
    if profile.values.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: profile.values.len(),
        });
    }
    let system = CoupledSystem::new(spec.clone());
    let src = &profile.values[..len];
    let mut dst = src.to_vec();
    let mut scratch = vec![0.0; system.scratch_len()];
    system.update(profile.epsilon, src, &mut dst, &mut scratch, 1, len);
    dst.resize(expected, 0.0);
    Ok(ErasureProfile {
        values: dst,
        epsilon: profile.epsilon,
    })
}

pub fn coupled_threshold(
    spec: &CoupledEnsembleSpec,
    tol: f64,
    controls: &DeControls,
) -> Result<ThresholdResult> {
    bp_threshold(&CoupledSystem::new(spec.clone()), tol, controls)
}
