//! Grid searches over coupling designs.
//!
//! Every search evaluates a deterministic list of grid points (in parallel,
//! collected in grid order), optionally adds one level of local refinement at
//! a tenth of the step, and selects the best point. Points whose thresholds
//! are within `2 * tol` of the maximum are tied. Ties are first attacked by
//! continuing the tied points' bisections at ten times the precision, down to
//! [`SweepOptions::tie_floor`]; whatever remains tied is settled by the
//! configured [`TieBreak`].

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{
    refine_threshold, run_de, CoupledSystem, DeControls, DeSystem, ThresholdResult, DEFAULT_TOL,
};
use crate::ensembles::{
    build_protograph_chain, CoupledEnsembleSpec, ProtographChain, SmoothingDistribution,
    TwoTypeSpec,
};
use crate::error::{Error, Result};
use crate::multitype::{ProtographSystem, TwoTypeSystem};

/// Sweep tolerance used when none is given.
pub const DEFAULT_SWEEP_TOL: f64 = 1e-4;
/// Finest precision reached while resolving ties.
pub const DEFAULT_TIE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smallest rate loss, then lexicographically smallest parameters.
    RateLoss,
    /// Lexicographically smallest parameters only.
    Parameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Bisection tolerance for every grid point.
    pub tol: f64,
    /// Tolerance of the final re-evaluation of the selected point.
    pub final_tol: f64,
    /// Ties are resolved by tightening precision down to this tolerance.
    pub tie_floor: f64,
    pub tie_break: TieBreak,
    /// Add one level of local refinement at `step / 10`.
    pub refine: bool,
    pub controls: DeControls,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tol: DEFAULT_SWEEP_TOL,
            final_tol: DEFAULT_TOL,
            tie_floor: DEFAULT_TIE_FLOOR,
            tie_break: TieBreak::RateLoss,
            refine: true,
            controls: DeControls::default(),
        }
    }
}

impl SweepOptions {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol", self.tol),
            ("final_tol", self.final_tol),
            ("tie_floor", self.tie_floor),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "message", rename_all = "kebab-case")]
pub enum EntryStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub params: Vec<f64>,
    /// Bisection midpoint; `None` when the evaluation failed.
    pub threshold: Option<f64>,
    /// Width of the final bisection bracket.
    pub bracket_width: f64,
    pub rate_loss: f64,
    /// The point was added by local refinement.
    pub refined: bool,
    pub status: EntryStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum SelectionReason {
    UniqueMaximum,
    /// `tied` points remained equal at the tie floor.
    RateLoss { tied: usize },
    Parameters { tied: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    pub params: Vec<f64>,
    /// Threshold re-evaluated at `final_tol` or finer.
    pub threshold: f64,
    pub bracket_width: f64,
    pub rate_loss: f64,
    pub reason: SelectionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Ensemble family, e.g. `"alpha"`.
    pub family: String,
    /// Names of the entries' parameters.
    pub param_names: Vec<String>,
    pub dv: u32,
    pub dc: u32,
    pub length: usize,
    pub grid_step: f64,
    pub options: SweepOptions,
    /// Coarse grid first, refinement points after, each in grid order.
    pub entries: Vec<SweepEntry>,
    /// Selection over the coarse grid alone.
    pub coarse_best: Option<BestPoint>,
    pub best: Option<BestPoint>,
}

struct Point {
    params: Vec<f64>,
    refined: bool,
    rate_loss: f64,
    outcome: Result<ThresholdResult>,
}

impl Point {
    fn threshold(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.threshold)
    }

    fn entry(&self) -> SweepEntry {
        match &self.outcome {
            Ok(r) => SweepEntry {
                params: self.params.clone(),
                threshold: Some(r.threshold),
                bracket_width: r.bracket_width,
                rate_loss: self.rate_loss,
                refined: self.refined,
                status: EntryStatus::Ok,
            },
            Err(e) => SweepEntry {
                params: self.params.clone(),
                threshold: None,
                bracket_width: f64::NAN,
                rate_loss: self.rate_loss,
                refined: self.refined,
                status: EntryStatus::Failed(e.to_string()),
            },
        }
    }
}

/// Builds the DE system of one grid point together with its rate loss.
trait Family: Sync {
    type System: DeSystem;
    fn build(&self, params: &[f64]) -> Result<(Self::System, f64)>;
}

struct Driver<'a, F: Family> {
    family: &'a F,
    opts: &'a SweepOptions,
}

impl<F: Family> Driver<'_, F> {
    fn refine_point(&self, p: &Point, tol: f64) -> Result<ThresholdResult> {
        let prev = p.outcome.as_ref().map_err(Clone::clone)?;
        let (sys, _) = self.family.build(&p.params)?;
        refine_threshold(prev, tol, |eps| {
            Ok(run_de(&sys, eps, &self.opts.controls)?.converged)
        })
    }

    fn evaluate(&self, params: Vec<Vec<f64>>, refined: bool) -> Vec<Point> {
        params
            .into_par_iter()
            .map(|params| match self.family.build(&params) {
                Ok((sys, rate_loss)) => {
                    let start = ThresholdResult {
                        threshold: 0.5,
                        bracket_width: 1.0,
                        runs: 0,
                        probes: Vec::new(),
                    };
                    let outcome = refine_threshold(&start, self.opts.tol, |eps| {
                        Ok(run_de(&sys, eps, &self.opts.controls)?.converged)
                    });
                    Point {
                        params,
                        refined,
                        rate_loss,
                        outcome,
                    }
                }
                Err(e) => Point {
                    params,
                    refined,
                    rate_loss: f64::NAN,
                    outcome: Err(e),
                },
            })
            .collect()
    }

    /// Index of the selected point among `points`, tightening tied points
    /// in place.
    fn select(&self, points: &mut [Point]) -> Option<(usize, SelectionReason)> {
        let mut tol = self.opts.tol;
        loop {
            let best = points
                .iter()
                .filter_map(Point::threshold)
                .fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                return None;
            }
            let tied: Vec<usize> = (0..points.len())
                .filter(|&i| points[i].threshold().is_some_and(|t| t >= best - 2.0 * tol))
                .collect();
            if tied.len() == 1 {
                return Some((tied[0], SelectionReason::UniqueMaximum));
            }
            if tol <= self.opts.tie_floor {
                return Some(self.break_tie(points, &tied));
            }
            tol = (tol / 10.0).max(self.opts.tie_floor);
            let refreshed: Vec<Result<ThresholdResult>> = tied
                .par_iter()
                .map(|&i| self.refine_point(&points[i], tol))
                .collect();
            for (&i, r) in tied.iter().zip(refreshed) {
                points[i].outcome = r;
            }
        }
    }

    fn break_tie(&self, points: &[Point], tied: &[usize]) -> (usize, SelectionReason) {
        let by_params = |a: &&usize, b: &&usize| cmp_params(&points[**a].params, &points[**b].params);
        let pick = match self.opts.tie_break {
            TieBreak::RateLoss => *tied
                .iter()
                .min_by(|a, b| {
                    points[**a]
                        .rate_loss
                        .total_cmp(&points[**b].rate_loss)
                        .then_with(|| by_params(a, b))
                })
                .expect("non-empty tie"),
            TieBreak::Parameters => *tied.iter().min_by(by_params).expect("non-empty tie"),
        };
        let reason = match self.opts.tie_break {
            TieBreak::RateLoss => SelectionReason::RateLoss { tied: tied.len() },
            TieBreak::Parameters => SelectionReason::Parameters { tied: tied.len() },
        };
        (pick, reason)
    }

    fn best_point(&self, p: &Point, reason: SelectionReason) -> BestPoint {
        let r = p.outcome.as_ref().expect("selected point evaluated");
        BestPoint {
            params: p.params.clone(),
            threshold: r.threshold,
            bracket_width: r.bracket_width,
            rate_loss: p.rate_loss,
            reason,
        }
    }

    /// Runs the coarse grid, the optional refinement produced by `refine`
    /// around the coarse optimum, tie resolution, and the final re-evaluation.
    fn run<R>(&self, coarse: Vec<Vec<f64>>, refine: R) -> (Vec<SweepEntry>, Option<BestPoint>, Option<BestPoint>)
    where
        R: Fn(&[f64]) -> Vec<Vec<f64>>,
    {
        let mut points = self.evaluate(coarse, false);
        let coarse_sel = self.select(&mut points);
        let coarse_best = coarse_sel
            .as_ref()
            .map(|(i, reason)| self.best_point(&points[*i], reason.clone()));
        let mut selection = coarse_sel;
        if self.opts.refine {
            if let Some((i, _)) = &selection {
                let extra: Vec<Vec<f64>> = refine(&points[*i].params)
                    .into_iter()
                    .filter(|q| !points.iter().any(|p| same_params(&p.params, q)))
                    .collect();
                if !extra.is_empty() {
                    let new = self.evaluate(extra, true);
                    points.extend(new);
                    selection = self.select(&mut points);
                }
            }
        }
        let best = selection.map(|(i, reason)| {
            let p = &mut points[i];
            if let Ok(r) = &p.outcome {
                if r.bracket_width > self.opts.final_tol {
                    p.outcome = self.refine_point(p, self.opts.final_tol);
                }
            }
            self.best_point(&points[i], reason)
        });
        let entries = points.iter().map(Point::entry).collect();
        (entries, coarse_best, best)
    }
}

fn cmp_params(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

fn same_params(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

fn check_step(step: f64, max: f64) -> Result<()> {
    if !(step > 0.0 && step <= max) {
        return Err(Error::InvalidParameter(format!(
            "grid step must lie in (0, {max}], got {step}"
        )));
    }
    Ok(())
}

/// Values `{0, step, ..., hi}` with `hi` itself always included.
fn axis(step: f64, hi: f64) -> Vec<f64> {
    let n = (hi / step + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    if hi - v[n] > 1e-12 {
        v.push(hi);
    }
    v
}

/// Points at `step / 10` within one coarse step of `center`, clipped to
/// `[lo, hi]`.
fn local_axis(center: f64, step: f64, lo: f64, hi: f64) -> Vec<f64> {
    (-9i32..=9)
        .map(|m| center + m as f64 * step / 10.0)
        .filter(|&v| v >= lo - 1e-12 && v <= hi + 1e-12)
        .map(|v| v.clamp(lo, hi))
        .collect()
}

struct AlphaFamily {
    dv: u32,
    dc: u32,
    length: usize,
}

impl Family for AlphaFamily {
    type System = CoupledSystem;
    fn build(&self, params: &[f64]) -> Result<(CoupledSystem, f64)> {
        let nu = SmoothingDistribution::two_point(params[0])?;
        let spec = CoupledEnsembleSpec::new(self.dv, self.dc, nu, self.length)?;
        let delta = spec.rate_loss();
        Ok((CoupledSystem::new(spec), delta))
    }
}

/// Sweeps `nu = [alpha, 1 - alpha]` over `alpha` in `{0, step, ..., 1/2}`.
/// Reversal symmetry makes `alpha > 1/2` redundant.
pub fn optimize_alpha(
    dv: u32,
    dc: u32,
    length: usize,
    grid_step: f64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    opts.validate()?;
    check_step(grid_step, 0.5)?;
    let family = AlphaFamily { dv, dc, length };
    family.build(&[0.5])?;
    let coarse = axis(grid_step, 0.5).into_iter().map(|a| vec![a]).collect();
    let driver = Driver { family: &family, opts };
    let (entries, coarse_best, best) = driver.run(coarse, |c| {
        local_axis(c[0], grid_step, 0.0, 0.5)
            .into_iter()
            .map(|a| vec![a])
            .collect()
    });
    Ok(SweepResult {
        family: "alpha".into(),
        param_names: vec!["alpha".into()],
        dv,
        dc,
        length,
        grid_step,
        options: opts.clone(),
        entries,
        coarse_best,
        best,
    })
}

struct Nu3Family {
    dv: u32,
    dc: u32,
    length: usize,
}

impl Family for Nu3Family {
    type System = CoupledSystem;
    fn build(&self, params: &[f64]) -> Result<(CoupledSystem, f64)> {
        let nu = SmoothingDistribution::three_point(params[0], params[1])?;
        let spec = CoupledEnsembleSpec::new(self.dv, self.dc, nu, self.length)?;
        let delta = spec.rate_loss();
        Ok((CoupledSystem::new(spec), delta))
    }
}

/// Sweeps the simplex of `nu = [nu1, nu2, 1 - nu1 - nu2]`. The step must
/// divide 1, e.g. `1/38`; entries carry `(nu1, nu2)`.
pub fn optimize_nu3(
    dv: u32,
    dc: u32,
    length: usize,
    grid_step: f64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    opts.validate()?;
    check_step(grid_step, 0.5)?;
    let n = lattice_size(grid_step)?;
    let family = Nu3Family { dv, dc, length };
    family.build(&[1.0 / 3.0, 1.0 / 3.0])?;
    let coarse = (0..=n)
        .flat_map(|i| (0..=n - i).map(move |j| vec![i as f64 / n as f64, j as f64 / n as f64]))
        .collect();
    // Refinement indices live on the 1/(10n) lattice so that values match
    // the coarse grid exactly where they coincide.
    let fine = 10 * n;
    let driver = Driver { family: &family, opts };
    let (entries, coarse_best, best) = driver.run(coarse, |c| {
        let ci = (c[0] * fine as f64).round() as i64;
        let cj = (c[1] * fine as f64).round() as i64;
        let mut pts = Vec::new();
        for a in -9i64..=9 {
            for b in -9i64..=9 {
                let (i, j) = (ci + a, cj + b);
                if i >= 0 && j >= 0 && i + j <= fine as i64 {
                    pts.push(vec![i as f64 / fine as f64, j as f64 / fine as f64]);
                }
            }
        }
        pts
    });
    Ok(SweepResult {
        family: "nu3".into(),
        param_names: vec!["nu1".into(), "nu2".into()],
        dv,
        dc,
        length,
        grid_step,
        options: opts.clone(),
        entries,
        coarse_best,
        best,
    })
}

struct TwoTypeFamily {
    dv: u32,
    length: usize,
}

impl Family for TwoTypeFamily {
    type System = TwoTypeSystem;
    fn build(&self, params: &[f64]) -> Result<(TwoTypeSystem, f64)> {
        let spec = TwoTypeSpec::new(self.dv, params[0], params[1], self.length)?;
        let delta = spec.rate_loss();
        Ok((TwoTypeSystem::new(spec), delta))
    }
}

/// Canonical representative of `(a_upper, a_lower)` under chain reversal
/// `(1 - a_upper, 1 - a_lower)` and type relabeling `(a_lower, a_upper)`:
/// the orbit member with `a_upper <= a_lower` and `a_upper + a_lower <= 1`.
pub fn canonical_two_type(a_upper: f64, a_lower: f64) -> (f64, f64) {
    let (a, b) = if a_upper <= a_lower {
        (a_upper, a_lower)
    } else {
        (a_lower, a_upper)
    };
    if a + b > 1.0 {
        (1.0 - b, 1.0 - a)
    } else {
        (a, b)
    }
}

/// Sweeps `(a_upper, a_lower)` over `[0, 1]^2`, evaluating one
/// representative per symmetry orbit (see [`canonical_two_type`]). The step
/// must divide 1.
pub fn optimize_two_type(
    dv: u32,
    length: usize,
    grid_step: f64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    opts.validate()?;
    check_step(grid_step, 0.5)?;
    let n = lattice_size(grid_step)?;
    let family = TwoTypeFamily { dv, length };
    family.build(&[0.5, 0.5])?;
    let coarse = canonical_grid((0..=n).flat_map(|i| (0..=n).map(move |j| (i, j))), n);
    let fine = 10 * n;
    let driver = Driver { family: &family, opts };
    let (entries, coarse_best, best) = driver.run(coarse, |c| {
        let ci = (c[0] * fine as f64).round() as i64;
        let cj = (c[1] * fine as f64).round() as i64;
        let near = (-9i64..=9).flat_map(|a| (-9i64..=9).map(move |b| (ci + a, cj + b)));
        let inside = near
            .filter(|&(i, j)| (0..=fine as i64).contains(&i) && (0..=fine as i64).contains(&j))
            .map(|(i, j)| (i as usize, j as usize));
        canonical_grid(inside, fine)
    });
    Ok(SweepResult {
        family: "two-type".into(),
        param_names: vec!["alpha_upper".into(), "alpha_lower".into()],
        dv,
        dc: 2 * dv,
        length,
        grid_step,
        options: opts.clone(),
        entries,
        coarse_best,
        best,
    })
}

fn lattice_size(step: f64) -> Result<usize> {
    let n = (1.0 / step).round() as usize;
    if ((n as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "grid step must be 1/n for an integer n, got {step}"
        )));
    }
    Ok(n)
}

/// Canonical lattice points `(i/n, j/n)`, deduplicated and sorted.
fn canonical_grid(points: impl Iterator<Item = (usize, usize)>, n: usize) -> Vec<Vec<f64>> {
    let mut reps: Vec<(usize, usize)> = points
        .map(|(i, j)| {
            let (a, b) = (i.min(j), i.max(j));
            if a + b > n {
                (n - b, n - a)
            } else {
                (a, b)
            }
        })
        .collect();
    reps.sort_unstable();
    reps.dedup();
    reps.into_iter()
        .map(|(a, b)| vec![a as f64 / n as f64, b as f64 / n as f64])
        .collect()
}

struct ProtographFamily {
    dv: u32,
    length: usize,
}

impl Family for ProtographFamily {
    type System = ProtographSystem;
    fn build(&self, params: &[f64]) -> Result<(ProtographSystem, f64)> {
        let chain =
            build_protograph_chain(self.dv, params[0] as u32, params[1] as u32, self.length)?;
        // Rate loss in the sense r = 1/2 - delta / L.
        let delta = self.length as f64 * (0.5 - chain.design_rate());
        Ok((ProtographSystem::new(chain), delta))
    }
}

/// Exhaustive search over elementary segments `(dv, b1, b2)` with
/// `0 <= b1, b2 <= dv`, one canonical representative per equivalence class.
/// Returns one result per `dv`, in increasing order.
pub fn protograph_search(
    dvs: std::ops::RangeInclusive<u32>,
    length: usize,
    opts: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    opts.validate()?;
    let mut out = Vec::new();
    for dv in dvs {
        if !(2..=18).contains(&dv) {
            return Err(Error::InvalidParameter(format!(
                "protograph search supports 2 <= dv <= 18, got {dv}"
            )));
        }
        let family = ProtographFamily { dv, length };
        let mut reps: Vec<(u32, u32)> = (0..=dv)
            .flat_map(|b1| (0..=dv).map(move |b2| ProtographChain::canonical_segment(dv, b1, b2)))
            .collect();
        reps.sort_unstable();
        reps.dedup();
        let coarse = reps
            .into_iter()
            .map(|(b1, b2)| vec![b1 as f64, b2 as f64])
            .collect();
        let no_refine = SweepOptions {
            refine: false,
            ..opts.clone()
        };
        let driver = Driver {
            family: &family,
            opts: &no_refine,
        };
        let (entries, coarse_best, best) = driver.run(coarse, |_| Vec::new());
        out.push(SweepResult {
            family: "protograph".into(),
            param_names: vec!["b1".into(), "b2".into()],
            dv,
            dc: 2 * dv,
            length,
            grid_step: 1.0,
            options: no_refine,
            entries,
            coarse_best,
            best,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_includes_endpoints() {
        let a = axis(0.2, 0.5);
        assert_eq!(a.len(), 4);
        assert_eq!(*a.last().unwrap(), 0.5);
        assert_eq!(axis(0.25, 0.5), vec![0.0, 0.25, 0.5]);
    }

    #[test]
    fn local_axis_is_clipped() {
        let v = local_axis(0.0, 0.01, 0.0, 0.5);
        assert_eq!(v.len(), 10);
        assert!(v.iter().all(|&x| (0.0..=0.5).contains(&x)));
    }

    #[test]
    fn two_type_canonical_orbit() {
        for (a, b) in [(0.25, 0.5), (0.5, 0.25), (0.75, 0.5), (0.5, 0.75)] {
            assert_eq!(canonical_two_type(a, b), (0.25, 0.5));
        }
        let (a, b) = canonical_two_type(0.9, 0.6);
        assert!(a <= b && a + b <= 1.0);
        let g = canonical_grid([(8, 3), (3, 8), (2, 7), (7, 2)].into_iter(), 10);
        assert_eq!(g, vec![vec![0.2, 0.7]]);
        assert_eq!(canonical_grid((0..=4).flat_map(|i| (0..=4).map(move |j| (i, j))), 4).len(), 9);
    }

    #[test]
    fn rejects_bad_steps() {
        let o = SweepOptions::default();
        assert!(optimize_alpha(3, 6, 10, 0.0, &o).is_err());
        assert!(optimize_nu3(3, 6, 10, 0.3, &o).is_err());
        let bad = SweepOptions {
            tol: 0.0,
            ..SweepOptions::default()
        };
        assert!(optimize_alpha(3, 6, 10, 0.1, &bad).is_err());
    }

    #[test]
    fn params_order_lexicographically() {
        assert_eq!(cmp_params(&[0.1, 0.5], &[0.1, 0.6]), Ordering::Less);
        assert_eq!(cmp_params(&[0.2, 0.0], &[0.1, 0.6]), Ordering::Greater);
    }

    #[test]
    fn small_alpha_sweep_selects_interior_point() {
        let opts = SweepOptions {
            tol: 1e-3,
            final_tol: 1e-4,
            tie_floor: 1e-6,
            ..SweepOptions::default()
        };
        let r = optimize_alpha(5, 10, 24, 0.05, &opts).unwrap();
        let best = r.best.unwrap();
        assert!(best.params[0] > 0.0 && best.params[0] < 0.5);
        assert!(r.entries.iter().any(|e| e.refined));
        assert!(best.bracket_width <= 1e-4);
        let end0 = r.entries[0].threshold.unwrap();
        assert!(best.threshold >= end0);
    }

    #[test]
    fn protograph_entries_are_class_representatives() {
        let opts = SweepOptions {
            tol: 1e-2,
            final_tol: 1e-2,
            tie_floor: 1e-3,
            ..SweepOptions::default()
        };
        let r = protograph_search(3..=3, 8, &opts).unwrap();
        let params: Vec<(u32, u32)> = r[0]
            .entries
            .iter()
            .map(|e| (e.params[0] as u32, e.params[1] as u32))
            .collect();
        for &(b1, b2) in &params {
            if (b1, b2) != (3 - b1, 3 - b2) {
                assert!(!params.contains(&(3 - b1, 3 - b2)));
            }
            assert_eq!(ProtographChain::canonical_segment(3, b1, b2), (b1, b2));
        }
    }
}
