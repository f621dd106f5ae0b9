//! Structural properties of the DE engine, the rate loss and the search
//! drivers. No published numbers are used here.

use nucoupling::de::{
    bisect_threshold, bp_threshold, de_step, refine_threshold, run_de, CoupledSystem, DeControls,
    ErasureProfile,
};
use nucoupling::dynamics::{
    estimate_speed, windowed_threshold, SpeedOptions, WindowConfig,
};
use nucoupling::ensembles::{
    build_protograph_chain, rate_loss_delta, CoupledEnsembleSpec, SmoothingDistribution,
    TwoTypeSpec,
};
use nucoupling::multitype::{ProtographSystem, TwoTypeSystem};
use nucoupling::optimize::{optimize_alpha, SweepOptions};
use proptest::prelude::*;

fn nu_strategy(w: usize) -> impl Strategy<Value = SmoothingDistribution> {
    prop::collection::vec(0.0f64..1.0, w).prop_filter_map("zero mass", move |raw| {
        let s: f64 = raw.iter().sum();
        if s < 1e-3 {
            return None;
        }
        let mut v: Vec<f64> = raw.iter().map(|x| x / s).collect();
        // Put the rounding residue on the last entry so the sum is exact.
        let head: f64 = v[..w - 1].iter().sum();
        v[w - 1] = (1.0 - head).max(0.0);
        SmoothingDistribution::new(v).ok()
    })
}

fn spec_strategy() -> impl Strategy<Value = CoupledEnsembleSpec> {
    (2u32..=6, 1u32..=6, 2usize..=4, 4usize..=16).prop_flat_map(|(dv, extra, w, l)| {
        nu_strategy(w).prop_map(move |nu| {
            CoupledEnsembleSpec::new(dv, dv + extra, nu, l.max(w)).unwrap()
        })
    })
}

/// The classical uniformly coupled update, written directly from its
/// definition with reads outside `[1, L]` equal to 0.
fn classical_oracle(x: &[f64], dv: u32, dc: u32, w: usize, len: usize, eps: f64) -> Vec<f64> {
    let at = |z: i64| -> f64 {
        if z >= 1 && z <= len as i64 {
            x[(z - 1) as usize]
        } else {
            0.0
        }
    };
    let mut out = vec![0.0; x.len()];
    for z in 1..=len as i64 {
        let mut outer = 0.0;
        for i in 0..w as i64 {
            let mut inner = 0.0;
            for j in 0..w as i64 {
                inner += at(z + i - j);
            }
            outer += (1.0 - inner / w as f64).powi(dc as i32 - 1);
        }
        out[(z - 1) as usize] = eps * (1.0 - outer / w as f64).powi(dv as i32 - 1);
    }
    out
}

fn profile(values: Vec<f64>, eps: f64) -> ErasureProfile {
    ErasureProfile {
        values,
        epsilon: eps,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn de_step_is_monotone_in_the_state(
        spec in spec_strategy(),
        eps in 0.0f64..=1.0,
        base in prop::collection::vec(0.0f64..=1.0, 19),
        bump in prop::collection::vec(0.0f64..=0.5, 19),
    ) {
        let n = spec.length + spec.width() - 1;
        let lo: Vec<f64> = base[..n].to_vec();
        let hi: Vec<f64> = lo.iter().zip(&bump).map(|(a, b)| (a + b).min(1.0)).collect();
        let a = de_step(&profile(lo, eps), &spec).unwrap();
        let b = de_step(&profile(hi, eps), &spec).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(x <= y, "{x} > {y}");
        }
    }

    #[test]
    fn de_step_is_monotone_in_epsilon(
        spec in spec_strategy(),
        e1 in 0.0f64..=1.0,
        e2 in 0.0f64..=1.0,
        base in prop::collection::vec(0.0f64..=1.0, 19),
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let n = spec.length + spec.width() - 1;
        let a = de_step(&profile(base[..n].to_vec(), lo), &spec).unwrap();
        let b = de_step(&profile(base[..n].to_vec(), hi), &spec).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn de_step_preserves_range(
        spec in spec_strategy(),
        eps in 0.0f64..=1.0,
        base in prop::collection::vec(0.0f64..=1.0, 19),
    ) {
        let n = spec.length + spec.width() - 1;
        let out = de_step(&profile(base[..n].to_vec(), eps), &spec).unwrap();
        for &v in &out.values {
            prop_assert!((0.0..=eps).contains(&v), "{v} outside [0, {eps}]");
        }
    }

    #[test]
    fn uniform_smoothing_matches_classical_update(
        dv in 2u32..=8,
        extra in 1u32..=8,
        w in 2usize..=5,
        len in 5usize..=20,
        eps in 0.0f64..=1.0,
        base in prop::collection::vec(0.0f64..=1.0, 24),
    ) {
        let dc = dv + extra;
        let spec = CoupledEnsembleSpec::new(
            dv, dc, SmoothingDistribution::uniform(w).unwrap(), len,
        ).unwrap();
        let n = len + w - 1;
        let x = base[..n].to_vec();
        let ours = de_step(&profile(x.clone(), eps), &spec).unwrap();
        let oracle = classical_oracle(&x, dv, dc, w, len, eps);
        for (a, b) in ours.values.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn rate_loss_is_reversal_invariant(
        dv in 2u32..=10,
        extra in 1u32..=10,
        nu in (2usize..=6).prop_flat_map(nu_strategy),
    ) {
        let dc = dv + extra;
        let a = rate_loss_delta(dv, dc, &nu);
        let b = rate_loss_delta(dv, dc, &nu.reversed());
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn rate_loss_peaks_at_symmetric_designs(
        dv in 2u32..=10,
        extra in 1u32..=10,
        alpha in 0.0f64..=1.0,
        nu3 in nu_strategy(3),
    ) {
        let dc = dv + extra;
        let half = rate_loss_delta(dv, dc, &SmoothingDistribution::two_point(0.5).unwrap());
        let at = rate_loss_delta(dv, dc, &SmoothingDistribution::two_point(alpha).unwrap());
        prop_assert!(at <= half + 1e-12);
        let ends = SmoothingDistribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        prop_assert!(rate_loss_delta(dv, dc, &nu3) <= rate_loss_delta(dv, dc, &ends) + 1e-12);
    }

    #[test]
    fn bisection_probes_are_ordered(spec in spec_strategy()) {
        let r = bp_threshold(&CoupledSystem::new(spec), 1e-3, &DeControls::default()).unwrap();
        prop_assert!(r.lower() < r.upper());
        prop_assert!(r.upper() - r.lower() <= 1e-3);
        for p in &r.probes {
            if p.converged {
                prop_assert!(p.epsilon <= r.lower());
            } else {
                prop_assert!(p.epsilon >= r.upper());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn threshold_is_reversal_symmetric(spec in spec_strategy()) {
        let rev = CoupledEnsembleSpec::new(spec.dv, spec.dc, spec.nu.reversed(), spec.length).unwrap();
        let c = DeControls::default();
        let a = bp_threshold(&CoupledSystem::new(spec), 1e-4, &c).unwrap();
        let b = bp_threshold(&CoupledSystem::new(rev), 1e-4, &c).unwrap();
        prop_assert!((a.threshold - b.threshold).abs() <= 1e-4);
    }

    #[test]
    fn equal_two_type_parameters_reduce_to_single_type(
        dv in 3u32..=7,
        alpha in 0.05f64..=0.95,
    ) {
        let len = 16;
        let c = DeControls::default();
        let two = TwoTypeSystem::new(TwoTypeSpec::new(dv, alpha, alpha, len).unwrap());
        let one = CoupledSystem::new(CoupledEnsembleSpec::half_rate_alpha(dv, alpha, len).unwrap());
        let a = bp_threshold(&two, 1e-5, &c).unwrap().threshold;
        let b = bp_threshold(&one, 1e-5, &c).unwrap().threshold;
        prop_assert!((a - b).abs() <= 1e-4, "{a} vs {b}");
    }

    #[test]
    fn protograph_orbit_has_identical_dynamics(
        dv in 2u32..=8,
        b1f in 0.0f64..=1.0,
        b2f in 0.0f64..=1.0,
        eps in 0.2f64..=0.6,
    ) {
        let b1 = (b1f * dv as f64).round() as u32;
        let b2 = (b2f * dv as f64).round() as u32;
        let chain = build_protograph_chain(dv, b1, b2, 12).unwrap();
        let c = DeControls { delta_conv: 1e-300, max_iters: 40 };
        let summary = |ch| {
            let sys = ProtographSystem::new(ch);
            let r = run_de(&sys, eps, &c).unwrap();
            let v = &r.final_profile.values;
            (v.iter().sum::<f64>(), v.iter().cloned().fold(0.0, f64::max))
        };
        let base = summary(chain.clone());
        for other in [chain.reflected(), chain.relabeled(), chain.reflected().relabeled()] {
            let s = summary(other);
            prop_assert!((s.0 - base.0).abs() <= 1e-10 && (s.1 - base.1).abs() <= 1e-10);
        }
    }
}

#[test]
fn swapped_two_type_labels_share_threshold() {
    let c = DeControls::default();
    let a = TwoTypeSystem::new(TwoTypeSpec::new(5, 0.3, 0.4, 20).unwrap());
    let b = TwoTypeSystem::new(TwoTypeSpec::new(5, 0.4, 0.3, 20).unwrap());
    let r = TwoTypeSystem::new(TwoTypeSpec::new(5, 0.7, 0.6, 20).unwrap());
    let ta = bp_threshold(&a, 1e-6, &c).unwrap().threshold;
    for sys in [b, r] {
        let t = bp_threshold(&sys, 1e-6, &c).unwrap().threshold;
        assert!((t - ta).abs() <= 1e-6, "{t} vs {ta}");
    }
}

#[test]
fn refined_bisection_equals_direct_bisection() {
    let sys = CoupledSystem::new(CoupledEnsembleSpec::half_rate_alpha(4, 0.4, 20).unwrap());
    let c = DeControls::default();
    let feasible = |e: f64| Ok(run_de(&sys, e, &c)?.converged);
    let coarse = bisect_threshold(1e-3, feasible).unwrap();
    let refined = refine_threshold(&coarse, 1e-7, feasible).unwrap();
    let direct = bisect_threshold(1e-7, feasible).unwrap();
    assert_eq!(refined, direct);
}

fn speed(alpha: f64, eps: f64, d: usize) -> Option<f64> {
    let sys = CoupledSystem::new(CoupledEnsembleSpec::half_rate_alpha(5, alpha, 100).unwrap());
    let opts = SpeedOptions {
        displacement: d,
        ..SpeedOptions::default()
    };
    estimate_speed(&sys, eps, &opts).ok().map(|s| s.v)
}

#[test]
fn wave_speed_does_not_increase_with_epsilon() {
    for alpha in [0.3, 0.35, 0.4] {
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let eps = 0.35 + 0.02 * k as f64;
            let v = speed(alpha, eps, 10).unwrap_or_else(|| panic!("no wave at {alpha}, {eps}"));
            assert!(v <= prev, "alpha {alpha}: v({eps}) = {v} > {prev}");
            prev = v;
        }
    }
}

#[test]
fn wave_speed_is_insensitive_to_displacement() {
    for (alpha, eps) in [(0.3, 0.4), (0.35, 0.45), (0.4, 0.47)] {
        let v10 = speed(alpha, eps, 10).unwrap();
        let v20 = speed(alpha, eps, 20).unwrap();
        assert!((v10 - v20).abs() <= 0.1 * v20, "{v10} vs {v20}");
    }
}

#[test]
fn wave_slows_down_near_the_threshold() {
    let alpha = 0.35;
    let spec = CoupledEnsembleSpec::half_rate_alpha(5, alpha, 100).unwrap();
    let thr = bp_threshold(&CoupledSystem::new(spec), 1e-5, &DeControls::default())
        .unwrap()
        .lower();
    let fast = speed(alpha, 0.40, 10).unwrap();
    let slow = speed(alpha, thr - 1e-4, 10).unwrap();
    assert!(slow < 0.25 * fast, "{slow} vs {fast}");
}

#[test]
fn windowed_thresholds_are_ordered() {
    let c = DeControls::default();
    let tol = 1e-4;
    for alpha in [0.3, 0.5] {
        let sys = CoupledSystem::new(CoupledEnsembleSpec::half_rate_alpha(5, alpha, 40).unwrap());
        let bp = bp_threshold(&sys, tol, &c).unwrap().threshold;
        let wd = |w, i| {
            windowed_threshold(&sys, &WindowConfig::new(w, i).unwrap(), tol, &c)
                .unwrap()
                .threshold
        };
        let grid: Vec<Vec<f64>> = [4usize, 8, 16]
            .iter()
            .map(|&w| [2usize, 5, 12].iter().map(|&i| wd(w, i)).collect())
            .collect();
        for (a, row) in grid.iter().enumerate() {
            for (b, &t) in row.iter().enumerate() {
                assert!(t <= bp + tol, "alpha {alpha}: {t} > {bp}");
                if a + 1 < grid.len() {
                    assert!(t <= grid[a + 1][b] + tol);
                }
                if b + 1 < row.len() {
                    assert!(t <= row[b + 1] + tol);
                }
            }
        }
    }
}

#[test]
fn sweeps_are_deterministic_and_refinement_only_helps() {
    let opts = SweepOptions {
        tol: 1e-3,
        final_tol: 1e-4,
        tie_floor: 1e-6,
        ..SweepOptions::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| optimize_alpha(4, 8, 20, 0.05, &opts).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let coarse = a.coarse_best.unwrap();
    let best = a.best.unwrap();
    assert!(best.threshold >= coarse.threshold - opts.tol);
    // The recorded optimum is reproducible from its parameters alone.
    let spec = CoupledEnsembleSpec::half_rate_alpha(4, best.params[0], 20).unwrap();
    let again = bp_threshold(&CoupledSystem::new(spec), opts.final_tol, &opts.controls).unwrap();
    assert!((again.threshold - best.threshold).abs() <= opts.final_tol);
}

#[test]
fn sweep_max_dominates_endpoints() {
    let opts = SweepOptions {
        tol: 1e-3,
        final_tol: 1e-3,
        tie_floor: 1e-5,
        refine: false,
        ..SweepOptions::default()
    };
    let r = optimize_alpha(3, 6, 16, 0.1, &opts).unwrap();
    let best = r.best.unwrap().threshold;
    let first = r.entries.first().unwrap().threshold.unwrap();
    let last = r.entries.last().unwrap().threshold.unwrap();
    assert!(best >= first - 1e-3 && best >= last - 1e-3);
    assert!(r.entries.iter().all(|e| e.threshold.unwrap() <= best + 1e-3));
}
