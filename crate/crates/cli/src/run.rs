//! Command dispatch: resolves a [`RunConfig`] into library calls and writes
//! the artifacts.

use std::fs;
use std::path::Path;

use nucoupling::de::{bp_threshold, CoupledSystem, DeControls, DeSystem};
use nucoupling::dynamics::{
    estimate_speed, speed_contours, windowed_threshold, SpeedOptions, WindowConfig,
};
use nucoupling::ensembles::{
    build_protograph_chain, CoupledEnsembleSpec, SmoothingDistribution, TwoTypeSpec,
};
use nucoupling::multitype::{ProtographSystem, TwoTypeSystem};
use nucoupling::optimize::{
    optimize_alpha, optimize_nu3, optimize_two_type, protograph_search, SweepOptions, SweepResult,
};
use nucoupling::reports::{
    grid_csv, protograph_csv, reproduce_table, sweep_csv, sweep_summary, GridValue, Provenance,
    TableId,
};
use nucoupling::Error;
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig};

/// Length used when `L` is not given.
pub const DEFAULT_LENGTH: usize = 100;
const DEFAULT_ALPHA_STEP: f64 = 0.005;
const DEFAULT_NU3_STEP: f64 = 1.0 / 38.0;
const DEFAULT_TWO_TYPE_STEP: f64 = 0.01;

#[derive(Debug)]
pub enum Failure {
    /// Exit status 2.
    Config(String),
    /// Exit status 3.
    Compute(String),
    /// A reproduced table exceeded its tolerance; exit status 1.
    Tolerance(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Tolerance(_) => 1,
            Failure::Config(_) => 2,
            Failure::Compute(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Compute(m) | Failure::Tolerance(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::LengthMismatch { .. } | Error::Config(_) => {
                Failure::Config(e.to_string())
            }
            Error::NonFinite { .. } | Error::NoWave(_) => Failure::Compute(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn need<T: Clone>(v: &Option<T>, key: &str, cmd: &str) -> Outcome<T> {
    v.clone()
        .ok_or_else(|| Failure::Config(format!("{cmd} requires '{key}' (flag --{key} or config key)")))
}

fn positive(name: &str, v: Option<f64>) -> Outcome<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Failure::Config(format!(
            "{name} must be a positive number, got {x}"
        ))),
        _ => Ok(()),
    }
}

fn positive_int(name: &str, v: Option<usize>) -> Outcome<()> {
    match v {
        Some(0) => Err(Failure::Config(format!("{name} must be positive"))),
        _ => Ok(()),
    }
}

fn validate(cfg: &RunConfig) -> Outcome<()> {
    positive("tol", cfg.tol)?;
    positive("sweep_tol", cfg.sweep_tol)?;
    positive("tie_floor", cfg.tie_floor)?;
    positive("delta_conv", cfg.delta_conv)?;
    positive("grid_step", cfg.grid_step)?;
    positive_int("max_iters", cfg.max_iters)?;
    positive_int("D", cfg.displacement)?;
    positive_int("L", cfg.length)?;
    positive_int("window", cfg.window)?;
    positive_int("iterations", cfg.iterations)?;
    Ok(())
}

fn controls(cfg: &RunConfig) -> DeControls {
    let d = DeControls::default();
    DeControls {
        delta_conv: cfg.delta_conv.unwrap_or(d.delta_conv),
        max_iters: cfg.max_iters.unwrap_or(d.max_iters),
    }
}

fn tol(cfg: &RunConfig) -> f64 {
    cfg.tol.unwrap_or(nucoupling::de::DEFAULT_TOL)
}

fn length(cfg: &RunConfig) -> usize {
    cfg.length.unwrap_or(DEFAULT_LENGTH)
}

fn dc_of(cfg: &RunConfig, dv: u32) -> u32 {
    cfg.dc.unwrap_or(2 * dv)
}

fn sweep_options(cfg: &RunConfig) -> SweepOptions {
    let d = SweepOptions::default();
    SweepOptions {
        tol: cfg.sweep_tol.unwrap_or(d.tol),
        final_tol: cfg.tol.unwrap_or(d.final_tol),
        tie_floor: cfg.tie_floor.unwrap_or(d.tie_floor),
        tie_break: d.tie_break,
        refine: !cfg.no_refine.unwrap_or(false),
        controls: controls(cfg),
    }
}

/// The ensemble selected by the config: a protograph when `b1`/`b2` are
/// given, a two-type ensemble when `alpha_upper`/`alpha_lower` are given,
/// otherwise a random ensemble with smoothing distribution `nu`.
enum Ensemble {
    Coupled(CoupledEnsembleSpec),
    TwoType(TwoTypeSpec),
    Protograph(ProtographSystem),
}

impl Ensemble {
    fn resolve(cfg: &RunConfig, cmd: &str) -> Outcome<Self> {
        let dv = need(&cfg.dv, "dv", cmd)?;
        let len = length(cfg);
        if cfg.b1.is_some() || cfg.b2.is_some() {
            let b1 = need(&cfg.b1, "b1", cmd)?;
            let b2 = need(&cfg.b2, "b2", cmd)?;
            let chain = build_protograph_chain(dv, b1, b2, len)?;
            return Ok(Ensemble::Protograph(ProtographSystem::new(chain)));
        }
        if cfg.alpha_upper.is_some() || cfg.alpha_lower.is_some() {
            let au = need(&cfg.alpha_upper, "alpha-upper", cmd)?;
            let al = need(&cfg.alpha_lower, "alpha-lower", cmd)?;
            return Ok(Ensemble::TwoType(TwoTypeSpec::new(dv, au, al, len)?));
        }
        let nu = SmoothingDistribution::new(need(&cfg.nu, "nu", cmd)?)?;
        Ok(Ensemble::Coupled(CoupledEnsembleSpec::new(
            dv,
            dc_of(cfg, dv),
            nu,
            len,
        )?))
    }

    fn system(&self) -> Box<dyn DeSystem + '_> {
        match self {
            Ensemble::Coupled(s) => Box::new(CoupledSystem::new(s.clone())),
            Ensemble::TwoType(s) => Box::new(TwoTypeSystem::new(*s)),
            Ensemble::Protograph(p) => Box::new(p),
        }
    }

    fn describe(&self) -> Value {
        match self {
            Ensemble::Coupled(s) => json!({
                "kind": "random",
                "dv": s.dv, "dc": s.dc, "nu": s.nu.weights(), "L": s.length,
                "rate_loss": s.rate_loss(), "design_rate": s.design_rate(),
            }),
            Ensemble::TwoType(s) => json!({
                "kind": "two-type",
                "dv": s.dv, "dc": s.dc(), "alpha_upper": s.alpha_upper,
                "alpha_lower": s.alpha_lower, "L": s.length,
            }),
            Ensemble::Protograph(p) => {
                let c = p.chain();
                json!({
                    "kind": "protograph",
                    "dv": c.dv, "b1": c.b1, "b2": c.b2, "L": c.length,
                    "design_rate": c.design_rate(),
                })
            }
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Runs one fully resolved configuration.
pub fn run(cfg: &RunConfig) -> Outcome<()> {
    validate(cfg)?;
    let command = cfg.command.ok_or_else(|| {
        Failure::Config("no command given; pass one as the first argument or set 'command' in the config file".into())
    })?;
    let prov = Provenance::new(cfg.to_toml());
    let out = cfg.out.as_deref();
    match command {
        Command::Threshold => {
            let ens = Ensemble::resolve(cfg, "threshold")?;
            let r = bp_threshold(&*ens.system(), tol(cfg), &controls(cfg))?;
            let v = json!({
                "provenance": prov,
                "ensemble": ens.describe(),
                "threshold": r.threshold,
                "lower": r.lower(),
                "upper": r.upper(),
                "tol": tol(cfg),
                "runs": r.runs,
            });
            write_out(out, &json_text(&v))
        }
        Command::RateLoss => {
            let dv = need(&cfg.dv, "dv", "rate-loss")?;
            let nu = SmoothingDistribution::new(need(&cfg.nu, "nu", "rate-loss")?)?;
            let dc = dc_of(cfg, dv);
            let spec = CoupledEnsembleSpec::new(dv, dc, nu, length(cfg).max(3))?;
            let mut v = json!({
                "provenance": prov,
                "dv": dv, "dc": dc, "nu": spec.nu.weights(),
                "rate_loss": spec.rate_loss(),
            });
            if cfg.length.is_some() {
                v["L"] = json!(spec.length);
                v["design_rate"] = json!(spec.design_rate());
            }
            write_out(out, &json_text(&v))
        }
        Command::Speed => {
            let ens = Ensemble::resolve(cfg, "speed")?;
            let eps = need(&cfg.epsilon, "epsilon", "speed")?;
            let v = match estimate_speed(&*ens.system(), eps, &speed_options(cfg)) {
                Ok(s) => json!({
                    "provenance": prov, "ensemble": ens.describe(), "epsilon": eps,
                    "status": "ok", "v": s.v, "iterations": s.iterations,
                    "burn_in": s.burn_in, "displacement": s.displacement, "front": s.front,
                }),
                Err(Error::NoWave(reason)) => json!({
                    "provenance": prov, "ensemble": ens.describe(), "epsilon": eps,
                    "status": "no-wave", "v": null, "reason": reason,
                }),
                Err(e) => return Err(e.into()),
            };
            write_out(out, &json_text(&v))
        }
        Command::Contours => {
            let eps = need(&cfg.epsilons, "epsilons", "contours")?;
            let opts = speed_options(cfg);
            let points: Vec<GridValue> = match &cfg.alphas {
                Some(alphas) => {
                    let dv = need(&cfg.dv, "dv", "contours")?;
                    let (dc, len) = (dc_of(cfg, dv), length(cfg));
                    let family = |a: f64| {
                        let nu = SmoothingDistribution::two_point(a)?;
                        Ok(CoupledSystem::new(CoupledEnsembleSpec::new(dv, dc, nu, len)?))
                    };
                    speed_contours(family, alphas, &eps, &opts)?
                        .into_iter()
                        .map(GridValue::from)
                        .collect()
                }
                None => {
                    let ens = Ensemble::resolve(cfg, "contours")?;
                    let sys = ens.system();
                    let family = |_: f64| Ok(&*sys);
                    speed_contours(family, &[0.0], &eps, &opts)?
                        .into_iter()
                        .map(|p| GridValue {
                            param: None,
                            ..GridValue::from(p)
                        })
                        .collect()
                }
            };
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => write_out(out, &grid_csv(&points, "no-wave", &prov)),
                Format::Json => write_out(out, &json_text(&json!({"provenance": prov, "points": points}))),
            }
        }
        Command::Windowed => {
            let wcfg = WindowConfig::new(
                need(&cfg.window, "window", "windowed")?,
                need(&cfg.iterations, "iterations", "windowed")?,
            )?;
            let ctl = controls(cfg);
            match &cfg.alphas {
                Some(alphas) => {
                    let dv = need(&cfg.dv, "dv", "windowed")?;
                    let (dc, len) = (dc_of(cfg, dv), length(cfg));
                    let points = alphas
                        .iter()
                        .map(|&a| {
                            let nu = SmoothingDistribution::two_point(a)?;
                            let sys = CoupledSystem::new(CoupledEnsembleSpec::new(dv, dc, nu, len)?);
                            Ok((a, sys))
                        })
                        .collect::<nucoupling::Result<Vec<_>>>()?;
                    use rayon::prelude::*;
                    let points = points
                        .par_iter()
                        .map(|(a, sys)| {
                            let r = windowed_threshold(sys, &wcfg, tol(cfg), &ctl)?;
                            Ok(GridValue {
                                param: Some(*a),
                                epsilon: None,
                                value: Some(r.threshold),
                            })
                        })
                        .collect::<nucoupling::Result<Vec<_>>>()?;
                    match cfg.format.unwrap_or(Format::Csv) {
                        Format::Csv => write_out(out, &grid_csv(&points, "failed", &prov)),
                        Format::Json => write_out(out, &json_text(&json!({"provenance": prov, "points": points}))),
                    }
                }
                None => {
                    let ens = Ensemble::resolve(cfg, "windowed")?;
                    let r = windowed_threshold(&*ens.system(), &wcfg, tol(cfg), &ctl)?;
                    let v = json!({
                        "provenance": prov, "ensemble": ens.describe(),
                        "window": wcfg.window, "iterations": wcfg.iterations,
                        "threshold": r.threshold, "lower": r.lower(), "upper": r.upper(),
                    });
                    write_out(out, &json_text(&v))
                }
            }
        }
        Command::OptimizeAlpha => {
            let dv = need(&cfg.dv, "dv", "optimize-alpha")?;
            let step = cfg.grid_step.unwrap_or(DEFAULT_ALPHA_STEP);
            let r = optimize_alpha(dv, dc_of(cfg, dv), length(cfg), step, &sweep_options(cfg))?;
            emit_sweep(cfg, &r, &prov)
        }
        Command::OptimizeNu3 => {
            let dv = need(&cfg.dv, "dv", "optimize-nu3")?;
            let step = cfg.grid_step.unwrap_or(DEFAULT_NU3_STEP);
            let r = optimize_nu3(dv, dc_of(cfg, dv), length(cfg), step, &sweep_options(cfg))?;
            emit_sweep(cfg, &r, &prov)
        }
        Command::OptimizeTwoType => {
            let dv = need(&cfg.dv, "dv", "optimize-two-type")?;
            let step = cfg.grid_step.unwrap_or(DEFAULT_TWO_TYPE_STEP);
            let r = optimize_two_type(dv, length(cfg), step, &sweep_options(cfg))?;
            emit_sweep(cfg, &r, &prov)
        }
        Command::ProtoSearch => {
            let (lo, hi) = match (cfg.dv_min, cfg.dv_max, cfg.dv) {
                (Some(a), Some(b), _) => (a, b),
                (None, None, Some(d)) => (d, d),
                (None, None, None) => (3, 18),
                _ => {
                    return Err(Failure::Config(
                        "proto-search needs both --dv-min and --dv-max, or --dv".into(),
                    ))
                }
            };
            if lo > hi {
                return Err(Failure::Config(format!("dv-min {lo} exceeds dv-max {hi}")));
            }
            let results = protograph_search(lo..=hi, length(cfg), &sweep_options(cfg))?;
            let summary = json!({
                "provenance": prov,
                "results": results.iter().map(|r| sweep_summary(r, &prov)).collect::<Vec<_>>(),
            });
            emit(cfg, &protograph_csv(&results, &prov), &summary)
        }
        Command::ReproduceTable => {
            let id: TableId = need(&cfg.table, "table", "reproduce-table")?.parse()?;
            let report = reproduce_table(id, tol(cfg), &controls(cfg))?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => write_out(out, &report.to_csv(&prov))?,
                Format::Json => write_out(out, &json_text(&json!({"provenance": prov, "report": report})))?,
            }
            if report.all_pass() {
                Ok(())
            } else {
                let bad = report.cells.iter().filter(|c| !c.pass).count();
                Err(Failure::Tolerance(format!(
                    "table {id}: {bad} cell(s) exceed the acceptance tolerance"
                )))
            }
        }
    }
}

fn speed_options(cfg: &RunConfig) -> SpeedOptions {
    let d = SpeedOptions::default();
    SpeedOptions {
        displacement: cfg.displacement.unwrap_or(d.displacement),
        extra_burn_in: cfg.extra_burn_in.unwrap_or(d.extra_burn_in),
        controls: controls(cfg),
    }
}

fn emit_sweep(cfg: &RunConfig, r: &SweepResult, prov: &Provenance) -> Outcome<()> {
    emit(cfg, &sweep_csv(r, prov), &sweep_summary(r, prov))
}

/// With `--out`, writes the CSV there and the JSON summary next to it
/// (`.json` extension); `--format json` writes only the summary. Without
/// `--out` the summary (or the CSV, for `--format csv`) goes to stdout.
fn emit(cfg: &RunConfig, csv: &str, summary: &Value) -> Outcome<()> {
    let text = json_text(summary);
    match (cfg.out.as_deref(), cfg.format) {
        (Some(p), Some(Format::Json)) => write_out(Some(p), &text),
        (Some(p), _) => {
            write_out(Some(p), csv)?;
            write_out(Some(&p.with_extension("json")), &text)
        }
        (None, Some(Format::Csv)) => write_out(None, csv),
        (None, _) => write_out(None, &text),
    }
}
