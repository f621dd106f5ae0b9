//! Table reproduction and CSV/JSON emitters.
//!
//! Every CSV starts with `#`-prefixed provenance lines (tool, version and the
//! resolved run configuration) followed by a header row. Thresholds are
//! printed with 6 significant digits and rate losses with 3 decimals.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{bp_threshold, CoupledSystem, DeControls};
use crate::dynamics::SpeedPoint;
use crate::ensembles::{
    build_protograph_chain, rate_loss_delta, CoupledEnsembleSpec, SmoothingDistribution,
    TwoTypeSpec,
};
use crate::error::{Error, Result};
use crate::multitype::{ProtographSystem, TwoTypeSystem};
use crate::optimize::{EntryStatus, SweepResult};
use crate::reference::{self, RATE_LOSS_TOL, TABLE_LENGTH, THRESHOLD_TOL};

pub const TOOL_NAME: &str = "nucoupling";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tool identity and the resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Resolved configuration, one `key = value` per line.
    pub config: String,
}

impl Provenance {
    pub fn new(config: impl Into<String>) -> Self {
        Provenance {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            config: config.into(),
        }
    }

    fn csv_preamble(&self) -> String {
        let mut s = format!("# {} {}\n", self.tool, self.version);
        for line in self.config.lines().filter(|l| !l.trim().is_empty()) {
            let _ = writeln!(s, "# {line}");
        }
        s
    }
}

/// `x` with `digits` significant digits in positional notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn fmt_threshold(x: f64) -> String {
    fmt_sig(x, 6)
}

pub fn fmt_rate_loss(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3}")
    } else {
        String::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableId::I => "I",
            TableId::II => "II",
            TableId::III => "III",
            TableId::IV => "IV",
        })
    }
}

impl FromStr for TableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(TableId::I),
            "II" | "2" => Ok(TableId::II),
            "III" | "3" => Ok(TableId::III),
            "IV" | "4" => Ok(TableId::IV),
            other => Err(Error::Config(format!(
                "unknown table '{other}', expected one of I, II, III, IV"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    Threshold,
    RateLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub row: String,
    pub column: String,
    pub kind: CellKind,
    pub computed: f64,
    pub published: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: TableId,
    pub tol: f64,
    pub cells: Vec<TableCell>,
}

impl TableReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn max_deviation(&self, kind: CellKind) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.deviation)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self, prov: &Provenance) -> String {
        let mut s = prov.csv_preamble();
        s.push_str("row,column,computed,published,deviation,tolerance,pass\n");
        for c in &self.cells {
            let fmt = match c.kind {
                CellKind::Threshold => fmt_threshold,
                CellKind::RateLoss => fmt_rate_loss,
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{:.2e},{:.0e},{}",
                c.row,
                c.column,
                fmt(c.computed),
                fmt(c.published),
                c.deviation,
                c.tolerance,
                c.pass
            );
        }
        s
    }
}

enum Job {
    Coupled(CoupledEnsembleSpec),
    TwoType(TwoTypeSpec),
    Protograph(u32, u32, u32),
    Value(f64),
}

struct Pending {
    row: String,
    column: &'static str,
    kind: CellKind,
    published: f64,
    job: Job,
}

fn coupled(dv: u32, nu: Vec<f64>) -> Result<Job> {
    let nu = SmoothingDistribution::new(nu)?;
    Ok(Job::Coupled(CoupledEnsembleSpec::new(
        dv,
        2 * dv,
        nu,
        TABLE_LENGTH,
    )?))
}

fn table_jobs(id: TableId) -> Result<Vec<Pending>> {
    let mut jobs = Vec::new();
    let mut push = |row: String, column, kind, published, job| {
        jobs.push(Pending {
            row,
            column,
            kind,
            published,
            job,
        })
    };
    use CellKind::*;
    match id {
        TableId::I => {
            for r in &reference::TABLE_I {
                let row = format!("dv={}", r.dv);
                let a = r.alpha_star;
                push(row.clone(), "bp_uncoupled", Threshold, r.bp_uncoupled, coupled(r.dv, vec![0.0, 1.0])?);
                push(row.clone(), "bp_alpha_half", Threshold, r.bp_uniform, coupled(r.dv, vec![0.5, 0.5])?);
                push(row, "bp_alpha_star", Threshold, r.bp_optimized, coupled(r.dv, vec![a, 1.0 - a])?);
            }
        }
        TableId::II => {
            for r in &reference::TABLE_II {
                let row = format!("dv={}", r.dv);
                let third = 1.0 / 3.0;
                let uniform = SmoothingDistribution::uniform(3)?;
                let star = SmoothingDistribution::three_point(r.nu1, r.nu2)?;
                push(row.clone(), "bp_uniform", Threshold, r.bp_uniform, coupled(r.dv, vec![third; 3])?);
                push(row.clone(), "bp_nu_star", Threshold, r.bp_optimized, coupled(r.dv, star.weights().to_vec())?);
                let du = rate_loss_delta(r.dv, 2 * r.dv, &uniform);
                let ds = rate_loss_delta(r.dv, 2 * r.dv, &star);
                push(row.clone(), "delta_uniform", RateLoss, r.delta_uniform, Job::Value(du));
                push(row, "delta_nu_star", RateLoss, r.delta_optimized, Job::Value(ds));
            }
        }
        TableId::III => {
            for r in &reference::TABLE_III {
                let spec = TwoTypeSpec::new(r.dv, r.alpha_upper, r.alpha_lower, TABLE_LENGTH)?;
                push(format!("dv={}", r.dv), "bp", Threshold, r.bp, Job::TwoType(spec));
            }
        }
        TableId::IV => {
            for r in &reference::TABLE_IV {
                push(
                    format!("({},{},{})", r.dv, r.b1, r.b2),
                    "bp",
                    Threshold,
                    r.bp,
                    Job::Protograph(r.dv, r.b1, r.b2),
                );
            }
        }
    }
    Ok(jobs)
}

/// Recomputes every numeric cell of a published table at `tol` and compares
/// it with the reference value. Cells are evaluated in parallel and returned
/// in table order.
pub fn reproduce_table(id: TableId, tol: f64, controls: &DeControls) -> Result<TableReport> {
    let jobs = table_jobs(id)?;
    let cells = jobs
        .into_par_iter()
        .map(|p| {
            let computed = match &p.job {
                Job::Coupled(spec) => {
                    bp_threshold(&CoupledSystem::new(spec.clone()), tol, controls)?.threshold
                }
                Job::TwoType(spec) => bp_threshold(&TwoTypeSystem::new(*spec), tol, controls)?.threshold,
                Job::Protograph(dv, b1, b2) => {
                    let chain = build_protograph_chain(*dv, *b1, *b2, TABLE_LENGTH)?;
                    bp_threshold(&ProtographSystem::new(chain), tol, controls)?.threshold
                }
                Job::Value(v) => *v,
            };
            let tolerance = match p.kind {
                CellKind::Threshold => THRESHOLD_TOL,
                CellKind::RateLoss => RATE_LOSS_TOL,
            };
            let deviation = (computed - p.published).abs();
            Ok(TableCell {
                row: p.row,
                column: p.column.into(),
                kind: p.kind,
                computed,
                published: p.published,
                deviation,
                tolerance,
                pass: deviation <= tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport {
        table: id,
        tol,
        cells,
    })
}

/// One CSV row per sweep entry: parameters, threshold, bracket width, rate
/// loss, whether the point came from refinement, and status.
pub fn sweep_csv(result: &SweepResult, prov: &Provenance) -> String {
    let mut s = prov.csv_preamble();
    for name in &result.param_names {
        s.push_str(name);
        s.push(',');
    }
    s.push_str("threshold,bracket_width,rate_loss,refined,status\n");
    for e in &result.entries {
        for p in &e.params {
            let _ = write!(s, "{},", fmt_sig(*p, 6));
        }
        let status = match &e.status {
            EntryStatus::Ok => "ok".to_string(),
            EntryStatus::Failed(m) => format!("failed: {}", m.replace(',', ";")),
        };
        let _ = writeln!(
            s,
            "{},{:.1e},{},{},{}",
            e.threshold.map(fmt_threshold).unwrap_or_default(),
            e.bracket_width,
            fmt_rate_loss(e.rate_loss),
            e.refined,
            status
        );
    }
    s
}

/// Combined CSV of per-`dv` protograph searches: `dv,b1,b2,threshold,
/// bracket_width,best,status`, one row per segment class.
pub fn protograph_csv(results: &[SweepResult], prov: &Provenance) -> String {
    let mut s = prov.csv_preamble();
    s.push_str("dv,b1,b2,threshold,bracket_width,best,status\n");
    for r in results {
        let best = r.best.as_ref().map(|b| b.params.clone());
        for e in &r.entries {
            let status = match &e.status {
                EntryStatus::Ok => "ok".to_string(),
                EntryStatus::Failed(m) => format!("failed: {}", m.replace(',', ";")),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{:.1e},{},{}",
                r.dv,
                e.params[0],
                e.params[1],
                e.threshold.map(fmt_threshold).unwrap_or_default(),
                e.bracket_width,
                best.as_deref() == Some(&e.params[..]),
                status
            );
        }
    }
    s
}

/// JSON summary of a sweep: the selected point, its coarse-grid
/// counterpart, grid metadata and provenance. Entries go to the CSV.
pub fn sweep_summary(result: &SweepResult, prov: &Provenance) -> serde_json::Value {
    serde_json::json!({
        "provenance": prov,
        "family": result.family,
        "param_names": result.param_names,
        "dv": result.dv,
        "dc": result.dc,
        "L": result.length,
        "grid_step": result.grid_step,
        "options": result.options,
        "grid_points": result.entries.len(),
        "failed_points": result.entries.iter().filter(|e| e.status != EntryStatus::Ok).count(),
        "coarse_best": result.coarse_best,
        "best": result.best,
    })
}

/// A value on a `(param, epsilon)` grid; `None` marks a missing value,
/// e.g. no travelling wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridValue {
    pub param: Option<f64>,
    pub epsilon: Option<f64>,
    pub value: Option<f64>,
}

impl From<SpeedPoint> for GridValue {
    fn from(p: SpeedPoint) -> Self {
        GridValue {
            param: Some(p.param),
            epsilon: Some(p.epsilon),
            value: p.v,
        }
    }
}

/// CSV with header `param,epsilon,value,status`. `missing` names the status
/// of rows without a value.
pub fn grid_csv(points: &[GridValue], missing: &str, prov: &Provenance) -> String {
    let mut s = prov.csv_preamble();
    s.push_str("param,epsilon,value,status\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            p.param.map(|x| fmt_sig(x, 6)).unwrap_or_default(),
            p.epsilon.map(fmt_threshold).unwrap_or_default(),
            p.value.map(|v| fmt_sig(v, 6)).unwrap_or_default(),
            if p.value.is_some() { "ok" } else { missing }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_threshold(0.48815123), "0.488151");
        assert_eq!(fmt_threshold(0.0123456789), "0.0123457");
        assert_eq!(fmt_threshold(1.0), "1.00000");
        assert_eq!(fmt_threshold(0.0), "0");
        assert_eq!(fmt_rate_loss(0.91098), "0.911");
    }

    #[test]
    fn table_ids_parse() {
        assert_eq!("iii".parse::<TableId>().unwrap(), TableId::III);
        assert_eq!("4".parse::<TableId>().unwrap(), TableId::IV);
        assert!("V".parse::<TableId>().is_err());
    }

    #[test]
    fn preamble_embeds_config() {
        let p = Provenance::new("dv = 3\nL = 100\n");
        let csv = grid_csv(
            &[GridValue {
                param: Some(0.3),
                epsilon: Some(0.45),
                value: None,
            }],
            "no-wave",
            &p,
        );
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# nucoupling "));
        assert_eq!(lines[1], "# dv = 3");
        assert_eq!(lines[3], "param,epsilon,value,status");
        assert_eq!(lines[4], "0.300000,0.450000,,no-wave");
    }

    #[test]
    fn table_two_rate_losses_need_no_de() {
        let jobs = table_jobs(TableId::II).unwrap();
        assert_eq!(jobs.len(), 32);
        let values = jobs
            .iter()
            .filter(|j| j.kind == CellKind::RateLoss)
            .count();
        assert_eq!(values, 16);
    }
}
