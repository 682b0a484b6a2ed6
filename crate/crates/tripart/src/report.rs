//! Solution documents, trace tables and sweep summaries.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tripart_core::coordinator::{AdmmConfig, AdmmOutcome, CombinedPlan, PlanMode, SweepRow, Trace};

use crate::io::{write_text, IoError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub agent: String,
    pub invest: f64,
    pub operate: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmSummary {
    pub iterations: usize,
    pub plan_iter: usize,
    /// `[ρ_gn, ρ_en, ρ_ehg, ρ_ehe]`
    pub rho: [f64; 4],
    pub eps_gas: f64,
    pub eps_elec: f64,
    pub mismatch_gas: f64,
    pub mismatch_elec: f64,
    pub pwl_error: f64,
    pub penalty_tolerance: f64,
}

/// Machine-readable result of one planning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub case: String,
    pub mode: PlanMode,
    pub status: String,
    pub costs: Vec<CostRow>,
    /// Sum of the `costs` rows, M$.
    pub total_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admm: Option<AdmmSummary>,
    pub plan: CombinedPlan,
}

fn row(agent: &str, c: tripart_core::cost::CostBreakdown) -> CostRow {
    CostRow {
        agent: agent.into(),
        invest: c.invest,
        operate: c.operate,
        total: c.total(),
    }
}

impl SolutionDocument {
    pub fn new(case: &str, status: &str, plan: CombinedPlan) -> Self {
        let costs = vec![
            row("gas", plan.gas.cost),
            row("electric", plan.electric.cost),
            row("ries", plan.ries.cost),
        ];
        let total_cost = costs.iter().map(|r| r.total).sum();
        Self {
            case: case.into(),
            mode: plan.mode,
            status: status.into(),
            costs,
            total_cost,
            admm: None,
            plan,
        }
    }

    pub fn from_admm(case: &str, outcome: &AdmmOutcome, config: &AdmmConfig) -> Self {
        let status = serde_json::to_value(outcome.status).expect("status serializes");
        let mut doc = Self::new(case, status.as_str().unwrap_or("unknown"), outcome.plan.clone());
        doc.admm = Some(AdmmSummary {
            iterations: outcome.iterations,
            plan_iter: outcome.plan_iter,
            rho: config.rho(),
            eps_gas: config.eps_gas,
            eps_elec: config.eps_elec,
            mismatch_gas: outcome.mismatch_gas,
            mismatch_elec: outcome.mismatch_elec,
            pwl_error: outcome.pwl_error,
            penalty_tolerance: outcome.penalty_tolerance(),
        });
        doc
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    /// Investment / operation / total per agent, M$.
    pub fn cost_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<10} {:>14} {:>14} {:>14}", "agent", "invest M$", "operate M$", "total M$");
        for r in &self.costs {
            let _ = writeln!(s, "{:<10} {:>14.6} {:>14.6} {:>14.6}", r.agent, r.invest, r.operate, r.total);
        }
        let _ = writeln!(s, "{:<10} {:>14} {:>14} {:>14.6}", "total", "", "", self.total_cost);
        s
    }
}

pub fn write_solution(path: &Path, doc: &SolutionDocument) -> Result<(), IoError> {
    write_text(path, &doc.to_json())
}

fn csv_text<T: Serialize>(rows: impl IntoIterator<Item = T>, header: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub const TRACE_HEADER: [&str; 6] = ["iter", "res_gas", "res_elec", "obj_gn", "obj_en", "obj_ries"];

/// One line per iteration after the header.
pub fn trace_csv(trace: &Trace) -> String {
    csv_text(&trace.records, &TRACE_HEADER)
}

pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<(), IoError> {
    write_text(path, &trace_csv(trace))
}

/// A sweep row with the wall time it took.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepLine {
    pub rho_gn: f64,
    pub rho_en: f64,
    pub rho_ehg: f64,
    pub rho_ehe: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub final_res_gas: f64,
    pub final_res_elec: f64,
    pub wall_time_s: f64,
}

impl SweepLine {
    pub fn new(row: &SweepRow, wall_time_s: f64) -> Self {
        let [rho_gn, rho_en, rho_ehg, rho_ehe] = row.rho;
        Self {
            rho_gn,
            rho_en,
            rho_ehg,
            rho_ehe,
            converged: row.converged(),
            iterations: row.iterations,
            objective: row.objective,
            final_res_gas: row.final_res_gas,
            final_res_elec: row.final_res_elec,
            wall_time_s,
        }
    }
}

pub const SWEEP_HEADER: [&str; 10] = [
    "rho_gn",
    "rho_en",
    "rho_ehg",
    "rho_ehe",
    "converged",
    "iterations",
    "objective",
    "final_res_gas",
    "final_res_elec",
    "wall_time_s",
];

pub fn sweep_csv(lines: &[SweepLine]) -> String {
    csv_text(lines, &SWEEP_HEADER)
}
