use alloc::format;

use crate::case::PlanningCase;
use crate::channel::{BuildError, ChannelVars};
use crate::electric::{emit_electric, ElecPlan, ElecVars};
use crate::gas::{emit_gas, GasPlan, GasVars};
use crate::milp::{solve_mip, LinearExpression, MilpError, Model, Sense, Solution, SolverConfig, Status, VarId};
use crate::ries::{emit_ries, RiesPlan, RiesVars};

use super::{CombinedPlan, CoordinatorError, PlanMode};

/// All three agents in one model with `TP = RP` on every open channel.
#[derive(Clone, Debug)]
pub struct JointModel {
    pub model: Model,
    pub gas: GasVars,
    pub electric: ElecVars,
    pub ries: RiesVars,
}

fn couple(
    model: &mut Model,
    tp: &ChannelVars,
    rp: &ChannelVars,
    sites: impl Fn(usize, usize) -> Option<VarId>,
    tag: &str,
) -> Result<(), MilpError> {
    for (m, h, t, x) in tp.open() {
        let r = rp.get(m, h, t).expect("both sides open the same channels");
        model.add_constraint(
            LinearExpression::from_terms([(x, 1.0), (r, -1.0)]),
            Sense::Eq,
            0.0,
            format!("couple_{tag}_{m}_{h}_{t}"),
        )?;
        if let Some(s) = sites(m, h) {
            model.add_constraint(
                LinearExpression::from_terms([(x, 1.0), (s, -tp.caps[h])]),
                Sense::Le,
                0.0,
                format!("tp_gate_{tag}_{m}_{h}_{t}"),
            )?;
        }
    }
    Ok(())
}

pub fn build_joint_model(case: &PlanningCase) -> Result<JointModel, BuildError> {
    let mut model = Model::new();
    let gas = emit_gas(&mut model, case)?;
    let electric = emit_electric(&mut model, case)?;
    let ries = emit_ries(&mut model, case)?;
    couple(
        &mut model,
        &gas.tp,
        &ries.rp_gas,
        |m, h| ries.units[h].gas_sites.iter().find(|s| s.0 == m).map(|s| s.1),
        "g",
    )?;
    couple(
        &mut model,
        &electric.tp,
        &ries.rp_elec,
        |n, h| ries.units[h].bus_sites.iter().find(|s| s.0 == n).map(|s| s.1),
        "e",
    )?;
    for expr in [&gas.invest, &gas.operate, &electric.invest, &electric.operate] {
        model.add_objective(expr)?;
    }
    model.add_objective(&ries.invest())?;
    model.add_objective(&ries.operate())?;
    Ok(JointModel {
        model,
        gas,
        electric,
        ries,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointOutcome {
    pub status: Status,
    pub plan: Option<CombinedPlan>,
    pub solution: Solution,
}

impl JointModel {
    pub fn plan(&self, case: &PlanningCase, x: &[f64]) -> CombinedPlan {
        CombinedPlan::assemble(
            PlanMode::Joint,
            GasPlan::extract(case, &self.gas, x),
            ElecPlan::extract(case, &self.electric, x),
            RiesPlan::extract(case, &self.ries, x),
        )
    }
}

/// Builds and solves the joint model.
pub fn solve_joint(case: &PlanningCase, solver: &SolverConfig) -> Result<JointOutcome, CoordinatorError> {
    let joint = build_joint_model(case).map_err(CoordinatorError::JointBuild)?;
    let solution = solve_mip(&joint.model, solver).map_err(CoordinatorError::JointSolve)?;
    let plan = solution.has_point().then(|| joint.plan(case, &solution.values));
    Ok(JointOutcome {
        status: solution.status,
        plan,
        solution,
    })
}
