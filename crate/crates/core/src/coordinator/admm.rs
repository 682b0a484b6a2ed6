use alloc::vec::Vec;

use crate::case::PlanningCase;
use crate::channel::{AgentMode, ChannelArray, Penalty, PenaltyTerm};
use crate::electric::{build_electric_model, ElecPlan};
use crate::gas::{build_gas_model, GasPlan};
use crate::milp::{solve_mip, MilpError, Model, Solution, SolverConfig};
use crate::ries::{build_ries_model, RiesMode, RiesPlan};

use super::consensus::{carrier_residual, update_consensus, ConsensusState, Powers};
use super::{Agent, AdmmConfig, CombinedPlan, CoordinatorError, PlanMode};

/// One row of the convergence trace.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub res_gas: f64,
    pub res_elec: f64,
    /// Own costs of each agent at this iteration, without consensus terms.
    pub obj_gn: f64,
    pub obj_en: f64,
    pub obj_ries: f64,
}

/// Powers solved at an iteration and the intermediate powers they were tested against.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub powers: Powers,
    pub ip_gas: ChannelArray,
    pub ip_elec: ChannelArray,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmmStatus {
    Converged,
    MaxIters,
    Stalled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmmOutcome {
    pub status: AdmmStatus,
    pub iterations: usize,
    /// Iteration the plan was taken from: the converged one, or the one with
    /// the smallest scaled residual.
    pub plan_iter: usize,
    pub plan: CombinedPlan,
    /// Largest |TP − RP| per carrier in the returned plan.
    pub mismatch_gas: f64,
    pub mismatch_elec: f64,
    /// Linearised minus exact quadratic penalty at the returned plan, M$.
    /// Diagnostic only: the penalty never enters the reported costs.
    pub pwl_error: f64,
    /// Cost of closing the TP/RP mismatch at the dearest unit price, M$.
    pub mismatch_cost: f64,
    pub final_state: ConsensusState,
}

impl AdmmOutcome {
    pub fn converged(&self) -> bool {
        self.status == AdmmStatus::Converged
    }

    /// Slack allowed when comparing the distributed cost against the joint optimum:
    /// the cost of closing the remaining TP/RP gap.
    pub fn penalty_tolerance(&self) -> f64 {
        self.mismatch_cost
    }
}

/// Runs the three subproblems of one iteration.
pub trait Executor {
    fn solve_all(&self, models: [&Model; 3], config: &SolverConfig) -> [Result<Solution, MilpError>; 3];
}

/// Solves the subproblems one after another.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn solve_all(&self, models: [&Model; 3], config: &SolverConfig) -> [Result<Solution, MilpError>; 3] {
        models.map(|m| solve_mip(m, config))
    }
}

fn pwl_gap(terms: &[PenaltyTerm], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|p| {
            let v = x[p.var.index()];
            p.linearised(v) - p.exact(v)
        })
        .sum()
}

fn mismatch(a: &ChannelArray, b: &ChannelArray) -> (f64, f64) {
    let total = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).sum();
    (a.max_abs_diff(b), total)
}

struct Candidate {
    iter: usize,
    score: f64,
    plan: CombinedPlan,
    pwl_error: f64,
    powers: Powers,
}

fn unit_costs(case: &PlanningCase) -> (f64, f64) {
    let gas = case.gas.sources.iter().map(|s| s.cost).fold(case.price_gas, f64::max);
    let elec = case.electric.generators.iter().map(|g| g.cost).fold(case.price_elec, f64::max);
    (gas + case.price_gas, elec + case.price_elec)
}

/// ADMM with sequential subproblem solves and no observer.
pub fn admm_run(case: &PlanningCase, config: &AdmmConfig) -> Result<(AdmmOutcome, Trace), CoordinatorError> {
    admm_run_with(case, config, &Sequential, &mut |_| {})
}

/// ADMM over the three agents.
///
/// Every iteration solves the three subproblems against the same consensus
/// snapshot, tests the residuals against that snapshot's intermediate powers,
/// and only then updates the consensus.
pub fn admm_run_with(
    case: &PlanningCase,
    config: &AdmmConfig,
    executor: &dyn Executor,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(AdmmOutcome, Trace), CoordinatorError> {
    config.validate()?;
    if config.max_iters == 0 {
        return Err(CoordinatorError::Config("max_iters must be at least 1".into()));
    }
    let t = case.horizon;
    let gas_shape = (case.gas.nodes.len(), case.ries.len(), t);
    let elec_shape = (case.electric.buses.len(), case.ries.len(), t);
    let mut state = ConsensusState::initial(gas_shape, elec_shape, config.lambda_init, config.ip_init);
    let mut trace = Trace::default();
    let mut best: Option<Candidate> = None;
    let mut last_improvement = 0usize;
    let mut status = AdmmStatus::MaxIters;

    for k in 0..config.max_iters {
        let pen = |lambda, ip, rho| Penalty {
            lambda,
            ip,
            rho,
            knots: config.quad_knots,
        };
        let (gm, gv) = build_gas_model(
            case,
            AgentMode::Admm(pen(&state.lambda_gn, &state.ip_gas, config.rho_gn)),
        )
        .map_err(|e| CoordinatorError::Build(Agent::Gas, e))?;
        let (em, ev) = build_electric_model(
            case,
            AgentMode::Admm(pen(&state.lambda_en, &state.ip_elec, config.rho_en)),
        )
        .map_err(|e| CoordinatorError::Build(Agent::Electric, e))?;
        let (rm, rv) = build_ries_model(
            case,
            RiesMode::Admm {
                gas: pen(&state.lambda_ehg, &state.ip_gas, config.rho_ehg),
                elec: pen(&state.lambda_ehe, &state.ip_elec, config.rho_ehe),
            },
        )
        .map_err(|e| CoordinatorError::Build(Agent::Ries, e))?;

        let [gs, es, rs] = executor.solve_all([&gm, &em, &rm], &config.solver);
        let take = |agent, r: Result<Solution, MilpError>| -> Result<Vec<f64>, CoordinatorError> {
            let s = r.map_err(|e| CoordinatorError::Solve(agent, e))?;
            if s.has_point() {
                Ok(s.values)
            } else {
                Err(CoordinatorError::Infeasible(agent, s.status))
            }
        };
        let gx = take(Agent::Gas, gs)?;
        let ex = take(Agent::Electric, es)?;
        let rx = take(Agent::Ries, rs)?;

        let powers = Powers {
            tp_gas: gv.tp.values(&gx),
            tp_elec: ev.tp.values(&ex),
            rp_gas: rv.rp_gas.values(&rx),
            rp_elec: rv.rp_elec.values(&rx),
        };
        let res_gas = carrier_residual(&powers.tp_gas, &powers.rp_gas, &state.ip_gas);
        let res_elec = carrier_residual(&powers.tp_elec, &powers.rp_elec, &state.ip_elec);
        let plan = CombinedPlan::assemble(
            PlanMode::Distributed,
            GasPlan::extract(case, &gv, &gx),
            ElecPlan::extract(case, &ev, &ex),
            RiesPlan::extract(case, &rv, &rx),
        );
        let record = IterationRecord {
            iter: k,
            res_gas,
            res_elec,
            obj_gn: plan.gas.cost.total(),
            obj_en: plan.electric.cost.total(),
            obj_ries: plan.ries.cost.total(),
        };
        observer(&record);
        trace.records.push(record);
        trace.snapshots.push(Snapshot {
            powers: powers.clone(),
            ip_gas: state.ip_gas.clone(),
            ip_elec: state.ip_elec.clone(),
        });

        let score = (res_gas / config.eps_gas).max(res_elec / config.eps_elec);
        let improved = best.as_ref().is_none_or(|b| score < b.score - config.stall_tol);
        if improved {
            last_improvement = k;
        }
        if best.as_ref().is_none_or(|b| score < b.score) {
            let pwl_error = pwl_gap(&gv.penalties, &gx) + pwl_gap(&ev.penalties, &ex) + pwl_gap(&rv.penalties, &rx);
            best = Some(Candidate {
                iter: k,
                score,
                plan,
                pwl_error,
                powers: powers.clone(),
            });
        }
        if res_gas <= config.eps_gas && res_elec <= config.eps_elec {
            status = AdmmStatus::Converged;
            break;
        }
        if k - last_improvement >= config.stall_window {
            status = AdmmStatus::Stalled;
            break;
        }
        state = update_consensus(&state, &powers, config)?;
    }

    let iterations = trace.records.len();
    // Scores at or below 1 stop the loop, so a converged run always picks its last iterate.
    let chosen = best.ok_or_else(|| CoordinatorError::Config("max_iters must be at least 1".into()))?;
    let (unit_gas, unit_elec) = unit_costs(case);
    let (mismatch_gas, total_gas) = mismatch(&chosen.powers.tp_gas, &chosen.powers.rp_gas);
    let (mismatch_elec, total_elec) = mismatch(&chosen.powers.tp_elec, &chosen.powers.rp_elec);
    Ok((
        AdmmOutcome {
            status,
            iterations,
            plan_iter: chosen.iter,
            plan: chosen.plan,
            mismatch_gas,
            mismatch_elec,
            pwl_error: chosen.pwl_error,
            mismatch_cost: total_gas * unit_gas + total_elec * unit_elec,
            final_state: state,
        },
        trace,
    ))
}
