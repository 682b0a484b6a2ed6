//! Centralised joint planning and the three-agent ADMM loop.

mod admm;
mod consensus;
mod joint;
mod sweep;

use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::case::PlanningCase;
use crate::channel::BuildError;
use crate::electric::ElecPlan;
use crate::gas::GasPlan;
use crate::milp::{MilpError, SolverConfig, Status};
use crate::ries::RiesPlan;

pub use admm::{admm_run, admm_run_with, AdmmOutcome, AdmmStatus, Executor, IterationRecord, Sequential, Snapshot, Trace};
pub use consensus::{carrier_residual, check_convergence, update_consensus, ConsensusState, Powers};
pub use joint::{build_joint_model, solve_joint, JointModel, JointOutcome};
pub use sweep::{sweep, default_rho_grid, SweepRow};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub rho_gn: f64,
    pub rho_en: f64,
    pub rho_ehg: f64,
    pub rho_ehe: f64,
    pub eps_gas: f64,
    pub eps_elec: f64,
    pub max_iters: usize,
    pub quad_knots: usize,
    /// Starting multiplier value.
    pub lambda_init: f64,
    /// Starting intermediate power.
    pub ip_init: f64,
    /// Stop when the residual has not improved by more than `stall_tol` for this many iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    #[serde(skip)]
    pub solver: SolverConfig,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho_gn: 100.0,
            rho_en: 100.0,
            rho_ehg: 100.0,
            rho_ehe: 100.0,
            eps_gas: 1e-3,
            eps_elec: 1e-3,
            max_iters: 200,
            quad_knots: 8,
            lambda_init: 1.0,
            ip_init: 0.0,
            stall_window: 20,
            stall_tol: 1e-9,
            solver: SolverConfig::default(),
        }
    }
}

impl AdmmConfig {
    /// Built-in defaults overridden by the case's `admm` block.
    pub fn for_case(case: &PlanningCase) -> Self {
        let o = &case.admm;
        let d = Self::default();
        Self {
            rho_gn: o.rho_gn.unwrap_or(d.rho_gn),
            rho_en: o.rho_en.unwrap_or(d.rho_en),
            rho_ehg: o.rho_ehg.unwrap_or(d.rho_ehg),
            rho_ehe: o.rho_ehe.unwrap_or(d.rho_ehe),
            eps_gas: o.eps_gas.unwrap_or(d.eps_gas),
            eps_elec: o.eps_elec.unwrap_or(d.eps_elec),
            max_iters: o.max_iters.unwrap_or(d.max_iters),
            quad_knots: o.quad_knots.unwrap_or(d.quad_knots),
            ..d
        }
    }

    pub fn with_rho(mut self, rho: [f64; 4]) -> Self {
        [self.rho_gn, self.rho_en, self.rho_ehg, self.rho_ehe] = rho;
        self
    }

    pub fn rho(&self) -> [f64; 4] {
        [self.rho_gn, self.rho_en, self.rho_ehg, self.rho_ehe]
    }

    pub fn validate(&self) -> Result<(), CoordinatorError> {
        let positive = [
            ("rho_gn", self.rho_gn),
            ("rho_en", self.rho_en),
            ("rho_ehg", self.rho_ehg),
            ("rho_ehe", self.rho_ehe),
            ("eps_gas", self.eps_gas),
            ("eps_elec", self.eps_elec),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoordinatorError::Config(alloc::format!("{name} must be > 0, got {v}")));
            }
        }
        if self.quad_knots < 2 {
            return Err(CoordinatorError::Config("quad_knots must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    Joint,
    Distributed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Gas,
    Electric,
    Ries,
}

impl Agent {
    pub fn name(self) -> &'static str {
        match self {
            Agent::Gas => "gas",
            Agent::Electric => "electric",
            Agent::Ries => "ries",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CoordinatorError {
    #[error("consensus shape {got:?} does not match {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("invalid ADMM settings: {0}")]
    Config(String),
    #[error("building the {agent} model failed: {err}", agent = .0.name(), err = .1)]
    Build(Agent, BuildError),
    #[error("solving the {agent} subproblem failed: {err}", agent = .0.name(), err = .1)]
    Solve(Agent, MilpError),
    #[error("the {agent} subproblem has no feasible point ({status:?})", agent = .0.name(), status = .1)]
    Infeasible(Agent, Status),
    #[error("building the joint model failed: {0}")]
    JointBuild(BuildError),
    #[error("solving the joint model failed: {0}")]
    JointSolve(MilpError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedPlan {
    pub mode: PlanMode,
    pub gas: GasPlan,
    pub electric: ElecPlan,
    pub ries: RiesPlan,
    /// Sum of the three agents' own costs, M$.
    pub total_cost: f64,
}

impl CombinedPlan {
    pub(crate) fn assemble(mode: PlanMode, gas: GasPlan, electric: ElecPlan, ries: RiesPlan) -> Self {
        let total_cost = gas.cost.total() + electric.cost.total() + ries.cost.total();
        Self {
            mode,
            gas,
            electric,
            ries,
            total_cost,
        }
    }
}
