//! Mixed-integer linear programming kernel.
//!
//! Models are built incrementally with [`Model::add_variable`] and
//! [`Model::add_constraint`], then handed to [`solve_lp`] (bounded primal
//! simplex on a dense tableau) or [`solve_mip`] (best-bound branch and bound
//! over the same simplex). Every variable carries finite bounds; model
//! builders supply their own Big-M values.

mod bnb;
mod expr;
mod lu;
mod simplex;
mod text;

use alloc::string::String;
use alloc::vec::Vec;

pub use bnb::solve_mip;
pub use expr::{sum_of, LinearExpression};
pub use simplex::solve_lp;

/// Handle into a model's variable table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// `expr (sense) rhs`. The expression constant is moved to the right-hand
/// side when solving.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub expr: LinearExpression,
    pub sense: Sense,
    pub rhs: f64,
    pub name: String,
}

impl Constraint {
    /// Signed violation at `values`: positive means the row is violated.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.expr.evaluate(values);
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MilpError {
    #[error("variable `{name}`: lower bound {lower} exceeds upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("variable `{name}`: bounds must be finite")]
    InfiniteBounds { name: String },
    #[error("binary variable `{name}`: bounds must lie within [0, 1]")]
    BinaryBounds { name: String },
    #[error("constraint `{name}` references unknown variable index {index}")]
    UnknownVariable { name: String, index: usize },
    #[error("constraint `{name}` has a non-finite coefficient or right-hand side")]
    NonFinite { name: String },
    #[error("numerical breakdown: {0}")]
    Conditioning(String),
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

/// A minimisation MILP.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: LinearExpression,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        kind: VarKind,
        lower: f64,
        upper: f64,
        name: impl Into<String>,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if !lower.is_finite() || !upper.is_finite() {
            return Err(MilpError::InfiniteBounds { name });
        }
        if lower > upper {
            return Err(MilpError::InvertedBounds { name, lower, upper });
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(MilpError::BinaryBounds { name });
        }
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            kind,
            lower,
            upper,
            name,
        });
        Ok(id)
    }

    pub fn continuous(&mut self, lower: f64, upper: f64, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_variable(VarKind::Continuous, lower, upper, name)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_variable(VarKind::Binary, 0.0, 1.0, name)
    }

    pub fn integer(&mut self, lower: f64, upper: f64, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_variable(VarKind::Integer, lower, upper, name)
    }

    pub fn add_constraint(
        &mut self,
        expr: LinearExpression,
        sense: Sense,
        rhs: f64,
        name: impl Into<String>,
    ) -> Result<usize, MilpError> {
        let name = name.into();
        if !expr.is_finite() || !rhs.is_finite() {
            return Err(MilpError::NonFinite { name });
        }
        if let Some(v) = expr.max_var() {
            if v.index() >= self.variables.len() {
                return Err(MilpError::UnknownVariable {
                    name,
                    index: v.index(),
                });
            }
        }
        self.constraints.push(Constraint {
            expr,
            sense,
            rhs,
            name,
        });
        Ok(self.constraints.len() - 1)
    }

    /// Adds `expr` to the (minimised) objective.
    pub fn add_objective(&mut self, expr: &LinearExpression) -> Result<(), MilpError> {
        if !expr.is_finite() {
            return Err(MilpError::NonFinite {
                name: String::from("objective"),
            });
        }
        if let Some(v) = expr.max_var() {
            if v.index() >= self.variables.len() {
                return Err(MilpError::UnknownVariable {
                    name: String::from("objective"),
                    index: v.index(),
                });
            }
        }
        self.objective += expr;
        Ok(())
    }

    pub fn add_objective_term(&mut self, var: VarId, coef: f64) -> Result<(), MilpError> {
        self.add_objective(&LinearExpression::term(var, coef))
    }

    /// Overrides the bounds of an existing variable (used to fix values).
    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) -> Result<(), MilpError> {
        let v = &mut self.variables[var.index()];
        if lower > upper {
            return Err(MilpError::InvertedBounds {
                name: v.name.clone(),
                lower,
                upper,
            });
        }
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.index()]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinearExpression {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    /// Integer-kind variables whose bounds leave more than one value.
    pub fn free_integer_vars(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind.is_integral() && libm::floor(v.upper + 1e-9) > libm::ceil(v.lower - 1e-9))
            .map(|(i, _)| VarId(i))
            .collect()
    }

    pub fn has_integer_vars(&self) -> bool {
        self.variables.iter().any(|v| v.kind.is_integral())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.evaluate(values)
    }

    /// Largest row or bound violation at `values` (0 when feasible).
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0_f64, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, x)| (v.lower - x).max(x - v.upper))
            .fold(0.0_f64, f64::max);
        rows.max(bounds)
    }

    /// Name and violation of the worst row at `values`.
    pub fn worst_constraint(&self, values: &[f64]) -> Option<(&str, f64)> {
        self.constraints
            .iter()
            .map(|c| (c.name.as_str(), c.violation(values)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// Branch and bound stopped at `max_nodes`; values hold the incumbent if one was found.
    NodeLimit,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub simplex_iterations: usize,
    /// Global lower bound at each processed node, in processing order.
    pub bound_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

impl Solution {
    pub(crate) fn without_point(status: Status) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            stats: SolveStats::default(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn has_point(&self) -> bool {
        !self.values.is_empty() || (self.status == Status::Optimal)
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.index()]
    }
}

/// Branch-and-bound settings. Nodes are always processed best-bound first and
/// branching picks the most fractional variable, ties to the lowest index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Absolute optimality gap.
    pub mip_gap: f64,
    pub integrality_tol: f64,
    pub max_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mip_gap: 1e-6,
            integrality_tol: 1e-6,
            max_nodes: 200_000,
        }
    }
}
