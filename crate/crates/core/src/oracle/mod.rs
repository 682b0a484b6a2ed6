//! Brute-force reference solvers for small models.
//!
//! [`enumerate_mip`] fixes every integer assignment in turn and solves the
//! continuous remainder with its own textbook simplex, so agreement with
//! [`crate::milp::solve_mip`] checks the branch-and-bound path end to end.

mod textbook;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::milp::{Model, Solution, VarId};

pub const DEFAULT_INTEGER_LIMIT: usize = 12;
/// Largest number of values a single integer variable may take.
pub const MAX_VALUES_PER_VAR: usize = 3;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{count} free integer variables exceed the enumeration limit of {limit}")]
    TooManyIntegers { count: usize, limit: usize },
    #[error("integer variable `{name}` spans {values} values (at most {MAX_VALUES_PER_VAR} allowed)")]
    RangeTooWide { name: String, values: usize },
    #[error("reference simplex failed to terminate on assignment {0}")]
    Stalled(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerStatus {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Best objective, `None` when every assignment is infeasible.
    pub objective: Option<f64>,
    pub values: Vec<f64>,
    /// Best integer assignment.
    pub assignment: Vec<(VarId, f64)>,
    /// Residual LP outcome per assignment, in enumeration order.
    pub inner: Vec<InnerStatus>,
}

impl OracleResult {
    pub fn is_feasible(&self) -> bool {
        self.objective.is_some()
    }
}

/// Mixed-radix walk over the free integer variables of a model.
pub struct Enumeration<'a> {
    model: &'a Model,
    vars: Vec<(VarId, f64, usize)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> Enumeration<'a> {
    pub fn new(model: &'a Model, limit: usize) -> Result<Self, OracleError> {
        let free = model.free_integer_vars();
        if free.len() > limit {
            return Err(OracleError::TooManyIntegers {
                count: free.len(),
                limit,
            });
        }
        let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
        for (j, v) in model.variables().iter().enumerate() {
            if v.kind.is_integral() {
                lower[j] = libm::ceil(v.lower - 1e-9);
                upper[j] = libm::floor(v.upper + 1e-9);
            }
        }
        let mut vars = Vec::with_capacity(free.len());
        for v in free {
            let lo = lower[v.index()];
            let count = (upper[v.index()] - lo) as usize + 1;
            if count > MAX_VALUES_PER_VAR {
                return Err(OracleError::RangeTooWide {
                    name: model.variable(v).name.clone(),
                    values: count,
                });
            }
            vars.push((v, lo, count));
        }
        Ok(Self {
            model,
            vars,
            lower,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.vars.iter().map(|v| v.2).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn assignment(&self, mut index: usize) -> Vec<(VarId, f64)> {
        self.vars
            .iter()
            .map(|&(v, lo, count)| {
                let digit = index % count;
                index /= count;
                (v, lo + digit as f64)
            })
            .collect()
    }

    /// Solves the continuous residual of assignment `index`.
    pub fn evaluate(&self, index: usize) -> Result<(InnerStatus, Vec<f64>), OracleError> {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for (v, x) in self.assignment(index) {
            lower[v.index()] = x;
            upper[v.index()] = x;
        }
        Ok(match textbook::solve(self.model, &lower, &upper) {
            textbook::TextbookOutcome::Optimal(values) => {
                (InnerStatus::Optimal(self.model.objective_value(&values)), values)
            }
            textbook::TextbookOutcome::Infeasible => (InnerStatus::Infeasible, Vec::new()),
            textbook::TextbookOutcome::Unbounded => (InnerStatus::Unbounded, Vec::new()),
            textbook::TextbookOutcome::Stalled => return Err(OracleError::Stalled(index)),
        })
    }
}

/// Exhaustively solves a model with at most `limit` free integer variables.
pub fn enumerate_mip(model: &Model, limit: usize) -> Result<OracleResult, OracleError> {
    let walk = Enumeration::new(model, limit)?;
    let total = walk.len();
    let mut inner = Vec::with_capacity(total);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for idx in 0..total {
        let (status, values) = walk.evaluate(idx)?;
        if let InnerStatus::Optimal(obj) = status {
            if best.as_ref().is_none_or(|(b, _, _)| obj < *b) {
                best = Some((obj, idx, values));
            }
        }
        inner.push(status);
    }
    Ok(match best {
        Some((obj, idx, values)) => OracleResult {
            objective: Some(obj),
            values,
            assignment: walk.assignment(idx),
            inner,
        },
        None => OracleResult {
            objective: None,
            values: Vec::new(),
            assignment: Vec::new(),
            inner,
        },
    })
}

/// Anything carrying an objective and a point of the same model.
pub trait Scored {
    fn objective_value(&self) -> Option<f64>;
    fn point(&self) -> &[f64];
}

impl Scored for Solution {
    fn objective_value(&self) -> Option<f64> {
        if self.values.is_empty() && !self.objective.is_finite() {
            None
        } else {
            Some(self.objective)
        }
    }
    fn point(&self) -> &[f64] {
        &self.values
    }
}

impl Scored for OracleResult {
    fn objective_value(&self) -> Option<f64> {
        self.objective
    }
    fn point(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    /// |obj_a - obj_b|; infinite when only one side is feasible, 0 when neither is.
    pub delta: f64,
    pub residual_a: f64,
    pub residual_b: f64,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (|Δobj| = {:.3e}, worst residual a = {:.3e}, b = {:.3e})",
            if self.pass { "pass" } else { "FAIL" },
            self.delta,
            self.residual_a,
            self.residual_b
        )
    }
}

/// Compares two results for the same model by objective.
pub fn compare_solutions<A: Scored, B: Scored>(model: &Model, a: &A, b: &B, tol: f64) -> Verdict {
    let residual = |p: &[f64]| {
        if p.len() == model.num_vars() {
            model.max_violation(p)
        } else {
            0.0
        }
    };
    let delta = match (a.objective_value(), b.objective_value()) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    Verdict {
        pass: delta <= tol,
        delta,
        residual_a: residual(a.point()),
        residual_b: residual(b.point()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_lp, solve_mip, LinearExpression, Sense, SolverConfig};
    use alloc::format;

    #[test]
    fn no_integer_vars_equals_lp() {
        let mut m = Model::new();
        let x = m.continuous(0.0, 3.0, "x").unwrap();
        let y = m.continuous(-1.0, 3.0, "y").unwrap();
        m.add_constraint(LinearExpression::from_terms([(x, 1.0), (y, 1.0)]), Sense::Ge, 1.5, "c")
            .unwrap();
        m.add_objective(&LinearExpression::from_terms([(x, 2.0), (y, 1.0)])).unwrap();
        let lp = solve_lp(&m).unwrap();
        let or = enumerate_mip(&m, DEFAULT_INTEGER_LIMIT).unwrap();
        assert_eq!(or.inner.len(), 1);
        assert!((or.objective.unwrap() - lp.objective).abs() < 1e-12);
    }

    #[test]
    fn two_binary_knapsack_enumerates_four_cases() {
        // max 3a + 2b, 2a + 2b <= 3  -> only one item fits; best a: 3
        let mut m = Model::new();
        let a = m.binary("a").unwrap();
        let b = m.binary("b").unwrap();
        m.add_constraint(LinearExpression::from_terms([(a, 2.0), (b, 2.0)]), Sense::Le, 3.0, "w")
            .unwrap();
        m.add_objective(&LinearExpression::from_terms([(a, -3.0), (b, -2.0)])).unwrap();
        let or = enumerate_mip(&m, DEFAULT_INTEGER_LIMIT).unwrap();
        assert_eq!(
            or.inner,
            alloc::vec![
                InnerStatus::Optimal(0.0),
                InnerStatus::Optimal(-3.0),
                InnerStatus::Optimal(-2.0),
                InnerStatus::Infeasible
            ]
        );
        assert_eq!(or.objective, Some(-3.0));
        assert_eq!(or.assignment, alloc::vec![(a, 1.0), (b, 0.0)]);
    }

    #[test]
    fn refuses_thirteen_binaries() {
        let mut m = Model::new();
        for i in 0..13 {
            m.binary(format!("b{i}")).unwrap();
        }
        assert_eq!(
            enumerate_mip(&m, DEFAULT_INTEGER_LIMIT).unwrap_err(),
            OracleError::TooManyIntegers { count: 13, limit: 12 }
        );
    }

    #[test]
    fn refuses_wide_integer() {
        let mut m = Model::new();
        m.integer(0.0, 5.0, "n").unwrap();
        assert!(matches!(enumerate_mip(&m, 12), Err(OracleError::RangeTooWide { values: 6, .. })));
    }

    #[test]
    fn compare_flags_objective_gap() {
        let mut m = Model::new();
        let x = m.continuous(0.0, 1.0, "x").unwrap();
        m.add_objective_term(x, 1.0).unwrap();
        let a = solve_mip(&m, &SolverConfig::default()).unwrap();
        let mut b = a.clone();
        assert!(compare_solutions(&m, &a, &b, 1e-6).pass);
        b.objective += 1e-3;
        let v = compare_solutions(&m, &a, &b, 1e-6);
        assert!(!v.pass);
        assert!((v.delta - 1e-3).abs() < 1e-12);
    }
}
