//! Best-bound branch and bound over the bounded simplex.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::simplex::{solve_bounded, LpOutcome};
use super::{MilpError, Model, Solution, SolveStats, SolverConfig, Status};

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    model: &'a Model,
    config: &'a SolverConfig,
    integer: Vec<usize>,
    stats: SolveStats,
}

impl Search<'_> {
    fn relax(&mut self, lower: &[f64], upper: &[f64]) -> Result<Option<(f64, Vec<f64>)>, MilpError> {
        let run = solve_bounded(self.model, lower, upper)?;
        self.stats.simplex_iterations += run.iterations;
        Ok(match run.outcome {
            LpOutcome::Optimal { values } => Some((self.model.objective_value(&values), values)),
            LpOutcome::Infeasible => None,
            // Finite bounds everywhere make this unreachable for well-formed models.
            LpOutcome::Unbounded => {
                return Err(MilpError::Conditioning("unbounded relaxation with finite bounds".into()))
            }
        })
    }

    /// Most fractional integer variable; ties go to the lowest index.
    fn branch_var(&self, values: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut best_frac = self.config.integrality_tol;
        for &j in &self.integer {
            let x = values[j];
            let f = x - libm::floor(x);
            let dist = f.min(1.0 - f);
            if dist > best_frac {
                best_frac = dist;
                best = Some(j);
            }
        }
        best
    }
}

/// Solves `model` to `config.mip_gap` (absolute) by branch and bound.
///
/// Integer values in the result are exact integers: the incumbent's integer
/// assignment is fixed and the continuous part re-solved before returning.
pub fn solve_mip(model: &Model, config: &SolverConfig) -> Result<Solution, MilpError> {
    let n = model.num_vars();
    let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    let integer: Vec<usize> = (0..n).filter(|&j| model.variables()[j].kind.is_integral()).collect();
    for &j in &integer {
        lower[j] = libm::ceil(lower[j] - config.integrality_tol);
        upper[j] = libm::floor(upper[j] + config.integrality_tol);
    }
    let mut search = Search {
        model,
        config,
        integer,
        stats: SolveStats::default(),
    };

    let Some((root_bound, root_values)) = search.relax(&lower, &upper)? else {
        return Ok(Solution {
            stats: search.stats,
            ..Solution::without_point(Status::Infeasible)
        });
    };

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        bound: root_bound,
        seq,
        lower,
        upper,
        values: root_values,
    });
    let mut hit_limit = false;

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - config.mip_gap {
                break;
            }
        }
        if search.stats.nodes >= config.max_nodes {
            hit_limit = true;
            break;
        }
        search.stats.nodes += 1;
        search.stats.bound_trace.push(node.bound);

        let Some(j) = search.branch_var(&node.values) else {
            if incumbent.as_ref().is_none_or(|(inc, _)| node.bound < *inc) {
                incumbent = Some((node.bound, node.values));
            }
            continue;
        };
        let x = node.values[j];
        let children = [
            (node.lower[j], libm::floor(x)),
            (libm::ceil(x), node.upper[j]),
        ];
        for (lo, hi) in children {
            if lo > hi {
                continue;
            }
            let mut cl = node.lower.clone();
            let mut cu = node.upper.clone();
            cl[j] = lo;
            cu[j] = hi;
            let Some((bound, values)) = search.relax(&cl, &cu)? else {
                continue;
            };
            if let Some((inc, _)) = &incumbent {
                if bound >= inc - config.mip_gap {
                    continue;
                }
            }
            if search.branch_var(&values).is_none() {
                if incumbent.as_ref().is_none_or(|(inc, _)| bound < *inc) {
                    incumbent = Some((bound, values));
                }
                continue;
            }
            seq += 1;
            heap.push(Node {
                bound: bound.max(node.bound),
                seq,
                lower: cl,
                upper: cu,
                values,
            });
        }
    }

    let status = if hit_limit { Status::NodeLimit } else { Status::Optimal };
    let Some((_, values)) = incumbent else {
        let status = if hit_limit { Status::NodeLimit } else { Status::Infeasible };
        return Ok(Solution {
            stats: search.stats,
            ..Solution::without_point(status)
        });
    };
    let values = polish(&mut search, values)?;
    Ok(Solution {
        status,
        objective: model.objective_value(&values),
        values,
        stats: search.stats,
    })
}

/// Rounds the integer part and re-solves the continuous residual LP so the
/// reported point satisfies every row at the rounded assignment.
fn polish(search: &mut Search<'_>, mut values: Vec<f64>) -> Result<Vec<f64>, MilpError> {
    if search.integer.is_empty() {
        return Ok(values);
    }
    let model = search.model;
    let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    for &j in &search.integer {
        let r = libm::round(values[j]);
        lower[j] = r;
        upper[j] = r;
    }
    match search.relax(&lower, &upper) {
        Ok(Some((_, polished))) => Ok(polished),
        Ok(None) | Err(MilpError::Conditioning(_)) => {
            for &j in &search.integer {
                values[j] = libm::round(values[j]);
            }
            Ok(values)
        }
        Err(e) => Err(e),
    }
}
