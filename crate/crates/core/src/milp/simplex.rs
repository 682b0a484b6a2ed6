//! Bounded-variable primal simplex on a dense tableau.
//!
//! Structural variables are shifted to `[0, upper - lower]` and kept at one of
//! their bounds while nonbasic, so bounds never become rows. Each constraint
//! row gets a logical (slack or surplus) column and, when the logical cannot
//! start basic, an artificial column for phase one. Pricing is Dantzig's rule;
//! after a run of degenerate pivots the solver switches to Bland's rule until
//! progress resumes. The final basic solution is recomputed from the original
//! rows with a fresh LU solve before it is reported.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::lu::Lu;
use super::{MilpError, Model, Sense, Solution, SolveStats, Status};

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const BREAKDOWN_PIVOT: f64 = 1e-10;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_AFTER: usize = 50;
/// Rows must hold within this absolute tolerance at a reported optimum.
pub(crate) const ROW_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColState {
    Basic,
    Lower,
    Upper,
}

pub(crate) enum LpOutcome {
    Optimal { values: Vec<f64> },
    Infeasible,
    Unbounded,
}

pub(crate) struct LpRun {
    pub outcome: LpOutcome,
    pub iterations: usize,
}

/// Solves the LP relaxation of `model` (integrality ignored).
pub fn solve_lp(model: &Model) -> Result<Solution, MilpError> {
    let lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    let run = solve_bounded(model, &lower, &upper)?;
    let stats = SolveStats {
        nodes: 0,
        simplex_iterations: run.iterations,
        bound_trace: Vec::new(),
    };
    Ok(match run.outcome {
        LpOutcome::Optimal { values } => Solution {
            status: Status::Optimal,
            objective: model.objective_value(&values),
            values,
            stats,
        },
        LpOutcome::Infeasible => Solution {
            stats,
            ..Solution::without_point(Status::Infeasible)
        },
        LpOutcome::Unbounded => Solution {
            stats,
            ..Solution::without_point(Status::Unbounded)
        },
    })
}

struct Tableau {
    m: usize,
    nc: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    dead: Vec<bool>,
    price_tol: f64,
    iterations: usize,
    limit: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.nc + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::Upper => self.ub[j],
            _ => 0.0,
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.nc..(i + 1) * self.nc];
            for (dj, tij) in d.iter_mut().zip(row) {
                *dj -= cb * tij;
            }
        }
        self.d = d;
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nc {
            if self.dead[j] || self.state[j] == ColState::Basic || self.ub[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let dir = match self.state[j] {
                ColState::Lower if dj < -self.price_tol => 1.0,
                ColState::Upper if dj > self.price_tol => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(&mut self) -> Result<PhaseEnd, MilpError> {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.limit {
                return Err(MilpError::IterationLimit);
            }
            let bland = degenerate_run >= BLAND_AFTER;
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            self.iterations += 1;

            // Ratio test. `None` row means the entering column flips bound.
            let mut step = self.ub[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let alpha = dir * a;
                let b = self.basis[i];
                let (ratio, to_upper) = if alpha > 0.0 {
                    ((self.beta[i]).max(0.0) / alpha, false)
                } else if self.ub[b].is_finite() {
                    ((self.ub[b] - self.beta[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if ratio < step - DEGENERATE_STEP => true,
                    _ if ratio > step + DEGENERATE_STEP => false,
                    None => ratio < step,
                    Some((r, _)) => {
                        if bland {
                            b < self.basis[r]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    }
                };
                if better {
                    step = ratio;
                    leave = Some((i, to_upper));
                    leave_alpha = alpha.abs();
                }
            }
            if !step.is_finite() {
                return Ok(PhaseEnd::Unbounded);
            }
            if step <= DEGENERATE_STEP {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            let delta = dir * step;
            if delta != 0.0 {
                for i in 0..self.m {
                    let a = self.at(i, q);
                    if a != 0.0 {
                        self.beta[i] -= delta * a;
                    }
                }
            }
            match leave {
                None => {
                    self.state[q] = if self.state[q] == ColState::Lower {
                        ColState::Upper
                    } else {
                        ColState::Lower
                    };
                }
                Some((r, to_upper)) => {
                    let entering_value = self.nonbasic_value(q) + delta;
                    let old = self.basis[r];
                    self.state[old] = if to_upper { ColState::Upper } else { ColState::Lower };
                    self.pivot(r, q)?;
                    self.basis[r] = q;
                    self.state[q] = ColState::Basic;
                    self.beta[r] = entering_value;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) -> Result<(), MilpError> {
        let nc = self.nc;
        let piv = self.t[r * nc + q];
        if piv.abs() < BREAKDOWN_PIVOT {
            return Err(MilpError::Conditioning(format!("pivot element {piv:e} below 1e-10")));
        }
        let mut nz = Vec::new();
        for j in 0..nc {
            let v = self.t[r * nc + j];
            if v != 0.0 && !self.dead[j] {
                let s = v / piv;
                self.t[r * nc + j] = if s.abs() < 1e-14 { 0.0 } else { s };
                if self.t[r * nc + j] != 0.0 {
                    nz.push(j);
                }
            } else if self.dead[j] {
                self.t[r * nc + j] = 0.0;
            }
        }
        self.t[r * nc + q] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + q];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                let v = self.t[i * nc + j] - f * self.t[r * nc + j];
                self.t[i * nc + j] = if v.abs() < 1e-14 { 0.0 } else { v };
            }
            self.t[i * nc + q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * self.t[r * nc + j];
            }
            self.d[q] = 0.0;
        }
        Ok(())
    }
}

/// Solves `model` with the given bounds in place of the model's own.
pub(crate) fn solve_bounded(model: &Model, lower: &[f64], upper: &[f64]) -> Result<LpRun, MilpError> {
    let n = model.num_vars();
    for j in 0..n {
        if lower[j] > upper[j] + 1e-12 {
            return Ok(LpRun {
                outcome: LpOutcome::Infeasible,
                iterations: 0,
            });
        }
    }
    let rows = model.constraints();
    let m = rows.len();

    // Shifted right-hand sides and row orientation.
    let mut rhs = vec![0.0; m];
    let mut flip = vec![1.0; m];
    let mut logical_coef = vec![0.0; m];
    for (i, c) in rows.iter().enumerate() {
        let mut b = c.rhs - c.expr.constant_term();
        for (v, a) in c.expr.terms() {
            b -= a * lower[v.index()];
        }
        let logical = match c.sense {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => 0.0,
        };
        if b < 0.0 {
            flip[i] = -1.0;
            b = -b;
        }
        rhs[i] = b;
        logical_coef[i] = logical * flip[i];
    }
    let n_logical = rows.iter().filter(|c| c.sense != Sense::Eq).count();
    let needs_art: Vec<bool> = logical_coef.iter().map(|&l| l <= 0.0).collect();
    let n_art = needs_art.iter().filter(|&&a| a).count();
    let nc = n + n_logical + n_art;

    let mut t = vec![0.0; m * nc];
    let mut ub = vec![0.0; nc];
    let mut cost = vec![0.0; nc];
    let mut basis = vec![0usize; m];
    let mut state = vec![ColState::Lower; nc];

    for j in 0..n {
        ub[j] = (upper[j] - lower[j]).max(0.0);
    }
    for (i, c) in rows.iter().enumerate() {
        for (v, a) in c.expr.terms() {
            t[i * nc + v.index()] = a * flip[i];
        }
    }
    let mut col = n;
    for i in 0..m {
        if rows[i].sense != Sense::Eq {
            t[i * nc + col] = logical_coef[i];
            ub[col] = f64::INFINITY;
            if !needs_art[i] {
                basis[i] = col;
                state[col] = ColState::Basic;
            }
            col += 1;
        }
    }
    for i in 0..m {
        if needs_art[i] {
            t[i * nc + col] = 1.0;
            ub[col] = f64::INFINITY;
            cost[col] = 1.0;
            basis[i] = col;
            state[col] = ColState::Basic;
            col += 1;
        }
    }
    debug_assert_eq!(col, nc);
    let original = t.clone();

    let mut tab = Tableau {
        m,
        nc,
        t,
        beta: rhs.clone(),
        basis,
        state,
        ub,
        cost,
        d: Vec::new(),
        dead: vec![false; nc],
        price_tol: PRICE_TOL,
        iterations: 0,
        limit: 20 * (m + nc) + 10_000,
    };

    if n_art > 0 {
        tab.recompute_reduced_costs();
        match tab.run()? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => {
                return Err(MilpError::Conditioning("phase one reported unbounded".into()));
            }
        }
        let infeasibility: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= n + n_logical)
            .map(|i| tab.beta[i])
            .sum();
        let bmax = rhs.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
        if infeasibility > 1e-9 * bmax {
            return Ok(LpRun {
                outcome: LpOutcome::Infeasible,
                iterations: tab.iterations,
            });
        }
        for j in n + n_logical..nc {
            tab.ub[j] = 0.0;
            tab.cost[j] = 0.0;
            if tab.state[j] != ColState::Basic {
                tab.dead[j] = true;
            }
        }
    }
    for j in 0..nc {
        tab.cost[j] = 0.0;
    }
    for (v, c) in model.objective().terms() {
        tab.cost[v.index()] = c;
    }
    // Reduced-cost noise grows with the objective scale.
    tab.price_tol = PRICE_TOL * tab.cost.iter().fold(1.0_f64, |s, c| s.max(c.abs()));
    tab.recompute_reduced_costs();
    let end = tab.run()?;
    if let PhaseEnd::Unbounded = end {
        return Ok(LpRun {
            outcome: LpOutcome::Unbounded,
            iterations: tab.iterations,
        });
    }

    let shifted = refine(&tab, &original, &rhs);
    let values: Vec<f64> = (0..n).map(|j| lower[j] + shifted[j]).collect();

    let worst = rows.iter().map(|c| c.violation(&values)).fold(0.0_f64, f64::max);
    if worst > ROW_TOL {
        return Err(MilpError::Conditioning(format!(
            "row residual {worst:e} exceeds {ROW_TOL:e} after refinement"
        )));
    }
    Ok(LpRun {
        outcome: LpOutcome::Optimal { values },
        iterations: tab.iterations,
    })
}

/// Recomputes the basic values from the original rows, snapping to bounds.
fn refine(tab: &Tableau, original: &[f64], rhs: &[f64]) -> Vec<f64> {
    let (m, nc) = (tab.m, tab.nc);
    let mut x: Vec<f64> = (0..nc)
        .map(|j| match tab.state[j] {
            ColState::Basic => 0.0,
            _ => tab.nonbasic_value(j),
        })
        .collect();
    let mut from_tableau = x.clone();
    for i in 0..m {
        from_tableau[tab.basis[i]] = tab.beta[i];
    }

    let refined = if m > 0 {
        let mut b = rhs.to_vec();
        for j in 0..nc {
            let v = x[j];
            if v != 0.0 {
                for (i, bi) in b.iter_mut().enumerate() {
                    *bi -= original[i * nc + j] * v;
                }
            }
        }
        let mut bmat = vec![0.0; m * m];
        for i in 0..m {
            for (k, &col) in tab.basis.iter().enumerate() {
                bmat[i * m + k] = original[i * nc + col];
            }
        }
        Lu::factor(bmat, m, 1e-12).map(|lu| lu.solve(&b))
    } else {
        None
    };

    let violation = |vals: &[f64]| {
        (0..m)
            .map(|i| {
                let j = tab.basis[i];
                let v = vals[i];
                (-v).max(v - tab.ub[j]).max(0.0)
            })
            .fold(0.0_f64, f64::max)
    };
    let tableau_basic: Vec<f64> = tab.beta.clone();
    let chosen = match refined {
        Some(r) if violation(&r) <= violation(&tableau_basic).max(1e-9) => r,
        _ => tableau_basic,
    };
    for i in 0..m {
        let j = tab.basis[i];
        let mut v = chosen[i];
        if v < 0.0 && v > -1e-9 {
            v = 0.0;
        }
        if v > tab.ub[j] && v < tab.ub[j] + 1e-9 {
            v = tab.ub[j];
        }
        x[j] = v;
    }
    x
}
