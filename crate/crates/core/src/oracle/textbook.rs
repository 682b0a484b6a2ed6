//! Textbook two-phase simplex on a full tableau.
//!
//! Deliberately shares nothing with the bounded simplex in `milp`: bounds are
//! turned into explicit rows, every `>=`/`=` row gets an artificial, and the
//! artificials are driven out of the basis between the phases.

use alloc::vec;
use alloc::vec::Vec;

use crate::milp::{Model, Sense};

const EPS: f64 = 1e-10;

pub(crate) enum TextbookOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
    Stalled,
}

struct Full {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
}

impl Full {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + c];
        for j in 0..cols {
            self.a[r * cols + j] /= p;
        }
        self.rhs[r] /= p;
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + c];
            if f != 0.0 {
                for j in 0..cols {
                    self.a[i * cols + j] -= f * self.a[r * cols + j];
                }
                self.rhs[i] -= f * self.rhs[r];
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..cols {
                self.obj[j] -= f * self.a[r * cols + j];
            }
        }
        self.basis[r] = c;
    }

    /// Minimises with reduced costs in `obj`; columns where `allowed` is
    /// false never enter. Returns false when unbounded.
    fn optimise(&mut self, allowed: &[bool]) -> Option<bool> {
        let mut stall = 0usize;
        for _ in 0..50_000 {
            let bland = stall > 30;
            let mut enter = None;
            let mut best = -EPS;
            for j in 0..self.cols {
                if !allowed[j] || self.obj[j] >= -1e-9 {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if self.obj[j] < best {
                    best = self.obj[j];
                    enter = Some(j);
                }
            }
            let Some(c) = enter else {
                return Some(true);
            };
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.get(i, c);
                if a > 1e-9 {
                    let r = self.rhs[i].max(0.0) / a;
                    let take = match leave {
                        None => true,
                        Some(l) => r < ratio - 1e-12 || (r <= ratio + 1e-12 && self.basis[i] < self.basis[l]),
                    };
                    if take {
                        ratio = r;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Some(false);
            };
            stall = if ratio < 1e-12 { stall + 1 } else { 0 };
            self.pivot(r, c);
        }
        None
    }
}

/// Solves the LP of `model` with `lower`/`upper` overriding the variable bounds.
pub(crate) fn solve(model: &Model, lower: &[f64], upper: &[f64]) -> TextbookOutcome {
    let n = model.num_vars();
    if (0..n).any(|j| lower[j] > upper[j] + 1e-12) {
        return TextbookOutcome::Infeasible;
    }
    // Free structurals get a column; fixed ones fold into right-hand sides.
    let mut col_of = vec![usize::MAX; n];
    let mut free = Vec::new();
    for j in 0..n {
        if upper[j] - lower[j] > 1e-12 {
            col_of[j] = free.len();
            free.push(j);
        }
    }
    let nf = free.len();

    // (dense coefficients over free columns, sense, rhs)
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in model.constraints() {
        let mut coefs = vec![0.0; nf];
        let mut b = c.rhs - c.expr.constant_term();
        for (v, a) in c.expr.terms() {
            let j = v.index();
            b -= a * lower[j];
            if col_of[j] != usize::MAX {
                coefs[col_of[j]] += a;
            }
        }
        rows.push((coefs, c.sense, b));
    }
    for (k, &j) in free.iter().enumerate() {
        let mut coefs = vec![0.0; nf];
        coefs[k] = 1.0;
        rows.push((coefs, Sense::Le, upper[j] - lower[j]));
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            for a in row.0.iter_mut() {
                *a = -*a;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = nf + n_slack + n_art;
    let mut tab = Full {
        rows: m,
        cols,
        a: vec![0.0; m * cols],
        rhs: vec![0.0; m],
        basis: vec![0; m],
        obj: vec![0.0; cols],
    };
    let mut slack = nf;
    let mut art = nf + n_slack;
    let art_start = art;
    for (i, (coefs, sense, b)) in rows.iter().enumerate() {
        tab.a[i * cols..i * cols + nf].copy_from_slice(coefs);
        tab.rhs[i] = *b;
        match sense {
            Sense::Le => {
                tab.a[i * cols + slack] = 1.0;
                tab.basis[i] = slack;
                slack += 1;
            }
            Sense::Ge => {
                tab.a[i * cols + slack] = -1.0;
                slack += 1;
                tab.a[i * cols + art] = 1.0;
                tab.basis[i] = art;
                art += 1;
            }
            Sense::Eq => {
                tab.a[i * cols + art] = 1.0;
                tab.basis[i] = art;
                art += 1;
            }
        }
    }

    // Phase one: minimise the sum of artificials.
    if n_art > 0 {
        for j in art_start..cols {
            tab.obj[j] = 1.0;
        }
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for j in 0..cols {
                    tab.obj[j] -= tab.get(i, j);
                }
            }
        }
        let allowed = vec![true; cols];
        match tab.optimise(&allowed) {
            None => return TextbookOutcome::Stalled,
            Some(false) => return TextbookOutcome::Stalled,
            Some(true) => {}
        }
        let w: f64 = (0..m).filter(|&i| tab.basis[i] >= art_start).map(|i| tab.rhs[i]).sum();
        let scale = rows.iter().fold(1.0_f64, |s, r| s.max(r.2.abs()));
        if w > 1e-8 * scale {
            return TextbookOutcome::Infeasible;
        }
        // Drive remaining (zero-level) artificials out where possible.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab.get(i, j).abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    // Phase two.
    let mut cost = vec![0.0; cols];
    for (v, c) in model.objective().terms() {
        let j = col_of[v.index()];
        if j != usize::MAX {
            cost[j] = c;
        }
    }
    tab.obj = cost.clone();
    for i in 0..m {
        let cb = cost[tab.basis[i]];
        if cb != 0.0 {
            for j in 0..cols {
                tab.obj[j] -= cb * tab.get(i, j);
            }
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
    match tab.optimise(&allowed) {
        None => return TextbookOutcome::Stalled,
        Some(false) => return TextbookOutcome::Unbounded,
        Some(true) => {}
    }

    let mut x: Vec<f64> = lower.to_vec();
    for i in 0..m {
        let b = tab.basis[i];
        if b < nf {
            x[free[b]] = lower[free[b]] + tab.rhs[i];
        }
    }
    TextbookOutcome::Optimal(x)
}
