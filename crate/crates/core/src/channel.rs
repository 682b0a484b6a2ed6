//! Coupling channels between network nodes and RIES, and the per-agent
//! consensus terms added in ADMM mode.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::milp::{LinearExpression, MilpError, Model, VarId};

/// Dense (node, ries, period) array. Closed channels hold zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelArray {
    pub nodes: usize,
    pub ries: usize,
    pub horizon: usize,
    pub data: Vec<f64>,
}

impl ChannelArray {
    pub fn filled(nodes: usize, ries: usize, horizon: usize, value: f64) -> Self {
        Self {
            nodes,
            ries,
            horizon,
            data: vec![value; nodes * ries * horizon],
        }
    }

    pub fn zeros(nodes: usize, ries: usize, horizon: usize) -> Self {
        Self::filled(nodes, ries, horizon, 0.0)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nodes, self.ries, self.horizon)
    }

    fn at(&self, m: usize, h: usize, t: usize) -> usize {
        debug_assert!(m < self.nodes && h < self.ries && t < self.horizon);
        (m * self.ries + h) * self.horizon + t
    }

    pub fn get(&self, m: usize, h: usize, t: usize) -> f64 {
        self.data[self.at(m, h, t)]
    }

    pub fn set(&mut self, m: usize, h: usize, t: usize, value: f64) {
        let i = self.at(m, h, t);
        self.data[i] = value;
    }

    /// Largest elementwise |self − other|; shapes must match.
    pub fn max_abs_diff(&self, other: &ChannelArray) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Transmitted or received power variables of one agent, `None` on closed channels.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelVars {
    pub nodes: usize,
    pub ries: usize,
    pub horizon: usize,
    pub vars: Vec<Option<VarId>>,
    /// Upper bound per RIES.
    pub caps: Vec<f64>,
}

impl ChannelVars {
    pub fn get(&self, m: usize, h: usize, t: usize) -> Option<VarId> {
        self.vars[(m * self.ries + h) * self.horizon + t]
    }

    pub fn open(&self) -> impl Iterator<Item = (usize, usize, usize, VarId)> + '_ {
        let (r, tt) = (self.ries, self.horizon);
        self.vars
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|v| (i / (r * tt), (i / tt) % r, i % tt, v)))
    }

    /// Reads the channel values out of a solved point.
    pub fn values(&self, x: &[f64]) -> ChannelArray {
        let mut out = ChannelArray::zeros(self.nodes, self.ries, self.horizon);
        for (m, h, t, v) in self.open() {
            out.set(m, h, t, x[v.index()]);
        }
        out
    }

    /// Sum of the open variables at (·, h, t).
    pub fn inflow(&self, h: usize, t: usize) -> LinearExpression {
        (0..self.nodes)
            .filter_map(|m| self.get(m, h, t))
            .map(|v| (v, 1.0))
            .collect()
    }

    /// Sum of the open variables at (m, ·, t).
    pub fn outflow(&self, m: usize, t: usize) -> LinearExpression {
        (0..self.ries)
            .filter_map(|h| self.get(m, h, t))
            .map(|v| (v, 1.0))
            .collect()
    }
}

/// Adds one channel variable per open (m, h, t) with bounds `[0, caps[h]]`.
pub(crate) fn add_channel_vars(
    model: &mut Model,
    prefix: &str,
    nodes: usize,
    caps: &[f64],
    horizon: usize,
    open: impl Fn(usize, usize) -> bool,
) -> Result<ChannelVars, MilpError> {
    let ries = caps.len();
    let mut vars = Vec::with_capacity(nodes * ries * horizon);
    for m in 0..nodes {
        for (h, &cap) in caps.iter().enumerate() {
            let is_open = open(m, h);
            for t in 0..horizon {
                vars.push(if is_open {
                    Some(model.continuous(0.0, cap, alloc::format!("{prefix}_{m}_{h}_{t}"))?)
                } else {
                    None
                });
            }
        }
    }
    Ok(ChannelVars {
        nodes,
        ries,
        horizon,
        vars,
        caps: caps.to_vec(),
    })
}

/// Consensus data one agent sees for one carrier.
#[derive(Clone, Copy, Debug)]
pub struct Penalty<'a> {
    pub lambda: &'a ChannelArray,
    pub ip: &'a ChannelArray,
    pub rho: f64,
    /// Knot count of the linearised quadratic.
    pub knots: usize,
}

/// Joint slice (plain costs) or ADMM subproblem (costs plus consensus terms).
#[derive(Clone, Copy, Debug)]
pub enum AgentMode<'a> {
    JointSlice,
    Admm(Penalty<'a>),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("consensus shape {got:?} does not match channel shape {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

impl Penalty<'_> {
    pub(crate) fn check_shape(&self, channels: &ChannelVars) -> Result<(), BuildError> {
        let expected = (channels.nodes, channels.ries, channels.horizon);
        for got in [self.lambda.shape(), self.ip.shape()] {
            if got != expected {
                return Err(BuildError::ShapeMismatch { expected, got });
            }
        }
        Ok(())
    }
}

/// Knots for (x − ip)² on [0, cap]: ip ± j·h with h = cap/(knots − 1),
/// clipped to the interval, plus both ends.
pub fn penalty_knots(ip: f64, cap: f64, knots: usize) -> Vec<f64> {
    let ip = ip.clamp(0.0, cap);
    let h = cap / (knots.max(2) - 1) as f64;
    let mut xs = vec![0.0, cap, ip];
    let mut j = 1.0;
    while ip - j * h > 0.0 || ip + j * h < cap {
        if ip - j * h > 0.0 {
            xs.push(ip - j * h);
        }
        if ip + j * h < cap {
            xs.push(ip + j * h);
        }
        j += 1.0;
    }
    xs.sort_by(f64::total_cmp);
    // Knots closer than this would only add degenerate columns.
    let tiny = cap * 1e-9;
    xs.dedup_by(|a, b| (*a - *b).abs() <= tiny);
    xs
}

/// Linearised `λ(x − ip) + ρ/2·(x − ip)²` on one channel variable.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyTerm {
    pub var: VarId,
    pub ip: f64,
    pub rho: f64,
    pub knots: Vec<f64>,
    /// Incremental fill per knot interval.
    pub fill: Vec<VarId>,
}

impl PenaltyTerm {
    /// Exact value of `ρ/2·(x − ip)²` at `x`.
    pub fn exact(&self, x: f64) -> f64 {
        0.5 * self.rho * (x - self.ip) * (x - self.ip)
    }

    /// Value of the linearised quadratic at `x` (chord interpolation).
    pub fn linearised(&self, x: f64) -> f64 {
        let q = |z: f64| 0.5 * self.rho * (z - self.ip) * (z - self.ip);
        let k = &self.knots;
        if k.len() < 2 {
            return q(x);
        }
        let i = k.partition_point(|&z| z <= x).clamp(1, k.len() - 1);
        let (a, b) = (k[i - 1], k[i]);
        let s = (x - a) / (b - a);
        q(a) + s * (q(b) - q(a))
    }

    /// Largest gap between chord and parabola on this knot set.
    pub fn max_chord_error(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| 0.125 * self.rho * (w[1] - w[0]) * (w[1] - w[0]))
            .fold(0.0, f64::max)
    }
}

/// Adds the consensus terms for every open channel to the objective.
pub(crate) fn add_penalties(
    model: &mut Model,
    channels: &ChannelVars,
    penalty: &Penalty<'_>,
    prefix: &str,
) -> Result<Vec<PenaltyTerm>, BuildError> {
    penalty.check_shape(channels)?;
    let mut terms = Vec::new();
    for (m, h, t, x) in channels.open() {
        let lambda = penalty.lambda.get(m, h, t);
        let ip = penalty.ip.get(m, h, t);
        let cap = channels.caps[h];
        let knots = penalty_knots(ip, cap, penalty.knots);
        let q = |z: f64| 0.5 * penalty.rho * (z - ip) * (z - ip);

        // x = Σ σ_k (x_k − x_{k−1}) with the first knot at 0; convexity
        // makes the LP fill the intervals in order.
        let mut link = LinearExpression::term(x, -1.0);
        let mut obj = LinearExpression::constant(q(knots[0]) - lambda * ip);
        obj.add_term(x, lambda);
        let mut fill = Vec::with_capacity(knots.len() - 1);
        for (k, w) in knots.windows(2).enumerate() {
            let s = model.continuous(0.0, 1.0, alloc::format!("{prefix}_pen_{m}_{h}_{t}_{k}"))?;
            link.add_term(s, w[1] - w[0]);
            obj.add_term(s, q(w[1]) - q(w[0]));
            fill.push(s);
        }
        model.add_constraint(link, crate::milp::Sense::Eq, 0.0, alloc::format!("{prefix}_pen_link_{m}_{h}_{t}"))?;
        model.add_objective(&obj)?;
        terms.push(PenaltyTerm {
            var: x,
            ip,
            rho: penalty.rho,
            knots,
            fill,
        });
    }
    Ok(terms)
}
