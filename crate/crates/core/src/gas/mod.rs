//! Gas-network agent.
//!
//! Squared pressures `I = π²` replace pressures, so the Weymouth relation
//! `GF|GF| = W²(I_from − I_to)` is linear in `I` and only the flow side
//! needs a piecewise-linear interpolant.

mod pwl;

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::case::{GasSource, PlanningCase, Pipeline};
use crate::channel::{add_channel_vars, add_penalties, AgentMode, BuildError, ChannelArray, ChannelVars, PenaltyTerm};
use crate::cost::CostBreakdown;
use crate::milp::{LinearExpression, MilpError, Model, Sense, VarId};

pub use pwl::{make_pwl_grid, PwlError, PwlGrid};

#[derive(Clone, Debug)]
pub struct GasVars {
    /// `p[s][t]`
    pub source: Vec<Vec<VarId>>,
    /// `GF[p][t]`, existing pipes first, then candidates.
    pub flow: Vec<Vec<VarId>>,
    /// `I[m][t]`
    pub pressure_sq: Vec<Vec<VarId>>,
    /// `δ[p][t][k]`
    pub fill: Vec<Vec<Vec<VarId>>>,
    /// `φ[p][t][k]`, one fewer than the segments.
    pub select: Vec<Vec<Vec<VarId>>>,
    /// `y_p`, candidates only.
    pub build: Vec<Option<VarId>>,
    /// `y^com_p`, where a compressor is allowed.
    pub compressor: Vec<Option<VarId>>,
    pub tp: ChannelVars,
    pub grids: Vec<PwlGrid>,
    pub invest: LinearExpression,
    pub operate: LinearExpression,
    pub penalties: Vec<PenaltyTerm>,
}

/// Big-M that makes a relaxed Weymouth row vacuous.
pub fn weymouth_big_m(case: &PlanningCase, pipe: &Pipeline) -> f64 {
    let pi_max = case.gas.nodes.iter().map(|n| n.pressure_max).fold(0.0, f64::max);
    2.0 * pipe.weymouth * pipe.weymouth * pi_max * pi_max + pipe.flow_max * pipe.flow_max
}

fn pipe_label(pipe: &Pipeline, candidate: bool) -> alloc::string::String {
    format!("{}{}", if candidate { "cp" } else { "ep" }, pipe.id)
}

/// Creates every gas variable; constraints are added by the `emit_*` functions.
fn add_variables(model: &mut Model, case: &PlanningCase) -> Result<GasVars, BuildError> {
    let g = &case.gas;
    let t_len = case.horizon;
    let source = g
        .sources
        .iter()
        .map(|s| {
            (0..t_len)
                .map(|t| model.continuous(s.output_min, s.output_max, format!("p_s{}_{t}", s.id)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pressure_sq = g
        .nodes
        .iter()
        .map(|n| {
            (0..t_len)
                .map(|t| {
                    model.continuous(
                        n.pressure_min * n.pressure_min,
                        n.pressure_max * n.pressure_max,
                        format!("I_{}_{t}", n.id),
                    )
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut flow = Vec::new();
    let mut fill = Vec::new();
    let mut select = Vec::new();
    let mut build = Vec::new();
    let mut compressor = Vec::new();
    let mut grids = Vec::new();
    for (pipe, candidate) in g.pipes() {
        let label = pipe_label(pipe, candidate);
        let grid = make_pwl_grid(pipe.flow_max, case.segments).map_err(|e| {
            MilpError::Conditioning(format!("pipe {label}: {e}"))
        })?;
        let seg = grid.segments();
        let mut f = Vec::with_capacity(t_len);
        let mut d = Vec::with_capacity(t_len);
        let mut s = Vec::with_capacity(t_len);
        for t in 0..t_len {
            f.push(model.continuous(-pipe.flow_max, pipe.flow_max, format!("GF_{label}_{t}"))?);
            d.push(
                (0..seg)
                    .map(|k| model.continuous(0.0, 1.0, format!("delta_{label}_{t}_{k}")))
                    .collect::<Result<Vec<_>, _>>()?,
            );
            s.push(
                (0..seg - 1)
                    .map(|k| model.binary(format!("phi_{label}_{t}_{k}")))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        flow.push(f);
        fill.push(d);
        select.push(s);
        build.push(if candidate { Some(model.binary(format!("y_{label}"))?) } else { None });
        compressor.push(if pipe.compressor_allowed {
            Some(model.binary(format!("ycom_{label}"))?)
        } else {
            None
        });
        grids.push(grid);
    }

    let caps: Vec<f64> = (0..case.ries.len()).map(|h| case.gas_channel_cap(h)).collect();
    let tp = add_channel_vars(model, "TPg", g.nodes.len(), &caps, t_len, |m, h| case.gas_channel_open(m, h))?;

    Ok(GasVars {
        source,
        flow,
        pressure_sq,
        fill,
        select,
        build,
        compressor,
        tp,
        grids,
        invest: LinearExpression::new(),
        operate: LinearExpression::new(),
        penalties: Vec::new(),
    })
}

/// Output limits come from the variable bounds; this adds the ramp rows
/// `−RD ≤ p_t − p_{t−1} ≤ RU` for `t ≥ 2`.
pub fn emit_source_constraints(
    model: &mut Model,
    vars: &GasVars,
    index: usize,
    source: &GasSource,
) -> Result<(), MilpError> {
    let p = &vars.source[index];
    for t in 1..p.len() {
        let step = LinearExpression::from_terms([(p[t], 1.0), (p[t - 1], -1.0)]);
        model.add_constraint(step.clone(), Sense::Le, source.ramp_up, format!("ramp_up_s{}_{t}", source.id))?;
        model.add_constraint(step, Sense::Ge, -source.ramp_down, format!("ramp_dn_s{}_{t}", source.id))?;
    }
    Ok(())
}

/// Flow interpolation, the Big-M gated Weymouth rows, segment ordering and
/// candidate flow bounds for pipe `index`.
///
/// The pressure-side row is gated: an installed compressor lifts it, and so
/// does leaving a candidate unbuilt. Rows are scaled by `GF̄²`.
pub fn emit_weymouth_pwl(
    model: &mut Model,
    vars: &GasVars,
    case: &PlanningCase,
    index: usize,
    pipe: &Pipeline,
    candidate: bool,
) -> Result<(), MilpError> {
    let label = pipe_label(pipe, candidate);
    let grid = &vars.grids[index];
    let from = case.gas.node_index(pipe.from).expect("validated case");
    let to = case.gas.node_index(pipe.to).expect("validated case");
    let scale = pipe.flow_max * pipe.flow_max;
    let big_m = weymouth_big_m(case, pipe) / scale;
    let w2 = pipe.weymouth * pipe.weymouth / scale;
    let build = vars.build[index];
    let com = vars.compressor[index];

    for t in 0..case.horizon {
        let gf = vars.flow[index][t];
        let delta = &vars.fill[index][t];
        let phi = &vars.select[index][t];

        // GF = GF_1 + Σ δ_k (GF_{k+1} − GF_k)
        let mut interp = LinearExpression::term(gf, 1.0);
        for (k, &d) in delta.iter().enumerate() {
            interp.add_term(d, -(grid.breakpoints[k + 1] - grid.breakpoints[k]));
        }
        model.add_constraint(interp, Sense::Eq, grid.breakpoints[0], format!("pwl_flow_{label}_{t}"))?;

        // W²(I_from − I_to) − [f_1 + Σ δ_k (f_{k+1} − f_k)], scaled
        let mut gap = LinearExpression::from_terms([
            (vars.pressure_sq[from][t], w2),
            (vars.pressure_sq[to][t], -w2),
        ]);
        for (k, &d) in delta.iter().enumerate() {
            gap.add_term(d, -(grid.images[k + 1] - grid.images[k]) / scale);
        }
        gap.add_constant(-grid.images[0] / scale);

        // slack = M·gate
        let mut slack = LinearExpression::new();
        if let Some(y) = build {
            slack.add_constant(big_m).add_term(y, -big_m);
        }
        if let Some(c) = com {
            slack.add_term(c, big_m);
        }
        model.add_constraint(gap.clone() - slack.clone(), Sense::Le, 0.0, format!("weymouth_hi_{label}_{t}"))?;
        model.add_constraint(gap + slack, Sense::Ge, 0.0, format!("weymouth_lo_{label}_{t}"))?;

        // δ_{k+1} ≤ φ_k ≤ δ_k
        for (k, &f) in phi.iter().enumerate() {
            model.add_constraint(
                LinearExpression::from_terms([(delta[k + 1], 1.0), (f, -1.0)]),
                Sense::Le,
                0.0,
                format!("order_hi_{label}_{t}_{k}"),
            )?;
            model.add_constraint(
                LinearExpression::from_terms([(f, 1.0), (delta[k], -1.0)]),
                Sense::Le,
                0.0,
                format!("order_lo_{label}_{t}_{k}"),
            )?;
        }

        if let Some(y) = build {
            model.add_constraint(
                LinearExpression::from_terms([(gf, 1.0), (y, -pipe.flow_max)]),
                Sense::Le,
                0.0,
                format!("cap_hi_{label}_{t}"),
            )?;
            model.add_constraint(
                LinearExpression::from_terms([(gf, 1.0), (y, pipe.flow_max)]),
                Sense::Ge,
                0.0,
                format!("cap_lo_{label}_{t}"),
            )?;
        }
    }
    if let (Some(y), Some(c)) = (build, com) {
        model.add_constraint(
            LinearExpression::from_terms([(c, 1.0), (y, -1.0)]),
            Sense::Le,
            0.0,
            format!("com_needs_pipe_{label}"),
        )?;
    }
    Ok(())
}

/// Nodal balance: supply minus pipe outflow equals transmitted gas plus load.
pub fn emit_gas_balance(model: &mut Model, vars: &GasVars, case: &PlanningCase) -> Result<(), MilpError> {
    let g = &case.gas;
    for (m, node) in g.nodes.iter().enumerate() {
        for t in 0..case.horizon {
            let mut row = LinearExpression::new();
            for (s, src) in g.sources.iter().enumerate() {
                if src.node == node.id {
                    row.add_term(vars.source[s][t], 1.0);
                }
            }
            for (p, (pipe, _)) in g.pipes().enumerate() {
                if pipe.from == node.id {
                    row.add_term(vars.flow[p][t], -1.0);
                }
                if pipe.to == node.id {
                    row.add_term(vars.flow[p][t], 1.0);
                }
            }
            row += vars.tp.outflow(m, t) * -1.0;
            model.add_constraint(row, Sense::Eq, case.gas_load(m, t), format!("gas_balance_{}_{t}", node.id))?;
        }
    }
    Ok(())
}

/// Adds the whole gas network to `model` and returns its variables and cost
/// expressions; the objective is left untouched.
pub fn emit_gas(model: &mut Model, case: &PlanningCase) -> Result<GasVars, BuildError> {
    let mut vars = add_variables(model, case)?;
    for (s, src) in case.gas.sources.iter().enumerate() {
        emit_source_constraints(model, &vars, s, src)?;
    }
    for (p, (pipe, candidate)) in case.gas.pipes().enumerate() {
        emit_weymouth_pwl(model, &vars, case, p, pipe, candidate)?;
    }
    emit_gas_balance(model, &vars, case)?;

    for (p, (pipe, _)) in case.gas.pipes().enumerate() {
        if let Some(y) = vars.build[p] {
            vars.invest.add_term(y, pipe.invest_cost);
        }
        if let Some(c) = vars.compressor[p] {
            vars.invest.add_term(c, pipe.compressor_cost);
        }
    }
    for (s, src) in case.gas.sources.iter().enumerate() {
        for &p in &vars.source[s] {
            vars.operate.add_term(p, src.cost);
        }
    }
    Ok(vars)
}

/// Gas agent model: own costs, plus the consensus terms in ADMM mode.
pub fn build_gas_model(case: &PlanningCase, mode: AgentMode<'_>) -> Result<(Model, GasVars), BuildError> {
    let mut model = Model::new();
    let mut vars = emit_gas(&mut model, case)?;
    model.add_objective(&vars.invest)?;
    model.add_objective(&vars.operate)?;
    if let AgentMode::Admm(pen) = mode {
        vars.penalties = add_penalties(&mut model, &vars.tp, &pen, "gn")?;
    }
    Ok((model, vars))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasPlan {
    pub built_pipes: Vec<u32>,
    pub built_compressors: Vec<u32>,
    /// `[source][t]`, m³/h.
    pub dispatch: Vec<Vec<f64>>,
    /// `[pipe][t]`, existing pipes first.
    pub flows: Vec<Vec<f64>>,
    /// `[node][t]`, recovered as `√I`.
    pub pressures: Vec<Vec<f64>>,
    pub transmitted: ChannelArray,
    pub cost: CostBreakdown,
}

impl GasPlan {
    pub fn extract(case: &PlanningCase, vars: &GasVars, x: &[f64]) -> Self {
        let read = |v: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            v.iter().map(|row| row.iter().map(|id| x[id.index()]).collect()).collect()
        };
        let on = |v: Option<VarId>| v.is_some_and(|id| x[id.index()] > 0.5);
        let pipes: Vec<(&Pipeline, bool)> = case.gas.pipes().collect();
        Self {
            built_pipes: pipes
                .iter()
                .enumerate()
                .filter(|(p, _)| on(vars.build[*p]))
                .map(|(_, (pipe, _))| pipe.id)
                .collect(),
            built_compressors: pipes
                .iter()
                .enumerate()
                .filter(|(p, _)| on(vars.compressor[*p]))
                .map(|(_, (pipe, _))| pipe.id)
                .collect(),
            dispatch: read(&vars.source),
            flows: read(&vars.flow),
            pressures: read(&vars.pressure_sq)
                .into_iter()
                .map(|row| row.into_iter().map(|i| libm::sqrt(i.max(0.0))).collect())
                .collect(),
            transmitted: vars.tp.values(x),
            cost: CostBreakdown::evaluate(&vars.invest, &vars.operate, x),
        }
    }
}
