//! Electricity-network agent: unit commitment and DC power flow.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use serde::{Deserialize, Serialize};

use crate::case::{Generator, Line, PlanningCase};
use crate::channel::{add_channel_vars, add_penalties, AgentMode, BuildError, ChannelArray, ChannelVars, PenaltyTerm};
use crate::cost::CostBreakdown;
use crate::milp::{LinearExpression, MilpError, Model, Sense, VarId};

#[derive(Clone, Debug)]
pub struct ElecVars {
    /// `P[j][t]`
    pub output: Vec<Vec<VarId>>,
    /// `u[j][t]`
    pub on: Vec<Vec<VarId>>,
    /// `v[j][t]`; `None` at the first period, which has no history.
    pub startup: Vec<Vec<Option<VarId>>>,
    /// `w[j][t]`; `None` at the first period.
    pub shutdown: Vec<Vec<Option<VarId>>>,
    /// `PF[l][t]`, existing lines first.
    pub flow: Vec<Vec<VarId>>,
    /// `θ[n][t]`
    pub angle: Vec<Vec<VarId>>,
    /// `y_l`, candidates only.
    pub build: Vec<Option<VarId>>,
    pub tp: ChannelVars,
    pub invest: LinearExpression,
    pub operate: LinearExpression,
    pub penalties: Vec<PenaltyTerm>,
}

fn add_variables(model: &mut Model, case: &PlanningCase) -> Result<ElecVars, BuildError> {
    let e = &case.electric;
    let t_len = case.horizon;
    let mut output = Vec::new();
    let mut on = Vec::new();
    let mut startup = Vec::new();
    let mut shutdown = Vec::new();
    for g in &e.generators {
        let mut p = Vec::new();
        let mut u = Vec::new();
        let mut v = Vec::new();
        let mut w = Vec::new();
        for t in 0..t_len {
            p.push(model.continuous(0.0, g.output_max, format!("P_g{}_{t}", g.id))?);
            u.push(model.binary(format!("u_g{}_{t}", g.id))?);
            if t == 0 {
                v.push(None);
                w.push(None);
            } else {
                v.push(Some(model.binary(format!("v_g{}_{t}", g.id))?));
                w.push(Some(model.binary(format!("w_g{}_{t}", g.id))?));
            }
        }
        output.push(p);
        on.push(u);
        startup.push(v);
        shutdown.push(w);
    }
    let mut flow = Vec::new();
    let mut build = Vec::new();
    for (line, candidate) in e.lines() {
        let label = line_label(line, candidate);
        flow.push(
            (0..t_len)
                .map(|t| model.continuous(-line.flow_max, line.flow_max, format!("PF_{label}_{t}")))
                .collect::<Result<Vec<_>, _>>()?,
        );
        build.push(if candidate { Some(model.binary(format!("y_{label}"))?) } else { None });
    }
    let angle = e
        .buses
        .iter()
        .map(|b| {
            let (lo, hi) = if b.id == e.slack_bus { (0.0, 0.0) } else { (-PI, PI) };
            (0..t_len)
                .map(|t| model.continuous(lo, hi, format!("theta_{}_{t}", b.id)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let caps: Vec<f64> = (0..case.ries.len()).map(|h| case.elec_channel_cap(h)).collect();
    let tp = add_channel_vars(model, "TPe", e.buses.len(), &caps, t_len, |n, h| case.elec_channel_open(n, h))?;
    Ok(ElecVars {
        output,
        on,
        startup,
        shutdown,
        flow,
        angle,
        build,
        tp,
        invest: LinearExpression::new(),
        operate: LinearExpression::new(),
        penalties: Vec::new(),
    })
}

fn line_label(line: &Line, candidate: bool) -> alloc::string::String {
    format!("{}{}", if candidate { "cl" } else { "el" }, line.id)
}

/// Output gating, ramps, rolling min-up/min-down windows, state transition
/// and start/stop exclusivity for generator `index`.
///
/// Windows are clipped to periods that carry startup/shutdown variables.
pub fn emit_unit_commitment(
    model: &mut Model,
    vars: &ElecVars,
    index: usize,
    gen: &Generator,
) -> Result<(), MilpError> {
    let p = &vars.output[index];
    let u = &vars.on[index];
    let v = &vars.startup[index];
    let w = &vars.shutdown[index];
    let id = gen.id;
    for t in 0..p.len() {
        model.add_constraint(
            LinearExpression::from_terms([(p[t], 1.0), (u[t], -gen.output_min)]),
            Sense::Ge,
            0.0,
            format!("pmin_g{id}_{t}"),
        )?;
        model.add_constraint(
            LinearExpression::from_terms([(p[t], 1.0), (u[t], -gen.output_max)]),
            Sense::Le,
            0.0,
            format!("pmax_g{id}_{t}"),
        )?;
        if t == 0 {
            continue;
        }
        let step = LinearExpression::from_terms([(p[t], 1.0), (p[t - 1], -1.0)]);
        model.add_constraint(step.clone(), Sense::Le, gen.ramp_up, format!("ramp_up_g{id}_{t}"))?;
        model.add_constraint(step, Sense::Ge, -gen.ramp_down, format!("ramp_dn_g{id}_{t}"))?;

        let (vt, wt) = (v[t].expect("t >= 1"), w[t].expect("t >= 1"));
        let first_up = (t + 1).saturating_sub(gen.min_up).max(1);
        let mut up = LinearExpression::term(u[t], -1.0);
        for vs in &v[first_up..=t] {
            up.add_term(vs.expect("t >= 1"), 1.0);
        }
        model.add_constraint(up, Sense::Le, 0.0, format!("min_up_g{id}_{t}"))?;

        let first_down = (t + 1).saturating_sub(gen.min_down).max(1);
        let mut down = LinearExpression::term(u[t], 1.0);
        for ws in &w[first_down..=t] {
            down.add_term(ws.expect("t >= 1"), 1.0);
        }
        model.add_constraint(down, Sense::Le, 1.0, format!("min_down_g{id}_{t}"))?;

        model.add_constraint(
            LinearExpression::from_terms([(u[t], 1.0), (u[t - 1], -1.0), (vt, -1.0), (wt, 1.0)]),
            Sense::Eq,
            0.0,
            format!("transition_g{id}_{t}"),
        )?;
        model.add_constraint(
            LinearExpression::from_terms([(vt, 1.0), (wt, 1.0)]),
            Sense::Le,
            1.0,
            format!("start_stop_g{id}_{t}"),
        )?;
    }
    Ok(())
}

/// DC flow on line `index`: exact on existing lines, Big-M `2π/x` on
/// candidates with `|PF| ≤ y·PF̄`.
pub fn emit_dc_flow(
    model: &mut Model,
    vars: &ElecVars,
    case: &PlanningCase,
    index: usize,
    line: &Line,
    candidate: bool,
) -> Result<(), MilpError> {
    let label = line_label(line, candidate);
    let from = case.electric.bus_index(line.from).expect("validated case");
    let to = case.electric.bus_index(line.to).expect("validated case");
    let b = 1.0 / line.reactance;
    let big_m = 2.0 * PI / line.reactance;
    for t in 0..case.horizon {
        let pf = vars.flow[index][t];
        let law = LinearExpression::from_terms([
            (pf, 1.0),
            (vars.angle[from][t], -b),
            (vars.angle[to][t], b),
        ]);
        match vars.build[index] {
            None => {
                model.add_constraint(law, Sense::Eq, 0.0, format!("dc_{label}_{t}"))?;
            }
            Some(y) => {
                // |PF − Δθ/x| ≤ (1 − y)·M
                model.add_constraint(law.clone().with(y, big_m), Sense::Le, big_m, format!("dc_hi_{label}_{t}"))?;
                model.add_constraint(law.with(y, -big_m), Sense::Ge, -big_m, format!("dc_lo_{label}_{t}"))?;
                model.add_constraint(
                    LinearExpression::from_terms([(pf, 1.0), (y, -line.flow_max)]),
                    Sense::Le,
                    0.0,
                    format!("cap_hi_{label}_{t}"),
                )?;
                model.add_constraint(
                    LinearExpression::from_terms([(pf, 1.0), (y, line.flow_max)]),
                    Sense::Ge,
                    0.0,
                    format!("cap_lo_{label}_{t}"),
                )?;
            }
        }
    }
    Ok(())
}

/// Bus balance: generation minus line outflow equals transmitted power plus load.
pub fn emit_bus_balance(model: &mut Model, vars: &ElecVars, case: &PlanningCase) -> Result<(), MilpError> {
    let e = &case.electric;
    for (n, bus) in e.buses.iter().enumerate() {
        for t in 0..case.horizon {
            let mut row = LinearExpression::new();
            for (j, g) in e.generators.iter().enumerate() {
                if g.bus == bus.id {
                    row.add_term(vars.output[j][t], 1.0);
                }
            }
            for (l, (line, _)) in e.lines().enumerate() {
                if line.from == bus.id {
                    row.add_term(vars.flow[l][t], -1.0);
                }
                if line.to == bus.id {
                    row.add_term(vars.flow[l][t], 1.0);
                }
            }
            row += vars.tp.outflow(n, t) * -1.0;
            model.add_constraint(row, Sense::Eq, case.elec_load(n, t), format!("bus_balance_{}_{t}", bus.id))?;
        }
    }
    Ok(())
}

pub fn emit_electric(model: &mut Model, case: &PlanningCase) -> Result<ElecVars, BuildError> {
    let mut vars = add_variables(model, case)?;
    for (j, g) in case.electric.generators.iter().enumerate() {
        emit_unit_commitment(model, &vars, j, g)?;
    }
    for (l, (line, candidate)) in case.electric.lines().enumerate() {
        emit_dc_flow(model, &vars, case, l, line, candidate)?;
    }
    emit_bus_balance(model, &vars, case)?;
    for (l, (line, _)) in case.electric.lines().enumerate() {
        if let Some(y) = vars.build[l] {
            vars.invest.add_term(y, line.invest_cost);
        }
    }
    for (j, g) in case.electric.generators.iter().enumerate() {
        for &p in &vars.output[j] {
            vars.operate.add_term(p, g.cost);
        }
    }
    Ok(vars)
}

/// Electricity agent model: own costs, plus the consensus terms in ADMM mode.
pub fn build_electric_model(case: &PlanningCase, mode: AgentMode<'_>) -> Result<(Model, ElecVars), BuildError> {
    let mut model = Model::new();
    let mut vars = emit_electric(&mut model, case)?;
    model.add_objective(&vars.invest)?;
    model.add_objective(&vars.operate)?;
    if let AgentMode::Admm(pen) = mode {
        vars.penalties = add_penalties(&mut model, &vars.tp, &pen, "en")?;
    }
    Ok((model, vars))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElecPlan {
    pub built_lines: Vec<u32>,
    /// `[generator][t]`, 0 or 1.
    pub commitment: Vec<Vec<u8>>,
    /// `[generator][t]`, MW.
    pub dispatch: Vec<Vec<f64>>,
    /// `[line][t]`, existing lines first.
    pub flows: Vec<Vec<f64>>,
    pub transmitted: ChannelArray,
    pub cost: CostBreakdown,
}

impl ElecPlan {
    pub fn extract(case: &PlanningCase, vars: &ElecVars, x: &[f64]) -> Self {
        let read = |v: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            v.iter().map(|row| row.iter().map(|id| x[id.index()]).collect()).collect()
        };
        Self {
            built_lines: case
                .electric
                .lines()
                .enumerate()
                .filter(|(l, _)| vars.build[*l].is_some_and(|y| x[y.index()] > 0.5))
                .map(|(_, (line, _))| line.id)
                .collect(),
            commitment: vars
                .on
                .iter()
                .map(|row| row.iter().map(|u| u8::from(x[u.index()] > 0.5)).collect())
                .collect(),
            dispatch: read(&vars.output),
            flows: read(&vars.flow),
            transmitted: vars.tp.values(x),
            cost: CostBreakdown::evaluate(&vars.invest, &vars.operate, x),
        }
    }
}
