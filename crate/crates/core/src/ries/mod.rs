//! RIES agent: energy hub, renewable and storage sizing, siting, and the
//! input-side balance against received power.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::case::{Carrier, DeviceKind, PlanningCase, RenewableKind, RiesSpec, StorageKind, StorageOption};
use crate::channel::{add_channel_vars, add_penalties, BuildError, ChannelArray, ChannelVars, Penalty, PenaltyTerm};
use crate::cost::CostBreakdown;
use crate::milp::{LinearExpression, MilpError, Model, Sense, VarId};

#[derive(Clone, Debug)]
pub struct RenewableVars {
    pub modules: VarId,
    pub output: Vec<VarId>,
}

#[derive(Clone, Debug)]
pub struct StorageVars {
    pub modules: VarId,
    pub charge: Vec<VarId>,
    pub discharge: Vec<VarId>,
    pub charging: Vec<VarId>,
    pub discharging: Vec<VarId>,
    pub soc: Vec<VarId>,
}

/// Variables of one RIES.
#[derive(Clone, Debug)]
pub struct UnitVars {
    /// `P^in[d][t]`, indexed like the device catalog.
    pub input: Vec<Vec<VarId>>,
    pub built: Vec<VarId>,
    /// `P^out[k][t]` in [`Carrier::ALL`] order.
    pub output: Vec<Vec<VarId>>,
    pub renewables: Vec<RenewableVars>,
    pub storage: Vec<StorageVars>,
    /// `(gas node index, s)` per eligible site.
    pub gas_sites: Vec<(usize, VarId)>,
    /// `(bus index, s)` per eligible site.
    pub bus_sites: Vec<(usize, VarId)>,
    pub invest: LinearExpression,
    pub operate: LinearExpression,
}

#[derive(Clone, Debug)]
pub struct RiesVars {
    pub units: Vec<UnitVars>,
    /// `RP^g[m][h][t]`, m³/h.
    pub rp_gas: ChannelVars,
    /// `RP^e[n][h][t]`, MW.
    pub rp_elec: ChannelVars,
    pub penalties: Vec<PenaltyTerm>,
}

impl RiesVars {
    pub fn invest(&self) -> LinearExpression {
        self.units.iter().fold(LinearExpression::new(), |acc, u| acc + u.invest.clone())
    }

    pub fn operate(&self) -> LinearExpression {
        self.units.iter().fold(LinearExpression::new(), |acc, u| acc + u.operate.clone())
    }
}

#[derive(Clone, Copy, Debug)]
pub enum RiesMode<'a> {
    JointSlice,
    Admm { gas: Penalty<'a>, elec: Penalty<'a> },
}

fn carrier_index(c: Carrier) -> usize {
    Carrier::ALL.iter().position(|&k| k == c).expect("listed carrier")
}

fn add_unit_variables(model: &mut Model, case: &PlanningCase, h: usize) -> Result<UnitVars, MilpError> {
    let r = &case.ries[h];
    let t_len = case.horizon;
    let id = r.id;
    let mut input = Vec::new();
    let mut built = Vec::new();
    for (d, dev) in r.devices.iter().enumerate() {
        let name = dev.kind.name();
        input.push(
            (0..t_len)
                .map(|t| model.continuous(0.0, dev.capacity, format!("Pin_r{id}_{name}{d}_{t}")))
                .collect::<Result<Vec<_>, _>>()?,
        );
        built.push(model.binary(format!("y_r{id}_{name}{d}"))?);
    }
    let output = Carrier::ALL
        .iter()
        .map(|&k| {
            let cap: f64 = r.devices.iter().map(|d| d.hub.get(k) * d.capacity).sum();
            (0..t_len)
                .map(|t| model.continuous(0.0, cap, format!("Pout_r{id}_{}_{t}", k.symbol())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut renewables = Vec::new();
    for (i, res) in r.renewables.iter().enumerate() {
        let kind = match res.kind {
            RenewableKind::WT => "WT",
            RenewableKind::PV => "PV",
        };
        let n = res.max_modules as f64;
        renewables.push(RenewableVars {
            modules: model.integer(0.0, n, format!("y_r{id}_{kind}{i}"))?,
            output: (0..t_len)
                .map(|t| model.continuous(0.0, n * res.profile[t], format!("p_r{id}_{kind}{i}_{t}")))
                .collect::<Result<Vec<_>, _>>()?,
        });
    }
    let mut storage = Vec::new();
    for (i, ess) in r.storage.iter().enumerate() {
        let kind = storage_name(ess.kind);
        let n = ess.max_modules as f64;
        let series = |model: &mut Model, tag: &str, hi: f64| {
            (0..t_len)
                .map(|t| model.continuous(0.0, hi, format!("{tag}_r{id}_{kind}{i}_{t}")))
                .collect::<Result<Vec<_>, _>>()
        };
        let charge = series(model, "Pch", n * ess.charge_max)?;
        let discharge = series(model, "Pdis", n * ess.discharge_max)?;
        let soc = series(model, "SOC", n * ess.soc_max)?;
        let flags = |model: &mut Model, tag: &str| {
            (0..t_len)
                .map(|t| model.binary(format!("{tag}_r{id}_{kind}{i}_{t}")))
                .collect::<Result<Vec<_>, _>>()
        };
        let charging = flags(model, "vch")?;
        let discharging = flags(model, "vdis")?;
        storage.push(StorageVars {
            modules: model.integer(0.0, n, format!("y_r{id}_{kind}{i}"))?,
            charge,
            discharge,
            charging,
            discharging,
            soc,
        });
    }
    let gas_sites = r
        .gas_sites
        .iter()
        .map(|s| {
            let m = case.gas.node_index(s.id).expect("validated case");
            Ok((m, model.binary(format!("s_r{id}_gn{}", s.id))?))
        })
        .collect::<Result<Vec<_>, MilpError>>()?;
    let bus_sites = r
        .bus_sites
        .iter()
        .map(|s| {
            let n = case.electric.bus_index(s.id).expect("validated case");
            Ok((n, model.binary(format!("s_r{id}_eb{}", s.id))?))
        })
        .collect::<Result<Vec<_>, MilpError>>()?;
    Ok(UnitVars {
        input,
        built,
        output,
        renewables,
        storage,
        gas_sites,
        bus_sites,
        invest: LinearExpression::new(),
        operate: LinearExpression::new(),
    })
}

fn storage_name(kind: StorageKind) -> &'static str {
    match kind {
        StorageKind::BESS => "BESS",
        StorageKind::TESS => "TESS",
        StorageKind::CESS => "CESS",
    }
}

/// Hub conversion, device gating and renewable module limits.
pub fn emit_hub(model: &mut Model, unit: &UnitVars, ries: &RiesSpec) -> Result<(), MilpError> {
    let id = ries.id;
    let t_len = unit.output[0].len();
    for t in 0..t_len {
        for &k in &Carrier::ALL {
            let mut row = LinearExpression::term(unit.output[carrier_index(k)][t], 1.0);
            for (d, dev) in ries.devices.iter().enumerate() {
                row.add_term(unit.input[d][t], -dev.hub.get(k));
            }
            model.add_constraint(row, Sense::Eq, 0.0, format!("hub_r{id}_{}_{t}", k.symbol()))?;
        }
        for (d, dev) in ries.devices.iter().enumerate() {
            model.add_constraint(
                LinearExpression::from_terms([(unit.input[d][t], 1.0), (unit.built[d], -dev.capacity)]),
                Sense::Le,
                0.0,
                format!("dev_cap_r{id}_{d}_{t}"),
            )?;
        }
        for (i, (res, vars)) in ries.renewables.iter().zip(&unit.renewables).enumerate() {
            model.add_constraint(
                LinearExpression::from_terms([(vars.output[t], 1.0), (vars.modules, -res.profile[t])]),
                Sense::Le,
                0.0,
                format!("res_cap_r{id}_{i}_{t}"),
            )?;
        }
    }
    Ok(())
}

/// Module-scaled storage limits, charge/discharge gating and exclusivity,
/// cyclic state-of-charge recursion and `SOC_1 = SOC_T`.
pub fn emit_ess(model: &mut Model, vars: &StorageVars, ess: &StorageOption, tag: &str) -> Result<(), MilpError> {
    let t_len = vars.soc.len();
    let n = vars.modules;
    let m_ch = ess.max_modules as f64 * ess.charge_max;
    let m_dis = ess.max_modules as f64 * ess.discharge_max;
    for t in 0..t_len {
        let row = |a: VarId, b: VarId, coef: f64| LinearExpression::from_terms([(a, 1.0), (b, -coef)]);
        model.add_constraint(row(vars.charge[t], n, ess.charge_max), Sense::Le, 0.0, format!("ch_cap_{tag}_{t}"))?;
        model.add_constraint(
            row(vars.discharge[t], n, ess.discharge_max),
            Sense::Le,
            0.0,
            format!("dis_cap_{tag}_{t}"),
        )?;
        model.add_constraint(row(vars.charge[t], vars.charging[t], m_ch), Sense::Le, 0.0, format!("ch_gate_{tag}_{t}"))?;
        model.add_constraint(
            row(vars.discharge[t], vars.discharging[t], m_dis),
            Sense::Le,
            0.0,
            format!("dis_gate_{tag}_{t}"),
        )?;
        model.add_constraint(
            LinearExpression::from_terms([(vars.charging[t], 1.0), (vars.discharging[t], 1.0)]),
            Sense::Le,
            1.0,
            format!("ch_xor_{tag}_{t}"),
        )?;
        let prev = vars.soc[(t + t_len - 1) % t_len];
        let mut soc = LinearExpression::from_terms([
            (vars.charge[t], -ess.eta_charge),
            (vars.discharge[t], 1.0 / ess.eta_discharge),
        ]);
        soc.add_term(vars.soc[t], 1.0);
        soc.add_term(prev, -1.0);
        model.add_constraint(soc, Sense::Eq, 0.0, format!("soc_{tag}_{t}"))?;
        model.add_constraint(row(vars.soc[t], n, ess.soc_min), Sense::Ge, 0.0, format!("soc_lo_{tag}_{t}"))?;
        model.add_constraint(row(vars.soc[t], n, ess.soc_max), Sense::Le, 0.0, format!("soc_hi_{tag}_{t}"))?;
    }
    if t_len > 1 {
        model.add_constraint(
            LinearExpression::from_terms([(vars.soc[0], 1.0), (vars.soc[t_len - 1], -1.0)]),
            Sense::Eq,
            0.0,
            format!("soc_cycle_{tag}"),
        )?;
    }
    Ok(())
}

/// Carrier balances, siting, received-power gating and the input-side balance.
pub fn emit_loads_and_siting(
    model: &mut Model,
    unit: &UnitVars,
    case: &PlanningCase,
    h: usize,
    rp_gas: &ChannelVars,
    rp_elec: &ChannelVars,
) -> Result<(), MilpError> {
    let r = &case.ries[h];
    let id = r.id;
    for t in 0..case.horizon {
        for &k in &Carrier::ALL {
            let mut row = LinearExpression::term(unit.output[carrier_index(k)][t], 1.0);
            if k == Carrier::Electricity {
                for res in &unit.renewables {
                    row.add_term(res.output[t], 1.0);
                }
            }
            for (ess, vars) in r.storage.iter().zip(&unit.storage) {
                if ess.kind.carrier() == k {
                    row.add_term(vars.discharge[t], 1.0);
                    row.add_term(vars.charge[t], -1.0);
                }
            }
            model.add_constraint(row, Sense::Eq, r.loads.at(k, t), format!("load_r{id}_{}_{t}", k.symbol()))?;
        }

        let mut gas_in = rp_gas.inflow(h, t) * case.gas_energy_factor;
        let mut elec_in = rp_elec.inflow(h, t);
        for (d, dev) in r.devices.iter().enumerate() {
            match dev.kind.input() {
                Carrier::Gas => gas_in.add_term(unit.input[d][t], -1.0),
                _ => elec_in.add_term(unit.input[d][t], -1.0),
            };
        }
        model.add_constraint(gas_in, Sense::Eq, 0.0, format!("gas_in_r{id}_{t}"))?;
        model.add_constraint(elec_in, Sense::Eq, 0.0, format!("elec_in_r{id}_{t}"))?;

        for &(m, s) in &unit.gas_sites {
            if let Some(rp) = rp_gas.get(m, h, t) {
                model.add_constraint(
                    LinearExpression::from_terms([(rp, 1.0), (s, -rp_gas.caps[h])]),
                    Sense::Le,
                    0.0,
                    format!("rp_gate_r{id}_gn{m}_{t}"),
                )?;
            }
        }
        for &(n, s) in &unit.bus_sites {
            if let Some(rp) = rp_elec.get(n, h, t) {
                model.add_constraint(
                    LinearExpression::from_terms([(rp, 1.0), (s, -rp_elec.caps[h])]),
                    Sense::Le,
                    0.0,
                    format!("rp_gate_r{id}_eb{n}_{t}"),
                )?;
            }
        }
    }
    let sites = |list: &[(usize, VarId)]| list.iter().map(|&(_, s)| (s, 1.0)).collect::<LinearExpression>();
    model.add_constraint(sites(&unit.gas_sites), Sense::Ge, 1.0, format!("site_gas_r{id}"))?;
    model.add_constraint(sites(&unit.bus_sites), Sense::Ge, 1.0, format!("site_bus_r{id}"))?;
    Ok(())
}

pub fn emit_ries(model: &mut Model, case: &PlanningCase) -> Result<RiesVars, BuildError> {
    let t_len = case.horizon;
    let mut units = Vec::with_capacity(case.ries.len());
    for h in 0..case.ries.len() {
        units.push(add_unit_variables(model, case, h)?);
    }
    let gas_caps: Vec<f64> = (0..case.ries.len()).map(|h| case.gas_channel_cap(h)).collect();
    let elec_caps: Vec<f64> = (0..case.ries.len()).map(|h| case.elec_channel_cap(h)).collect();
    let rp_gas = add_channel_vars(model, "RPg", case.gas.nodes.len(), &gas_caps, t_len, |m, h| {
        case.gas_channel_open(m, h)
    })?;
    let rp_elec = add_channel_vars(model, "RPe", case.electric.buses.len(), &elec_caps, t_len, |n, h| {
        case.elec_channel_open(n, h)
    })?;

    for (h, unit) in units.iter_mut().enumerate() {
        let r = &case.ries[h];
        emit_hub(model, unit, r)?;
        for (i, (ess, vars)) in r.storage.iter().zip(&unit.storage).enumerate() {
            emit_ess(model, vars, ess, &format!("r{}_{}{i}", r.id, storage_name(ess.kind)))?;
        }
        emit_loads_and_siting(model, unit, case, h, &rp_gas, &rp_elec)?;

        for (dev, &y) in r.devices.iter().zip(&unit.built) {
            unit.invest.add_term(y, dev.cost);
        }
        for (res, vars) in r.renewables.iter().zip(&unit.renewables) {
            unit.invest.add_term(vars.modules, res.cost);
        }
        for (ess, vars) in r.storage.iter().zip(&unit.storage) {
            unit.invest.add_term(vars.modules, ess.cost);
        }
        for (site, &(_, s)) in r.gas_sites.iter().zip(&unit.gas_sites) {
            unit.invest.add_term(s, site.cost);
        }
        for (site, &(_, s)) in r.bus_sites.iter().zip(&unit.bus_sites) {
            unit.invest.add_term(s, site.cost);
        }
        for t in 0..t_len {
            unit.operate += rp_gas.inflow(h, t) * case.price_gas;
            unit.operate += rp_elec.inflow(h, t) * case.price_elec;
        }
    }
    Ok(RiesVars {
        units,
        rp_gas,
        rp_elec,
        penalties: Vec::new(),
    })
}

/// RIES agent model covering every RIES of the case.
pub fn build_ries_model(case: &PlanningCase, mode: RiesMode<'_>) -> Result<(Model, RiesVars), BuildError> {
    let mut model = Model::new();
    let mut vars = emit_ries(&mut model, case)?;
    model.add_objective(&vars.invest())?;
    model.add_objective(&vars.operate())?;
    if let RiesMode::Admm { gas, elec } = mode {
        let mut terms = add_penalties(&mut model, &vars.rp_gas, &gas, "ehg")?;
        terms.extend(add_penalties(&mut model, &vars.rp_elec, &elec, "ehe")?);
        vars.penalties = terms;
    }
    Ok((model, vars))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltDevice {
    pub kind: DeviceKind,
    /// Input capacity, MW.
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltRenewable {
    pub kind: RenewableKind,
    pub modules: u32,
    /// Peak available output of the built modules, MW.
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltStorage {
    pub kind: StorageKind,
    pub modules: u32,
    /// Usable energy of the built modules, MWh.
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitPlan {
    pub id: u32,
    pub name: String,
    pub devices: Vec<BuiltDevice>,
    pub renewables: Vec<BuiltRenewable>,
    pub storage: Vec<BuiltStorage>,
    pub gas_nodes: Vec<u32>,
    pub buses: Vec<u32>,
    pub cost: CostBreakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiesPlan {
    pub units: Vec<UnitPlan>,
    pub received_gas: ChannelArray,
    pub received_elec: ChannelArray,
    pub cost: CostBreakdown,
}

impl RiesPlan {
    pub fn extract(case: &PlanningCase, vars: &RiesVars, x: &[f64]) -> Self {
        let count = |v: VarId| libm::round(x[v.index()]).max(0.0) as u32;
        let units: Vec<UnitPlan> = case
            .ries
            .iter()
            .zip(&vars.units)
            .map(|(r, u)| UnitPlan {
                id: r.id,
                name: r.name.clone(),
                devices: r
                    .devices
                    .iter()
                    .zip(&u.built)
                    .filter(|(_, y)| count(**y) == 1)
                    .map(|(d, _)| BuiltDevice {
                        kind: d.kind,
                        capacity: d.capacity,
                    })
                    .collect(),
                renewables: r
                    .renewables
                    .iter()
                    .zip(&u.renewables)
                    .filter(|(_, v)| count(v.modules) > 0)
                    .map(|(res, v)| BuiltRenewable {
                        kind: res.kind,
                        modules: count(v.modules),
                        capacity: count(v.modules) as f64 * res.profile.iter().copied().fold(0.0, f64::max),
                    })
                    .collect(),
                storage: r
                    .storage
                    .iter()
                    .zip(&u.storage)
                    .filter(|(_, v)| count(v.modules) > 0)
                    .map(|(ess, v)| BuiltStorage {
                        kind: ess.kind,
                        modules: count(v.modules),
                        energy: count(v.modules) as f64 * ess.soc_max,
                    })
                    .collect(),
                gas_nodes: u
                    .gas_sites
                    .iter()
                    .filter(|(_, s)| count(*s) == 1)
                    .map(|&(m, _)| case.gas.nodes[m].id)
                    .collect(),
                buses: u
                    .bus_sites
                    .iter()
                    .filter(|(_, s)| count(*s) == 1)
                    .map(|&(n, _)| case.electric.buses[n].id)
                    .collect(),
                cost: CostBreakdown::evaluate(&u.invest, &u.operate, x),
            })
            .collect();
        let cost = units.iter().fold(CostBreakdown::default(), |acc, u| acc + u.cost);
        Self {
            units,
            received_gas: vars.rp_gas.values(x),
            received_elec: vars.rp_elec.values(x),
            cost,
        }
    }
}
