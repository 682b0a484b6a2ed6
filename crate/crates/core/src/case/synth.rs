//! Deterministic synthetic cases.
//!
//! Every draw sits on a coarse lattice so the emitted JSON stays readable.
//! Capacities are sized from the drawn loads, which keeps every case
//! feasible for joint planning by construction.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// Two gas nodes, two buses, one RIES; at most 12 integer variables jointly.
    Tiny,
    /// Three gas nodes, three buses, three RIES archetypes.
    Desk,
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tiny" => Ok(Scale::Tiny),
            "desk" => Ok(Scale::Desk),
            other => Err(format!("unknown scale `{other}` (expected tiny or desk)")),
        }
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    /// Uniform over `lo, lo+step, ..., hi`.
    fn lattice(&mut self, lo: f64, hi: f64, step: f64) -> f64 {
        let n = libm::round((hi - lo) / step) as u32;
        let k = self.0.random_range(0..=n);
        snap(lo + k as f64 * step, step)
    }

    fn series(&mut self, t: usize, lo: f64, hi: f64, step: f64) -> Vec<f64> {
        (0..t).map(|_| self.lattice(lo, hi, step)).collect()
    }
}

/// Rounds to the lattice so printed values carry no binary noise.
fn snap(x: f64, step: f64) -> f64 {
    let digits = libm::ceil(-libm::log10(step)).max(0.0) as i32 + 2;
    let scale = libm::pow(10.0, digits as f64);
    libm::round(x * scale) / scale
}

fn ceil_to(x: f64, step: f64) -> f64 {
    snap(libm::ceil(x / step - 1e-9) * step, step)
}

fn peak(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

fn site(id: u32, cost: f64) -> SiteCost {
    SiteCost { id, cost }
}

const GAS_FACTOR: f64 = 0.0105;
const P_HI: [f64; 3] = [60.0, 58.0, 56.0];
const P_LO: [f64; 3] = [30.0, 25.0, 25.0];

/// Weymouth coefficient that carries `flow` with a fraction of the pressure budget.
fn weymouth_for(d: &mut Draw, flow: f64, from: usize, to: usize) -> f64 {
    let budget = P_HI[from] * P_HI[from] - P_LO[to] * P_LO[to];
    let base = flow / libm::sqrt(budget);
    ceil_to(base * d.lattice(2.0, 3.0, 0.1), 0.01)
}

fn device(kind: DeviceKind, capacity: f64, cost: f64, hub: HubColumn) -> ConversionDevice {
    ConversionDevice {
        kind,
        capacity,
        cost,
        hub,
    }
}

fn pipe(id: u32, from: u32, to: u32, weymouth: f64, flow_max: f64) -> Pipeline {
    Pipeline {
        id,
        from,
        to,
        weymouth,
        flow_max,
        invest_cost: 0.0,
        compressor_allowed: false,
        compressor_cost: 0.0,
    }
}

/// Builds a reproducible case for `seed`.
pub fn synth_case(seed: u64, scale: Scale) -> PlanningCase {
    let mut d = Draw(ChaCha8Rng::seed_from_u64(seed));
    match scale {
        Scale::Tiny => tiny(seed, &mut d),
        Scale::Desk => desk(seed, &mut d),
    }
}

fn tiny(seed: u64, d: &mut Draw) -> PlanningCase {
    let t = 2;
    let loads = CarrierLoads {
        e: d.series(t, 0.5, 1.5, 0.1),
        h: d.series(t, 0.5, 1.5, 0.1),
        ..CarrierLoads::default()
    };
    let eta_gb = d.lattice(0.85, 0.95, 0.01);
    let tl_cap = ceil_to(peak(&loads.e) * 1.2, 0.1);
    let gb_cap = ceil_to(peak(&loads.h) / eta_gb * 1.2, 0.1);
    let ries = RiesSpec {
        id: 1,
        name: "district".into(),
        devices: vec![
            device(DeviceKind::TL, tl_cap, d.lattice(0.05, 0.15, 0.01), HubColumn { e: 1.0, ..HubColumn::default() }),
            device(DeviceKind::GB, gb_cap, d.lattice(0.1, 0.3, 0.01), HubColumn { h: eta_gb, ..HubColumn::default() }),
        ],
        renewables: Vec::new(),
        storage: Vec::new(),
        loads,
        gas_sites: vec![site(2, d.lattice(0.01, 0.05, 0.01))],
        bus_sites: vec![site(2, d.lattice(0.01, 0.05, 0.01))],
    };

    let gas_load = d.series(t, 100.0, 300.0, 10.0);
    let gas_peak = peak(&gas_load) + ries.gas_intake_cap(GAS_FACTOR);
    let flow_max = ceil_to(gas_peak * 1.25, 50.0);
    let gas = GasSystem {
        nodes: vec![
            GasNode { id: 1, pressure_min: P_LO[0], pressure_max: P_HI[0], load: Vec::new() },
            GasNode { id: 2, pressure_min: P_LO[1], pressure_max: P_HI[1], load: gas_load },
        ],
        sources: vec![GasSource {
            id: 1,
            node: 1,
            output_min: 0.0,
            output_max: flow_max,
            ramp_down: flow_max,
            ramp_up: flow_max,
            cost: d.lattice(2e-7, 4e-7, 1e-8),
        }],
        existing_pipes: vec![pipe(1, 1, 2, weymouth_for(d, flow_max, 0, 1), flow_max)],
        candidate_pipes: Vec::new(),
    };

    let elec_load = d.series(t, 1.0, 4.0, 0.1);
    let gen_max = ceil_to((peak(&elec_load) + tl_cap) * 1.3, 1.0);
    let gen_min = d.lattice(0.2, 0.8, 0.1);
    let electric = ElectricSystem {
        buses: vec![Bus { id: 1, load: Vec::new() }, Bus { id: 2, load: elec_load }],
        generators: vec![Generator {
            id: 1,
            bus: 1,
            output_min: gen_min,
            output_max: gen_max,
            ramp_down: gen_max - gen_min,
            ramp_up: gen_max - gen_min,
            min_up: 1,
            min_down: 1,
            cost: d.lattice(3e-5, 6e-5, 1e-6),
        }],
        existing_lines: vec![Line {
            id: 1,
            from: 1,
            to: 2,
            reactance: d.lattice(0.1, 0.3, 0.01),
            flow_max: gen_max,
            invest_cost: 0.0,
        }],
        candidate_lines: Vec::new(),
        slack_bus: 1,
    };

    PlanningCase {
        name: format!("synth-tiny-{seed}"),
        horizon: t,
        segments: DEFAULT_SEGMENTS,
        price_elec: DEFAULT_PRICE_ELEC,
        price_gas: DEFAULT_PRICE_GAS,
        gas_energy_factor: GAS_FACTOR,
        gas,
        electric,
        ries: vec![ries],
        admm: AdmmOverrides::default(),
    }
}

fn zero_series(t: usize) -> Vec<f64> {
    vec![0.0; t]
}

fn desk_ries(d: &mut Draw, t: usize, id: u32, archetype: usize) -> RiesSpec {
    let mut loads = CarrierLoads {
        e: d.series(t, 0.8, 2.0, 0.1),
        ..CarrierLoads::default()
    };
    let mut devices = Vec::new();
    let mut renewables = Vec::new();
    let mut storage = Vec::new();
    let eta_cchp = HubColumn { e: 0.35, h: 0.4, c: 0.0, g: 0.0 };
    let mut elec_need = peak(&loads.e);
    match archetype {
        // no cooling
        0 => {
            loads.h = d.series(t, 0.5, 1.5, 0.1);
            let heat = peak(&loads.h);
            devices.push(device(
                DeviceKind::CCHP,
                ceil_to(heat / eta_cchp.h, 0.1),
                d.lattice(0.3, 0.5, 0.01),
                eta_cchp,
            ));
            devices.push(device(
                DeviceKind::GB,
                ceil_to(heat / 0.9 * 1.2, 0.1),
                d.lattice(0.1, 0.3, 0.01),
                HubColumn { h: 0.9, ..HubColumn::default() },
            ));
            storage.push(StorageOption {
                kind: StorageKind::TESS,
                eta_charge: 0.95,
                eta_discharge: 0.95,
                charge_max: 0.3,
                discharge_max: 0.3,
                soc_min: 0.0,
                soc_max: 0.6,
                cost: d.lattice(0.02, 0.06, 0.01),
                max_modules: 2,
            });
        }
        // no heat
        1 => {
            loads.c = d.series(t, 0.5, 1.5, 0.1);
            let cop = d.lattice(2.5, 3.5, 0.1);
            let ac_cap = ceil_to(peak(&loads.c) / cop * 1.2, 0.1);
            elec_need += ac_cap;
            devices.push(device(
                DeviceKind::AC,
                ac_cap,
                d.lattice(0.05, 0.15, 0.01),
                HubColumn { c: cop, ..HubColumn::default() },
            ));
            renewables.push(RenewableOption {
                kind: RenewableKind::WT,
                profile: d.series(t, 0.0, 0.3, 0.05),
                cost: d.lattice(0.05, 0.1, 0.01),
                max_modules: 2,
            });
            storage.push(StorageOption {
                kind: StorageKind::BESS,
                eta_charge: 0.9,
                eta_discharge: 0.9,
                charge_max: 0.25,
                discharge_max: 0.25,
                soc_min: 0.05,
                soc_max: 0.5,
                cost: d.lattice(0.03, 0.08, 0.01),
                max_modules: 2,
            });
        }
        // every carrier
        _ => {
            loads.h = d.series(t, 0.3, 1.0, 0.1);
            loads.c = d.series(t, 0.3, 1.0, 0.1);
            loads.g = d.series(t, 0.2, 0.6, 0.1);
            let cop = d.lattice(2.5, 3.5, 0.1);
            let ac_cap = ceil_to(peak(&loads.c) / cop * 1.2, 0.1);
            elec_need += ac_cap;
            devices.push(device(
                DeviceKind::GB,
                ceil_to(peak(&loads.h) / 0.9 * 1.2, 0.1),
                d.lattice(0.1, 0.3, 0.01),
                HubColumn { h: 0.9, ..HubColumn::default() },
            ));
            devices.push(device(
                DeviceKind::AC,
                ac_cap,
                d.lattice(0.05, 0.15, 0.01),
                HubColumn { c: cop, ..HubColumn::default() },
            ));
            devices.push(device(
                DeviceKind::TP,
                ceil_to(peak(&loads.g) * 1.2, 0.1),
                d.lattice(0.02, 0.06, 0.01),
                HubColumn { g: 1.0, ..HubColumn::default() },
            ));
            renewables.push(RenewableOption {
                kind: RenewableKind::PV,
                profile: d.series(t, 0.0, 0.25, 0.05),
                cost: d.lattice(0.04, 0.09, 0.01),
                max_modules: 2,
            });
            storage.push(StorageOption {
                kind: StorageKind::CESS,
                eta_charge: 0.95,
                eta_discharge: 0.95,
                charge_max: 0.2,
                discharge_max: 0.2,
                soc_min: 0.0,
                soc_max: 0.4,
                cost: d.lattice(0.02, 0.05, 0.01),
                max_modules: 2,
            });
        }
    }
    devices.insert(
        0,
        device(
            DeviceKind::TL,
            ceil_to(elec_need * 1.2, 0.1),
            d.lattice(0.05, 0.15, 0.01),
            HubColumn { e: 1.0, ..HubColumn::default() },
        ),
    );
    let (g1, g2) = if archetype == 0 { (2, 3) } else { (3, 2) };
    RiesSpec {
        id,
        name: ["no-cold", "no-heat", "mixed"][archetype].into(),
        devices,
        renewables,
        storage,
        loads,
        gas_sites: vec![site(g1, d.lattice(0.01, 0.05, 0.01)), site(g2, d.lattice(0.02, 0.06, 0.01))],
        bus_sites: vec![site(2, d.lattice(0.01, 0.05, 0.01)), site(3, d.lattice(0.01, 0.05, 0.01))],
    }
}

fn desk(seed: u64, d: &mut Draw) -> PlanningCase {
    let t = 3;
    let ries: Vec<RiesSpec> = (0..3).map(|k| desk_ries(d, t, k as u32 + 1, k)).collect();
    let ries_gas: f64 = ries.iter().map(|r| r.gas_intake_cap(GAS_FACTOR)).sum();
    let ries_elec: f64 = ries.iter().map(|r| r.elec_intake_cap()).sum();

    let gas_loads = [zero_series(t), d.series(t, 80.0, 200.0, 10.0), d.series(t, 60.0, 150.0, 10.0)];
    let gas_peak = gas_loads.iter().map(|l| peak(l)).sum::<f64>() + ries_gas;
    let trunk = ceil_to(gas_peak * 1.25, 50.0);
    let w12 = weymouth_for(d, trunk, 0, 1);
    let w23 = weymouth_for(d, trunk, 1, 2);
    let w13 = weymouth_for(d, trunk, 0, 2);
    let mut bypass = pipe(3, 1, 3, w13, trunk);
    bypass.invest_cost = d.lattice(0.2, 0.5, 0.01);
    bypass.compressor_allowed = true;
    bypass.compressor_cost = d.lattice(0.1, 0.3, 0.01);
    let gas = GasSystem {
        nodes: (0..3)
            .map(|k| GasNode {
                id: k as u32 + 1,
                pressure_min: P_LO[k],
                pressure_max: P_HI[k],
                load: gas_loads[k].clone(),
            })
            .collect(),
        sources: vec![
            GasSource {
                id: 1,
                node: 1,
                output_min: 0.0,
                output_max: trunk,
                ramp_down: trunk,
                ramp_up: d.lattice(0.5, 1.0, 0.1) * trunk,
                cost: d.lattice(2e-7, 3e-7, 1e-8),
            },
            GasSource {
                id: 2,
                node: 3,
                output_min: 0.0,
                output_max: ceil_to(trunk * 0.3, 10.0),
                ramp_down: trunk,
                ramp_up: trunk,
                cost: d.lattice(4e-7, 6e-7, 1e-8),
            },
        ],
        existing_pipes: vec![pipe(1, 1, 2, w12, trunk), pipe(2, 2, 3, w23, trunk)],
        candidate_pipes: vec![bypass],
    };

    let bus_loads = [zero_series(t), d.series(t, 1.0, 3.0, 0.1), d.series(t, 1.0, 3.0, 0.1)];
    let elec_peak = bus_loads.iter().map(|l| peak(l)).sum::<f64>() + ries_elec;
    let big = ceil_to(elec_peak * 1.2, 1.0);
    let small = ceil_to(elec_peak * 0.3, 1.0);
    let electric = ElectricSystem {
        buses: (0..3)
            .map(|k| Bus {
                id: k as u32 + 1,
                load: bus_loads[k].clone(),
            })
            .collect(),
        generators: vec![
            Generator {
                id: 1,
                bus: 1,
                output_min: d.lattice(0.5, 1.0, 0.1),
                output_max: big,
                ramp_down: big,
                ramp_up: big,
                min_up: 2,
                min_down: 1,
                cost: d.lattice(3e-5, 4e-5, 1e-6),
            },
            Generator {
                id: 2,
                bus: 3,
                output_min: 0.2,
                output_max: small,
                ramp_down: small,
                ramp_up: small,
                min_up: 1,
                min_down: 1,
                cost: d.lattice(6e-5, 9e-5, 1e-6),
            },
        ],
        existing_lines: vec![
            Line { id: 1, from: 1, to: 2, reactance: d.lattice(0.1, 0.2, 0.01), flow_max: big, invest_cost: 0.0 },
            Line { id: 2, from: 2, to: 3, reactance: d.lattice(0.1, 0.2, 0.01), flow_max: big, invest_cost: 0.0 },
        ],
        candidate_lines: vec![Line {
            id: 3,
            from: 1,
            to: 3,
            reactance: d.lattice(0.15, 0.3, 0.01),
            flow_max: big,
            invest_cost: d.lattice(0.1, 0.4, 0.01),
        }],
        slack_bus: 1,
    };

    PlanningCase {
        name: format!("synth-desk-{seed}"),
        horizon: t,
        segments: DEFAULT_SEGMENTS,
        price_elec: DEFAULT_PRICE_ELEC,
        price_gas: DEFAULT_PRICE_GAS,
        gas_energy_factor: GAS_FACTOR,
        gas,
        electric,
        ries,
        admm: AdmmOverrides::default(),
    }
}
