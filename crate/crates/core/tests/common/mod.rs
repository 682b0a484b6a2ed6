#![allow(dead_code)]

use tripart_core::case::*;
use tripart_core::milp::{solve_mip, Model, Solution, SolverConfig, Status, VarId};

pub fn gas_node(id: u32, pressure_min: f64, pressure_max: f64, load: Vec<f64>) -> GasNode {
    GasNode {
        id,
        pressure_min,
        pressure_max,
        load,
    }
}

pub fn source(id: u32, node: u32, output_max: f64, cost: f64) -> GasSource {
    GasSource {
        id,
        node,
        output_min: 0.0,
        output_max,
        ramp_down: output_max,
        ramp_up: output_max,
        cost,
    }
}

pub fn pipe(id: u32, from: u32, to: u32, weymouth: f64, flow_max: f64) -> Pipeline {
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

pub fn bus(id: u32, load: Vec<f64>) -> Bus {
    Bus { id, load }
}

pub fn generator(id: u32, bus: u32, output_max: f64, cost: f64) -> Generator {
    Generator {
        id,
        bus,
        output_min: 0.0,
        output_max,
        ramp_down: output_max,
        ramp_up: output_max,
        min_up: 1,
        min_down: 1,
        cost,
    }
}

pub fn line(id: u32, from: u32, to: u32, reactance: f64, flow_max: f64) -> Line {
    Line {
        id,
        from,
        to,
        reactance,
        flow_max,
        invest_cost: 0.0,
    }
}

/// One idle gas node and one idle bus; tests replace the parts they exercise.
pub fn bare_case(horizon: usize) -> PlanningCase {
    PlanningCase {
        name: "fixture".into(),
        horizon,
        segments: DEFAULT_SEGMENTS,
        price_elec: DEFAULT_PRICE_ELEC,
        price_gas: DEFAULT_PRICE_GAS,
        gas_energy_factor: 0.0105,
        gas: GasSystem {
            nodes: vec![gas_node(1, 0.0, 10.0, vec![])],
            sources: vec![],
            existing_pipes: vec![],
            candidate_pipes: vec![],
        },
        electric: ElectricSystem {
            buses: vec![bus(1, vec![])],
            generators: vec![],
            existing_lines: vec![],
            candidate_lines: vec![],
            slack_bus: 1,
        },
        ries: vec![],
        admm: AdmmOverrides::default(),
    }
}

pub fn device(kind: DeviceKind, capacity: f64, cost: f64, hub: HubColumn) -> ConversionDevice {
    ConversionDevice {
        kind,
        capacity,
        cost,
        hub,
    }
}

pub fn ries(id: u32, devices: Vec<ConversionDevice>, loads: CarrierLoads) -> RiesSpec {
    RiesSpec {
        id,
        name: format!("r{id}"),
        devices,
        renewables: vec![],
        storage: vec![],
        loads,
        gas_sites: vec![SiteCost { id: 1, cost: 0.0 }],
        bus_sites: vec![SiteCost { id: 1, cost: 0.0 }],
    }
}

pub fn solve(model: &Model) -> Solution {
    let s = solve_mip(model, &SolverConfig::default()).expect("solver error");
    assert_eq!(s.status, Status::Optimal, "expected an optimal solve");
    s
}

pub fn try_solve(model: &Model) -> Status {
    solve_mip(model, &SolverConfig::default()).expect("solver error").status
}

pub fn fix(model: &mut Model, var: VarId, value: f64) {
    model.set_bounds(var, value, value).unwrap();
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
