use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Carrier, PlanningCase, RiesSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    /// Dotted path into the case, e.g. `gas.sources[2].node`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    fn error(&mut self, location: String, message: String) {
        self.findings.push(Finding {
            severity: Severity::Error,
            location,
            message,
        });
    }

    fn warn(&mut self, location: String, message: String) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            location,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    case: &'a PlanningCase,
    report: ValidationReport,
}

impl Checker<'_> {
    fn finite_nonneg(&mut self, at: &str, what: &str, x: f64) {
        if !x.is_finite() || x < 0.0 {
            self.report.error(format!("{at}.{what}"), format!("must be finite and >= 0, got {x}"));
        }
    }

    fn positive(&mut self, at: &str, what: &str, x: f64) {
        if !x.is_finite() || x <= 0.0 {
            self.report.error(format!("{at}.{what}"), format!("must be finite and > 0, got {x}"));
        }
    }

    fn ordered(&mut self, at: &str, lo_name: &str, lo: f64, hi_name: &str, hi: f64) {
        if lo > hi {
            self.report.error(at.into(), format!("{lo_name} ({lo}) exceeds {hi_name} ({hi})"));
        }
    }

    /// Series must be empty or cover the horizon, with finite non-negative entries.
    fn series(&mut self, at: &str, values: &[f64], allow_empty: bool) {
        let t = self.case.horizon;
        if values.is_empty() && allow_empty {
            return;
        }
        if values.len() != t {
            self.report
                .error(at.into(), format!("has {} entries, horizon is {t}", values.len()));
        }
        if let Some(bad) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            self.report.error(at.into(), format!("entries must be finite and >= 0, found {bad}"));
        }
    }

    fn unique_ids(&mut self, at: &str, ids: impl Iterator<Item = u32>) {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.report.error(at.into(), format!("duplicate id {id}"));
            }
        }
    }

    fn gas_node(&mut self, at: &str, id: u32) {
        if self.case.gas.node_index(id).is_none() {
            self.report.error(at.into(), format!("unknown gas node {id}"));
        }
    }

    fn bus(&mut self, at: &str, id: u32) {
        if self.case.electric.bus_index(id).is_none() {
            self.report.error(at.into(), format!("unknown bus {id}"));
        }
    }

    fn top_level(&mut self) {
        let c = self.case;
        if c.horizon == 0 {
            self.report.error("horizon".into(), "must be at least 1".into());
        }
        if c.segments == 0 {
            self.report.error("segments".into(), "must be at least 1".into());
        }
        self.finite_nonneg("case", "price_elec", c.price_elec);
        self.finite_nonneg("case", "price_gas", c.price_gas);
        self.positive("case", "gas_energy_factor", c.gas_energy_factor);
        for (name, rho) in [
            ("rho_gn", c.admm.rho_gn),
            ("rho_en", c.admm.rho_en),
            ("rho_ehg", c.admm.rho_ehg),
            ("rho_ehe", c.admm.rho_ehe),
            ("eps_gas", c.admm.eps_gas),
            ("eps_elec", c.admm.eps_elec),
        ] {
            if let Some(x) = rho {
                self.positive("admm", name, x);
            }
        }
        if c.admm.quad_knots.is_some_and(|k| k < 2) {
            self.report.error("admm.quad_knots".into(), "must be at least 2".into());
        }
    }

    fn gas(&mut self) {
        let g = &self.case.gas;
        if g.nodes.is_empty() {
            self.report.error("gas.nodes".into(), "at least one node is required".into());
        }
        self.unique_ids("gas.nodes", g.nodes.iter().map(|n| n.id));
        self.unique_ids("gas.sources", g.sources.iter().map(|s| s.id));
        self.unique_ids("gas.pipes", g.pipes().map(|(p, _)| p.id));
        for (i, n) in g.nodes.iter().enumerate() {
            let at = format!("gas.nodes[{i}]");
            self.positive(&at, "pressure_min", n.pressure_min);
            self.positive(&at, "pressure_max", n.pressure_max);
            self.ordered(&at, "pressure_min", n.pressure_min, "pressure_max", n.pressure_max);
            self.series(&format!("{at}.load"), &n.load, true);
        }
        for (i, s) in g.sources.iter().enumerate() {
            let at = format!("gas.sources[{i}]");
            self.gas_node(&format!("{at}.node"), s.node);
            self.finite_nonneg(&at, "output_min", s.output_min);
            self.finite_nonneg(&at, "output_max", s.output_max);
            self.ordered(&at, "output_min", s.output_min, "output_max", s.output_max);
            self.finite_nonneg(&at, "ramp_down", s.ramp_down);
            self.finite_nonneg(&at, "ramp_up", s.ramp_up);
            self.finite_nonneg(&at, "cost", s.cost);
        }
        for (i, (p, candidate)) in g.pipes().enumerate() {
            let at = if candidate {
                format!("gas.candidate_pipes[{}]", i - g.existing_pipes.len())
            } else {
                format!("gas.existing_pipes[{i}]")
            };
            self.gas_node(&format!("{at}.from"), p.from);
            self.gas_node(&format!("{at}.to"), p.to);
            if p.from == p.to {
                self.report.error(at.clone(), format!("pipeline loops on node {}", p.from));
            }
            self.positive(&at, "weymouth", p.weymouth);
            self.positive(&at, "flow_max", p.flow_max);
            self.finite_nonneg(&at, "invest_cost", p.invest_cost);
            self.finite_nonneg(&at, "compressor_cost", p.compressor_cost);
        }
    }

    fn electric(&mut self) {
        let e = &self.case.electric;
        self.unique_ids("electric.buses", e.buses.iter().map(|b| b.id));
        self.unique_ids("electric.generators", e.generators.iter().map(|g| g.id));
        self.unique_ids("electric.lines", e.lines().map(|(l, _)| l.id));
        self.bus("electric.slack_bus", e.slack_bus);
        for (i, b) in e.buses.iter().enumerate() {
            self.series(&format!("electric.buses[{i}].load"), &b.load, true);
        }
        for (i, g) in e.generators.iter().enumerate() {
            let at = format!("electric.generators[{i}]");
            self.bus(&format!("{at}.bus"), g.bus);
            self.finite_nonneg(&at, "output_min", g.output_min);
            self.finite_nonneg(&at, "output_max", g.output_max);
            self.ordered(&at, "output_min", g.output_min, "output_max", g.output_max);
            self.finite_nonneg(&at, "ramp_down", g.ramp_down);
            self.finite_nonneg(&at, "ramp_up", g.ramp_up);
            self.finite_nonneg(&at, "cost", g.cost);
            for (name, window) in [("min_up", g.min_up), ("min_down", g.min_down)] {
                if window == 0 || window > self.case.horizon {
                    self.report.error(
                        format!("{at}.{name}"),
                        format!("must lie in 1..={}, got {window}", self.case.horizon),
                    );
                }
            }
        }
        for (i, (l, candidate)) in e.lines().enumerate() {
            let at = if candidate {
                format!("electric.candidate_lines[{}]", i - e.existing_lines.len())
            } else {
                format!("electric.existing_lines[{i}]")
            };
            self.bus(&format!("{at}.from"), l.from);
            self.bus(&format!("{at}.to"), l.to);
            if l.from == l.to {
                self.report.error(at.clone(), format!("line loops on bus {}", l.from));
            }
            self.positive(&at, "reactance", l.reactance);
            self.positive(&at, "flow_max", l.flow_max);
            self.finite_nonneg(&at, "invest_cost", l.invest_cost);
        }
    }

    fn ries(&mut self, i: usize, r: &RiesSpec) {
        let at = format!("ries[{i}]");
        for (k, d) in r.devices.iter().enumerate() {
            let dat = format!("{at}.devices[{k}]");
            self.positive(&dat, "capacity", d.capacity);
            self.finite_nonneg(&dat, "cost", d.cost);
            for carrier in Carrier::ALL {
                let eta = d.hub.get(carrier);
                if !eta.is_finite() || eta < 0.0 {
                    self.report.error(
                        format!("{dat}.hub.{}", carrier.symbol()),
                        format!("must be finite and >= 0, got {eta}"),
                    );
                } else if eta > 0.0 && !d.kind.may_output(carrier) {
                    self.report.error(
                        format!("{dat}.hub.{}", carrier.symbol()),
                        format!("{} cannot output {}", d.kind.name(), carrier.symbol()),
                    );
                }
            }
        }
        for (k, w) in r.renewables.iter().enumerate() {
            let wat = format!("{at}.renewables[{k}]");
            self.series(&format!("{wat}.profile"), &w.profile, false);
            self.finite_nonneg(&wat, "cost", w.cost);
        }
        for (k, s) in r.storage.iter().enumerate() {
            let sat = format!("{at}.storage[{k}]");
            for (name, eta) in [("eta_charge", s.eta_charge), ("eta_discharge", s.eta_discharge)] {
                if !(eta > 0.0 && eta <= 1.0) {
                    self.report.error(format!("{sat}.{name}"), format!("must lie in (0, 1], got {eta}"));
                }
            }
            self.positive(&sat, "charge_max", s.charge_max);
            self.positive(&sat, "discharge_max", s.discharge_max);
            self.finite_nonneg(&sat, "soc_min", s.soc_min);
            self.positive(&sat, "soc_max", s.soc_max);
            self.ordered(&sat, "soc_min", s.soc_min, "soc_max", s.soc_max);
            self.finite_nonneg(&sat, "cost", s.cost);
        }
        for carrier in Carrier::ALL {
            self.series(&format!("{at}.loads.{}", carrier.symbol()), r.loads.series(carrier), true);
        }
        if r.gas_sites.is_empty() {
            self.report.error(format!("{at}.gas_sites"), "at least one eligible gas node is required".into());
        }
        if r.bus_sites.is_empty() {
            self.report.error(format!("{at}.bus_sites"), "at least one eligible bus is required".into());
        }
        self.unique_ids(&format!("{at}.gas_sites"), r.gas_sites.iter().map(|s| s.id));
        self.unique_ids(&format!("{at}.bus_sites"), r.bus_sites.iter().map(|s| s.id));
        for (k, s) in r.gas_sites.iter().enumerate() {
            self.gas_node(&format!("{at}.gas_sites[{k}].id"), s.id);
            self.finite_nonneg(&format!("{at}.gas_sites[{k}]"), "cost", s.cost);
        }
        for (k, s) in r.bus_sites.iter().enumerate() {
            self.bus(&format!("{at}.bus_sites[{k}].id"), s.id);
            self.finite_nonneg(&format!("{at}.bus_sites[{k}]"), "cost", s.cost);
        }
        let t = self.case.horizon;
        let serves = |c: Carrier| {
            r.devices.iter().any(|d| d.hub.get(c) > 0.0)
                || r.storage.iter().any(|s| s.kind.carrier() == c)
                || (c == Carrier::Electricity && !r.renewables.is_empty())
        };
        for carrier in Carrier::ALL {
            let has_load = (0..t).any(|k| r.loads.at(carrier, k) > 0.0);
            if has_load && !serves(carrier) {
                self.report.error(
                    format!("{at}.loads.{}", carrier.symbol()),
                    format!("no device can supply {} load", carrier.symbol()),
                );
            }
        }
        if r.elec_intake_cap() == 0.0 && r.gas_intake_cap(self.case.gas_energy_factor) == 0.0 {
            self.report.warn(at, "no device draws from either network".into());
        }
    }
}

/// Checks referential integrity and physical ranges of a case.
pub fn validate_case(case: &PlanningCase) -> ValidationReport {
    let mut ch = Checker {
        case,
        report: ValidationReport::default(),
    };
    ch.top_level();
    ch.gas();
    ch.electric();
    ch.unique_ids("ries", case.ries.iter().map(|r| r.id));
    for (i, r) in case.ries.iter().enumerate() {
        ch.ries(i, r);
    }
    ch.report
}
