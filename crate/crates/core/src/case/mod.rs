//! Planning-case data model.
//!
//! Units are fixed across the crate: power in MW, energy in MWh (one-hour
//! periods), gas flow in m³/h, money in M$. `gas_energy_factor` converts a
//! gas volume into MWh at the RIES input side.

mod synth;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use synth::{synth_case, Scale};
pub use validate::{validate_case, Finding, Severity, ValidationReport};

/// 0.3 US$/kWh expressed in M$/MWh.
pub const DEFAULT_PRICE_ELEC: f64 = 3e-4;
/// 0.5 US$/m³ expressed in M$/m³.
pub const DEFAULT_PRICE_GAS: f64 = 5e-7;
pub const DEFAULT_SEGMENTS: usize = 3;

fn default_segments() -> usize {
    DEFAULT_SEGMENTS
}
fn default_price_elec() -> f64 {
    DEFAULT_PRICE_ELEC
}
fn default_price_gas() -> f64 {
    DEFAULT_PRICE_GAS
}
fn default_gas_energy_factor() -> f64 {
    // lower heating value of natural gas, MWh per m³
    0.0105
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanningCase {
    pub name: String,
    /// Number of one-hour periods.
    pub horizon: usize,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_price_elec")]
    pub price_elec: f64,
    #[serde(default = "default_price_gas")]
    pub price_gas: f64,
    #[serde(default = "default_gas_energy_factor")]
    pub gas_energy_factor: f64,
    pub gas: GasSystem,
    pub electric: ElectricSystem,
    pub ries: Vec<RiesSpec>,
    /// Per-case ADMM settings; command-line flags take precedence.
    #[serde(default, skip_serializing_if = "AdmmOverrides::is_empty")]
    pub admm: AdmmOverrides,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_gn: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_en: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_ehg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_ehe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_gas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_elec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_knots: Option<usize>,
}

impl AdmmOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasNode {
    pub id: u32,
    pub pressure_min: f64,
    pub pressure_max: f64,
    /// Gas load per period, m³/h. Empty means no load.
    #[serde(default)]
    pub load: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSource {
    pub id: u32,
    pub node: u32,
    pub output_min: f64,
    pub output_max: f64,
    pub ramp_down: f64,
    pub ramp_up: f64,
    /// M$ per m³.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pipeline {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    /// Weymouth coefficient W in `GF|GF| = W²(π_from² − π_to²)`.
    pub weymouth: f64,
    pub flow_max: f64,
    /// Build cost; ignored for existing pipelines.
    #[serde(default)]
    pub invest_cost: f64,
    #[serde(default)]
    pub compressor_allowed: bool,
    #[serde(default)]
    pub compressor_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSystem {
    pub nodes: Vec<GasNode>,
    pub sources: Vec<GasSource>,
    #[serde(default)]
    pub existing_pipes: Vec<Pipeline>,
    #[serde(default)]
    pub candidate_pipes: Vec<Pipeline>,
}

impl GasSystem {
    pub fn node_index(&self, id: u32) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Existing pipelines first, then candidates.
    pub fn pipes(&self) -> impl Iterator<Item = (&Pipeline, bool)> {
        self.existing_pipes
            .iter()
            .map(|p| (p, false))
            .chain(self.candidate_pipes.iter().map(|p| (p, true)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    /// Electric load per period, MW. Empty means no load.
    #[serde(default)]
    pub load: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: u32,
    pub bus: u32,
    pub output_min: f64,
    pub output_max: f64,
    pub ramp_down: f64,
    pub ramp_up: f64,
    pub min_up: usize,
    pub min_down: usize,
    /// M$ per MWh.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    /// Per-unit reactance; flow is `(θ_from − θ_to) / reactance`.
    pub reactance: f64,
    pub flow_max: f64,
    #[serde(default)]
    pub invest_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectricSystem {
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub existing_lines: Vec<Line>,
    #[serde(default)]
    pub candidate_lines: Vec<Line>,
    pub slack_bus: u32,
}

impl ElectricSystem {
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn lines(&self) -> impl Iterator<Item = (&Line, bool)> {
        self.existing_lines
            .iter()
            .map(|l| (l, false))
            .chain(self.candidate_lines.iter().map(|l| (l, true)))
    }
}

/// Energy forms handled by the hub.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Carrier {
    #[serde(rename = "e")]
    Electricity,
    #[serde(rename = "h")]
    Heat,
    #[serde(rename = "c")]
    Cooling,
    #[serde(rename = "g")]
    Gas,
}

impl Carrier {
    pub const ALL: [Carrier; 4] = [Carrier::Electricity, Carrier::Heat, Carrier::Cooling, Carrier::Gas];

    pub fn symbol(self) -> &'static str {
        match self {
            Carrier::Electricity => "e",
            Carrier::Heat => "h",
            Carrier::Cooling => "c",
            Carrier::Gas => "g",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceKind {
    /// Electricity intake from the network.
    TL,
    /// Gas intake from the network.
    TP,
    CCHP,
    GB,
    AC,
}

impl DeviceKind {
    pub fn name(self) -> &'static str {
        match self {
            DeviceKind::TL => "TL",
            DeviceKind::TP => "TP",
            DeviceKind::CCHP => "CCHP",
            DeviceKind::GB => "GB",
            DeviceKind::AC => "AC",
        }
    }

    /// Which input carrier the device draws from the networks.
    pub fn input(self) -> Carrier {
        match self {
            DeviceKind::TL | DeviceKind::AC => Carrier::Electricity,
            DeviceKind::TP | DeviceKind::CCHP | DeviceKind::GB => Carrier::Gas,
        }
    }

    pub fn may_output(self, carrier: Carrier) -> bool {
        match self {
            DeviceKind::TL => carrier == Carrier::Electricity,
            DeviceKind::TP => carrier == Carrier::Gas,
            DeviceKind::GB => carrier == Carrier::Heat,
            DeviceKind::AC => carrier == Carrier::Cooling,
            DeviceKind::CCHP => carrier != Carrier::Gas,
        }
    }
}

/// One hub-matrix column: output per unit of input for each carrier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubColumn {
    #[serde(default)]
    pub e: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub g: f64,
}

impl HubColumn {
    pub fn get(&self, carrier: Carrier) -> f64 {
        match carrier {
            Carrier::Electricity => self.e,
            Carrier::Heat => self.h,
            Carrier::Cooling => self.c,
            Carrier::Gas => self.g,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConversionDevice {
    pub kind: DeviceKind,
    /// Input capacity if built, MW.
    pub capacity: f64,
    pub cost: f64,
    pub hub: HubColumn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RenewableKind {
    WT,
    PV,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewableOption {
    pub kind: RenewableKind,
    /// Available output of one module per period, MW.
    pub profile: Vec<f64>,
    /// Cost per module.
    pub cost: f64,
    pub max_modules: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StorageKind {
    BESS,
    TESS,
    CESS,
}

impl StorageKind {
    pub fn carrier(self) -> Carrier {
        match self {
            StorageKind::BESS => Carrier::Electricity,
            StorageKind::TESS => Carrier::Heat,
            StorageKind::CESS => Carrier::Cooling,
        }
    }
}

/// Per-module storage parameters; the plan chooses a module count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageOption {
    pub kind: StorageKind,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub charge_max: f64,
    pub discharge_max: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub cost: f64,
    pub max_modules: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierLoads {
    #[serde(default)]
    pub e: Vec<f64>,
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub g: Vec<f64>,
}

impl CarrierLoads {
    pub fn series(&self, carrier: Carrier) -> &[f64] {
        match carrier {
            Carrier::Electricity => &self.e,
            Carrier::Heat => &self.h,
            Carrier::Cooling => &self.c,
            Carrier::Gas => &self.g,
        }
    }

    /// Load at period `t`; an empty series reads as zero.
    pub fn at(&self, carrier: Carrier, t: usize) -> f64 {
        self.series(carrier).get(t).copied().unwrap_or(0.0)
    }
}

/// An eligible connection point and what it costs to site there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteCost {
    pub id: u32,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiesSpec {
    pub id: u32,
    #[serde(default)]
    pub name: String,
    pub devices: Vec<ConversionDevice>,
    #[serde(default)]
    pub renewables: Vec<RenewableOption>,
    #[serde(default)]
    pub storage: Vec<StorageOption>,
    pub loads: CarrierLoads,
    /// Gas nodes this RIES may connect to.
    pub gas_sites: Vec<SiteCost>,
    /// Buses this RIES may connect to.
    pub bus_sites: Vec<SiteCost>,
}

impl RiesSpec {
    /// Largest gas intake the devices can use, in m³/h.
    pub fn gas_intake_cap(&self, gas_energy_factor: f64) -> f64 {
        self.devices
            .iter()
            .filter(|d| d.kind.input() == Carrier::Gas)
            .map(|d| d.capacity)
            .sum::<f64>()
            / gas_energy_factor
    }

    /// Largest electricity intake the devices can use, in MW.
    pub fn elec_intake_cap(&self) -> f64 {
        self.devices
            .iter()
            .filter(|d| d.kind.input() == Carrier::Electricity)
            .map(|d| d.capacity)
            .sum()
    }

    pub fn gas_site_cost(&self, node: u32) -> Option<f64> {
        self.gas_sites.iter().find(|s| s.id == node).map(|s| s.cost)
    }

    pub fn bus_site_cost(&self, bus: u32) -> Option<f64> {
        self.bus_sites.iter().find(|s| s.id == bus).map(|s| s.cost)
    }
}

impl PlanningCase {
    pub fn gas_load(&self, node: usize, t: usize) -> f64 {
        self.gas.nodes[node].load.get(t).copied().unwrap_or(0.0)
    }

    pub fn elec_load(&self, bus: usize, t: usize) -> f64 {
        self.electric.buses[bus].load.get(t).copied().unwrap_or(0.0)
    }

    /// Upper bound on the gas channel (node, RIES), m³/h.
    pub fn gas_channel_cap(&self, ries: usize) -> f64 {
        self.ries[ries].gas_intake_cap(self.gas_energy_factor)
    }

    /// Upper bound on the electricity channel (bus, RIES), MW.
    pub fn elec_channel_cap(&self, ries: usize) -> f64 {
        self.ries[ries].elec_intake_cap()
    }

    /// Whether RIES `h` may connect to gas node index `m`.
    pub fn gas_channel_open(&self, m: usize, h: usize) -> bool {
        self.ries[h].gas_site_cost(self.gas.nodes[m].id).is_some() && self.gas_channel_cap(h) > 0.0
    }

    pub fn elec_channel_open(&self, n: usize, h: usize) -> bool {
        self.ries[h].bus_site_cost(self.electric.buses[n].id).is_some() && self.elec_channel_cap(h) > 0.0
    }
}
