use crate::channel::ChannelArray;

use super::{AdmmConfig, CoordinatorError};

/// Multipliers and intermediate powers shared by the three agents.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusState {
    pub lambda_gn: ChannelArray,
    pub lambda_ehg: ChannelArray,
    pub lambda_en: ChannelArray,
    pub lambda_ehe: ChannelArray,
    pub ip_gas: ChannelArray,
    pub ip_elec: ChannelArray,
}

impl ConsensusState {
    /// Multipliers start at `lambda`, intermediate powers at `ip`.
    pub fn initial(gas_shape: (usize, usize, usize), elec_shape: (usize, usize, usize), lambda: f64, ip: f64) -> Self {
        let (m, h, t) = gas_shape;
        let (n, he, te) = elec_shape;
        Self {
            lambda_gn: ChannelArray::filled(m, h, t, lambda),
            lambda_ehg: ChannelArray::filled(m, h, t, lambda),
            lambda_en: ChannelArray::filled(n, he, te, lambda),
            lambda_ehe: ChannelArray::filled(n, he, te, lambda),
            ip_gas: ChannelArray::filled(m, h, t, ip),
            ip_elec: ChannelArray::filled(n, he, te, ip),
        }
    }
}

/// Agent powers of one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Powers {
    pub tp_gas: ChannelArray,
    pub tp_elec: ChannelArray,
    pub rp_gas: ChannelArray,
    pub rp_elec: ChannelArray,
}

fn same_shape(a: &ChannelArray, b: &ChannelArray) -> Result<(), CoordinatorError> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(CoordinatorError::ShapeMismatch {
            expected: a.shape(),
            got: b.shape(),
        })
    }
}

/// `IP' = (TP + RP)/2`, then `λ ← λ + ρ·(power − IP')` for every family.
pub fn update_consensus(
    state: &ConsensusState,
    powers: &Powers,
    config: &AdmmConfig,
) -> Result<ConsensusState, CoordinatorError> {
    same_shape(&state.ip_gas, &powers.tp_gas)?;
    same_shape(&state.ip_gas, &powers.rp_gas)?;
    same_shape(&state.ip_elec, &powers.tp_elec)?;
    same_shape(&state.ip_elec, &powers.rp_elec)?;
    same_shape(&state.ip_gas, &state.lambda_gn)?;
    same_shape(&state.ip_gas, &state.lambda_ehg)?;
    same_shape(&state.ip_elec, &state.lambda_en)?;
    same_shape(&state.ip_elec, &state.lambda_ehe)?;

    let mut next = state.clone();
    for i in 0..state.ip_gas.data.len() {
        let tp = powers.tp_gas.data[i];
        let rp = powers.rp_gas.data[i];
        let ip = 0.5 * (tp + rp);
        next.ip_gas.data[i] = ip;
        next.lambda_gn.data[i] += config.rho_gn * (tp - ip);
        next.lambda_ehg.data[i] += config.rho_ehg * (rp - ip);
    }
    for i in 0..state.ip_elec.data.len() {
        let tp = powers.tp_elec.data[i];
        let rp = powers.rp_elec.data[i];
        let ip = 0.5 * (tp + rp);
        next.ip_elec.data[i] = ip;
        next.lambda_en.data[i] += config.rho_en * (tp - ip);
        next.lambda_ehe.data[i] += config.rho_ehe * (rp - ip);
    }
    Ok(next)
}

/// `max(|TP − IP|, |RP − IP|)` over every channel.
pub fn carrier_residual(tp: &ChannelArray, rp: &ChannelArray, ip: &ChannelArray) -> f64 {
    tp.max_abs_diff(ip).max(rp.max_abs_diff(ip))
}

/// Both carrier residuals within their thresholds (inclusive).
pub fn check_convergence(powers: &Powers, ip_gas: &ChannelArray, ip_elec: &ChannelArray, eps_gas: f64, eps_elec: f64) -> bool {
    carrier_residual(&powers.tp_gas, &powers.rp_gas, ip_gas) <= eps_gas
        && carrier_residual(&powers.tp_elec, &powers.rp_elec, ip_elec) <= eps_elec
}
