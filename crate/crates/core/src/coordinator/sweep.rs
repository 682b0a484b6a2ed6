use alloc::vec::Vec;

use crate::case::PlanningCase;

use super::admm::{admm_run, AdmmStatus};
use super::{AdmmConfig, CoordinatorError};

/// One penalty setting and how the run ended.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    /// `[ρ_gn, ρ_en, ρ_ehg, ρ_ehe]`
    pub rho: [f64; 4],
    pub status: AdmmStatus,
    pub iterations: usize,
    pub objective: f64,
    pub final_res_gas: f64,
    pub final_res_elec: f64,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.status == AdmmStatus::Converged
    }
}

/// Uniform settings first, then the mixed ones.
pub fn default_rho_grid() -> Vec<[f64; 4]> {
    let mut grid: Vec<[f64; 4]> = [0.1, 1.0, 10.0, 100.0, 200.0].iter().map(|&r| [r; 4]).collect();
    grid.extend([
        [10.0, 10.0, 100.0, 100.0],
        [100.0, 10.0, 100.0, 100.0],
        [10.0, 100.0, 100.0, 100.0],
        [100.0, 100.0, 10.0, 10.0],
    ]);
    grid
}

/// Runs ADMM once per grid row, everything else taken from `base`.
pub fn sweep(case: &PlanningCase, base: &AdmmConfig, grid: &[[f64; 4]]) -> Result<Vec<SweepRow>, CoordinatorError> {
    grid.iter()
        .map(|&rho| {
            let (outcome, trace) = admm_run(case, &base.with_rho(rho))?;
            let last = trace.records.last().copied();
            Ok(SweepRow {
                rho,
                status: outcome.status,
                iterations: outcome.iterations,
                objective: outcome.plan.total_cost,
                final_res_gas: last.map_or(f64::NAN, |r| r.res_gas),
                final_res_elec: last.map_or(f64::NAN, |r| r.res_elec),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rows() {
        let g = default_rho_grid();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], [0.1; 4]);
        assert_eq!(g[4], [200.0; 4]);
        assert_eq!(g[8], [100.0, 100.0, 10.0, 10.0]);
    }
}
