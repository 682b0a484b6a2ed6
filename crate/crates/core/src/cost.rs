use serde::{Deserialize, Serialize};

use crate::milp::LinearExpression;

/// Investment and operation cost of one agent, M$.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub invest: f64,
    pub operate: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.invest + self.operate
    }

    pub(crate) fn evaluate(invest: &LinearExpression, operate: &LinearExpression, x: &[f64]) -> Self {
        Self {
            invest: invest.evaluate(x),
            operate: operate.evaluate(x),
        }
    }
}

impl core::ops::Add for CostBreakdown {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            invest: self.invest + rhs.invest,
            operate: self.operate + rhs.operate,
        }
    }
}
