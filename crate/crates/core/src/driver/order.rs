use serde::{Deserialize, Serialize};

use super::IterationHistory;
use crate::avi::dist_inf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub order: f64,
    /// `e_{k+1}/e_k²` on the same triple, reported when the order is at
    /// least 1.5.
    pub quad_constant: Option<f64>,
}

/// Empirical convergence order from the last usable triple of errors
/// `e_k = ‖x_k − x̂‖∞`, with the final iterate `x̂` as reference.
///
/// A triple is usable when its errors strictly decrease and all lie above
/// `100ε`, so rounding noise near the limit is skipped.
pub fn estimate_order(history: &IterationHistory) -> Result<OrderEstimate> {
    estimate_order_from(&history.iterates)
}

pub(crate) fn estimate_order_from(iterates: &[Vec<f64>]) -> Result<OrderEstimate> {
    if iterates.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "order estimate needs at least 4 iterates, got {}",
            iterates.len()
        )));
    }
    let last = &iterates[iterates.len() - 1];
    let errors: Vec<f64> = iterates.iter().map(|x| dist_inf(x, last)).collect();
    let floor = 100.0 * f64::EPSILON;
    errors
        .windows(3)
        .rev()
        .find(|w| w[2] > floor && w[0] > w[1] && w[1] > w[2])
        .map(|w| {
            let order = (w[2] / w[1]).ln() / (w[1] / w[0]).ln();
            OrderEstimate {
                order,
                quad_constant: (order >= 1.5).then(|| w[2] / (w[1] * w[1])),
            }
        })
        .ok_or_else(|| {
            Error::InsufficientData(
                "no three consecutive errors decrease strictly above the noise floor".into(),
            )
        })
}
