//! Holm's step-down procedure for family-wise error control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HolmOutcome {
    /// Rejection flags in the original order.
    pub rejected: Vec<bool>,
    /// Holm-adjusted p-values in the original order.
    pub adjusted: Vec<f64>,
}

/// Sorts the p-values ascending and rejects `p_(k)` while
/// `p_(k) <= alpha / (M - k + 1)`. Adjusted values are the running maximum
/// of `(M - j + 1) p_(j)`, capped at 1.
pub fn holm_adjust(p_values: &[f64], alpha: f64) -> Result<HolmOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidP(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    // stable sort keeps ties in input order
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));

    let mut rejected = vec![false; m];
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    let mut stepping = true;
    for (k, &idx) in order.iter().enumerate() {
        let factor = (m - k) as f64;
        let p = p_values[idx];
        stepping = stepping && p <= alpha / factor;
        rejected[idx] = stepping;
        running = running.max(factor * p).min(1.0);
        adjusted[idx] = running;
    }
    Ok(HolmOutcome { rejected, adjusted })
}
