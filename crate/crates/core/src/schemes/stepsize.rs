use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Sufficient step-size bounds for unique solvability of the DVDM step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeThresholds {
    pub eps1: f64,
    pub eps2: f64,
    pub l_hat: f64,
    pub p: f64,
    pub r: f64,
    /// `dt < min(dx, eps1, eps2)`. Advisory only.
    pub satisfied: bool,
}

/// Evaluate the contraction bounds for radius multiplier `p > 3` and
/// a-priori bound `r > 0`.
pub fn stepsize_thresholds(p: f64, r: f64, g: &Grid, dt: f64) -> Result<StepSizeThresholds> {
    if !(p > 3.0) {
        return Err(Error::Domain(format!("p must exceed 3, got {p}")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    let dx = g.dx();
    let sdx = dx.sqrt();
    let lh = g.sobolev_constant();
    let eps1 = 2.0 * (p - 3.0) * dx
        / (2.0
            + 2.0 * p * (p * lh + 1.0) * r
            + p * (p + 1.0) * r * sdx
            + (2.0 * p * p * lh + p + 1.0) * r * dx);
    let eps2 = dx / (r * (2.0 * p * lh + 1.0 + (p + 0.5) * sdx + (2.0 * p * lh + 0.5) * dx));
    Ok(StepSizeThresholds {
        eps1,
        eps2,
        l_hat: lh,
        p,
        r,
        satisfied: dt < dx.min(eps1).min(eps2),
    })
}
