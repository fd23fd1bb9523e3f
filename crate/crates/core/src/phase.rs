//! Small helpers for dimensionless phases.

use std::f64::consts::TAU;

/// Reduce a phase to `[0, 2π)`. Values within `1e-9` below `2π` snap to zero
/// so that sorted term lists do not split a multiset across the branch cut.
pub fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if TAU - r < 1e-9 {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two phases on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
