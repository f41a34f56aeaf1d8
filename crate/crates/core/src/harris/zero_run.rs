//! Zero-run events `{xi_r(x) = 0 for r in [t, t + s)}` estimated over replicas.

use super::evolve::Trajectory;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::stats::{Estimate, Proportion};

/// Counts replicas in which `x` stays at 0 on `[t, t + s)`.
pub fn zero_run_count<S: Scalar>(trajectories: &[Trajectory<S>], x: u32, t: S, s: S) -> Result<Proportion> {
    if !(s >= S::zero()) {
        return Err(invalid("run length must be >= 0"));
    }
    let mut p = Proportion::default();
    for traj in trajectories {
        let (a, b) = traj.window();
        if t < a || t + s > b {
            return Err(crate::error::Error::OutOfWindow {
                time: (t + s).to_f64_lossy(),
                start: a.to_f64_lossy(),
                end: b.to_f64_lossy(),
            });
        }
        if x as usize >= traj.vertex_count() {
            return Err(invalid(format!("vertex {x} is not in the trajectory")));
        }
        p.record(traj.zero_on(x, t, t + s));
    }
    Ok(p)
}

/// Estimate of `P(xi_r(x) = 0 for r in [t, t + s))` with a Wilson interval.
pub fn zero_run_probability<S: Scalar>(
    trajectories: &[Trajectory<S>],
    x: u32,
    t: S,
    s: S,
    z: f64,
) -> Result<Estimate<S>> {
    Ok(zero_run_count(trajectories, x, t, s)?.estimate(z))
}
