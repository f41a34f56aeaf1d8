//! Conditional zero-run probabilities `f(t, u) = P(A_{0,t} | A_{-u,0})`,
//! where `A_{a,b}` is the event that the observed vertex is 0 on `[a, b)`.

use serde::{Deserialize, Serialize};

use super::domination::MIN_CONDITIONED;
use crate::error::{invalid, Error, Result};
use crate::harris::Trajectory;
use crate::scalar::Scalar;
use crate::stats::{Estimate, LinearFit, Proportion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FCell<S> {
    pub t: S,
    pub u: S,
    /// Replicas in `A_{-u,0}` and, among them, in `A_{0,t}`.
    pub counts: Proportion,
    /// `None` when fewer than the minimum number of replicas satisfy the condition.
    pub estimate: Option<Estimate<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation<S> {
    pub t: S,
    pub u_low: S,
    pub u_high: S,
    pub drop: S,
    pub combined_se: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleCheck<S> {
    pub t: S,
    pub s: S,
    pub u: S,
    /// `f(t + s, u)`
    pub lhs: S,
    /// `f(t, u) f(s, u + t)`
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FSurface<S> {
    pub vertex: u32,
    pub t_grid: Vec<S>,
    pub u_grid: Vec<S>,
    /// `cells[i][j]` is `f(t_grid[i], u_grid[j])`.
    pub cells: Vec<Vec<FCell<S>>>,
    pub starved: usize,
}

impl<S: Scalar> FSurface<S> {
    fn value(&self, t: S, u: S) -> Option<S> {
        let i = self.t_grid.iter().position(|&x| x == t)?;
        let j = self.u_grid.iter().position(|&x| x == u)?;
        self.cells[i][j].estimate.map(|e| e.value)
    }

    /// Pairs `u_low < u_high` in one row with `f(t, u_high) < f(t, u_low) - k * se`,
    /// `se` the root sum of squares of both standard errors.
    pub fn monotonicity_violations(&self, k: f64) -> Vec<MonotonicityViolation<S>> {
        let mut out = Vec::new();
        for row in &self.cells {
            for (a, lo) in row.iter().enumerate() {
                for hi in &row[a + 1..] {
                    let (Some(el), Some(eh)) = (lo.estimate, hi.estimate) else {
                        continue;
                    };
                    let se = (el.std_err * el.std_err + eh.std_err * eh.std_err).sqrt();
                    if eh.value < el.value - S::of(k) * se {
                        out.push(MonotonicityViolation {
                            t: lo.t,
                            u_low: lo.u,
                            u_high: hi.u,
                            drop: el.value - eh.value,
                            combined_se: se,
                        });
                    }
                }
            }
        }
        out
    }

    /// Every grid triple where both sides of `f(t+s,u) = f(t,u) f(s,u+t)` are estimated.
    pub fn chain_rule_checks(&self) -> Vec<ChainRuleCheck<S>> {
        let mut out = Vec::new();
        for &t in &self.t_grid {
            for &s in &self.t_grid {
                for &u in &self.u_grid {
                    if let (Some(lhs), Some(a), Some(b)) =
                        (self.value(t + s, u), self.value(t, u), self.value(s, u + t))
                    {
                        out.push(ChainRuleCheck {
                            t,
                            s,
                            u,
                            lhs,
                            rhs: a * b,
                        });
                    }
                }
            }
        }
        out
    }
}

fn check_windows<S: Scalar>(trajectories: &[Trajectory<S>], x: u32, lo: S, hi: S) -> Result<()> {
    if trajectories.is_empty() {
        return Err(invalid("no trajectories"));
    }
    for tr in trajectories {
        let (a, b) = tr.window();
        if lo < a || hi > b {
            return Err(Error::OutOfWindow {
                time: if lo < a { lo.to_f64_lossy() } else { hi.to_f64_lossy() },
                start: a.to_f64_lossy(),
                end: b.to_f64_lossy(),
            });
        }
        if x as usize >= tr.vertex_count() {
            return Err(invalid(format!("vertex {x} is not in the trajectory")));
        }
    }
    Ok(())
}

/// Rejection estimates of `f(t, u)` over independent stationary trajectories.
pub fn f_surface<S: Scalar>(
    trajectories: &[Trajectory<S>],
    x: u32,
    t_grid: &[S],
    u_grid: &[S],
    z: f64,
) -> Result<FSurface<S>> {
    if t_grid.iter().chain(u_grid).any(|&v| !(v >= S::zero())) {
        return Err(invalid("grid values must be >= 0"));
    }
    let t_max = t_grid.iter().copied().fold(S::zero(), S::max);
    let u_max = u_grid.iter().copied().fold(S::zero(), S::max);
    check_windows(trajectories, x, -u_max, t_max)?;
    let mut starved = 0;
    let cells = t_grid
        .iter()
        .map(|&t| {
            u_grid
                .iter()
                .map(|&u| {
                    let mut counts = Proportion::default();
                    for tr in trajectories {
                        if tr.zero_on(x, -u, S::zero()) {
                            counts.record(tr.zero_on(x, S::zero(), t));
                        }
                    }
                    let estimate = if counts.trials as usize >= MIN_CONDITIONED {
                        Some(counts.estimate(z))
                    } else {
                        starved += 1;
                        None
                    };
                    FCell { t, u, counts, estimate }
                })
                .collect()
        })
        .collect();
    Ok(FSurface {
        vertex: x,
        t_grid: t_grid.to_vec(),
        u_grid: u_grid.to_vec(),
        cells,
        starved,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRunDecay<S> {
    pub t_grid: Vec<S>,
    pub estimates: Vec<Estimate<S>>,
    /// Least squares of `log P(A_{0,t})` on `t` over points with positive estimates.
    pub fit: Option<LinearFit<S>>,
}

/// `P(A_{0,t})` along `t_grid` with its log-linear fit.
pub fn zero_run_decay<S: Scalar>(
    trajectories: &[Trajectory<S>],
    x: u32,
    t_grid: &[S],
    z: f64,
) -> Result<ZeroRunDecay<S>> {
    let t_max = t_grid.iter().copied().fold(S::zero(), S::max);
    check_windows(trajectories, x, S::zero(), t_max)?;
    let estimates: Vec<Estimate<S>> = t_grid
        .iter()
        .map(|&t| {
            let mut p = Proportion::default();
            for tr in trajectories {
                p.record(tr.zero_on(x, S::zero(), t));
            }
            p.estimate(z)
        })
        .collect();
    let (xs, ys): (Vec<S>, Vec<S>) = t_grid
        .iter()
        .zip(&estimates)
        .filter(|(_, e)| e.value > S::zero())
        .map(|(&t, e)| (t, e.value.ln()))
        .unzip();
    Ok(ZeroRunDecay {
        t_grid: t_grid.to_vec(),
        estimates,
        fit: LinearFit::fit(&xs, &ys),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{evolve, Configuration, EventTimeline};
    use crate::rng::RngKey;
    use crate::stats::Z95;
    use crate::topology::{BoundaryPolicy, GraphTopology, TopologyKind};

    fn runs(lambda: f64, count: u64) -> (GraphTopology, Vec<Trajectory<f64>>) {
        let topo = GraphTopology::build(&TopologyKind::lattice(1, 15), &BoundaryPolicy::Free).unwrap();
        let trs = (0..count)
            .map(|r| {
                let tl: EventTimeline<f64> =
                    EventTimeline::generate(&topo, lambda, (-8.0, 4.0), RngKey::new(77, r)).unwrap();
                evolve(&tl, &Configuration::ones(&topo)).unwrap()
            })
            .collect();
        (topo, trs)
    }

    #[test]
    fn boundary_rows_and_columns() {
        let (topo, trs) = runs(2.0, 2000);
        let o = topo.origin();
        let s = f_surface(&trs, o, &[0.0, 1.0, 2.0], &[0.0, 1.0, 3.0], Z95).unwrap();
        for cell in &s.cells[0] {
            if let Some(e) = cell.estimate {
                assert_eq!(e.value, 1.0);
            }
        }
        let direct = zero_run_decay(&trs, o, &[1.0, 2.0], Z95).unwrap();
        assert_eq!(s.cells[1][0].estimate.unwrap().value, direct.estimates[0].value);
        assert_eq!(s.cells[2][0].estimate.unwrap().value, direct.estimates[1].value);
        assert!(!s.chain_rule_checks().is_empty());
    }

    #[test]
    fn isolated_sites_have_memoryless_zero_runs() {
        // lambda = 0 from ones: once 0 a site stays 0, so f(t, u) = 1 for u > 0
        let (topo, trs) = runs(0.0, 500);
        let s = f_surface(&trs, topo.origin(), &[1.0, 2.0], &[0.5, 1.0], Z95).unwrap();
        for row in &s.cells {
            for c in row {
                assert_eq!(c.estimate.unwrap().value, 1.0);
            }
        }
        assert!(s.monotonicity_violations(2.0).is_empty());
    }

    #[test]
    fn windows_are_checked() {
        let (topo, trs) = runs(1.0, 10);
        assert!(f_surface(&trs, topo.origin(), &[5.0], &[0.0], Z95).is_err());
        assert!(f_surface(&trs, topo.origin(), &[1.0], &[9.0], Z95).is_err());
    }
}
