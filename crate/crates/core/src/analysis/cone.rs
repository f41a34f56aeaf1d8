//! Disagreement of the coupled pair started from a Bernoulli hyperplane and
//! from all ones, and the cone sums it bounds.
//!
//! `eta^1` starts from Bernoulli(`rho`) on `{x : x_d = 0}` and 0 elsewhere,
//! `eta^2` from all ones, both driven by one timeline on `[0, s_max]`. By
//! duality `eta^A_s(o) = 1` iff the backward set of `(o, s)` at time 0 meets
//! `A`, so each grid time costs one backward scan that draws only the clocks
//! it touches.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domination::DominationReport;
use crate::error::{invalid, Result};
use crate::harris::{lazy_backward_scan, LazyTimeline};
use crate::processes::{bernoulli_bit, ProductMeasureParams};
use crate::rng::RngKey;
use crate::stats::{Estimate, LinearFit, Proportion, Z95};
use crate::topology::{BoundaryPolicy, GraphTopology, TopologyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub dim: usize,
    /// Half-width of the simulated box.
    pub radius: usize,
    pub lambda: f64,
    /// Cone half-angle, in `(0, pi/2)`.
    pub theta: f64,
    /// Grid spacing `T`.
    pub step: f64,
    /// Grid times are `0, T, ..., s_points * T`.
    pub s_points: usize,
    /// Fit range for the exponential decay of the disagreement.
    pub fit_range: (f64, f64),
    pub replicas: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCurve {
    pub rho: f64,
    pub theta: f64,
    pub s_grid: Vec<f64>,
    pub counts: Vec<Proportion>,
    pub delta: Vec<Estimate<f64>>,
    /// `phi[i]` is the cone sum with tip at `s_grid[i]`, truncated at the last grid time.
    pub phi: Vec<f64>,
    pub fit: Option<LinearFit<f64>>,
    pub fit_range: (f64, f64),
    /// Replicas whose backward scans reached the edge of the box.
    pub boundary_hits: u64,
}

impl MixingCurve {
    /// `s,delta_hat,ci_lo,ci_hi`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,delta_hat,ci_lo,ci_hi\n");
        for (s, d) in self.s_grid.iter().zip(&self.delta) {
            let _ = writeln!(out, "{},{},{},{}", s, d.value, d.ci_lo, d.ci_hi);
        }
        out
    }

    pub fn phi_strictly_decreasing(&self) -> bool {
        self.phi.windows(2).all(|w| w[1] < w[0])
    }
}

/// `#{x in Z^k : |x|_2 <= r}`.
pub fn lattice_points_in_ball(k: usize, r: f64) -> u64 {
    fn count(k: usize, r2: f64) -> u64 {
        if r2 < 0.0 {
            return 0;
        }
        if k == 0 {
            return 1;
        }
        let m = r2.sqrt().floor() as i64;
        (-m..=m).map(|x| count(k - 1, r2 - (x * x) as f64)).sum()
    }
    if r < 0.0 {
        return 0;
    }
    count(k, r * r + 1e-9)
}

/// `Phi(t) = sum over grid s >= t of #{x : |x| <= (s - t) tan(theta)} * delta(s)`.
pub fn cone_sums(s_grid: &[f64], delta: &[f64], theta: f64, sub_dim: usize) -> Vec<f64> {
    let slope = theta.tan();
    s_grid
        .iter()
        .map(|&t| {
            s_grid
                .iter()
                .zip(delta)
                .filter(|(&s, _)| s >= t)
                .map(|(&s, &d)| lattice_points_in_ball(sub_dim, (s - t) * slope) as f64 * d)
                .sum()
        })
        .collect()
}

/// Per-replica disagreement indicators at every grid time.
pub fn cone_disagreements(
    topology: &GraphTopology,
    params: &ConeParams,
    rho: f64,
    key: RngKey,
) -> Result<(Vec<bool>, bool)> {
    let measure = ProductMeasureParams::new(rho)?;
    let o = topology.origin();
    let last = topology.dim() - 1;
    let s_max = params.s_points as f64 * params.step;
    let occupied = |v: u32| topology.coord(v)[last] == 0 && bernoulli_bit(measure, key, v);
    let mut out = vec![!occupied(o)];
    let mut hit_edge = false;
    if params.s_points > 0 {
        let mut tl = LazyTimeline::new(topology, params.lambda, (0.0, s_max), key)?;
        for i in 1..=params.s_points {
            let s = i as f64 * params.step;
            let scan = lazy_backward_scan(&mut tl, o, s, 0.0)?;
            hit_edge |= scan.reach as usize >= params.radius;
            let two = !scan.reachable.is_empty();
            let one = scan.reachable.iter().any(|&v| occupied(v));
            out.push(one != two);
        }
    }
    Ok((out, hit_edge))
}

/// Disagreement curve with cone sums; `rho` is the conservative density of `domination`.
pub fn cone_mixing_curve(params: &ConeParams, domination: &DominationReport<f64>) -> Result<MixingCurve> {
    let rho = domination.rho_conservative;
    if !(rho > 0.0) {
        return Err(invalid("domination report gives no positive density"));
    }
    if params.dim == 0 || !(params.theta > 0.0 && params.theta < std::f64::consts::FRAC_PI_2) {
        return Err(invalid("need dim >= 1 and theta in (0, pi/2)"));
    }
    if !(params.step > 0.0) {
        return Err(invalid("grid step must be positive"));
    }
    let topology = GraphTopology::build(
        &TopologyKind::lattice(params.dim, params.radius),
        &BoundaryPolicy::Free,
    )?;
    let mut counts = vec![Proportion::default(); params.s_points + 1];
    let mut boundary_hits = 0;
    let per_replica: Vec<(Vec<bool>, bool)> = (0..params.replicas)
        .into_par_iter()
        .map(|r| cone_disagreements(&topology, params, rho, RngKey::for_replica(params.seed, r)))
        .collect::<Result<_>>()?;
    for (dis, edge) in per_replica {
        for (c, d) in counts.iter_mut().zip(dis) {
            c.record(d);
        }
        boundary_hits += edge as u64;
    }
    let s_grid: Vec<f64> = (0..=params.s_points).map(|i| i as f64 * params.step).collect();
    let delta: Vec<Estimate<f64>> = counts.iter().map(|c| c.estimate(Z95)).collect();
    let values: Vec<f64> = delta.iter().map(|d| d.value).collect();
    let phi = cone_sums(&s_grid, &values, params.theta, params.dim - 1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = s_grid
        .iter()
        .zip(&values)
        .filter(|(&s, &d)| s >= params.fit_range.0 && s <= params.fit_range.1 && d > 0.0)
        .map(|(&s, &d)| (s, d.ln()))
        .unzip();
    Ok(MixingCurve {
        rho,
        theta: params.theta,
        s_grid,
        counts,
        delta,
        phi,
        fit: LinearFit::fit(&xs, &ys),
        fit_range: params.fit_range,
        boundary_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{evolve, Configuration, EventTimeline};
    use crate::processes::bernoulli_sample;
    use crate::topology::VertexSubset;

    fn params(lambda: f64, replicas: u64) -> ConeParams {
        ConeParams {
            dim: 2,
            radius: 8,
            lambda,
            theta: 0.7,
            step: 1.0,
            s_points: 4,
            fit_range: (1.0, 4.0),
            replicas,
            seed: 11,
        }
    }

    #[test]
    fn lattice_point_counts() {
        assert_eq!(lattice_points_in_ball(1, 2.5), 5);
        assert_eq!(lattice_points_in_ball(2, 1.0), 5);
        assert_eq!(lattice_points_in_ball(2, 2.0f64.sqrt()), 9);
        assert_eq!(lattice_points_in_ball(0, 3.0), 1);
        assert_eq!(lattice_points_in_ball(1, 0.0), 1);
    }

    #[test]
    fn cone_sums_by_hand() {
        let phi = cone_sums(&[0.0, 1.0, 2.0], &[0.5, 0.25, 0.125], std::f64::consts::FRAC_PI_4, 1);
        assert!((phi[0] - (0.5 + 3.0 * 0.25 + 5.0 * 0.125)).abs() < 1e-12);
        assert!((phi[1] - (0.25 + 3.0 * 0.125)).abs() < 1e-12);
        assert!((phi[2] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn lazy_duality_matches_forward_pair() {
        let p = params(1.5, 0);
        let topo = GraphTopology::build(&TopologyKind::lattice(2, p.radius), &BoundaryPolicy::Free).unwrap();
        let line = VertexSubset::sublattice(&topo, 1).unwrap();
        let rho = 0.4;
        for r in 0..30 {
            let key = RngKey::for_replica(5, r);
            let (dis, _) = cone_disagreements(&topo, &p, rho, key).unwrap();
            let tl: EventTimeline<f64> = EventTimeline::generate(&topo, 1.5, (0.0, 4.0), key).unwrap();
            let init = bernoulli_sample(&topo, ProductMeasureParams::new(rho).unwrap(), &line, key).unwrap();
            let one = evolve(&tl, &init).unwrap();
            let two = evolve(&tl, &Configuration::ones(&topo)).unwrap();
            for (i, &d) in dis.iter().enumerate() {
                let s = i as f64;
                let o = topo.origin();
                assert_eq!(d, one.value_at(o, s) != two.value_at(o, s), "replica {r} s {s}");
            }
        }
    }

    #[test]
    fn zero_rate_disagreement_has_closed_form() {
        // eta^2_s(o) = 1 iff no cross by s; eta^1 adds the Bernoulli bit
        let rep = DominationReport {
            samples: 0,
            z: Z95,
            points: vec![],
            rho_hat: 0.5,
            rho_conservative: 0.5,
            rho_upper: 0.5,
            conditional: vec![],
            pass: true,
        };
        let curve = cone_mixing_curve(&params(0.0, 4000), &rep).unwrap();
        for (s, d) in curve.s_grid.iter().zip(&curve.delta) {
            let exact = 0.5 * (-s).exp();
            assert!((d.value - exact).abs() < 4.0 * d.std_err.max(1e-3), "{s}: {} vs {exact}", d.value);
        }
        assert!(curve.phi_strictly_decreasing());
        assert!(curve.to_csv().starts_with("s,delta_hat,ci_lo,ci_hi\n0,"));
    }
}
