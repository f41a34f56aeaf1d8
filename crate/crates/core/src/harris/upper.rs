//! Approximate samples from the upper invariant measure.
//!
//! The process is started from all ones at `-t_back` on a box padded by
//! `max(10, ceil(lambda * t_back / 2))` sites beyond the observed region and
//! read off at time 0 (or along `[0, horizon]`) on the observed region only.

use serde::{Deserialize, Serialize};

use super::config::Configuration;
use super::evolve::{evolve, Trajectory};
use super::timeline::EventTimeline;
use crate::error::{invalid, Result};
use crate::rng::RngKey;
use crate::scalar::Scalar;
use crate::topology::{BoundaryPolicy, GraphTopology, Provenance, TopologyKind, VertexSubset};

/// Padding (in graph distance) recorded with every stationary sample.
pub fn pad_width(lambda: f64, t_back: f64) -> usize {
    ((lambda * t_back / 2.0).ceil() as usize).max(10)
}

/// A truncated graph whose observed region sits `pad` away from the cut.
#[derive(Debug, Clone)]
pub struct PaddedRegion {
    pub topology: GraphTopology,
    pub observed: VertexSubset,
    pub pad: usize,
}

/// `[-r-pad, r+pad]^dim`, observing the inner `[-r, r]^dim`.
pub fn padded_lattice(dim: usize, radius: usize, pad: usize) -> Result<PaddedRegion> {
    let topology =
        GraphTopology::build(&TopologyKind::lattice(dim, radius + pad), &BoundaryPolicy::Free)?;
    let observed = VertexSubset::from_predicate(&topology, Provenance::Ball, |v| {
        topology.coord(v).iter().all(|&x| x.unsigned_abs() as usize <= radius)
    });
    Ok(PaddedRegion {
        topology,
        observed,
        pad,
    })
}

/// Half-line `0..len+pad`, observing `0..len`.
pub fn padded_half_line(len: usize, pad: usize) -> Result<PaddedRegion> {
    let topology = GraphTopology::build(&TopologyKind::half_line(len + pad), &BoundaryPolicy::Free)?;
    let observed = VertexSubset::from_predicate(&topology, Provenance::Custom, |v| (v as usize) < len);
    Ok(PaddedRegion {
        topology,
        observed,
        pad,
    })
}

/// `{0..width-1}^(dim-1) x [-length-pad, length+pad]`, observing `|x_d| <= length`.
pub fn padded_slab(dim: usize, width: usize, length: usize, pad: usize) -> Result<PaddedRegion> {
    let topology = GraphTopology::build(
        &TopologyKind::slab(dim, width, length + pad),
        &BoundaryPolicy::Free,
    )?;
    let observed = VertexSubset::from_predicate(&topology, Provenance::Custom, |v| {
        topology.coord(v)[dim - 1].unsigned_abs() as usize <= length
    });
    Ok(PaddedRegion {
        topology,
        observed,
        pad,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpperSample<S> {
    #[serde(skip)]
    pub configuration: Option<Configuration>,
    pub t_back: S,
    /// Density on the observed region at `-t_back / 2`.
    pub density_half: S,
    /// Density on the observed region at time 0.
    pub density_end: S,
    pub observed: usize,
}

/// Evolves all ones from `-t_back` to 0 and returns the time-0 configuration.
pub fn sample_upper_invariant<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    t_back: S,
    key: RngKey,
    observe: &VertexSubset,
) -> Result<UpperSample<S>> {
    if !(t_back > S::zero()) {
        return Err(invalid("t_back must be positive"));
    }
    if observe.is_empty() {
        return Err(invalid("observation region is empty"));
    }
    let timeline = EventTimeline::generate(topology, lambda, (-t_back, S::zero()), key)?;
    let traj = evolve(&timeline, &Configuration::ones(topology))?;
    let half = -t_back / S::of(2.0);
    let density = |t: S| {
        let ones = observe.iter().filter(|&v| traj.value_at(v, t)).count();
        S::of(ones as f64) / S::of_usize(observe.len())
    };
    Ok(UpperSample {
        density_half: density(half),
        density_end: density(S::zero()),
        configuration: Some(traj.final_state().clone()),
        t_back,
        observed: observe.len(),
    })
}

/// Timeline on `[-t_back, horizon]` with the all-ones evolution started at `-t_back`.
#[derive(Debug, Clone)]
pub struct StationaryRun<S: Scalar> {
    pub timeline: EventTimeline<S>,
    pub trajectory: Trajectory<S>,
    pub t_back: S,
}

pub fn stationary_run<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    t_back: S,
    horizon: S,
    key: RngKey,
) -> Result<StationaryRun<S>> {
    if !(t_back > S::zero()) {
        return Err(invalid("t_back must be positive"));
    }
    if !(horizon > S::zero()) {
        return Err(invalid("horizon must be positive"));
    }
    let timeline = EventTimeline::generate(topology, lambda, (-t_back, horizon), key)?;
    let trajectory = evolve(&timeline, &Configuration::ones(topology))?;
    Ok(StationaryRun {
        timeline,
        trajectory,
        t_back,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{MeanVar, Proportion, Z95};

    #[test]
    fn pad_rule() {
        assert_eq!(pad_width(0.0, 100.0), 10);
        assert_eq!(pad_width(2.0, 30.0), 30);
        assert_eq!(pad_width(1.5, 15.0), 12);
    }

    #[test]
    fn padded_regions_observe_inner_part() {
        let r = padded_lattice(2, 2, 10).unwrap();
        assert_eq!(r.topology.len(), 25 * 25);
        assert_eq!(r.observed.len(), 25);
        let h = padded_half_line(5, 10).unwrap();
        assert_eq!(h.observed.to_vec(), vec![0, 1, 2, 3, 4]);
        let s = padded_slab(2, 3, 2, 10).unwrap();
        assert_eq!(s.observed.len(), 3 * 5);
    }

    #[test]
    fn zero_rate_density_is_exp_minus_t_back() {
        let region = padded_lattice(1, 200, 10).unwrap();
        let t_back = 1.0;
        let mut hits = Proportion::default();
        for r in 0..20 {
            let s: UpperSample<f64> =
                sample_upper_invariant(&region.topology, 0.0, t_back, RngKey::new(5, r), &region.observed)
                    .unwrap();
            let cfg = s.configuration.unwrap();
            for v in region.observed.iter() {
                hits.record(cfg.get(v));
            }
        }
        let (lo, hi): (f64, f64) = hits.wilson(3.29);
        let p = (-t_back).exp();
        assert!(lo <= p && p <= hi, "{lo} {hi} {p}");
        let s: UpperSample<f64> =
            sample_upper_invariant(&region.topology, 0.0, 20.0, RngKey::new(5, 99), &region.observed).unwrap();
        assert_eq!(s.density_end, 0.0);
    }

    #[test]
    fn density_grows_with_lambda() {
        let region = padded_lattice(1, 30, 30).unwrap();
        let mean_density = |lambda: f64| {
            let m: MeanVar<f64> = (0..30)
                .map(|r| {
                    sample_upper_invariant(&region.topology, lambda, 10.0, RngKey::new(8, r), &region.observed)
                        .unwrap()
                        .density_end
                })
                .collect();
            m
        };
        let low = mean_density(1.0);
        let mid = mean_density(3.0);
        let high = mean_density(50.0);
        assert!(low.mean < mid.mean && mid.mean < high.mean);
        assert!(high.mean > 0.95);
        let _ = Z95;
    }

    #[test]
    fn stationary_run_spans_window() {
        let t = GraphTopology::build(&TopologyKind::half_line(4), &BoundaryPolicy::Free).unwrap();
        let run: StationaryRun<f64> = stationary_run(&t, 1.0, 3.0, 2.0, RngKey::new(1, 1)).unwrap();
        assert_eq!(run.trajectory.window(), (-3.0, 2.0));
        assert_eq!(run.trajectory.initial().count_ones(), 4);
        assert!(stationary_run::<f64>(&t, 1.0, 0.0, 2.0, RngKey::new(1, 1)).is_err());
    }
}
