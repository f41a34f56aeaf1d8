//! The slab-suppressed process `zeta` and the slab survival scan.

use serde::{Deserialize, Serialize};

use crate::analysis::{tail_fit, TailFit};
use crate::error::{invalid, Result};
use crate::harris::{evolve_filtered, extinction_time, Configuration, EventTimeline, Trajectory};
use crate::rng::RngKey;
use crate::scalar::Scalar;
use crate::stats::{Estimate, Proportion, Z95};
use crate::topology::{BoundaryPolicy, GraphTopology, TopologyKind};

fn check_slab_geometry(topology: &GraphTopology, k: usize) -> Result<()> {
    if topology.dim() < 2 {
        return Err(invalid("slab process needs dimension >= 2"));
    }
    if k == 0 {
        return Err(invalid("slab width must be >= 1"));
    }
    Ok(())
}

/// Slab coordinates `floor(x_i / k)` over the first `d - 1` axes.
pub fn slab_index(topology: &GraphTopology, v: u32, k: usize) -> Vec<i32> {
    let x = topology.coord(v);
    x[..x.len() - 1]
        .iter()
        .map(|&c| c.div_euclid(k as i32))
        .collect()
}

fn same_slab(topology: &GraphTopology, k: usize, a: u32, b: u32) -> bool {
    let (x, y) = (topology.coord(a), topology.coord(b));
    let d = x.len() - 1;
    (0..d).all(|i| x[i].div_euclid(k as i32) == y[i].div_euclid(k as i32))
}

/// Evolves `init` through `timeline` with arrows between distinct slabs removed.
pub fn slab_process<S: Scalar>(
    topology: &GraphTopology,
    timeline: &EventTimeline<S>,
    k: usize,
    init: &Configuration,
) -> Result<Trajectory<S>> {
    check_slab_geometry(topology, k)?;
    timeline.ensure_on(topology)?;
    let (a, b) = timeline.window();
    evolve_filtered(timeline, init, a, b, |from, to, _| same_slab(topology, k, from, to))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlabScanRow {
    pub k: usize,
    pub survival: Proportion,
    pub epsilon: Estimate<f64>,
    pub tail: TailFit<f64>,
    /// Largest distance reached by any replica, against the box half-length.
    pub max_reach: u32,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlabScanParams {
    pub dim: usize,
    pub lambda: f64,
    pub length: usize,
    pub horizon: f64,
    pub replicas: u64,
    pub seed: u64,
}

/// Survival frequency and finite-tail fit of the extinction time on `S_k`
/// for every `k` in `widths`.
pub fn slab_survival_scan(params: &SlabScanParams, widths: &[usize]) -> Result<Vec<SlabScanRow>> {
    if params.dim < 2 {
        return Err(invalid("slab scan needs dimension >= 2"));
    }
    let mut rows = Vec::with_capacity(widths.len());
    for &k in widths {
        let topology = GraphTopology::build(
            &TopologyKind::slab(params.dim, k, params.length),
            &BoundaryPolicy::Free,
        )?;
        let origin = topology.origin();
        let mut samples = Vec::with_capacity(params.replicas as usize);
        for r in 0..params.replicas {
            let key = RngKey::for_replica(params.seed, r).derive(k as u64);
            samples.push(extinction_time(&topology, params.lambda, &[origin], params.horizon, key)?);
        }
        let mut survival = Proportion::default();
        for s in &samples {
            survival.record(s.censored);
        }
        rows.push(SlabScanRow {
            k,
            survival,
            epsilon: survival.estimate(Z95),
            tail: tail_fit(&samples, 2.0)?,
            max_reach: samples.iter().map(|s| s.reach).max().unwrap_or(0),
            length: params.length,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{dominated_by, evolve};

    fn lattice(dim: usize, r: usize) -> GraphTopology {
        GraphTopology::build(&TopologyKind::lattice(dim, r), &BoundaryPolicy::Free).unwrap()
    }

    #[test]
    fn zeta_below_eta() {
        let t = lattice(2, 6);
        for r in 0..10 {
            let tl: EventTimeline<f64> =
                EventTimeline::generate(&t, 2.0, (0.0, 3.0), RngKey::new(7, r)).unwrap();
            let init = Configuration::ones(&t);
            let zeta = slab_process(&t, &tl, 2, &init).unwrap();
            let eta = evolve(&tl, &init).unwrap();
            assert!(dominated_by(&zeta, &eta));
        }
    }

    #[test]
    fn single_slab_equals_eta() {
        let t = GraphTopology::build(&TopologyKind::slab(2, 3, 5), &BoundaryPolicy::Free).unwrap();
        let tl: EventTimeline<f64> =
            EventTimeline::generate(&t, 2.0, (0.0, 3.0), RngKey::new(1, 2)).unwrap();
        let init = Configuration::ones(&t);
        let zeta = slab_process(&t, &tl, 3, &init).unwrap();
        let eta = evolve(&tl, &init).unwrap();
        assert_eq!(zeta.flips(), eta.flips());
    }

    #[test]
    fn slab_indices_partition_box() {
        let t = lattice(3, 3);
        assert_eq!(slab_index(&t, t.vertex_at(&[-3, 2, 1]).unwrap(), 2), vec![-2, 1]);
        assert_eq!(slab_index(&t, t.origin(), 2), vec![0, 0]);
    }

    #[test]
    fn line_rejected() {
        let t = lattice(1, 4);
        let tl: EventTimeline<f64> =
            EventTimeline::generate(&t, 1.0, (0.0, 1.0), RngKey::new(1, 1)).unwrap();
        assert!(slab_process(&t, &tl, 1, &Configuration::ones(&t)).is_err());
        let p = SlabScanParams {
            dim: 1,
            lambda: 1.0,
            length: 5,
            horizon: 5.0,
            replicas: 5,
            seed: 0,
        };
        assert!(slab_survival_scan(&p, &[1]).is_err());
    }

    #[test]
    fn zero_rate_never_survives() {
        let p = SlabScanParams {
            dim: 2,
            lambda: 0.0,
            length: 5,
            horizon: 20.0,
            replicas: 200,
            seed: 3,
        };
        let rows = slab_survival_scan(&p, &[1, 2]).unwrap();
        assert!(rows.iter().all(|r| r.survival.hits == 0));
    }
}
