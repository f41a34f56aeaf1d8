//! The ray-constrained process on a regular tree.

use crate::error::{Error, Result};
use crate::harris::{evolve_filtered, Configuration, EventTimeline, Flip, Trajectory};
use crate::scalar::Scalar;
use crate::topology::{ray, ray_heads, tree_delta, GraphTopology, VertexSubset};

/// `xi` on the whole tree (zero off Delta) with the depth it was started at.
#[derive(Debug, Clone)]
pub struct ConstrainedTree<S: Scalar> {
    pub trajectory: Trajectory<S>,
    pub delta: VertexSubset,
    /// Window length: survival to the window start stands in for an infinite path.
    pub t_back: S,
}

/// Vertices and directed edge ids whose clocks the ray of `x` reads.
pub fn ray_clocks(topology: &GraphTopology, x: u32) -> Result<(Vec<u32>, Vec<u32>)> {
    let vertices = ray(topology, x)?;
    let mut edges = Vec::new();
    for pair in vertices.windows(2) {
        for (a, b) in [(pair[0], pair[1]), (pair[1], pair[0])] {
            let base = topology.edge_offset(a);
            let k = topology
                .neighbors(a)
                .iter()
                .position(|&w| w == b)
                .expect("ray vertices are adjacent");
            edges.push(base + k as u32);
        }
    }
    edges.sort_unstable();
    Ok((vertices, edges))
}

/// For `x` in Delta, `xi_t(x) = 1` iff a backward path from `(x, t)` using only
/// arrows along the ray of `x` reaches the window start.
pub fn constrained_tree_process<S: Scalar>(
    topology: &GraphTopology,
    timeline: &EventTimeline<S>,
    delta: &VertexSubset,
) -> Result<ConstrainedTree<S>> {
    timeline.ensure_on(topology)?;
    let expected = tree_delta(topology)?;
    if !delta.belongs_to(topology) || delta.to_vec() != expected.to_vec() {
        return Err(Error::TopologyMismatch(
            "subset is not the Delta set of this tree".into(),
        ));
    }
    let heads = ray_heads(topology)?;
    let (a, b) = timeline.window();
    // Forward from all ones with intra-ray arrows is backward reachability per ray.
    let full = evolve_filtered(timeline, &Configuration::ones(topology), a, b, |from, to, _| {
        heads[from as usize] == heads[to as usize]
    })?;
    let initial = Configuration::from_subset(topology, delta)?;
    let mut final_state = full.final_state().clone();
    for v in 0..topology.len() as u32 {
        if !delta.contains(v) {
            final_state.set(v, false);
        }
    }
    let flips: Vec<Flip<S>> = full
        .flips()
        .iter()
        .filter(|f| delta.contains(f.vertex))
        .copied()
        .collect();
    Ok(ConstrainedTree {
        trajectory: Trajectory::new((a, b), initial, flips, final_state),
        delta: delta.clone(),
        t_back: b - a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{backward_reachable_filtered, dominated_by, evolve, SpaceTimePoint};
    use crate::rng::RngKey;
    use crate::topology::{BoundaryPolicy, TopologyKind};
    use std::collections::HashSet;

    fn tree(d: usize, depth: usize) -> GraphTopology {
        GraphTopology::build(&TopologyKind::tree(d, depth), &BoundaryPolicy::Free).unwrap()
    }

    #[test]
    fn dominated_by_contact_process() {
        let t = tree(2, 6);
        let delta = tree_delta(&t).unwrap();
        for r in 0..20 {
            let tl: EventTimeline<f64> =
                EventTimeline::generate(&t, 3.0, (0.0, 4.0), RngKey::new(6, r)).unwrap();
            let xi = constrained_tree_process(&t, &tl, &delta).unwrap();
            let eta = evolve(&tl, &Configuration::ones(&t)).unwrap();
            assert!(dominated_by(&xi.trajectory, &eta));
            assert_eq!(xi.t_back, 4.0);
        }
    }

    #[test]
    fn matches_restricted_backward_search() {
        let t = tree(3, 4);
        let delta = tree_delta(&t).unwrap();
        let tl: EventTimeline<f64> =
            EventTimeline::generate(&t, 2.5, (0.0, 3.0), RngKey::new(2, 9)).unwrap();
        let xi = constrained_tree_process(&t, &tl, &delta).unwrap();
        for x in delta.iter() {
            let (verts, _) = ray_clocks(&t, x).unwrap();
            let on_ray: HashSet<u32> = verts.into_iter().collect();
            for &time in &[0.5, 1.7, 3.0] {
                let reach = backward_reachable_filtered(
                    &tl,
                    SpaceTimePoint::new(x, time),
                    0.0,
                    |from, to, _| on_ray.contains(&from) && on_ray.contains(&to),
                )
                .unwrap();
                assert_eq!(!reach.is_empty(), xi.trajectory.value_at(x, time));
            }
        }
        for v in 0..t.len() as u32 {
            if !delta.contains(v) {
                assert!(xi.trajectory.flips_of(v).next().is_none());
                assert!(!xi.trajectory.value_at(v, 0.0));
            }
        }
    }

    #[test]
    fn rays_read_disjoint_clocks() {
        let t = tree(2, 5);
        let delta = tree_delta(&t).unwrap();
        let mut seen_v = HashSet::new();
        let mut seen_e = HashSet::new();
        for x in delta.iter() {
            let (vs, es) = ray_clocks(&t, x).unwrap();
            assert!(vs.into_iter().all(|v| seen_v.insert(v)));
            assert!(es.into_iter().all(|e| seen_e.insert(e)));
        }
        assert_eq!(seen_v.len(), t.len());
    }

    #[test]
    fn wrong_subset_rejected() {
        let t = tree(2, 3);
        let tl: EventTimeline<f64> =
            EventTimeline::generate(&t, 1.0, (0.0, 1.0), RngKey::new(1, 1)).unwrap();
        let wrong = VertexSubset::from_vertices(&t, [0u32], crate::topology::Provenance::Custom).unwrap();
        assert!(constrained_tree_process(&t, &tl, &wrong).is_err());
    }
}
