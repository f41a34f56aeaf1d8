//! Backward depths `D_i` at grid points and the renewal chain `T_i`.
//!
//! `D_i` is the least `l >= 1` such that no backward path from `(x_i, T i)`
//! reaches time `T (i - l)`; it is infinite when a path survives to the
//! window start. The chain is `T_0 = 0`, `T_{i+1} = T_i + D_{n - T_i}`; it is
//! followed until a depth is infinite or `T_i >= n`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::harris::{backward_death_time, EventTimeline, SpaceTimePoint};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalRecord<S> {
    pub sites: Vec<u32>,
    pub step: S,
    /// `depths[i - 1] = D_i`; `None` when the backward path reaches the window start.
    pub depths: Vec<Option<u64>>,
    /// `T_0, T_1, ..., T_K` as far as followed.
    pub chain: Vec<u64>,
    /// Index of the last finite chain element.
    pub k: usize,
    /// The chain stopped because `T_K >= n` rather than at an infinite depth.
    pub reached_n: bool,
    /// Distance from the first grid time down to the window start.
    pub censor_depth: S,
}

impl<S: Scalar> RenewalRecord<S> {
    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn tau_k(&self) -> u64 {
        *self.chain.last().expect("chain starts at 0")
    }

    /// Every `eta_{T i}(x_i)` is 0.
    pub fn all_zero(&self) -> bool {
        self.depths.iter().all(Option::is_some)
    }
}

/// Follows `T_{i+1} = T_i + D_{n - T_i}` over given depths.
pub fn renewal_chain(depths: &[Option<u64>]) -> (Vec<u64>, bool) {
    let n = depths.len() as u64;
    let mut chain = vec![0u64];
    loop {
        let cur = *chain.last().expect("nonempty");
        if cur >= n {
            return (chain, true);
        }
        match depths[(n - cur - 1) as usize] {
            Some(d) => chain.push(cur + d),
            None => return (chain, false),
        }
    }
}

/// Extracts the record for `sites[i - 1]` at times `step * i`, `i = 1..=n`.
pub fn renewal_extract<S: Scalar>(
    timeline: &EventTimeline<S>,
    sites: &[u32],
    step: S,
) -> Result<RenewalRecord<S>> {
    if sites.is_empty() {
        return Err(invalid("site sequence is empty"));
    }
    if !(step > S::zero()) {
        return Err(invalid("grid step must be positive"));
    }
    let (a, b) = timeline.window();
    let n = sites.len();
    if !(step > a) || S::of_usize(n) * step > b {
        return Err(invalid("grid times step..n*step must lie inside the window"));
    }
    let mut depths = Vec::with_capacity(n);
    for (idx, &x) in sites.iter().enumerate() {
        let i = S::of_usize(idx + 1);
        let died = backward_death_time(timeline, SpaceTimePoint::new(x, i * step), a)?;
        depths.push(died.map(|tau| {
            let l = (i - tau / step).floor().to_f64_lossy() as u64 + 1;
            l.max(1)
        }));
    }
    let (chain, reached_n) = renewal_chain(&depths);
    Ok(RenewalRecord {
        sites: sites.to_vec(),
        step,
        k: chain.len() - 1,
        depths,
        chain,
        reached_n,
        censor_depth: step - a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{evolve, Configuration};
    use crate::rng::RngKey;
    use crate::topology::{BoundaryPolicy, GraphTopology, TopologyKind};

    #[test]
    fn chain_arithmetic() {
        assert_eq!(renewal_chain(&[Some(1), Some(1), None]), (vec![0], false));
        let (c, r) = renewal_chain(&[Some(1), Some(2), Some(1)]);
        assert_eq!((c, r), (vec![0, 1, 3], true));
        let (c, r) = renewal_chain(&[None, Some(1), Some(1)]);
        assert_eq!((c, r), (vec![0, 1, 2], false));
    }

    #[test]
    fn single_cross_gives_unit_depth() {
        // one vertex, window (-5, 3], cross at 2.5: the path from (0, 3) dies in (2, 3]
        let t = GraphTopology::build(&TopologyKind::edge_list(1, vec![]), &BoundaryPolicy::Free).unwrap();
        let tl = EventTimeline::from_events(&t, 1.0, (-5.0, 3.5), vec![vec![2.5]], vec![]).unwrap();
        let rec = renewal_extract(&tl, &[0, 0, 0], 1.0).unwrap();
        assert_eq!(rec.depths, vec![None, None, Some(1)]);
        assert_eq!(rec.chain, vec![0, 1]);
        assert!(!rec.reached_n);
        assert_eq!(rec.censor_depth, 6.0);
    }

    #[test]
    fn depth_finiteness_matches_forward_state() {
        let topo = GraphTopology::build(&TopologyKind::lattice(1, 20), &BoundaryPolicy::Free).unwrap();
        let o = topo.origin();
        for r in 0..100 {
            let tl: EventTimeline<f64> =
                EventTimeline::generate(&topo, 2.0, (-6.0, 8.5), RngKey::new(31, r)).unwrap();
            let rec = renewal_extract(&tl, &[o; 8], 1.0).unwrap();
            let eta = evolve(&tl, &Configuration::ones(&topo)).unwrap();
            for i in 1..=8 {
                assert_eq!(rec.depths[i - 1].is_some(), !eta.value_at(o, i as f64));
            }
            if rec.all_zero() {
                assert!(rec.tau_k() >= 8);
            }
        }
    }

    #[test]
    fn grid_outside_window_rejected() {
        let t = GraphTopology::build(&TopologyKind::path(2), &BoundaryPolicy::Free).unwrap();
        let tl: EventTimeline<f64> = EventTimeline::generate(&t, 1.0, (0.0, 2.0), RngKey::new(0, 1)).unwrap();
        assert!(renewal_extract(&tl, &[0, 0, 0], 1.0).is_err());
    }
}
