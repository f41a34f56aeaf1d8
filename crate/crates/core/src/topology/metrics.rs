//! Balls, growth and densities around a centre vertex.

use num_rational::Ratio;

use super::{GraphTopology, Provenance, VertexSubset};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Radius up to which balls around `center` are unaffected by truncation.
fn safe_radius_at(topology: &GraphTopology, center: u32) -> usize {
    topology
        .safe_radius()
        .saturating_sub(topology.distance_from_origin(center) as usize)
}

fn distances(topology: &GraphTopology, center: u32) -> Vec<u32> {
    if center == topology.origin() {
        topology.dist.clone()
    } else {
        topology.bfs(center)
    }
}

fn check(topology: &GraphTopology, center: u32, n: usize) -> Result<()> {
    if center as usize >= topology.len() {
        return Err(invalid(format!("centre {center} not in topology")));
    }
    let safe = safe_radius_at(topology, center);
    if n > safe {
        return Err(Error::TruncationBias { requested: n, safe });
    }
    Ok(())
}

/// `B(n) = {x : d(center, x) <= n}`.
pub fn ball(topology: &GraphTopology, center: u32, n: usize) -> Result<VertexSubset> {
    check(topology, center, n)?;
    let dist = distances(topology, center);
    Ok(VertexSubset::from_predicate(topology, Provenance::Ball, |v| {
        dist[v as usize] as usize <= n
    }))
}

/// Cumulative ball sizes `|B(0)|, ..., |B(n_max)|`.
fn ball_sizes(topology: &GraphTopology, center: u32, n_max: usize) -> Result<Vec<u64>> {
    check(topology, center, n_max)?;
    let dist = distances(topology, center);
    let mut sizes = vec![0u64; n_max + 1];
    for &d in &dist {
        if (d as usize) <= n_max {
            sizes[d as usize] += 1;
        }
    }
    for n in 1..=n_max {
        sizes[n] += sizes[n - 1];
    }
    Ok(sizes)
}

/// `|B(n)|^(1/n)` for `n = 1..=n_max`.
pub fn growth_exponent<S: Scalar>(
    topology: &GraphTopology,
    center: u32,
    n_max: usize,
) -> Result<Vec<S>> {
    let sizes = ball_sizes(topology, center, n_max)?;
    Ok((1..=n_max)
        .map(|n| S::of(sizes[n] as f64).powf(S::one() / S::of_usize(n)))
        .collect())
}

/// Exact ratios `|Delta ∩ B(n)| / |B(n)|` for `n = 1..=n_max`.
pub fn density_profile(
    topology: &GraphTopology,
    subset: &VertexSubset,
    center: u32,
    n_max: usize,
) -> Result<Vec<Ratio<u64>>> {
    if !subset.belongs_to(topology) {
        return Err(Error::TopologyMismatch(
            "subset was built for a different topology".into(),
        ));
    }
    check(topology, center, n_max)?;
    let dist = distances(topology, center);
    let mut total = vec![0u64; n_max + 1];
    let mut inside = vec![0u64; n_max + 1];
    for (v, &d) in dist.iter().enumerate() {
        let d = d as usize;
        if d <= n_max {
            total[d] += 1;
            if subset.contains(v as u32) {
                inside[d] += 1;
            }
        }
    }
    for n in 1..=n_max {
        total[n] += total[n - 1];
        inside[n] += inside[n - 1];
    }
    Ok((1..=n_max)
        .map(|n| Ratio::new(inside[n], total[n]))
        .collect())
}

/// [`density_profile`] converted to floating point.
pub fn density_profile_scalar<S: Scalar>(
    topology: &GraphTopology,
    subset: &VertexSubset,
    center: u32,
    n_max: usize,
) -> Result<Vec<S>> {
    Ok(density_profile(topology, subset, center, n_max)?
        .into_iter()
        .map(|r| S::of(*r.numer() as f64) / S::of(*r.denom() as f64))
        .collect())
}
