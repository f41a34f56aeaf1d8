//! Labelled homogeneous trees, the subset Delta and its rays.
//!
//! The root has label `(0)`. Its `d + 1` children are `(0, i)` with
//! `i in 1..=d+1`; every deeper vertex with label `u` has `d` children
//! `(u, i)` with `i in 1..=d`. Delta is the set of vertices whose last label
//! entry is not `1`, and the ray of `x in Delta` follows child `1` downwards.
//! Every vertex lies on exactly one ray.

use std::fmt;

use super::{GraphTopology, Provenance, TopologyKind, VertexSubset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeLabel(Vec<u16>);

impl TreeLabel {
    pub fn root() -> Self {
        TreeLabel(vec![0])
    }

    pub fn child(&self, i: u16) -> Self {
        let mut e = self.0.clone();
        e.push(i);
        TreeLabel(e)
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    pub fn last(&self) -> u16 {
        *self.0.last().expect("labels are never empty")
    }

    /// Distance of the labelled vertex from the root.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }
}

impl fmt::Display for TreeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub(super) fn build_tree(kind: TopologyKind, d: usize, depth: usize) -> Result<GraphTopology> {
    let mut labels = vec![TreeLabel::root()];
    let mut depths = vec![0u32];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut frontier = vec![0u32];
    for level in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * (d + 1));
        for &p in &frontier {
            let fanout = if level == 0 { d + 1 } else { d };
            for i in 1..=fanout as u16 {
                let v = labels.len() as u32;
                labels.push(labels[p as usize].child(i));
                depths.push(level as u32 + 1);
                adj.push(vec![p]);
                adj[p as usize].push(v);
                next.push(v);
            }
        }
        frontier = next;
    }
    let mut offsets = Vec::with_capacity(adj.len() + 1);
    let mut neighbors = Vec::new();
    offsets.push(0);
    for list in adj {
        neighbors.extend(list);
        offsets.push(neighbors.len() as u32);
    }
    Ok(GraphTopology {
        kind,
        boundary: super::BoundaryPolicy::Free,
        offsets,
        neighbors,
        origin: 0,
        dim: 0,
        coords: Vec::new(),
        labels,
        depth: depths,
        dist: Vec::new(),
        safe_radius: depth,
        id: 0,
    })
}

/// `Delta = {x : last entry of u(x) != 1}`; contains the root.
pub fn tree_delta(topology: &GraphTopology) -> Result<VertexSubset> {
    if !topology.is_tree() {
        return Err(Error::NotATree);
    }
    Ok(VertexSubset::from_predicate(
        topology,
        Provenance::TreeDelta,
        |v| topology.labels[v as usize].last() != 1,
    ))
}

/// The child of `v` whose label ends in `1`, if inside the truncation.
fn first_child(topology: &GraphTopology, v: u32) -> Option<u32> {
    let depth = topology.tree_depth(v);
    topology
        .neighbors(v)
        .iter()
        .copied()
        .find(|&w| topology.tree_depth(w) == depth + 1 && topology.labels[w as usize].last() == 1)
}

/// Ray `x, (u(x),1), (u(x),1,1), ...` down to the truncation depth.
pub fn ray(topology: &GraphTopology, x: u32) -> Result<Vec<u32>> {
    if !topology.is_tree() {
        return Err(Error::NotATree);
    }
    if x as usize >= topology.len() || topology.labels[x as usize].last() == 1 {
        return Err(Error::NotInDelta(x));
    }
    let mut out = vec![x];
    let mut v = x;
    while let Some(c) = first_child(topology, v) {
        out.push(c);
        v = c;
    }
    Ok(out)
}

/// For every vertex, the Delta vertex heading the ray it lies on.
pub fn ray_heads(topology: &GraphTopology) -> Result<Vec<u32>> {
    if !topology.is_tree() {
        return Err(Error::NotATree);
    }
    // BFS order puts parents before children.
    let mut heads = vec![0u32; topology.len()];
    for v in 0..topology.len() as u32 {
        if topology.labels[v as usize].last() != 1 {
            heads[v as usize] = v;
        } else {
            let depth = topology.tree_depth(v);
            let parent = topology
                .neighbors(v)
                .iter()
                .copied()
                .find(|&w| topology.tree_depth(w) + 1 == depth)
                .expect("non-root vertex has a parent");
            heads[v as usize] = heads[parent as usize];
        }
    }
    Ok(heads)
}
