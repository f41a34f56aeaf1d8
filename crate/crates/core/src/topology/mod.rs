//! Finite truncations of the graphs the simulations run on.
//!
//! Vertex ids are dense in `0..n` and assigned deterministically: lattices
//! and slabs in lexicographic coordinate order, trees breadth-first with
//! children in label order. Directed edges are the CSR adjacency slots, so
//! the arrow `v -> neighbors(v)[k]` has id `offsets[v] + k`.

mod metrics;
mod subset;
mod tree;

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::splitmix64;

pub use metrics::{ball, density_profile, density_profile_scalar, growth_exponent};
pub use subset::{Provenance, VertexSubset};
pub use tree::{ray, ray_heads, tree_delta, TreeLabel};

/// Default cap on the number of vertices a topology may have.
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 22;

/// Graph family plus truncation parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologyKind {
    /// Box `[-r_1, r_1] x ... x [-r_d, r_d]` of the integer lattice.
    Lattice { radii: Vec<usize> },
    /// Homogeneous tree where every vertex has `d + 1` neighbours, cut at `depth`.
    Tree { d: usize, depth: usize },
    /// Path `0 - 1 - ... - (len - 1)`.
    HalfLine { len: usize },
    /// `{0..width-1}^(dim-1) x [-length, length]`.
    Slab {
        dim: usize,
        width: usize,
        length: usize,
    },
    /// Explicit undirected edge list on `0..vertices`.
    EdgeList {
        vertices: usize,
        edges: Vec<(u32, u32)>,
        #[serde(default)]
        origin: u32,
    },
}

impl TopologyKind {
    pub fn lattice(dim: usize, radius: usize) -> Self {
        Self::Lattice {
            radii: vec![radius; dim],
        }
    }

    pub fn tree(d: usize, depth: usize) -> Self {
        Self::Tree { d, depth }
    }

    pub fn half_line(len: usize) -> Self {
        Self::HalfLine { len }
    }

    pub fn slab(dim: usize, width: usize, length: usize) -> Self {
        Self::Slab { dim, width, length }
    }

    pub fn path(len: usize) -> Self {
        Self::HalfLine { len }
    }

    pub fn edge_list(vertices: usize, edges: Vec<(u32, u32)>) -> Self {
        Self::EdgeList {
            vertices,
            edges,
            origin: 0,
        }
    }
}

/// Boundary handling for lattice-like kinds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    #[default]
    Free,
    /// Wrap around along the listed axes (0-based).
    Periodic { axes: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct GraphTopology {
    kind: TopologyKind,
    boundary: BoundaryPolicy,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    origin: u32,
    dim: usize,
    coords: Vec<i32>,
    labels: Vec<TreeLabel>,
    depth: Vec<u32>,
    dist: Vec<u32>,
    safe_radius: usize,
    id: u64,
}

pub fn build_topology(kind: &TopologyKind, boundary: &BoundaryPolicy) -> Result<GraphTopology> {
    GraphTopology::build(kind, boundary)
}

impl GraphTopology {
    pub fn build(kind: &TopologyKind, boundary: &BoundaryPolicy) -> Result<Self> {
        Self::build_with_budget(kind, boundary, DEFAULT_VERTEX_BUDGET)
    }

    pub fn build_with_budget(
        kind: &TopologyKind,
        boundary: &BoundaryPolicy,
        budget: usize,
    ) -> Result<Self> {
        let n = vertex_count(kind).ok_or(Error::VertexBudget {
            requested: usize::MAX,
            budget,
        })?;
        if n > budget {
            return Err(Error::VertexBudget {
                requested: n,
                budget,
            });
        }
        let mut topo = match kind {
            TopologyKind::Lattice { radii } => {
                if radii.is_empty() {
                    return Err(invalid("lattice needs at least one dimension"));
                }
                let axes = periodic_axes(boundary, radii.len(), None)?;
                let extents: Vec<(i32, i32)> =
                    radii.iter().map(|&r| (-(r as i32), r as i32)).collect();
                let safe = *radii.iter().min().unwrap();
                grid(kind.clone(), boundary.clone(), &extents, &axes, safe)?
            }
            TopologyKind::Slab { dim, width, length } => {
                if *dim < 2 {
                    return Err(invalid("slab requires dimension >= 2"));
                }
                if *width < 1 {
                    return Err(invalid("slab width k must be >= 1"));
                }
                let axes = periodic_axes(boundary, *dim, Some(dim - 1))?;
                let mut extents = vec![(0, *width as i32 - 1); dim - 1];
                extents.push((-(*length as i32), *length as i32));
                grid(kind.clone(), boundary.clone(), &extents, &axes, *length)?
            }
            TopologyKind::HalfLine { len } => {
                if *len == 0 {
                    return Err(invalid("half-line length must be positive"));
                }
                no_periodic(boundary)?;
                let edges = (1..*len as u32).map(|v| (v - 1, v)).collect::<Vec<_>>();
                let mut t = from_edges(kind.clone(), *len, &edges, 0)?;
                t.dim = 1;
                t.coords = (0..*len as i32).collect();
                t.safe_radius = len - 1;
                t
            }
            TopologyKind::Tree { d, depth } => {
                if *d < 1 {
                    return Err(invalid("tree degree parameter d must be >= 1"));
                }
                no_periodic(boundary)?;
                tree::build_tree(kind.clone(), *d, *depth)?
            }
            TopologyKind::EdgeList {
                vertices,
                edges,
                origin,
            } => {
                if *vertices == 0 {
                    return Err(invalid("edge list needs at least one vertex"));
                }
                no_periodic(boundary)?;
                let mut t = from_edges(kind.clone(), *vertices, edges, *origin)?;
                t.safe_radius = usize::MAX;
                t
            }
        };
        topo.finish()?;
        Ok(topo)
    }

    fn finish(&mut self) -> Result<()> {
        let n = self.len();
        for v in 0..n as u32 {
            let nb = self.neighbors(v);
            for (i, &w) in nb.iter().enumerate() {
                if w == v {
                    return Err(invalid(format!("self-loop at vertex {v}")));
                }
                if nb[..i].contains(&w) {
                    return Err(invalid(format!("duplicate edge {v}-{w}")));
                }
                if !self.neighbors(w).contains(&v) {
                    return Err(invalid(format!("asymmetric edge {v}->{w}")));
                }
            }
        }
        self.dist = self.bfs(self.origin);
        if self.dist.contains(&u32::MAX) {
            return Err(invalid("topology is not connected"));
        }
        let mut h = splitmix64(n as u64);
        for &o in &self.offsets {
            h = splitmix64(h ^ o as u64);
        }
        for &w in &self.neighbors {
            h = splitmix64(h ^ w as u64);
        }
        self.id = splitmix64(h ^ self.origin as u64);
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &TopologyKind {
        &self.kind
    }

    pub fn boundary(&self) -> &BoundaryPolicy {
        &self.boundary
    }

    /// Stable fingerprint of the adjacency structure.
    pub fn id(&self) -> u64 {
        self.id
    }

    #[inline]
    pub fn origin(&self) -> u32 {
        self.origin
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len() as u32).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Number of directed edges (twice the undirected edge count).
    #[inline]
    pub fn directed_edge_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Id of the first directed edge leaving `v`.
    #[inline]
    pub fn edge_offset(&self, v: u32) -> u32 {
        self.offsets[v as usize]
    }

    /// `(from, to)` endpoints of directed edge `e`.
    pub fn directed_edge(&self, e: u32) -> (u32, u32) {
        let from = self.offsets.partition_point(|&o| o <= e) - 1;
        (from as u32, self.neighbors[e as usize])
    }

    /// All directed edges as `(from, to)`, indexed by edge id.
    pub fn directed_edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.neighbors.len());
        for v in 0..self.len() as u32 {
            for &w in self.neighbors(v) {
                out.push((v, w));
            }
        }
        out
    }

    /// Undirected edges with `u < v`, in vertex order.
    pub fn undirected_edges(&self) -> Vec<(u32, u32)> {
        self.directed_edges()
            .into_iter()
            .filter(|&(u, v)| u < v)
            .collect()
    }

    /// Graph distance from the origin.
    #[inline]
    pub fn distance_from_origin(&self, v: u32) -> u32 {
        self.dist[v as usize]
    }

    /// Largest radius around the origin whose ball is unaffected by truncation.
    pub fn safe_radius(&self) -> usize {
        self.safe_radius
    }

    /// Spatial dimension for lattice-like kinds (1 for half-lines, 0 otherwise).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lattice coordinates of `v`; empty for trees and edge lists.
    pub fn coord(&self, v: u32) -> &[i32] {
        if self.dim == 0 {
            return &[];
        }
        let v = v as usize;
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    /// Vertex at the given lattice coordinates, if present.
    pub fn vertex_at(&self, x: &[i32]) -> Option<u32> {
        if self.dim == 0 || x.len() != self.dim {
            return None;
        }
        let extents = self.extents();
        let mut id: usize = 0;
        for (&xi, &(lo, hi)) in x.iter().zip(extents.iter()) {
            if xi < lo || xi > hi {
                return None;
            }
            let width = (hi - lo + 1) as usize;
            id = id * width + (xi - lo) as usize;
        }
        Some(id as u32)
    }

    fn extents(&self) -> Vec<(i32, i32)> {
        match &self.kind {
            TopologyKind::Lattice { radii } => {
                radii.iter().map(|&r| (-(r as i32), r as i32)).collect()
            }
            TopologyKind::Slab { dim, width, length } => {
                let mut e = vec![(0, *width as i32 - 1); dim - 1];
                e.push((-(*length as i32), *length as i32));
                e
            }
            TopologyKind::HalfLine { len } => vec![(0, *len as i32 - 1)],
            _ => Vec::new(),
        }
    }

    /// Tree labels (empty unless the topology is a tree).
    pub fn labels(&self) -> &[TreeLabel] {
        &self.labels
    }

    pub fn label(&self, v: u32) -> Option<&TreeLabel> {
        self.labels.get(v as usize)
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, TopologyKind::Tree { .. })
    }

    /// Tree depth of `v` (distance from the root).
    pub(crate) fn tree_depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    /// Breadth-first distances from `source`; `u32::MAX` marks unreachable vertices.
    pub fn bfs(&self, source: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for &w in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Edge-list export: header `#vertices N`, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#vertices {}", self.len());
        for (u, v) in self.undirected_edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

fn vertex_count(kind: &TopologyKind) -> Option<usize> {
    match kind {
        TopologyKind::Lattice { radii } => radii
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(2 * r + 1)),
        TopologyKind::Slab { dim, width, length } => {
            let mut acc = 2 * length + 1;
            for _ in 1..*dim {
                acc = acc.checked_mul(*width)?;
            }
            Some(acc)
        }
        TopologyKind::HalfLine { len } => Some(*len),
        TopologyKind::Tree { d, depth } => {
            let mut total = 1usize;
            let mut level = d + 1;
            for _ in 0..*depth {
                total = total.checked_add(level)?;
                level = level.checked_mul(*d)?;
            }
            Some(total)
        }
        TopologyKind::EdgeList { vertices, .. } => Some(*vertices),
    }
}

fn periodic_axes(boundary: &BoundaryPolicy, dim: usize, only: Option<usize>) -> Result<Vec<bool>> {
    let mut flags = vec![false; dim];
    if let BoundaryPolicy::Periodic { axes } = boundary {
        for &a in axes {
            if a >= dim {
                return Err(invalid(format!("periodic axis {a} out of range")));
            }
            if let Some(allowed) = only {
                if a != allowed {
                    return Err(invalid(
                        "slabs may only wrap along their untruncated (last) axis",
                    ));
                }
            }
            flags[a] = true;
        }
    }
    Ok(flags)
}

fn no_periodic(boundary: &BoundaryPolicy) -> Result<()> {
    match boundary {
        BoundaryPolicy::Free => Ok(()),
        BoundaryPolicy::Periodic { .. } => {
            Err(invalid("periodic boundaries apply to lattices and slabs only"))
        }
    }
}

fn grid(
    kind: TopologyKind,
    boundary: BoundaryPolicy,
    extents: &[(i32, i32)],
    periodic: &[bool],
    safe_radius: usize,
) -> Result<GraphTopology> {
    let dim = extents.len();
    let widths: Vec<usize> = extents.iter().map(|&(lo, hi)| (hi - lo + 1) as usize).collect();
    for (axis, (&w, &p)) in widths.iter().zip(periodic).enumerate() {
        if p && w < 3 {
            return Err(invalid(format!(
                "periodic axis {axis} needs width >= 3 to avoid self-loops"
            )));
        }
    }
    let n: usize = widths.iter().product();
    let mut strides = vec![1usize; dim];
    for a in (0..dim.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * widths[a + 1];
    }
    let mut coords = Vec::with_capacity(n * dim);
    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbors = Vec::with_capacity(n * 2 * dim);
    let mut idx = vec![0usize; dim];
    offsets.push(0u32);
    for v in 0..n {
        let mut rem = v;
        for a in 0..dim {
            idx[a] = rem / strides[a];
            rem %= strides[a];
            coords.push(extents[a].0 + idx[a] as i32);
        }
        for a in 0..dim {
            let w = widths[a];
            if idx[a] > 0 {
                neighbors.push((v - strides[a]) as u32);
            } else if periodic[a] {
                neighbors.push((v + (w - 1) * strides[a]) as u32);
            }
            if idx[a] + 1 < w {
                neighbors.push((v + strides[a]) as u32);
            } else if periodic[a] {
                neighbors.push((v - (w - 1) * strides[a]) as u32);
            }
        }
        offsets.push(neighbors.len() as u32);
    }
    let origin_coord: Vec<i32> = extents
        .iter()
        .map(|&(lo, hi)| 0.clamp(lo, hi))
        .collect();
    let origin = origin_coord
        .iter()
        .zip(extents)
        .zip(&strides)
        .map(|((&x, &(lo, _)), &s)| (x - lo) as usize * s)
        .sum::<usize>() as u32;
    Ok(GraphTopology {
        kind,
        boundary,
        offsets,
        neighbors,
        origin,
        dim,
        coords,
        labels: Vec::new(),
        depth: Vec::new(),
        dist: Vec::new(),
        safe_radius,
        id: 0,
    })
}

fn from_edges(
    kind: TopologyKind,
    n: usize,
    edges: &[(u32, u32)],
    origin: u32,
) -> Result<GraphTopology> {
    if origin as usize >= n {
        return Err(invalid("origin out of range"));
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u as usize >= n || v as usize >= n {
            return Err(invalid(format!("edge {u}-{v} out of range")));
        }
        if u == v {
            return Err(invalid(format!("self-loop at vertex {u}")));
        }
        if adj[u as usize].contains(&v) {
            return Err(invalid(format!("duplicate edge {u}-{v}")));
        }
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbors = Vec::new();
    offsets.push(0u32);
    for list in adj {
        neighbors.extend(list);
        offsets.push(neighbors.len() as u32);
    }
    Ok(GraphTopology {
        kind,
        boundary: BoundaryPolicy::Free,
        offsets,
        neighbors,
        origin,
        dim: 0,
        coords: Vec::new(),
        labels: Vec::new(),
        depth: Vec::new(),
        dist: Vec::new(),
        safe_radius: usize::MAX,
        id: 0,
    })
}
