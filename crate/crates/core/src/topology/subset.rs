use serde::{Deserialize, Serialize};

use super::GraphTopology;
use crate::error::{invalid, Result};

/// Where a subset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    TreeDelta,
    Sublattice,
    Ball,
    Custom,
}

/// Set of vertices of one topology, stored as a bitmask over vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSubset {
    parent: u64,
    universe: usize,
    words: Vec<u64>,
    size: usize,
    provenance: Provenance,
}

impl VertexSubset {
    pub fn empty(topology: &GraphTopology, provenance: Provenance) -> Self {
        Self {
            parent: topology.id(),
            universe: topology.len(),
            words: vec![0; topology.len().div_ceil(64)],
            size: 0,
            provenance,
        }
    }

    pub fn from_vertices(
        topology: &GraphTopology,
        vertices: impl IntoIterator<Item = u32>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut s = Self::empty(topology, provenance);
        for v in vertices {
            if v as usize >= s.universe {
                return Err(invalid(format!("vertex {v} not in topology")));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn from_predicate(
        topology: &GraphTopology,
        provenance: Provenance,
        mut keep: impl FnMut(u32) -> bool,
    ) -> Self {
        let mut s = Self::empty(topology, provenance);
        for v in 0..topology.len() as u32 {
            if keep(v) {
                s.insert(v);
            }
        }
        s
    }

    /// `{x : x_d in {0..m-1}}` on a lattice box: the codimension-one sublattice of width `m`.
    pub fn sublattice(topology: &GraphTopology, m: usize) -> Result<Self> {
        if topology.dim() == 0 {
            return Err(invalid("sublattice requires a lattice-like topology"));
        }
        if m == 0 {
            return Err(invalid("sublattice width must be >= 1"));
        }
        let last = topology.dim() - 1;
        Ok(Self::from_predicate(topology, Provenance::Sublattice, |v| {
            let x = topology.coord(v)[last];
            x >= 0 && (x as usize) < m
        }))
    }

    pub fn insert(&mut self, v: u32) -> bool {
        let (w, b) = (v as usize / 64, v as usize % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        if fresh {
            self.words[w] |= 1 << b;
            self.size += 1;
        }
        fresh
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        let v = v as usize;
        v < self.universe && self.words[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn parent(&self) -> u64 {
        self.parent
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(i as u32 * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn intersection_count(&self, other: &VertexSubset) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn belongs_to(&self, topology: &GraphTopology) -> bool {
        self.parent == topology.id() && self.universe == topology.len()
    }
}
