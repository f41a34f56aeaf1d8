use std::fmt;

use crate::error::{Error, Result};
use crate::topology::{GraphTopology, VertexSubset};

/// A `{0,1}` configuration over the vertices of one topology.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    topology: u64,
    bits: Vec<bool>,
}

impl Configuration {
    /// The healthy configuration.
    pub fn zeros(topology: &GraphTopology) -> Self {
        Self {
            topology: topology.id(),
            bits: vec![false; topology.len()],
        }
    }

    /// All sites infected.
    pub fn ones(topology: &GraphTopology) -> Self {
        Self {
            topology: topology.id(),
            bits: vec![true; topology.len()],
        }
    }

    /// Only `x` infected.
    pub fn single(topology: &GraphTopology, x: u32) -> Result<Self> {
        let mut c = Self::zeros(topology);
        if x as usize >= c.bits.len() {
            return Err(Error::InvalidParameter(format!("vertex {x} not in topology")));
        }
        c.bits[x as usize] = true;
        Ok(c)
    }

    pub fn from_subset(topology: &GraphTopology, subset: &VertexSubset) -> Result<Self> {
        if !subset.belongs_to(topology) {
            return Err(Error::TopologyMismatch("subset from another topology".into()));
        }
        let mut c = Self::zeros(topology);
        for v in subset.iter() {
            c.bits[v as usize] = true;
        }
        Ok(c)
    }

    pub fn from_bits(topology: &GraphTopology, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != topology.len() {
            return Err(Error::TopologyMismatch(format!(
                "configuration has {} sites, topology {}",
                bits.len(),
                topology.len()
            )));
        }
        Ok(Self {
            topology: topology.id(),
            bits,
        })
    }

    /// Configuration from the low bits of `mask` (vertex `v` is bit `v`).
    pub fn from_mask(topology: &GraphTopology, mask: u64) -> Result<Self> {
        if topology.len() > 64 {
            return Err(Error::TooLarge {
                vertices: topology.len(),
                limit: 64,
            });
        }
        Self::from_bits(
            topology,
            (0..topology.len()).map(|v| mask >> v & 1 == 1).collect(),
        )
    }

    pub fn to_mask(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .take(64)
            .fold(0u64, |m, (v, &b)| m | (b as u64) << v)
    }

    pub fn topology_id(&self) -> u64 {
        self.topology
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, v: u32) -> bool {
        self.bits[v as usize]
    }

    #[inline]
    pub fn set(&mut self, v: u32, value: bool) {
        self.bits[v as usize] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_healthy(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Configuration) -> bool {
        self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &Configuration) -> Configuration {
        Configuration {
            topology: self.topology,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    pub fn ensure_on(&self, topology: &GraphTopology) -> Result<()> {
        if self.topology != topology.id() || self.bits.len() != topology.len() {
            return Err(Error::TopologyMismatch(
                "configuration belongs to another topology".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
