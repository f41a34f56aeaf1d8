//! Projection of trajectories onto `Delta x Z_T` and block maxima.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harris::Trajectory;
use crate::scalar::Scalar;

/// Vertices `Delta` and grid times `i * step` for `i` in `first..=last`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionGrid<S> {
    pub vertices: Vec<u32>,
    pub step: S,
    pub first: i64,
    pub last: i64,
}

impl<S: Scalar> ProjectionGrid<S> {
    pub fn new(vertices: Vec<u32>, step: S, first: i64, last: i64) -> Result<Self> {
        if !(step > S::zero()) || !step.is_finite() {
            return Err(invalid("grid step must be positive"));
        }
        if last < first {
            return Err(invalid("empty time index range"));
        }
        Ok(Self {
            vertices,
            step,
            first,
            last,
        })
    }

    pub fn time(&self, i: i64) -> S {
        S::of(i as f64) * self.step
    }

    pub fn times(&self) -> usize {
        (self.last - self.first + 1) as usize
    }
}

/// Bits over `Delta x Z_T`; `rows[i - first][j]` is the value at vertex `vertices[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedLattice {
    pub vertices: Vec<u32>,
    pub first: i64,
    pub rows: Vec<Vec<bool>>,
}

impl ProjectedLattice {
    pub fn get(&self, i: i64, j: usize) -> bool {
        self.rows[(i - self.first) as usize][j]
    }

    /// Column of vertex position `j` through time.
    pub fn column(&self, j: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn le(&self, other: &ProjectedLattice) -> bool {
        self.vertices == other.vertices
            && self.first == other.first
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| !x || y))
    }

    /// `time_index,vertex_id,bit`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_index,vertex_id,bit\n");
        for (r, row) in self.rows.iter().enumerate() {
            for (j, &bit) in row.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", self.first + r as i64, self.vertices[j], bit as u8);
            }
        }
        out
    }
}

/// Point evaluations of `trajectory` at every grid node.
pub fn project<S: Scalar>(trajectory: &Trajectory<S>, grid: &ProjectionGrid<S>) -> Result<ProjectedLattice> {
    let (a, b) = trajectory.window();
    let (lo, hi) = (grid.time(grid.first), grid.time(grid.last));
    if lo < a || hi > b {
        return Err(Error::OutOfWindow {
            time: if lo < a { lo.to_f64_lossy() } else { hi.to_f64_lossy() },
            start: a.to_f64_lossy(),
            end: b.to_f64_lossy(),
        });
    }
    if let Some(&v) = grid.vertices.iter().find(|&&v| v as usize >= trajectory.vertex_count()) {
        return Err(invalid(format!("vertex {v} is not in the trajectory")));
    }
    let rows = (grid.first..=grid.last)
        .map(|i| {
            let t = grid.time(i);
            grid.vertices.iter().map(|&v| trajectory.value_at(v, t)).collect()
        })
        .collect();
    Ok(ProjectedLattice {
        vertices: grid.vertices.clone(),
        first: grid.first,
        rows,
    })
}

/// `Y_i = max` over each block at every time index; result is `[block][time]`.
pub fn max_block(lattice: &ProjectedLattice, partition: &[Vec<u32>]) -> Result<Vec<Vec<bool>>> {
    let mut owner = vec![usize::MAX; lattice.vertices.len()];
    let mut blocks = Vec::with_capacity(partition.len());
    for (b, block) in partition.iter().enumerate() {
        let mut cols = Vec::with_capacity(block.len());
        for v in block {
            let j = lattice
                .vertices
                .iter()
                .position(|w| w == v)
                .ok_or_else(|| invalid(format!("vertex {v} is not projected")))?;
            if owner[j] != usize::MAX {
                return Err(invalid(format!("vertex {v} appears in two blocks")));
            }
            owner[j] = b;
            cols.push(j);
        }
        blocks.push(cols);
    }
    Ok(blocks
        .iter()
        .map(|cols| lattice.rows.iter().map(|row| cols.iter().any(|&j| row[j])).collect())
        .collect())
}

/// `time_index,Y`
pub fn block_csv(first: i64, y: &[bool]) -> String {
    let mut out = String::from("time_index,Y\n");
    for (i, &bit) in y.iter().enumerate() {
        let _ = writeln!(out, "{},{}", first + i as i64, bit as u8);
    }
    out
}
