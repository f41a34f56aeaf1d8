//! Processes derived from, or compared against, the contact process.

mod product;
mod projection;
mod slab;
mod tree;

pub use product::{bernoulli_bit, bernoulli_sample, spin_flip_evolve, ProductMeasureParams, SpinFlipParams};
pub use projection::{block_csv, max_block, project, ProjectedLattice, ProjectionGrid};
pub use slab::{slab_index, slab_process, slab_survival_scan, SlabScanParams, SlabScanRow};
pub use tree::{constrained_tree_process, ray_clocks, ConstrainedTree};
