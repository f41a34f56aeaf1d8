//! Event-driven Monte Carlo for the contact process and related
//! interacting particle systems, built on the graphical representation.
//!
//! Simulation code is generic over the time scalar `S` (`f32` or `f64`);
//! the aliases below fix it to `f64` for everyday use. Exact quantities
//! (densities on finite balls) are returned as rationals.
// `!(x > 0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod harris;
pub mod processes;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
pub use rng::RngKey;
pub use scalar::Scalar;
pub use topology::{BoundaryPolicy, GraphTopology, TopologyKind, VertexSubset};

pub type Timeline = harris::EventTimeline<f64>;
pub type Timeline32 = harris::EventTimeline<f32>;
pub type Path = harris::Trajectory<f64>;
pub type Path32 = harris::Trajectory<f32>;
pub type Extinction = harris::ExtinctionSample<f64>;
pub type Estimate = stats::Estimate<f64>;
pub type Fit = stats::LinearFit<f64>;
pub type Domination = analysis::DominationReport<f64>;
pub type Tail = analysis::TailFit<f64>;
pub type Renewal = analysis::RenewalRecord<f64>;
pub type Exact = analysis::ExactDistribution<f64>;
pub type Density = num_rational::Ratio<u64>;
