//! Graphical representation: timelines, forward evolution, backward paths.

mod backward;
mod config;
mod evolve;
mod extinction;
mod lazy;
mod timeline;
mod upper;
mod zero_run;

pub use backward::{
    backward_death_time, backward_reachable, backward_reachable_filtered, backward_scan,
    BackwardScan, SpaceTimePoint,
};
pub use config::Configuration;
pub use evolve::{
    compare_pathwise, dominated_by, evolve, evolve_between, evolve_filtered, Flip, Trajectory,
};
pub use extinction::{extinction_time, ExtinctionSample};
pub use lazy::{lazy_backward_scan, LazyScan, LazyTimeline};
pub use timeline::{generate_timeline, Event, EventKind, EventTimeline};
pub use upper::{
    pad_width, padded_half_line, padded_lattice, padded_slab, sample_upper_invariant,
    stationary_run, PaddedRegion, StationaryRun, UpperSample,
};
pub use zero_run::{zero_run_count, zero_run_probability};
