//! Estimators, oracles and verdicts.

mod cone;
mod ctmc;
mod dfkg;
mod domination;
mod fsurface;
mod prop11;
mod renewal;
mod tail;

pub use cone::{
    cone_disagreements, cone_mixing_curve, cone_sums, lattice_points_in_ball, ConeParams,
    MixingCurve,
};
pub use ctmc::{connected_graphs, ctmc_oracle, ctmc_uniformized, ExactDistribution, MAX_ORACLE_VERTICES};
pub use dfkg::{dfkg_test, random_triples, DfkgReport, DfkgRow, DfkgTriple};
pub use domination::{
    allzero_curve, conditional_criterion, AllZeroPoint, ConditionalEstimate, DominationReport,
    MIN_ALLZERO_SAMPLES, MIN_CONDITIONED,
};
pub use fsurface::{
    f_surface, zero_run_decay, ChainRuleCheck, FCell, FSurface, MonotonicityViolation,
    ZeroRunDecay,
};
pub use prop11::{alpha_max, prop11_obstruction, Prop11Row, Prop11Table};
pub use renewal::{renewal_chain, renewal_extract, RenewalRecord};
pub use tail::{tail_fit, TailFit, TailParams, MIN_TAIL_SAMPLES};
