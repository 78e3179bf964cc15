//! Dilute random-cluster and Ising models with quenched random couplings:
//! exact oracles, samplers, surface tension, maximal flows, rate
//! functions, Wulff crystals and conditioned droplets.

pub mod coexist;
pub mod deviations;
pub mod disorder;
pub mod exact;
pub mod flow;
pub mod geometry;
pub mod mc;
pub mod oracle;
pub mod spin;
pub mod stats;
pub mod tension;
pub mod unionfind;
pub mod wulff;

pub use disorder::{CouplingField, CouplingLaw};
pub use geometry::{Direction, RectRegion};
