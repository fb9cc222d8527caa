//! Discrete-slot simulator of a hierarchical secure ISAC network.
//!
//! A base station acting as Stackelberg leader splits its power between data,
//! artificial noise and sensing and prices the behaviour of hybrid edge nodes.
//! The nodes play a generalized Nash game over transmit powers and switch
//! between receiving and friendly-jamming roles. A Bayesian angle-of-arrival
//! tracker per eavesdropper steers coalition jamming fields with nulls toward
//! protected receivers.
//!
//! Closed-form layers are generic over [`Real`]; the crate-root aliases fix
//! them to `f64`, the precision used by the simulation engine.

pub mod array_geometry;
pub mod belief;
pub mod channel;
pub mod engine;
pub mod error;
pub mod followers;
pub mod leader;
pub mod linalg;
pub mod link_metrics;
pub mod refinement;
pub mod rng;
pub mod scalar;

pub use error::{Result, SimError};
pub use engine::{run_simulation, ScenarioConfig, SlotRecord, StrategyId};
pub use scalar::Real;

pub type ArraySpec = array_geometry::ArraySpec<f64>;
pub type BeamWeights = array_geometry::BeamWeights<f64>;
pub type PathLossModel = channel::PathLossModel<f64>;
pub type NoiseSpec = channel::NoiseSpec<f64>;
pub type BeliefState = belief::BeliefState<f64>;
pub type LeaderState = leader::LeaderState<f64>;
pub type LeaderGains = leader::LeaderGains<f64>;
pub type Prices = leader::Prices<f64>;
