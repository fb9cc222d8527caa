//! Scenario construction, Eve mobility, the per-slot orchestration of the
//! three layers, strategy variants and Monte Carlo replications.

pub mod config;
pub mod sim;
pub mod slot;
pub mod world;

pub use config::{Mobility, ScenarioConfig};
pub use sim::{run_replication, run_simulation, seed_for, SimOutput, Summary};
pub use slot::{run_slot, run_slot_probed, GameProbe, SlotRecord, StrategyId};
pub use world::{Region, Walker, World};
