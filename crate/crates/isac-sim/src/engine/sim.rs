//! Replications and run summaries.

use serde::Serialize;

use super::config::ScenarioConfig;
use super::slot::{run_slot, SlotRecord, StrategyId};
use super::world::World;
use crate::error::{Result, SimError};
use crate::link_metrics::watts_to_dbm;
use crate::rng::replication_seed;

/// Seed of replication `index`; the first replication uses the base seed.
pub fn seed_for(base: u64, index: usize) -> u64 {
    if index == 0 {
        base
    } else {
        replication_seed(base, index as u64)
    }
}

/// One replication's slot loop.
pub fn run_replication(cfg: &ScenarioConfig, strategy: StrategyId, seed: u64) -> Result<Vec<SlotRecord>> {
    let mut world = World::new(cfg, seed)?;
    (0..cfg.slots).map(|_| run_slot(&mut world, strategy)).collect()
}

/// Time averages and convergence diagnostics over every replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub strategy: StrategyId,
    pub slots: usize,
    pub replications: usize,
    pub mean_secrecy: f64,
    pub mean_min_secrecy: f64,
    pub outage: f64,
    /// Largest per-slot outage seen in any replication.
    pub max_outage: f64,
    pub see: f64,
    /// Mean BS transmit power, dBm of the mean watts.
    pub bs_power_dbm: f64,
    pub hn_power_w: f64,
    pub mean_entropy_bits: f64,
    pub mean_gne_iters: f64,
    pub max_gne_gap: f64,
    /// Largest per-slot change of any split share over the last quarter of each run.
    pub tail_split_step: f64,
    pub final_leader_residual: f64,
}

impl Summary {
    pub fn from_traces(strategy: StrategyId, traces: &[Vec<SlotRecord>]) -> Self {
        let all: Vec<&SlotRecord> = traces.iter().flatten().collect();
        let m = all.len().max(1) as f64;
        let mean = |f: &dyn Fn(&SlotRecord) -> f64| all.iter().map(|r| f(r)).sum::<f64>() / m;
        let tail_split_step = traces
            .iter()
            .map(|t| {
                let start = t.len() - t.len() / 4;
                t.windows(2)
                    .skip(start.saturating_sub(1))
                    .map(|p| {
                        (p[1].alpha - p[0].alpha)
                            .abs()
                            .max((p[1].beta - p[0].beta).abs())
                            .max((p[1].gamma - p[0].gamma).abs())
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        Self {
            strategy,
            slots: traces.first().map_or(0, |t| t.len()),
            replications: traces.len(),
            mean_secrecy: mean(&|r| r.r_mean),
            mean_min_secrecy: mean(&|r| r.r_min),
            outage: mean(&|r| r.outage),
            max_outage: all.iter().map(|r| r.outage).fold(0.0, f64::max),
            see: mean(&|r| r.see),
            bs_power_dbm: watts_to_dbm(mean(&|r| r.bs_power_w)),
            hn_power_w: mean(&|r| r.hn_power_sum_w),
            mean_entropy_bits: mean(&|r| r.entropy_bits),
            mean_gne_iters: mean(&|r| r.gne_iters as f64),
            max_gne_gap: all.iter().map(|r| r.gne_gap).fold(0.0, f64::max),
            tail_split_step,
            final_leader_residual: traces.iter().filter_map(|t| t.last()).map(|r| r.leader_residual).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// One trace per replication, in replication order.
    pub traces: Vec<Vec<SlotRecord>>,
    pub summary: Summary,
}

/// Runs `cfg.replications` independent replications, in parallel when
/// there is more than one, and merges them in replication order.
pub fn run_simulation(cfg: &ScenarioConfig, strategy: StrategyId) -> Result<SimOutput> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.replications).map(|i| seed_for(cfg.seed, i)).collect();
    let results: Vec<Result<Vec<SlotRecord>>> = if seeds.len() == 1 {
        vec![run_replication(cfg, strategy, seeds[0])]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = seeds.iter().map(|&seed| s.spawn(move || run_replication(cfg, strategy, seed))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(SimError::Domain("replication worker panicked".into()))))
                .collect()
        })
    };
    let traces = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_traces(strategy, &traces);
    Ok(SimOutput { traces, summary })
}
