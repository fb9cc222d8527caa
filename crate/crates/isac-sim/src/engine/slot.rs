//! One scheduling slot: channels, leader, follower game, role switch,
//! sensing update, coalition refinement and metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::world::World;
use crate::array_geometry::BeamWeights;
use crate::belief::{synthesize_measurement, BeliefState};
use crate::error::{Result, SimError};
use crate::followers::{
    gne_solve, power_grid, role_switch, FeasibilitySpec, HnGame, NodeState, Receiver, Role, SecrecyModel, StreamLink,
};
use crate::leader::{leader_objective, leader_step, residual, LeaderKpis, Prices};
use crate::link_metrics::{
    build_precoder, eavesdropper_parts, legitimate_parts, outage_metrics, power_accounting, receiver_terms, secrecy_rate,
    see, watts_to_dbm, ReceiverTerms, TxPowers,
};
use crate::refinement::{
    mean_posterior, refinement_loop, restore_feasibility, shaping_weights, synthesize_beams, FieldGeometry,
    JammerCandidate, JammingField, RefineConfig, Stage,
};
use crate::rng::{substream, Stream};

/// The compared control strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    Baseline,
    FixedAn,
    StackelbergOnly,
    StackelbergRoleswitch,
    Ibeams,
}

impl StrategyId {
    pub const ALL: [StrategyId; 5] = [
        StrategyId::Baseline,
        StrategyId::FixedAn,
        StrategyId::StackelbergOnly,
        StrategyId::StackelbergRoleswitch,
        StrategyId::Ibeams,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Baseline => "baseline",
            StrategyId::FixedAn => "fixed_an",
            StrategyId::StackelbergOnly => "stackelberg_only",
            StrategyId::StackelbergRoleswitch => "stackelberg_roleswitch",
            StrategyId::Ibeams => "ibeams",
        }
    }

    pub fn uses_leader(self) -> bool {
        matches!(self, StrategyId::StackelbergOnly | StrategyId::StackelbergRoleswitch | StrategyId::Ibeams)
    }

    pub fn uses_followers(self) -> bool {
        matches!(self, StrategyId::StackelbergRoleswitch | StrategyId::Ibeams)
    }

    pub fn uses_refinement(self) -> bool {
        self == StrategyId::Ibeams
    }
}

impl std::fmt::Display for StrategyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyId {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| SimError::Config(vec![format!("strategy: unknown strategy '{s}'")]))
    }
}

/// Everything logged about one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub prices: Prices,
    pub sigma_deg: f64,
    /// Largest posterior entropy across Eves after this slot's update.
    pub entropy_bits: f64,
    /// Largest predicted entropy, the value the leader reacted to.
    pub predicted_entropy_bits: f64,
    pub r_min: f64,
    pub r_mean: f64,
    pub outage: f64,
    pub sum_secrecy: f64,
    pub see: f64,
    pub bs_power_w: f64,
    pub bs_power_dbm: f64,
    pub hn_power_sum_w: f64,
    pub jam_power_w: f64,
    pub slot_power_w: f64,
    pub gne_iters: usize,
    pub gne_gap: f64,
    pub gne_converged: bool,
    pub n_thn: usize,
    pub n_jhn: usize,
    pub refine_iters: usize,
    pub refine_deltas: Vec<f64>,
    pub refine_rejected: bool,
    pub refine_relaxed: bool,
    pub dropped_nulls: usize,
    pub leader_residual: f64,
    pub secrecy_error: f64,
    pub objective: f64,
    pub info_gain: f64,
    pub jam_benefit: f64,
    /// Mean leakage at served receivers, multiples of the noise power.
    pub mean_leakage_noise: f64,
    pub max_leakage_w: f64,
    pub served: Vec<usize>,
    pub rates: Vec<f64>,
    /// Legitimate and worst-case eavesdropper SINR per served stream, dB.
    pub legit_sinr_db: Vec<f64>,
    pub eve_sinr_db: Vec<f64>,
    pub roles: Vec<Role>,
    pub powers: Vec<f64>,
    pub eve_bearings_deg: Vec<f64>,
    pub posteriors: Vec<Vec<f64>>,
    pub field: Option<JammingField>,
    /// Beam of every node that holds one, by node index.
    pub beams: Vec<(usize, BeamWeights)>,
}

/// Scheduled streams and their BS-side signal terms for one slot.
struct Links {
    served: Vec<usize>,
    tx: TxPowers,
    /// `(signal, interference)` per served stream at its receiver.
    legit: Vec<(f64, f64)>,
    /// `[e][stream]` eavesdropper `(signal, interference)`.
    eve: Vec<Vec<(f64, f64)>>,
    eve_terms: Vec<ReceiverTerms>,
}

fn perturbed(h: &[Complex64], bound: f64, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    use rand_distr::{Distribution, StandardNormal};
    let e: Vec<Complex64> = h
        .iter()
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let scale = bound * crate::linalg::norm(h) / crate::linalg::norm(&e).max(1e-300);
    h.iter().zip(e).map(|(a, b)| a + b * scale).collect()
}

fn build_links(
    w: &World,
    slot: usize,
    served: &[usize],
    alpha: f64,
    beta: f64,
    eve_chan: &[Vec<Complex64>],
) -> Result<Links> {
    let cfg = &w.cfg;
    let k = served.len();
    let g_hn = cfg.hn.array as f64;
    let g_eve = cfg.eve.array as f64;
    let data = alpha * w.bs_power;
    let estimates: Vec<Vec<Complex64>> = served
        .iter()
        .map(|&u| {
            if cfg.bs.csi_error > 0.0 {
                perturbed(&w.hn_channels[u], cfg.bs.csi_error, &mut substream(w.seed, Stream::CsiError, slot as u64, u as u64))
            } else {
                w.hn_channels[u].clone()
            }
        })
        .collect();
    let refs: Vec<&[Complex64]> = estimates.iter().map(|h| h.as_slice()).collect();
    let reg = if k == 0 { 0.0 } else { cfg.bs.rzf_scale * k as f64 * w.noise / (g_hn * data.max(1e-12)) };
    let precoder = build_precoder(&refs, cfg.bs.antennas, cfg.bs.rf_chains, reg)?;
    let tx = TxPowers {
        stream_powers: vec![if k == 0 { 0.0 } else { data / k as f64 }; k],
        an_power: if precoder.an_dim() > 0 { beta * w.bs_power } else { 0.0 },
        noise: w.noise,
    };
    let legit = served
        .iter()
        .enumerate()
        .map(|(i, &u)| legitimate_parts(i, &receiver_terms(&w.hn_channels[u], &precoder, g_hn), &tx))
        .collect::<Result<Vec<_>>>()?;
    let eve_terms: Vec<ReceiverTerms> = eve_chan.iter().map(|h| receiver_terms(h, &precoder, g_eve)).collect();
    let eve = eve_terms
        .iter()
        .map(|t| (0..k).map(|i| eavesdropper_parts(i, t, &tx, cfg.eve.cancels_streams)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Links { served: served.to_vec(), tx, legit, eve, eve_terms })
}

/// Jamming gains of every node toward every Eve this slot.
fn eve_jam_gains(w: &World, slot: usize, beams: &[Option<BeamWeights>]) -> Result<Vec<Vec<f64>>> {
    (0..w.eves.len())
        .map(|e| {
            let target = w.eves[e].position();
            (0..w.hn_pos.len())
                .map(|k| Ok(w.hn_eve_gain(k, e, slot)? * w.pattern_gain(k, target, beams)))
                .collect()
        })
        .collect()
}

fn hn_jam_gains(w: &World, u: usize, beams: &[Option<BeamWeights>]) -> Vec<f64> {
    (0..w.hn_pos.len())
        .map(|k| if k == u { 0.0 } else { w.hn_link[k][u] * w.pattern_gain(k, w.hn_pos[u], beams) })
        .collect()
}

fn secrecy_model(w: &World, links: &Links, eve_gains: &[Vec<f64>], beams: &[Option<BeamWeights>]) -> SecrecyModel {
    let noise = links.tx.noise;
    let streams = links
        .served
        .iter()
        .enumerate()
        .map(|(i, &u)| StreamLink {
            node: u,
            legit: Receiver { signal: links.legit[i].0, floor: links.legit[i].1 + noise, jam_gains: hn_jam_gains(w, u, beams) },
            eves: links
                .eve
                .iter()
                .zip(eve_gains)
                .map(|(parts, g)| Receiver { signal: parts[i].0, floor: parts[i].1 + noise, jam_gains: g.clone() })
                .collect(),
        })
        .collect();
    SecrecyModel { streams }
}

/// Secrecy node `u` would get if scheduled now with a matched sub-array
/// beam, no artificial noise at its receiver and the current jamming.
fn prospective_rate(
    w: &World,
    u: usize,
    links: &Links,
    eve_chan: &[Vec<Complex64>],
    eve_gains: &[Vec<f64>],
    powers: &[f64],
    beams: &[Option<BeamWeights>],
    alpha: f64,
) -> f64 {
    let cfg = &w.cfg;
    let n = cfg.bs.antennas;
    let k = links.served.len().max(1);
    let p_s = alpha * w.bs_power / k as f64;
    let b = u % k;
    let (lo, hi) = (b * n / k, (b + 1) * n / k);
    let hu = &w.hn_channels[u][lo..hi];
    let hu2 = crate::linalg::norm_sqr(hu);
    if hu2 <= 0.0 {
        return 0.0;
    }
    let mut others = powers.to_vec();
    others[u] = 0.0;
    let jam_u: f64 = hn_jam_gains(w, u, beams).iter().zip(&others).map(|(g, p)| g * p).sum();
    let sinr_u = p_s * cfg.hn.array as f64 * hu2 / (links.tx.noise + jam_u);
    let g_eve = cfg.eve.array as f64;
    let sinr_e = eve_chan
        .iter()
        .enumerate()
        .map(|(e, he)| {
            let s = p_s * g_eve * crate::linalg::vdot(hu, &he[lo..hi]).norm_sqr() / hu2;
            let an = links.tx.an_power * g_eve * links.eve_terms[e].an_gain;
            let jam: f64 = eve_gains[e].iter().zip(&others).map(|(g, p)| g * p).sum();
            s / (links.tx.noise + an + jam)
        })
        .fold(0.0, f64::max);
    secrecy_rate(sinr_u, sinr_e)
}

fn check(cond: bool, slot: usize, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(SimError::Slot { slot, message: what() })
    }
}

/// Sees each slot's follower game and the profile the solver returned.
pub type GameProbe<'p> = &'p mut dyn FnMut(&HnGame<'_>, &[f64]);

/// Advances `w` by one slot under `strategy`.
pub fn run_slot(w: &mut World, strategy: StrategyId) -> Result<SlotRecord> {
    run_slot_probed(w, strategy, None)
}

/// [`run_slot`] that also hands the follower game to `probe`.
pub fn run_slot_probed(w: &mut World, strategy: StrategyId, probe: Option<GameProbe<'_>>) -> Result<SlotRecord> {
    let slot = w.slot;
    run_slot_inner(w, strategy, probe).map_err(|e| match e {
        SimError::Slot { .. } => e,
        other => SimError::Slot { slot, message: other.to_string() },
    })
}

fn run_slot_inner(w: &mut World, strategy: StrategyId, probe: Option<GameProbe<'_>>) -> Result<SlotRecord> {
    let cfg = w.cfg.clone();
    let slot = w.slot;
    let n = cfg.hn.count;
    if slot > 0 {
        w.step_eves(slot);
    }
    let eve_chan = (0..w.eves.len()).map(|e| w.eve_channel(e, slot)).collect::<Result<Vec<_>>>()?;
    let eve_bearings: Vec<f64> = w.eves.iter().map(|e| w.bearing_deg(e.position())).collect();

    // Predicted beliefs; the leader reacts to the latest posterior entropy.
    let sigma = if strategy.uses_leader() { w.leader.kernel_sigma } else { cfg.belief.sigma0_deg };
    let predicted: Vec<BeliefState> = w
        .beliefs
        .iter()
        .map(|b| BeliefState { kernel_sigma: sigma, ..b.clone() }.predict())
        .collect();
    let h_pred = predicted.iter().map(|b| b.entropy()).fold(0.0, f64::max);
    let h_obs = w.beliefs.iter().map(|b| b.entropy()).fold(0.0, f64::max);

    // Leader.
    let prev_leader = w.leader;
    let (alpha, beta, gamma, prices, secrecy_error) = match strategy {
        StrategyId::Baseline => (1.0, 0.0, 0.0, w.leader.prices, 0.0),
        StrategyId::FixedAn => (cfg.leader.alpha0, cfg.leader.beta0, cfg.leader.gamma0, w.leader.prices, 0.0),
        _ if slot == 0 => (w.leader.alpha, w.leader.beta, w.leader.gamma, w.leader.prices, 0.0),
        _ => {
            let (next, bc) = leader_step(&w.leader, &cfg.leader_gains(), &w.kpis, h_obs)?;
            w.leader = next;
            (bc.alpha, bc.beta, bc.gamma, bc.prices, bc.secrecy_error)
        }
    };
    check((alpha + beta + gamma - 1.0).abs() <= 1e-9 && alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0, slot, || {
        format!("power split ({alpha}, {beta}, {gamma}) leaves the simplex")
    })?;

    // Schedule, links and the entry model.
    let mut roles = if strategy.uses_followers() { w.roles.clone() } else { vec![Role::Thn; n] };
    let mut beams: Vec<Option<BeamWeights>> = if strategy.uses_refinement() {
        w.beams.iter().zip(&roles).map(|(b, r)| if *r == Role::Jhn { b.clone() } else { None }).collect()
    } else {
        vec![None; n]
    };
    let mut powers: Vec<f64> = if strategy.uses_followers() {
        w.powers.iter().zip(&roles).map(|(&p, r)| if *r == Role::Jhn { p } else { 0.0 }).collect()
    } else {
        vec![0.0; n]
    };
    let served = w.schedule(&roles);
    let mut links = build_links(w, slot, &served, alpha, beta, &eve_chan)?;
    let mut eve_gains = eve_jam_gains(w, slot, &beams)?;
    let mut model = secrecy_model(w, &links, &eve_gains, &beams);

    let noise = w.noise;
    let spec = FeasibilitySpec::new(cfg.followers.p_fj_max_w, cfg.followers.xi_max_noise * noise)?;
    let p_maxes = vec![cfg.hn.p_max_w; n];
    let grids: Vec<Vec<f64>> = p_maxes.iter().map(|&p| power_grid(p, cfg.followers.grid_points)).collect();

    // Follower game and role switch.
    let (mut gne_iters, mut gne_gap, mut gne_converged) = (0, 0.0, true);
    if strategy.uses_followers() {
        let nodes: Vec<NodeState> = (0..n)
            .map(|u| NodeState {
                id: u,
                position: w.hn_pos[u],
                role: roles[u],
                power: powers[u],
                p_max: cfg.hn.p_max_w,
                eta: cfg.hn.eta,
                cost: cfg.hn.cost_per_w,
            })
            .collect();
        let game = HnGame::new(&nodes, &model, &spec, prices, w.info_gain, noise, cfg.followers.grid_points)?;
        let out = gne_solve(&game, &vec![0.0; n], cfg.gne.tolerance, cfg.gne.max_iters)?;
        gne_iters = out.iterations;
        gne_gap = out.gap_trace.last().copied().unwrap_or(0.0);
        gne_converged = out.converged;
        if let Some(f) = probe {
            f(&game, &out.powers);
        }
        powers = out.powers;

        // Idle nodes carry no secure stream, so the threshold rule turns them
        // into jammers; free stream slots go to the idle nodes with the best
        // prospective secrecy, provided it clears the threshold.
        let thr = cfg.followers.r_threshold;
        let actual = model.rates(&powers);
        let rates: Vec<f64> = (0..n).map(|u| served.iter().position(|&s| s == u).map_or(0.0, |i| actual[i])).collect();
        let mut next_roles = role_switch(&rates, thr);
        let kept = served.iter().filter(|&&u| next_roles[u] == Role::Thn).count();
        let free = cfg.bs.rf_chains.min(n).saturating_sub(kept);
        let mut candidates: Vec<(usize, f64)> = (0..n)
            .filter(|u| !served.contains(u))
            .map(|u| (u, prospective_rate(w, u, &links, &eve_chan, &eve_gains, &powers, &beams, alpha)))
            .filter(|&(_, r)| r >= thr)
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(u, _) in candidates.iter().take(free) {
            next_roles[u] = Role::Thn;
        }
        for u in 0..n {
            if next_roles[u] != roles[u] {
                powers[u] = 0.0;
                beams[u] = None;
            }
        }
        roles = next_roles;
        let served_next = w.schedule(&roles);
        if served_next != links.served {
            links = build_links(w, slot, &served_next, alpha, beta, &eve_chan)?;
        }
        eve_gains = eve_jam_gains(w, slot, &beams)?;
        model = secrecy_model(w, &links, &eve_gains, &beams);
        restore_feasibility(&mut powers, &model, &spec, &p_maxes, &grids);
    }

    // Sensing scan and belief update.
    let posteriors: Vec<BeliefState> = if gamma > 0.0 {
        let mm = cfg.measurement_model();
        predicted
            .iter()
            .enumerate()
            .map(|(e, b)| {
                let mut rng = substream(w.seed, Stream::Measurement, slot as u64, e as u64);
                let z = synthesize_measurement(&b.grid_deg, &[eve_bearings[e]], |_| 1.0, gamma, w.bs_power, &mm, &mut rng)?;
                b.update(&z, cfg.belief.k_eff)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        predicted.clone()
    };
    for b in &posteriors {
        check((b.total_mass() - 1.0).abs() <= 1e-9, slot, || format!("belief of Eve {} has mass {}", b.eve_id, b.total_mass()))?;
    }
    let h_post = posteriors.iter().map(|b| b.entropy()).fold(0.0, f64::max);
    let info_gain = if posteriors.is_empty() {
        0.0
    } else {
        predicted.iter().zip(&posteriors).map(|(p, q)| (p.entropy() - q.entropy()).max(0.0)).sum::<f64>()
            / posteriors.len() as f64
    };

    // Coalition refinement.
    let (mut refine_iters, mut refine_deltas, mut refine_rejected, mut refine_relaxed, mut dropped_nulls) =
        (0, Vec::new(), false, false, 0);
    let mut field = None;
    if strategy.uses_refinement() {
        let jammers: Vec<JammerCandidate> = (0..n)
            .filter(|&u| roles[u] == Role::Jhn)
            .map(|u| JammerCandidate { node: u, bearing_deg: w.bearing_deg(w.hn_pos[u]) })
            .collect();
        let bs = w.bs_position();
        let geom = FieldGeometry {
            origin: [bs[0], bs[1], cfg.eve.height_m],
            nominal_range: 0.5 * (cfg.eve.min_range_m + cfg.eve.max_range_m),
        };
        let protected: Vec<[f64; 3]> = links.served.iter().map(|&u| w.hn_pos[u]).collect();
        let mean_post = mean_posterior(&posteriors);
        let grid = posteriors.first().map(|b| b.grid_deg.clone()).unwrap_or_default();
        let rcfg = RefineConfig {
            peak_threshold: if cfg.refinement.peak_threshold > 0.0 {
                cfg.refinement.peak_threshold
            } else {
                2.0 / cfg.belief.grid_size as f64
            },
            assoc_width_deg: cfg.refinement.assoc_width_deg,
            j_min_fraction: cfg.refinement.j_min_fraction,
            max_rounds: cfg.refinement.max_rounds,
            max_iters: cfg.refinement.max_iters,
            delta_stop: cfg.refinement.delta_stop,
            qos_floor: cfg.refinement.qos_guard.then_some(cfg.followers.r_threshold),
        };
        let world: &World = w;
        let rebuild = |coalitions: &[crate::refinement::Coalition]| -> Result<Stage> {
            let syn = synthesize_beams(coalitions, &world.hn_pos, &protected, &world.hn_array, &geom)?;
            let mut stage_beams: Vec<Option<BeamWeights>> = vec![None; n];
            for (k, b) in &syn.beams {
                stage_beams[*k] = Some(b.clone());
            }
            let g = eve_jam_gains(world, slot, &stage_beams)?;
            let model = secrecy_model(world, &links, &g, &stage_beams);
            let s = shaping_weights(&syn.beams, &world.hn_pos, &world.hn_array, &geom, &mean_post, &grid);
            Ok(Stage { model, shaping_weights: s, beams: syn.beams, dropped_nulls: syn.dropped_nulls })
        };
        let out = refinement_loop(&posteriors, &jammers, &model, &powers, &spec, &p_maxes, &grids, &rcfg, rebuild)?;
        refine_iters = out.iterations;
        refine_rejected = out.rejected;
        refine_relaxed = out.relaxed;
        for pair in out.deltas.iter() {
            check(*pair >= 0.0, slot, || "refinement accepted a secrecy decrease".into())?;
        }
        refine_deltas = out.deltas;
        powers = out.powers;
        if let Some(stage) = out.stage {
            dropped_nulls = stage.dropped_nulls;
            beams = vec![None; n];
            for (k, b) in &stage.beams {
                beams[*k] = Some(b.clone());
            }
            model = stage.model;
            field = Some(crate::refinement::field_of(&stage.beams, &w.hn_pos, &w.hn_array, &geom, &powers, &grid));
        }
    }

    // Metrics and invariants.
    let rates = model.rates(&powers);
    let stats = outage_metrics(&rates, cfg.followers.r_threshold);
    let sum_secrecy: f64 = rates.iter().fold(0.0, |a, b| a + b);
    let totals = power_accounting(w.bs_power, &powers, &cfg.power_consts())?;
    let see_val = see(sum_secrecy, totals.slot_power)?;
    let leak: Vec<f64> = model.streams.iter().map(|s| s.legit.jam_power(&powers)).collect();
    let max_leak = leak.iter().copied().fold(0.0, f64::max);
    let mean_leak = if leak.is_empty() { 0.0 } else { leak.iter().sum::<f64>() / leak.len() as f64 };
    let zero = vec![0.0; n];
    let jam_benefit = if rates.is_empty() {
        0.0
    } else {
        (sum_secrecy - model.sum_secrecy(&zero)) / rates.len() as f64
    };
    let hn_sum: f64 = powers.iter().fold(0.0, |a, b| a + b);
    let jam_power: f64 = (0..n).filter(|&u| roles[u] == Role::Jhn).fold(0.0, |a, u| a + powers[u]);

    check(rates.iter().all(|&r| r >= 0.0 && r.is_finite()), slot, || "negative or non-finite secrecy rate".into())?;
    check(
        powers.iter().all(|&p| p >= 0.0 && p <= cfg.hn.p_max_w * (1.0 + 1e-12)),
        slot,
        || "node power outside its box".into(),
    )?;
    check(hn_sum <= cfg.followers.p_fj_max_w * (1.0 + 1e-12), slot, || format!("aggregate jamming {hn_sum} W over budget"))?;
    check(max_leak <= spec.xi_max * (1.0 + 1e-9), slot, || format!("leakage {max_leak} W over the cap {}", spec.xi_max))?;
    check(
        (0..n).all(|u| roles[u] == Role::Jhn || powers[u] == 0.0),
        slot,
        || {
            let u = (0..n).find(|&u| roles[u] == Role::Thn && powers[u] != 0.0).unwrap_or(0);
            format!("receiving node {u} transmits {} W", powers[u])
        },
    )?;

    let kpis = LeaderKpis {
        mean_secrecy: stats.r_mean,
        outage: stats.outage,
        jam_benefit,
        mean_leakage: mean_leak / noise,
    };
    let objective = leader_objective(
        see_val,
        cfg.leader.r_target - stats.r_mean,
        h_post,
        cfg.leader.h_max_bits,
        info_gain,
        &cfg.objective_weights(),
    );
    let leader_residual = if strategy.uses_leader() { residual(&prev_leader, &w.leader) } else { 0.0 };
    let record = SlotRecord {
        slot,
        alpha,
        beta,
        gamma,
        prices,
        sigma_deg: sigma,
        entropy_bits: h_post,
        predicted_entropy_bits: h_pred,
        r_min: stats.r_min,
        r_mean: stats.r_mean,
        outage: stats.outage,
        sum_secrecy,
        see: see_val,
        bs_power_w: w.bs_power,
        bs_power_dbm: watts_to_dbm(w.bs_power),
        hn_power_sum_w: hn_sum,
        jam_power_w: jam_power,
        slot_power_w: totals.slot_power,
        gne_iters,
        gne_gap,
        gne_converged,
        n_thn: roles.iter().filter(|&&r| r == Role::Thn).count(),
        n_jhn: roles.iter().filter(|&&r| r == Role::Jhn).count(),
        refine_iters,
        refine_deltas,
        refine_rejected,
        refine_relaxed,
        dropped_nulls,
        leader_residual,
        secrecy_error,
        objective,
        info_gain,
        jam_benefit,
        mean_leakage_noise: mean_leak / noise,
        max_leakage_w: max_leak,
        served: links.served.clone(),
        rates,
        legit_sinr_db: model.streams.iter().map(|s| 10.0 * s.legit.sinr(&powers).log10()).collect(),
        eve_sinr_db: model.streams.iter().map(|s| 10.0 * s.worst_eve_sinr(&powers).log10()).collect(),
        roles: roles.clone(),
        powers: powers.clone(),
        eve_bearings_deg: eve_bearings,
        posteriors: posteriors.iter().map(|b| b.probs.clone()).collect(),
        field,
        beams: beams.iter().enumerate().filter_map(|(k, b)| b.clone().map(|w| (k, w))).collect(),
    };

    if cfg.bs.power_trim_db > 0.0 && strategy.uses_leader() {
        let step = 10f64.powf(cfg.bs.power_trim_db / 10.0);
        let target = cfg.leader.r_target;
        if stats.r_mean > target + 0.5 {
            w.bs_power = (w.bs_power / step).max(0.5 * cfg.bs.p_init_w);
        } else if stats.r_mean < target {
            w.bs_power = (w.bs_power * step).min(cfg.bs.p_max_w);
        }
    }
    w.kpis = kpis;
    w.info_gain = info_gain;
    w.beliefs = posteriors;
    w.roles = roles;
    w.powers = powers;
    w.beams = beams;
    w.slot += 1;
    Ok(record)
}
