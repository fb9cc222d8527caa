//! Hybrid-node game: priced utilities, the shared feasible set, Gauss-Seidel
//! best response on discrete power grids, equilibrium gap diagnostics and the
//! secrecy-threshold role rule.
//!
//! The solver works on any [`FollowerGame`]; [`HnGame`] is the network
//! instance built from a [`SecrecyModel`] that the engine derives per slot.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::leader::Prices;
use crate::link_metrics::secrecy_rate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Transmission (served) hybrid node.
    Thn,
    /// Jamming hybrid node.
    Jhn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub position: [f64; 3],
    pub role: Role,
    pub power: f64,
    pub p_max: f64,
    pub eta: f64,
    pub cost: f64,
}

/// Shared constraints. `xi_max` is in watts at each protected receiver.
#[derive(Debug, Clone)]
pub struct FeasibilitySpec {
    pub p_fj_max: f64,
    pub xi_max: f64,
    /// Optional extra coupling `g(p) <= 0`.
    pub coupling: Option<fn(&[f64]) -> f64>,
}

impl FeasibilitySpec {
    pub fn new(p_fj_max: f64, xi_max: f64) -> Result<Self> {
        if !(p_fj_max > 0.0 && xi_max > 0.0) {
            return Err(SimError::Domain("feasibility caps must be positive".into()));
        }
        Ok(Self { p_fj_max, xi_max, coupling: None })
    }
}

const FEAS_TOL: f64 = 1e-12;

/// Boxes, aggregate budget, per-receiver leakage caps and the coupling hook.
/// `leak_gains[v][k]` is the power gain from node `k` to protected receiver `v`.
pub fn feasible(powers: &[f64], spec: &FeasibilitySpec, p_maxes: &[f64], leak_gains: &[Vec<f64>]) -> bool {
    if powers.len() != p_maxes.len() {
        return false;
    }
    let boxes = powers.iter().zip(p_maxes).all(|(&p, &m)| p >= 0.0 && p <= m * (1.0 + FEAS_TOL));
    let sum: f64 = powers.iter().sum();
    let budget = sum <= spec.p_fj_max * (1.0 + FEAS_TOL);
    let leak = leak_gains.iter().all(|g| weighted_sum(g, powers) <= spec.xi_max * (1.0 + FEAS_TOL));
    let coupled = spec.coupling.is_none_or(|g| g(powers) <= 0.0);
    boxes && budget && leak && coupled
}

pub fn weighted_sum(gains: &[f64], powers: &[f64]) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| g * p).sum()
}

/// Uniform grid of `points` powers on `[0, p_max]`.
pub fn power_grid(p_max: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0];
    }
    (0..points).map(|i| p_max * i as f64 / (points - 1) as f64).collect()
}

/// A finite game on per-player power grids.
pub trait FollowerGame {
    fn num_players(&self) -> usize;
    fn grid(&self, u: usize) -> &[f64];
    fn utility(&self, u: usize, powers: &[f64]) -> f64;
    fn feasible(&self, powers: &[f64]) -> bool;
}

const TIE_EPS: f64 = 1e-12;

/// Best grid response of player `u` with the others held at `powers`.
/// Returns `(power, had_feasible_point)`; with no feasible grid point the
/// answer is zero power.
pub fn best_response<G: FollowerGame + ?Sized>(game: &G, u: usize, powers: &[f64]) -> (f64, bool) {
    let mut trial = powers.to_vec();
    let mut best: Option<(f64, f64)> = None;
    for &p in game.grid(u) {
        trial[u] = p;
        if !game.feasible(&trial) {
            continue;
        }
        let val = game.utility(u, &trial);
        let better = match best {
            None => true,
            Some((_, b)) => val > b + TIE_EPS * b.abs().max(1.0),
        };
        if better {
            best = Some((p, val));
        }
    }
    match best {
        Some((p, _)) => (p, true),
        None => (0.0, false),
    }
}

/// Largest gain any single player gets from a unilateral feasible grid move.
pub fn unilateral_gap<G: FollowerGame + ?Sized>(game: &G, powers: &[f64]) -> f64 {
    let mut gap = 0.0f64;
    let mut trial = powers.to_vec();
    for u in 0..game.num_players() {
        let here = game.utility(u, powers);
        for &p in game.grid(u) {
            trial[u] = p;
            if game.feasible(&trial) {
                gap = gap.max(game.utility(u, &trial) - here);
            }
        }
        trial[u] = powers[u];
    }
    gap
}

#[derive(Debug, Clone, PartialEq)]
pub struct GneOutcome {
    pub powers: Vec<f64>,
    /// Sweeps that moved the profile, at least one.
    pub iterations: usize,
    pub converged: bool,
    /// Unilateral gap after each sweep.
    pub gap_trace: Vec<f64>,
    /// Best responses that found no feasible grid point.
    pub empty_responses: usize,
}

/// Gauss-Seidel best-response sweeps in player order until a sweep moves
/// the profile by at most `tolerance` (Euclidean) or `max_iters` sweeps ran.
pub fn gne_solve<G: FollowerGame + ?Sized>(game: &G, init: &[f64], tolerance: f64, max_iters: usize) -> Result<GneOutcome> {
    if !(tolerance > 0.0) || max_iters == 0 {
        return Err(SimError::Domain("gne needs tolerance > 0 and max_iters >= 1".into()));
    }
    if init.len() != game.num_players() {
        return Err(SimError::Dimension { expected: game.num_players(), got: init.len() });
    }
    let mut p = init.to_vec();
    let mut gap_trace = Vec::new();
    let mut empty = 0;
    let mut moving_sweeps = 0;
    for _ in 0..max_iters {
        let prev = p.clone();
        for u in 0..game.num_players() {
            let (br, ok) = best_response(game, u, &p);
            if !ok {
                empty += 1;
            }
            p[u] = br;
        }
        gap_trace.push(unilateral_gap(game, &p));
        let change = p.iter().zip(&prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if change <= tolerance {
            return Ok(GneOutcome {
                powers: p,
                iterations: moving_sweeps.max(1),
                converged: true,
                gap_trace,
                empty_responses: empty,
            });
        }
        moving_sweeps += 1;
    }
    Ok(GneOutcome { powers: p, iterations: max_iters, converged: false, gap_trace, empty_responses: empty })
}

/// Nodes strictly below the threshold jam; the rest transmit.
pub fn role_switch(rates: &[f64], threshold: f64) -> Vec<Role> {
    rates.iter().map(|&r| if r < threshold { Role::Jhn } else { Role::Thn }).collect()
}

/// One receiver under linear jamming: `SINR = signal / (floor + Σ_k P_k g_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub signal: f64,
    /// Noise plus every non-jammer interference term, watts.
    pub floor: f64,
    /// Effective power gain from each hybrid node.
    pub jam_gains: Vec<f64>,
}

impl Receiver {
    pub fn jam_power(&self, powers: &[f64]) -> f64 {
        weighted_sum(&self.jam_gains, powers)
    }

    pub fn sinr(&self, powers: &[f64]) -> f64 {
        self.signal / (self.floor + self.jam_power(powers))
    }
}

/// A served stream: its legitimate receiver and every eavesdropper's view of it.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLink {
    pub node: usize,
    pub legit: Receiver,
    pub eves: Vec<Receiver>,
}

impl StreamLink {
    pub fn worst_eve_sinr(&self, powers: &[f64]) -> f64 {
        self.eves.iter().map(|e| e.sinr(powers)).fold(0.0, f64::max)
    }

    pub fn secrecy(&self, powers: &[f64]) -> f64 {
        secrecy_rate(self.legit.sinr(powers), self.worst_eve_sinr(powers))
    }
}

/// Per-slot secrecy of the served streams as a function of hybrid-node powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SecrecyModel {
    pub streams: Vec<StreamLink>,
}

impl SecrecyModel {
    pub fn rates(&self, powers: &[f64]) -> Vec<f64> {
        self.streams.iter().map(|s| s.secrecy(powers)).collect()
    }

    pub fn sum_secrecy(&self, powers: &[f64]) -> f64 {
        self.streams.iter().map(|s| s.secrecy(powers)).sum()
    }

    /// Rows of jammer-to-receiver gains, one per served stream.
    pub fn leak_gains(&self) -> Vec<Vec<f64>> {
        self.streams.iter().map(|s| s.legit.jam_gains.clone()).collect()
    }

    /// Interference node `k` delivers to all served receivers.
    pub fn leakage_by(&self, k: usize, powers: &[f64]) -> f64 {
        self.streams.iter().map(|s| s.legit.jam_gains[k] * powers[k]).sum()
    }

    /// Secrecy (bps/Hz) node `k` buys by lowering the worst eavesdropper SINR.
    pub fn jamming_contribution(&self, k: usize, powers: &[f64]) -> f64 {
        let mut without = powers.to_vec();
        without[k] = 0.0;
        self.streams
            .iter()
            .map(|s| ((1.0 + s.worst_eve_sinr(&without)).log2() - (1.0 + s.worst_eve_sinr(powers)).log2()).max(0.0))
            .sum()
    }

    pub fn stream_of(&self, node: usize) -> Option<&StreamLink> {
        self.streams.iter().find(|s| s.node == node)
    }
}

/// Per-node utility terms, kept separate for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityTerms {
    pub secrecy: f64,
    pub cost: f64,
    pub leakage: f64,
    pub jamming: f64,
    pub info: f64,
}

impl UtilityTerms {
    pub fn total(&self, eta: f64, cost: f64, prices: &Prices) -> f64 {
        eta * self.secrecy - cost * self.cost - prices.tau * self.leakage + prices.pi * self.jamming
            + prices.kappa * self.info
    }
}

/// The hybrid-node game for one slot.
#[derive(Debug, Clone)]
pub struct HnGame<'a> {
    pub nodes: &'a [NodeState],
    pub model: &'a SecrecyModel,
    pub spec: &'a FeasibilitySpec,
    pub prices: Prices,
    /// Shared entropy reduction this slot, bits.
    pub info_gain: f64,
    /// Leakage normalizer: utilities see leakage in multiples of this.
    pub leak_unit: f64,
    grids: Vec<Vec<f64>>,
    p_maxes: Vec<f64>,
    leak_gains: Vec<Vec<f64>>,
}

impl<'a> HnGame<'a> {
    pub fn new(
        nodes: &'a [NodeState],
        model: &'a SecrecyModel,
        spec: &'a FeasibilitySpec,
        prices: Prices,
        info_gain: f64,
        leak_unit: f64,
        grid_points: usize,
    ) -> Result<Self> {
        if model.streams.iter().any(|s| s.legit.jam_gains.len() != nodes.len()) {
            return Err(SimError::Dimension {
                expected: nodes.len(),
                got: model.streams.first().map_or(0, |s| s.legit.jam_gains.len()),
            });
        }
        if !(leak_unit > 0.0) {
            return Err(SimError::Domain("leakage unit must be positive".into()));
        }
        Ok(Self {
            nodes,
            model,
            spec,
            prices,
            info_gain,
            leak_unit,
            grids: nodes
                .iter()
                .map(|n| match n.role {
                    Role::Thn => vec![0.0],
                    Role::Jhn => power_grid(n.p_max, grid_points),
                })
                .collect(),
            p_maxes: nodes.iter().map(|n| n.p_max).collect(),
            leak_gains: model.leak_gains(),
        })
    }

    pub fn terms(&self, u: usize, powers: &[f64]) -> UtilityTerms {
        let node = &self.nodes[u];
        let (secrecy, jamming) = match node.role {
            Role::Thn => (self.model.stream_of(node.id).map_or(0.0, |s| s.secrecy(powers)), 0.0),
            Role::Jhn => (0.0, self.model.jamming_contribution(u, powers)),
        };
        UtilityTerms {
            secrecy,
            cost: powers[u],
            leakage: self.model.leakage_by(u, powers) / self.leak_unit,
            jamming,
            info: self.info_gain,
        }
    }

    pub fn p_maxes(&self) -> &[f64] {
        &self.p_maxes
    }
}

impl FollowerGame for HnGame<'_> {
    fn num_players(&self) -> usize {
        self.nodes.len()
    }

    fn grid(&self, u: usize) -> &[f64] {
        &self.grids[u]
    }

    fn utility(&self, u: usize, powers: &[f64]) -> f64 {
        let n = &self.nodes[u];
        self.terms(u, powers).total(n.eta, n.cost, &self.prices)
    }

    fn feasible(&self, powers: &[f64]) -> bool {
        feasible(powers, self.spec, &self.p_maxes, &self.leak_gains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadratic toy game with optional coupling through a shared cap.
    struct Toy {
        grids: Vec<Vec<f64>>,
        peaks: Vec<f64>,
        coupling: f64,
        cap: f64,
    }

    impl FollowerGame for Toy {
        fn num_players(&self) -> usize {
            self.grids.len()
        }
        fn grid(&self, u: usize) -> &[f64] {
            &self.grids[u]
        }
        fn utility(&self, u: usize, p: &[f64]) -> f64 {
            let others: f64 = p.iter().enumerate().filter(|&(k, _)| k != u).map(|(_, x)| x).sum();
            -(p[u] - self.peaks[u]).powi(2) - self.coupling * p[u] * others
        }
        fn feasible(&self, p: &[f64]) -> bool {
            p.iter().sum::<f64>() <= self.cap + 1e-12
        }
    }

    fn toy(n: usize, peaks: &[f64], coupling: f64, cap: f64) -> Toy {
        Toy { grids: vec![power_grid(1.0, 11); n], peaks: peaks.to_vec(), coupling, cap }
    }

    fn node(id: usize, role: Role) -> NodeState {
        NodeState { id, position: [0.0; 3], role, power: 0.0, p_max: 1.5, eta: 1.0, cost: 0.5 }
    }

    #[test]
    fn feasibility_boundaries() {
        let spec = FeasibilitySpec::new(3.0, 1.0).unwrap();
        let pm = [1.5, 1.5];
        assert!(feasible(&[0.0, 0.0], &spec, &pm, &[]));
        assert!(!feasible(&[1.5 + 1e-6, 0.0], &spec, &pm, &[]));
        assert!(feasible(&[1.5, 1.5], &spec, &pm, &[]));
        let tight = FeasibilitySpec::new(2.0, 1.0).unwrap();
        assert!(!feasible(&[1.5, 1.0], &tight, &pm, &[]));
        assert!(feasible(&[1.0, 1.0], &tight, &pm, &[vec![0.5, 0.5]]));
        assert!(!feasible(&[1.0, 1.0], &tight, &pm, &[vec![0.6, 0.5]]));
        let mut hooked = spec.clone();
        hooked.coupling = Some(|p| p[0] - 0.5);
        assert!(!feasible(&[1.0, 0.0], &hooked, &pm, &[]));
        assert!(FeasibilitySpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn best_response_monotone_cases() {
        let dec = toy(1, &[-1.0], 0.0, 10.0);
        assert_eq!(best_response(&dec, 0, &[0.5]), (0.0, true));
        let inc = toy(1, &[5.0], 0.0, 0.65);
        assert_eq!(best_response(&inc, 0, &[0.0]).0, 0.6);
    }

    #[test]
    fn best_response_ties_go_low() {
        let t = toy(1, &[0.45], 0.0, 10.0);
        let (p, _) = best_response(&t, 0, &[0.0]);
        assert!((p - 0.4).abs() < 1e-12);
    }

    #[test]
    fn empty_feasible_set_gives_zero() {
        let t = toy(2, &[0.5, 0.5], 0.0, 0.3);
        assert_eq!(best_response(&t, 0, &[0.0, 0.8]), (0.0, false));
    }

    #[test]
    fn single_and_decoupled_converge_in_one_sweep() {
        let one = toy(1, &[0.3], 0.0, 10.0);
        let out = gne_solve(&one, &[0.0], 1e-3, 50).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!((out.powers[0] - 0.3).abs() < 1e-12);

        let three = toy(3, &[0.2, 0.7, 1.0], 0.0, 10.0);
        let out = gne_solve(&three, &[0.0; 3], 1e-3, 50).unwrap();
        assert_eq!(out.iterations, 1);
        for (p, want) in out.powers.iter().zip([0.2, 0.7, 1.0]) {
            assert!((p - want).abs() < 1e-12);
        }
    }

    #[test]
    fn two_node_best_response_matches_enumeration() {
        let g = toy(2, &[0.8, 0.6], 0.7, 1.2);
        let others = [0.0, 0.4];
        let grid = power_grid(1.0, 11);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &a in &grid {
            for &b in &grid {
                if b != others[1] || a + b > 1.2 + 1e-12 {
                    continue;
                }
                let v = -(a - 0.8f64).powi(2) - 0.7 * a * b;
                if v > best.0 + 1e-12 {
                    best = (v, a);
                }
            }
        }
        assert_eq!(best_response(&g, 0, &others).0, best.1);
    }

    #[test]
    fn coupled_three_node_profile_is_grid_equilibrium() {
        let g = toy(3, &[0.9, 0.8, 0.7], 0.4, 1.5);
        let out = gne_solve(&g, &[0.0; 3], 1e-3, 50).unwrap();
        assert!(out.converged);
        assert!(g.feasible(&out.powers));
        let grid = power_grid(1.0, 11);
        for u in 0..3 {
            let here = g.utility(u, &out.powers);
            for &p in &grid {
                let mut t = out.powers.clone();
                t[u] = p;
                if g.feasible(&t) {
                    assert!(g.utility(u, &t) <= here + 1e-12);
                }
            }
        }
        assert!(*out.gap_trace.last().unwrap() <= 1e-12);
    }

    #[test]
    fn gne_rejects_bad_arguments() {
        let g = toy(1, &[0.3], 0.0, 1.0);
        assert!(gne_solve(&g, &[0.0], 0.0, 5).is_err());
        assert!(gne_solve(&g, &[0.0], 1e-3, 0).is_err());
        assert!(gne_solve(&g, &[0.0, 0.0], 1e-3, 5).is_err());
    }

    #[test]
    fn role_rule_is_strict() {
        assert_eq!(role_switch(&[0.5], 0.5), vec![Role::Thn]);
        assert_eq!(role_switch(&[0.0], 0.5), vec![Role::Jhn]);
        assert_eq!(role_switch(&[1.0, 2.0], 0.5), vec![Role::Thn, Role::Thn]);
    }

    fn two_node_model() -> SecrecyModel {
        // Node 0 is served; node 1 jams the only eavesdropper.
        SecrecyModel {
            streams: vec![StreamLink {
                node: 0,
                legit: Receiver { signal: 10.0, floor: 1.0, jam_gains: vec![0.0, 0.2] },
                eves: vec![Receiver { signal: 8.0, floor: 1.0, jam_gains: vec![0.0, 3.0] }],
            }],
        }
    }

    #[test]
    fn hand_built_utilities() {
        let nodes = [node(0, Role::Thn), node(1, Role::Jhn)];
        let model = two_node_model();
        let spec = FeasibilitySpec::new(3.0, 100.0).unwrap();
        let prices = Prices { pi: 0.7, tau: 0.3, kappa: 0.1 };
        let game = HnGame::new(&nodes, &model, &spec, prices, 0.25, 1.0, 21).unwrap();
        let p = [0.0, 1.0];

        let r_l = (1.0f64 + 10.0 / 1.2).log2();
        let r_e = (1.0f64 + 8.0 / 4.0).log2();
        let u0 = (r_l - r_e) + 0.1 * 0.25;
        assert!((game.utility(0, &p) - u0).abs() < 1e-12);

        let j = (1.0f64 + 8.0).log2() - r_e;
        let u1 = -0.5 * 1.0 - 0.3 * 0.2 + 0.7 * j + 0.1 * 0.25;
        assert!((game.utility(1, &p) - u1).abs() < 1e-12);
    }

    #[test]
    fn zero_power_thn_without_secrecy_scores_zero() {
        let nodes = [node(0, Role::Thn)];
        let model = SecrecyModel::default();
        let spec = FeasibilitySpec::new(3.0, 1.0).unwrap();
        let prices = Prices { pi: 0.7, tau: 0.3, kappa: 0.1 };
        let game = HnGame::new(&nodes, &model, &spec, prices, 0.0, 1.0, 21).unwrap();
        assert_eq!(game.utility(0, &[0.0]), 0.0);
        let (br, _) = best_response(&game, 0, &[0.0]);
        assert_eq!(br, 0.0);
    }

    #[test]
    fn doubling_cost_lowers_utility_by_cost_times_power() {
        let mut nodes = [node(0, Role::Thn), node(1, Role::Jhn)];
        let model = two_node_model();
        let spec = FeasibilitySpec::new(3.0, 100.0).unwrap();
        let prices = Prices { pi: 0.7, tau: 0.3, kappa: 0.1 };
        let p = [0.0, 0.9];
        let before = HnGame::new(&nodes, &model, &spec, prices, 0.0, 1.0, 21).unwrap().utility(1, &p);
        nodes[1].cost *= 2.0;
        let after = HnGame::new(&nodes, &model, &spec, prices, 0.0, 1.0, 21).unwrap().utility(1, &p);
        assert!((before - after - 0.5 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn hn_game_equilibrium_certificate() {
        let nodes = [node(0, Role::Thn), node(1, Role::Jhn)];
        let model = two_node_model();
        let spec = FeasibilitySpec::new(3.0, 0.25).unwrap();
        let prices = Prices { pi: 0.7, tau: 0.3, kappa: 0.1 };
        let game = HnGame::new(&nodes, &model, &spec, prices, 0.0, 1.0, 21).unwrap();
        let out = gne_solve(&game, &[0.0, 0.0], 1e-3, 50).unwrap();
        assert!(game.feasible(&out.powers));
        assert_eq!(out.powers[0], 0.0);
        assert!(out.powers[1] > 0.0 && out.powers[1] * 0.2 <= 0.25 + 1e-12);
        assert!(unilateral_gap(&game, &out.powers) <= 1e-12);
    }
}
