//! Scenario configuration with the reference defaults and range checks.

use serde::{Deserialize, Serialize};

use crate::belief::MeasurementModel;
use crate::channel::{NoiseSpec, PathLossModel};
use crate::error::{Result, SimError};
use crate::leader::{Bounds, LeaderGains, ObjectiveWeights, PriceBounds, Prices};
use crate::link_metrics::PowerConsts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub slots: usize,
    pub replications: usize,
    pub cell_radius_m: f64,
    pub slot_duration_s: f64,
    pub radio: RadioConfig,
    pub bs: BsConfig,
    pub hn: HnConfig,
    pub eve: EveConfig,
    pub channel: ChannelConfig,
    pub leader: LeaderConfig,
    pub followers: FollowerConfig,
    pub belief: BeliefConfig,
    pub refinement: RefinementConfig,
    pub gne: GneConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            slots: 200,
            replications: 1,
            cell_radius_m: 150.0,
            slot_duration_s: 0.01,
            radio: RadioConfig::default(),
            bs: BsConfig::default(),
            hn: HnConfig::default(),
            eve: EveConfig::default(),
            channel: ChannelConfig::default(),
            leader: LeaderConfig::default(),
            followers: FollowerConfig::default(),
            belief: BeliefConfig::default(),
            refinement: RefinementConfig::default(),
            gne: GneConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { carrier_hz: 28e9, bandwidth_hz: 100e6, noise_psd_dbm_hz: -174.0, noise_figure_db: 7.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsConfig {
    pub antennas: usize,
    pub position_m: [f64; 3],
    pub p_max_w: f64,
    pub p_init_w: f64,
    pub rf_chains: usize,
    pub p_rf_w: f64,
    pub p_bb_w: f64,
    pub eta_pa: f64,
    /// Scale on the MMSE regularizer of the digital precoder; 0 is zero forcing.
    pub rzf_scale: f64,
    /// Optional per-slot power trim toward a secrecy margin, dB; 0 disables it.
    pub power_trim_db: f64,
    /// Relative Frobenius bound of the transmitter's channel-estimate error.
    pub csi_error: f64,
}

impl Default for BsConfig {
    fn default() -> Self {
        Self {
            antennas: 128,
            position_m: [0.0, 0.0, 10.0],
            p_max_w: 20.0,
            p_init_w: 15.0,
            rf_chains: 8,
            p_rf_w: 0.25,
            p_bb_w: 1.0,
            eta_pa: 0.4,
            rzf_scale: 1.0,
            power_trim_db: 0.0,
            csi_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HnConfig {
    pub count: usize,
    pub array: usize,
    pub p_max_w: f64,
    pub height_m: f64,
    /// Inner radius of the placement annulus; the outer radius is the cell radius.
    pub min_range_m: f64,
    pub eta: f64,
    pub cost_per_w: f64,
}

impl Default for HnConfig {
    fn default() -> Self {
        Self { count: 25, array: 16, p_max_w: 1.5, height_m: 1.5, min_range_m: 40.0, eta: 1.0, cost_per_w: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mobility {
    Static,
    Waypoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EveConfig {
    pub count: usize,
    /// Receive array size; the matched combiner gain equals this count.
    pub array: usize,
    pub height_m: f64,
    pub min_range_m: f64,
    pub max_range_m: f64,
    pub mobility: Mobility,
    pub speed_mps: f64,
    /// Credit eavesdroppers with removing the other data streams.
    pub cancels_streams: bool,
}

impl Default for EveConfig {
    fn default() -> Self {
        Self {
            count: 4,
            array: 16,
            height_m: 1.5,
            min_range_m: 5.0,
            max_range_m: 20.0,
            mobility: Mobility::Static,
            speed_mps: 1.0,
            cancels_streams: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub path_loss_exponent: f64,
    pub shadowing_db: f64,
    pub rician_k_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { path_loss_exponent: 2.2, shadowing_db: 3.0, rician_k_db: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeaderConfig {
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub pi0: f64,
    pub tau0: f64,
    pub kappa0: f64,
    pub pi_bounds: [f64; 2],
    pub tau_bounds: [f64; 2],
    pub kappa_bounds: [f64; 2],
    pub k_s: f64,
    pub k_pi: f64,
    pub k_tau: f64,
    pub k_kappa: f64,
    pub eta_sigma_deg_per_bit: f64,
    pub r_target: f64,
    pub h_max_bits: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Leakage target in multiples of the noise power.
    pub xi_target_noise: f64,
    pub sigma_min_deg: f64,
    pub sigma_max_deg: f64,
    /// Floor on the data share; 0 leaves the AN integrator unclamped.
    pub alpha_min: f64,
    pub lambda_sec: f64,
    pub lambda_h: f64,
    pub lambda_i: f64,
}

impl Default for LeaderConfig {
    fn default() -> Self {
        Self {
            alpha0: 0.6,
            beta0: 0.2,
            gamma0: 0.2,
            pi0: 0.7,
            tau0: 0.3,
            kappa0: 0.1,
            pi_bounds: [0.0, 1.0],
            tau_bounds: [0.0, 1.0],
            kappa_bounds: [0.0, 1.0],
            k_s: 0.05,
            k_pi: 0.05,
            k_tau: 0.05,
            k_kappa: 0.05,
            eta_sigma_deg_per_bit: 0.5,
            r_target: 4.5,
            h_max_bits: 4.0,
            gamma_min: 0.02,
            gamma_max: 0.3,
            xi_target_noise: 10.0,
            sigma_min_deg: 1.0,
            sigma_max_deg: 45.0,
            alpha_min: 0.3,
            lambda_sec: 1.0,
            lambda_h: 1.0,
            lambda_i: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FollowerConfig {
    pub grid_points: usize,
    /// Aggregate friendly-jamming budget, watts.
    pub p_fj_max_w: f64,
    /// Per-receiver leakage cap in multiples of the noise power.
    pub xi_max_noise: f64,
    pub r_threshold: f64,
}

impl Default for FollowerConfig {
    fn default() -> Self {
        Self { grid_points: 21, p_fj_max_w: 2.0, xi_max_noise: 25.0, r_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeliefConfig {
    pub grid_size: usize,
    pub sigma0_deg: f64,
    pub meas_noise_deg: f64,
    pub k_eff: f64,
    pub response_width_deg: f64,
    /// Echo peak over the floor per watt of sensing power.
    pub echo_per_watt: f64,
    pub floor_jitter: f64,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        Self {
            grid_size: 181,
            sigma0_deg: 10.0,
            meas_noise_deg: 5.0,
            k_eff: 1.0,
            response_width_deg: 3.0,
            echo_per_watt: 100.0,
            floor_jitter: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefinementConfig {
    /// Minimum posterior mass of a peak; 0 selects `2 / grid_size`.
    pub peak_threshold: f64,
    pub assoc_width_deg: f64,
    pub j_min_fraction: f64,
    pub max_rounds: usize,
    pub max_iters: usize,
    pub delta_stop: f64,
    /// Keep streams at or above the outage threshold there during refinement.
    pub qos_guard: bool,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            peak_threshold: 0.0,
            assoc_width_deg: 15.0,
            j_min_fraction: 0.1,
            max_rounds: 10,
            max_iters: 10,
            delta_stop: 1e-3,
            qos_guard: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GneConfig {
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for GneConfig {
    fn default() -> Self {
        Self { tolerance: 1e-3, max_iters: 50 }
    }
}

struct Checker(Vec<String>);

impl Checker {
    fn check(&mut self, ok: bool, path: &str, msg: &str) {
        if !ok {
            self.0.push(format!("{path}: {msg}"));
        }
    }

    fn positive(&mut self, v: f64, path: &str) {
        self.check(v.is_finite() && v > 0.0, path, &format!("must be positive and finite, got {v}"));
    }

    fn nonneg(&mut self, v: f64, path: &str) {
        self.check(v.is_finite() && v >= 0.0, path, &format!("must be nonnegative and finite, got {v}"));
    }

    fn unit(&mut self, v: f64, path: &str) {
        self.check((0.0..=1.0).contains(&v), path, &format!("must lie in [0, 1], got {v}"));
    }

    fn finite(&mut self, v: f64, path: &str) {
        self.check(v.is_finite(), path, &format!("must be finite, got {v}"));
    }

    fn count(&mut self, v: usize, min: usize, path: &str) {
        self.check(v >= min, path, &format!("must be at least {min}, got {v}"));
    }

    fn bounds(&mut self, b: [f64; 2], path: &str) {
        self.check(b[0].is_finite() && b[1].is_finite() && b[0] <= b[1], path, "must be finite with min <= max");
    }
}

impl ScenarioConfig {
    /// Every range violation, each prefixed with its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut c = Checker(Vec::new());
        c.count(self.slots, 1, "slots");
        c.count(self.replications, 1, "replications");
        c.positive(self.cell_radius_m, "cell_radius_m");
        c.positive(self.slot_duration_s, "slot_duration_s");

        let r = &self.radio;
        c.positive(r.carrier_hz, "radio.carrier_hz");
        c.positive(r.bandwidth_hz, "radio.bandwidth_hz");
        c.finite(r.noise_psd_dbm_hz, "radio.noise_psd_dbm_hz");
        c.nonneg(r.noise_figure_db, "radio.noise_figure_db");

        let b = &self.bs;
        c.count(b.antennas, 2, "bs.antennas");
        c.check(b.position_m.iter().all(|v| v.is_finite()), "bs.position_m", "must be finite");
        c.positive(b.p_max_w, "bs.p_max_w");
        c.positive(b.p_init_w, "bs.p_init_w");
        c.check(b.p_init_w <= b.p_max_w, "bs.p_init_w", "must not exceed bs.p_max_w");
        c.count(b.rf_chains, 1, "bs.rf_chains");
        c.check(b.rf_chains < b.antennas, "bs.rf_chains", "must be below bs.antennas");
        c.nonneg(b.p_rf_w, "bs.p_rf_w");
        c.nonneg(b.p_bb_w, "bs.p_bb_w");
        c.check(b.eta_pa > 0.0 && b.eta_pa <= 1.0, "bs.eta_pa", &format!("must lie in (0, 1], got {}", b.eta_pa));
        c.nonneg(b.rzf_scale, "bs.rzf_scale");
        c.check((0.0..=3.0).contains(&b.power_trim_db), "bs.power_trim_db", "must lie in [0, 3]");
        c.check((0.0..1.0).contains(&b.csi_error), "bs.csi_error", "must lie in [0, 1)");

        let h = &self.hn;
        c.count(h.count, 1, "hn.count");
        c.count(h.array, 1, "hn.array");
        c.positive(h.p_max_w, "hn.p_max_w");
        c.nonneg(h.height_m, "hn.height_m");
        c.nonneg(h.min_range_m, "hn.min_range_m");
        c.check(h.min_range_m < self.cell_radius_m, "hn.min_range_m", "must be below cell_radius_m");
        c.nonneg(h.eta, "hn.eta");
        c.nonneg(h.cost_per_w, "hn.cost_per_w");

        let e = &self.eve;
        c.count(e.array, 1, "eve.array");
        c.nonneg(e.height_m, "eve.height_m");
        c.nonneg(e.min_range_m, "eve.min_range_m");
        c.positive(e.max_range_m, "eve.max_range_m");
        c.check(e.min_range_m < e.max_range_m, "eve.min_range_m", "must be below eve.max_range_m");
        c.check(e.max_range_m <= self.cell_radius_m, "eve.max_range_m", "must not exceed cell_radius_m");
        c.nonneg(e.speed_mps, "eve.speed_mps");

        let ch = &self.channel;
        c.positive(ch.path_loss_exponent, "channel.path_loss_exponent");
        c.nonneg(ch.shadowing_db, "channel.shadowing_db");
        c.finite(ch.rician_k_db, "channel.rician_k_db");

        let l = &self.leader;
        for (v, p) in [(l.alpha0, "leader.alpha0"), (l.beta0, "leader.beta0"), (l.gamma0, "leader.gamma0")] {
            c.unit(v, p);
        }
        c.check(
            (l.alpha0 + l.beta0 + l.gamma0 - 1.0).abs() <= 1e-9,
            "leader.alpha0",
            "alpha0 + beta0 + gamma0 must equal 1",
        );
        c.bounds(l.pi_bounds, "leader.pi_bounds");
        c.bounds(l.tau_bounds, "leader.tau_bounds");
        c.bounds(l.kappa_bounds, "leader.kappa_bounds");
        c.check(l.pi0 >= l.pi_bounds[0] && l.pi0 <= l.pi_bounds[1], "leader.pi0", "must lie within leader.pi_bounds");
        c.check(l.tau0 >= l.tau_bounds[0] && l.tau0 <= l.tau_bounds[1], "leader.tau0", "must lie within leader.tau_bounds");
        c.check(
            l.kappa0 >= l.kappa_bounds[0] && l.kappa0 <= l.kappa_bounds[1],
            "leader.kappa0",
            "must lie within leader.kappa_bounds",
        );
        for (v, p) in [
            (l.k_s, "leader.k_s"),
            (l.k_pi, "leader.k_pi"),
            (l.k_tau, "leader.k_tau"),
            (l.k_kappa, "leader.k_kappa"),
            (l.eta_sigma_deg_per_bit, "leader.eta_sigma_deg_per_bit"),
            (l.r_target, "leader.r_target"),
            (l.xi_target_noise, "leader.xi_target_noise"),
            (l.lambda_sec, "leader.lambda_sec"),
            (l.lambda_h, "leader.lambda_h"),
            (l.lambda_i, "leader.lambda_i"),
        ] {
            c.nonneg(v, p);
        }
        c.positive(l.h_max_bits, "leader.h_max_bits");
        c.unit(l.gamma_min, "leader.gamma_min");
        c.unit(l.gamma_max, "leader.gamma_max");
        c.check(l.gamma_min <= l.gamma_max, "leader.gamma_min", "must not exceed leader.gamma_max");
        c.positive(l.sigma_min_deg, "leader.sigma_min_deg");
        c.check(l.sigma_min_deg <= l.sigma_max_deg, "leader.sigma_min_deg", "must not exceed leader.sigma_max_deg");
        c.unit(l.alpha_min, "leader.alpha_min");
        c.check(l.alpha_min + l.gamma_max <= 1.0, "leader.alpha_min", "alpha_min + gamma_max must not exceed 1");

        let f = &self.followers;
        c.count(f.grid_points, 2, "followers.grid_points");
        c.positive(f.p_fj_max_w, "followers.p_fj_max_w");
        c.positive(f.xi_max_noise, "followers.xi_max_noise");
        c.nonneg(f.r_threshold, "followers.r_threshold");

        let be = &self.belief;
        c.count(be.grid_size, 2, "belief.grid_size");
        c.positive(be.sigma0_deg, "belief.sigma0_deg");
        c.nonneg(be.meas_noise_deg, "belief.meas_noise_deg");
        c.positive(be.k_eff, "belief.k_eff");
        c.positive(be.response_width_deg, "belief.response_width_deg");
        c.nonneg(be.echo_per_watt, "belief.echo_per_watt");
        c.unit(be.floor_jitter, "belief.floor_jitter");

        let rf = &self.refinement;
        c.unit(rf.peak_threshold, "refinement.peak_threshold");
        c.positive(rf.assoc_width_deg, "refinement.assoc_width_deg");
        c.unit(rf.j_min_fraction, "refinement.j_min_fraction");
        c.count(rf.max_rounds, 1, "refinement.max_rounds");
        c.count(rf.max_iters, 1, "refinement.max_iters");
        c.positive(rf.delta_stop, "refinement.delta_stop");

        let g = &self.gne;
        c.positive(g.tolerance, "gne.tolerance");
        c.count(g.max_iters, 1, "gne.max_iters");
        c.0
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SimError::Config(v))
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            psd_dbm_per_hz: self.radio.noise_psd_dbm_hz,
            bandwidth_hz: self.radio.bandwidth_hz,
            noise_figure_db: self.radio.noise_figure_db,
        }
    }

    pub fn path_loss(&self) -> Result<PathLossModel> {
        PathLossModel::friis(self.radio.carrier_hz, self.channel.path_loss_exponent, self.channel.shadowing_db)
    }

    pub fn rician_k(&self) -> f64 {
        10f64.powf(self.channel.rician_k_db / 10.0)
    }

    pub fn power_consts(&self) -> PowerConsts {
        PowerConsts {
            num_rf: self.bs.rf_chains,
            p_rf: self.bs.p_rf_w,
            p_bb: self.bs.p_bb_w,
            eta_pa: self.bs.eta_pa,
        }
    }

    /// Controller gains; `noise` converts the leakage target to the units the
    /// leader sees (multiples of the noise power).
    pub fn leader_gains(&self) -> LeaderGains {
        let l = &self.leader;
        let b = |v: [f64; 2]| Bounds::new(v[0], v[1]);
        LeaderGains {
            k_s: l.k_s,
            k_pi: l.k_pi,
            k_tau: l.k_tau,
            k_kappa: l.k_kappa,
            eta_sigma: l.eta_sigma_deg_per_bit,
            r_target: l.r_target,
            h_max: l.h_max_bits,
            gamma_min: l.gamma_min,
            gamma_max: l.gamma_max,
            xi_target: l.xi_target_noise,
            sigma_min: l.sigma_min_deg,
            sigma_max: l.sigma_max_deg,
            alpha_min: l.alpha_min,
            price_bounds: PriceBounds { pi: b(l.pi_bounds), tau: b(l.tau_bounds), kappa: b(l.kappa_bounds) },
        }
    }

    pub fn initial_prices(&self) -> Prices {
        Prices { pi: self.leader.pi0, tau: self.leader.tau0, kappa: self.leader.kappa0 }
    }

    pub fn objective_weights(&self) -> ObjectiveWeights {
        ObjectiveWeights { lambda_sec: self.leader.lambda_sec, lambda_h: self.leader.lambda_h, lambda_i: self.leader.lambda_i }
    }

    pub fn measurement_model(&self) -> MeasurementModel {
        MeasurementModel {
            noise_sigma_deg: self.belief.meas_noise_deg,
            response_width_deg: self.belief.response_width_deg,
            echo_per_watt: self.belief.echo_per_watt,
            floor: 1.0,
            floor_jitter: self.belief.floor_jitter,
        }
    }
}
