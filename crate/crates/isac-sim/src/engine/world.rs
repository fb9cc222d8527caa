//! Scenario state: node placement, static links, Eve mobility and the
//! state the slot loop carries from one slot to the next.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::config::{Mobility, ScenarioConfig};
use crate::array_geometry::{ula_positions, wavelength, ArraySpec, BeamWeights};
use crate::belief::{uniform_prior, BeliefState};
use crate::channel::{distance3, linear_gain, los_channel, noise_power, path_loss_db, rician_channel, LinkKind, PathLossModel};
use crate::error::Result;
use crate::followers::Role;
use crate::leader::{LeaderKpis, LeaderState};
use crate::refinement::departure_angle;
use crate::rng::{substream, Stream};

/// Annular sector around a ground point, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub center: [f64; 2],
    pub r_min: f64,
    pub r_max: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl Region {
    /// Front half of an annulus (`x >= 0` relative to the center).
    pub fn front(center: [f64; 2], r_min: f64, r_max: f64) -> Self {
        let h = std::f64::consts::FRAC_PI_2;
        Self { center, r_min, r_max, theta_lo: -h, theta_hi: h }
    }

    pub fn full_disc(center: [f64; 2], r_max: f64) -> Self {
        let p = std::f64::consts::PI;
        Self { center, r_min: 0.0, r_max, theta_lo: -p, theta_hi: p }
    }

    /// Area-uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let u: f64 = rng.random();
        let r = (self.r_min.powi(2) + u * (self.r_max.powi(2) - self.r_min.powi(2))).sqrt();
        let t = self.theta_lo + rng.random::<f64>() * (self.theta_hi - self.theta_lo);
        [self.center[0] + r * t.cos(), self.center[1] + r * t.sin()]
    }
}

/// Random-waypoint walker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Walker {
    pub pos: [f64; 2],
    pub waypoint: [f64; 2],
}

impl Walker {
    /// Moves `step` metres toward the waypoint; on arrival the waypoint is
    /// redrawn from `region` with `rng`. Returns whether it arrived.
    pub fn advance<R: Rng + ?Sized>(&mut self, step: f64, region: &Region, rng: &mut R) -> bool {
        let dx = self.waypoint[0] - self.pos[0];
        let dy = self.waypoint[1] - self.pos[1];
        let d = dx.hypot(dy);
        if d <= step {
            self.pos = self.waypoint;
            self.waypoint = region.sample(rng);
            true
        } else {
            self.pos = [self.pos[0] + step * dx / d, self.pos[1] + step * dy / d];
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eve {
    pub walker: Walker,
    pub height: f64,
    /// Standard-normal shadowing draw of the BS link.
    pub shadow: f64,
}

impl Eve {
    pub fn position(&self) -> [f64; 3] {
        [self.walker.pos[0], self.walker.pos[1], self.height]
    }
}

/// Everything that persists across slots of one replication.
#[derive(Debug, Clone)]
pub struct World {
    pub cfg: ScenarioConfig,
    pub seed: u64,
    /// Index of the next slot to run.
    pub slot: usize,
    pub bs_array: ArraySpec,
    pub hn_array: ArraySpec,
    pub bs_elements: Vec<[f64; 3]>,
    pub wavelength: f64,
    pub noise: f64,
    pub path_loss: PathLossModel,
    pub hn_pos: Vec<[f64; 3]>,
    /// Static BS-to-node channels.
    pub hn_channels: Vec<Vec<Complex64>>,
    /// `hn_link[k][u]`: static power gain from node `k` to node `u`, no array pattern.
    pub hn_link: Vec<Vec<f64>>,
    /// `hn_eve_shadow[k][e]`: standard-normal shadowing draw of the node-to-Eve link.
    pub hn_eve_shadow: Vec<Vec<f64>>,
    pub eves: Vec<Eve>,
    pub eve_region: Region,
    pub beliefs: Vec<BeliefState>,
    pub leader: LeaderState,
    pub kpis: LeaderKpis,
    pub info_gain: f64,
    pub bs_power: f64,
    pub roles: Vec<Role>,
    pub served: Vec<usize>,
    pub next_rr: usize,
    pub powers: Vec<f64>,
    pub beams: Vec<Option<BeamWeights>>,
}

const HN_LINK_BASE: u64 = 1 << 20;
const HN_EVE_BASE: u64 = 1 << 40;
const EVE_BASE: u64 = 1 << 32;

fn pair_id(a: usize, b: usize, n: usize) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (lo * n + hi) as u64
}

impl World {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let lambda = wavelength(cfg.radio.carrier_hz);
        let bs_array = ArraySpec::half_wavelength(cfg.bs.antennas, lambda)?;
        let hn_array = ArraySpec::half_wavelength(cfg.hn.array, lambda)?;
        let bs = cfg.bs.position_m;
        let bs_elements: Vec<[f64; 3]> =
            ula_positions(&bs_array).iter().map(|p| [p[0] + bs[0], p[1] + bs[1], p[2] + bs[2]]).collect();
        let noise = noise_power(&cfg.noise_spec())?;
        let path_loss = cfg.path_loss()?;
        let k = cfg.rician_k();
        let center = [bs[0], bs[1]];

        let hn_region = Region::front(center, cfg.hn.min_range_m, cfg.cell_radius_m);
        let n = cfg.hn.count;
        let mut hn_pos = Vec::with_capacity(n);
        let mut hn_channels = Vec::with_capacity(n);
        for u in 0..n {
            let xy = hn_region.sample(&mut substream(seed, Stream::Placement, 0, u as u64));
            let pos = [xy[0], xy[1], cfg.hn.height_m];
            let shadow: f64 = substream(seed, Stream::Shadowing, 0, u as u64).sample(StandardNormal);
            let g = linear_gain(path_loss_db(&path_loss, distance3(&bs, &pos), shadow)?);
            let los = los_channel(&bs_elements, &pos, g, lambda, LinkKind::Hn)?;
            let h = rician_channel(k, &los, &mut substream(seed, Stream::HnNlos, 0, u as u64))?;
            hn_pos.push(pos);
            hn_channels.push(h.coeffs);
        }
        let mut hn_link = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let id = HN_LINK_BASE + pair_id(a, b, n);
                let shadow: f64 = substream(seed, Stream::Shadowing, 0, id).sample(StandardNormal);
                let fade: f64 = substream(seed, Stream::HnFade, 0, id).sample(Exp1);
                let g = linear_gain(path_loss_db(&path_loss, distance3(&hn_pos[a], &hn_pos[b]).max(1e-3), shadow)?);
                hn_link[a][b] = g * g * fade;
            }
        }
        let ne = cfg.eve.count;
        let eve_region = Region::front(center, cfg.eve.min_range_m, cfg.eve.max_range_m);
        let eves = (0..ne)
            .map(|e| {
                let link = EVE_BASE + e as u64;
                let pos = eve_region.sample(&mut substream(seed, Stream::Placement, 0, link));
                let waypoint = eve_region.sample(&mut substream(seed, Stream::Mobility, u64::MAX, e as u64));
                let shadow: f64 = substream(seed, Stream::Shadowing, 0, link).sample(StandardNormal);
                Eve { walker: Walker { pos, waypoint }, height: cfg.eve.height_m, shadow }
            })
            .collect();
        let hn_eve_shadow = (0..n)
            .map(|a| {
                (0..ne)
                    .map(|e| substream(seed, Stream::Shadowing, 0, HN_EVE_BASE + (a * ne + e) as u64).sample(StandardNormal))
                    .collect()
            })
            .collect();
        let beliefs = (0..ne)
            .map(|e| uniform_prior(cfg.belief.grid_size, cfg.belief.sigma0_deg, e))
            .collect::<Result<Vec<_>>>()?;
        let l = &cfg.leader;
        let leader = LeaderState::new(l.alpha0, l.beta0, l.gamma0, cfg.initial_prices(), cfg.belief.sigma0_deg)?;
        Ok(Self {
            cfg: cfg.clone(),
            seed,
            slot: 0,
            bs_array,
            hn_array,
            bs_elements,
            wavelength: lambda,
            noise,
            path_loss,
            hn_pos,
            hn_channels,
            hn_link,
            hn_eve_shadow,
            eves,
            eve_region,
            beliefs,
            leader,
            kpis: LeaderKpis { mean_secrecy: 0.0, outage: 0.0, jam_benefit: 0.0, mean_leakage: 0.0 },
            info_gain: 0.0,
            bs_power: cfg.bs.p_init_w,
            roles: vec![Role::Thn; n],
            served: Vec::new(),
            next_rr: 0,
            powers: vec![0.0; n],
            beams: vec![None; n],
        })
    }

    /// Moves every Eve one slot along its waypoint path.
    pub fn step_eves(&mut self, slot: usize) {
        if self.cfg.eve.mobility == Mobility::Static {
            return;
        }
        let step = self.cfg.eve.speed_mps * self.cfg.slot_duration_s;
        if step <= 0.0 {
            return;
        }
        let region = self.eve_region;
        for (e, eve) in self.eves.iter_mut().enumerate() {
            let mut rng = substream(self.seed, Stream::Mobility, slot as u64, e as u64);
            eve.walker.advance(step, &region, &mut rng);
        }
    }

    pub fn bs_position(&self) -> [f64; 3] {
        self.cfg.bs.position_m
    }

    /// Bearing of `p` seen from the BS array, degrees.
    pub fn bearing_deg(&self, p: [f64; 3]) -> f64 {
        departure_angle(self.bs_position(), p).to_degrees()
    }

    /// Per-slot BS-to-Eve channel: static LOS at the current position plus a
    /// fresh scattered draw.
    pub fn eve_channel(&self, e: usize, slot: usize) -> Result<Vec<Complex64>> {
        let eve = &self.eves[e];
        let pos = eve.position();
        let g = linear_gain(path_loss_db(&self.path_loss, distance3(&self.bs_position(), &pos), eve.shadow)?);
        let los = los_channel(&self.bs_elements, &pos, g, self.wavelength, LinkKind::Eve)?;
        let mut rng = substream(self.seed, Stream::EveNlos, slot as u64, e as u64);
        Ok(crate::channel::eve_channel(self.cfg.rician_k(), &los, slot as u64, &mut rng)?.coeffs)
    }

    /// Power gain from node `k` to Eve `e` this slot, no array pattern.
    pub fn hn_eve_gain(&self, k: usize, e: usize, slot: usize) -> Result<f64> {
        let d = distance3(&self.hn_pos[k], &self.eves[e].position()).max(1e-3);
        let g = linear_gain(path_loss_db(&self.path_loss, d, self.hn_eve_shadow[k][e])?);
        let link = (k * self.eves.len() + e) as u64;
        let fade: f64 = substream(self.seed, Stream::EveFade, slot as u64, link).sample(Exp1);
        Ok(g * g * fade)
    }

    /// Array gain of node `k` toward `target`: `N |wᴴ a|²` with its current
    /// beam, 1 for a single-element (isotropic) transmission.
    pub fn pattern_gain(&self, k: usize, target: [f64; 3], beams: &[Option<BeamWeights>]) -> f64 {
        match &beams[k] {
            None => 1.0,
            Some(w) => {
                let a = crate::array_geometry::steering(&self.hn_array, departure_angle(self.hn_pos[k], target));
                self.hn_array.num_elements as f64 * crate::linalg::vdot(w.as_slice(), &a).norm_sqr()
            }
        }
    }

    /// Keeps scheduled receivers that are still THNs in their stream slots
    /// and fills free RF chains round-robin from the remaining THNs.
    pub fn schedule(&mut self, roles: &[Role]) -> Vec<usize> {
        let cap = self.cfg.bs.rf_chains.min(roles.len());
        let mut slots: Vec<Option<usize>> =
            self.served.iter().map(|&u| (roles[u] == Role::Thn).then_some(u)).collect();
        for i in 0..slots.len() {
            if slots[i].is_none() {
                slots[i] = next_free(&slots, roles, &mut self.next_rr);
            }
        }
        while slots.len() < cap {
            match next_free(&slots, roles, &mut self.next_rr) {
                Some(u) => slots.push(Some(u)),
                None => break,
            }
        }
        self.served = slots.into_iter().flatten().collect();
        self.served.clone()
    }
}

fn next_free(taken: &[Option<usize>], roles: &[Role], rr: &mut usize) -> Option<usize> {
    let n = roles.len();
    let u = (0..n).map(|i| (*rr + i) % n).find(|&u| roles[u] == Role::Thn && !taken.contains(&Some(u)))?;
    *rr = (u + 1) % n;
    Some(u)
}
