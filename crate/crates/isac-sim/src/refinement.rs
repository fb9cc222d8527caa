//! Cooperative refinement: jammers near posterior peaks form coalitions,
//! each member steers a beam at its coalition's target with nulls toward
//! protected receivers, and member powers are tuned by coordinate ascent on
//! the served sum secrecy under the leakage caps and a posterior-weighted
//! shaping floor.

use crate::array_geometry::{null_steer, sensing_response, steering, ArraySpec, BeamWeights};
use crate::belief::BeliefState;
use crate::error::{Result, SimError};
use crate::followers::{feasible, weighted_sum, FeasibilitySpec, SecrecyModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Coalition {
    /// Node indices of the member jammers.
    pub members: Vec<usize>,
    /// Posterior peak the coalition serves, degrees on the belief grid.
    pub target_deg: f64,
    /// Refined over pre-refinement member sum power, when defined.
    pub scale: Option<f64>,
}

/// A jamming node eligible for a coalition and its bearing from the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerCandidate {
    pub node: usize,
    pub bearing_deg: f64,
}

/// Effective radiated jamming power per grid direction, watts.
#[derive(Debug, Clone, PartialEq)]
pub struct JammingField {
    pub grid_deg: Vec<f64>,
    pub watts: Vec<f64>,
}

impl JammingField {
    pub fn zeros(grid_deg: &[f64]) -> Self {
        Self { grid_deg: grid_deg.to_vec(), watts: vec![0.0; grid_deg.len()] }
    }

    pub fn peak(&self) -> f64 {
        self.watts.iter().copied().fold(0.0, f64::max)
    }
}

/// Elementwise maximum of the per-eavesdropper posteriors.
pub fn combined_posterior(posteriors: &[BeliefState]) -> Vec<f64> {
    let n = posteriors.first().map_or(0, |b| b.probs.len());
    let mut out = vec![0.0f64; n];
    for b in posteriors {
        for (o, &p) in out.iter_mut().zip(&b.probs) {
            *o = o.max(p);
        }
    }
    out
}

/// Mixture of the per-eavesdropper posteriors; a proper distribution.
pub fn mean_posterior(posteriors: &[BeliefState]) -> Vec<f64> {
    let n = posteriors.first().map_or(0, |b| b.probs.len());
    let mut out = vec![0.0; n];
    for b in posteriors {
        for (o, &p) in out.iter_mut().zip(&b.probs) {
            *o += p / posteriors.len() as f64;
        }
    }
    out
}

/// Local maxima above `threshold`, strongest first, with weaker peaks
/// within `separation_deg` of a stronger one suppressed.
pub fn posterior_peaks(grid_deg: &[f64], probs: &[f64], threshold: f64, separation_deg: f64) -> Vec<usize> {
    let n = probs.len();
    let mut cand: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i > 0 { probs[i - 1] } else { f64::NEG_INFINITY };
            let right = if i + 1 < n { probs[i + 1] } else { f64::NEG_INFINITY };
            probs[i] > threshold && probs[i] >= left && probs[i] > right
        })
        .collect();
    cand.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in cand {
        if kept.iter().all(|&k| (grid_deg[k] - grid_deg[i]).abs() > separation_deg) {
            kept.push(i);
        }
    }
    kept
}

/// Groups jammers around the peaks of the combined posterior. Each jammer
/// joins the nearest peak within `assoc_width_deg`; the rest stay unassigned.
pub fn form_coalitions(
    posteriors: &[BeliefState],
    jammers: &[JammerCandidate],
    peak_threshold: f64,
    assoc_width_deg: f64,
) -> Vec<Coalition> {
    if posteriors.is_empty() || jammers.is_empty() {
        return Vec::new();
    }
    let grid = &posteriors[0].grid_deg;
    let combined = combined_posterior(posteriors);
    let peaks = posterior_peaks(grid, &combined, peak_threshold, assoc_width_deg);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); peaks.len()];
    for j in jammers {
        let nearest = peaks
            .iter()
            .enumerate()
            .map(|(c, &i)| (c, (grid[i] - j.bearing_deg).abs()))
            .filter(|&(_, d)| d <= assoc_width_deg)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((c, _)) = nearest {
            members[c].push(j.node);
        }
    }
    peaks
        .iter()
        .zip(members)
        .filter(|(_, m)| !m.is_empty())
        .map(|(&i, m)| Coalition { members: m, target_deg: grid[i], scale: None })
        .collect()
}

/// Interference-temperature sum `Σ_k P_k |h_k→u|²`.
pub fn leakage(gains: &[f64], powers: &[f64]) -> f64 {
    weighted_sum(gains, powers)
}

/// Posterior-weighted jamming energy `Σ_θ p(θ) J(θ)`.
pub fn shaping_energy(field: &JammingField, posterior: &[f64]) -> Result<f64> {
    if field.watts.len() != posterior.len() {
        return Err(SimError::Dimension { expected: field.watts.len(), got: posterior.len() });
    }
    Ok(field.watts.iter().zip(posterior).map(|(j, p)| j * p).sum())
}

/// Maps belief-grid angles to points at a nominal range from the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGeometry {
    pub origin: [f64; 3],
    pub nominal_range: f64,
}

impl FieldGeometry {
    pub fn point(&self, theta_deg: f64) -> [f64; 3] {
        let t = theta_deg.to_radians();
        [
            self.origin[0] + self.nominal_range * t.cos(),
            self.origin[1] + self.nominal_range * t.sin(),
            self.origin[2],
        ]
    }
}

/// Azimuth (radians) of `to` as seen by a y-axis array at `from`.
pub fn departure_angle(from: [f64; 3], to: [f64; 3]) -> f64 {
    let dx = to[0] - from[0];
    let dy = to[1] - from[1];
    let horiz = dx.hypot(dy);
    if horiz <= 0.0 {
        return 0.0;
    }
    (dy / horiz).clamp(-1.0, 1.0).asin()
}

/// Beam from `from` toward `target` with nulls toward the nearest
/// `max_nulls` protected points. When the nulls cannot coexist with the
/// main lobe the farthest null is dropped; returns the number dropped.
pub fn jammer_beam(
    spec: &ArraySpec,
    from: [f64; 3],
    target: [f64; 3],
    protected: &[[f64; 3]],
    max_nulls: usize,
) -> Result<(BeamWeights, usize)> {
    let steer = departure_angle(from, target);
    let a = steering(spec, steer);
    let base = BeamWeights::from_vec(a.clone())?;
    let mut by_dist: Vec<(f64, f64)> = protected
        .iter()
        .map(|&p| (crate::channel::distance3(&from, &p), departure_angle(from, p)))
        .collect();
    by_dist.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut nulls: Vec<f64> = by_dist.iter().take(max_nulls).map(|&(_, t)| t).collect();
    let mut dropped = protected.len().saturating_sub(max_nulls);
    loop {
        match null_steer(&base, &nulls, spec) {
            Ok(w) => return Ok((phase_align(w, &a)?, dropped)),
            Err(SimError::InfeasibleNull) if !nulls.is_empty() => {
                nulls.pop();
                dropped += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Rotates `w` so its response toward `a` is real and positive; members
/// of a coalition then share one phase reference at the target.
fn phase_align(w: BeamWeights, a: &[num_complex::Complex64]) -> Result<BeamWeights> {
    let r = crate::linalg::vdot(w.as_slice(), a);
    if r.norm() == 0.0 {
        return Ok(w);
    }
    let rot = r / r.norm();
    BeamWeights::from_vec(w.into_vec().into_iter().map(|x| x * rot).collect())
}

/// Field `J(θ) = Σ_k P_k g_k(θ)` where `g_k(θ)` is jammer `k`'s array gain
/// toward the grid point at the nominal range.
pub fn field_of(
    beams: &[(usize, BeamWeights)],
    positions: &[[f64; 3]],
    spec: &ArraySpec,
    geom: &FieldGeometry,
    powers: &[f64],
    grid_deg: &[f64],
) -> JammingField {
    let mut field = JammingField::zeros(grid_deg);
    for (k, w) in beams {
        if powers[*k] <= 0.0 {
            continue;
        }
        for (f, &th) in field.watts.iter_mut().zip(grid_deg) {
            *f += powers[*k] * sensing_response(w, spec, departure_angle(positions[*k], geom.point(th)));
        }
    }
    field
}

/// Per-node shaping weights `s_k = Σ_θ p(θ) g_k(θ)`; shaping energy is then `Σ_k P_k s_k`.
pub fn shaping_weights(
    beams: &[(usize, BeamWeights)],
    positions: &[[f64; 3]],
    spec: &ArraySpec,
    geom: &FieldGeometry,
    posterior: &[f64],
    grid_deg: &[f64],
) -> Vec<f64> {
    let mut s = vec![0.0; positions.len()];
    for (k, w) in beams {
        s[*k] = grid_deg
            .iter()
            .zip(posterior)
            .map(|(&th, &p)| p * sensing_response(w, spec, departure_angle(positions[*k], geom.point(th))))
            .sum();
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSynthesis {
    pub beams: Vec<(usize, BeamWeights)>,
    pub dropped_nulls: usize,
}

/// Posterior-aligned beams for every coalition member.
pub fn synthesize_beams(
    coalitions: &[Coalition],
    positions: &[[f64; 3]],
    protected: &[[f64; 3]],
    spec: &ArraySpec,
    geom: &FieldGeometry,
) -> Result<FieldSynthesis> {
    let max_nulls = spec.num_elements.saturating_sub(1);
    let mut beams = Vec::new();
    let mut dropped = 0;
    for c in coalitions {
        let target = geom.point(c.target_deg);
        for &k in &c.members {
            let (w, d) = jammer_beam(spec, positions[k], target, protected, max_nulls)?;
            dropped += d;
            beams.push((k, w));
        }
    }
    Ok(FieldSynthesis { beams, dropped_nulls: dropped })
}

/// Beams and field in one call.
pub fn synthesize_field(
    coalitions: &[Coalition],
    positions: &[[f64; 3]],
    protected: &[[f64; 3]],
    spec: &ArraySpec,
    geom: &FieldGeometry,
    powers: &[f64],
    grid_deg: &[f64],
) -> Result<(FieldSynthesis, JammingField)> {
    let syn = synthesize_beams(coalitions, positions, protected, spec, geom)?;
    let field = field_of(&syn.beams, positions, spec, geom, powers, grid_deg);
    Ok((syn, field))
}

/// Constraint set seen by the coalition optimizer.
#[derive(Debug, Clone)]
pub struct RefineConstraints<'a> {
    pub spec: &'a FeasibilitySpec,
    pub p_maxes: &'a [f64],
    pub grids: &'a [Vec<f64>],
    pub shaping_weights: &'a [f64],
    pub j_min: f64,
    /// Served streams at or above this rate may not be pushed below it.
    pub qos_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionRefinement {
    pub powers: Vec<f64>,
    pub rounds: usize,
    /// The shaping floor was lowered to what the start point achieves.
    pub relaxed: bool,
}

struct Checker<'a> {
    model: &'a SecrecyModel,
    c: &'a RefineConstraints<'a>,
    leak: Vec<Vec<f64>>,
    j_min: f64,
    protected_rates: Vec<Option<f64>>,
}

impl Checker<'_> {
    fn ok(&self, p: &[f64]) -> bool {
        if !feasible(p, self.c.spec, self.c.p_maxes, &self.leak) {
            return false;
        }
        if weighted_sum(self.c.shaping_weights, p) < self.j_min * (1.0 - 1e-12) {
            return false;
        }
        self.protected_rates
            .iter()
            .zip(&self.model.streams)
            .all(|(floor, s)| floor.is_none_or(|f| s.secrecy(p) >= f))
    }
}

/// Joint grid profiles up to this count are searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

/// Maximizes the served sum secrecy over the members' grid powers.
/// Coalitions whose joint grid fits [`EXHAUSTIVE_LIMIT`] are searched
/// exhaustively; larger ones use projected coordinate ascent. Moves must
/// strictly improve the objective; ties keep the current point.
pub fn coalition_refine(
    coalition: &Coalition,
    model: &SecrecyModel,
    powers: &[f64],
    c: &RefineConstraints<'_>,
    max_rounds: usize,
) -> Result<CoalitionRefinement> {
    if coalition.members.is_empty() {
        return Err(SimError::Domain("empty coalition".into()));
    }
    let p = powers.to_vec();
    let start_shaping = weighted_sum(c.shaping_weights, &p);
    let relaxed = start_shaping < c.j_min;
    let j_min = if relaxed { start_shaping } else { c.j_min };
    let protected_rates = match c.qos_floor {
        Some(f) => model.streams.iter().map(|s| (s.secrecy(&p) >= f).then_some(f)).collect(),
        None => vec![None; model.streams.len()],
    };
    let chk = Checker { model, c, leak: model.leak_gains(), j_min, protected_rates };
    let joint = coalition
        .members
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(c.grids[k].len()).filter(|&n| n <= EXHAUSTIVE_LIMIT));
    let (powers, rounds) = match joint {
        Some(_) => (exhaustive(&coalition.members, model, p, c, &chk), 1),
        None => coordinate_ascent(&coalition.members, model, p, c, &chk, max_rounds),
    };
    Ok(CoalitionRefinement { powers, rounds, relaxed })
}

fn improves(val: f64, best: f64) -> bool {
    val > best + 1e-12 * best.abs().max(1.0)
}

fn exhaustive(members: &[usize], model: &SecrecyModel, mut p: Vec<f64>, c: &RefineConstraints<'_>, chk: &Checker<'_>) -> Vec<f64> {
    let mut best = (p.clone(), model.sum_secrecy(&p));
    let mut idx = vec![0usize; members.len()];
    'outer: loop {
        for (&k, &i) in members.iter().zip(&idx) {
            p[k] = c.grids[k][i];
        }
        if chk.ok(&p) {
            let val = model.sum_secrecy(&p);
            if improves(val, best.1) {
                best = (p.clone(), val);
            }
        }
        for (d, &k) in members.iter().enumerate() {
            idx[d] += 1;
            if idx[d] < c.grids[k].len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    best.0
}

fn coordinate_ascent(
    members: &[usize],
    model: &SecrecyModel,
    mut p: Vec<f64>,
    c: &RefineConstraints<'_>,
    chk: &Checker<'_>,
    max_rounds: usize,
) -> (Vec<f64>, usize) {
    let mut current = model.sum_secrecy(&p);
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let mut moved = false;
        for &k in members {
            let keep = p[k];
            let mut best = (keep, current);
            for &cand in &c.grids[k] {
                if cand == keep {
                    continue;
                }
                p[k] = cand;
                if !chk.ok(&p) {
                    continue;
                }
                let val = model.sum_secrecy(&p);
                if improves(val, best.1) {
                    best = (cand, val);
                }
            }
            p[k] = best.0;
            if best.0 != keep {
                moved = true;
                current = best.1;
            }
        }
        if !moved {
            break;
        }
    }
    (p, rounds)
}

/// Steps the largest leakage contributors down their grids until the
/// profile satisfies the box, budget and leakage constraints.
pub fn restore_feasibility(
    powers: &mut [f64],
    model: &SecrecyModel,
    spec: &FeasibilitySpec,
    p_maxes: &[f64],
    grids: &[Vec<f64>],
) -> usize {
    let leak = model.leak_gains();
    let mut steps = 0;
    while !feasible(powers, spec, p_maxes, &leak) {
        let worst = (0..powers.len())
            .filter(|&k| powers[k] > 0.0)
            .max_by(|&a, &b| model.leakage_by(a, powers).total_cmp(&model.leakage_by(b, powers)).then(b.cmp(&a)));
        let Some(k) = worst else { break };
        powers[k] = grids[k].iter().copied().filter(|&g| g < powers[k]).fold(0.0, f64::max);
        steps += 1;
    }
    steps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub peak_threshold: f64,
    pub assoc_width_deg: f64,
    /// Shaping floor as a fraction of the shaping energy at entry.
    pub j_min_fraction: f64,
    pub max_rounds: usize,
    pub max_iters: usize,
    pub delta_stop: f64,
    pub qos_floor: Option<f64>,
}

/// Model and beams the engine derives for a coalition layout.
#[derive(Debug, Clone)]
pub struct Stage {
    pub model: SecrecyModel,
    pub shaping_weights: Vec<f64>,
    pub beams: Vec<(usize, BeamWeights)>,
    pub dropped_nulls: usize,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub powers: Vec<f64>,
    pub coalitions: Vec<Coalition>,
    /// Accepted stage, `None` when the entry state was kept.
    pub stage: Option<Stage>,
    pub iterations: usize,
    /// Sum-secrecy gain of each accepted iteration.
    pub deltas: Vec<f64>,
    pub sum_before: f64,
    pub sum_after: f64,
    pub relaxed: bool,
    pub rejected: bool,
}

/// Coalition formation, beam synthesis and power refinement repeated until
/// an accepted iteration gains less than `delta_stop`. An iteration that
/// lowers the sum secrecy, or with a QoS floor pushes a stream that cleared
/// it at entry below it, is rejected and ends the loop.
pub fn refinement_loop<F>(
    posteriors: &[BeliefState],
    jammers: &[JammerCandidate],
    entry_model: &SecrecyModel,
    entry_powers: &[f64],
    spec: &FeasibilitySpec,
    p_maxes: &[f64],
    grids: &[Vec<f64>],
    cfg: &RefineConfig,
    mut rebuild: F,
) -> Result<RefineOutcome>
where
    F: FnMut(&[Coalition]) -> Result<Stage>,
{
    if !(cfg.delta_stop > 0.0) {
        return Err(SimError::Domain("delta_stop must be positive".into()));
    }
    let sum_before = entry_model.sum_secrecy(entry_powers);
    let entry_rates = entry_model.rates(entry_powers);
    let mut out = RefineOutcome {
        powers: entry_powers.to_vec(),
        coalitions: Vec::new(),
        stage: None,
        iterations: 0,
        deltas: Vec::new(),
        sum_before,
        sum_after: sum_before,
        relaxed: false,
        rejected: false,
    };
    let mut coalitions = form_coalitions(posteriors, jammers, cfg.peak_threshold, cfg.assoc_width_deg);
    if coalitions.is_empty() {
        out.iterations = 1;
        return Ok(out);
    }
    for _ in 0..cfg.max_iters.max(1) {
        out.iterations += 1;
        let stage = rebuild(&coalitions)?;
        let mut p = out.powers.clone();
        restore_feasibility(&mut p, &stage.model, spec, p_maxes, grids);
        let before: Vec<f64> = coalitions.iter().map(|c| c.members.iter().map(|&k| p[k]).sum()).collect();
        let j_min = cfg.j_min_fraction * weighted_sum(&stage.shaping_weights, &p);
        let cons = RefineConstraints {
            spec,
            p_maxes,
            grids,
            shaping_weights: &stage.shaping_weights,
            j_min,
            qos_floor: cfg.qos_floor,
        };
        let mut relaxed = false;
        for c in &coalitions {
            let r = coalition_refine(c, &stage.model, &p, &cons, cfg.max_rounds)?;
            relaxed |= r.relaxed;
            p = r.powers;
        }
        let sum = stage.model.sum_secrecy(&p);
        let delta = sum - out.sum_after;
        let floor_broken = cfg.qos_floor.is_some_and(|f| {
            entry_rates.iter().zip(stage.model.rates(&p)).any(|(&r0, r)| r0 >= f && r < f)
        });
        if delta < -1e-12 || floor_broken {
            out.rejected = true;
            break;
        }
        for (c, b) in coalitions.iter_mut().zip(before) {
            let after: f64 = c.members.iter().map(|&k| p[k]).sum();
            c.scale = (b > 0.0).then(|| after / b);
        }
        out.powers = p;
        out.sum_after = sum;
        out.deltas.push(delta.max(0.0));
        out.relaxed |= relaxed;
        out.stage = Some(stage);
        if delta < cfg.delta_stop {
            break;
        }
    }
    out.coalitions = coalitions;
    Ok(out)
}
