use isac_sim::belief::angle_grid;
use isac_sim::engine::{run_replication, run_simulation, run_slot, run_slot_probed, Mobility, Region, ScenarioConfig, World};
use isac_sim::followers::{FollowerGame, HnGame};
use isac_sim::rng::{substream, Stream};
use isac_sim::{SimError, SlotRecord, StrategyId};

fn short(slots: usize) -> ScenarioConfig {
    ScenarioConfig { slots, ..ScenarioConfig::default() }
}

fn single_eve(mobility: Mobility, speed: f64, slots: usize) -> ScenarioConfig {
    let mut c = short(slots);
    c.eve.count = 1;
    c.eve.mobility = mobility;
    c.eve.speed_mps = speed;
    c
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn check_invariants(cfg: &ScenarioConfig, r: &SlotRecord) {
    assert!((r.alpha + r.beta + r.gamma - 1.0).abs() <= 1e-9, "slot {} simplex", r.slot);
    assert!(r.alpha >= 0.0 && r.beta >= 0.0 && r.gamma >= 0.0);
    assert!(r.powers.iter().all(|&p| (0.0..=cfg.hn.p_max_w * (1.0 + 1e-12)).contains(&p)));
    assert!(r.hn_power_sum_w <= cfg.followers.p_fj_max_w * (1.0 + 1e-12));
    assert!(r.rates.iter().all(|&x| x >= 0.0 && x.is_finite()));
    for p in &r.posteriors {
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
    assert!(r.refine_deltas.iter().all(|&d| d >= 0.0));
}

#[test]
fn one_slot_one_replication() {
    let out = run_simulation(&short(1), StrategyId::Ibeams).unwrap();
    assert_eq!(out.traces.len(), 1);
    assert_eq!(out.traces[0].len(), 1);
    assert_eq!(out.summary.slots, 1);
}

#[test]
fn replications_are_reproducible() {
    let mut cfg = short(8);
    cfg.replications = 3;
    for s in StrategyId::ALL {
        let a = run_simulation(&cfg, s).unwrap();
        let b = run_simulation(&cfg, s).unwrap();
        assert_eq!(a, b, "{s}");
    }
}

#[test]
fn replications_differ_from_each_other() {
    let mut cfg = short(3);
    cfg.replications = 2;
    let out = run_simulation(&cfg, StrategyId::FixedAn).unwrap();
    assert_ne!(out.traces[0][0].rates, out.traces[1][0].rates);
}

#[test]
fn counts_match_config() {
    let mut cfg = short(1);
    cfg.eve.count = 20;
    let w = World::new(&cfg, 7).unwrap();
    assert_eq!(w.hn_pos.len(), 25);
    assert_eq!(w.eves.len(), 20);
    assert_eq!(w.beliefs.len(), 20);
    assert_eq!(w.hn_channels.len(), 25);
    assert!(w.hn_channels.iter().all(|h| h.len() == 128));
}

#[test]
fn same_seed_same_world() {
    let cfg = short(1);
    let a = World::new(&cfg, 11).unwrap();
    let b = World::new(&cfg, 11).unwrap();
    assert_eq!(a.hn_pos, b.hn_pos);
    assert_eq!(a.hn_channels, b.hn_channels);
    assert_eq!(a.eves, b.eves);
}

#[test]
fn zero_radius_is_rejected_with_path() {
    let mut cfg = short(1);
    cfg.cell_radius_m = 0.0;
    match World::new(&cfg, 1) {
        Err(SimError::Config(v)) => assert!(v.iter().any(|m| m.starts_with("cell_radius_m"))),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn placement_stays_in_regions() {
    let cfg = short(1);
    for seed in 0..20 {
        let w = World::new(&cfg, seed).unwrap();
        for p in &w.hn_pos {
            let r = p[0].hypot(p[1]);
            assert!(r >= cfg.hn.min_range_m - 1e-9 && r <= cfg.cell_radius_m + 1e-9);
        }
        for e in &w.eves {
            let r = e.walker.pos[0].hypot(e.walker.pos[1]);
            assert!(r >= cfg.eve.min_range_m - 1e-9 && r <= cfg.eve.max_range_m + 1e-9);
        }
    }
}

#[test]
fn zero_speed_keeps_eves_fixed() {
    let cfg = single_eve(Mobility::Waypoint, 0.0, 1);
    let mut w = World::new(&cfg, 3).unwrap();
    let start = w.eves[0].walker.pos;
    for t in 1..500 {
        w.step_eves(t);
    }
    assert_eq!(w.eves[0].walker.pos, start);
}

#[test]
fn displacement_bounded_by_speed() {
    let mut cfg = single_eve(Mobility::Waypoint, 50.0, 1);
    cfg.eve.count = 3;
    let mut w = World::new(&cfg, 5).unwrap();
    let start: Vec<[f64; 2]> = w.eves.iter().map(|e| e.walker.pos).collect();
    let step = cfg.eve.speed_mps * cfg.slot_duration_s;
    for k in 1..=2000usize {
        w.step_eves(k);
        for (e, s) in w.eves.iter().zip(&start) {
            let d = (e.walker.pos[0] - s[0]).hypot(e.walker.pos[1] - s[1]);
            assert!(d <= k as f64 * step + 1e-9);
            let r = e.walker.pos[0].hypot(e.walker.pos[1]);
            assert!(r <= cfg.eve.max_range_m + 1e-9);
        }
    }
}

#[test]
fn waypoints_cover_the_region_uniformly() {
    // Equal-area rings times equal sectors; chi-square at the 1% level.
    let region = Region::front([0.0, 0.0], 5.0, 20.0);
    let (rings, sectors) = (5usize, 4usize);
    let draws = 10_000;
    let mut counts = vec![0usize; rings * sectors];
    let mut rng = substream(99, Stream::Mobility, 0, 0);
    for _ in 0..draws {
        let p = region.sample(&mut rng);
        let r2 = p[0] * p[0] + p[1] * p[1];
        let frac = (r2 - 25.0) / (400.0 - 25.0);
        let ring = ((frac * rings as f64) as usize).min(rings - 1);
        let t = (p[1].atan2(p[0]) + std::f64::consts::FRAC_PI_2) / std::f64::consts::PI;
        let sector = ((t * sectors as f64) as usize).min(sectors - 1);
        counts[ring * sectors + sector] += 1;
    }
    let expected = draws as f64 / counts.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 19 degrees of freedom.
    assert!(chi2 < 36.19, "chi2 = {chi2}");
}

#[test]
fn every_strategy_keeps_the_invariants() {
    let mut cfg = short(40);
    cfg.eve.mobility = Mobility::Waypoint;
    cfg.eve.speed_mps = 5.0;
    for s in StrategyId::ALL {
        let trace = run_replication(&cfg, s, 21).unwrap();
        assert_eq!(trace.len(), 40);
        for r in &trace {
            check_invariants(&cfg, r);
        }
    }
}

#[test]
fn baseline_and_fixed_split_hold_their_shares() {
    let cfg = short(5);
    for r in run_replication(&cfg, StrategyId::Baseline, 1).unwrap() {
        assert_eq!((r.alpha, r.beta, r.gamma), (1.0, 0.0, 0.0));
        assert_eq!(r.jam_power_w, 0.0);
        assert_eq!(r.n_jhn, 0);
    }
    for r in run_replication(&cfg, StrategyId::FixedAn, 1).unwrap() {
        assert_eq!((r.alpha, r.beta, r.gamma), (0.6, 0.2, 0.2));
        assert_eq!(r.hn_power_sum_w, 0.0);
    }
}

#[test]
fn only_ibeams_refines() {
    let cfg = short(6);
    for s in StrategyId::ALL {
        let trace = run_replication(&cfg, s, 2).unwrap();
        let refined = trace.iter().any(|r| r.refine_iters > 0);
        assert_eq!(refined, s == StrategyId::Ibeams, "{s}");
        if !s.uses_followers() {
            assert!(trace.iter().all(|r| r.n_thn == 25 && r.gne_iters == 0));
        }
    }
}

#[test]
fn bs_power_stays_fixed_by_default() {
    let cfg = short(20);
    for r in run_replication(&cfg, StrategyId::Ibeams, 4).unwrap() {
        assert_eq!(r.bs_power_w, cfg.bs.p_init_w);
    }
}

#[test]
fn static_eve_posterior_contracts() {
    let cfg = single_eve(Mobility::Static, 0.0, 51);
    for seed in [1, 2, 3] {
        let trace = run_replication(&cfg, StrategyId::Ibeams, seed).unwrap();
        let early = median(trace[1..=10].iter().map(|r| r.entropy_bits).collect());
        let late = median(trace[20..=50].iter().map(|r| r.entropy_bits).collect());
        assert!(late < early, "seed {seed}: {late} vs {early}");
        assert!(trace[50].entropy_bits < trace[1].entropy_bits);
    }
}

#[test]
fn static_eve_argmax_settles_near_truth() {
    let cfg = single_eve(Mobility::Static, 0.0, 60);
    let grid: Vec<f64> = angle_grid(cfg.belief.grid_size);
    let trace = run_replication(&cfg, StrategyId::Ibeams, 8).unwrap();
    for r in &trace[16..] {
        let i = isac_sim::belief::argmax(&r.posteriors[0]);
        assert!((grid[i] - r.eve_bearings_deg[0]).abs() <= 10.0, "slot {}", r.slot);
    }
}

#[test]
fn mobile_eve_is_tracked() {
    let cfg = single_eve(Mobility::Waypoint, 1.0, 120);
    let grid: Vec<f64> = angle_grid(cfg.belief.grid_size);
    for seed in [1, 2] {
        let trace = run_replication(&cfg, StrategyId::Ibeams, seed).unwrap();
        let tail = &trace[16..];
        let hits = tail
            .iter()
            .filter(|r| (grid[isac_sim::belief::argmax(&r.posteriors[0])] - r.eve_bearings_deg[0]).abs() <= 10.0)
            .count();
        assert!(hits as f64 >= 0.8 * tail.len() as f64, "seed {seed}: {hits}/{}", tail.len());
    }
}

/// Independent exhaustive scan: no node gains more than `eps` by moving to
/// any other feasible point of its grid.
fn exhaustive_certificate(game: &HnGame<'_>, p: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for u in 0..game.num_players() {
        let base = game.utility(u, p);
        for &q in game.grid(u) {
            let mut trial = p.to_vec();
            trial[u] = q;
            if game.feasible(&trial) {
                worst = worst.max(game.utility(u, &trial) - base);
            }
        }
    }
    worst
}

#[test]
fn follower_profile_is_certified_every_slot() {
    let cfg = short(30);
    let mut w = World::new(&cfg, 1).unwrap();
    let mut gaps = Vec::new();
    for _ in 0..cfg.slots {
        let mut probe = |g: &HnGame<'_>, p: &[f64]| gaps.push(exhaustive_certificate(g, p));
        run_slot_probed(&mut w, StrategyId::Ibeams, Some(&mut probe)).unwrap();
    }
    assert_eq!(gaps.len(), cfg.slots);
    assert!(gaps.iter().all(|&g| g <= 1e-3), "{gaps:?}");
}

#[test]
fn run_slot_advances_the_slot_index() {
    let cfg = short(3);
    let mut w = World::new(&cfg, 1).unwrap();
    for t in 0..3 {
        let r = run_slot(&mut w, StrategyId::StackelbergOnly).unwrap();
        assert_eq!(r.slot, t);
    }
    assert_eq!(w.slot, 3);
}
