use isac_sim::array_geometry::{array_gain, null_steer, steering, ula_positions, wavelength};
use isac_sim::belief::{entropy, uniform_prior};
use isac_sim::channel::{los_channel, path_loss_db, LinkKind};
use isac_sim::followers::{gne_solve, power_grid, role_switch, FollowerGame, Role};
use isac_sim::leader::{leader_step, LeaderKpis};
use isac_sim::link_metrics::{an_projector, secrecy_rate, see};
use isac_sim::{ArraySpec, BeamWeights, LeaderState, PathLossModel, ScenarioConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn spec(n: usize) -> ArraySpec {
    ArraySpec::for_carrier(n, 28e9).unwrap()
}

fn angle() -> impl Strategy<Value = f64> {
    (-89.0f64..89.0).prop_map(f64::to_radians)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct Capped {
    grid: Vec<f64>,
    peaks: Vec<f64>,
    coupling: f64,
    cap: f64,
}

impl FollowerGame for Capped {
    fn num_players(&self) -> usize {
        self.peaks.len()
    }
    fn grid(&self, _: usize) -> &[f64] {
        &self.grid
    }
    fn utility(&self, u: usize, p: &[f64]) -> f64 {
        let others: f64 = p.iter().sum::<f64>() - p[u];
        -(p[u] - self.peaks[u]).powi(2) - self.coupling * p[u] * others
    }
    fn feasible(&self, p: &[f64]) -> bool {
        p.iter().sum::<f64>() <= self.cap + 1e-12
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steered_beams_have_unit_norm_and_bounded_gain(n in 2usize..64, a in angle(), b in angle()) {
        let s = spec(n);
        let w = BeamWeights::from_vec(steering(&s, a)).unwrap();
        let norm: f64 = w.as_slice().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        let g = array_gain(w.as_slice(), &steering(&s, b)).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&g));
        prop_assert!((array_gain(w.as_slice(), &steering(&s, a)).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn steering_is_conjugate_symmetric_about_the_centre(n in 2usize..64, a in angle()) {
        let v = steering(&spec(n), a);
        for i in 0..n {
            prop_assert!((v[i] - v[n - 1 - i].conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn null_steering_is_orthogonal(n in 8usize..64, a in angle(), nulls in prop::collection::vec(angle(), 1..4)) {
        let s = spec(n);
        prop_assume!(nulls.iter().all(|&x| (x - a).abs() > 0.05));
        let w = BeamWeights::from_vec(steering(&s, a)).unwrap();
        let out = null_steer(&w, &nulls, &s).unwrap();
        let norm: f64 = out.as_slice().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        for &t in &nulls {
            prop_assert!(dot(out.as_slice(), &steering(&s, t)).norm() <= 1e-10);
        }
    }

    #[test]
    fn los_norm_equals_large_scale_gain(gain in 1e-6f64..1.0, x in 5.0f64..200.0, y in -100.0f64..100.0) {
        let s = spec(32);
        let h = los_channel(&ula_positions(&s), &[x, y, 1.5], gain, wavelength(28e9), LinkKind::Hn).unwrap();
        let norm = h.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((norm - gain).abs() <= 1e-12 * gain);
    }

    #[test]
    fn path_loss_grows_with_distance(d in 1.0f64..1000.0, step in 1e-3f64..100.0, n in 1.5f64..4.0) {
        let m = PathLossModel::new(61.4, n, 3.0).unwrap();
        prop_assert!(path_loss_db(&m, d + step, 0.0).unwrap() > path_loss_db(&m, d, 0.0).unwrap());
    }

    #[test]
    fn secrecy_is_never_negative(l in 0.0f64..1e4, e in 0.0f64..1e4) {
        let r = secrecy_rate(l, e);
        prop_assert!(r >= 0.0);
        if e >= l {
            prop_assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn see_falls_as_slot_power_grows(r in 0.1f64..50.0, p in 0.1f64..100.0, extra in 1e-3f64..50.0) {
        prop_assert!(see(r, p + extra).unwrap() < see(r, p).unwrap());
    }

    #[test]
    fn an_basis_is_invisible_to_served_receivers(k in 1usize..6, seed in 0u64..1000) {
        let n = 32;
        let s = spec(n);
        let pos = ula_positions(&s);
        let hs: Vec<Vec<Complex64>> = (0..k)
            .map(|i| {
                let t = (seed as f64 * 0.37 + i as f64 * 1.3).sin() * 1.4;
                let at = [40.0 * t.cos(), 40.0 * t.sin(), 1.5 + i as f64];
                los_channel(&pos, &at, 1.0, wavelength(28e9), LinkKind::Hn).unwrap().coeffs
            })
            .collect();
        let refs: Vec<&[Complex64]> = hs.iter().map(Vec::as_slice).collect();
        let basis = an_projector(&refs, n).unwrap();
        prop_assert!(!basis.is_empty());
        for v in &basis {
            let vn: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            for h in &hs {
                prop_assert!(dot(h, v).norm_sqr() <= 1e-8 * vn);
            }
        }
    }

    #[test]
    fn belief_stays_normalized(z in prop::collection::vec(0.0f64..10.0, 181), k in 0.1f64..3.0, sigma in 0.5f64..10.0) {
        let prior = uniform_prior::<f64>(181, sigma, 0).unwrap();
        for b in [prior.predict(), prior.update(&z, k).unwrap(), prior.update(&z, k).unwrap().predict()] {
            prop_assert!((b.total_mass() - 1.0).abs() <= 1e-9);
            let h = b.entropy();
            prop_assert!(h >= -1e-12 && h <= 181f64.log2() + 1e-12);
        }
    }

    #[test]
    fn entropy_is_bounded(raw in prop::collection::vec(0.0f64..1.0, 2..200)) {
        let s: f64 = raw.iter().sum();
        prop_assume!(s > 0.0);
        let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let h = entropy(&p);
        prop_assert!(h >= -1e-12 && h <= (p.len() as f64).log2() + 1e-9);
    }

    #[test]
    fn leader_stays_in_its_boxes(
        kpis in prop::collection::vec((0.0f64..10.0, 0.0f64..1.0, 0.0f64..5.0, 0.0f64..50.0, 0.0f64..7.5), 1..300),
    ) {
        let cfg = ScenarioConfig::default();
        let gains = cfg.leader_gains();
        let l = &cfg.leader;
        let mut st = LeaderState::new(l.alpha0, l.beta0, l.gamma0, cfg.initial_prices(), 5.0).unwrap();
        for (r, out, jam, leak, h) in kpis {
            let k = LeaderKpis { mean_secrecy: r, outage: out, jam_benefit: jam, mean_leakage: leak };
            let (next, bc) = leader_step(&st, &gains, &k, h).unwrap();
            prop_assert!((next.split_sum() - 1.0).abs() <= 1e-9);
            prop_assert!(next.alpha >= 0.0 && next.beta >= 0.0 && next.gamma >= 0.0);
            prop_assert!(gains.price_bounds.contains(&next.prices));
            prop_assert!(next.kernel_sigma >= gains.sigma_min && next.kernel_sigma <= gains.sigma_max);
            prop_assert_eq!(bc.alpha, next.alpha);
            st = next;
        }
    }

    #[test]
    fn sensing_share_rises_with_entropy(h in 0.0f64..7.0, dh in 0.0f64..3.0) {
        let cfg = ScenarioConfig::default();
        let gains = cfg.leader_gains();
        let l = &cfg.leader;
        let st = LeaderState::new(l.alpha0, l.beta0, l.gamma0, cfg.initial_prices(), 5.0).unwrap();
        let k = LeaderKpis { mean_secrecy: 2.0, outage: 0.0, jam_benefit: 0.0, mean_leakage: 1.0 };
        let lo = leader_step(&st, &gains, &k, h).unwrap().0.gamma;
        let hi = leader_step(&st, &gains, &k, h + dh).unwrap().0.gamma;
        prop_assert!(hi >= lo);
    }

    #[test]
    fn gne_profiles_are_feasible_and_repeatable(
        peaks in prop::collection::vec(0.0f64..1.2, 1..4),
        coupling in 0.0f64..0.8,
        cap in 0.3f64..3.0,
    ) {
        let g = Capped { grid: power_grid(1.0, 11), peaks: peaks.clone(), coupling, cap };
        let a = gne_solve(&g, &vec![0.0; peaks.len()], 1e-9, 100).unwrap();
        let b = gne_solve(&g, &vec![0.0; peaks.len()], 1e-9, 100).unwrap();
        prop_assert!(g.feasible(&a.powers));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn role_rule_splits_on_the_threshold(rates in prop::collection::vec(0.0f64..3.0, 0..20), th in 0.0f64..2.0) {
        let roles = role_switch(&rates, th);
        for (r, role) in rates.iter().zip(roles) {
            prop_assert_eq!(role == Role::Thn, *r >= th);
        }
    }
}
