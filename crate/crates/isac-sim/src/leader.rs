//! Base-station controller: entropy-driven sensing share, a secrecy-deficit
//! integrator for the artificial-noise share, clipped affine price updates
//! and kernel-width adaptation.

use crate::belief::kernel_adapt;
use crate::error::{Result, SimError};
use crate::scalar::Real;

fn clamp<T: Real>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T: Real = f64> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Bounds<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn clamp(&self, x: T) -> T {
        clamp(x, self.lo, self.hi)
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Jamming reward, leakage penalty and information reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prices<T: Real = f64> {
    pub pi: T,
    pub tau: T,
    pub kappa: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBounds<T: Real = f64> {
    pub pi: Bounds<T>,
    pub tau: Bounds<T>,
    pub kappa: Bounds<T>,
}

impl<T: Real> PriceBounds<T> {
    pub fn unit() -> Self {
        let b = Bounds::new(T::zero(), T::one());
        Self { pi: b, tau: b, kappa: b }
    }

    pub fn contains(&self, p: &Prices<T>) -> bool {
        self.pi.contains(p.pi) && self.tau.contains(p.tau) && self.kappa.contains(p.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderGains<T: Real = f64> {
    pub k_s: T,
    pub k_pi: T,
    pub k_tau: T,
    pub k_kappa: T,
    /// Kernel-width step, degrees per bit.
    pub eta_sigma: T,
    pub r_target: T,
    pub h_max: T,
    pub gamma_min: T,
    pub gamma_max: T,
    pub xi_target: T,
    pub sigma_min: T,
    pub sigma_max: T,
    /// Lower limit kept on the data share when the AN share integrates up.
    pub alpha_min: T,
    pub price_bounds: PriceBounds<T>,
}

impl<T: Real> LeaderGains<T> {
    pub fn validate(&self) -> Result<()> {
        let steps = [self.k_s, self.k_pi, self.k_tau, self.k_kappa, self.eta_sigma];
        if steps.iter().any(|&k| !(k > T::zero())) {
            return Err(SimError::Domain("leader step sizes must be positive".into()));
        }
        if !(self.gamma_min >= T::zero() && self.gamma_min < self.gamma_max && self.gamma_max <= T::one()) {
            return Err(SimError::Domain("need 0 <= gamma_min < gamma_max <= 1".into()));
        }
        if !(self.alpha_min >= T::zero() && self.alpha_min + self.gamma_max <= T::one()) {
            return Err(SimError::Domain("alpha_min + gamma_max must not exceed 1".into()));
        }
        if !(self.h_max > T::zero()) {
            return Err(SimError::Domain("h_max must be positive".into()));
        }
        if !(self.sigma_min > T::zero() && self.sigma_min <= self.sigma_max) {
            return Err(SimError::Domain("need 0 < sigma_min <= sigma_max".into()));
        }
        for b in [self.price_bounds.pi, self.price_bounds.tau, self.price_bounds.kappa] {
            if !(b.lo <= b.hi) {
                return Err(SimError::Domain("price bounds must satisfy min <= max".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderState<T: Real = f64> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub prices: Prices<T>,
    pub kernel_sigma: T,
    pub prev_secrecy: T,
    pub prev_outage: T,
}

impl<T: Real> LeaderState<T> {
    pub fn new(alpha: T, beta: T, gamma: T, prices: Prices<T>, kernel_sigma: T) -> Result<Self> {
        let s = alpha + beta + gamma;
        if alpha < T::zero() || beta < T::zero() || gamma < T::zero() || (s - T::one()).abs() > T::lit(1e-9) {
            return Err(SimError::InfeasibleSplit((s - T::one()).to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { alpha, beta, gamma, prices, kernel_sigma, prev_secrecy: T::zero(), prev_outage: T::zero() })
    }

    pub fn split_sum(&self) -> T {
        self.alpha + self.beta + self.gamma
    }
}

/// Previous-slot measurements the controller reacts to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderKpis<T: Real = f64> {
    pub mean_secrecy: T,
    pub outage: T,
    pub jam_benefit: T,
    pub mean_leakage: T,
}

/// What the followers see for the coming slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Broadcast<T: Real = f64> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub prices: Prices<T>,
    pub entropy: T,
    pub secrecy_error: T,
}

/// Affine entropy-to-sensing map from `gamma_min` at zero to `gamma_max` at `h_max`.
pub fn sensing_fraction<T: Real>(h: T, gains: &LeaderGains<T>) -> T {
    let r = clamp(h / gains.h_max, T::zero(), T::one());
    gains.gamma_min + (gains.gamma_max - gains.gamma_min) * r
}

/// AN-share integrator clamped to `[0, 1 - gamma - alpha_min]`.
pub fn an_update<T: Real>(beta_prev: T, secrecy_error: T, gamma: T, gains: &LeaderGains<T>) -> T {
    let hi = (T::one() - gamma - gains.alpha_min).max(T::zero());
    clamp(beta_prev + gains.k_s * secrecy_error, T::zero(), hi)
}

pub fn data_fraction<T: Real>(beta: T, gamma: T) -> Result<T> {
    let a = T::one() - beta - gamma;
    if a < -T::lit(1e-12) {
        return Err(SimError::InfeasibleSplit((beta + gamma).to_f64().unwrap_or(f64::NAN)));
    }
    Ok(a.max(T::zero()))
}

pub fn price_update<T: Real>(prices: Prices<T>, kpis: &LeaderKpis<T>, entropy: T, gains: &LeaderGains<T>) -> Prices<T> {
    let b = &gains.price_bounds;
    Prices {
        pi: b.pi.clamp(prices.pi + gains.k_pi * kpis.jam_benefit),
        tau: b.tau.clamp(prices.tau + gains.k_tau * (kpis.mean_leakage - gains.xi_target)),
        kappa: b.kappa.clamp(prices.kappa + gains.k_kappa * (entropy - gains.h_max)),
    }
}

/// One controller update from last slot's KPIs and the predicted entropy.
pub fn leader_step<T: Real>(
    state: &LeaderState<T>,
    gains: &LeaderGains<T>,
    kpis: &LeaderKpis<T>,
    entropy: T,
) -> Result<(LeaderState<T>, Broadcast<T>)> {
    if !(entropy >= T::zero()) {
        return Err(SimError::Domain("entropy must be nonnegative".into()));
    }
    let gamma = sensing_fraction(entropy, gains);
    let e = gains.r_target - kpis.mean_secrecy;
    let beta = an_update(state.beta, e, gamma, gains);
    let alpha = data_fraction(beta, gamma)?;
    let prices = price_update(state.prices, kpis, entropy, gains);
    let kernel_sigma =
        kernel_adapt(state.kernel_sigma, entropy, gains.h_max, gains.eta_sigma, gains.sigma_min, gains.sigma_max);
    let next = LeaderState {
        alpha,
        beta,
        gamma,
        prices,
        kernel_sigma,
        prev_secrecy: kpis.mean_secrecy,
        prev_outage: kpis.outage,
    };
    let bc = Broadcast { alpha, beta, gamma, prices, entropy, secrecy_error: e };
    Ok((next, bc))
}

/// Euclidean size of the change in `(α, β, γ, π, τ, κ)`.
pub fn residual<T: Real>(prev: &LeaderState<T>, next: &LeaderState<T>) -> T {
    let d = [
        next.alpha - prev.alpha,
        next.beta - prev.beta,
        next.gamma - prev.gamma,
        next.prices.pi - prev.prices.pi,
        next.prices.tau - prev.prices.tau,
        next.prices.kappa - prev.prices.kappa,
    ];
    d.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights<T: Real = f64> {
    pub lambda_sec: T,
    pub lambda_h: T,
    pub lambda_i: T,
}

/// Logged slot objective: SEE minus hinge penalties plus an information bonus.
pub fn leader_objective<T: Real>(
    see: T,
    secrecy_deficit: T,
    entropy: T,
    h_star: T,
    info_gain: T,
    w: &ObjectiveWeights<T>,
) -> T {
    see - w.lambda_sec * secrecy_deficit.max(T::zero()) - w.lambda_h * (entropy - h_star).max(T::zero())
        + w.lambda_i * info_gain
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains() -> LeaderGains<f64> {
        LeaderGains {
            k_s: 0.05,
            k_pi: 0.05,
            k_tau: 0.05,
            k_kappa: 0.05,
            eta_sigma: 0.5,
            r_target: 4.5,
            h_max: 4.0,
            gamma_min: 0.02,
            gamma_max: 0.3,
            xi_target: 10.0,
            sigma_min: 1.0,
            sigma_max: 45.0,
            alpha_min: 0.0,
            price_bounds: PriceBounds::unit(),
        }
    }

    fn table_prices() -> Prices<f64> {
        Prices { pi: 0.7, tau: 0.3, kappa: 0.1 }
    }

    #[test]
    fn sensing_fraction_endpoints() {
        let g = gains();
        assert_eq!(sensing_fraction(0.0, &g), 0.02);
        assert!((sensing_fraction(4.0, &g) - 0.3).abs() < 1e-15);
        assert!((sensing_fraction(2.0, &g) - 0.16).abs() < 1e-15);
        assert!((sensing_fraction(9.0, &g) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn an_update_values() {
        let g = gains();
        assert_eq!(an_update(0.2, 0.0, 0.2, &g), 0.2);
        assert!((an_update(0.2, -1.0, 0.2, &g) - 0.15).abs() < 1e-15);
        assert!((an_update(0.2, 100.0, 0.2, &g) - 0.8).abs() < 1e-15);
        assert_eq!(an_update(0.01, -1.0, 0.2, &g), 0.0);
        let floored = LeaderGains { alpha_min: 0.3, ..g };
        assert!((an_update(0.2, 100.0, 0.2, &floored) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn data_fraction_values() {
        assert!((data_fraction::<f64>(0.2, 0.2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(data_fraction(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(data_fraction(0.5, 0.5).unwrap(), 0.0);
        assert!(matches!(data_fraction(0.7, 0.5), Err(SimError::InfeasibleSplit(_))));
    }

    #[test]
    fn price_update_values() {
        let g = gains();
        let k = LeaderKpis { mean_secrecy: 4.5, outage: 0.0, jam_benefit: 0.0, mean_leakage: 10.0 };
        assert_eq!(price_update(table_prices(), &k, 4.0, &g), table_prices());

        let top = Prices { pi: 1.0, ..table_prices() };
        let k2 = LeaderKpis { jam_benefit: 3.0, ..k };
        assert_eq!(price_update(top, &k2, 4.0, &g).pi, 1.0);

        let g2 = LeaderGains { k_tau: 0.1, ..g };
        let k3 = LeaderKpis { mean_leakage: 9.0, ..k };
        assert!((price_update(table_prices(), &k3, 4.0, &g2).tau - 0.2).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_at_targets() {
        let g = gains();
        let s = LeaderState::new(0.5, 0.2, 0.3, table_prices(), 10.0).unwrap();
        let k = LeaderKpis { mean_secrecy: 4.5, outage: 0.0, jam_benefit: 0.0, mean_leakage: 10.0 };
        let (n, bc) = leader_step(&s, &g, &k, 4.0).unwrap();
        assert_eq!(n.beta, s.beta);
        assert_eq!(n.prices, s.prices);
        assert_eq!(n.kernel_sigma, s.kernel_sigma);
        assert!((n.gamma - 0.3).abs() < 1e-15);
        assert_eq!(bc.secrecy_error, 0.0);
        assert!(residual(&s, &n) < 1e-12);
    }

    #[test]
    fn deficit_raises_beta_until_clamp() {
        let g = gains();
        let mut s = LeaderState::new(0.6, 0.2, 0.2, table_prices(), 10.0).unwrap();
        let k = LeaderKpis { mean_secrecy: 1.0, outage: 0.5, jam_benefit: 0.0, mean_leakage: 10.0 };
        for _ in 0..10 {
            let (n, _) = leader_step(&s, &g, &k, 3.0).unwrap();
            assert!(n.beta >= s.beta);
            assert!((n.split_sum() - 1.0).abs() < 1e-9);
            s = n;
        }
        assert!((s.beta + s.gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn leader_objective_values() {
        let w = ObjectiveWeights { lambda_sec: 1.0, lambda_h: 0.0, lambda_i: 0.0 };
        assert!((leader_objective::<f64>(0.5, 0.2, 3.0, 4.0, 0.0, &w) - 0.3).abs() < 1e-15);
        let w1 = ObjectiveWeights { lambda_sec: 1.0, lambda_h: 1.0, lambda_i: 1.0 };
        assert_eq!(leader_objective(0.5, -1.0, 4.0, 4.0, 0.0, &w1), 0.5);
    }

    #[test]
    fn bad_split_rejected() {
        assert!(LeaderState::new(0.5, 0.5, 0.5, table_prices(), 10.0).is_err());
        assert!(gains().validate().is_ok());
        assert!(LeaderGains { k_s: 0.0, ..gains() }.validate().is_err());
    }
}
