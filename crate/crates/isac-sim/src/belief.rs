//! Per-eavesdropper angle-of-arrival posterior on a uniform degree grid.
//!
//! Prediction convolves with a Gaussian kernel reflected at the grid edges,
//! so no mass leaks out at +-90 degrees. Updates multiply by a pseudo-
//! likelihood `z^k_eff`; evidence that is zero everywhere leaves the prior
//! untouched.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SimError};
use crate::linalg::check_len;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState<T: Real = f64> {
    pub grid_deg: Vec<T>,
    pub probs: Vec<T>,
    pub kernel_sigma: T,
    pub eve_id: usize,
}

/// Uniform grid of `size` points over [-90, 90] degrees.
pub fn angle_grid<T: Real>(size: usize) -> Vec<T> {
    let step = T::lit(180.0) / T::from_usize(size - 1).unwrap();
    (0..size).map(|i| T::lit(-90.0) + step * T::from_usize(i).unwrap()).collect()
}

/// Flat prior over a `grid_size`-point grid.
pub fn uniform_prior<T: Real>(grid_size: usize, kernel_sigma: T, eve_id: usize) -> Result<BeliefState<T>> {
    if grid_size < 2 {
        return Err(SimError::Domain("belief grid needs at least two points".into()));
    }
    let p = T::one() / T::from_usize(grid_size).unwrap();
    Ok(BeliefState { grid_deg: angle_grid(grid_size), probs: vec![p; grid_size], kernel_sigma, eve_id })
}

fn reflect(mut j: isize, n: isize) -> usize {
    loop {
        if j < 0 {
            j = -j - 1;
        } else if j >= n {
            j = 2 * n - j - 1;
        } else {
            return j as usize;
        }
    }
}

fn normalize<T: Real>(v: &mut [T]) -> T {
    let s = v.iter().fold(T::zero(), |a, &b| a + b);
    if s > T::zero() {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
    s
}

impl<T: Real> BeliefState<T> {
    pub fn grid_step(&self) -> T {
        self.grid_deg[1] - self.grid_deg[0]
    }

    /// Gaussian-smoothed prior for the next slot.
    pub fn predict(&self) -> Self {
        let n = self.probs.len();
        let step = self.grid_step();
        let sigma = self.kernel_sigma.max(T::lit(1e-12));
        let reach = (T::lit(4.0) * sigma / step).ceil().to_usize().unwrap_or(n).clamp(1, 4 * n);
        let two_s2 = T::lit(2.0) * sigma * sigma;
        let mut w: Vec<T> = (0..=2 * reach)
            .map(|i| {
                let off = T::from_usize(i).unwrap() - T::from_usize(reach).unwrap();
                let x = off * step;
                (-(x * x) / two_s2).exp()
            })
            .collect();
        normalize(&mut w);
        let mut out = vec![T::zero(); n];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == T::zero() {
                continue;
            }
            for (k, &wk) in w.iter().enumerate() {
                if wk == T::zero() {
                    continue;
                }
                let j = reflect(i as isize + k as isize - reach as isize, n as isize);
                out[j] += p * wk;
            }
        }
        normalize(&mut out);
        Self { probs: out, ..self.clone() }
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> T {
        entropy(&self.probs)
    }

    /// Posterior `p ∝ prior · z^k_eff`.
    pub fn update(&self, z: &[T], k_eff: T) -> Result<Self> {
        check_len(z, self.probs.len())?;
        if z.iter().any(|&v| v < T::zero() || !v.is_finite()) {
            return Err(SimError::Domain("measurement scan must be finite and nonnegative".into()));
        }
        if !(k_eff > T::zero()) {
            return Err(SimError::Domain("k_eff must be positive".into()));
        }
        let mut post: Vec<T> = self.probs.iter().zip(z).map(|(&p, &zi)| p * zi.powf(k_eff)).collect();
        let mass = normalize(&mut post);
        if !(mass > T::zero()) || !mass.is_finite() {
            return Ok(self.clone());
        }
        Ok(Self { probs: post, ..self.clone() })
    }

    pub fn argmax_index(&self) -> usize {
        argmax(&self.probs)
    }

    pub fn argmax_deg(&self) -> T {
        self.grid_deg[self.argmax_index()]
    }

    pub fn total_mass(&self) -> T {
        self.probs.iter().fold(T::zero(), |a, &b| a + b)
    }
}

pub fn argmax<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn entropy<T: Real>(probs: &[T]) -> T {
    probs
        .iter()
        .filter(|&&p| p > T::zero())
        .fold(T::zero(), |acc, &p| acc - p * p.log2())
}

/// Affine kernel-width law clamped to `[lo, hi]`.
pub fn kernel_adapt<T: Real>(sigma: T, h: T, h_max: T, eta_sigma: T, lo: T, hi: T) -> T {
    (sigma + eta_sigma * (h - h_max)).max(lo).min(hi)
}

/// Parameters of the synthetic sensing scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    /// Standard deviation of the measured bearing around the truth, degrees.
    pub noise_sigma_deg: f64,
    /// Width of the Gaussian angular response, degrees.
    pub response_width_deg: f64,
    /// Echo peak relative to the floor per watt of illuminating sensing power.
    pub echo_per_watt: f64,
    /// Mean noise floor level.
    pub floor: f64,
    /// Relative half-width of the uniform floor jitter, in [0, 1].
    pub floor_jitter: f64,
}

/// Synthetic scan `z(θ)` over `grid_deg`: a Gaussian response around each
/// noisy true bearing, scaled by the sensing power and the beam's
/// illumination of that bearing, on top of a jittered noise floor.
pub fn synthesize_measurement<R: Rng + ?Sized>(
    grid_deg: &[f64],
    true_angles_deg: &[f64],
    illumination: impl Fn(f64) -> f64,
    gamma: f64,
    bs_power: f64,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(gamma >= 0.0) {
        return Err(SimError::Domain("sensing fraction must be nonnegative".into()));
    }
    let mut z: Vec<f64> = grid_deg
        .iter()
        .map(|_| model.floor * (1.0 + model.floor_jitter * (2.0 * rng.random::<f64>() - 1.0)))
        .collect();
    let noise = Normal::new(0.0, model.noise_sigma_deg.max(0.0)).map_err(|e| SimError::Domain(e.to_string()))?;
    let two_w2 = 2.0 * model.response_width_deg.powi(2);
    for &theta in true_angles_deg {
        let measured = theta + noise.sample(rng);
        let amp = model.echo_per_watt * model.floor * gamma * bs_power * illumination(theta);
        for (zi, &g) in z.iter_mut().zip(grid_deg) {
            *zi += amp * (-(g - measured).powi(2) / two_w2).exp();
        }
    }
    for zi in &mut z {
        *zi = zi.max(0.0);
    }
    Ok(z)
}
