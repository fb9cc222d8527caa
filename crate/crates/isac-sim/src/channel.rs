//! Large-scale path loss with lognormal shadowing, receiver noise, and
//! near-field Rician channels from the base-station array to nodes.
//!
//! The scattered component is scaled by the same large-scale gain as the
//! line-of-sight part, so the K-factor controls only the power split.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SimError};
use crate::scalar::Real;
use crate::array_geometry::{ArraySpec, SPEED_OF_LIGHT};

/// Log-distance path loss with lognormal shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel<T: Real = f64> {
    pub pl_1m_db: T,
    pub exponent: T,
    pub shadow_sigma_db: T,
}

impl<T: Real> PathLossModel<T> {
    pub fn new(pl_1m_db: T, exponent: T, shadow_sigma_db: T) -> Result<Self> {
        if !(exponent > T::zero()) || !(shadow_sigma_db >= T::zero()) {
            return Err(SimError::Domain("path-loss exponent must be > 0 and shadowing >= 0".into()));
        }
        Ok(Self { pl_1m_db, exponent, shadow_sigma_db })
    }

    /// Model whose 1 m reference loss is free-space loss at `carrier_hz`.
    pub fn friis(carrier_hz: T, exponent: T, shadow_sigma_db: T) -> Result<Self> {
        Self::new(friis_1m_db(carrier_hz), exponent, shadow_sigma_db)
    }
}

/// Receiver noise description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T: Real = f64> {
    pub psd_dbm_per_hz: T,
    pub bandwidth_hz: T,
    pub noise_figure_db: T,
}

/// Free-space loss at 1 m: `20 log10(4 pi / lambda)`.
pub fn friis_1m_db<T: Real>(carrier_hz: T) -> T {
    let lambda = T::lit(SPEED_OF_LIGHT) / carrier_hz;
    T::lit(20.0) * (T::lit(4.0) * T::PI() / lambda).log10()
}

/// Total receiver noise power in watts.
pub fn noise_power<T: Real>(spec: &NoiseSpec<T>) -> Result<T> {
    if !(spec.bandwidth_hz > T::zero()) {
        return Err(SimError::Domain("bandwidth must be positive".into()));
    }
    let dbm = spec.psd_dbm_per_hz + T::lit(10.0) * spec.bandwidth_hz.log10() + spec.noise_figure_db;
    Ok(T::lit(10.0).powf((dbm - T::lit(30.0)) / T::lit(10.0)))
}

/// Path loss in dB. Distances under 1 m are clamped to the 1 m reference.
pub fn path_loss_db<T: Real>(model: &PathLossModel<T>, distance: T, shadow_draw: T) -> Result<T> {
    if !(distance > T::zero()) {
        return Err(SimError::Domain(format!("distance {distance} must be positive")));
    }
    let d = distance.max(T::one());
    Ok(model.pl_1m_db + T::lit(10.0) * model.exponent * d.log10() + model.shadow_sigma_db * shadow_draw)
}

/// Large-scale amplitude gain `10^(-PL/20)`.
pub fn linear_gain<T: Real>(pl_db: T) -> T {
    T::lit(10.0).powf(-pl_db / T::lit(20.0))
}

/// Far-field boundary `2 D^2 / lambda` with `D = (N-1) d`.
pub fn fraunhofer_distance<T: Real>(spec: &ArraySpec<T>) -> T {
    let d = spec.aperture();
    T::lit(2.0) * d * d / spec.wavelength
}

pub fn distance3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Hn,
    Eve,
}

/// Channel from every base-station antenna to one single-stream receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub coeffs: Vec<Complex64>,
    pub kind: LinkKind,
    /// `None` for quasi-static links.
    pub slot: Option<u64>,
    /// Large-scale amplitude gain shared by LOS and scattered parts.
    pub gain: f64,
}

/// Spherical-wave LOS channel: entry `g exp(-j 2 pi d_n / lambda) / sqrt(N)`.
pub fn los_channel(
    bs_positions: &[[f64; 3]],
    node_pos: &[f64; 3],
    gain: f64,
    wavelength: f64,
    kind: LinkKind,
) -> Result<ChannelVector> {
    let amp = gain / (bs_positions.len() as f64).sqrt();
    let coeffs = bs_positions
        .iter()
        .map(|p| {
            let d = distance3(p, node_pos);
            if d <= 1e-12 {
                return Err(SimError::Geometry("node coincides with an antenna element".into()));
            }
            Ok(Complex64::from_polar(amp, -std::f64::consts::TAU * d / wavelength))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector { coeffs, kind, slot: None, gain })
}

/// Rician combination of `los` with a fresh `CN(0, g^2 I / N)` scattered draw.
pub fn rician_channel<R: Rng + ?Sized>(k_factor: f64, los: &ChannelVector, rng: &mut R) -> Result<ChannelVector> {
    if !(k_factor >= 0.0) {
        return Err(SimError::Domain("K-factor must be nonnegative".into()));
    }
    let n = los.coeffs.len() as f64;
    let a_los = if k_factor.is_infinite() { 1.0 } else { (k_factor / (k_factor + 1.0)).sqrt() };
    let a_nlos = if k_factor.is_infinite() { 0.0 } else { (1.0 / (k_factor + 1.0)).sqrt() };
    let s = los.gain / (2.0 * n).sqrt();
    let coeffs = los
        .coeffs
        .iter()
        .map(|h| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h * a_los + Complex64::new(re, im) * (s * a_nlos)
        })
        .collect();
    Ok(ChannelVector { coeffs, kind: los.kind, slot: los.slot, gain: los.gain })
}

/// Per-slot eavesdropper channel: fixed LOS, scattered part redrawn from the
/// slot's own generator.
pub fn eve_channel<R: Rng + ?Sized>(k_factor: f64, los: &ChannelVector, slot: u64, rng: &mut R) -> Result<ChannelVector> {
    let mut h = rician_channel(k_factor, los, rng)?;
    h.kind = LinkKind::Eve;
    h.slot = Some(slot);
    Ok(h)
}
