//! Uniform linear arrays on the y-axis: element positions, steering vectors,
//! array gains, Hamming-tapered sensing beams and null steering.
//!
//! The taper blend is read as a convex combination of a uniform and a
//! unit-mean Hamming amplitude profile, so the taper changes the beam shape
//! and not the radiated power.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::linalg::{self, CVec};
use crate::scalar::Real;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Geometry of a uniform linear array lying along the y-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec<T: Real = f64> {
    pub num_elements: usize,
    pub spacing: T,
    pub wavelength: T,
}

impl<T: Real> ArraySpec<T> {
    /// Half-wavelength array.
    pub fn half_wavelength(num_elements: usize, wavelength: T) -> Result<Self> {
        Self::new(num_elements, wavelength / T::lit(2.0), wavelength)
    }

    pub fn new(num_elements: usize, spacing: T, wavelength: T) -> Result<Self> {
        if num_elements == 0 {
            return Err(SimError::Domain("array needs at least one element".into()));
        }
        if !(wavelength > T::zero()) || !(spacing > T::zero()) {
            return Err(SimError::Domain("wavelength and spacing must be positive".into()));
        }
        Ok(Self { num_elements, spacing, wavelength })
    }

    /// Half-wavelength array for a carrier frequency in Hz.
    pub fn for_carrier(num_elements: usize, carrier_hz: T) -> Result<Self> {
        Self::half_wavelength(num_elements, wavelength(carrier_hz))
    }

    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }

    /// Aperture length `(N-1) d`.
    pub fn aperture(&self) -> T {
        T::from_usize(self.num_elements - 1).unwrap() * self.spacing
    }

    /// Signed element index offset from the array centre.
    pub fn element_offset(&self, n: usize) -> T {
        T::from_usize(n).unwrap() - T::from_usize(self.num_elements - 1).unwrap() / T::lit(2.0)
    }
}

pub fn wavelength<T: Real>(carrier_hz: T) -> T {
    T::lit(SPEED_OF_LIGHT) / carrier_hz
}

/// Unit-norm complex beamforming weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights<T: Real = f64> {
    weights: CVec<T>,
}

impl<T: Real> BeamWeights<T> {
    /// Normalizes `weights` to unit norm; fails for the zero vector.
    pub fn from_vec(weights: CVec<T>) -> Result<Self> {
        let weights = linalg::normalized(&weights)
            .ok_or_else(|| SimError::Domain("cannot normalize a zero beam".into()))?;
        Ok(Self { weights })
    }

    /// Single active element: the same gain `1/N` in every direction.
    pub fn isotropic(num_elements: usize) -> Self {
        let mut weights = vec![Complex::new(T::zero(), T::zero()); num_elements];
        weights[0] = Complex::new(T::one(), T::zero());
        Self { weights }
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_vec(self) -> CVec<T> {
        self.weights
    }
}

/// Element positions `[x, y, z]` with the array centred at the origin.
pub fn ula_positions<T: Real>(spec: &ArraySpec<T>) -> Vec<[T; 3]> {
    (0..spec.num_elements)
        .map(|n| [T::zero(), spec.element_offset(n) * spec.spacing, T::zero()])
        .collect()
}

/// Unit-norm steering vector with element phase `k0 d n cos(el) sin(az)`.
pub fn steering_vector<T: Real>(spec: &ArraySpec<T>, azimuth: T, elevation: T) -> CVec<T> {
    let amp = T::one() / T::from_usize(spec.num_elements).unwrap().sqrt();
    let base = spec.wavenumber() * spec.spacing * elevation.cos() * azimuth.sin();
    (0..spec.num_elements)
        .map(|n| Complex::from_polar(amp, base * spec.element_offset(n)))
        .collect()
}

/// Azimuth-only steering vector (elevation 0).
pub fn steering<T: Real>(spec: &ArraySpec<T>, azimuth: T) -> CVec<T> {
    steering_vector(spec, azimuth, T::zero())
}

/// Normalized power gain `|wᴴ a|²`.
pub fn array_gain<T: Real>(w: &[Complex<T>], a: &[Complex<T>]) -> Result<T> {
    linalg::check_len(a, w.len())?;
    Ok(linalg::vdot(w, a).norm_sqr())
}

/// Hamming window scaled to unit mean.
pub fn hamming_unit_mean<T: Real>(n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::one()];
    }
    let denom = T::from_usize(n - 1).unwrap();
    let raw: Vec<T> = (0..n)
        .map(|i| T::lit(0.54) - T::lit(0.46) * (T::TAU() * T::from_usize(i).unwrap() / denom).cos())
        .collect();
    let mean = raw.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize(n).unwrap();
    raw.into_iter().map(|v| v / mean).collect()
}

/// Tapered sensing beam steered to `steer_angle` (radians).
pub fn sensing_beam<T: Real>(spec: &ArraySpec<T>, taper: T, steer_angle: T) -> Result<BeamWeights<T>> {
    if !(taper >= T::zero() && taper <= T::one()) {
        return Err(SimError::Domain(format!("taper {taper} outside [0, 1]")));
    }
    let window = hamming_unit_mean::<T>(spec.num_elements);
    let a = steering(spec, steer_angle);
    let weights = a
        .iter()
        .zip(window)
        .map(|(ai, h)| ai * ((T::one() - taper) + taper * h))
        .collect();
    BeamWeights::from_vec(weights)
}

/// Power response `|w_Sᴴ a(probe)|²` of a sensing beam.
pub fn sensing_response<T: Real>(w: &BeamWeights<T>, spec: &ArraySpec<T>, probe_angle: T) -> T {
    linalg::vdot(w.as_slice(), &steering(spec, probe_angle)).norm_sqr()
}

/// Projects `w` onto the orthogonal complement of the steering vectors at
/// `null_angles` and renormalizes.
pub fn null_steer<T: Real>(w: &BeamWeights<T>, null_angles: &[T], spec: &ArraySpec<T>) -> Result<BeamWeights<T>> {
    linalg::check_len(w.as_slice(), spec.num_elements)?;
    if null_angles.is_empty() {
        return Ok(w.clone());
    }
    if null_angles.len() >= spec.num_elements {
        return Err(SimError::InfeasibleNull);
    }
    let nulls: Vec<CVec<T>> = null_angles.iter().map(|&t| steering(spec, t)).collect();
    let basis = linalg::orthonormal_basis(&nulls, T::lit(1e-9));
    if basis.len() >= spec.num_elements {
        return Err(SimError::InfeasibleNull);
    }
    let mut out = w.as_slice().to_vec();
    linalg::project_out(&mut out, &basis);
    if linalg::norm(&out) <= T::lit(1e-9) {
        return Err(SimError::InfeasibleNull);
    }
    let mut beam = BeamWeights::from_vec(out)?;
    // A final pass after normalization keeps the nulls exact to rounding.
    linalg::project_out(&mut beam.weights, &basis);
    BeamWeights::from_vec(beam.weights)
}

/// Gain of `w` over `angles` (radians) in dB relative to the pattern peak.
pub fn pattern_db<T: Real>(w: &BeamWeights<T>, spec: &ArraySpec<T>, angles: &[T]) -> Vec<T> {
    let gains: Vec<T> = angles.iter().map(|&t| sensing_response(w, spec, t)).collect();
    let peak = gains.iter().fold(T::zero(), |a, &b| a.max(b));
    let floor = T::lit(1e-30);
    gains
        .into_iter()
        .map(|g| T::lit(10.0) * ((g.max(floor)) / peak.max(floor)).log10())
        .collect()
}
