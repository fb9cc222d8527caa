//! Hybrid precoding, artificial-noise nullspace, per-stream SINR and secrecy,
//! and the power, SEE and outage bookkeeping of a slot.
//!
//! The inter-stream interference term sums `P_k |w_uᴴ h_uᴴ f_k|²` over the
//! other streams `k != u`. Data power is split equally across scheduled
//! streams.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::linalg::{self, CVec};
use crate::scalar::Real;

/// Power fractions for data, artificial noise and sensing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit<T: Real = f64> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub bs_power: T,
}

impl<T: Real> PowerSplit<T> {
    pub fn new(alpha: T, beta: T, gamma: T, bs_power: T) -> Result<Self> {
        let tol = T::lit(1e-9);
        if alpha < -tol || beta < -tol || gamma < -tol || ((alpha + beta + gamma) - T::one()).abs() > tol {
            return Err(SimError::Domain(format!("split ({alpha}, {beta}, {gamma}) is not on the simplex")));
        }
        if bs_power < T::zero() {
            return Err(SimError::Domain("negative BS power".into()));
        }
        Ok(Self { alpha, beta, gamma, bs_power })
    }

    pub fn data_power(&self) -> T {
        self.alpha * self.bs_power
    }

    pub fn an_power(&self) -> T {
        self.beta * self.bs_power
    }

    pub fn sensing_power(&self) -> T {
        self.gamma * self.bs_power
    }

    /// Equal per-stream data power over `streams` scheduled receivers.
    pub fn stream_power(&self, streams: usize) -> T {
        if streams == 0 {
            T::zero()
        } else {
            self.data_power() / T::from_usize(streams).unwrap()
        }
    }
}

/// `signal / (interference + noise)`.
pub fn sinr<T: Real>(signal: T, interference: T, noise: T) -> T {
    signal / (interference + noise)
}

/// Strongest eavesdropper SINR.
pub fn worst_case_eve<T: Real>(sinrs: &[T]) -> Result<T> {
    sinrs
        .iter()
        .copied()
        .reduce(T::max)
        .ok_or_else(|| SimError::Domain("empty eavesdropper set".into()))
}

/// Gaussian wiretap secrecy rate in bps/Hz, clamped at zero.
pub fn secrecy_rate<T: Real>(sinr_lu: T, sinr_e_max: T) -> T {
    ((T::one() + sinr_lu).log2() - (T::one() + sinr_e_max).log2()).max(T::zero())
}

/// Static consumption constants of the power model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConsts<T: Real = f64> {
    pub num_rf: usize,
    pub p_rf: T,
    pub p_bb: T,
    pub eta_pa: T,
}

impl<T: Real> PowerConsts<T> {
    /// Static draw `N_RF P_rf + P_bb`.
    pub fn static_power(&self) -> T {
        T::from_usize(self.num_rf).unwrap() * self.p_rf + self.p_bb
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTotals<T: Real = f64> {
    pub tx_total: T,
    pub slot_power: T,
}

/// Radiated total and consumed slot power.
pub fn power_accounting<T: Real>(bs_power: T, hn_powers: &[T], consts: &PowerConsts<T>) -> Result<PowerTotals<T>> {
    if !(consts.eta_pa > T::zero() && consts.eta_pa <= T::one()) {
        return Err(SimError::Domain(format!("PA efficiency {} outside (0, 1]", consts.eta_pa)));
    }
    let tx_total = hn_powers.iter().fold(bs_power, |acc, &p| acc + p);
    Ok(PowerTotals { tx_total, slot_power: consts.static_power() + tx_total / consts.eta_pa })
}

/// Secrecy energy efficiency: summed secrecy rate (bps/Hz) per consumed watt.
pub fn see<T: Real>(sum_secrecy: T, slot_power: T) -> Result<T> {
    if !(slot_power > T::zero()) {
        return Err(SimError::Domain("slot power must be positive".into()));
    }
    Ok(sum_secrecy / slot_power)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageStats<T: Real = f64> {
    pub r_min: T,
    pub r_mean: T,
    pub outage: T,
}

/// Minimum, mean and outage fraction (`rate < threshold`). An empty set is a
/// no-service slot: full outage and zero rates.
pub fn outage_metrics<T: Real>(rates: &[T], threshold: T) -> OutageStats<T> {
    if rates.is_empty() {
        return OutageStats { r_min: T::zero(), r_mean: T::zero(), outage: T::one() };
    }
    let n = T::from_usize(rates.len()).unwrap();
    let r_min = rates.iter().copied().fold(T::infinity(), T::min);
    let r_mean = rates.iter().fold(T::zero(), |a, &b| a + b) / n;
    let below = rates.iter().filter(|&&r| r < threshold).count();
    OutageStats { r_min, r_mean, outage: T::from_usize(below).unwrap() / n }
}

pub fn watts_to_dbm<T: Real>(watts: T) -> T {
    T::lit(10.0) * watts.log10() + T::lit(30.0)
}

/// Partially connected hybrid precoder plus the data needed for the
/// artificial-noise projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub num_antennas: usize,
    /// Phase-only analog columns, one per active RF chain.
    pub analog: Vec<CVec<f64>>,
    /// Digital columns (length = active RF chains), one per stream.
    pub digital: Vec<CVec<f64>>,
    /// Unit-norm composite beams `f_u`.
    pub beams: Vec<CVec<f64>>,
    /// Orthonormal basis of the stacked legitimate channels.
    pub legit_basis: Vec<CVec<f64>>,
}

impl PrecoderSet {
    pub fn streams(&self) -> usize {
        self.beams.len()
    }

    /// Dimension of the artificial-noise subspace.
    pub fn an_dim(&self) -> usize {
        self.num_antennas - self.legit_basis.len()
    }
}

fn sub_array_bounds(num_antennas: usize, blocks: usize, b: usize) -> (usize, usize) {
    (b * num_antennas / blocks, (b + 1) * num_antennas / blocks)
}

/// Builds the hybrid precoder for the scheduled legitimate channels.
///
/// Each stream gets its own contiguous sub-array, phase-aligned to that
/// stream's channel. The digital stage is regularized zero forcing on the
/// effective channel with regularizer `reg` (0 gives plain zero forcing).
pub fn build_precoder(thn_channels: &[&[Complex64]], num_antennas: usize, num_rf: usize, reg: f64) -> Result<PrecoderSet> {
    let k = thn_channels.len();
    if k > num_rf {
        return Err(SimError::Capacity { streams: k, rf_chains: num_rf });
    }
    if k > num_antennas {
        return Err(SimError::Capacity { streams: k, rf_chains: num_antennas });
    }
    for h in thn_channels {
        linalg::check_len(h, num_antennas)?;
    }
    let legit_basis = linalg::orthonormal_basis(
        &thn_channels.iter().map(|h| h.to_vec()).collect::<Vec<_>>(),
        1e-10,
    );
    if k == 0 {
        return Ok(PrecoderSet { num_antennas, analog: vec![], digital: vec![], beams: vec![], legit_basis });
    }
    let zero = Complex64::new(0.0, 0.0);
    let analog: Vec<CVec<f64>> = (0..k)
        .map(|b| {
            let (lo, hi) = sub_array_bounds(num_antennas, k, b);
            let amp = 1.0 / ((hi - lo) as f64).sqrt();
            let mut col = vec![zero; num_antennas];
            for n in lo..hi {
                let h = thn_channels[b][n];
                col[n] = if h.norm() > 0.0 { Complex64::from_polar(amp, h.arg()) } else { Complex64::new(amp, 0.0) };
            }
            col
        })
        .collect();
    // Effective channel H_eff[u][b] = h_uᴴ a_b.
    let h_eff: Vec<CVec<f64>> = thn_channels
        .iter()
        .map(|h| analog.iter().map(|a| linalg::vdot(h, a)).collect())
        .collect();
    let scale = h_eff.iter().map(|r| linalg::norm_sqr(r)).sum::<f64>() / k as f64;
    let gram: Vec<CVec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let v: Complex64 = h_eff[i].iter().zip(&h_eff[j]).map(|(a, b)| a * b.conj()).sum();
                    if i == j { v + reg } else { v }
                })
                .collect()
        })
        .collect();
    let mut digital = Vec::with_capacity(k);
    let mut beams = Vec::with_capacity(k);
    for u in 0..k {
        let mut e = vec![zero; k];
        e[u] = Complex64::new(1.0, 0.0);
        let x = match linalg::solve(&gram, &e) {
            Ok(x) => x,
            // Rank-deficient effective channel: fall back to a lightly regularized solve.
            Err(_) => {
                let bumped: Vec<CVec<f64>> = gram
                    .iter()
                    .enumerate()
                    .map(|(i, r)| r.iter().enumerate().map(|(j, v)| if i == j { v + 1e-9 * scale.max(1e-300) } else { *v }).collect())
                    .collect();
                linalg::solve(&bumped, &e)?
            }
        };
        // Column u of H_effᴴ x.
        let fbb: CVec<f64> = (0..k).map(|b| (0..k).map(|v| h_eff[v][b].conj() * x[v]).sum()).collect();
        let mut f = vec![zero; num_antennas];
        for (b, a) in analog.iter().enumerate() {
            let (lo, hi) = sub_array_bounds(num_antennas, k, b);
            for n in lo..hi {
                f[n] += a[n] * fbb[b];
            }
        }
        let f = linalg::normalized(&f).ok_or_else(|| SimError::Domain("degenerate composite beam".into()))?;
        digital.push(fbb);
        beams.push(f);
    }
    Ok(PrecoderSet { num_antennas, analog, digital, beams, legit_basis })
}

/// Orthonormal basis of the complement of the legitimate channels' span.
pub fn an_projector(thn_channels: &[&[Complex64]], num_antennas: usize) -> Result<Vec<CVec<f64>>> {
    for h in thn_channels {
        linalg::check_len(h, num_antennas)?;
    }
    let legit = linalg::orthonormal_basis(&thn_channels.iter().map(|h| h.to_vec()).collect::<Vec<_>>(), 1e-10);
    if legit.len() >= num_antennas {
        return Err(SimError::NoNullspace);
    }
    let mut all = legit.clone();
    let mut out = Vec::with_capacity(num_antennas - legit.len());
    for i in 0..num_antennas {
        if out.len() == num_antennas - legit.len() {
            break;
        }
        let mut e = vec![Complex64::new(0.0, 0.0); num_antennas];
        e[i] = Complex64::new(1.0, 0.0);
        linalg::project_out(&mut e, &all);
        if linalg::norm(&e) > 1e-6 {
            let q = linalg::normalized(&e).expect("nonzero");
            all.push(q.clone());
            out.push(q);
        }
    }
    Ok(out)
}

/// BS-originated power terms seen by one receiver, per unit transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverTerms {
    /// `|hᴴ f_k|²` for every stream `k`.
    pub stream_gains: Vec<f64>,
    /// `‖P⊥ h‖² / dim`: artificial-noise power per watt of AN.
    pub an_gain: f64,
    /// Receive combining gain of the matched-filter combiner.
    pub rx_gain: f64,
}

pub fn receiver_terms(h: &[Complex64], precoder: &PrecoderSet, rx_gain: f64) -> ReceiverTerms {
    let stream_gains = precoder.beams.iter().map(|f| linalg::vdot(h, f).norm_sqr()).collect();
    let dim = precoder.an_dim();
    let an_gain = if dim == 0 { 0.0 } else { linalg::residual_norm_sqr(h, &precoder.legit_basis) / dim as f64 };
    ReceiverTerms { stream_gains, an_gain, rx_gain }
}

/// Transmit-side powers shared by every receiver in a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TxPowers {
    pub stream_powers: Vec<f64>,
    pub an_power: f64,
    pub noise: f64,
}

fn check_stream(u: usize, terms: &ReceiverTerms, tx: &TxPowers) -> Result<()> {
    if u >= tx.stream_powers.len() || u >= terms.stream_gains.len() {
        return Err(SimError::Role(format!("stream {u} is not scheduled")));
    }
    Ok(())
}

fn cross_streams(u: usize, terms: &ReceiverTerms, tx: &TxPowers) -> f64 {
    (0..tx.stream_powers.len())
        .filter(|&k| k != u)
        .map(|k| tx.stream_powers[k] * terms.rx_gain * terms.stream_gains[k])
        .sum()
}

/// `(signal, interference)` of stream `u` at its intended receiver, where
/// interference is the other streams plus artificial noise (no jamming, no noise).
pub fn legitimate_parts(u: usize, terms: &ReceiverTerms, tx: &TxPowers) -> Result<(f64, f64)> {
    check_stream(u, terms, tx)?;
    let signal = tx.stream_powers[u] * terms.rx_gain * terms.stream_gains[u];
    let an = tx.an_power * terms.rx_gain * terms.an_gain;
    Ok((signal, cross_streams(u, terms, tx) + an))
}

/// `(signal, interference)` of an eavesdropper decoding stream `u`. With
/// `cancels_streams` the eavesdropper is credited with removing the other
/// data streams.
pub fn eavesdropper_parts(u: usize, terms: &ReceiverTerms, tx: &TxPowers, cancels_streams: bool) -> Result<(f64, f64)> {
    check_stream(u, terms, tx)?;
    let signal = tx.stream_powers[u] * terms.rx_gain * terms.stream_gains[u];
    let isi = if cancels_streams { 0.0 } else { cross_streams(u, terms, tx) };
    let an = tx.an_power * terms.rx_gain * terms.an_gain;
    Ok((signal, isi + an))
}

/// Legitimate SINR of stream `u` at its intended receiver, given the
/// jamming power `jam` that reaches it.
pub fn sinr_legitimate(u: usize, terms: &ReceiverTerms, tx: &TxPowers, jam: f64) -> Result<f64> {
    let (signal, interference) = legitimate_parts(u, terms, tx)?;
    Ok(sinr(signal, interference + jam, tx.noise))
}

/// SINR of an eavesdropper decoding stream `u`.
pub fn sinr_eavesdropper(u: usize, terms: &ReceiverTerms, tx: &TxPowers, jam: f64, cancels_streams: bool) -> Result<f64> {
    let (signal, interference) = eavesdropper_parts(u, terms, tx, cancels_streams)?;
    Ok(sinr(signal, interference + jam, tx.noise))
}
