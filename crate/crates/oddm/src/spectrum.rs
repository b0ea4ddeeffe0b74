//! Frequency-domain analysis: sub-pulse spectrum, basis-function frequency
//! representations, closed-form expected PSDs of both ODDM realizations,
//! empirical (Monte-Carlo) PSD estimation, and out-of-band metrics.
//!
//! Two expected-PSD shapes matter here. The direct system aggregates
//! Doppler-shifted copies of the sub-pulse spectrum, which produces a
//! staircase in the transition region with step width `1/T`. The
//! approximate-digital system is confined to the sub-pulse spectrum itself:
//! its sinc-squared tone train sums to one identically, leaving
//! `Es*N*M*|A(f)|^2`.
//!
//! The infinite tone trains are evaluated two ways: a centered truncation
//! (`kmax` terms each side, the tail bounded by `2/(pi^2*kmax*period^2)`)
//! and an exact finite form (Fejer kernel) obtained by Poisson summation.
//! The truncated route is kept as the independent oracle; the exact route is
//! what the PSD functions use.

use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::params::{OddmParams, SampledWaveform};
use crate::pulse::ProtoPulse;
use crate::{psi_index, OddmError, Result, Scalar};

/// `sin(pi x)/(pi x)`, continuous at zero.
pub fn sinc<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        let px = T::PI() * x;
        px.sin() / px
    }
}

/// Truncated sinc-squared train `sum_{|k - k0| <= kmax} sinc^2(x - k*period)`
/// with the window centered on the nearest train index `k0`.
pub fn sinc_sq_train<T: Scalar>(x: T, period: usize, kmax: usize) -> T {
    let p = T::from_usize(period).unwrap();
    let k0 = (x / p).round().to_isize().unwrap_or(0);
    let mut acc = T::zero();
    for k in (k0 - kmax as isize)..=(k0 + kmax as isize) {
        let s = sinc(x - T::from_isize(k).unwrap() * p);
        acc += s * s;
    }
    acc
}

/// Exact sinc-squared train `sum_{k in Z} sinc^2(x - k*period)` via the
/// Fejer kernel: `(sin(pi x) / (period * sin(pi x / period)))^2`.
pub fn sinc_sq_train_exact<T: Scalar>(x: T, period: usize) -> T {
    if period == 1 {
        return T::one();
    }
    let p = T::from_usize(period).unwrap();
    let frac = x / p - (x / p).round();
    if frac.abs() < T::from_f64(1e-9).unwrap() {
        return T::one();
    }
    let num = (T::PI() * x).sin();
    let den = p * (T::PI() * x / p).sin();
    let r = num / den;
    r * r
}

/// Sub-pulse spectrum evaluated on a frequency grid.
#[derive(Debug, Clone)]
pub struct PulseSpectrum<T: Scalar> {
    pub freqs: Vec<T>,
    pub values: Vec<Complex<T>>,
}

/// Exact DTFT of the sampled sub-pulse, scaled by the sample spacing, so
/// `values[i] ~ integral a(t) e^{-j2pi f t} dt` with `t = 0` at the center
/// tap.
pub fn pulse_freq<T: Scalar>(pulse: &ProtoPulse<T>, freqs: &[T]) -> PulseSpectrum<T> {
    let dt = pulse.dt;
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let values = freqs
        .iter()
        .map(|&f| {
            // rotate across taps instead of calling exp per tap
            let step_ang = -two_pi * f * dt;
            let step = Complex::new(step_ang.cos(), step_ang.sin());
            let start_ang = -step_ang * T::from_usize(pulse.center).unwrap();
            let mut ph = Complex::new(start_ang.cos(), start_ang.sin());
            let mut acc = Complex::new(T::zero(), T::zero());
            for &h in &pulse.taps {
                acc += ph * h;
                ph *= step;
            }
            acc * Complex::new(dt, T::zero())
        })
        .collect();
    PulseSpectrum { freqs: freqs.to_vec(), values }
}

/// Phased sinc-tone train shared by both basis-function spectra:
/// `sum_m e^{-j pi (N-1) (T f - psi/N - m)} sinc(N T f - m N - psi)`,
/// truncated to `kmax` tones each side of the dominant one.
fn sinc_train_phased<T: Scalar>(tf: T, n_len: usize, psi: isize, kmax: usize) -> Complex<T> {
    let n_t = T::from_usize(n_len).unwrap();
    let psi_t = T::from_isize(psi).unwrap();
    let x = n_t * tf - psi_t; // zero at the dominant tone
    let m0 = (x / n_t).round().to_isize().unwrap_or(0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for m in (m0 - kmax as isize)..=(m0 + kmax as isize) {
        let m_t = T::from_isize(m).unwrap();
        let s = sinc(x - m_t * n_t);
        if s != T::zero() {
            let ang = -T::PI() * T::from_usize(n_len - 1).unwrap() * (tf - psi_t / n_t - m_t);
            acc += Complex::new(ang.cos(), ang.sin()) * s;
        }
    }
    acc
}

/// Frequency response of the direct-system basis `(m, n)`: envelope
/// `sqrt(N) e^{-j2pi f m tau} A(f - psi(n)/(NT))` times the sinc-tone train.
pub fn freq_basis_analog<T: Scalar>(
    m: usize,
    n: usize,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    freqs: &[T],
    kmax: usize,
) -> Result<Vec<Complex<T>>> {
    basis_spectrum(m, n, params, pulse, freqs, kmax, true)
}

/// Frequency response of the approximate-digital basis `(m, n)`: envelope
/// `sqrt(N) e^{-j2pi f m tau} A(f)` times the same sinc-tone train.
pub fn freq_basis_digital<T: Scalar>(
    m: usize,
    n: usize,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    freqs: &[T],
    kmax: usize,
) -> Result<Vec<Complex<T>>> {
    basis_spectrum(m, n, params, pulse, freqs, kmax, false)
}

fn basis_spectrum<T: Scalar>(
    m: usize,
    n: usize,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    freqs: &[T],
    kmax: usize,
    shift_envelope: bool,
) -> Result<Vec<Complex<T>>> {
    if m >= params.m || n >= params.n {
        return Err(OddmError::Domain(format!(
            "basis spectrum: index ({m}, {n}) out of range {}x{}",
            params.m, params.n
        )));
    }
    let psi = psi_index(n, params.n)?;
    let fres = params.doppler_res();
    let env_freqs: Vec<T> = if shift_envelope {
        freqs.iter().map(|&f| f - T::from_isize(psi).unwrap() * fres).collect()
    } else {
        freqs.to_vec()
    };
    let env = pulse_freq(pulse, &env_freqs);
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let root_n = T::from_usize(params.n).unwrap().sqrt();
    let delay = T::from_usize(m).unwrap() * params.tau();
    Ok(freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let ang = -two_pi * f * delay;
            let rot = Complex::new(ang.cos(), ang.sin());
            let train = sinc_train_phased(f * params.t, params.n, psi, kmax);
            rot * env.values[i] * train * root_n
        })
        .collect())
}

/// What a PSD curve holds and how it was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdKind {
    AnalyticAnalog,
    AnalyticDigital,
    Empirical,
    Envelope,
}

/// Power spectral density samples (linear power vs Hz, ascending).
#[derive(Debug, Clone)]
pub struct PsdCurve<T: Scalar> {
    pub freqs: Vec<T>,
    pub power: Vec<T>,
    pub kind: PsdKind,
}

impl<T: Scalar> PsdCurve<T> {
    pub fn max_power(&self) -> T {
        self.power.iter().cloned().fold(T::zero(), T::max)
    }

    /// Power in dB relative to `reference` (commonly the curve maximum).
    pub fn db_rel(&self, i: usize, reference: T) -> T {
        let ten = T::from_f64(10.0).unwrap();
        let floor = T::from_f64(1e-300).unwrap();
        ten * ((self.power[i] / reference).max(floor)).log10()
    }
}

/// Frequency grid of tone centers (multiples of the Doppler resolution)
/// covering `[-f_max, f_max]`.
pub fn tone_center_grid<T: Scalar>(params: &OddmParams<T>, f_max: T) -> Vec<T> {
    let fres = params.doppler_res();
    let k_max = (f_max / fres).floor().to_isize().unwrap_or(0);
    (-k_max..=k_max).map(|k| T::from_isize(k).unwrap() * fres).collect()
}

/// Dense frequency grid with `per_tone` points per Doppler resolution.
pub fn fine_grid<T: Scalar>(params: &OddmParams<T>, f_max: T, per_tone: usize) -> Vec<T> {
    let step = params.doppler_res() / T::from_usize(per_tone).unwrap();
    let k_max = (f_max / step).floor().to_isize().unwrap_or(0);
    (-k_max..=k_max).map(|k| T::from_isize(k).unwrap() * step).collect()
}

/// Expected PSD of the direct system:
/// `Es N M sum_n |A(f - n/(NT))|^2 * train_N(NTf - n)`.
///
/// `kmax = None` evaluates the tone train in closed form; `Some(k)` uses the
/// centered truncation (the oracle route).
pub fn psd_analytic_analog<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    freqs: &[T],
    es: T,
    kmax: Option<usize>,
) -> PsdCurve<T> {
    let scale = es * T::from_usize(params.n * params.m).unwrap();
    let fres = params.doppler_res();
    let half = params.n as isize / 2;
    // envelope values per Doppler shift, reused across the grid
    let mut power = vec![T::zero(); freqs.len()];
    for n in -half..half {
        let n_t = T::from_isize(n).unwrap();
        let shifted: Vec<T> = freqs.iter().map(|&f| f - n_t * fres).collect();
        let env = pulse_freq(pulse, &shifted);
        for (i, &f) in freqs.iter().enumerate() {
            let x = T::from_usize(params.n).unwrap() * f * params.t - n_t;
            let train = match kmax {
                Some(k) => sinc_sq_train(x, params.n, k),
                None => sinc_sq_train_exact(x, params.n),
            };
            power[i] += env.values[i].norm_sqr() * train;
        }
    }
    for p in &mut power {
        *p *= scale;
    }
    PsdCurve { freqs: freqs.to_vec(), power, kind: PsdKind::AnalyticAnalog }
}

/// Expected PSD of the approximate-digital system:
/// `Es N M |A(f)|^2 * train_1(NTf)`; the dense train is identically one.
pub fn psd_analytic_digital<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    freqs: &[T],
    es: T,
    kmax: Option<usize>,
) -> PsdCurve<T> {
    let scale = es * T::from_usize(params.n * params.m).unwrap();
    let env = pulse_freq(pulse, freqs);
    let power = freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let x = T::from_usize(params.n).unwrap() * f * params.t;
            let train = match kmax {
                Some(k) => sinc_sq_train(x, 1, k),
                None => sinc_sq_train_exact(x, 1),
            };
            env.values[i].norm_sqr() * train * scale
        })
        .collect();
    PsdCurve { freqs: freqs.to_vec(), power, kind: PsdKind::AnalyticDigital }
}

/// Complex spectrum of one waveform via FFT, phase-referenced to absolute
/// time: `X(f_k) ~ integral x(t) e^{-j2pi f_k t} dt`.
///
/// Returns ascending frequencies and the matching values; `fft_len` sets the
/// grid `f_k = k * fs / fft_len` and must cover the waveform.
pub fn waveform_spectrum<T>(
    wf: &SampledWaveform<T>,
    fft_len: usize,
) -> Result<(Vec<T>, Vec<Complex<T>>)>
where
    T: Scalar + FftNum,
{
    if wf.len() > fft_len {
        return Err(OddmError::Domain(format!(
            "waveform_spectrum: {} samples exceed fft_len {}",
            wf.len(),
            fft_len
        )));
    }
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(fft_len);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); fft_len];
    buf[..wf.len()].copy_from_slice(&wf.samples);
    fft.process(&mut buf);
    let dt = wf.dt();
    let df = wf.fs / T::from_usize(fft_len).unwrap();
    let half = fft_len.div_ceil(2);
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let mut freqs = Vec::with_capacity(fft_len);
    let mut values = Vec::with_capacity(fft_len);
    let mut push = |k_signed: isize, raw: Complex<T>| {
        let f = T::from_isize(k_signed).unwrap() * df;
        // the FFT references sample 0; shift the phase origin to t = 0
        let ang = -two_pi * f * wf.t0;
        freqs.push(f);
        values.push(raw * Complex::new(ang.cos(), ang.sin()) * Complex::new(dt, T::zero()));
    };
    for k in half..fft_len {
        push(k as isize - fft_len as isize, buf[k]);
    }
    for (k, &raw) in buf.iter().enumerate().take(half) {
        push(k as isize, raw);
    }
    Ok((freqs, values))
}

/// Ensemble-averaged periodogram over independent random-symbol frames.
///
/// Each frame contributes `|dt * DFT(frame)|^2`, the Riemann estimate of the
/// frame's energy spectral density, so levels match the analytic
/// `E[|X(f)|^2]` convention directly. Frequencies are returned ascending;
/// `fft_len` must cover the longest frame.
pub fn psd_empirical<T, I>(frames: I, fft_len: usize) -> Result<PsdCurve<T>>
where
    T: Scalar + FftNum,
    I: IntoIterator<Item = SampledWaveform<T>>,
{
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(fft_len);
    let mut acc = vec![T::zero(); fft_len];
    let mut trials = 0usize;
    let mut fs = T::zero();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); fft_len];
    for frame in frames {
        if frame.len() > fft_len {
            return Err(OddmError::Domain(format!(
                "psd_empirical: frame of {} samples exceeds fft_len {}",
                frame.len(),
                fft_len
            )));
        }
        fs = frame.fs;
        for v in buf.iter_mut() {
            *v = Complex::new(T::zero(), T::zero());
        }
        buf[..frame.len()].copy_from_slice(&frame.samples);
        fft.process(&mut buf);
        let dt2 = frame.dt() * frame.dt();
        for (a, v) in acc.iter_mut().zip(buf.iter()) {
            *a += v.norm_sqr() * dt2;
        }
        trials += 1;
    }
    if trials == 0 {
        return Err(OddmError::Domain("psd_empirical: need at least one frame".into()));
    }
    let inv = T::from_usize(trials).unwrap().recip();
    // reorder to ascending frequency: negative bins first
    let half = fft_len.div_ceil(2);
    let mut freqs = Vec::with_capacity(fft_len);
    let mut power = Vec::with_capacity(fft_len);
    let df = fs / T::from_usize(fft_len).unwrap();
    for k in half..fft_len {
        freqs.push(T::from_isize(k as isize - fft_len as isize).unwrap() * df);
        power.push(acc[k] * inv);
    }
    for (k, a) in acc.iter().enumerate().take(half) {
        freqs.push(T::from_usize(k).unwrap() * df);
        power.push(*a * inv);
    }
    Ok(PsdCurve { freqs, power, kind: PsdKind::Empirical })
}

/// Bandwidths at one out-of-band threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthAt<T> {
    pub threshold_db: T,
    /// First crossing scanning from DC towards positive frequencies.
    pub one_sided_hi: Option<T>,
    /// First crossing scanning from DC towards negative frequencies
    /// (reported as a positive width).
    pub one_sided_lo: Option<T>,
}

impl<T: Scalar> BandwidthAt<T> {
    /// Sum of the two one-sided widths, when both exist.
    pub fn two_sided(&self) -> Option<T> {
        match (self.one_sided_lo, self.one_sided_hi) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        }
    }
}

/// Out-of-band report: per-threshold bandwidths plus the peak sidelobe.
#[derive(Debug, Clone)]
pub struct OobeReport<T: Scalar> {
    pub bandwidths: Vec<BandwidthAt<T>>,
    /// Peak power outside the exclusion band, in dB relative to the curve
    /// maximum; `None` when the curve does not extend past the exclusion.
    pub peak_sidelobe_db: Option<T>,
    /// Exclusion half-width used for the sidelobe search, in Hz.
    pub sidelobe_exclusion_hz: T,
}

/// Scan a PSD curve for threshold crossings and the peak sidelobe.
///
/// For each threshold the scan starts at the curve maximum's frequency bin
/// and walks outward until the power first falls `threshold` dB below the
/// in-band maximum; a threshold never crossed is reported unbounded
/// (`None`). The peak sidelobe is the maximum level at `|f|` beyond
/// `sidelobe_exclusion_hz`.
pub fn oobe_metrics<T: Scalar>(
    curve: &PsdCurve<T>,
    thresholds_db: &[T],
    sidelobe_exclusion_hz: T,
) -> OobeReport<T> {
    let peak = curve.max_power();
    let ten = T::from_f64(10.0).unwrap();
    // scan outward from DC (frequency nearest zero)
    let dc = curve
        .freqs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let bandwidths = thresholds_db
        .iter()
        .map(|&th| {
            let level = peak * ten.powf(-th / ten);
            let mut hi = None;
            for i in dc..curve.power.len() {
                if curve.power[i] < level {
                    hi = Some(curve.freqs[i] - curve.freqs[dc]);
                    break;
                }
            }
            let mut lo = None;
            for i in (0..=dc).rev() {
                if curve.power[i] < level {
                    lo = Some(curve.freqs[dc] - curve.freqs[i]);
                    break;
                }
            }
            BandwidthAt { threshold_db: th, one_sided_hi: hi, one_sided_lo: lo }
        })
        .collect();
    let mut sidelobe: Option<T> = None;
    for (i, &f) in curve.freqs.iter().enumerate() {
        if f.abs() > sidelobe_exclusion_hz {
            sidelobe = Some(match sidelobe {
                Some(s) => s.max(curve.power[i]),
                None => curve.power[i],
            });
        }
    }
    OobeReport {
        bandwidths,
        peak_sidelobe_db: sidelobe.map(|s| {
            ten * ((s / peak).max(T::from_f64(1e-300).unwrap())).log10()
        }),
        sidelobe_exclusion_hz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::srrc_pulse;

    fn desk() -> OddmParams<f64> {
        OddmParams::desk_scale()
    }

    #[test]
    fn pulse_freq_dc_is_tap_sum() {
        let params = desk();
        let p = srrc_pulse(&params);
        let spec = pulse_freq(&p, &[0.0]);
        let want: f64 = p.taps.iter().sum::<f64>() * p.dt;
        assert!((spec.values[0].re - want).abs() < 1e-12);
        assert!(spec.values[0].im.abs() < 1e-12);
    }

    #[test]
    fn pulse_freq_conjugate_symmetric() {
        let params = desk();
        let p = srrc_pulse(&params);
        let f = 3.21 / params.t;
        let spec = pulse_freq(&p, &[f, -f]);
        assert!((spec.values[0] - spec.values[1].conj()).norm() < 1e-9);
    }

    #[test]
    fn pulse_sidelobe_spacing_matches_inverse_duration() {
        // beyond the main band, nulls of the truncated pulse spectrum are
        // spaced by about 1/Ta
        let params = desk();
        let p = srrc_pulse(&params);
        let ta = params.ta();
        let edge = (1.0 + params.beta) * params.m as f64 / (2.0 * params.t);
        let df = 1.0 / (200.0 * ta);
        let freqs: Vec<f64> = (0..4000).map(|i| edge + i as f64 * df).collect();
        let spec = pulse_freq(&p, &freqs);
        let mags: Vec<f64> = spec.values.iter().map(|v| v.norm()).collect();
        // collect local maxima (sidelobe peaks)
        let mut peaks = Vec::new();
        for i in 1..mags.len() - 1 {
            if mags[i] > mags[i - 1] && mags[i] > mags[i + 1] {
                peaks.push(freqs[i]);
            }
        }
        assert!(peaks.len() >= 3);
        for w in peaks.windows(2).take(5) {
            let spacing = w[1] - w[0];
            assert!(
                (spacing * ta - 1.0).abs() < 0.35,
                "sidelobe spacing {spacing} vs 1/Ta {}",
                1.0 / ta
            );
        }
    }

    #[test]
    fn zero_doppler_basis_spectra_coincide() {
        // with no Doppler shift the two systems' envelopes are the same
        let params = desk();
        let p = srrc_pulse(&params);
        let freqs: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.37 / params.t).collect();
        let a = freq_basis_analog(3, 0, &params, &p, &freqs, 256).unwrap();
        let d = freq_basis_digital(3, 0, &params, &p, &freqs, 256).unwrap();
        for i in 0..freqs.len() {
            assert!((a[i] - d[i]).norm() < 1e-12 * a[i].norm().max(1e-9));
        }
    }

    #[test]
    fn longer_subpulse_lowers_sidelobes() {
        let base = desk();
        let mut last = f64::INFINITY;
        for q in [8usize, 16, 32] {
            let params = base.with_q(q).unwrap();
            let p = srrc_pulse(&params);
            let freqs = tone_center_grid(&params, 2.5 * params.m as f64 / params.t);
            let psd = psd_analytic_digital(&params, &p, &freqs, 1.0, None);
            let rep = oobe_metrics(
                &psd,
                &[3.0],
                (1.0 + params.beta) * params.m as f64 / params.t,
            );
            let sl = rep.peak_sidelobe_db.unwrap();
            assert!(sl < last, "q={q}: sidelobe {sl:.1} dB not below {last:.1} dB");
            last = sl;
        }
    }

    #[test]
    fn truncated_train_matches_exact_train() {
        for &period in &[1usize, 16] {
            for i in 0..200 {
                let x = -8.0 + i as f64 * 0.08;
                let t = sinc_sq_train(x, period, 4000);
                let e = sinc_sq_train_exact(x, period);
                let tail = 2.0 / (std::f64::consts::PI.powi(2) * 4000.0 * (period * period) as f64);
                assert!((t - e).abs() < tail + 1e-12, "x={x} period={period}: {t} vs {e}");
            }
        }
    }

    #[test]
    fn partition_of_unity_tail_bound() {
        let kmax = 1000;
        let bound = 2.0 / (std::f64::consts::PI.powi(2) * kmax as f64);
        for i in 0..1000 {
            let x = -2.0 + i as f64 * 0.004;
            let v = sinc_sq_train(x, 1, kmax);
            assert!((v - 1.0).abs() < bound, "x={x}: {}", (v - 1.0).abs());
        }
    }

    #[test]
    fn digital_psd_is_scaled_pulse_spectrum() {
        let params = desk();
        let p = srrc_pulse(&params);
        let freqs = fine_grid(&params, 20.0 / params.t, 4);
        let psd = psd_analytic_digital(&params, &p, &freqs, 1.0, None);
        let env = pulse_freq(&p, &freqs);
        let scale = (params.n * params.m) as f64;
        for i in 0..freqs.len() {
            let want = env.values[i].norm_sqr() * scale;
            assert!((psd.power[i] - want).abs() <= 1e-9 * want.max(1e-30));
        }
    }

    #[test]
    fn analog_psd_steps_at_tone_centers() {
        // at tone centers the analog PSD equals Es*N*M*|A(mdot/T)|^2 where
        // mdot indexes the 1/T-wide step the tone belongs to
        let params = desk();
        let p = srrc_pulse(&params);
        let freqs = tone_center_grid(&params, 19.0 / params.t);
        let psd = psd_analytic_analog(&params, &p, &freqs, 1.0, None);
        let n_half = params.n as isize / 2;
        for (i, &f) in freqs.iter().enumerate() {
            let k = (f / params.doppler_res()).round() as isize;
            let mdot = (k + n_half).div_euclid(params.n as isize);
            let env = pulse_freq(&p, &[mdot as f64 / params.t]);
            let want = env.values[0].norm_sqr() * (params.n * params.m) as f64;
            let tol = 1e-6 * want.max(psd.max_power() * 1e-12);
            assert!(
                (psd.power[i] - want).abs() < tol.max(1e-18),
                "i={i} f*T={}",
                f * params.t
            );
        }
    }

    #[test]
    fn analog_psd_agrees_with_truncated_oracle() {
        let params = desk();
        let p = srrc_pulse(&params);
        let freqs = fine_grid(&params, 5.0 / params.t, 3);
        let kmax = 2048;
        let exact = psd_analytic_analog(&params, &p, &freqs, 1.0, None);
        let trunc = psd_analytic_analog(&params, &p, &freqs, 1.0, Some(kmax));
        // N summed trains, each truncated with tail 2/(pi^2 kmax N^2)
        let bound = 2.0 / (std::f64::consts::PI.powi(2) * kmax as f64 * params.n as f64) * 2.0;
        for i in 0..freqs.len() {
            let rel = (exact.power[i] - trunc.power[i]).abs() / exact.max_power();
            assert!(rel < bound, "i={i}: {rel:.2e} vs bound {bound:.2e}");
        }
    }

    #[test]
    fn empirical_single_tone_peaks_at_tone() {
        let fs = 64.0;
        let n = 256;
        let f0 = 8.0;
        let wf = SampledWaveform::<f64> {
            samples: (0..n)
                .map(|i| {
                    let ang = 2.0 * std::f64::consts::PI * f0 * i as f64 / fs;
                    Complex::new(ang.cos(), ang.sin())
                })
                .collect(),
            fs,
            t0: 0.0,
        };
        let psd = psd_empirical(std::iter::once(wf), 256).unwrap();
        let imax = (0..psd.power.len())
            .max_by(|&a, &b| psd.power[a].partial_cmp(&psd.power[b]).unwrap())
            .unwrap();
        assert!((psd.freqs[imax] - f0).abs() < fs / 256.0 + 1e-9);
        assert!(psd_empirical(std::iter::empty::<SampledWaveform<f64>>(), 64).is_err());
    }

    #[test]
    fn waveform_spectrum_of_impulse_is_flat_with_time_phase() {
        let fs = 16.0;
        let mut wf = SampledWaveform::<f64>::zeros(8, fs, -0.25);
        // impulse at absolute t = 0 (sample 4)
        wf.samples[4] = Complex::new(1.0, 0.0);
        let (freqs, values) = waveform_spectrum(&wf, 16).unwrap();
        for (f, v) in freqs.iter().zip(values.iter()) {
            assert!((v - Complex::new(1.0 / fs, 0.0)).norm() < 1e-12, "f={f}");
        }
    }

    #[test]
    fn oobe_flat_curve_unbounded() {
        let curve = PsdCurve::<f64> {
            freqs: (0..101).map(|i| (i as f64 - 50.0) * 0.1).collect(),
            power: vec![1.0; 101],
            kind: PsdKind::Envelope,
        };
        let rep = oobe_metrics(&curve, &[3.0], 100.0);
        assert_eq!(rep.bandwidths[0].one_sided_hi, None);
        assert_eq!(rep.bandwidths[0].one_sided_lo, None);
        assert_eq!(rep.peak_sidelobe_db, None);
    }

    #[test]
    fn oobe_simple_crossing() {
        // triangle in dB: power = 10^(-|f|) so the 10 dB width is 1 Hz/side
        let freqs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
        let power: Vec<f64> = freqs.iter().map(|&f| 10f64.powf(-f.abs())).collect();
        let curve = PsdCurve { freqs, power, kind: PsdKind::Envelope };
        let rep = oobe_metrics(&curve, &[10.0], 3.0);
        let hi = rep.bandwidths[0].one_sided_hi.unwrap();
        assert!((hi - 1.0).abs() < 0.02, "hi={hi}");
        assert!((rep.bandwidths[0].two_sided().unwrap() - 2.0).abs() < 0.04);
        let sl = rep.peak_sidelobe_db.unwrap();
        assert!((sl + 30.0).abs() < 0.5, "sidelobe {sl}");
    }
}
