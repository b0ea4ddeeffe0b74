//! Direct (analog-style) ODDM transceiver, simulated at the oversampled
//! rate: per-delay-bin multicarrier tone synthesis under the CP-appended
//! DDOP window, time-multiplexed at the delay resolution, and correlation
//! demodulation against DDOP-windowed tones.
//!
//! Tone sums are evaluated only over each windowed pulse's support; the
//! window is zero elsewhere, so nothing is lost and the cost drops from the
//! full frame span to `N` sub-pulse segments per delay bin.

use num_complex::Complex;

use crate::params::{DdGrid, OddmParams, SampledWaveform};
use crate::pulse::{build_ddop, build_ddop_ce_normalized, ProtoPulse};
use crate::{psi_index, OddmError, Result, Scalar};

/// Doppler tone samples over an absolute time grid: `table[n][i]` holds
/// `exp(j 2 pi psi(n) F t_i)`.
fn tone_table<T: Scalar>(params: &OddmParams<T>, t0: T, len: usize) -> Vec<Vec<Complex<T>>> {
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let fres = params.doppler_res();
    let dt = params.dt();
    (0..params.n)
        .map(|n| {
            let psi = T::from_isize(psi_index(n, params.n).unwrap()).unwrap();
            let w = two_pi * psi * fres;
            (0..len)
                .map(|i| {
                    let ang = w * (t0 + T::from_usize(i).unwrap() * dt);
                    Complex::new(ang.cos(), ang.sin())
                })
                .collect()
        })
        .collect()
}

/// Phase of tone `n` at `t = m * tau`, i.e. the factor that converts the
/// absolute-time tone into the `(t - m*tau)`-referenced tone.
fn delay_twist<T: Scalar>(params: &OddmParams<T>, m: usize, n: usize) -> Complex<T> {
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let psi = T::from_isize(psi_index(n, params.n).unwrap()).unwrap();
    let ang = two_pi * psi * params.doppler_res() * T::from_usize(m).unwrap() * params.tau();
    Complex::new(ang.cos(), ang.sin())
}

/// Modulate a delay-Doppler grid with the direct multicarrier transmitter.
///
/// The frame spans `[-Lcp*tau - Ta/2, (M-1)*tau + (N-1)*T + Ta/2]`; delay
/// bins inside the CP range carry the extra sub-pulse at `-T` of the
/// CP-appended DDOP.
pub fn analog_modulate<T: Scalar>(
    grid: &DdGrid<T>,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
) -> Result<SampledWaveform<T>> {
    grid.assert_dims(params)?;
    let fs = params.sample_rate();
    let step = params.samples_per_t();
    let cp_samples = params.lcp * params.ns;
    let len = (params.m - 1) * params.ns + (params.n - 1) * step + pulse.len() + cp_samples;
    let t0 = -params.t_cp() - params.ta() / T::from_f64(2.0).unwrap();
    let table = tone_table(params, t0, len);
    let amp = T::from_usize(params.n).unwrap().sqrt().recip();
    let mut wf = SampledWaveform::zeros(len, fs, t0);

    for m in 0..params.m {
        // weights X[m,n] * exp(-j 2 pi psi(n) F m tau) / sqrt(N)
        let weights: Vec<Complex<T>> = (0..params.n)
            .map(|n| grid.get(m, n) * delay_twist(params, m, n).conj() * amp)
            .collect();
        if weights.iter().all(|w| w.norm_sqr() == T::zero()) {
            continue;
        }
        let in_cp_range = m + params.lcp >= params.m;
        let first_sub = if in_cp_range { -1isize } else { 0 };
        for nd in first_sub..params.n as isize {
            // segment of sub-pulse `nd` of the window u_cp(t - m*tau)
            let seg = (m * params.ns + cp_samples) as isize + nd * step as isize;
            debug_assert!(seg >= 0);
            let seg = seg as usize;
            for (i, &h) in pulse.taps.iter().enumerate() {
                let mut tone = Complex::new(T::zero(), T::zero());
                for (n, w) in weights.iter().enumerate() {
                    tone += *w * table[n][seg + i];
                }
                wf.samples[seg + i] += tone * h;
            }
        }
    }
    Ok(wf)
}

/// Demodulate with DDOP-windowed correlators: for every `(m, n)`,
/// `Y[m,n] = integral r(t) u*(t - m*tau) exp(-j 2 pi psi(n) F (t - m*tau)) dt`.
///
/// The receiver window is the plain DDOP (no CP sub-pulse); integration runs
/// over the window's full support, clamped to the samples `rx` provides.
pub fn analog_demodulate<T: Scalar>(
    rx: &SampledWaveform<T>,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
) -> Result<DdGrid<T>> {
    let body_end = T::from_usize(params.n - 1).unwrap() * params.t;
    if rx.is_empty() || rx.time_of(rx.len() - 1) < body_end {
        return Err(OddmError::Domain(
            "analog_demodulate: rx does not cover the frame body".into(),
        ));
    }
    let step = params.samples_per_t();
    let dt = rx.dt();
    let amp = T::from_usize(params.n).unwrap().sqrt().recip();
    // rx sample index of absolute t = 0
    let zero_idx = (-rx.t0 * rx.fs).round().to_isize().ok_or_else(|| {
        OddmError::Domain("analog_demodulate: rx origin out of range".into())
    })?;
    let table = tone_table(params, rx.t0, rx.len());
    let mut out = DdGrid::zeros(params.m, params.n);

    for m in 0..params.m {
        let mut acc = vec![Complex::new(T::zero(), T::zero()); params.n];
        for nd in 0..params.n {
            let first = zero_idx + (m * params.ns + nd * step) as isize - pulse.center as isize;
            let lo = first.max(0);
            let hi = (first + pulse.len() as isize).min(rx.len() as isize);
            let mut idx = lo;
            while idx < hi {
                let c = rx.samples[idx as usize] * pulse.taps[(idx - first) as usize];
                for (n, a) in acc.iter_mut().enumerate() {
                    *a += c * table[n][idx as usize].conj();
                }
                idx += 1;
            }
        }
        for n in 0..params.n {
            out.set(m, n, acc[n] * delay_twist(params, m, n) * Complex::new(amp * dt, T::zero()));
        }
    }
    Ok(out)
}

/// Basis waveform of the direct system for symbol `(m, n)`:
/// `exp(j 2 pi psi(n) F (t - m*tau)) u(t - m*tau)`, with the cyclically
/// extended (unit-energy) DDOP substituted when `generalized` is set.
pub fn analog_basis<T: Scalar>(
    m: usize,
    n: usize,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    generalized: bool,
) -> Result<SampledWaveform<T>> {
    if m >= params.m || n >= params.n {
        return Err(OddmError::Domain(format!(
            "analog_basis: index ({m}, {n}) out of range {}x{}",
            params.m, params.n
        )));
    }
    let ddop = if generalized {
        build_ddop_ce_normalized(params, pulse)
    } else {
        build_ddop(params, pulse)
    };
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let psi = T::from_isize(psi_index(n, params.n).unwrap()).unwrap();
    let w = two_pi * psi * params.doppler_res();
    let delay = T::from_usize(m).unwrap() * params.tau();
    let mut wf = ddop.wf;
    wf.t0 += delay;
    let dt = wf.dt();
    for (i, s) in wf.samples.iter_mut().enumerate() {
        // phase argument is (t - m*tau) = original ddop time of sample i
        let ang = w * (wf.t0 - delay + T::from_usize(i).unwrap() * dt);
        *s *= Complex::new(ang.cos(), ang.sin());
    }
    Ok(wf)
}
