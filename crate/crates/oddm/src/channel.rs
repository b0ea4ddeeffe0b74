//! Doubly-selective multipath applied at the waveform level, AWGN with an
//! Eb/N0 budget, and the Extended Vehicular A tap generator.
//!
//! Each path delays the signal and applies a Doppler phase referenced to the
//! delayed signal, `h * x(t - tau) * e^{j 2 pi nu (t - tau)}`; with that
//! reference, on-grid taps turn into pure delay-Doppler shifts after
//! demodulation, with no residual cross-phase on the diagonal. Off-grid
//! delays go through a 64-tap Kaiser-windowed sinc interpolator.

use num_complex::Complex;
use rand::Rng;

use crate::params::{OddmParams, SampledWaveform};
use crate::rng::{complex_normal, SeedStream};
use crate::{OddmError, Result, Scalar};

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdTap<T: Scalar> {
    pub gain: Complex<T>,
    pub delay_s: T,
    pub doppler_hz: T,
}

/// Multipath delay-Doppler channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DdChannel<T: Scalar> {
    pub taps: Vec<DdTap<T>>,
    /// True when every delay is an integer multiple of `tau` and every
    /// Doppler an integer multiple of the Doppler resolution.
    pub on_grid: bool,
}

impl<T: Scalar> DdChannel<T> {
    /// Build from explicit taps, classifying grid alignment against
    /// `params`.
    pub fn from_taps(taps: Vec<DdTap<T>>, params: &OddmParams<T>) -> Result<Self> {
        if taps.is_empty() {
            return Err(OddmError::Domain("channel needs at least one tap".into()));
        }
        let tol = T::from_f64(1e-6).unwrap();
        let on_grid = taps.iter().all(|t| {
            let l = t.delay_s / params.tau();
            let k = t.doppler_hz / params.doppler_res();
            (l - l.round()).abs() < tol && (k - k.round()).abs() < tol
        });
        Ok(Self { taps, on_grid })
    }

    /// On-grid channel from integer delay/Doppler bins.
    pub fn on_grid(bins: &[(Complex<T>, isize, isize)], params: &OddmParams<T>) -> Result<Self> {
        let taps = bins
            .iter()
            .map(|&(gain, l, k)| {
                if l < 0 {
                    return Err(OddmError::Domain("on-grid delays must be >= 0".into()));
                }
                Ok(DdTap {
                    gain,
                    delay_s: T::from_isize(l).unwrap() * params.tau(),
                    doppler_hz: T::from_isize(k).unwrap() * params.doppler_res(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_taps(taps, params)
    }

    /// Identity channel (single unit tap, no delay, no Doppler).
    pub fn identity(params: &OddmParams<T>) -> Self {
        Self::on_grid(&[(Complex::new(T::one(), T::zero()), 0, 0)], params)
            .expect("identity channel is valid")
    }

    pub fn max_delay(&self) -> T {
        self.taps
            .iter()
            .map(|t| t.delay_s)
            .fold(T::zero(), T::max)
    }

    /// Integer delay/Doppler bins; errors if any tap is off-grid.
    pub fn grid_bins(&self, params: &OddmParams<T>) -> Result<Vec<(Complex<T>, usize, isize)>> {
        if !self.on_grid {
            return Err(OddmError::Domain("channel has off-grid taps".into()));
        }
        Ok(self
            .taps
            .iter()
            .map(|t| {
                let l = (t.delay_s / params.tau()).round().to_usize().unwrap();
                let k = (t.doppler_hz / params.doppler_res()).round().to_isize().unwrap();
                (t.gain, l, k)
            })
            .collect())
    }
}

/// Zeroth-order modified Bessel function, power series.
fn bessel_i0<T: Scalar>(x: T) -> T {
    let half = x / T::from_f64(2.0).unwrap();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..64 {
        let kf = T::from_usize(k).unwrap();
        term = term * (half / kf) * (half / kf);
        sum += term;
        if term < sum * T::from_f64(1e-18).unwrap() {
            break;
        }
    }
    sum
}

/// 64-tap Kaiser-windowed sinc fractional-delay kernel for offset
/// `mu in [0, 1)` samples.
fn frac_delay_kernel<T: Scalar>(mu: T) -> Vec<T> {
    const HALF: isize = 32;
    let beta = T::from_f64(8.6).unwrap();
    let denom = bessel_i0(beta);
    let span = T::from_isize(HALF).unwrap();
    (-HALF + 1..=HALF)
        .map(|k| {
            let x = T::from_isize(k).unwrap() - mu;
            let r = x / span;
            if r.abs() >= T::one() {
                return T::zero();
            }
            let w = bessel_i0(beta * (T::one() - r * r).sqrt()) / denom;
            crate::spectrum::sinc(x) * w
        })
        .collect()
}

/// Apply the multipath channel: `r(t) = sum_p h_p x(t - tau_p)
/// e^{j 2 pi nu_p (t - tau_p)}`.
///
/// The output keeps the input time origin and extends far enough to hold the
/// largest delay (plus interpolator tails for off-grid delays).
pub fn apply_channel<T: Scalar>(
    tx: &SampledWaveform<T>,
    ch: &DdChannel<T>,
) -> Result<SampledWaveform<T>> {
    let fs = tx.fs;
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let tol = T::from_f64(1e-6).unwrap();
    let mut max_shift = 0usize;
    let mut any_frac = false;
    for t in &ch.taps {
        if t.delay_s < T::zero() {
            return Err(OddmError::Domain("apply_channel: negative delay".into()));
        }
        let d = t.delay_s * fs;
        if (d - d.round()).abs() < tol {
            max_shift = max_shift.max(d.round().to_usize().unwrap_or(0));
        } else {
            any_frac = true;
            max_shift = max_shift.max(d.ceil().to_usize().unwrap_or(0));
        }
    }
    let tail = if any_frac { 33 } else { 0 };
    let mut out = SampledWaveform::zeros(tx.len() + max_shift + tail, fs, tx.t0);

    for tap in &ch.taps {
        let d = tap.delay_s * fs;
        let d_round = d.round();
        let w = two_pi * tap.doppler_hz;
        if (d - d_round).abs() < tol {
            let shift = d_round.to_isize().unwrap();
            for (i, &x) in tx.samples.iter().enumerate() {
                let j = i + shift as usize;
                // phase at t - tau, where t is the output sample time
                let ang = w * (tx.t0 + T::from_usize(i).unwrap() / fs);
                out.samples[j] += tap.gain * x * Complex::new(ang.cos(), ang.sin());
            }
        } else {
            let shift = d.floor().to_isize().unwrap();
            let mu = d - d.floor();
            let kernel = frac_delay_kernel(mu);
            // delayed-and-interpolated copy of x, then Doppler phase at
            // (t - tau) = input-sample time minus the fractional remainder
            for (i, &x) in tx.samples.iter().enumerate() {
                if x.norm_sqr() == T::zero() {
                    continue;
                }
                let ang = w * (tx.t0 + T::from_usize(i).unwrap() / fs);
                let v = tap.gain * x * Complex::new(ang.cos(), ang.sin());
                // kernel index k places energy at output i + shift + k
                for (ki, &h) in kernel.iter().enumerate() {
                    if h == T::zero() {
                        continue;
                    }
                    let j = i as isize + shift + ki as isize - 31;
                    if j >= 0 && (j as usize) < out.len() {
                        out.samples[j as usize] += v * h;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Noise accounting for one AWGN application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnMeta<T> {
    /// One-sided noise spectral density implied by the Eb/N0 budget.
    pub n0: T,
    /// Complex sample variance actually injected, `n0 * fs`.
    pub sample_variance: T,
}

/// Add complex white Gaussian noise for a target Eb/N0.
///
/// With unit-energy receive pulses, projecting noise of density `n0` onto a
/// basis function yields variance `n0`, so the budget is
/// `n0 = es / (bits_per_symbol * 10^(ebn0_db/10))` and samples at rate `fs`
/// carry variance `n0 * fs`. An infinite `ebn0_db` returns the waveform
/// unchanged.
pub fn add_awgn<T: Scalar>(
    wf: &SampledWaveform<T>,
    ebn0_db: T,
    bits_per_symbol: usize,
    es: T,
    seed: SeedStream,
) -> (SampledWaveform<T>, AwgnMeta<T>) {
    if ebn0_db.is_infinite() && ebn0_db > T::zero() {
        return (wf.clone(), AwgnMeta { n0: T::zero(), sample_variance: T::zero() });
    }
    let ten = T::from_f64(10.0).unwrap();
    let ebn0 = ten.powf(ebn0_db / ten);
    let n0 = es / (T::from_usize(bits_per_symbol).unwrap() * ebn0);
    let var = n0 * wf.fs;
    let mut rng = seed.rng();
    let mut out = wf.clone();
    for s in &mut out.samples {
        *s += complex_normal(var, &mut rng);
    }
    (out, AwgnMeta { n0, sample_variance: var })
}

/// 3GPP Extended Vehicular A power-delay profile (delay ns, power dB).
pub const EVA_PROFILE: [(f64, f64); 9] = [
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
];

const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Draw an EVA channel realization.
///
/// Tap gains are complex Gaussian with the profile powers (normalized to
/// unit total power); per-tap Doppler is `nu_max * cos(theta)` with `theta`
/// uniform and `nu_max = fc * v / c`. With `quantize_to_grid`, delays snap
/// to multiples of `tau` and Dopplers to multiples of the Doppler
/// resolution.
pub fn eva_profile<T: Scalar>(
    fc_hz: T,
    speed_kmh: T,
    params: &OddmParams<T>,
    seed: SeedStream,
    quantize_to_grid: bool,
) -> Result<DdChannel<T>> {
    if !(fc_hz > T::zero()) || !(speed_kmh > T::zero()) {
        return Err(OddmError::Domain("eva_profile: fc and speed must be > 0".into()));
    }
    let v = speed_kmh / T::from_f64(3.6).unwrap();
    let nu_max = fc_hz * v / T::from_f64(SPEED_OF_LIGHT).unwrap();
    let total: f64 = EVA_PROFILE.iter().map(|&(_, p)| 10f64.powf(p / 10.0)).sum();
    let mut rng = seed.rng();
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let taps = EVA_PROFILE
        .iter()
        .map(|&(delay_ns, p_db)| {
            let p = T::from_f64(10f64.powf(p_db / 10.0) / total).unwrap();
            let gain = complex_normal(p, &mut rng);
            let theta = two_pi * T::from_f64(rng.gen::<f64>()).unwrap();
            let mut delay = T::from_f64(delay_ns * 1e-9).unwrap();
            let mut doppler = nu_max * theta.cos();
            if quantize_to_grid {
                delay = (delay / params.tau()).round() * params.tau();
                doppler = (doppler / params.doppler_res()).round() * params.doppler_res();
            }
            DdTap { gain, delay_s: delay, doppler_hz: doppler }
        })
        .collect();
    DdChannel::from_taps(taps, params)
}

/// Maximum Doppler shift `fc * v / c` for a carrier and speed in km/h.
pub fn max_doppler_hz<T: Scalar>(fc_hz: T, speed_kmh: T) -> T {
    fc_hz * (speed_kmh / T::from_f64(3.6).unwrap()) / T::from_f64(SPEED_OF_LIGHT).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digital::{digital_demodulate, digital_modulate};
    use crate::pulse::{srrc_pulse, srrc_value};
    use crate::rng::random_qam_grid;
    use num_complex::Complex64;

    fn desk() -> OddmParams<f64> {
        OddmParams::desk_scale()
    }

    #[test]
    fn identity_tap_is_identity() {
        let params = desk();
        let ch = DdChannel::identity(&params);
        assert!(ch.on_grid);
        let mut tx = SampledWaveform::<f64>::zeros(64, params.sample_rate(), 0.0);
        tx.samples[10] = Complex64::new(0.3, -0.7);
        let rx = apply_channel(&tx, &ch).unwrap();
        for i in 0..tx.len() {
            assert_eq!(rx.samples[i], tx.samples[i]);
        }
    }

    #[test]
    fn unit_delay_preserves_energy() {
        let params = desk();
        let ch = DdChannel::on_grid(&[(Complex64::new(1.0, 0.0), 1, 0)], &params).unwrap();
        let pulse = srrc_pulse(&params);
        let tx = pulse.waveform(params.sample_rate());
        let rx = apply_channel(&tx, &ch).unwrap();
        assert!((rx.energy() - tx.energy()).abs() < 1e-12);
        // content moved by exactly Ns samples
        let idx = rx.index_of_time(params.tau()).unwrap() as usize;
        assert_eq!(rx.samples[idx], tx.samples[pulse.center]);
    }

    #[test]
    fn linearity_in_gains() {
        let params = desk();
        let mut tx = SampledWaveform::<f64>::zeros(128, params.sample_rate(), 0.0);
        for (i, s) in tx.samples.iter_mut().enumerate() {
            *s = Complex64::new((i as f64 * 0.1).sin(), (i as f64 * 0.2).cos());
        }
        let g = Complex64::new(0.3, 0.4);
        let one = DdChannel::on_grid(&[(g, 2, 1)], &params).unwrap();
        let two = DdChannel::on_grid(&[(g * 2.0, 2, 1)], &params).unwrap();
        let r1 = apply_channel(&tx, &one).unwrap();
        let r2 = apply_channel(&tx, &two).unwrap();
        for i in 0..r1.len() {
            assert!((r2.samples[i] - r1.samples[i] * 2.0).norm() < 1e-12);
        }
    }

    #[test]
    fn on_grid_delay_circularly_shifts_the_grid() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let mut rng = SeedStream::new(21).rng();
        let g = random_qam_grid::<f64>(params.m, params.n, &mut rng);
        let tx = digital_modulate(&g, &params, &pulse).unwrap();
        let ch = DdChannel::on_grid(&[(Complex64::new(1.0, 0.0), 1, 0)], &params).unwrap();
        let rx = apply_channel(&tx, &ch).unwrap();
        let y = digital_demodulate(&rx, &params, &pulse).unwrap();
        // magnitudes match the m-shifted grid; phases carry the Doppler term
        let mut err = 0.0;
        for m in 0..params.m {
            for n in 0..params.n {
                let want = g.get((m + params.m - 1) % params.m, n).norm();
                let got = y.get(m, n).norm();
                err += (want - got).powi(2);
            }
        }
        let rel = err / g.norm_sqr();
        assert!(10.0 * rel.log10() < -30.0, "shift residual {:.1} dB", 10.0 * rel.log10());
    }

    #[test]
    fn on_grid_doppler_circularly_shifts_doppler_axis() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let mut rng = SeedStream::new(22).rng();
        let g = random_qam_grid::<f64>(params.m, params.n, &mut rng);
        let tx = digital_modulate(&g, &params, &pulse).unwrap();
        let ch = DdChannel::on_grid(&[(Complex64::new(1.0, 0.0), 0, 1)], &params).unwrap();
        let rx = apply_channel(&tx, &ch).unwrap();
        let y = digital_demodulate(&rx, &params, &pulse).unwrap();
        let mut err = 0.0;
        for m in 0..params.m {
            for n in 0..params.n {
                let want = g.get(m, (n + params.n - 1) % params.n).norm();
                err += (want - y.get(m, n).norm()).powi(2);
            }
        }
        let rel = err / g.norm_sqr();
        assert!(10.0 * rel.log10() < -30.0, "doppler shift residual {:.1} dB", 10.0 * rel.log10());
    }

    #[test]
    fn fractional_delay_tracks_continuous_pulse() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let tx = pulse.waveform(params.sample_rate());
        let frac = 0.37;
        let delay = frac * params.tau();
        let ch = DdChannel::from_taps(
            vec![DdTap { gain: Complex64::new(1.0, 0.0), delay_s: delay, doppler_hz: 0.0 }],
            &params,
        )
        .unwrap();
        assert!(!ch.on_grid);
        let rx = apply_channel(&tx, &ch).unwrap();
        // compare against the closed form evaluated off-grid, inside the
        // well-supported middle of the pulse
        let tau = params.tau();
        let norm = pulse.taps[pulse.center] / srrc_value(0.0, params.beta, tau);
        let mut worst = 0.0f64;
        for i in 0..rx.len() {
            let t = rx.time_of(i);
            if t.abs() > 0.6 * params.ta() / 2.0 {
                continue;
            }
            let want = srrc_value(t - delay, params.beta, tau) * norm;
            worst = worst.max((rx.samples[i].re - want).abs() * tau.sqrt());
        }
        assert!(worst < 2e-3, "worst interpolation error {worst:.2e}");
    }

    #[test]
    fn awgn_variance_and_determinism() {
        let params = desk();
        let wf = SampledWaveform::<f64>::zeros(1_000_000, params.sample_rate(), 0.0);
        let seed = SeedStream::new(99).derive("awgn", 0);
        let (noisy, meta) = add_awgn(&wf, 6.0, 2, 1.0, seed);
        let measured: f64 =
            noisy.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / wf.len() as f64;
        assert!(
            (measured - meta.sample_variance).abs() / meta.sample_variance < 0.01,
            "measured {measured:.4e} target {:.4e}",
            meta.sample_variance
        );
        let n0 = 1.0 / (2.0 * 10f64.powf(0.6));
        assert!((meta.n0 - n0).abs() < 1e-12);
        let (again, _) = add_awgn(&wf, 6.0, 2, 1.0, seed);
        assert_eq!(noisy.samples, again.samples);
        let (clean, meta0) = add_awgn(&wf, f64::INFINITY, 2, 1.0, seed);
        assert_eq!(clean.samples, wf.samples);
        assert_eq!(meta0.sample_variance, 0.0);
    }

    #[test]
    fn eva_profile_matches_standard_numbers() {
        let params = OddmParams::<f64>::full_scale();
        let seed = SeedStream::new(7).derive("eva", 0);
        let ch = eva_profile(5.0e9, 500.0, &params, seed, false).unwrap();
        assert_eq!(ch.taps.len(), 9);
        assert!((max_doppler_hz(5.0e9_f64, 500.0) - 2314.8).abs() < 0.1);
        assert!((ch.max_delay() - 2510e-9).abs() < 1e-15);
        // CP budget at Tcp = T/8 covers the whole delay spread
        assert!(ch.max_delay() < params.t / 8.0);
        let total: f64 = EVA_PROFILE.iter().map(|&(_, p)| 10f64.powf(p / 10.0)).sum();
        assert!(total > 0.0);
        let q = eva_profile(5.0e9, 500.0, &params, seed, true).unwrap();
        assert!(q.on_grid);
        for t in &q.taps {
            let l = t.delay_s / params.tau();
            assert!((l - l.round()).abs() < 1e-9);
        }
    }
}
