//! Square-root-Nyquist sub-pulse synthesis and assembly of the
//! delay-Doppler orthogonal pulse (DDOP).
//!
//! The sub-pulse is a square-root raised cosine with zero-ISI interval
//! `tau = T/M`, truncated to `[-Q*tau, Q*tau]` and re-normalized to unit
//! energy. The DDOP `u(t)` is a train of `N` such sub-pulses spaced `T`
//! apart with a `1/sqrt(N)` amplitude; its cyclic-prefix-appended and
//! cyclically-extended (generalized) variants are built here as well.

use num_complex::Complex;

use crate::params::{OddmParams, SampledWaveform};
use crate::{OddmError, Result, Scalar};

/// Square-root raised cosine value at time `t`, zero-ISI interval `tau`,
/// roll-off `beta`, normalized to unit energy over the full (untruncated)
/// support.
///
/// The two removable singularities (`t = 0` and `|t| = tau/(4*beta)`) are
/// evaluated with their analytic limits inside a guard band of `1e-8 * tau`.
pub fn srrc_value<T: Scalar>(t: T, beta: T, tau: T) -> T {
    let pi = T::PI();
    let four = T::from_f64(4.0).unwrap();
    let two = T::from_f64(2.0).unwrap();
    let guard = T::from_f64(1e-8).unwrap() * tau;
    let at = t.abs();
    let inv_sqrt_tau = tau.sqrt().recip();

    if at < guard {
        return (T::one() + beta * (four / pi - T::one())) * inv_sqrt_tau;
    }
    if beta > T::zero() {
        let singular = tau / (four * beta);
        if (at - singular).abs() < guard {
            let a = pi / (four * beta);
            return beta / (two * tau).sqrt()
                * ((T::one() + two / pi) * a.sin() + (T::one() - two / pi) * a.cos());
        }
    }
    // Evaluate at |t|; the pulse is even and this keeps the symmetry exact.
    let x = at / tau;
    let num = (pi * x * (T::one() - beta)).sin()
        + four * beta * x * (pi * x * (T::one() + beta)).cos();
    let den = pi * x * (T::one() - (four * beta * x) * (four * beta * x));
    num / den * inv_sqrt_tau
}

/// Discretized sub-pulse: `2*Q*Ns + 1` real taps at spacing `tau/Ns`,
/// energy-normalized after truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtoPulse<T: Scalar> {
    /// Tap values, sample spacing `tau/Ns`.
    pub taps: Vec<T>,
    /// Index of the `t = 0` tap.
    pub center: usize,
    /// Sample spacing in seconds.
    pub dt: T,
}

impl<T: Scalar> ProtoPulse<T> {
    #[inline]
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Riemann energy of the taps; 1 after construction.
    pub fn energy(&self) -> T {
        let s: T = self.taps.iter().map(|&v| v * v).sum();
        s * self.dt
    }

    /// Autocorrelation at lag `k * tau/Ns` samples (Riemann sum).
    pub fn autocorr_at_lag(&self, lag_samples: usize) -> T {
        if lag_samples >= self.len() {
            return T::zero();
        }
        let s: T = self.taps[lag_samples..]
            .iter()
            .zip(self.taps.iter())
            .map(|(&a, &b)| a * b)
            .sum();
        s * self.dt
    }

    /// Pulse as a sampled waveform centered on `t = 0`.
    pub fn waveform(&self, fs: T) -> SampledWaveform<T> {
        let t0 = -T::from_usize(self.center).unwrap() / fs;
        SampledWaveform {
            samples: self.taps.iter().map(|&v| Complex::new(v, T::zero())).collect(),
            fs,
            t0,
        }
    }
}

/// Build the truncated, unit-energy SRRC sub-pulse for `params`.
pub fn srrc_pulse<T: Scalar>(params: &OddmParams<T>) -> ProtoPulse<T> {
    let tau = params.tau();
    let dt = params.dt();
    let half = params.q * params.ns;
    let mut taps: Vec<T> = (-(half as isize)..=half as isize)
        .map(|k| srrc_value(T::from_isize(k).unwrap() * dt, params.beta, tau))
        .collect();
    let energy: T = taps.iter().map(|&v| v * v).sum::<T>() * dt;
    let scale = energy.sqrt().recip();
    for v in &mut taps {
        *v *= scale;
    }
    ProtoPulse { taps, center: half, dt }
}

/// Which DDOP variant a waveform holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdopKind {
    /// `N` sub-pulses spaced `T`, amplitude `1/sqrt(N)`.
    Plain,
    /// Plain plus the extra sub-pulse at `-T` used in the CP region.
    CpAppended,
    /// Cyclically extended train of `N + 2*ceil(Ta/T)` sub-pulses.
    Generalized,
}

/// A DDOP realization: the sampled pulse train plus its variant tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Ddop<T: Scalar> {
    pub wf: SampledWaveform<T>,
    pub kind: DdopKind,
    /// Number of sub-pulses in the train.
    pub sub_pulses: usize,
}

/// Accumulate `count` copies of the sub-pulse spaced `T` apart, the first
/// centered at `first_center_t`, scaled by `amp`.
fn pulse_train<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    first_center_t: T,
    count: usize,
    amp: T,
) -> SampledWaveform<T> {
    let fs = params.sample_rate();
    let step = params.samples_per_t();
    let len = (count - 1) * step + pulse.len();
    let t0 = first_center_t - T::from_usize(pulse.center).unwrap() / fs;
    let mut wf = SampledWaveform::zeros(len, fs, t0);
    for k in 0..count {
        let off = k * step;
        for (i, &v) in pulse.taps.iter().enumerate() {
            wf.samples[off + i] += Complex::new(amp * v, T::zero());
        }
    }
    wf
}

/// DDOP `u(t)`: `N` sub-pulses at `0, T, ..., (N-1)T`, amplitude `1/sqrt(N)`.
pub fn build_ddop<T: Scalar>(params: &OddmParams<T>, pulse: &ProtoPulse<T>) -> Ddop<T> {
    let amp = T::from_usize(params.n).unwrap().sqrt().recip();
    Ddop {
        wf: pulse_train(params, pulse, T::zero(), params.n, amp),
        kind: DdopKind::Plain,
        sub_pulses: params.n,
    }
}

/// CP-appended DDOP for delay bin `m`: identical to [`build_ddop`] for
/// `m < M - Lcp`, otherwise the train gains one sub-pulse at `-T`.
pub fn build_ddop_cp<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    m: usize,
) -> Result<Ddop<T>> {
    if m >= params.m {
        return Err(OddmError::Domain(format!(
            "build_ddop_cp: delay index {m} out of range [0, {})",
            params.m
        )));
    }
    if m + params.lcp < params.m {
        return Ok(build_ddop(params, pulse));
    }
    let amp = T::from_usize(params.n).unwrap().sqrt().recip();
    Ok(Ddop {
        wf: pulse_train(params, pulse, -params.t, params.n + 1, amp),
        kind: DdopKind::CpAppended,
        sub_pulses: params.n + 1,
    })
}

/// Generalized DDOP `u_ce(t)`: `N + 2*D` sub-pulses with `D = ceil(Ta/T)`,
/// centers at `0, T, ..., (N-1+2D)T`, unit amplitude per sub-pulse.
pub fn build_ddop_ce<T: Scalar>(params: &OddmParams<T>, pulse: &ProtoPulse<T>) -> Ddop<T> {
    let d = params.d_span();
    let count = params.n + 2 * d;
    Ddop {
        wf: pulse_train(params, pulse, T::zero(), count, T::one()),
        kind: DdopKind::Generalized,
        sub_pulses: count,
    }
}

/// Generalized DDOP scaled to unit energy.
///
/// The plain construction above carries no overall amplitude factor, so its
/// energy grows with the sub-pulse count; cross-ambiguity studies use this
/// normalized variant.
pub fn build_ddop_ce_normalized<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
) -> Ddop<T> {
    let mut d = build_ddop_ce(params, pulse);
    let scale = d.wf.energy().sqrt().recip();
    for s in &mut d.wf.samples {
        *s *= Complex::new(scale, T::zero());
    }
    d
}
