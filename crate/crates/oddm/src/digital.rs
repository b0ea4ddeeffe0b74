//! Approximate-digital ODDM transceiver: row-wise IDFT/DFT symbol
//! transforms, column serialization, cyclic prefix handling, and sample-wise
//! sub-pulse shaping.
//!
//! The transmit chain is IDFT -> serialize -> CP -> upsample-by-`Ns` ->
//! convolve with the sub-pulse taps. The receive chain is the matched
//! filter sampled at the delay resolution, CP removal, deserialization and a
//! row-wise DFT. No DDOP-level windowing appears anywhere; that is the
//! defining approximation of this realization.

use num_complex::Complex;

use crate::params::{DdGrid, OddmParams, SampledWaveform};
use crate::pulse::ProtoPulse;
use crate::{OddmError, Result, Scalar};

/// Discrete delay-time sequence; `start` is the index of the first element
/// (`-Lcp` for CP-extended sequences).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTimeSeq<T: Scalar> {
    pub values: Vec<Complex<T>>,
    pub start: isize,
}

fn dft_twiddles<T: Scalar>(n: usize, sign: T) -> Vec<Complex<T>> {
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    (0..n)
        .map(|k| {
            let ang = sign * two_pi * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
            Complex::new(ang.cos(), ang.sin())
        })
        .collect()
}

/// Row-wise `N`-point unitary IDFT of the delay-Doppler grid:
/// `X_dt[m, k] = (1/sqrt(N)) * sum_n X[m, n] exp(+j 2 pi n k / N)`.
pub fn dd_to_delay_time<T: Scalar>(grid: &DdGrid<T>) -> DdGrid<T> {
    row_transform(grid, T::one())
}

/// Row-wise `N`-point unitary DFT; exact inverse of [`dd_to_delay_time`].
pub fn delay_time_to_dd<T: Scalar>(mat: &DdGrid<T>) -> DdGrid<T> {
    row_transform(mat, -T::one())
}

fn row_transform<T: Scalar>(grid: &DdGrid<T>, sign: T) -> DdGrid<T> {
    let (m_len, n_len) = (grid.m(), grid.n());
    let tw = dft_twiddles(n_len, sign);
    let scale = T::from_usize(n_len).unwrap().sqrt().recip();
    let mut out = DdGrid::zeros(m_len, n_len);
    for m in 0..m_len {
        for k in 0..n_len {
            let mut acc = Complex::new(T::zero(), T::zero());
            for n in 0..n_len {
                acc += grid.get(m, n) * tw[(n * k) % n_len];
            }
            out.set(m, k, acc * Complex::new(scale, T::zero()));
        }
    }
    out
}

/// Serialize along columns: `seq[k*M + m] = X_dt[m, k]`.
pub fn serialize<T: Scalar>(mat: &DdGrid<T>) -> DiscreteTimeSeq<T> {
    let (m_len, n_len) = (mat.m(), mat.n());
    let mut values = Vec::with_capacity(m_len * n_len);
    for k in 0..n_len {
        for m in 0..m_len {
            values.push(mat.get(m, k));
        }
    }
    DiscreteTimeSeq { values, start: 0 }
}

/// Invert [`serialize`] back into an `M x N` matrix.
pub fn deserialize<T: Scalar>(seq: &DiscreteTimeSeq<T>, m_len: usize, n_len: usize) -> Result<DdGrid<T>> {
    if seq.values.len() != m_len * n_len || seq.start != 0 {
        return Err(OddmError::Mismatch(format!(
            "deserialize: need {}x{} body starting at 0, got len {} start {}",
            m_len,
            n_len,
            seq.values.len(),
            seq.start
        )));
    }
    let mut out = DdGrid::zeros(m_len, n_len);
    for k in 0..n_len {
        for m in 0..m_len {
            out.set(m, k, seq.values[k * m_len + m]);
        }
    }
    Ok(out)
}

/// Prepend a cyclic prefix of `lcp` samples: the result covers indices
/// `[-lcp, MN)` with `x_cp[k] = x[k mod MN]`.
pub fn add_cp<T: Scalar>(seq: &DiscreteTimeSeq<T>, lcp: usize) -> Result<DiscreteTimeSeq<T>> {
    let mn = seq.values.len();
    if seq.start != 0 {
        return Err(OddmError::Domain("add_cp: sequence already CP-extended".into()));
    }
    if lcp >= mn {
        return Err(OddmError::Domain(format!("add_cp: lcp {lcp} must be < {mn}")));
    }
    let mut values = Vec::with_capacity(mn + lcp);
    values.extend_from_slice(&seq.values[mn - lcp..]);
    values.extend_from_slice(&seq.values);
    Ok(DiscreteTimeSeq { values, start: -(lcp as isize) })
}

/// Drop the cyclic prefix, keeping indices `[0, MN)`.
pub fn remove_cp<T: Scalar>(seq: &DiscreteTimeSeq<T>) -> DiscreteTimeSeq<T> {
    let skip = (-seq.start).max(0) as usize;
    DiscreteTimeSeq { values: seq.values[skip..].to_vec(), start: 0 }
}

/// Modulate a delay-Doppler grid into the transmit waveform.
///
/// Output sample rate is `Ns*M/T`; sample 0 sits at `t0 = -Lcp*tau - Ta/2`.
pub fn digital_modulate<T: Scalar>(
    grid: &DdGrid<T>,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
) -> Result<SampledWaveform<T>> {
    grid.assert_dims(params)?;
    let seq = add_cp(&serialize(&dd_to_delay_time(grid)), params.lcp)?;
    let ns = params.ns;
    let sym_count = seq.values.len();
    let len = (sym_count - 1) * ns + pulse.len();
    let fs = params.sample_rate();
    let t0 = T::from_isize(seq.start).unwrap() * params.tau()
        - T::from_usize(pulse.center).unwrap() / fs;
    let mut wf = SampledWaveform::zeros(len, fs, t0);
    for (k, &x) in seq.values.iter().enumerate() {
        if x.norm_sqr() == T::zero() {
            continue;
        }
        let off = k * ns;
        for (i, &h) in pulse.taps.iter().enumerate() {
            wf.samples[off + i] += x * h;
        }
    }
    Ok(wf)
}

/// Matched-filter outputs at the delay resolution for indices
/// `[start, start + count)`: `y[k] = integral r(t) a*(t - k*tau) dt`.
fn matched_filter_at<T: Scalar>(
    rx: &SampledWaveform<T>,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
    start: isize,
    count: usize,
) -> DiscreteTimeSeq<T> {
    let ns = params.ns as isize;
    let dt = rx.dt();
    // rx sample index of absolute t = 0
    let zero_idx = (-rx.t0 * rx.fs).round().to_isize().unwrap();
    let values = (0..count as isize)
        .map(|i| {
            let k = start + i;
            let first = zero_idx + k * ns - pulse.center as isize;
            let lo = first.max(0);
            let hi = (first + pulse.len() as isize).min(rx.len() as isize);
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut idx = lo;
            while idx < hi {
                acc += rx.samples[idx as usize] * pulse.taps[(idx - first) as usize];
                idx += 1;
            }
            acc * Complex::new(dt, T::zero())
        })
        .collect();
    DiscreteTimeSeq { values, start }
}

/// Demodulate a received waveform back to the delay-Doppler grid.
///
/// Matched filtering, downsampling to the delay resolution, CP removal,
/// deserialization and the row-wise DFT.
pub fn digital_demodulate<T: Scalar>(
    rx: &SampledWaveform<T>,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
) -> Result<DdGrid<T>> {
    let mn = params.m * params.n;
    // the waveform must reach the last symbol row; samples beyond what rx
    // provides count as zero
    let need = T::from_usize(params.n - 1).unwrap() * params.t;
    let rx_end = rx.time_of(rx.len().saturating_sub(1));
    if rx.is_empty() || rx_end < need {
        return Err(OddmError::Domain(format!(
            "digital_demodulate: rx ends at {:?}, frame body extends past {:?}",
            rx_end, need
        )));
    }
    let y_cp = matched_filter_at(rx, params, pulse, -(params.lcp as isize), mn + params.lcp);
    let y = remove_cp(&y_cp);
    Ok(delay_time_to_dd(&deserialize(&y, params.m, params.n)?))
}

/// Basis waveform of the approximate-digital system for symbol `(m, n)`:
/// a train of `N` sub-pulses at `kT + m*tau`, the `k`-th carrying the fixed
/// phase `exp(j 2 pi n k / N)`, scaled by `1/sqrt(N)`.
pub fn digital_basis<T: Scalar>(
    m: usize,
    n: usize,
    params: &OddmParams<T>,
    pulse: &ProtoPulse<T>,
) -> Result<SampledWaveform<T>> {
    if m >= params.m || n >= params.n {
        return Err(OddmError::Domain(format!(
            "digital_basis: index ({m}, {n}) out of range {}x{}",
            params.m, params.n
        )));
    }
    let n_len = params.n;
    let step = params.samples_per_t();
    let len = (n_len - 1) * step + pulse.len();
    let fs = params.sample_rate();
    let t0 = T::from_usize(m).unwrap() * params.tau()
        - T::from_usize(pulse.center).unwrap() / fs;
    let scale = T::from_usize(n_len).unwrap().sqrt().recip();
    let tw = dft_twiddles(n_len, T::one());
    let mut wf = SampledWaveform::zeros(len, fs, t0);
    for k in 0..n_len {
        let phase = tw[(n * k) % n_len] * Complex::new(scale, T::zero());
        let off = k * step;
        for (i, &h) in pulse.taps.iter().enumerate() {
            wf.samples[off + i] += phase * h;
        }
    }
    Ok(wf)
}
