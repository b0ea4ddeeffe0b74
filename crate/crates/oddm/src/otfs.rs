//! OTFS baseline with a `T`-length rectangular transmit pulse: ISFFT
//! precoding from the delay-Doppler grid to the time-frequency grid, then
//! per-block multicarrier synthesis at the conventional resolutions (`T` in
//! time, `1/T` in frequency).
//!
//! Frequency indices are mapped symmetrically about DC so the baseband
//! spectrum is centered, mirroring the ODDM convention; this is a plotting
//! convention, not part of the precoder.

use num_complex::Complex;

use crate::params::{DdGrid, OddmParams, SampledWaveform};
use crate::{psi_index, OddmError, Result, Scalar};

/// `N x M` time-frequency grid, indexed `[time block, subcarrier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfGrid<T: Scalar> {
    values: Vec<Complex<T>>,
    n: usize,
    m: usize,
}

impl<T: Scalar> TfGrid<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { values: vec![Complex::new(T::zero(), T::zero()); n * m], n, m }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, n_idx: usize, m_idx: usize) -> Complex<T> {
        self.values[n_idx * self.m + m_idx]
    }

    #[inline]
    pub fn set(&mut self, n_idx: usize, m_idx: usize, v: Complex<T>) {
        self.values[n_idx * self.m + m_idx] = v;
    }

    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn unit_phase<T: Scalar>(turns: T) -> Complex<T> {
    let ang = T::PI() * T::from_f64(2.0).unwrap() * turns;
    Complex::new(ang.cos(), ang.sin())
}

/// Inverse symplectic finite Fourier transform:
/// `X_tf[k, l] = (1/sqrt(NM)) sum_n sum_m X_dD[m, n] e^{j2pi(nk/N - ml/M)}`.
pub fn isfft<T: Scalar>(grid: &DdGrid<T>) -> TfGrid<T> {
    let (m_len, n_len) = (grid.m(), grid.n());
    let mut out = TfGrid::zeros(n_len, m_len);
    let scale = T::from_usize(m_len * n_len).unwrap().sqrt().recip();
    // separable: DFT over delay first, then IDFT over Doppler
    let mut mid = vec![Complex::new(T::zero(), T::zero()); m_len * n_len];
    for n in 0..n_len {
        for l in 0..m_len {
            let mut acc = Complex::new(T::zero(), T::zero());
            for m in 0..m_len {
                let turns = -T::from_usize((m * l) % m_len).unwrap()
                    / T::from_usize(m_len).unwrap();
                acc += grid.get(m, n) * unit_phase(turns);
            }
            mid[n * m_len + l] = acc;
        }
    }
    for k in 0..n_len {
        for l in 0..m_len {
            let mut acc = Complex::new(T::zero(), T::zero());
            for n in 0..n_len {
                let turns =
                    T::from_usize((n * k) % n_len).unwrap() / T::from_usize(n_len).unwrap();
                acc += mid[n * m_len + l] * unit_phase(turns);
            }
            out.set(k, l, acc * Complex::new(scale, T::zero()));
        }
    }
    out
}

/// Symplectic finite Fourier transform; exact inverse of [`isfft`].
pub fn sfft<T: Scalar>(tf: &TfGrid<T>) -> DdGrid<T> {
    let (n_len, m_len) = (tf.n(), tf.m());
    let mut out = DdGrid::zeros(m_len, n_len);
    let scale = T::from_usize(m_len * n_len).unwrap().sqrt().recip();
    for m in 0..m_len {
        for n in 0..n_len {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..n_len {
                let inner_turns =
                    -T::from_usize((n * k) % n_len).unwrap() / T::from_usize(n_len).unwrap();
                let mut row = Complex::new(T::zero(), T::zero());
                for l in 0..m_len {
                    let turns = T::from_usize((m * l) % m_len).unwrap()
                        / T::from_usize(m_len).unwrap();
                    row += tf.get(k, l) * unit_phase(turns);
                }
                acc += row * unit_phase(inner_turns);
            }
            out.set(m, n, acc * Complex::new(scale, T::zero()));
        }
    }
    out
}

/// OTFS transmit waveform with the rectangular pulse: block `k` occupies
/// `[kT, (k+1)T)` and carries `M` tones at `psi_M(l)/T`.
///
/// Duration is exactly `N*T`; there are no pulse tails.
pub fn otfs_modulate<T: Scalar>(
    grid: &DdGrid<T>,
    params: &OddmParams<T>,
) -> Result<SampledWaveform<T>> {
    grid.assert_dims(params)?;
    let tf = isfft(grid);
    let block = params.samples_per_t();
    let mut wf = SampledWaveform::zeros(params.n * block, params.sample_rate(), T::zero());
    for k in 0..params.n {
        for l in 0..params.m {
            let x = tf.get(k, l);
            if x.norm_sqr() == T::zero() {
                continue;
            }
            let psi = psi_index(l, params.m)?;
            for i in 0..block {
                // tone advances psi/(M*Ns) turns per sample
                let turns = T::from_isize(psi).unwrap() * T::from_usize(i).unwrap()
                    / T::from_usize(block).unwrap();
                wf.samples[k * block + i] += x * unit_phase(turns - turns.floor());
            }
        }
    }
    Ok(wf)
}

/// Matched rectangular receiver: per-block tone projections followed by the
/// SFFT back to the delay-Doppler grid. Exact inverse of [`otfs_modulate`]
/// in the absence of a channel.
pub fn otfs_demodulate<T: Scalar>(
    rx: &SampledWaveform<T>,
    params: &OddmParams<T>,
) -> Result<DdGrid<T>> {
    let block = params.samples_per_t();
    let need = params.n * block;
    let zero_idx = (-rx.t0 * rx.fs).round().to_isize().ok_or_else(|| {
        OddmError::Domain("otfs_demodulate: rx origin out of range".into())
    })?;
    if zero_idx < 0 || rx.len() as isize - zero_idx < need as isize {
        return Err(OddmError::Domain(
            "otfs_demodulate: rx does not cover the N*T frame".into(),
        ));
    }
    let mut tf = TfGrid::zeros(params.n, params.m);
    let inv_block = T::from_usize(block).unwrap().recip();
    for k in 0..params.n {
        for l in 0..params.m {
            let psi = psi_index(l, params.m)?;
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..block {
                let turns = T::from_isize(psi).unwrap() * T::from_usize(i).unwrap()
                    / T::from_usize(block).unwrap();
                let s = rx.samples[(zero_idx as usize) + k * block + i];
                acc += s * unit_phase(-(turns - turns.floor()));
            }
            tf.set(k, l, acc * Complex::new(inv_block, T::zero()));
        }
    }
    Ok(sfft(&tf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_qam_grid, SeedStream};
    use num_complex::Complex64;

    fn desk() -> OddmParams<f64> {
        OddmParams::desk_scale()
    }

    #[test]
    fn isfft_of_impulse_is_flat() {
        let g = DdGrid::<f64>::delta(8, 4, 0, 0);
        let tf = isfft(&g);
        let want = 1.0 / (32.0f64).sqrt();
        for k in 0..4 {
            for l in 0..8 {
                assert!((tf.get(k, l) - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn isfft_unitary_roundtrip() {
        let mut rng = SeedStream::new(9).rng();
        let g = random_qam_grid::<f64>(8, 4, &mut rng);
        let tf = isfft(&g);
        assert!((tf.norm_sqr() - g.norm_sqr()).abs() < 1e-12);
        let back = sfft(&tf);
        assert!(back.nmse(&g).unwrap() < 1e-24);
    }

    #[test]
    fn single_tf_tone_block_is_rectangular() {
        let params = desk();
        // a constant DD grid ISFFTs to a delta at tf index (0, 0)
        let mut g = DdGrid::zeros(params.m, params.n);
        let c = 1.0 / ((params.m * params.n) as f64).sqrt();
        for m in 0..params.m {
            for n in 0..params.n {
                g.set(m, n, Complex64::new(c, 0.0));
            }
        }
        let wf = otfs_modulate(&g, &params).unwrap();
        assert_eq!(wf.len(), params.n * params.samples_per_t());
        let block = params.samples_per_t();
        for i in 0..block {
            assert!((wf.samples[i] - Complex64::new(1.0, 0.0)).norm() < 1e-9, "i={i}");
        }
        for s in &wf.samples[block..] {
            assert!(s.norm() < 1e-9);
        }
    }

    #[test]
    fn frame_duration_is_nt_and_energy_conserved() {
        let params = desk();
        let mut rng = SeedStream::new(10).rng();
        let g = random_qam_grid::<f64>(params.m, params.n, &mut rng);
        let wf = otfs_modulate(&g, &params).unwrap();
        assert_eq!(wf.len(), params.n * params.samples_per_t());
        let want = g.norm_sqr() * params.t;
        assert!((wf.energy() - want).abs() / want < 1e-9);
    }

    #[test]
    fn loopback_is_exact() {
        let params = desk();
        let mut rng = SeedStream::new(11).rng();
        let g = random_qam_grid::<f64>(params.m, params.n, &mut rng);
        let wf = otfs_modulate(&g, &params).unwrap();
        let back = otfs_demodulate(&wf, &params).unwrap();
        assert!(back.nmse(&g).unwrap() < 1e-20);
    }
}
