//! Frame parameters, the delay-Doppler symbol grid, sampled waveforms, and
//! the index arithmetic used throughout the crate.
//!
//! A frame carries `M * N` symbols inside bandwidth `M/T` and duration `N*T`.
//! The fine resolutions are `tau = T/M` in delay and `doppler_res = 1/(N*T)`
//! in Doppler; everything downstream (pulses, modems, channels) is built on
//! those two quantities.

use num_complex::Complex;

use crate::{OddmError, Result, Scalar};

/// Wrap `n` into `[0, modulus)`. Internal fast path; `modulus >= 1`.
#[inline]
pub(crate) fn wrap(n: isize, modulus: usize) -> usize {
    let m = modulus as isize;
    (((n % m) + m) % m) as usize
}

/// Modulo-`n_mod` reduction into `[0, n_mod)`.
pub fn mod_index(n: isize, n_mod: usize) -> Result<usize> {
    if n_mod == 0 {
        return Err(OddmError::Domain("mod_index: modulus must be >= 1".into()));
    }
    Ok(wrap(n, n_mod))
}

/// Reverse of the modulo map: send `n in [0, n_mod)` to `[-n_mod/2, n_mod/2)`.
///
/// `n_mod` must be even so the two halves are symmetric.
pub fn psi_index(n: usize, n_mod: usize) -> Result<isize> {
    if n_mod == 0 || !n_mod.is_multiple_of(2) {
        return Err(OddmError::Domain(format!(
            "psi_index: modulus must be positive and even, got {n_mod}"
        )));
    }
    if n >= n_mod {
        return Err(OddmError::Domain(format!(
            "psi_index: index {n} out of range [0, {n_mod})"
        )));
    }
    Ok(if n < n_mod / 2 {
        n as isize
    } else {
        n as isize - n_mod as isize
    })
}

/// Frame and pulse parameters plus their derived resolutions.
///
/// Immutable after construction; `new` validates every invariant once so the
/// rest of the crate can rely on them.
#[derive(Debug, Clone, PartialEq)]
pub struct OddmParams<T: Scalar> {
    /// Delay bins per frame.
    pub m: usize,
    /// Doppler bins per frame (even).
    pub n: usize,
    /// Symbol interval in seconds; subcarrier spacing is `1/(n*t)`.
    pub t: T,
    /// Sub-pulse half-span in delay bins; the sub-pulse lasts `2*q*t/m`.
    pub q: usize,
    /// Excess-bandwidth roll-off in `[0, 1]`.
    pub beta: T,
    /// Oversampling factor per delay bin.
    pub ns: usize,
    /// Cyclic-prefix length in delay bins, `< m`.
    pub lcp: usize,
}

impl<T: Scalar> OddmParams<T> {
    pub fn new(m: usize, n: usize, t: T, q: usize, beta: T, ns: usize, lcp: usize) -> Result<Self> {
        let mut problems = Vec::new();
        if m == 0 {
            problems.push("m must be >= 1".to_string());
        }
        if n == 0 || !n.is_multiple_of(2) {
            problems.push(format!("n must be positive and even, got {n}"));
        }
        if !(t > T::zero()) {
            problems.push("t must be > 0".to_string());
        }
        if q == 0 {
            problems.push("q must be >= 1".to_string());
        }
        if beta < T::zero() || beta > T::one() {
            problems.push("beta must lie in [0, 1]".to_string());
        }
        if ns < 4 {
            problems.push(format!("ns must be >= 4 for sidelobe fidelity, got {ns}"));
        }
        if m > 0 && lcp >= m {
            problems.push(format!("lcp must be < m, got lcp={lcp}, m={m}"));
        }
        if problems.is_empty() {
            Ok(Self { m, n, t, q, beta, ns, lcp })
        } else {
            Err(OddmError::Config(problems))
        }
    }

    /// Full-scale preset: M=128, N=32, T=1/15 kHz, beta=0.15, Ta ~ 0.3T.
    pub fn full_scale() -> Self {
        Self::new(
            128,
            32,
            T::one() / T::from_f64(15_000.0).unwrap(),
            20,
            T::from_f64(0.15).unwrap(),
            8,
            16,
        )
        .expect("full-scale preset is valid")
    }

    /// Desk-scale preset used by fast tests: M=32, N=16, Q=8, Ns=8.
    pub fn desk_scale() -> Self {
        Self::new(
            32,
            16,
            T::one() / T::from_f64(15_000.0).unwrap(),
            8,
            T::from_f64(0.15).unwrap(),
            8,
            4,
        )
        .expect("desk-scale preset is valid")
    }

    /// Same parameters with a different sub-pulse half-span.
    pub fn with_q(&self, q: usize) -> Result<Self> {
        Self::new(self.m, self.n, self.t, q, self.beta, self.ns, self.lcp)
    }

    /// Same parameters with `ta = factor * t`, i.e. `q = ceil(factor * m / 2)`.
    pub fn with_ta_factor(&self, factor: T) -> Result<Self> {
        let q = (factor * T::from_usize(self.m).unwrap() / T::from_f64(2.0).unwrap())
            .ceil()
            .to_usize()
            .ok_or_else(|| OddmError::Domain("ta factor out of range".into()))?;
        self.with_q(q.max(1))
    }

    /// Same parameters with a different CP length.
    pub fn with_lcp(&self, lcp: usize) -> Result<Self> {
        Self::new(self.m, self.n, self.t, self.q, self.beta, self.ns, lcp)
    }

    /// Delay resolution `T/M` in seconds.
    #[inline]
    pub fn tau(&self) -> T {
        self.t / T::from_usize(self.m).unwrap()
    }

    /// Doppler resolution `1/(N*T)` in Hz.
    #[inline]
    pub fn doppler_res(&self) -> T {
        (T::from_usize(self.n).unwrap() * self.t).recip()
    }

    /// Simulation sample rate `Ns*M/T` in samples per second.
    #[inline]
    pub fn sample_rate(&self) -> T {
        T::from_usize(self.ns * self.m).unwrap() / self.t
    }

    /// Simulation sample spacing in seconds.
    #[inline]
    pub fn dt(&self) -> T {
        self.tau() / T::from_usize(self.ns).unwrap()
    }

    /// Sub-pulse duration `2*Q*T/M` in seconds.
    #[inline]
    pub fn ta(&self) -> T {
        T::from_usize(2 * self.q).unwrap() * self.tau()
    }

    /// Number of symbol intervals covered by one sub-pulse, `ceil(Ta/T)`.
    #[inline]
    pub fn d_span(&self) -> usize {
        // ta/t = 2q/m exactly, so stay in integer arithmetic.
        (2 * self.q).div_ceil(self.m)
    }

    /// Cyclic-prefix duration `Lcp*T/M` in seconds.
    #[inline]
    pub fn t_cp(&self) -> T {
        T::from_usize(self.lcp).unwrap() * self.tau()
    }

    /// Samples per symbol interval `T` (an integer by construction).
    #[inline]
    pub fn samples_per_t(&self) -> usize {
        self.m * self.ns
    }
}

/// `M x N` complex delay-Doppler symbol grid, indexed `[delay, doppler]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DdGrid<T: Scalar> {
    values: Vec<Complex<T>>,
    m: usize,
    n: usize,
    /// Mean symbol energy of the constellation the grid was drawn from.
    pub es: T,
}

impl<T: Scalar> DdGrid<T> {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self { values: vec![Complex::new(T::zero(), T::zero()); m * n], m, n, es: T::one() }
    }

    /// Grid with a single unit entry at `(m_idx, n_idx)`.
    pub fn delta(m: usize, n: usize, m_idx: usize, n_idx: usize) -> Self {
        let mut g = Self::zeros(m, n);
        g.set(m_idx, n_idx, Complex::new(T::one(), T::zero()));
        g
    }

    pub fn from_values(values: Vec<Complex<T>>, m: usize, n: usize) -> Result<Self> {
        if values.len() != m * n {
            return Err(OddmError::Mismatch(format!(
                "grid storage has {} entries, expected {}x{}",
                values.len(),
                m,
                n
            )));
        }
        Ok(Self { values, m, n, es: T::one() })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.values[m * self.n + n]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, v: Complex<T>) {
        self.values[m * self.n + n] = v;
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    /// Flattened copy in delay-major order, `v[m*N + n]`.
    pub fn to_vec(&self) -> Vec<Complex<T>> {
        self.values.clone()
    }

    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Normalized mean-square error of `self` against a reference grid.
    pub fn nmse(&self, reference: &Self) -> Result<T> {
        if self.m != reference.m || self.n != reference.n {
            return Err(OddmError::Mismatch("grid dimensions differ".into()));
        }
        let err: T = self
            .values
            .iter()
            .zip(reference.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den = reference.norm_sqr();
        if den == T::zero() {
            return Err(OddmError::Domain("nmse: reference grid is all zero".into()));
        }
        Ok(err / den)
    }

    pub fn assert_dims(&self, params: &OddmParams<T>) -> Result<()> {
        if self.m != params.m || self.n != params.n {
            return Err(OddmError::Mismatch(format!(
                "grid is {}x{}, params expect {}x{}",
                self.m, self.n, params.m, params.n
            )));
        }
        Ok(())
    }
}

/// Gray-coded 4-QAM map: two bits per symbol, unit average energy.
///
/// Bit pair `(b0, b1)` maps to `((1-2*b0) + j(1-2*b1)) / sqrt(2)`, so `00`
/// lands on `(+1+j)/sqrt(2)`.
pub fn qam_map<T: Scalar>(bits: &[u8], m: usize, n: usize) -> Result<DdGrid<T>> {
    if bits.len() != 2 * m * n {
        return Err(OddmError::Domain(format!(
            "qam_map: need {} bits for a {}x{} grid, got {}",
            2 * m * n,
            m,
            n,
            bits.len()
        )));
    }
    let half = T::from_f64(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let level = |b: u8| if b == 0 { half } else { -half };
    let values = bits
        .chunks_exact(2)
        .map(|p| Complex::new(level(p[0]), level(p[1])))
        .collect();
    DdGrid::from_values(values, m, n)
}

/// Hard 4-QAM decisions back to bits; exact inverse of [`qam_map`] on
/// constellation points.
pub fn qam_demap<T: Scalar>(grid: &DdGrid<T>) -> Vec<u8> {
    let mut bits = Vec::with_capacity(2 * grid.m() * grid.n());
    for v in grid.values() {
        bits.push(if v.re >= T::zero() { 0 } else { 1 });
        bits.push(if v.im >= T::zero() { 0 } else { 1 });
    }
    bits
}

/// Uniformly sampled complex baseband signal.
///
/// `t0` is the absolute time of sample 0 and may be negative (cyclic-prefix
/// region, pulse pre-ring). All waveforms in one simulation share the sample
/// rate `fs`, and every time origin is an integer number of samples, which
/// keeps alignments exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform<T: Scalar> {
    pub samples: Vec<Complex<T>>,
    /// Samples per second.
    pub fs: T,
    /// Time of sample index 0, in seconds.
    pub t0: T,
}

impl<T: Scalar> SampledWaveform<T> {
    pub fn zeros(len: usize, fs: T, t0: T) -> Self {
        Self { samples: vec![Complex::new(T::zero(), T::zero()); len], fs, t0 }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.fs.recip()
    }

    /// Absolute time of sample `i`.
    #[inline]
    pub fn time_of(&self, i: usize) -> T {
        self.t0 + T::from_usize(i).unwrap() / self.fs
    }

    /// Sample index holding absolute time `t`, if `t` lies on the grid.
    pub fn index_of_time(&self, t: T) -> Option<isize> {
        let x = (t - self.t0) * self.fs;
        let r = x.round();
        if (x - r).abs() < T::from_f64(1e-6).unwrap() {
            r.to_isize()
        } else {
            None
        }
    }

    /// Signal energy as a Riemann sum.
    pub fn energy(&self) -> T {
        let sum: T = self.samples.iter().map(|s| s.norm_sqr()).sum();
        sum * self.dt()
    }

    /// Riemann inner product `integral self * conj(other) dt`, aligning the
    /// two waveforms on their shared absolute time grid.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if (self.fs - other.fs).abs() > T::from_f64(1e-9).unwrap() * self.fs {
            return Err(OddmError::Mismatch("inner: sample rates differ".into()));
        }
        let off = ((other.t0 - self.t0) * self.fs).round();
        let off = off
            .to_isize()
            .ok_or_else(|| OddmError::Domain("inner: offset out of range".into()))?;
        let mut acc = Complex::new(T::zero(), T::zero());
        let lo = off.max(0) as usize;
        let hi = (other.len() as isize + off).min(self.len() as isize);
        if hi <= lo as isize {
            return Ok(acc);
        }
        for i in lo..hi as usize {
            acc += self.samples[i] * other.samples[(i as isize - off) as usize].conj();
        }
        Ok(acc * Complex::new(self.dt(), T::zero()))
    }

    /// Add `other` into `self` at its own time offset, growing nothing:
    /// samples of `other` outside `self` are an error.
    pub fn accumulate(&mut self, other: &Self) -> Result<()> {
        let off = ((other.t0 - self.t0) * self.fs).round();
        let off = off
            .to_isize()
            .ok_or_else(|| OddmError::Domain("accumulate: offset out of range".into()))?;
        if off < 0 || off as usize + other.len() > self.len() {
            return Err(OddmError::Mismatch("accumulate: other waveform exceeds buffer".into()));
        }
        let off = off as usize;
        for (i, s) in other.samples.iter().enumerate() {
            self.samples[off + i] += *s;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn mod_index_wraps() {
        assert_eq!(mod_index(-1, 8).unwrap(), 7);
        assert_eq!(mod_index(5, 8).unwrap(), 5);
        assert_eq!(mod_index(19, 8).unwrap(), 3);
        assert!(mod_index(3, 0).is_err());
    }

    #[test]
    fn psi_index_symmetric_halves() {
        // psi(N/4) = N/4 and psi(3N/4) = -N/4
        let n_mod = 32;
        assert_eq!(psi_index(n_mod / 4, n_mod).unwrap(), n_mod as isize / 4);
        assert_eq!(psi_index(3 * n_mod / 4, n_mod).unwrap(), -(n_mod as isize) / 4);
        assert_eq!(psi_index(0, 8).unwrap(), 0);
        assert!(psi_index(8, 8).is_err());
        assert!(psi_index(0, 7).is_err());
    }

    #[test]
    fn psi_mod_roundtrip_bijection() {
        let n_mod = 16;
        let mut seen = std::collections::HashSet::new();
        for n in 0..n_mod {
            let p = psi_index(n, n_mod).unwrap();
            assert!((-(n_mod as isize) / 2..n_mod as isize / 2).contains(&p));
            assert_eq!(mod_index(p, n_mod).unwrap(), n);
            seen.insert(p);
        }
        assert_eq!(seen.len(), n_mod);
    }

    #[test]
    fn qam_roundtrip_all_points() {
        let bits: Vec<u8> = vec![0, 0, 0, 1, 1, 0, 1, 1];
        let grid = qam_map::<f64>(&bits, 2, 2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(grid.get(0, 0), Complex64::new(s, s));
        assert_eq!(grid.get(0, 1), Complex64::new(s, -s));
        assert_eq!(grid.get(1, 0), Complex64::new(-s, s));
        assert_eq!(grid.get(1, 1), Complex64::new(-s, -s));
        assert_eq!(qam_demap(&grid), bits);
    }

    #[test]
    fn qam_unit_mean_power() {
        let bits: Vec<u8> = (0..2 * 8 * 4).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let grid = qam_map::<f64>(&bits, 8, 4).unwrap();
        let p = grid.norm_sqr() / (8.0 * 4.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qam_bit_count_checked() {
        assert!(qam_map::<f64>(&[0, 1, 0], 2, 2).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(OddmParams::<f64>::new(0, 16, 1.0, 5, 0.15, 8, 0).is_err());
        assert!(OddmParams::<f64>::new(32, 15, 1.0, 5, 0.15, 8, 0).is_err());
        assert!(OddmParams::<f64>::new(32, 16, 1.0, 5, 1.5, 8, 0).is_err());
        assert!(OddmParams::<f64>::new(32, 16, 1.0, 5, 0.15, 2, 0).is_err());
        assert!(OddmParams::<f64>::new(32, 16, 1.0, 5, 0.15, 8, 32).is_err());
        let p = OddmParams::<f64>::new(32, 16, 1.0, 5, 0.15, 8, 4).unwrap();
        assert_eq!(p.d_span(), 1);
        assert_eq!(p.with_ta_factor(10.0).unwrap().q, 160);
        assert_eq!(p.with_ta_factor(10.0).unwrap().d_span(), 10);
        assert_eq!(p.with_ta_factor(0.3).unwrap().q, 5);
    }

    #[test]
    fn waveform_inner_alignment() {
        let fs = 8.0;
        let mut a = SampledWaveform::<f64>::zeros(16, fs, 0.0);
        let mut b = SampledWaveform::<f64>::zeros(8, fs, 0.5);
        a.samples[4] = Complex64::new(1.0, 0.0);
        b.samples[0] = Complex64::new(0.0, -2.0); // same absolute time as a[4]
        let ip = a.inner(&b).unwrap();
        assert!((ip - Complex64::new(0.0, 2.0) / 8.0).norm() < 1e-12);
    }

    #[test]
    fn waveform_accumulate_offsets() {
        let fs = 4.0;
        let mut frame = SampledWaveform::<f64>::zeros(12, fs, -1.0);
        let mut part = SampledWaveform::<f64>::zeros(2, fs, 0.0);
        part.samples[0] = Complex64::new(1.0, 0.0);
        frame.accumulate(&part).unwrap();
        assert_eq!(frame.samples[4], Complex64::new(1.0, 0.0));
        let far = SampledWaveform::<f64>::zeros(20, fs, 0.0);
        assert!(frame.accumulate(&far).is_err());
    }
}
