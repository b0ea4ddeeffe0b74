//! Ambiguity functions on the delay-Doppler grid, Gram matrices of basis
//! sets, and the offset-averaged orthogonality surface Lambda.
//!
//! All integrals are Riemann sums at the simulation rate. Delay offsets are
//! integer multiples of the delay resolution, which land exactly on sample
//! instants, so alignments introduce no interpolation error.

use num_complex::Complex;

use crate::params::{wrap, OddmParams, SampledWaveform};
use crate::{OddmError, Result, Scalar};

/// What a `(2M-1) x (2N-1)` delay-Doppler surface holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Auto-ambiguity of the DDOP.
    AutoU,
    /// Cross-ambiguity of the cyclically extended DDOP against the DDOP.
    CrossUceU,
    /// Offset-averaged Gram magnitudes of a basis family.
    GramLambda,
}

/// Surface over delay offsets `mbar in [-(M-1), M-1]` and Doppler offsets
/// `nbar in [-(N-1), N-1]`.
#[derive(Debug, Clone)]
pub struct AmbiguitySurface<T: Scalar> {
    values: Vec<Complex<T>>,
    m: usize,
    n: usize,
    pub kind: SurfaceKind,
}

impl<T: Scalar> AmbiguitySurface<T> {
    fn zeros(m: usize, n: usize, kind: SurfaceKind) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); (2 * m - 1) * (2 * n - 1)],
            m,
            n,
            kind,
        }
    }

    #[inline]
    fn idx(&self, mbar: isize, nbar: isize) -> usize {
        debug_assert!(mbar.unsigned_abs() < self.m && nbar.unsigned_abs() < self.n);
        (mbar + self.m as isize - 1) as usize * (2 * self.n - 1)
            + (nbar + self.n as isize - 1) as usize
    }

    #[inline]
    pub fn get(&self, mbar: isize, nbar: isize) -> Complex<T> {
        self.values[self.idx(mbar, nbar)]
    }

    fn set(&mut self, mbar: isize, nbar: isize, v: Complex<T>) {
        let i = self.idx(mbar, nbar);
        self.values[i] = v;
    }

    /// Magnitude in dB (`20 log10 |.|`), floored far below any physical level.
    pub fn mag_db(&self, mbar: isize, nbar: isize) -> T {
        let twenty = T::from_f64(20.0).unwrap();
        twenty * self.get(mbar, nbar).norm().max(T::from_f64(1e-300).unwrap()).log10()
    }

    /// Offset ranges, for iteration: `(M-1, N-1)`.
    pub fn half_extent(&self) -> (isize, isize) {
        (self.m as isize - 1, self.n as isize - 1)
    }

    /// Largest off-center magnitude and where it occurs.
    pub fn worst_off_center(&self) -> (T, isize, isize) {
        let (me, ne) = self.half_extent();
        let mut worst = (T::zero(), 0, 0);
        for mbar in -me..=me {
            for nbar in -ne..=ne {
                if mbar == 0 && nbar == 0 {
                    continue;
                }
                let v = self.get(mbar, nbar).norm();
                if v > worst.0 {
                    worst = (v, mbar, nbar);
                }
            }
        }
        worst
    }
}

/// Cross-ambiguity of two waveforms on the delay-Doppler grid:
/// `A(mbar*tau, nbar*F) = integral u1(t) u2*(t - mbar*tau)
/// e^{-j2pi nbar F (t - mbar*tau)} dt`.
pub fn ambiguity<T: Scalar>(
    u1: &SampledWaveform<T>,
    u2: &SampledWaveform<T>,
    params: &OddmParams<T>,
    kind: SurfaceKind,
) -> Result<AmbiguitySurface<T>> {
    if (u1.fs - u2.fs).abs() > T::from_f64(1e-9).unwrap() * u1.fs {
        return Err(OddmError::Mismatch("ambiguity: sample rates differ".into()));
    }
    let fs = u1.fs;
    let dt = u1.dt();
    let lag_step = params.ns as isize; // tau in samples
    let base_off = ((u2.t0 - u1.t0) * fs).round().to_isize().ok_or_else(|| {
        OddmError::Domain("ambiguity: waveform offset out of range".into())
    })?;
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    let fres = params.doppler_res();
    let tau = params.tau();
    let mut out = AmbiguitySurface::zeros(params.m, params.n, kind);

    let mut weighted = vec![Complex::new(T::zero(), T::zero()); u1.len()];
    for nbar in -(params.n as isize - 1)..params.n as isize {
        // u1(t) e^{-j2pi nbar F t} over u1's own grid, by rotation
        let w = -two_pi * T::from_isize(nbar).unwrap() * fres;
        let step_ang = w * dt;
        let step = Complex::new(step_ang.cos(), step_ang.sin());
        let mut ph = {
            let a0 = w * u1.t0;
            Complex::new(a0.cos(), a0.sin())
        };
        for (i, s) in u1.samples.iter().enumerate() {
            weighted[i] = *s * ph;
            ph *= step;
        }
        for mbar in -(params.m as isize - 1)..params.m as isize {
            // u2 sample index for u1 sample i is i - off
            let off = base_off + mbar * lag_step;
            let lo = off.max(0);
            let hi = (u2.len() as isize + off).min(u1.len() as isize);
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut i = lo;
            while i < hi {
                acc += weighted[i as usize] * u2.samples[(i - off) as usize].conj();
                i += 1;
            }
            // restore the e^{+j2pi nbar F mbar tau} reference
            let ang = two_pi
                * T::from_isize(nbar).unwrap()
                * fres
                * T::from_isize(mbar).unwrap()
                * tau;
            let twist = Complex::new(ang.cos(), ang.sin());
            out.set(mbar, nbar, acc * twist * Complex::new(dt, T::zero()));
        }
    }
    Ok(out)
}

/// Dense Gram matrix of a basis family over the listed `(m, n)` indices.
///
/// Entry `(i, j)` is the Riemann inner product of basis `i` against basis
/// `j`. The full `MN x MN` matrix is refused beyond desk scale unless
/// `force_full` is set; pass an explicit subset instead.
pub fn gram<T, F>(
    basis_fn: F,
    params: &OddmParams<T>,
    subset: Option<&[(usize, usize)]>,
    force_full: bool,
) -> Result<GramMatrix<T>>
where
    T: Scalar,
    F: Fn(usize, usize) -> Result<SampledWaveform<T>>,
{
    const FULL_GRAM_GUARD: usize = 1024;
    let indices: Vec<(usize, usize)> = match subset {
        Some(s) => {
            for &(m, n) in s {
                if m >= params.m || n >= params.n {
                    return Err(OddmError::Domain(format!(
                        "gram: subset index ({m}, {n}) out of range"
                    )));
                }
            }
            s.to_vec()
        }
        None => {
            let mn = params.m * params.n;
            if mn > FULL_GRAM_GUARD && !force_full {
                return Err(OddmError::Refused(format!(
                    "gram: full {mn}x{mn} Gram exceeds the desk-scale guard \
                     ({FULL_GRAM_GUARD}); pass a subset or force_full"
                )));
            }
            (0..params.m)
                .flat_map(|m| (0..params.n).map(move |n| (m, n)))
                .collect()
        }
    };
    let bases: Vec<SampledWaveform<T>> = indices
        .iter()
        .map(|&(m, n)| basis_fn(m, n))
        .collect::<Result<_>>()?;
    let k = bases.len();
    let mut values = vec![Complex::new(T::zero(), T::zero()); k * k];
    for i in 0..k {
        for j in i..k {
            let v = bases[i].inner(&bases[j])?;
            values[i * k + j] = v;
            values[j * k + i] = v.conj();
        }
    }
    Ok(GramMatrix { indices, values })
}

/// Gram matrix over an explicit index list.
#[derive(Debug, Clone)]
pub struct GramMatrix<T: Scalar> {
    pub indices: Vec<(usize, usize)>,
    /// Row-major `k x k` inner products.
    pub values: Vec<Complex<T>>,
}

impl<T: Scalar> GramMatrix<T> {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.dim() + j]
    }

    /// Worst deviation of the diagonal from one and largest off-diagonal
    /// magnitude.
    pub fn identity_residuals(&self) -> (T, T) {
        let k = self.dim();
        let mut diag = T::zero();
        let mut off = T::zero();
        for i in 0..k {
            for j in 0..k {
                let v = self.get(i, j);
                if i == j {
                    diag = diag.max((v - Complex::new(T::one(), T::zero())).norm());
                } else {
                    off = off.max(v.norm());
                }
            }
        }
        (diag, off)
    }
}

/// Offset-averaged orthogonality surface of a delay-invariant basis family:
/// `Lambda(mbar, nbar) = mean over anchors of |<phi_{m,n}, phi_{m+mbar,
/// n+nbar}>|`.
///
/// `bases` holds the family at delay bin 0 for every Doppler index; a basis
/// at delay `m` is the same waveform shifted by `m*tau`, so anchors over `m`
/// all produce the same magnitude and the average runs over the valid
/// Doppler anchors.
pub fn lambda_metric<T: Scalar>(
    bases: &[SampledWaveform<T>],
    params: &OddmParams<T>,
) -> Result<AmbiguitySurface<T>> {
    if bases.len() != params.n {
        return Err(OddmError::Mismatch(format!(
            "lambda_metric: need {} bases, got {}",
            params.n,
            bases.len()
        )));
    }
    let tau = params.tau();
    let mut out = AmbiguitySurface::zeros(params.m, params.n, SurfaceKind::GramLambda);
    for mbar in 0..params.m as isize {
        for nbar in -(params.n as isize - 1)..params.n as isize {
            let mut acc = T::zero();
            let mut count = 0usize;
            for n in 0..params.n as isize {
                let n_to = n + nbar;
                if n_to < 0 || n_to >= params.n as isize {
                    continue;
                }
                let mut shifted = bases[n_to as usize].clone();
                shifted.t0 += T::from_isize(mbar).unwrap() * tau;
                let v = bases[n as usize].inner(&shifted)?;
                acc += v.norm();
                count += 1;
            }
            if count == 0 {
                return Err(OddmError::Domain(
                    "lambda_metric: empty anchor class".into(),
                ));
            }
            let mean = acc / T::from_usize(count).unwrap();
            out.set(mbar, nbar, Complex::new(mean, T::zero()));
            out.set(-mbar, -nbar, Complex::new(mean, T::zero()));
        }
    }
    Ok(out)
}

/// Lambda surface of the approximate-digital basis family, computed through
/// the sub-pulse autocorrelation instead of waveform inner products.
///
/// The inner product of two digital bases collapses to
/// `(1/N) sum_d rho(d*M + mbar) e^{-j2pi n' d / N} sum_{k in range(d)}
/// e^{-j2pi (n'-n) k / N}` with `rho` the tap autocorrelation at delay-bin
/// lags, because every sub-pulse carries a fixed phase. This is an exact
/// rewrite of the Riemann sums [`lambda_metric`] evaluates (the unit tests
/// hold the two routes against each other), and it makes full-scale
/// surfaces affordable.
pub fn lambda_metric_digital<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &crate::pulse::ProtoPulse<T>,
) -> AmbiguitySurface<T> {
    let n_len = params.n;
    let m_len = params.m;
    let two_pi = T::PI() * T::from_f64(2.0).unwrap();
    // rho at delay-bin lags, symmetric in the lag
    let d_max = (2 * params.q) / m_len + 1;
    let rho: Vec<T> = (0..=(d_max + 1) * m_len)
        .map(|j| pulse.autocorr_at_lag(j * params.ns))
        .collect();
    // prefix sums of e^{-j2pi dn k / N} over k, per Doppler offset class dn
    let mut prefix = vec![Complex::new(T::zero(), T::zero()); n_len * (n_len + 1)];
    for dn in 0..n_len {
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..n_len {
            let ang = -two_pi * T::from_usize((dn * k) % n_len).unwrap()
                / T::from_usize(n_len).unwrap();
            acc += Complex::new(ang.cos(), ang.sin());
            prefix[dn * (n_len + 1) + k + 1] = acc;
        }
    }
    let inv_n = T::from_usize(n_len).unwrap().recip();
    let mut out = AmbiguitySurface::zeros(m_len, n_len, SurfaceKind::GramLambda);
    for mbar in 0..m_len as isize {
        for nbar in -(n_len as isize - 1)..n_len as isize {
            let dn = wrap(nbar, n_len);
            let mut acc = T::zero();
            let mut count = 0usize;
            for n in 0..n_len as isize {
                let n_to = n + nbar;
                if n_to < 0 || n_to >= n_len as isize {
                    continue;
                }
                let mut psi = Complex::new(T::zero(), T::zero());
                for d in -(d_max as isize)..=d_max as isize {
                    let lag = (d * m_len as isize + mbar).unsigned_abs();
                    if lag >= rho.len() {
                        continue;
                    }
                    let r = rho[lag];
                    if r == T::zero() {
                        continue;
                    }
                    let lo = (-d).max(0) as usize;
                    let hi = (n_len as isize - 1).min(n_len as isize - 1 - d) as usize;
                    if hi < lo {
                        continue;
                    }
                    let row = dn * (n_len + 1);
                    let dirichlet = prefix[row + hi + 1] - prefix[row + lo];
                    let ang = -two_pi
                        * T::from_usize((wrap(n_to, n_len) * wrap(d, n_len)) % n_len).unwrap()
                        / T::from_usize(n_len).unwrap();
                    psi += Complex::new(ang.cos(), ang.sin()) * dirichlet * r;
                }
                acc += psi.norm() * inv_n;
                count += 1;
            }
            let mean = acc / T::from_usize(count.max(1)).unwrap();
            out.set(mbar, nbar, Complex::new(mean, T::zero()));
            out.set(-mbar, -nbar, Complex::new(mean, T::zero()));
        }
    }
    out
}

/// Lambda surface of the direct (analog) basis family via the DDOP
/// ambiguity function.
///
/// A Gram entry of the continuous-phase multicarrier basis equals, up to a
/// unit phase, the ambiguity value at delay offset `mbar*tau` and Doppler
/// offset `(psi(n') - psi(n)) * F`. The symmetric index map makes that
/// Doppler argument either `nbar` or `nbar -/+ N` depending on the anchor,
/// so the surface averages the corresponding ambiguity magnitudes.
pub fn lambda_metric_analog<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &crate::pulse::ProtoPulse<T>,
) -> Result<AmbiguitySurface<T>> {
    let u = crate::pulse::build_ddop(params, pulse);
    let amb = ambiguity(&u.wf, &u.wf, params, SurfaceKind::GramLambda)?;
    let n_len = params.n as isize;
    let psi: Vec<isize> = (0..params.n)
        .map(|n| crate::psi_index(n, params.n).expect("validated params"))
        .collect();
    let mut out = AmbiguitySurface::zeros(params.m, params.n, SurfaceKind::GramLambda);
    for mbar in 0..params.m as isize {
        for nbar in -(n_len - 1)..n_len {
            let mut acc = T::zero();
            let mut count = 0usize;
            for n in 0..n_len {
                let n_to = n + nbar;
                if n_to < 0 || n_to >= n_len {
                    continue;
                }
                let dpsi = psi[n_to as usize] - psi[n as usize];
                acc += amb.get(mbar, dpsi).norm();
                count += 1;
            }
            let mean = acc / T::from_usize(count.max(1)).unwrap();
            out.set(mbar, nbar, Complex::new(mean, T::zero()));
            out.set(-mbar, -nbar, Complex::new(mean, T::zero()));
        }
    }
    Ok(out)
}

/// Build the `m = 0` digital basis family for [`lambda_metric`].
pub fn digital_basis_family<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &crate::pulse::ProtoPulse<T>,
) -> Result<Vec<SampledWaveform<T>>> {
    (0..params.n)
        .map(|n| crate::digital::digital_basis(0, n, params, pulse))
        .collect()
}

/// Build the `m = 0` analog basis family for [`lambda_metric`].
pub fn analog_basis_family<T: Scalar>(
    params: &OddmParams<T>,
    pulse: &crate::pulse::ProtoPulse<T>,
    generalized: bool,
) -> Result<Vec<SampledWaveform<T>>> {
    (0..params.n)
        .map(|n| crate::analog::analog_basis(0, n, params, pulse, generalized))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{build_ddop, build_ddop_ce_normalized, srrc_pulse};

    fn desk() -> OddmParams<f64> {
        OddmParams::desk_scale()
    }

    #[test]
    fn auto_ambiguity_center_and_floor() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let u = build_ddop(&params, &pulse);
        let surf = ambiguity(&u.wf, &u.wf, &params, SurfaceKind::AutoU).unwrap();
        assert!((surf.get(0, 0).norm() - 1.0).abs() < 1e-3);
        let (worst, mb, nb) = surf.worst_off_center();
        assert!(worst < 1e-2, "worst off-center {worst:.2e} at ({mb},{nb})");
    }

    #[test]
    fn ambiguity_magnitude_symmetry() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let u = build_ddop(&params, &pulse);
        let surf = ambiguity(&u.wf, &u.wf, &params, SurfaceKind::AutoU).unwrap();
        let (me, ne) = surf.half_extent();
        for mbar in -me..=me {
            for nbar in -ne..=ne {
                let a = surf.get(mbar, nbar).norm();
                let b = surf.get(-mbar, -nbar).norm();
                // equal up to rounding noise, absolute near empty cells
                assert!(
                    (a - b).abs() <= 1e-12 * a.max(b) + 1e-15,
                    "({mbar},{nbar}): {a:.3e} vs {b:.3e}"
                );
            }
        }
    }

    #[test]
    fn cross_ambiguity_long_subpulse_is_deeply_orthogonal() {
        let params = desk().with_ta_factor(10.0).unwrap();
        let pulse = srrc_pulse(&params);
        // align the DDOP with the extended train's body (its first D
        // sub-pulses are the cyclic prefix)
        let mut u = build_ddop(&params, &pulse);
        u.wf.t0 += params.d_span() as f64 * params.t;
        let uce = build_ddop_ce_normalized(&params, &pulse);
        let surf = ambiguity(&uce.wf, &u.wf, &params, SurfaceKind::CrossUceU).unwrap();
        let (worst, mb, nb) = surf.worst_off_center();
        assert!(worst < 1e-4, "worst {worst:.2e} at ({mb},{nb})");
        // Doppler-offset rows cancel through full geometric sums
        let (me, ne) = surf.half_extent();
        let mut doppler_worst = 0.0f64;
        for mbar in -me..=me {
            for nbar in -ne..=ne {
                if nbar != 0 {
                    doppler_worst = doppler_worst.max(surf.get(mbar, nbar).norm());
                }
            }
        }
        assert!(doppler_worst < 1e-7, "doppler rows {doppler_worst:.2e}");
    }

    #[test]
    fn gram_identity_for_digital_basis_subset() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let subset: Vec<(usize, usize)> =
            vec![(0, 0), (0, 1), (1, 0), (3, 7), (12, 15), (31, 8), (5, 5)];
        let g = gram(
            |m, n| crate::digital::digital_basis(m, n, &params, &pulse),
            &params,
            Some(&subset),
            false,
        )
        .unwrap();
        let (diag, off) = g.identity_residuals();
        assert!(diag < 1e-3, "diag residual {diag:.2e}");
        assert!(off < 1e-2, "off-diagonal {off:.2e}");
    }

    #[test]
    fn gram_single_element_is_unit_energy() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let g = gram(
            |m, n| crate::digital::digital_basis(m, n, &params, &pulse),
            &params,
            Some(&[(4, 2)]),
            false,
        )
        .unwrap();
        assert_eq!(g.dim(), 1);
        assert!((g.get(0, 0).re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gram_full_scale_guard() {
        let params = OddmParams::<f64>::full_scale();
        let pulse = srrc_pulse(&params);
        let err = gram(
            |m, n| crate::digital::digital_basis(m, n, &params, &pulse),
            &params,
            None,
            false,
        )
        .unwrap_err();
        assert!(matches!(err, OddmError::Refused(_)));
    }

    #[test]
    fn gram_positive_semidefinite() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let subset: Vec<(usize, usize)> = (0..6)
            .flat_map(|m| (0..4).map(move |n| (m * 5, n * 4)))
            .collect();
        let g = gram(
            |m, n| crate::digital::digital_basis(m, n, &params, &pulse),
            &params,
            Some(&subset),
            false,
        )
        .unwrap();
        // G + 1e-8 I admitting a Cholesky factorization bounds the minimum
        // eigenvalue below by -1e-8
        let k = g.dim();
        let mut a = g.values.clone();
        for i in 0..k {
            a[i * k + i] += num_complex::Complex64::new(1e-8, 0.0);
        }
        assert!(crate::linalg::cholesky(&mut a, k).is_ok());
    }

    #[test]
    fn lambda_center_is_one_and_floors_track_subpulse_span() {
        let params = desk();
        let pulse = srrc_pulse(&params);
        let fam = digital_basis_family(&params, &pulse).unwrap();
        let lam = lambda_metric(&fam, &params).unwrap();
        assert!((lam.get(0, 0).re - 1.0).abs() < 1e-3);
        let long = desk().with_ta_factor(10.0).unwrap();
        let pl = srrc_pulse(&long);
        let fam_l = digital_basis_family(&long, &pl).unwrap();
        let lam_l = lambda_metric(&fam_l, &long).unwrap();
        assert!((lam_l.get(0, 0).re - 1.0).abs() < 1e-3);
        let (worst, _, _) = lam_l.worst_off_center();
        assert!(worst < 1e-4, "Ta=10T worst off-center {worst:.2e}");
    }

    #[test]
    fn lambda_digital_reduction_matches_direct_inner_products() {
        for ta in [0.5, 2.5] {
            let params = desk().with_ta_factor(ta).unwrap();
            let pulse = srrc_pulse(&params);
            let direct =
                lambda_metric(&digital_basis_family(&params, &pulse).unwrap(), &params).unwrap();
            let fast = lambda_metric_digital(&params, &pulse);
            let (me, ne) = direct.half_extent();
            for mbar in -me..=me {
                for nbar in -ne..=ne {
                    let a = direct.get(mbar, nbar).re;
                    let b = fast.get(mbar, nbar).re;
                    assert!(
                        (a - b).abs() < 1e-10 * a.max(b).max(1e-3),
                        "ta={ta} ({mbar},{nbar}): direct {a:.3e} fast {b:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_analog_reduction_matches_direct_inner_products() {
        let params = desk().with_ta_factor(0.5).unwrap();
        let pulse = srrc_pulse(&params);
        let direct =
            lambda_metric(&analog_basis_family(&params, &pulse, false).unwrap(), &params).unwrap();
        let fast = lambda_metric_analog(&params, &pulse).unwrap();
        let (me, ne) = direct.half_extent();
        for mbar in -me..=me {
            for nbar in -ne..=ne {
                let a = direct.get(mbar, nbar).re;
                let b = fast.get(mbar, nbar).re;
                assert!(
                    (a - b).abs() < 1e-9 * a.max(b).max(1e-3),
                    "({mbar},{nbar}): direct {a:.3e} ambiguity {b:.3e}"
                );
            }
        }
    }

    #[test]
    fn lambda_analog_and_digital_similar_at_short_subpulse() {
        let params = desk().with_ta_factor(0.3).unwrap();
        let pulse = srrc_pulse(&params);
        let lam_d = lambda_metric(&digital_basis_family(&params, &pulse).unwrap(), &params).unwrap();
        let lam_a =
            lambda_metric(&analog_basis_family(&params, &pulse, false).unwrap(), &params).unwrap();
        let (me, ne) = lam_d.half_extent();
        for mbar in -me..=me {
            for nbar in -ne..=ne {
                let d = lam_d.get(mbar, nbar).re;
                let a = lam_a.get(mbar, nbar).re;
                if d.max(a) > 10f64.powf(-50.0 / 20.0) {
                    let ratio_db = 20.0 * (d / a).abs().log10();
                    assert!(
                        ratio_db.abs() <= 6.0,
                        "({mbar},{nbar}): digital {d:.2e} analog {a:.2e}"
                    );
                }
            }
        }
    }
}
