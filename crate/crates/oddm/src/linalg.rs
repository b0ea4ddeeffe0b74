//! Minimal dense complex linear algebra: Hermitian Cholesky factorization
//! and solves, sized for grids up to a few thousand unknowns.

use num_complex::Complex;

use crate::{OddmError, Result, Scalar};

/// In-place lower Cholesky of a Hermitian positive-definite matrix stored
/// row-major. Fails on a non-positive pivot.
pub(crate) fn cholesky<T: Scalar>(a: &mut [Complex<T>], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if d <= T::zero() || !d.is_finite() {
            return Err(OddmError::Solver(format!(
                "cholesky: non-positive pivot at column {j}"
            )));
        }
        let d = d.sqrt();
        a[j * n + j] = Complex::new(d, T::zero());
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / d;
        }
    }
    // zero the strict upper triangle so the factor is self-contained
    for i in 0..n {
        for j in i + 1..n {
            a[i * n + j] = Complex::new(T::zero(), T::zero());
        }
    }
    Ok(())
}

/// Solve `L L^H x = b` given the Cholesky factor `L`.
pub(crate) fn cholesky_solve<T: Scalar>(l: &[Complex<T>], n: usize, b: &mut [Complex<T>]) {
    // forward: L y = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i].re;
    }
    // backward: L^H x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i].conj() * b[k];
        }
        b[i] = s / l[i * n + i].re;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solves_small_hermitian_system() {
        // A = B^H B + I is Hermitian positive definite
        let n = 4;
        let b: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.51).cos()))
            .collect();
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += b[k * n + i].conj() * b[k * n + j];
                }
                a[i * n + j] = s + if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            }
        }
        let x_true: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(i as f64 + 1.0, -(i as f64))).collect();
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                rhs[i] += a[i * n + j] * x_true[j];
            }
        }
        let mut l = a.clone();
        cholesky(&mut l, n).unwrap();
        cholesky_solve(&l, n, &mut rhs);
        for i in 0..n {
            assert!((rhs[i] - x_true[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(cholesky(&mut a, 2).is_err());
    }
}
