//! Hermitian eigenvalues by cyclic Jacobi rotations.
//!
//! A Hermitian `H = X + iY` has the same spectrum (each value doubled) as the
//! real symmetric `[[X, -Y], [Y, X]]`, which is what gets diagonalized.

use alloc::vec;
use alloc::vec::Vec;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tol::INVARIANT;

const MAX_SWEEPS: usize = 100;

fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if !h.is_hermitian(INVARIANT) {
        return Err(Error::Argument(
            "eigenvalues requested for a non-Hermitian matrix".into(),
        ));
    }
    let n = h.rows();
    let m = 2 * n;
    let mut real = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            real[r * m + c] = z.re;
            real[(r + n) * m + c + n] = z.re;
            real[r * m + c + n] = -z.im;
            real[(r + n) * m + c] = z.im;
        }
    }
    let mut values = symmetric_eigenvalues(real, m);
    values.sort_by(f64::total_cmp);
    Ok(values
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect())
}

/// Hermitian with smallest eigenvalue at least `-tol`.
pub fn is_positive_semidefinite(h: &ComplexMatrix, tol: f64) -> bool {
    hermitian_eigenvalues(h)
        .map(|v| v.first().is_some_and(|&min| min >= -tol))
        .unwrap_or(false)
}

/// Number of eigenvalues of a Hermitian matrix larger than `tol` in modulus.
pub fn numerical_rank(h: &ComplexMatrix, tol: f64) -> Result<usize> {
    Ok(hermitian_eigenvalues(h)?
        .into_iter()
        .filter(|v| v.abs() > tol)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn pauli_spectra() {
        let sy = ComplexMatrix::new(
            2,
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let v = hermitian_eigenvalues(&sy).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        let sx = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let v = hermitian_eigenvalues(&sx).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn known_three_by_three_spectrum() {
        // Tridiagonal 2,-1 matrix: eigenvalues 2 - 2cos(kπ/4), k = 1..3.
        let m = ComplexMatrix::from_real(3, 3, &[2., -1., 0., -1., 2., -1., 0., -1., 2.]).unwrap();
        let v = hermitian_eigenvalues(&m).unwrap();
        let pi = core::f64::consts::PI;
        for (k, got) in v.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * pi / 4.0).cos();
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn rank_and_positivity() {
        let psi = ComplexMatrix::column(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let rho = psi.outer();
        assert_eq!(numerical_rank(&rho, 1e-10).unwrap(), 1);
        assert!(is_positive_semidefinite(&rho, 1e-10));
        let neg = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -0.5]).unwrap();
        assert!(!is_positive_semidefinite(&neg, 1e-10));
        let not_h = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(hermitian_eigenvalues(&not_h).is_err());
        assert_eq!(
            hermitian_eigenvalues(&ComplexMatrix::zeros(2, 2)).unwrap(),
            [0.0, 0.0]
        );
    }
}
