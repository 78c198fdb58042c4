//! Dense complex linear algebra over labelled tensor factors.
//!
//! Everything in the crate is small (the largest physical system is the
//! 36-dimensional particle–device register), so matrices are dense and
//! row-major. Column vectors are `n × 1` matrices.

mod eigen;
mod layout;
mod tensor;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

use crate::error::{Error, Result};
use crate::tol::DEFAULT_MAX_ENTRIES;

pub use eigen::{hermitian_eigenvalues, is_positive_semidefinite, numerical_rank};
pub use layout::{Factor, SubsystemLayout};
pub use tensor::{
    apply_to_density, apply_to_vector, embed_operator, partial_trace, permute_density,
    permute_vector,
};

pub type C64 = num_complex::Complex64;

/// Dense, row-major complex matrix with finite entries.
#[derive(Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    #[cfg_attr(feature = "serde", serde(serialize_with = "serialize_entries"))]
    data: Vec<C64>,
}

#[cfg(feature = "serde")]
fn serialize_entries<S: serde::Serializer>(
    data: &[C64],
    s: S,
) -> core::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(data.len()))?;
    for z in data {
        seq.serialize_element(&(z.re, z.im))?;
    }
    seq.end()
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(alloc::format!(
                "{rows}x{cols} matrix has no entries"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(alloc::format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real entries in row-major order.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Column vector (ket).
    pub fn column(data: Vec<C64>) -> Result<Self> {
        let n = data.len();
        Self::new(n, 1, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Standard basis ket `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut m = Self::zeros(dim, 1);
        m.data[index] = C64::new(1.0, 0.0);
        m
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_column(&self) -> bool {
        self.cols == 1
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Option<C64> {
        (row < self.rows && col < self.cols).then(|| self.data[row * self.cols + col])
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.data[r * self.cols + c].conj());
            }
        }
        Self::from_raw(self.cols, self.rows, data)
    }

    /// Kronecker product `self ⊗ other` under the default entry cap.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.kron_capped(other, DEFAULT_MAX_ENTRIES)
    }

    /// Kronecker product refusing results with more than `cap` entries.
    pub fn kron_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let rows = self.rows.checked_mul(other.rows);
        let cols = self.cols.checked_mul(other.cols);
        let entries = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c));
        let (rows, cols) = match (rows, cols, entries) {
            (Some(r), Some(c), Some(n)) if n <= cap => (r, c),
            _ => {
                return Err(Error::Dimension {
                    requested: entries.unwrap_or(usize::MAX),
                    cap,
                })
            }
        };
        let mut data = vec![C64::new(0.0, 0.0); rows * cols];
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self.data[ar * self.cols + ac];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for br in 0..other.rows {
                    let row = ar * other.rows + br;
                    for bc in 0..other.cols {
                        let col = ac * other.cols + bc;
                        data[row * cols + col] = a * other.data[br * other.cols + bc];
                    }
                }
            }
        }
        Ok(Self::from_raw(rows, cols, data))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut data = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &mut data[r * other.cols..(r + 1) * other.cols];
                for (out, b) in row
                    .iter_mut()
                    .zip(&other.data[k * other.cols..(k + 1) * other.cols])
                {
                    *out += a * b;
                }
            }
        }
        Ok(Self::from_raw(self.rows, other.cols, data))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(alloc::format!(
                "{}x{} and {}x{} differ in shape",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    /// Outer product `|self⟩⟨self|` of a column vector.
    pub fn outer(&self) -> Self {
        let n = self.data.len();
        let mut data = Vec::with_capacity(n * n);
        for a in &self.data {
            for b in &self.data {
                data.push(a * b.conj());
            }
        }
        Self::from_raw(n, n, data)
    }

    /// Inner product `⟨self|other⟩` of two equally long vectors, treating all
    /// entries as one flat vector.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.data.len() != other.data.len() {
            return Err(Error::Shape(alloc::format!(
                "inner product of lengths {} and {}",
                self.data.len(),
                other.data.len()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Frobenius norm (the 2-norm for vectors).
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Largest entrywise modulus of `self − other`; infinite when the shapes
    /// differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.approx_eq(&self.dagger(), tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .matmul(&self.dagger())
                .map(|p| p.approx_eq(&Self::identity(self.rows), tol))
                .unwrap_or(false)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (row, col): (usize, usize)) -> &C64 {
        assert!(
            row < self.rows && col < self.cols,
            "index ({row}, {col}) out of range"
        );
        &self.data[row * self.cols + col]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            f.write_str("  ")?;
            for c in 0..self.cols {
                let z = self.data[r * self.cols + c];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            ComplexMatrix::new(0, 2, vec![]),
            Err(Error::Shape(_))
        ));
        let err = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(0.0, 0.0), c(f64::NAN, 0.0), c(0.0, 0.0)],
        );
        assert_eq!(err, Err(Error::NonFinite { row: 1, col: 0 }));
        assert!(ComplexMatrix::from_real(1, 1, &[f64::INFINITY]).is_err());
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_places_basis_vectors() {
        let up = ComplexMatrix::from_real(2, 1, &[1.0, 0.0]).unwrap();
        let down = ComplexMatrix::from_real(2, 1, &[0.0, 1.0]).unwrap();
        let expected = ComplexMatrix::from_real(4, 1, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(up.kron(&down).unwrap(), expected);
    }

    #[test]
    fn kron_antisymmetrized_gives_singlet_vector() {
        let up = ComplexMatrix::basis(2, 0);
        let down = ComplexMatrix::basis(2, 1);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = up
            .kron(&down)
            .unwrap()
            .sub(&down.kron(&up).unwrap())
            .unwrap()
            .scale(c(h, 0.0));
        let expected = ComplexMatrix::from_real(4, 1, &[0.0, h, -h, 0.0]).unwrap();
        assert!(psi.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn kron_respects_cap() {
        let a = ComplexMatrix::identity(64);
        assert_eq!(
            a.kron_capped(&a, 1000),
            Err(Error::Dimension {
                requested: 64 * 64 * 64 * 64,
                cap: 1000
            })
        );
        let big = ComplexMatrix::identity(1 << 6);
        assert!(matches!(
            big.kron(&big).and_then(|m| m.kron(&big)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn dagger_examples() {
        assert_eq!(
            ComplexMatrix::identity(3).dagger(),
            ComplexMatrix::identity(3)
        );
        let ket = ComplexMatrix::column(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let bra = ket.dagger();
        assert_eq!((bra.rows(), bra.cols()), (1, 2));
        assert_eq!(bra.as_slice(), &[c(0.0, -1.0), c(0.0, 0.0)]);
        // σ_y is Hermitian, entry by entry.
        let sy = sigma_y();
        let d = sy.dagger();
        for r in 0..2 {
            for col in 0..2 {
                assert_eq!(d[(r, col)], sy[(r, col)]);
            }
        }
    }

    #[test]
    fn matmul_shape_errors() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::Shape(_))));
        let p = sigma_y().matmul(&sigma_y()).unwrap();
        assert!(p.approx_eq(&ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn unitary_and_hermitian_predicates() {
        assert!(sigma_y().is_unitary(1e-15));
        assert!(sigma_y().is_hermitian(0.0));
        let not_h = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!not_h.is_hermitian(1e-3));
        assert!(!not_h.is_unitary(1e-3));
    }
}
