//! Small dense linear algebra: Jacobi eigensolvers for real symmetric and
//! complex Hermitian matrices, Cholesky factorization, and the generalized
//! Rayleigh-quotient maximizer built on top of them.
//!
//! Matrices here are at most a few dozen rows, so everything is stored as a
//! flat row-major `Vec`.

mod cholesky;
mod jacobi;

pub use cholesky::{cholesky, generalized_max_eigvec, GeneralizedEigenpair, LowerTriangular};
pub use jacobi::{eigh_hermitian, eigh_symmetric, MAX_SWEEPS};
pub(crate) use jacobi::normalize_sign_real;

use num_complex::Complex64;

/// Real symmetric matrix. Only the upper triangle is ever evaluated by the
/// constructors; the lower one is mirrored so symmetry holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                entries[i * order + j] = v;
                entries[j * order + i] = v;
            }
        }
        Self { order, entries }
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            entries: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Build from row-major entries, keeping `(a + a^T) / 2`.
    pub fn from_rows_symmetrized(order: usize, rows: &[f64]) -> crate::Result<Self> {
        if rows.len() != order * order {
            return Err(crate::Error::DimensionMismatch {
                expected: order * order,
                actual: rows.len(),
            });
        }
        Ok(Self::from_fn(order, |i, j| {
            0.5 * (rows[i * order + j] + rows[j * order + i])
        }))
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    /// Overwrite entry `(i, j)` and its mirror.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.order + j] = value;
        self.entries[j * self.order + i] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        compensated_sum((0..self.order).map(|i| self.get(i, i)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `v S v^H` for a complex row vector.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        self.to_hermitian().quadratic_form(v)
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::from_fn(self.order, |i, j| Complex64::new(self.get(i, j), 0.0))
    }
}

/// Complex Hermitian matrix; the lower triangle is the conjugate mirror of
/// the upper one and the diagonal is real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    order: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); order * order];
        for i in 0..order {
            entries[i * order + i] = Complex64::new(f(i, i).re, 0.0);
            for j in i + 1..order {
                let v = f(i, j);
                entries[i * order + j] = v;
                entries[j * order + i] = v.conj();
            }
        }
        Self { order, entries }
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            entries: vec![Complex64::new(0.0, 0.0); order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Build from row-major entries, keeping the Hermitian part `(a + a^H) / 2`.
    pub fn from_rows_symmetrized(order: usize, rows: &[Complex64]) -> crate::Result<Self> {
        if rows.len() != order * order {
            return Err(crate::Error::DimensionMismatch {
                expected: order * order,
                actual: rows.len(),
            });
        }
        Ok(Self::from_fn(order, |i, j| {
            0.5 * (rows[i * order + j] + rows[j * order + i].conj())
        }))
    }

    /// Rank-one matrix `a a^H` for a column vector `a`.
    pub fn outer(a: &[Complex64]) -> Self {
        Self::from_fn(a.len(), |i, j| a[i] * a[j].conj())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Overwrite entry `(i, j)` and its conjugate mirror.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        if i == j {
            self.entries[i * self.order + i] = Complex64::new(value.re, 0.0);
        } else {
            self.entries[i * self.order + j] = value;
            self.entries[j * self.order + i] = value.conj();
        }
    }

    pub fn trace(&self) -> f64 {
        compensated_sum((0..self.order).map(|i| self.get(i, i).re))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// True if every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|x| x.im == 0.0)
    }

    /// Real part as a symmetric matrix.
    pub fn real_part(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.order, |i, j| self.get(i, j).re)
    }

    /// `v H v^H` for a row vector `v` (weights applied unconjugated on the
    /// left, conjugated on the right).
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let n = self.order;
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += self.entries[i * n + j] * v[j].conj();
            }
            acc += (v[i] * row).re;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) * factor)
    }

    /// Elementwise product with another Hermitian matrix.
    pub fn hadamard(&self, other: &Self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) * other.get(i, j))
    }

    /// `H x` for a column vector.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.order;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * x[j]).sum())
            .collect()
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<T>>,
}

impl<T> EigenDecomposition<T> {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty decomposition")
    }

    pub fn top_eigenvector(&self) -> &[T] {
        &self.eigenvectors[0]
    }

    /// `lambda_1 - lambda_2`, or `+inf` for order 1.
    pub fn eigengap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            f64::INFINITY
        } else {
            self.eigenvalues[0] - self.eigenvalues[1]
        }
    }
}

/// Neumaier-compensated sum; `M` equal terms `x` sum to `fl(M x)`.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for x in terms {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}
