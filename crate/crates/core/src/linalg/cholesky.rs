use num_complex::Complex64;

use super::jacobi::normalize_phase;
use super::{eigh_hermitian, HermitianMatrix};
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor, row-major with zeros above the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    order: usize,
    entries: Vec<Complex64>,
}

impl LowerTriangular {
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.order + j]
    }

    /// `L L^H` as a dense row-major array.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let n = self.order;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..=i.min(j)).map(|k| self.get(i, k) * self.get(j, k).conj()).sum();
            }
        }
        out
    }

    /// Solve `L x = b`.
    pub fn solve_lower(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.order;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = b[i];
            for k in 0..i {
                acc -= self.get(i, k) * x[k];
            }
            x[i] = acc / self.get(i, i);
        }
        x
    }

    /// Solve `L^H x = b`.
    pub fn solve_upper_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.order;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for k in i + 1..n {
                acc -= self.get(k, i).conj() * x[k];
            }
            x[i] = acc / self.get(i, i).conj();
        }
        x
    }
}

/// Cholesky factorization `P = L L^H` of a Hermitian positive definite matrix.
pub fn cholesky(p: &HermitianMatrix) -> Result<LowerTriangular> {
    let n = p.order();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = p.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut acc = p.get(i, j);
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = acc / djj;
        }
    }
    Ok(LowerTriangular { order: n, entries: l })
}

/// Top solution of the generalized Hermitian problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigenpair {
    /// Maximum of `v A v^H / v B v^H`.
    pub value: f64,
    /// Second largest generalized eigenvalue (`-inf` for order 1).
    pub next_value: f64,
    /// Unit-norm row vector achieving `value`.
    pub vector: Vec<Complex64>,
}

/// Maximize the generalized Rayleigh quotient `v A v^H / v B v^H`.
///
/// With `B = L L^H`, the column vector `y = conj(v)` solves `A y = mu B y`,
/// so `z = L^H y` is the top eigenvector of `L^{-1} A L^{-H}`.
pub fn generalized_max_eigvec(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<GeneralizedEigenpair> {
    let n = a.order();
    if b.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.order(),
        });
    }
    let l = cholesky(b)?;

    // X = L^{-1} A, column by column.
    let mut x = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| a.get(i, j)).collect();
        let sol = l.solve_lower(&col);
        for i in 0..n {
            x[i * n + j] = sol[i];
        }
    }
    // C = X L^{-H} = (L^{-1} X^H)^H.
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let row_conj: Vec<Complex64> = (0..n).map(|j| x[i * n + j].conj()).collect();
        let sol = l.solve_lower(&row_conj);
        for j in 0..n {
            c[i * n + j] = sol[j].conj();
        }
    }
    let reduced = HermitianMatrix::from_rows_symmetrized(n, &c)?;
    let eig = eigh_hermitian(&reduced)?;

    let y = l.solve_upper_adjoint(eig.top_eigenvector());
    let norm = y.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    let mut v: Vec<Complex64> = y.iter().map(|e| e.conj() / norm).collect();
    normalize_phase(&mut v);
    let next_value = eig.eigenvalues.get(1).copied().unwrap_or(f64::NEG_INFINITY);
    Ok(GeneralizedEigenpair {
        value: eig.eigenvalues[0],
        next_value,
        vector: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        let g: Vec<Complex64> = random_vec(rng, n * n);
        // G G^H + I
        HermitianMatrix::from_fn(n, |i, j| {
            let s: Complex64 = (0..n).map(|k| g[i * n + k] * g[j * n + k].conj()).sum();
            if i == j {
                s + 1.0
            } else {
                s
            }
        })
    }

    #[test]
    fn identity_factor() {
        let l = cholesky(&HermitianMatrix::identity(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l.get(i, j), c(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn hand_checked_two_by_two() {
        let p = HermitianMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(4.0),
            (1, 1) => c(5.0),
            _ => c(2.0),
        });
        let l = cholesky(&p).unwrap();
        assert_eq!(l.get(0, 0), c(2.0));
        assert_eq!(l.get(1, 0), c(1.0));
        assert_eq!(l.get(1, 1), c(2.0));
        assert_eq!(l.get(0, 1), c(0.0));
    }

    #[test]
    fn reconstruction_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_pd(&mut rng, 6);
        let l = cholesky(&p).unwrap();
        let r = l.reconstruct();
        let err = r
            .iter()
            .zip(p.entries())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err <= 1e-10 * p.max_abs());
    }

    #[test]
    fn indefinite_rejected() {
        let p = HermitianMatrix::from_fn(2, |i, j| if i == j { c(1.0) } else { c(2.0) });
        assert!(matches!(cholesky(&p), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn identity_b_reduces_to_top_eigenpair() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_vec(&mut rng, 25);
        let a = HermitianMatrix::from_fn(5, |i, j| g[i * 5 + j]);
        let gen = generalized_max_eigvec(&a, &HermitianMatrix::identity(5)).unwrap();
        let eig = eigh_hermitian(&a).unwrap();
        assert!((gen.value - eig.eigenvalues[0]).abs() < 1e-12);
        let q = a.quadratic_form(&gen.vector);
        assert!((q - gen.value).abs() < 1e-10);
    }

    #[test]
    fn diagonal_case() {
        let a = HermitianMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(3.0),
            (1, 1) => c(1.0),
            _ => c(0.0),
        });
        let gen = generalized_max_eigvec(&a, &HermitianMatrix::identity(2)).unwrap();
        assert!((gen.value - 3.0).abs() < 1e-15);
        assert!((gen.vector[0] - c(1.0)).norm() < 1e-15);
        assert!(gen.vector[1].norm() < 1e-15);
    }

    #[test]
    fn dominates_random_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 6;
        let g = random_vec(&mut rng, n * n);
        let a = HermitianMatrix::from_fn(n, |i, j| g[i * n + j]);
        let b = random_pd(&mut rng, n);
        let gen = generalized_max_eigvec(&a, &b).unwrap();
        let norm: f64 = gen.vector.iter().map(|e| e.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let attained = a.quadratic_form(&gen.vector) / b.quadratic_form(&gen.vector);
        assert!((attained - gen.value).abs() < 1e-9 * gen.value.abs().max(1.0));
        let mut best = f64::NEG_INFINITY;
        for _ in 0..100_000 {
            let u = random_vec(&mut rng, n);
            let q = a.quadratic_form(&u) / b.quadratic_form(&u);
            best = best.max(q);
        }
        assert!(gen.value >= best, "{} < sampled {}", gen.value, best);
    }

    #[test]
    fn dimension_mismatch() {
        let r = generalized_max_eigvec(&HermitianMatrix::identity(2), &HermitianMatrix::identity(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
