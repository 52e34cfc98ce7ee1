use num_complex::Complex64;

use super::{EigenDecomposition, HermitianMatrix, SymmetricMatrix};
use crate::error::{Error, Result};

/// Sweep limit for both Jacobi variants.
pub const MAX_SWEEPS: usize = 100;

/// Off-diagonal threshold relative to the Frobenius norm of the input.
const RELATIVE_THRESHOLD: f64 = 1e-13;

/// Entries within this relative distance of the largest magnitude count as
/// ties when picking the entry that fixes an eigenvector's sign.
const TIE_TOLERANCE: f64 = 1e-9;

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations.
///
/// Eigenvalues come back in descending order. Each eigenvector is signed so
/// that its largest-magnitude entry (lowest index on ties) is positive.
pub fn eigh_symmetric(s: &SymmetricMatrix) -> Result<EigenDecomposition<f64>> {
    let n = s.order();
    let mut a = s.entries().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = RELATIVE_THRESHOLD * s.frobenius_norm();

    let mut converged = false;
    let mut off = 0.0;
    for _ in 0..MAX_SWEEPS {
        off = max_off_diagonal(n, |i, j| a[i * n + j].abs());
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate_real(&mut a, &mut v, n, p, q, c, sn);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
            normalize_sign_real(&mut col);
            (a[k * n + k], col)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Full eigendecomposition of a complex Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry with a diagonal
/// unitary, then applies an ordinary real Jacobi rotation. Eigenvectors are
/// phase-normalized so that the largest-magnitude entry (lowest index on
/// ties) is real and positive.
pub fn eigh_hermitian(h: &HermitianMatrix) -> Result<EigenDecomposition<Complex64>> {
    let n = h.order();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = h.entries().to_vec();
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let threshold = RELATIVE_THRESHOLD * h.frobenius_norm();

    let mut converged = false;
    let mut off = 0.0;
    for _ in 0..MAX_SWEEPS {
        off = max_off_diagonal(n, |i, j| a[i * n + j].norm());
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Column q times e^{-i phi}, row q times e^{i phi}: makes a_pq real.
                let phase = apq / r;
                let phase_conj = phase.conj();
                for k in 0..n {
                    a[k * n + q] *= phase_conj;
                    v[k * n + q] *= phase_conj;
                }
                for k in 0..n {
                    a[q * n + k] *= phase;
                }
                a[p * n + q] = Complex64::new(r, 0.0);
                a[q * n + p] = Complex64::new(r, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);

                let theta = (a[q * n + q].re - a[p * n + p].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate_complex(&mut a, &mut v, n, p, q, c, sn);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<Complex64> = (0..n).map(|i| v[i * n + k]).collect();
            normalize_phase(&mut col);
            (a[k * n + k].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn max_off_diagonal(n: usize, abs: impl Fn(usize, usize) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(abs(i, j));
        }
    }
    m
}

// A <- J^T A J, V <- V J with J the (p, q) plane rotation [[c, s], [-s, c]].
fn rotate_real(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
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
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

fn rotate_complex(
    a: &mut [Complex64],
    v: &mut [Complex64],
    n: usize,
    p: usize,
    q: usize,
    c: f64,
    s: f64,
) {
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * s;
        a[k * n + q] = akp * s + akq * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * s;
        a[q * n + k] = apk * s + aqk * c;
    }
    let zero = Complex64::new(0.0, 0.0);
    a[p * n + q] = zero;
    a[q * n + p] = zero;
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * s;
        v[k * n + q] = vkp * s + vkq * c;
    }
}

fn pivot_index(magnitudes: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let max = magnitudes.clone().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    magnitudes
        .enumerate()
        .find(|(_, m)| *m >= max * (1.0 - TIE_TOLERANCE))
        .map(|(i, _)| i)
}

pub(crate) fn normalize_sign_real(x: &mut [f64]) {
    if let Some(i) = pivot_index(x.iter().map(|e| e.abs())) {
        if x[i] < 0.0 {
            x.iter_mut().for_each(|e| *e = -*e);
        }
    }
}

pub(crate) fn normalize_phase(x: &mut [Complex64]) {
    if let Some(i) = pivot_index(x.iter().map(|e| e.norm())) {
        let rot = x[i].conj() / x[i].norm();
        x.iter_mut().for_each(|e| *e *= rot);
        x[i] = Complex64::new(x[i].re, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        SymmetricMatrix::from_fn(n, |i, j| vals[i * n + j])
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        HermitianMatrix::from_fn(n, |i, j| vals[i * n + j])
    }

    #[test]
    fn identity_order_three() {
        let e = eigh_symmetric(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn analytic_two_by_two() {
        let s = SymmetricMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = eigh_symmetric(&s).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = &e.eigenvectors[0];
        let v1 = &e.eigenvectors[1];
        assert!((v0[0] - r).abs() < 1e-14 && (v0[1] - r).abs() < 1e-14);
        assert!((v1[0].abs() - r).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn random_order_eight_reconstructs() {
        let s = random_symmetric(8, 11);
        let e = eigh_symmetric(&s).unwrap();
        let n = 8;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n)
                    .map(|k| e.eigenvectors[k][i] * e.eigenvalues[k] * e.eigenvectors[k][j])
                    .sum();
                worst = worst.max((r - s.get(i, j)).abs());
            }
        }
        assert!(worst < 1e-10, "reconstruction error {worst}");
        // orthonormality
        for a in 0..n {
            for b in 0..n {
                let d: f64 = (0..n).map(|i| e.eigenvectors[a][i] * e.eigenvectors[b][i]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
        for w in e.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn deterministic_output() {
        let s = random_symmetric(6, 3);
        assert_eq!(eigh_symmetric(&s).unwrap(), eigh_symmetric(&s).unwrap());
    }

    #[test]
    fn zero_matrix_is_already_diagonal() {
        let e = eigh_symmetric(&SymmetricMatrix::zeros(4)).unwrap();
        assert!(e.eigenvalues.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn hermitian_analytic_two_by_two() {
        let h = HermitianMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(1.0, 0.0),
        });
        let e = eigh_hermitian(&h).unwrap();
        assert!((e.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(e.eigenvalues[1].abs() < 1e-14);
    }

    #[test]
    fn hermitian_diagonal_sorted() {
        let d = [0.5, -2.0, 3.0, 1.0];
        let h = HermitianMatrix::from_fn(4, |i, j| {
            Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0)
        });
        let e = eigh_hermitian(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0, 0.5, -2.0]);
    }

    #[test]
    fn hermitian_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm2: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        let e = eigh_hermitian(&HermitianMatrix::outer(&a)).unwrap();
        assert!((e.eigenvalues[0] - norm2).abs() < 1e-12 * norm2);
        for &x in &e.eigenvalues[1..] {
            assert!(x.abs() < 1e-12 * norm2);
        }
    }

    #[test]
    fn hermitian_random_residuals() {
        let h = random_hermitian(7, 21);
        let e = eigh_hermitian(&h).unwrap();
        let fro = h.frobenius_norm();
        for k in 0..7 {
            let x = &e.eigenvectors[k];
            let hx = h.mul_vec(x);
            let res: f64 = hx
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b * e.eigenvalues[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-9 * fro, "residual {res}");
        }
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - h.trace()).abs() <= 1e-9 * h.trace().abs().max(1.0));
    }

    #[test]
    fn sign_convention_positive_pivot() {
        let mut x = vec![0.1, -0.9, 0.3];
        normalize_sign_real(&mut x);
        assert_eq!(x, vec![-0.1, 0.9, -0.3]);
        // tie: lowest index wins
        let mut y = vec![-0.5, 0.5];
        normalize_sign_real(&mut y);
        assert_eq!(y, vec![0.5, -0.5]);
    }
}
