//! Extended-precision eigenvalues and eigenvectors of `A(W)`.
//!
//! Narrow bands make the smallest eigenvalue of `A(W)` tiny, and bands close
//! to the whole visible region make the top two eigenvalues nearly equal.
//! Both are beyond double precision. Here the matrix is rebuilt from its
//! parameters with a multiple-precision float, eigenvalues are located by
//! Sylvester inertia (the number of negative pivots of `A - sigma I = L D L^T`
//! equals the number of eigenvalues below `sigma`) and the top eigenvector is
//! obtained by inverse iteration.

use rug::float::Constant;
use rug::Float;

const PRECISION: u32 = 320;
const MAX_PRECISION: u32 = 4096;
const BISECTION_STEPS: usize = 200;
const RELATIVE_RESOLUTION: f64 = 1e-15;
const INVERSE_ITERATIONS: usize = 4;
/// Below this multiple of `|A|_F` the eigenvalue is reported as this floor.
const FLOOR: f64 = 1e-280;

struct PreciseMatrix {
    prec: u32,
    rows: Vec<Vec<Float>>,
}

impl PreciseMatrix {
    fn new(order: usize, ratio: f64, width: f64, prec: u32) -> Self {
        let pi = Float::with_val(prec, Constant::Pi);
        let w = Float::with_val(prec, width);
        let r = Float::with_val(prec, ratio);
        let diagonals: Vec<Float> = (0..order)
            .map(|i| {
                if i == 0 {
                    return w.clone();
                }
                // x = pi * i * ratio * width
                let x = Float::with_val(prec, &pi * &r) * &w * (i as u32);
                let s = x.clone().sin();
                Float::with_val(prec, &w * &s) / &x
            })
            .collect();
        let rows = (0..order)
            .map(|m| (0..order).map(|n| diagonals[m.abs_diff(n)].clone()).collect())
            .collect();
        Self { prec, rows }
    }

    fn order(&self) -> usize {
        self.rows.len()
    }

    fn float(&self, x: f64) -> Float {
        Float::with_val(self.prec, x)
    }

    /// Eigenvalues strictly below `sigma`.
    fn count_below(&self, sigma: &Float) -> usize {
        let prec = self.prec;
        let a = &self.rows;
        let n = a.len();
        let mut l = vec![vec![Float::new(prec); n]; n];
        let mut d: Vec<Float> = Vec::with_capacity(n);
        let mut negatives = 0;
        let tiny = Float::with_val(prec, 1) >> (prec as i32);
        for j in 0..n {
            let mut dj = Float::with_val(prec, &a[j][j] - sigma);
            for k in 0..j {
                let t = Float::with_val(prec, &l[j][k] * &l[j][k]) * &d[k];
                dj -= t;
            }
            if dj.is_zero() {
                dj = tiny.clone();
            }
            if dj.is_sign_negative() {
                negatives += 1;
            }
            for i in j + 1..n {
                let mut acc = a[i][j].clone();
                for k in 0..j {
                    let t = Float::with_val(prec, &l[i][k] * &l[j][k]) * &d[k];
                    acc -= t;
                }
                l[i][j] = acc / &dj;
            }
            d.push(dj);
        }
        negatives
    }

    /// `k`-th largest eigenvalue (`k = 1` is the largest) by bisection
    /// between `lo` and `hi`.
    fn kth_largest(&self, k: usize, mut lo: Float, mut hi: Float) -> Float {
        let target = self.order() + 1 - k;
        for _ in 0..self.prec {
            let mid = Float::with_val(self.prec, &lo + &hi) / 2u32;
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(&mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Float::with_val(self.prec, &lo + &hi) / 2u32
    }

    /// Solve `(A - sigma I) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, sigma: &Float, b: &[Float]) -> Vec<Float> {
        let prec = self.prec;
        let n = self.order();
        let mut m: Vec<Vec<Float>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r[i] -= sigma;
                r.push(b[i].clone());
                r
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| m[x][col].as_abs().partial_cmp(&*m[y][col].as_abs()).unwrap())
                .unwrap();
            m.swap(col, pivot);
            if m[col][col].is_zero() {
                m[col][col] = Float::with_val(prec, 1) >> (prec as i32);
            }
            for row in col + 1..n {
                let f = Float::with_val(prec, &m[row][col] / &m[col][col]);
                for c in col..=n {
                    let t = Float::with_val(prec, &f * &m[col][c]);
                    m[row][c] -= t;
                }
            }
        }
        let mut x = vec![Float::new(prec); n];
        for i in (0..n).rev() {
            let mut acc = m[i][n].clone();
            for k in i + 1..n {
                let t = Float::with_val(prec, &m[i][k] * &x[k]);
                acc -= t;
            }
            x[i] = acc / &m[i][i];
        }
        x
    }
}

fn normalize(x: &mut [Float], prec: u32) {
    let mut s = Float::new(prec);
    for e in x.iter() {
        s += Float::with_val(prec, e * e);
    }
    let norm = s.sqrt();
    for e in x.iter_mut() {
        *e /= &norm;
    }
}

/// Number of eigenvalues of the broadside matrix of full band width `width`
/// at `d / lambda = ratio` that lie strictly below `sigma`.
pub fn count_eigenvalues_below(order: usize, ratio: f64, width: f64, sigma: f64) -> usize {
    let a = PreciseMatrix::new(order, ratio, width, PRECISION);
    a.count_below(&a.float(sigma))
}

/// Boundary of a monotone predicate on `(0, inf)`: `pred(lo)` false,
/// `pred(hi)` true.
fn geometric_boundary(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        if hi / lo <= 1.0 + RELATIVE_RESOLUTION {
            break;
        }
        let mid = (lo * hi).sqrt();
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo * hi).sqrt()
}

pub(super) fn min_eigenvalue(order: usize, ratio: f64, width: f64, approx: f64, scale: f64) -> f64 {
    let a = PreciseMatrix::new(order, ratio, width, PRECISION);
    let below = |sigma: f64| a.count_below(&a.float(sigma)) >= 1;
    let floor = FLOOR * scale;
    let start = approx.abs().max(1e-20 * scale);

    if !below(0.0) {
        // 0 <= lambda_min: bracket it geometrically.
        let mut hi = start;
        while !below(hi) {
            hi *= 16.0;
        }
        let mut lo = hi;
        while below(lo) {
            lo /= 1e8;
            if lo < floor {
                return floor;
            }
        }
        geometric_boundary(below, lo, hi)
    } else {
        // lambda_min < 0: the same search on t = -lambda_min.
        let above = |t: f64| !below(-t);
        let mut hi = start;
        while !above(hi) {
            hi *= 16.0;
        }
        let mut lo = hi;
        while above(lo) {
            lo /= 1e8;
            if lo < floor {
                return -floor;
            }
        }
        -geometric_boundary(above, lo, hi)
    }
}

/// Top eigenpair computed in extended precision.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PreciseTop {
    pub lambda: f64,
    pub eigengap: f64,
    /// Unit norm, largest entry positive.
    pub vector: Vec<f64>,
}

/// Top eigenpair of the broadside matrix, resolving gaps far below double
/// precision. The working precision doubles until the gap is resolved.
pub(crate) fn top_eigenpair(order: usize, ratio: f64, width: f64) -> PreciseTop {
    let mut prec = PRECISION;
    loop {
        let a = PreciseMatrix::new(order, ratio, width, prec);
        // Gershgorin bound for the spectrum.
        let mut bound = Float::new(prec);
        for row in &a.rows {
            let mut s = Float::new(prec);
            for e in row {
                s += &*e.as_abs();
            }
            if s > bound {
                bound = s;
            }
        }
        let neg = Float::with_val(prec, -&bound) - 1u32;
        let pos = Float::with_val(prec, &bound + 1u32);
        let l1 = a.kth_largest(1, neg.clone(), pos.clone());
        let l2 = if order > 1 {
            a.kth_largest(2, neg, pos)
        } else {
            Float::with_val(prec, f64::NEG_INFINITY)
        };
        let gap = Float::with_val(prec, &l1 - &l2);
        let resolution = Float::with_val(prec, &bound) >> ((prec / 2) as i32);
        if order > 1 && gap <= resolution && prec < MAX_PRECISION {
            prec *= 2;
            continue;
        }

        // Shift just above lambda_1 so the system stays nonsingular.
        let eps = Float::with_val(prec, &bound) >> ((prec - 16) as i32);
        let sigma = Float::with_val(prec, &l1 + &eps);
        let mut x: Vec<Float> = (0..order).map(|i| Float::with_val(prec, 1.0 + 0.01 * i as f64)).collect();
        normalize(&mut x, prec);
        for _ in 0..INVERSE_ITERATIONS {
            x = a.shifted_solve(&sigma, &x);
            normalize(&mut x, prec);
        }
        let mut v: Vec<f64> = x.iter().map(|e| e.to_f64()).collect();
        let norm = v.iter().map(|e| e * e).sum::<f64>().sqrt();
        v.iter_mut().for_each(|e| *e /= norm);
        crate::linalg::normalize_sign_real(&mut v);
        return PreciseTop {
            lambda: l1.to_f64(),
            eigengap: if order > 1 { gap.to_f64() } else { f64::INFINITY },
            vector: v,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertia_of_identity_like_matrix() {
        // ratio 1/2, width 2: A = 2 I
        assert_eq!(count_eigenvalues_below(4, 0.5, 2.0, 1.9), 0);
        assert_eq!(count_eigenvalues_below(4, 0.5, 2.0, 2.1), 4);
    }

    #[test]
    fn reference_values() {
        // 80-digit references for A(W), half-wavelength spacing
        for &(m, w, expect) in &[
            (5usize, 0.2, 8.6421e-7),
            (5, 0.05, 3.0872e-12),
            (8, 0.05, 1.5159e-20),
            (12, 0.05, 1.0847e-31),
        ] {
            let lam = min_eigenvalue(m, 0.5, 2.0 * w, 0.0, 1.0);
            assert!((lam / expect - 1.0).abs() < 1e-4, "M={m} W={w}: {lam:e}");
        }
    }

    #[test]
    fn top_pair_near_full_width() {
        let t = top_eigenpair(5, 0.5, 2.0 * 0.999);
        let expect = [1.0, 4.0, 6.0, 4.0, 1.0].map(|x: f64| x / 70f64.sqrt());
        for (a, b) in t.vector.iter().zip(expect) {
            assert!((a - b).abs() < 1e-2);
        }
        assert!(t.eigengap > 0.0 && t.eigengap < 1e-12);
        assert!((t.lambda - 2.0).abs() < 1e-2);
    }

    #[test]
    fn top_pair_matches_double_precision_when_well_separated() {
        let t = top_eigenpair(4, 0.5, 0.6);
        // power method on A(0.3), M = 4, in f64
        let pi = std::f64::consts::PI;
        let a: Vec<Vec<f64>> = (0..4)
            .map(|m: usize| {
                (0..4)
                    .map(|n: usize| {
                        let i = m.abs_diff(n) as f64;
                        if i == 0.0 {
                            0.6
                        } else {
                            0.6 * (pi * i * 0.3).sin() / (pi * i * 0.3)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut x = vec![1.0; 4];
        for _ in 0..500 {
            let y: Vec<f64> = (0..4).map(|i| (0..4).map(|j| a[i][j] * x[j]).sum()).collect();
            let n = y.iter().map(|e| e * e).sum::<f64>().sqrt();
            x = y.iter().map(|e| e / n).collect();
        }
        for (p, q) in t.vector.iter().zip(&x) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
