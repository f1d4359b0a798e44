//! Test-only oracles that share no code path with the library's linear algebra.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `det(A − μI)` by Gaussian elimination with partial pivoting.
pub fn det_shifted(a: &DMatrix<Complex64>, mu: f64) -> Complex64 {
    let n = a.nrows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    a[(i, j)]
                        - if i == j {
                            Complex64::new(mu, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                })
                .collect()
        })
        .collect();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))
            .unwrap();
        if m[p][c].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let t = m[c][k];
                m[r][k] -= f * t;
            }
        }
    }
    det
}

/// Real roots of the characteristic polynomial of a Hermitian matrix, found by
/// scanning `[lo, hi]` in `n_scan` steps and bisecting each sign change.
pub fn charpoly_roots(a: &DMatrix<Complex64>, lo: f64, hi: f64, n_scan: usize) -> Vec<f64> {
    let f = |mu: f64| det_shifted(a, mu).re;
    let mut roots = Vec::new();
    let step = (hi - lo) / n_scan as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n_scan {
        let x1 = lo + step * i as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut a_, mut b_) = (x0, x1);
            let fa = f0;
            for _ in 0..200 {
                let m = 0.5 * (a_ + b_);
                if m <= a_ || m >= b_ {
                    break;
                }
                if f(m).signum() == fa.signum() {
                    a_ = m;
                } else {
                    b_ = m;
                }
            }
            roots.push(0.5 * (a_ + b_));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

pub fn real_to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}
