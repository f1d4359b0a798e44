//! Truncated dipole matrix, its eigenbasis, and the level frequencies
//! expressed in that basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::well::EigenBasis;

/// Dipole matrix in units of `ℓ` and everything derived from its eigenbasis.
#[derive(Debug, Clone)]
pub struct DipoleDecomposition {
    /// `x_mk / ℓ`, exactly symmetric.
    pub x: DMatrix<f64>,
    /// Dimensionless eigenvalues of `x`, ascending.
    pub lambda: DVector<f64>,
    /// Orthogonal; column `k` is `v_k`.
    pub v: DMatrix<f64>,
    /// Level angular frequencies `ω_k = ε_k/ħ`.
    pub level_omegas: DVector<f64>,
    /// `Ω = Vᵀ diag(ω_k) V`.
    pub omega: DMatrix<f64>,
}

impl DipoleDecomposition {
    pub fn new(basis: &EigenBasis, n: usize) -> Result<Self> {
        let x = dipole_matrix(basis, n)?;
        let omegas: Vec<f64> = basis.states[..n].iter().map(|s| s.omega).collect();
        Self::from_parts(x, &omegas)
    }

    /// Decompose an already assembled dipole matrix.
    pub fn from_parts(x: DMatrix<f64>, level_omegas: &[f64]) -> Result<Self> {
        let (lambda, v) = diagonalize_dipole(&x)?;
        let omega = build_omega(&v, level_omegas)?;
        Ok(Self {
            x,
            lambda,
            v,
            level_omegas: DVector::from_column_slice(level_omegas),
            omega,
        })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }
}

/// `x_mk = ∫ψ_m x ψ_k dx / ℓ` for `m, k < n`, integrated separately on each
/// half-line because of the kink at the origin.
pub fn dipole_matrix(basis: &EigenBasis, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || n > basis.n_states() {
        return Err(Error::InvalidParam {
            field: "n",
            reason: format!("truncation must be in 1..={}, got {n}", basis.n_states()),
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|m| (m..n).map(move |k| (m, k))).collect();
    let (lo, hi) = basis.support();
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let mut sums = vec![0.0; pairs.len()];
    for (a, b) in [(lo, 0.0), (0.0, hi)] {
        let r = integrate(
            |x| {
                let psi = basis.psi_all_natural(n, x);
                pairs.iter().map(|&(m, k)| psi[m] * x * psi[k]).collect()
            },
            a,
            b,
            pairs.len(),
            opts,
        )
        .map_err(|e| match e {
            Error::Quadrature { estimate, tol, .. } => Error::Quadrature {
                what: format!(
                    "dipole elements on [{a:.3}, {b:.3}] (worst pair unknown, {} pairs)",
                    pairs.len()
                ),
                estimate,
                tol,
            },
            other => other,
        })?;
        for (s, v) in sums.iter_mut().zip(r.value) {
            *s += v;
        }
    }
    let mut x = DMatrix::zeros(n, n);
    for (&(m, k), &s) in pairs.iter().zip(&sums) {
        x[(m, k)] = s;
        x[(k, m)] = s;
    }
    Ok(x)
}

fn check_symmetric(x: &DMatrix<f64>) -> Result<()> {
    if !x.is_square() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            got: x.ncols(),
        });
    }
    let scale = x.amax().max(f64::MIN_POSITIVE);
    let residual = (x - x.transpose()).amax();
    if residual > 1e-12 * scale {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Eigenvalues ascending; each eigenvector's largest-magnitude component
/// (first one on ties) is made positive.
pub fn diagonalize_dipole(x: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_symmetric(x)?;
    let n = x.nrows();
    let sym = 0.5 * (x + x.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambda = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut v = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut c = eig.eigenvectors.column(i).into_owned();
        let lead = c.iamax();
        if c[lead] < 0.0 {
            c.neg_mut();
        }
        v.set_column(col, &c);
    }
    Ok((lambda, v))
}

/// `Ω = Vᵀ diag(ω) V`, symmetrized.
pub fn build_omega(v: &DMatrix<f64>, omegas: &[f64]) -> Result<DMatrix<f64>> {
    if v.nrows() != omegas.len() || v.ncols() != omegas.len() {
        return Err(Error::Dimension {
            expected: v.nrows(),
            got: omegas.len(),
        });
    }
    let n = omegas.len();
    let mut omega = DMatrix::zeros(n, n);
    for l in 0..n {
        for m in l..n {
            let s: f64 = (0..n).map(|j| v[(j, l)] * omegas[j] * v[(j, m)]).sum();
            omega[(l, m)] = s;
            omega[(m, l)] = s;
        }
    }
    Ok(omega)
}

/// Largest `|x_{m,m+d}|` for each off-diagonal offset `d`.
pub fn decay_profile(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows();
    (0..n)
        .map(|d| (0..n - d).map(|m| x[(m, m + d)].abs()).fold(0.0, f64::max))
        .collect()
}

/// Relative change of `λ_k`, `k ≤ n/2`, between truncations `n` and `n + 4`.
/// Needs a basis with at least `n + 4` states. Reported, not enforced: the
/// truncated position operator has no reason to converge pointwise.
pub fn truncation_stability(basis: &EigenBasis, n: usize) -> Result<Vec<f64>> {
    let small = diagonalize_dipole(&dipole_matrix(basis, n)?)?.0;
    let large = diagonalize_dipole(&dipole_matrix(basis, n + 4)?)?.0;
    Ok((0..=n / 2)
        .filter(|&k| k < n)
        .map(|k| ((large[k] - small[k]) / small[k]).abs())
        .collect())
}

/// Harmonic-oscillator ladder `x_{k,k+1} = √((k+1)/2)`, truncated to `n`.
pub fn oscillator_ladder(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            ((i + 1) as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            ((j + 1) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}
