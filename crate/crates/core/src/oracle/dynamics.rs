//! Step-by-step references for the driven problem.
//!
//! [`reference_evolve_basis`] integrates the modal equations
//! `i dφ̂/dξ = (diag(ω_k)/ω + β cos ξ X) φ̂` with classic RK4, no phase
//! transformation and no Magnus shortcut. [`reference_evolve_grid`] solves
//! the full Schrödinger equation on a grid with Crank–Nicolson.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dipole::DipoleDecomposition;
use crate::error::{Error, Result};
use crate::evolution::DriveConfig;
use crate::oracle::GridSpec;
use crate::well::WellParams;

type CVector = DVector<Complex64>;

/// Step-doubling tolerance for the basis integrator.
pub const BASIS_DOUBLING_TOL: f64 = 1e-8;
/// Largest tolerated norm drift for the basis integrator.
pub const BASIS_NORM_DRIFT: f64 = 1e-9;
/// Default `‖H‖·dξ` used when the caller lets the integrator pick its step.
pub const AUTO_STEP_PRODUCT: f64 = 0.01;

/// Result of a reference basis integration.
#[derive(Debug, Clone)]
pub struct BasisEvolution {
    pub phi_hat: CVector,
    /// `‖φ̂(ξ₁)‖ − ‖φ̂(ξ₀)‖` on the finer run.
    pub norm_drift: f64,
    /// `‖φ̂_{dξ} − φ̂_{dξ/2}‖`.
    pub doubling_diff: f64,
    pub steps: usize,
}

struct ModalGenerator<'a> {
    diag: Vec<f64>,
    x: &'a nalgebra::DMatrix<f64>,
    beta: f64,
}

impl ModalGenerator<'_> {
    /// `−i H(ξ) φ`.
    fn rhs(&self, xi: f64, phi: &[Complex64], out: &mut [Complex64]) {
        let n = phi.len();
        let c = self.beta * xi.cos();
        for i in 0..n {
            let mut s = phi[i] * self.diag[i];
            for j in 0..n {
                s += phi[j] * (c * self.x[(i, j)]);
            }
            out[i] = Complex64::new(s.im, -s.re);
        }
    }

    /// Row-sum bound on `‖H(ξ)‖`.
    fn bound(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                self.diag[i].abs() + self.beta * (0..n).map(|j| self.x[(i, j)].abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn run(&self, phi: &mut [Complex64], xi0: f64, xi1: f64, steps: usize) {
        let n = phi.len();
        let h = (xi1 - xi0) / steps as f64;
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
        );
        for s in 0..steps {
            let xi = xi0 + h * s as f64;
            self.rhs(xi, phi, &mut k1);
            for i in 0..n {
                tmp[i] = phi[i] + k1[i] * (0.5 * h);
            }
            self.rhs(xi + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = phi[i] + k2[i] * (0.5 * h);
            }
            self.rhs(xi + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = phi[i] + k3[i] * h;
            }
            self.rhs(xi + h, &tmp, &mut k4);
            for i in 0..n {
                phi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
    }
}

fn generator<'a>(dip: &'a DipoleDecomposition, drive: &DriveConfig) -> Result<ModalGenerator<'a>> {
    drive.validate()?;
    Ok(ModalGenerator {
        diag: dip.level_omegas.iter().map(|w| w / drive.omega).collect(),
        x: &dip.x,
        beta: drive.beta,
    })
}

fn check_dim(dip: &DipoleDecomposition, v: &CVector) -> Result<()> {
    if v.len() != dip.n() {
        return Err(Error::Dimension {
            expected: dip.n(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Integrate the modal equations from `xi0` to `xi1` with RK4 steps of at
/// most `dxi`, then again with half the step. Refuses the result when the
/// two runs differ by more than [`BASIS_DOUBLING_TOL`] or the norm drifts by
/// more than [`BASIS_NORM_DRIFT`]. Pass `dxi = None` to pick the step from
/// a bound on the generator norm.
pub fn reference_evolve_basis(
    dip: &DipoleDecomposition,
    drive: &DriveConfig,
    phi_hat0: &CVector,
    xi0: f64,
    xi1: f64,
    dxi: Option<f64>,
) -> Result<BasisEvolution> {
    check_dim(dip, phi_hat0)?;
    let g = generator(dip, drive)?;
    let dxi = dxi.unwrap_or_else(|| AUTO_STEP_PRODUCT / g.bound().max(1e-300));
    if !(dxi.is_finite() && dxi > 0.0) {
        return Err(Error::InvalidParam {
            field: "dxi",
            reason: format!("must be finite and > 0, got {dxi}"),
        });
    }
    let steps = ((xi1 - xi0).abs() / dxi).ceil().max(1.0) as usize;
    let mut coarse: Vec<Complex64> = phi_hat0.iter().copied().collect();
    let mut fine = coarse.clone();
    g.run(&mut coarse, xi0, xi1, steps);
    g.run(&mut fine, xi0, xi1, 2 * steps);
    let doubling_diff = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let phi_hat = CVector::from_vec(fine);
    let norm_drift = phi_hat.norm() - phi_hat0.norm();
    if doubling_diff >= BASIS_DOUBLING_TOL {
        return Err(Error::StepDoubling {
            diff: doubling_diff,
            tol: BASIS_DOUBLING_TOL,
        });
    }
    if norm_drift.abs() > BASIS_NORM_DRIFT {
        return Err(Error::StepDoubling {
            diff: norm_drift.abs(),
            tol: BASIS_NORM_DRIFT,
        });
    }
    Ok(BasisEvolution {
        phi_hat,
        norm_drift,
        doubling_diff,
        steps: 2 * steps,
    })
}

/// `φ̂` at `samples` equally spaced phases ending at `xi1` (the start is not
/// included), each leg integrated by [`reference_evolve_basis`].
pub fn reference_trajectory(
    dip: &DipoleDecomposition,
    drive: &DriveConfig,
    phi_hat0: &CVector,
    xi0: f64,
    xi1: f64,
    samples: usize,
) -> Result<Vec<CVector>> {
    if samples == 0 {
        return Err(Error::InvalidParam {
            field: "samples",
            reason: "must be at least 1".into(),
        });
    }
    let h = (xi1 - xi0) / samples as f64;
    let mut phi = phi_hat0.clone();
    let mut out = Vec::with_capacity(samples);
    for j in 0..samples {
        let a = xi0 + h * j as f64;
        let b = if j + 1 == samples { xi1 } else { a + h };
        phi = reference_evolve_basis(dip, drive, &phi, a, b, None)?.phi_hat;
        out.push(phi.clone());
    }
    Ok(out)
}

/// Result of a Crank–Nicolson grid integration.
#[derive(Debug, Clone)]
pub struct GridEvolution {
    /// Physical node positions.
    pub x: Vec<f64>,
    /// Field on the nodes at `t1`, from the run with the finer step.
    pub psi: Vec<Complex64>,
    /// Discrete `∫|Φ|²` at `t1` minus that at `t0`.
    pub norm_drift: f64,
    /// Max-norm difference between runs with `dt` and `dt/2`.
    pub doubling_diff: f64,
    pub steps: usize,
}

/// Evolve `psi0` (sampled on `grid.nodes()`, natural units scaled by `ℓ`)
/// under `H₀ + γ x cos ωt` from `t0` to `t1`. The potential is taken at each
/// step's midpoint, and the end nodes are pinned to zero. Refuses the result
/// when halving `dt` changes the field by more than `doubling_tol`.
pub fn reference_evolve_grid(
    params: &WellParams,
    drive: &DriveConfig,
    grid: &GridSpec,
    psi0: &[Complex64],
    t0: f64,
    t1: f64,
    dt: f64,
    doubling_tol: f64,
) -> Result<GridEvolution> {
    params.validate()?;
    drive.validate()?;
    let ell = params.ell();
    let x: Vec<f64> = grid.nodes().iter().map(|v| v * ell).collect();
    if psi0.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: psi0.len(),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParam {
            field: "dt",
            reason: format!("must be finite and > 0, got {dt}"),
        });
    }
    let h = grid.spacing() * ell;
    let steps = ((t1 - t0).abs() / dt).ceil().max(1.0) as usize;
    let cn = CrankNicolson::new(params, drive, &x, h);
    let coarse = cn.run(psi0, t0, t1, steps);
    let fine = cn.run(psi0, t0, t1, 2 * steps);
    let doubling_diff = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if doubling_diff > doubling_tol {
        return Err(Error::StepDoubling {
            diff: doubling_diff,
            tol: doubling_tol,
        });
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
    let mut start = psi0.to_vec();
    let last = start.len() - 1;
    start[0] = Complex64::default();
    start[last] = Complex64::default();
    Ok(GridEvolution {
        norm_drift: norm(&fine) - norm(&start),
        psi: fine,
        x,
        doubling_diff,
        steps: 2 * steps,
    })
}

struct CrankNicolson<'a> {
    x: &'a [f64],
    v0: Vec<f64>,
    /// `ħ²/(2mh²)`.
    kin: f64,
    hbar: f64,
    gamma: f64,
    omega: f64,
}

impl<'a> CrankNicolson<'a> {
    fn new(params: &WellParams, drive: &DriveConfig, x: &'a [f64], h: f64) -> Self {
        Self {
            x,
            v0: x.iter().map(|&xi| params.potential(xi)).collect(),
            kin: params.hbar * params.hbar / (2.0 * params.m * h * h),
            hbar: params.hbar,
            gamma: drive.gamma,
            omega: drive.omega,
        }
    }

    fn run(&self, psi0: &[Complex64], t0: f64, t1: f64, steps: usize) -> Vec<Complex64> {
        let n = self.x.len();
        let dt = (t1 - t0) / steps as f64;
        // Interior unknowns 1..n-1.
        let m = n - 2;
        let mut psi: Vec<Complex64> = psi0[1..n - 1].to_vec();
        let a = Complex64::new(0.0, 0.5 * dt / self.hbar);
        let off = -a * self.kin;
        let mut diag = vec![Complex64::default(); m];
        let mut rhs = vec![Complex64::default(); m];
        let mut cprime = vec![Complex64::default(); m];
        for s in 0..steps {
            let t_mid = t0 + dt * (s as f64 + 0.5);
            let field = self.gamma * (self.omega * t_mid).cos();
            for i in 0..m {
                let hd = 2.0 * self.kin + self.v0[i + 1] + field * self.x[i + 1];
                diag[i] = Complex64::new(1.0, 0.0) + a * hd;
                // (1 − aH) ψ
                let mut r = (Complex64::new(1.0, 0.0) - a * hd) * psi[i];
                if i > 0 {
                    r -= off * psi[i - 1];
                }
                if i + 1 < m {
                    r -= off * psi[i + 1];
                }
                rhs[i] = r;
            }
            // Thomas solve of (1 + aH) ψ' = rhs.
            cprime[0] = off / diag[0];
            rhs[0] /= diag[0];
            for i in 1..m {
                let denom = diag[i] - off * cprime[i - 1];
                cprime[i] = off / denom;
                rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
            }
            psi[m - 1] = rhs[m - 1];
            for i in (0..m - 1).rev() {
                psi[i] = rhs[i] - cprime[i] * psi[i + 1];
            }
        }
        let mut out = Vec::with_capacity(n);
        out.push(Complex64::default());
        out.extend_from_slice(&psi);
        out.push(Complex64::default());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::oscillator_ladder;

    fn ladder(n: usize) -> DipoleDecomposition {
        let w: Vec<f64> = (0..n).map(|k| k as f64 + 0.5).collect();
        DipoleDecomposition::from_parts(oscillator_ladder(n), &w).unwrap()
    }

    #[test]
    fn free_phases_without_drive() {
        let dip = ladder(4);
        let p = WellParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = DriveConfig::new(0.0, 0.8, 0.0, &p).unwrap();
        let phi0 = CVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]);
        let r = reference_evolve_basis(&dip, &d, &phi0, 0.3, 4.0, None).unwrap();
        for k in 0..4 {
            let want = phi0[k] * Complex64::new(0.0, -(k as f64 + 0.5) / 0.8 * 3.7).exp();
            assert!((r.phi_hat[k] - want).norm() <= 1e-10);
        }
        assert!(r.norm_drift.abs() <= 1e-9);
    }

    #[test]
    fn coarse_step_is_refused() {
        let dip = ladder(4);
        let p = WellParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = DriveConfig::new(0.1, 1.0, 0.0, &p).unwrap();
        let phi0 = CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            0.0.into(),
            0.0.into(),
            0.0.into(),
        ]);
        let r = reference_evolve_basis(&dip, &d, &phi0, 0.0, 6.0, Some(0.5));
        assert!(matches!(r, Err(Error::StepDoubling { .. })));
    }

    #[test]
    fn static_ground_state_on_grid() {
        let p = WellParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = DriveConfig::new(0.0, 1.0, 0.0, &p).unwrap();
        let grid = GridSpec {
            x_min: -10.0,
            x_max: 10.0,
            n_points: 801,
        };
        // Exact discrete ground state is not needed: |Φ|² of the continuum
        // ground state is stationary up to the O(h²) mismatch, so use the FD
        // eigenvector instead.
        let sol = crate::oracle::grid_solve(&p, &grid, 1).unwrap();
        let psi0: Vec<Complex64> = sol.vectors[0]
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let r = reference_evolve_grid(&p, &d, &grid, &psi0, 0.0, 3.0, 0.01, 1e-5).unwrap();
        let worst = r
            .psi
            .iter()
            .zip(&psi0)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
        assert!(r.norm_drift.abs() <= 1e-8);
    }
}
