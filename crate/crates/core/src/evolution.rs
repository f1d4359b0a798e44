//! Driven evolution in the dipole basis.
//!
//! With `ξ = ωt`, the modal amplitudes `φ̂` obey
//! `i dφ̂/dξ = (diag(ω_k)/ω + β cos ξ X) φ̂`. Writing `φ̂ = V f` and
//! `f = exp(−iβ sin ξ Λ) q` removes the drive from the diagonal and leaves
//! `i dq/dξ = K(ξ) q` with
//!
//! ```text
//! K_lm(ξ) = (Ω_lm/ω) exp(iβ(λ_l − λ_m) sin ξ)
//! ```
//!
//! The one-shot propagator is `exp(−iU(ξ, ξ₀))` with `U = ∫K`, whose entries
//! are `(Ω_lm/ω) I(ξ, ξ₀ | β(λ_l − λ_m))`. This is the leading Magnus term;
//! [`evolve_substepped`] composes it over short sub-intervals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dipole::DipoleDecomposition;
use crate::error::{Error, Result};
use crate::kernel::{i_interval, FourierKernel, Route, Truncation};
use crate::quad::{integrate, QuadOptions};
use crate::special::bessel_j;
use crate::well::{eval_psi, EigenBasis, WellParams};

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Monochromatic drive `γ x cos ωt`, with `β = γℓ/(ħω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub gamma: f64,
    pub omega: f64,
    pub beta: f64,
    pub xi0: f64,
}

impl DriveConfig {
    /// Drive with amplitude `gamma`; `β` follows from the well's `ℓ` and `ħ`.
    pub fn new(gamma: f64, omega: f64, xi0: f64, params: &WellParams) -> Result<Self> {
        let d = Self {
            gamma,
            omega,
            beta: gamma * params.ell() / (params.hbar * omega),
            xi0,
        };
        d.validate()?;
        Ok(d)
    }

    /// Drive specified by `β`; `γ` follows.
    pub fn from_beta(beta: f64, omega: f64, xi0: f64, params: &WellParams) -> Result<Self> {
        let mut d = Self::new(
            beta * params.hbar * omega / params.ell(),
            omega,
            xi0,
            params,
        )?;
        // Keep the requested β rather than its round trip through γ.
        d.beta = beta;
        Ok(d)
    }

    /// Same amplitude `γ` at another frequency.
    pub fn at_omega(&self, omega: f64, params: &WellParams) -> Result<Self> {
        Self::new(self.gamma, omega, self.xi0, params)
    }

    pub fn recomputed_beta(&self, params: &WellParams) -> f64 {
        self.gamma * params.ell() / (params.hbar * self.omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParam {
                field: "omega",
                reason: format!("must be finite and > 0, got {}", self.omega),
            });
        }
        // β = 0 is allowed: it is the undriven control run.
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParam {
                field: "beta",
                reason: format!("must be finite and >= 0, got {}", self.beta),
            });
        }
        if !self.xi0.is_finite() {
            return Err(Error::InvalidParam {
                field: "xi0",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// `K(ξ) = (1/ω) e^{iβ sin ξ Λ} Ω e^{−iβ sin ξ Λ}`.
pub fn build_k(xi: f64, dip: &DipoleDecomposition, drive: &DriveConfig) -> CMatrix {
    let n = dip.n();
    let s = drive.beta * xi.sin();
    CMatrix::from_fn(n, n, |l, m| {
        let phase = Complex64::from_polar(1.0, s * (dip.lambda[l] - dip.lambda[m]));
        phase * (dip.omega[(l, m)] / drive.omega)
    })
}

/// Pairwise kernel data for repeated `U` assembly at one drive setting.
#[derive(Debug, Clone)]
pub struct PropagatorBuilder {
    n: usize,
    /// `Ω/ω`.
    scaled: DMatrix<f64>,
    /// `α_lm = β(λ_l − λ_m)` for `l < m`, row-major over the upper triangle.
    alphas: Vec<f64>,
    kernels: Vec<FourierKernel>,
    route: Route,
    truncation: Truncation,
}

impl PropagatorBuilder {
    pub fn new(
        dip: &DipoleDecomposition,
        drive: &DriveConfig,
        route: Route,
        truncation: Truncation,
    ) -> Result<Self> {
        drive.validate()?;
        let n = dip.n();
        let mut alphas = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for l in 0..n {
            for m in l + 1..n {
                alphas.push(drive.beta * (dip.lambda[l] - dip.lambda[m]));
            }
        }
        let kernels = if route == Route::Fourier {
            alphas
                .iter()
                .map(|&a| match truncation.k_max {
                    Some(k) => FourierKernel::new(a, k),
                    None => FourierKernel::with_default_truncation(a),
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            n,
            scaled: &dip.omega / drive.omega,
            alphas,
            kernels,
            route,
            truncation,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `U(ξ, ξ₀)`, Hermitian by construction.
    pub fn u(&self, xi: f64, xi0: f64) -> Result<CMatrix> {
        let n = self.n;
        let mut u = CMatrix::zeros(n, n);
        let dxi = xi - xi0;
        for l in 0..n {
            u[(l, l)] = Complex64::new(self.scaled[(l, l)] * dxi, 0.0);
        }
        let mut idx = 0;
        for l in 0..n {
            for m in l + 1..n {
                let integral = match self.route {
                    Route::Fourier => self.kernels[idx].interval(xi, xi0),
                    Route::Power => {
                        i_interval(xi, xi0, self.alphas[idx], Route::Power, self.truncation)?
                    }
                };
                let v = integral * self.scaled[(l, m)];
                u[(l, m)] = v;
                u[(m, l)] = v.conj();
                idx += 1;
            }
        }
        Ok(u)
    }
}

/// `U(ξ, ξ₀) = ∫_{ξ₀}^{ξ} K(z) dz` assembled from the kernel series.
pub fn build_u(
    xi: f64,
    xi0: f64,
    dip: &DipoleDecomposition,
    drive: &DriveConfig,
    route: Route,
    truncation: Truncation,
) -> Result<CMatrix> {
    PropagatorBuilder::new(dip, drive, route, truncation)?.u(xi, xi0)
}

/// Largest tolerated `‖U − U†‖_max`, relative to `max(1, ‖U‖_max)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues ascending and orthonormal eigenvectors of a Hermitian `U`.
/// Each eigenvector is rotated so its largest-magnitude component (first
/// on ties) is real and positive.
pub fn eigen_u(u: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    if !u.is_square() {
        return Err(Error::Dimension {
            expected: u.nrows(),
            got: u.ncols(),
        });
    }
    let n = u.nrows();
    let adj = u.adjoint();
    let residual = (u - &adj).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let scale = u.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { residual });
    }
    let sym = (u + adj) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mu = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut c = eig.eigenvectors.column(i).into_owned();
        let mut lead = 0;
        for j in 1..n {
            if c[j].norm() > c[lead].norm() * (1.0 + 1e-12) {
                lead = j;
            }
        }
        let z = c[lead];
        if z.norm() > 0.0 {
            c *= z.conj() / z.norm();
        }
        c[lead] = Complex64::new(c[lead].norm(), 0.0);
        vecs.set_column(col, &c);
    }
    Ok((mu, vecs))
}

/// `Σ_l (u_l† q₀) e^{−iμ_l} u_l`.
pub fn evolve_spectral(q0: &CVector, mu: &DVector<f64>, u: &CMatrix) -> Result<CVector> {
    check_len(u.nrows(), q0.len())?;
    let coeff = u.adjoint() * q0;
    let phased = CVector::from_iterator(
        mu.len(),
        coeff
            .iter()
            .zip(mu.iter())
            .map(|(c, &m)| c * (-I * m).exp()),
    );
    Ok(u * phased)
}

/// One-shot evolution `q = exp(−iU) q₀`.
pub fn evolve(q0: &CVector, u: &CMatrix) -> Result<CVector> {
    let (mu, vecs) = eigen_u(u)?;
    evolve_spectral(q0, &mu, &vecs)
}

/// `exp(−iU)` as a matrix.
pub fn propagator(u: &CMatrix) -> Result<CMatrix> {
    let (mu, vecs) = eigen_u(u)?;
    let d = CVector::from_iterator(mu.len(), mu.iter().map(|&m| (-I * m).exp()));
    Ok(&vecs * CMatrix::from_diagonal(&d) * vecs.adjoint())
}

/// Product of one-shot propagators over `substeps` equal sub-intervals of
/// `[ξ₀, ξ₁]`. Returns `q` at each sub-step end, the last one being `q(ξ₁)`.
pub fn evolve_substepped(
    q0: &CVector,
    builder: &PropagatorBuilder,
    xi0: f64,
    xi1: f64,
    substeps: usize,
) -> Result<Vec<CVector>> {
    check_len(builder.n(), q0.len())?;
    if substeps == 0 {
        return Err(Error::InvalidParam {
            field: "substeps",
            reason: "must be at least 1".into(),
        });
    }
    let h = (xi1 - xi0) / substeps as f64;
    let mut q = q0.clone();
    let mut out = Vec::with_capacity(substeps);
    for j in 0..substeps {
        let a = xi0 + h * j as f64;
        let b = if j + 1 == substeps { xi1 } else { a + h };
        q = evolve(&q, &builder.u(b, a)?)?;
        out.push(q.clone());
    }
    Ok(out)
}

/// `q(ξ₀) = e^{+iβ sin ξ₀ Λ} Vᵀ φ̂(ξ₀)`.
pub fn prepare_q(
    phi_hat0: &CVector,
    xi0: f64,
    dip: &DipoleDecomposition,
    drive: &DriveConfig,
) -> Result<CVector> {
    check_len(dip.n(), phi_hat0.len())?;
    let f = dip.v.transpose().map(|x| Complex64::new(x, 0.0)) * phi_hat0;
    let s = drive.beta * xi0.sin();
    Ok(CVector::from_iterator(
        f.len(),
        f.iter()
            .zip(dip.lambda.iter())
            .map(|(z, &l)| z * Complex64::from_polar(1.0, s * l)),
    ))
}

/// Unit vector `e_k` of length `n`.
pub fn basis_vector(n: usize, k: usize) -> Result<CVector> {
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    let mut e = CVector::zeros(n);
    e[k] = Complex64::new(1.0, 0.0);
    Ok(e)
}

/// `f = e^{−iβ sin ξ Λ} q` and `φ̂ = V f`.
pub fn undo_transforms(
    q: &CVector,
    xi: f64,
    dip: &DipoleDecomposition,
    drive: &DriveConfig,
) -> Result<(CVector, CVector)> {
    check_len(dip.n(), q.len())?;
    let s = drive.beta * xi.sin();
    let f = CVector::from_iterator(
        q.len(),
        q.iter()
            .zip(dip.lambda.iter())
            .map(|(z, &l)| z * Complex64::from_polar(1.0, -s * l)),
    );
    let phi = dip.v.map(|x| Complex64::new(x, 0.0)) * &f;
    Ok((f, phi))
}

/// `Φ(x) = Σ_m φ̂_m ψ_m(x)` at physical positions.
pub fn reconstruct_phi(x: &[f64], phi_hat: &CVector, basis: &EigenBasis) -> Result<Vec<Complex64>> {
    if phi_hat.len() > basis.n_states() {
        return Err(Error::Dimension {
            expected: basis.n_states(),
            got: phi_hat.len(),
        });
    }
    let ell = basis.params.ell();
    let (lo, hi) = basis.support();
    x.iter()
        .map(|&xp| {
            if !xp.is_finite() {
                return Err(Error::InvalidParam {
                    field: "x",
                    reason: "must be finite".into(),
                });
            }
            let xn = xp / ell;
            if xn < lo || xn > hi {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut z = Complex64::new(0.0, 0.0);
            for (m, c) in phi_hat.iter().enumerate() {
                z += c * eval_psi(basis, m, xp)?;
            }
            Ok(z)
        })
        .collect()
}

/// `∫|Φ|² dx` by adaptive quadrature on each half-line.
pub fn phi_norm2(phi_hat: &CVector, basis: &EigenBasis) -> Result<f64> {
    let n = phi_hat.len();
    if n > basis.n_states() {
        return Err(Error::Dimension {
            expected: basis.n_states(),
            got: n,
        });
    }
    let (lo, hi) = basis.support();
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        max_intervals: 4000,
    };
    let mut total = 0.0;
    for (a, b) in [(lo, 0.0), (0.0, hi)] {
        let r = integrate(
            |x| {
                let psi = basis.psi_all_natural(n, x);
                let z: Complex64 = phi_hat.iter().zip(&psi).map(|(c, p)| c * p).sum();
                vec![z.norm_sqr()]
            },
            a,
            b,
            1,
            opts,
        )?;
        total += r.value[0];
    }
    Ok(total)
}

/// Everything computed for one phase `ξ`.
#[derive(Debug, Clone)]
pub struct PropagatorTables {
    pub xi: f64,
    pub u: CMatrix,
    pub mu: DVector<f64>,
    pub eigvecs: CMatrix,
    pub q: CVector,
    pub f: CVector,
    pub phi_hat: CVector,
}

/// One-shot propagation from `drive.xi0` to `xi` with all intermediates.
pub fn propagate(
    q0: &CVector,
    xi: f64,
    dip: &DipoleDecomposition,
    drive: &DriveConfig,
    builder: &PropagatorBuilder,
) -> Result<PropagatorTables> {
    let u = builder.u(xi, drive.xi0)?;
    let (mu, eigvecs) = eigen_u(&u)?;
    let q = evolve_spectral(q0, &mu, &eigvecs)?;
    let (f, phi_hat) = undo_transforms(&q, xi, dip, drive)?;
    Ok(PropagatorTables {
        xi,
        u,
        mu,
        eigvecs,
        q,
        f,
        phi_hat,
    })
}

/// Response recorded by [`resonance_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// Largest `1 − |φ̂₀|²` over the observation window, sampled at every
    /// sub-step, starting from the ground state.
    Depletion,
    /// Frobenius norm of the off-diagonal part of `U(ξ₀ + 2πP, ξ₀)`.
    OffDiagonalU,
    /// `J_n(α_lm) Ω_lm`.
    HarmonicWeight { l: usize, m: usize, n: usize },
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depletion" => Ok(Observable::Depletion),
            "off_diagonal_u" => Ok(Observable::OffDiagonalU),
            other => {
                // harmonic_weight:l,m,n
                let rest = other
                    .strip_prefix("harmonic_weight:")
                    .ok_or_else(|| Error::UnknownObservable(other.into()))?;
                let parts: Vec<usize> = rest
                    .split(',')
                    .map(|p| p.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::UnknownObservable(other.into()))?;
                match parts[..] {
                    [l, m, n] => Ok(Observable::HarmonicWeight { l, m, n }),
                    _ => Err(Error::UnknownObservable(other.into())),
                }
            }
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Observable::Depletion => write!(f, "depletion"),
            Observable::OffDiagonalU => write!(f, "off_diagonal_u"),
            Observable::HarmonicWeight { l, m, n } => write!(f, "harmonic_weight:{l},{m},{n}"),
        }
    }
}

/// How a depletion scan evolves the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScanMethod {
    /// Product of one-shot propagators, one per sample.
    #[default]
    Propagator,
    /// Fourth-order reference integrator, sampled at the same phases.
    Reference,
}

/// Everything a scan needs besides the system and the frequency list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub observable: Observable,
    pub method: ScanMethod,
    /// Observation window in drive periods.
    pub periods: usize,
    /// Samples per period for the depletion maximum.
    pub samples_per_period: usize,
    pub route: Route,
    pub truncation: Truncation,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            observable: Observable::Depletion,
            method: ScanMethod::Propagator,
            periods: 1,
            samples_per_period: 64,
            route: Route::Fourier,
            truncation: Truncation::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub omega: f64,
    pub beta: f64,
    pub value: f64,
}

/// Evaluate the observable at each drive frequency in `omegas`, keeping the
/// template's amplitude `γ` (so `β ∝ 1/ω`). Points run in parallel on the
/// current rayon pool; the output order follows `omegas`.
pub fn resonance_scan(
    dip: &DipoleDecomposition,
    params: &WellParams,
    template: &DriveConfig,
    omegas: &[f64],
    opts: &ScanOptions,
) -> Result<Vec<ScanPoint>> {
    if let Observable::HarmonicWeight { l, m, .. } = opts.observable {
        let n = dip.n();
        if l >= n || m >= n {
            return Err(Error::IndexOutOfRange {
                index: l.max(m),
                len: n,
            });
        }
    }
    for (field, v) in [
        ("periods", opts.periods),
        ("samples_per_period", opts.samples_per_period),
    ] {
        if v == 0 {
            return Err(Error::InvalidParam {
                field,
                reason: "must be at least 1".into(),
            });
        }
    }
    omegas
        .par_iter()
        .map(|&omega| {
            let drive = template.at_omega(omega, params)?;
            let value = scan_value(dip, &drive, opts)?;
            Ok(ScanPoint {
                omega,
                beta: drive.beta,
                value,
            })
        })
        .collect()
}

fn scan_value(dip: &DipoleDecomposition, drive: &DriveConfig, opts: &ScanOptions) -> Result<f64> {
    let span = 2.0 * std::f64::consts::PI * opts.periods as f64;
    let (xi0, xi1) = (drive.xi0, drive.xi0 + span);
    let samples = opts.samples_per_period * opts.periods;
    match opts.observable {
        Observable::Depletion => {
            let phi0 = basis_vector(dip.n(), 0)?;
            let ground = |phi: &CVector| 1.0 - phi[0].norm_sqr();
            match opts.method {
                ScanMethod::Propagator => {
                    let builder = PropagatorBuilder::new(dip, drive, opts.route, opts.truncation)?;
                    let q0 = prepare_q(&phi0, xi0, dip, drive)?;
                    let qs = evolve_substepped(&q0, &builder, xi0, xi1, samples)?;
                    let h = span / samples as f64;
                    let mut worst = 0.0f64;
                    for (j, q) in qs.iter().enumerate() {
                        let (_, phi) = undo_transforms(q, xi0 + h * (j + 1) as f64, dip, drive)?;
                        worst = worst.max(ground(&phi));
                    }
                    Ok(worst)
                }
                ScanMethod::Reference => {
                    let traj =
                        crate::oracle::reference_trajectory(dip, drive, &phi0, xi0, xi1, samples)?;
                    Ok(traj.iter().map(ground).fold(0.0, f64::max))
                }
            }
        }
        Observable::OffDiagonalU => {
            let u = build_u(xi1, xi0, dip, drive, opts.route, opts.truncation)?;
            let mut s = 0.0;
            for l in 0..u.nrows() {
                for m in 0..u.ncols() {
                    if l != m {
                        s += u[(l, m)].norm_sqr();
                    }
                }
            }
            Ok(s.sqrt())
        }
        Observable::HarmonicWeight { l, m, n } => {
            let alpha = drive.beta * (dip.lambda[l] - dip.lambda[m]);
            Ok(bessel_j(n, alpha)? * dip.omega[(l, m)])
        }
    }
}

/// Local maxima of a scan, in scan order. Plateaus count once, at their
/// first point; the end points never count.
pub fn scan_peaks(points: &[ScanPoint]) -> Vec<ScanPoint> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < points.len() {
        if points[i].value > points[i - 1].value {
            let mut j = i;
            while j + 1 < points.len() && points[j + 1].value == points[i].value {
                j += 1;
            }
            if j + 1 < points.len() && points[j + 1].value < points[i].value {
                out.push(points[i]);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// The point with the largest value (first on ties).
pub fn dominant_peak(points: &[ScanPoint]) -> Option<ScanPoint> {
    points
        .iter()
        .copied()
        .fold(None, |best: Option<ScanPoint>, p| match best {
            Some(b) if b.value >= p.value => Some(b),
            _ => Some(p),
        })
}
