//! Dense-grid finite-difference reference for the stationary spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::well::WellParams;

/// Uniform grid in natural units (lengths in `ℓ`). The node set always
/// contains `x = 0`, where the potential has its curvature kink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

/// Minimum grid size for use as a level oracle.
pub const MIN_LEVEL_POINTS: usize = 2000;
/// Decay lengths `1/√ω̃` kept beyond each classical turning point.
pub const DECAY_LENGTHS: f64 = 8.0;

impl GridSpec {
    /// Grid covering the `n_states` lowest levels of `params` with
    /// `DECAY_LENGTHS` decay lengths beyond each turning point.
    pub fn for_levels(params: &WellParams, n_states: usize, n_points: usize) -> Self {
        let (w1, w2) = params.natural_omegas();
        // Level n_states-1 is below wmax (n + 1/2).
        let e_top = w1.max(w2) * (n_states as f64 + 0.5);
        let right = (2.0 * e_top).sqrt() / w1 + DECAY_LENGTHS / w1.sqrt();
        let left = (2.0 * e_top).sqrt() / w2 + DECAY_LENGTHS / w2.sqrt();
        Self {
            x_min: -left,
            x_max: right,
            n_points,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points as f64 - 1.0)
    }

    /// Node positions `i·h`, `i = -n_left..=n_right`.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        let n_left = (-self.x_min / h).round() as i64;
        let n_right = (self.x_max / h).round() as i64;
        (-n_left..=n_right).map(|i| i as f64 * h).collect()
    }

    /// Same extent, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min < 0.0 && self.x_max > 0.0) {
            return Err(Error::Grid(format!(
                "range [{}, {}] must straddle the origin",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < 16 {
            return Err(Error::Grid(format!("{} points is too few", self.n_points)));
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = T[i, i+1]`.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    fn hamiltonian(params: &WellParams, x: &[f64], h: f64) -> Self {
        let (w1, w2) = params.natural_omegas();
        let kin = 1.0 / (h * h);
        let diag = x
            .iter()
            .map(|&xi| {
                let w = if xi >= 0.0 { w1 } else { w2 };
                kin + 0.5 * w * w * xi * xi
            })
            .collect();
        let off = vec![-0.5 * kin; x.len() - 1];
        Self { diag, off }
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm count).
    fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            d = self.diag[i] - lambda - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + lambda.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an (accurate) eigenvalue by two-sided recurrence:
    /// each side is integrated from its boundary towards `meet`, the direction
    /// in which the wanted solution grows, and the halves are scaled to agree.
    fn eigenvector(&self, lambda: f64, meet: usize) -> Vec<f64> {
        let n = self.diag.len();
        let mut v = vec![0.0; n];
        let b = &self.off;
        v[0] = 1.0;
        v[1] = (lambda - self.diag[0]) * v[0] / b[0];
        for i in 1..=meet {
            v[i + 1] = ((lambda - self.diag[i]) * v[i] - b[i - 1] * v[i - 1]) / b[i];
            if v[i + 1].abs() > 1e100 {
                for w in v.iter_mut().take(i + 2) {
                    *w *= 1e-100;
                }
            }
        }
        let mut u = vec![0.0; n];
        u[n - 1] = 1.0;
        u[n - 2] = (lambda - self.diag[n - 1]) * u[n - 1] / b[n - 2];
        for i in (meet..n - 1).rev() {
            u[i - 1] = ((lambda - self.diag[i]) * u[i] - b[i] * u[i + 1]) / b[i - 1];
            if u[i - 1].abs() > 1e100 {
                for w in u.iter_mut().skip(i - 1) {
                    *w *= 1e-100;
                }
            }
        }
        // Least-squares match over meet-1..=meet+1 stays well defined when the
        // eigenvector has a node at `meet`.
        let (mut num, mut den) = (0.0, 0.0);
        for i in meet - 1..=meet + 1 {
            num += v[i] * u[i];
            den += u[i] * u[i];
        }
        let scale = num / den;
        for i in meet..n {
            v[i] = u[i] * scale;
        }
        v
    }
}

/// Lowest eigenpairs of the three-point finite-difference Hamiltonian.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub grid: GridSpec,
    pub x: Vec<f64>,
    /// Natural-unit energies.
    pub energies: Vec<f64>,
    /// Eigenvectors sampled on `x`, normalized with `Σ v² h = 1`, sign fixed
    /// so the right tail is positive.
    pub vectors: Vec<Vec<f64>>,
}

impl GridSolution {
    /// Linear interpolation of eigenvector `k` at natural position `x`.
    pub fn interpolate(&self, k: usize, x: f64) -> f64 {
        let h = self.grid.spacing();
        let x0 = self.x[0];
        let t = (x - x0) / h;
        if t <= 0.0 || t >= (self.x.len() - 1) as f64 {
            return 0.0;
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        let v = &self.vectors[k];
        v[i] * (1.0 - f) + v[i + 1] * f
    }

    /// `⟨m|x|k⟩` by the trapezoid rule on the grid (natural units).
    pub fn dipole_element(&self, m: usize, k: usize) -> f64 {
        let h = self.grid.spacing();
        self.x
            .iter()
            .zip(self.vectors[m].iter().zip(&self.vectors[k]))
            .map(|(x, (a, b))| a * x * b)
            .sum::<f64>()
            * h
    }
}

/// Diagonalize the finite-difference Hamiltonian on one grid.
pub fn grid_solve(params: &WellParams, grid: &GridSpec, n_states: usize) -> Result<GridSolution> {
    params.validate()?;
    grid.validate()?;
    let x = grid.nodes();
    let h = grid.spacing();
    let t = Tridiagonal::hamiltonian(params, &x, h);
    let lo = 0.0;
    let hi = t.diag.iter().cloned().fold(f64::MIN, f64::max) + 2.0 / (h * h);
    let origin = x
        .iter()
        .position(|&xi| xi == 0.0)
        .expect("grid contains the origin");

    let mut energies = Vec::with_capacity(n_states);
    let mut vectors = Vec::with_capacity(n_states);
    for k in 0..n_states {
        let e = t.eigenvalue(k, lo, hi);
        let mut v = t.eigenvector(e, origin);
        let norm = (v.iter().map(|a| a * a).sum::<f64>() * h).sqrt();
        let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let tail_sign = v
            .iter()
            .rev()
            .find(|a| a.abs() > 1e-3 * vmax)
            .map(|a| a.signum())
            .unwrap_or(1.0);
        for a in v.iter_mut() {
            *a *= tail_sign / norm;
        }
        energies.push(e);
        vectors.push(v);
    }
    Ok(GridSolution {
        grid: *grid,
        x,
        energies,
        vectors,
    })
}

/// Oracle spectrum with second-order Richardson extrapolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridLevels {
    pub grid: GridSpec,
    /// Natural-unit energies on the coarse grid.
    pub coarse: Vec<f64>,
    /// Natural-unit energies on the grid with half the spacing.
    pub fine: Vec<f64>,
    /// `(4·fine − coarse)/3`.
    pub extrapolated: Vec<f64>,
    /// Self-convergence of the extrapolation: relative change when the
    /// same extrapolation is repeated one refinement further.
    pub error_estimate: Vec<f64>,
    /// Extrapolated energies in physical units.
    pub energies: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Relative error estimate above which [`grid_levels`] attaches a warning.
pub const LEVEL_WARN_THRESHOLD: f64 = 1e-7;

pub fn grid_levels(params: &WellParams, grid: &GridSpec, n_states: usize) -> Result<GridLevels> {
    let coarse = grid_solve(params, grid, n_states)?.energies;
    let fine = grid_solve(params, &grid.refined(), n_states)?.energies;
    let finest = grid_solve(params, &grid.refined().refined(), n_states)?.energies;
    let richardson = |c: &[f64], f: &[f64]| -> Vec<f64> {
        c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    };
    let extrapolated = richardson(&coarse, &fine);
    let check = richardson(&fine, &finest);
    let error_estimate: Vec<f64> = extrapolated
        .iter()
        .zip(&check)
        .map(|(e, f)| ((e - f) / f).abs())
        .collect();

    let mut warnings = Vec::new();
    if grid.n_points < MIN_LEVEL_POINTS {
        warnings.push(format!(
            "grid has {} points, below the {} recommended for level reference use",
            grid.n_points, MIN_LEVEL_POINTS
        ));
    }
    let needed = GridSpec::for_levels(params, n_states, grid.n_points);
    if grid.x_min > needed.x_min || grid.x_max < needed.x_max {
        warnings.push(format!(
            "grid [{:.3}, {:.3}] narrower than [{:.3}, {:.3}] needed for {} levels",
            grid.x_min, grid.x_max, needed.x_min, needed.x_max, n_states
        ));
    }
    for (k, err) in error_estimate.iter().enumerate() {
        if *err > LEVEL_WARN_THRESHOLD {
            warnings.push(format!("level {k}: estimated relative error {err:.2e}"));
        }
    }
    let unit = params.energy_unit();
    Ok(GridLevels {
        grid: *grid,
        coarse,
        fine,
        energies: extrapolated.iter().map(|e| e * unit).collect(),
        extrapolated,
        error_estimate,
        warnings,
    })
}
