//! Run configuration: a TOML document with one table per concern.
//!
//! Every field has a default, so an empty file is a valid run on the (1, 4)
//! well. [`RunConfig::resolve`] validates the document, fills in the drive
//! amplitude or `β` from the other, and returns the derived run inputs.

use std::f64::consts::PI;
use std::path::Path;

use cqwell::evolution::{DriveConfig, Observable, ScanMethod};
use cqwell::kernel::{Route, Truncation};
use cqwell::well::WellParams;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Largest accepted `β`.
pub const BETA_MAX: f64 = 10.0;
/// `β` above which the series propagator is slow to converge.
pub const BETA_WARN: f64 = 1.0;
/// `β` used when the drive gives neither `gamma` nor `beta`.
pub const DEFAULT_BETA: f64 = 0.05;
/// Largest accepted kernel argument for `kernel-dump`.
pub const ALPHA_MAX: f64 = 20.0;
/// Largest accepted basis size.
pub const N_STATES_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Basis truncation `n`.
    pub n_states: usize,
    pub well: WellSection,
    pub drive: DriveSection,
    pub kernel: KernelSection,
    pub evolve: EvolveSection,
    pub scan: ScanSection,
    pub kernel_dump: KernelDumpSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_states: 6,
            well: WellSection::default(),
            drive: DriveSection::default(),
            kernel: KernelSection::default(),
            evolve: EvolveSection::default(),
            scan: ScanSection::default(),
            kernel_dump: KernelDumpSection::default(),
            oracle: OracleSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Physical constants of the well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellSection {
    pub m: f64,
    pub k1: f64,
    pub k2: f64,
    pub hbar: f64,
    /// Relative tolerance of the level solver.
    pub tol: f64,
}

impl Default for WellSection {
    fn default() -> Self {
        Self {
            m: 1.0,
            k1: 1.0,
            k2: 4.0,
            hbar: 1.0,
            tol: 1e-12,
        }
    }
}

/// Drive `γ x cos ωt`. Give `gamma` or `beta`; the other is derived. If both
/// are given they must agree; with neither, `β` is [`DEFAULT_BETA`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Angular frequency, physical units.
    pub omega: f64,
    /// Start phase `ξ₀`.
    pub xi0: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            gamma: None,
            beta: None,
            omega: 2f64.sqrt(),
            xi0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub route: Route,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
}

impl KernelSection {
    pub fn truncation(&self) -> Truncation {
        Truncation {
            k_max: self.k_max,
            m_max: self.m_max,
        }
    }
}

/// How `evolve` advances between output rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Compose one-shot propagators over each row interval, split into
    /// `substeps` pieces.
    #[default]
    Product,
    /// Every row is `exp(−iU(ξ, ξ₀)) q₀`.
    OneShot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    /// Trajectory length in drive periods.
    pub periods: f64,
    pub samples_per_period: usize,
    pub propagation: Propagation,
    /// Sub-steps per row interval for `product`.
    pub substeps: usize,
    /// Initial modal amplitudes `φ̂(ξ₀)` as `[re, im]` pairs; the ground
    /// state when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 2]>>,
    /// Entries `(l, m)` of `U(ξ, ξ₀)` to tabulate.
    pub u_entries: Vec<[usize; 2]>,
    /// Add a `field_norm` column with `∫|Φ|² dx`.
    pub field_norm: bool,
    /// Write a `Φ(x)` snapshot every this many rows; 0 disables.
    pub snapshot_every: usize,
    pub snapshot_points: usize,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            periods: 1.0,
            samples_per_period: 64,
            propagation: Propagation::Product,
            substeps: 1,
            initial: None,
            u_entries: Vec::new(),
            field_norm: false,
            snapshot_every: 0,
            snapshot_points: 201,
        }
    }
}

/// Units of the scan frequency grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaUnit {
    /// Multiples of `√(ω₁ω₂)`.
    #[default]
    Natural,
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Number of grid points; 0 gives an empty table.
    pub omega_points: usize,
    pub omega_unit: OmegaUnit,
    pub observable: String,
    pub method: ScanMethod,
    pub periods: usize,
    pub samples_per_period: usize,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            omega_min: 0.5,
            omega_max: 3.5,
            omega_points: 121,
            omega_unit: OmegaUnit::Natural,
            observable: "depletion".into(),
            method: ScanMethod::Propagator,
            periods: 1,
            samples_per_period: 64,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelDumpSection {
    pub alpha: f64,
    pub xi0: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub points: usize,
    /// Add the quadrature reference and the difference.
    pub quadrature: bool,
}

impl Default for KernelDumpSection {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            xi0: 0.0,
            xi_min: 0.0,
            xi_max: 4.0 * PI,
            points: 201,
            quadrature: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Coarse grid size of the level oracle.
    pub grid_points: usize,
    /// Grid size of the Crank–Nicolson field reference; 0 skips it.
    pub field_points: usize,
    /// Field reference end time in drive periods.
    pub field_periods: f64,
    /// Crank–Nicolson time step, physical units.
    pub dt: f64,
    pub doubling_tol: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            field_points: 4001,
            field_periods: 0.5,
            dt: 2e-3,
            doubling_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            format: Format::Csv,
        }
    }
}

/// Validated inputs derived from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: WellParams,
    pub drive: DriveConfig,
    pub route: Route,
    pub truncation: Truncation,
    pub observable: Observable,
    /// Scan grid, physical units.
    pub omegas: Vec<f64>,
    pub warnings: Vec<String>,
}

fn err(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(err(field, format!("must be finite and > 0, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(err(field, format!("must be finite, got {v}")))
    }
}

fn check_beta(
    field: &str,
    beta: f64,
    gamma: f64,
    warnings: &mut Vec<String>,
) -> Result<(), ConfigError> {
    if beta == 0.0 && gamma == 0.0 {
        return Ok(());
    }
    if !(beta > 0.0 && beta <= BETA_MAX) {
        return Err(err(
            field,
            format!("β must lie in (0, {BETA_MAX}], got {beta}"),
        ));
    }
    if beta > BETA_WARN {
        warnings.push(format!(
            "{field}: β = {beta} exceeds {BETA_WARN}; the Bessel series need many terms and one-shot propagation is inaccurate"
        ));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    pub fn params(&self) -> Result<WellParams, ConfigError> {
        let w = &self.well;
        for (field, v) in [
            ("well.m", w.m),
            ("well.k1", w.k1),
            ("well.k2", w.k2),
            ("well.hbar", w.hbar),
        ] {
            positive(field, v)?;
        }
        if !(w.tol > 0.0 && w.tol <= 1e-3) {
            return Err(err(
                "well.tol",
                format!("must lie in (0, 1e-3], got {}", w.tol),
            ));
        }
        Ok(WellParams {
            m: w.m,
            k1: w.k1,
            k2: w.k2,
            hbar: w.hbar,
        })
    }

    /// Validate everything and derive the run inputs.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let mut warnings = Vec::new();
        let params = self.params()?;
        if self.n_states == 0 || self.n_states > N_STATES_MAX {
            return Err(err(
                "n_states",
                format!("must lie in [1, {N_STATES_MAX}], got {}", self.n_states),
            ));
        }
        let n = self.n_states;

        let d = &self.drive;
        positive("drive.omega", d.omega)?;
        finite("drive.xi0", d.xi0)?;
        let scale = params.ell() / (params.hbar * d.omega);
        let given_beta = match (d.gamma, d.beta) {
            (None, None) => Some(DEFAULT_BETA),
            (_, b) => b,
        };
        let (gamma, beta) = match (d.gamma, given_beta) {
            (Some(g), Some(b)) => {
                if (g * scale - b).abs() > 1e-12 * b.abs().max(f64::MIN_POSITIVE) {
                    return Err(err(
                        "drive",
                        format!(
                            "gamma = {g} and beta = {b} disagree: γℓ/(ħω) = {}",
                            g * scale
                        ),
                    ));
                }
                (g, b)
            }
            (Some(g), None) => (g, g * scale),
            (None, b) => {
                let b = b.unwrap_or(DEFAULT_BETA);
                (b / scale, b)
            }
        };
        finite("drive.gamma", gamma)?;
        if gamma < 0.0 {
            return Err(err("drive.gamma", format!("must be ≥ 0, got {gamma}")));
        }
        check_beta("drive.beta", beta, gamma, &mut warnings)?;
        // Build from whichever quantity was given so it is kept exactly.
        let drive = match given_beta {
            Some(b) => DriveConfig::from_beta(b, d.omega, d.xi0, &params),
            None => DriveConfig::new(gamma, d.omega, d.xi0, &params),
        }
        .map_err(|e| err("drive", e.to_string()))?;

        if self.kernel.k_max == Some(0) {
            return Err(err("kernel.k_max", "must be at least 1"));
        }

        let e = &self.evolve;
        positive("evolve.periods", e.periods)?;
        if e.samples_per_period == 0 {
            return Err(err("evolve.samples_per_period", "must be at least 1"));
        }
        if e.substeps == 0 {
            return Err(err("evolve.substeps", "must be at least 1"));
        }
        if let Some(init) = &e.initial {
            if init.len() != n {
                return Err(err(
                    "evolve.initial",
                    format!("has {} components, expected n_states = {n}", init.len()),
                ));
            }
            let norm2: f64 = init.iter().map(|[re, im]| re * re + im * im).sum();
            if !((norm2 - 1.0).abs() <= 1e-10) {
                return Err(err(
                    "evolve.initial",
                    format!("must be normalized, |φ̂|² = {norm2}"),
                ));
            }
        }
        for [l, m] in &e.u_entries {
            if *l >= n || *m >= n {
                return Err(err(
                    "evolve.u_entries",
                    format!("({l}, {m}) is outside n_states = {n}"),
                ));
            }
        }
        if e.snapshot_every > 0 && e.snapshot_points < 2 {
            return Err(err("evolve.snapshot_points", "must be at least 2"));
        }

        let s = &self.scan;
        let observable: Observable = s.observable.parse().map_err(|_| {
            err(
                "scan.observable",
                format!("unknown observable `{}`", s.observable),
            )
        })?;
        if let Observable::HarmonicWeight { l, m, .. } = observable {
            if l >= n || m >= n {
                return Err(err(
                    "scan.observable",
                    format!("({l}, {m}) is outside n_states = {n}"),
                ));
            }
        }
        if s.periods == 0 {
            return Err(err("scan.periods", "must be at least 1"));
        }
        if s.samples_per_period == 0 {
            return Err(err("scan.samples_per_period", "must be at least 1"));
        }
        let unit = match s.omega_unit {
            OmegaUnit::Natural => params.frequency_unit(),
            OmegaUnit::Physical => 1.0,
        };
        let omegas: Vec<f64> = if s.omega_points == 0 {
            Vec::new()
        } else {
            positive("scan.omega_min", s.omega_min)?;
            positive("scan.omega_max", s.omega_max)?;
            if s.omega_max < s.omega_min {
                return Err(err("scan.omega_max", "must not be below omega_min"));
            }
            let last = (s.omega_points - 1).max(1) as f64;
            (0..s.omega_points)
                .map(|j| unit * (s.omega_min + (s.omega_max - s.omega_min) * j as f64 / last))
                .collect()
        };
        if let Some(&w_lo) = omegas.first() {
            // β ∝ 1/ω at fixed γ, so the lowest frequency has the largest β.
            check_beta(
                "scan.omega_min",
                gamma * params.ell() / (params.hbar * w_lo),
                gamma,
                &mut warnings,
            )?;
        }

        let k = &self.kernel_dump;
        finite("kernel_dump.alpha", k.alpha)?;
        if k.alpha.abs() > ALPHA_MAX {
            return Err(err(
                "kernel_dump.alpha",
                format!("|α| must be ≤ {ALPHA_MAX}, got {}", k.alpha),
            ));
        }
        for (field, v) in [
            ("kernel_dump.xi0", k.xi0),
            ("kernel_dump.xi_min", k.xi_min),
            ("kernel_dump.xi_max", k.xi_max),
        ] {
            finite(field, v)?;
        }

        let o = &self.oracle;
        if o.grid_points < cqwell::oracle::MIN_LEVEL_POINTS {
            return Err(err(
                "oracle.grid_points",
                format!(
                    "must be at least {}, got {}",
                    cqwell::oracle::MIN_LEVEL_POINTS,
                    o.grid_points
                ),
            ));
        }
        if o.field_points != 0 && o.field_points < 16 {
            return Err(err("oracle.field_points", "must be 0 or at least 16"));
        }
        positive("oracle.field_periods", o.field_periods)?;
        positive("oracle.dt", o.dt)?;
        positive("oracle.doubling_tol", o.doubling_tol)?;

        if self.output.dir.is_empty() {
            return Err(err("output.dir", "must not be empty"));
        }

        Ok(Resolved {
            params,
            drive,
            route: self.kernel.route,
            truncation: self.kernel.truncation(),
            observable,
            omegas,
            warnings,
        })
    }

    /// The configuration with both `gamma` and `beta` filled in, as written
    /// to output headers.
    pub fn resolved_document(&self, r: &Resolved) -> RunConfig {
        let mut c = self.clone();
        c.drive.gamma = Some(r.drive.gamma);
        c.drive.beta = Some(r.drive.beta);
        c
    }
}
