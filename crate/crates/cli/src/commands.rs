//! The subcommands, as functions from a configuration to tables.

use std::f64::consts::PI;

use cqwell::dipole::{decay_profile, truncation_stability, DipoleDecomposition};
use cqwell::evolution::{
    basis_vector, dominant_peak, evolve, evolve_substepped, phi_norm2, prepare_q, reconstruct_phi,
    resonance_scan, undo_transforms, PropagatorBuilder, ScanOptions,
};
use cqwell::kernel::{i_interval, i_quadrature, Route};
use cqwell::oracle::{grid_levels, reference_evolve_grid, reference_trajectory, GridSpec};
use cqwell::well::{eval_psi, solve_levels, EigenBasis};
use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::{Propagation, Resolved, RunConfig};
use crate::error::{CliError, ConfigError};
use crate::output::{Cell, Header, Output, Table};

type CVector = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Stationary levels and a convergence report.
    Levels,
    /// Dipole matrix, its eigenpairs, and the level frequencies in the dipole basis.
    Dipole,
    /// The oscillatory kernel I(ξ, ξ₀ | α) on a phase grid.
    KernelDump,
    /// Trajectory of level populations from the series propagator.
    Evolve,
    /// Resonance scan over the drive frequency.
    Scan,
    /// Reference tables from the brute-force oracles.
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Levels => "levels",
            Command::Dipole => "dipole",
            Command::KernelDump => "kernel-dump",
            Command::Evolve => "evolve",
            Command::Scan => "scan",
            Command::Oracle => "oracle",
        }
    }
}

/// Run `command` on `cfg`, returning the tables and the file header.
pub fn run(command: Command, cfg: &RunConfig) -> Result<(Output, Header), CliError> {
    let r = cfg.resolve()?;
    let out = match command {
        Command::Levels => cmd_levels(cfg, &r)?,
        Command::Dipole => cmd_dipole(cfg, &r)?,
        Command::KernelDump => cmd_kernel_dump(cfg, &r)?,
        Command::Evolve => cmd_evolve(cfg, &r)?,
        Command::Scan => cmd_scan(cfg, &r)?,
        Command::Oracle => cmd_oracle(cfg, &r)?,
    };
    let p = &r.params;
    let header = Header {
        command: command.name().into(),
        config: cfg.resolved_document(&r),
        derived: vec![
            ("ell".into(), p.ell()),
            ("omega1".into(), p.omega1()),
            ("omega2".into(), p.omega2()),
            ("frequency_unit".into(), p.frequency_unit()),
            ("gamma".into(), r.drive.gamma),
            ("beta".into(), r.drive.beta),
        ],
    };
    Ok((out, header))
}

fn route_name(route: Route) -> &'static str {
    match route {
        Route::Power => "power",
        Route::Fourier => "fourier",
    }
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

fn basis(cfg: &RunConfig, r: &Resolved, n: usize) -> Result<EigenBasis, CliError> {
    Ok(solve_levels(r.params, n, cfg.well.tol)?)
}

pub fn cmd_levels(cfg: &RunConfig, r: &Resolved) -> Result<Output, CliError> {
    let n = cfg.n_states;
    let b = basis(cfg, r, n)?;
    let tight = solve_levels(r.params, n, (cfg.well.tol * 1e-2).max(1e-14))?;
    let natural = b.natural_energies();

    let mut levels = Table::new(
        "levels",
        ["k", "eps", "omega", "nu_right", "nu_left", "eps_natural"],
    );
    let mut conv = Table::new(
        "levels_convergence",
        ["k", "matching_residual", "tighter_tol_change"],
    );
    for (k, s) in b.states.iter().enumerate() {
        levels.push(vec![
            k.into(),
            s.energy.into(),
            s.omega.into(),
            s.nu_right.into(),
            s.nu_left.into(),
            natural[k].into(),
        ]);
        let change = (tight.states[k].energy - s.energy).abs() / s.energy;
        conv.push(vec![k.into(), s.matching_residual.into(), change.into()]);
    }
    let worst = b
        .states
        .iter()
        .map(|s| s.matching_residual)
        .fold(0.0, f64::max);
    Ok(Output {
        tables: vec![levels, conv],
        report: vec![format!("{n} levels, largest matching residual {worst:.1e}")],
        ..Output::default()
    })
}

fn matrix_table(name: &str, prefix: &str, m: &nalgebra::DMatrix<f64>) -> Table {
    let n = m.nrows();
    let mut t = Table::new(
        name,
        std::iter::once("row".to_string()).chain(indexed(prefix, n)),
    );
    for i in 0..n {
        let mut row = vec![Cell::from(i)];
        row.extend((0..n).map(|j| Cell::from(m[(i, j)])));
        t.push(row);
    }
    t
}

pub fn cmd_dipole(cfg: &RunConfig, r: &Resolved) -> Result<Output, CliError> {
    let n = cfg.n_states;
    let b = basis(cfg, r, n + 4)?;
    let dip = DipoleDecomposition::new(&b, n)?;

    let mut eig = Table::new(
        "dipole_lambda",
        ["k".to_string(), "lambda".to_string()]
            .into_iter()
            .chain(indexed("v", n)),
    );
    for k in 0..n {
        let mut row = vec![Cell::from(k), Cell::from(dip.lambda[k])];
        row.extend((0..n).map(|j| Cell::from(dip.v[(j, k)])));
        eig.push(row);
    }
    let mut decay = Table::new("dipole_decay", ["offset", "max_abs_x"]);
    for (d, v) in decay_profile(&dip.x).into_iter().enumerate() {
        decay.push(vec![d.into(), v.into()]);
    }
    let stability = truncation_stability(&b, n)?;
    let mut stab = Table::new("dipole_stability", ["k", "relative_change_n_plus_4"]);
    for (k, v) in stability.iter().enumerate() {
        stab.push(vec![k.into(), (*v).into()]);
    }
    let worst = stability.iter().copied().fold(0.0, f64::max);
    Ok(Output {
        tables: vec![
            matrix_table("dipole_x", "x", &dip.x),
            eig,
            matrix_table("dipole_omega", "omega", &dip.omega),
            decay,
            stab,
        ],
        report: vec![format!(
            "n = {n}; largest relative change of λ_k (k ≤ n/2) at n + 4: {worst:.2e} (reported, not enforced)"
        )],
        ..Output::default()
    })
}

pub fn cmd_kernel_dump(cfg: &RunConfig, r: &Resolved) -> Result<Output, CliError> {
    let k = &cfg.kernel_dump;
    let mut cols = vec!["xi", "re", "im"];
    if k.quadrature {
        cols.extend(["re_quad", "im_quad", "abs_diff"]);
    }
    let mut t = Table::new("kernel_dump", cols);
    let mut worst = 0.0f64;
    for j in 0..k.points {
        let xi = if k.points == 1 {
            k.xi_min
        } else {
            k.xi_min + (k.xi_max - k.xi_min) * j as f64 / (k.points - 1) as f64
        };
        let v = i_interval(xi, k.xi0, k.alpha, r.route, r.truncation)?;
        let mut row = vec![Cell::from(xi), Cell::from(v.re), Cell::from(v.im)];
        if k.quadrature {
            let q = i_quadrature(xi, k.xi0, k.alpha)?;
            let d = (v - q).norm();
            worst = worst.max(d);
            row.extend([Cell::from(q.re), Cell::from(q.im), Cell::from(d)]);
        }
        t.push(row);
    }
    let mut report = vec![format!(
        "{} points, route {}, α = {}",
        k.points,
        route_name(r.route),
        k.alpha
    )];
    if k.quadrature {
        report.push(format!("largest |series − quadrature| = {worst:.2e}"));
    }
    Ok(Output {
        tables: vec![t],
        report,
        ..Output::default()
    })
}

/// Initial modal amplitudes: the configured vector or the ground state.
fn initial_state(cfg: &RunConfig) -> Result<CVector, CliError> {
    let n = cfg.n_states;
    Ok(match &cfg.evolve.initial {
        Some(v) => DVector::from_iterator(n, v.iter().map(|[re, im]| Complex64::new(*re, *im))),
        None => basis_vector(n, 0)?,
    })
}

/// Output phases `ξ_j`, `j = 0..=N`.
fn sample_phases(cfg: &RunConfig, r: &Resolved) -> Vec<f64> {
    let e = &cfg.evolve;
    let rows = ((e.periods * e.samples_per_period as f64).round() as usize).max(1);
    let span = 2.0 * PI * e.periods;
    (0..=rows)
        .map(|j| r.drive.xi0 + span * j as f64 / rows as f64)
        .collect()
}

fn population_columns(n: usize) -> Vec<String> {
    ["xi", "t", "norm"]
        .iter()
        .map(|s| s.to_string())
        .chain(indexed("pop", n))
        .collect()
}

fn population_row(xi: f64, omega: f64, phi_hat: &CVector) -> Vec<Cell> {
    let mut row = vec![
        Cell::from(xi),
        Cell::from(xi / omega),
        Cell::from(phi_hat.norm()),
    ];
    row.extend(phi_hat.iter().map(|z| Cell::from(z.norm_sqr())));
    row
}

/// Physical positions for `Φ` snapshots and grid references.
fn snapshot_grid(r: &Resolved, n: usize, points: usize) -> Vec<f64> {
    let g = GridSpec::for_levels(&r.params, n, points);
    let ell = r.params.ell();
    (0..points)
        .map(|i| ell * (g.x_min + (g.x_max - g.x_min) * i as f64 / (points - 1) as f64))
        .collect()
}

pub fn cmd_evolve(cfg: &RunConfig, r: &Resolved) -> Result<Output, CliError> {
    let e = &cfg.evolve;
    let n = cfg.n_states;
    let b = basis(cfg, r, n)?;
    let dip = DipoleDecomposition::new(&b, n)?;
    let builder = PropagatorBuilder::new(&dip, &r.drive, r.route, r.truncation)?;
    let phi0 = initial_state(cfg)?;
    let xi0 = r.drive.xi0;
    let q0 = prepare_q(&phi0, xi0, &dip, &r.drive)?;
    let phases = sample_phases(cfg, r);

    let mut cols = population_columns(n);
    if e.field_norm {
        cols.push("field_norm".into());
    }
    for [l, m] in &e.u_entries {
        cols.push(format!("re_u_{l}_{m}"));
        cols.push(format!("im_u_{l}_{m}"));
    }
    let mut traj = Table::new("trajectory", cols);
    let mut snaps = Table::new("snapshots", ["row", "xi", "x", "re", "im", "abs2"]);
    let x_snap = if e.snapshot_every > 0 {
        snapshot_grid(r, n, e.snapshot_points)
    } else {
        Vec::new()
    };

    let mut q = q0.clone();
    let mut norm_range = (f64::INFINITY, f64::NEG_INFINITY);
    for (j, &xi) in phases.iter().enumerate() {
        let need_u = e.propagation == Propagation::OneShot || !e.u_entries.is_empty();
        let u = if need_u {
            Some(builder.u(xi, xi0)?)
        } else {
            None
        };
        if j > 0 {
            q = match e.propagation {
                Propagation::OneShot => evolve(&q0, u.as_ref().unwrap())?,
                Propagation::Product => {
                    evolve_substepped(&q, &builder, phases[j - 1], xi, e.substeps)?
                        .pop()
                        .unwrap()
                }
            };
        }
        let (_, phi_hat) = undo_transforms(&q, xi, &dip, &r.drive)?;
        let mut row = population_row(xi, r.drive.omega, &phi_hat);
        if e.field_norm {
            row.push(phi_norm2(&phi_hat, &b)?.into());
        }
        if let Some(u) = &u {
            for [l, m] in &e.u_entries {
                row.push(u[(*l, *m)].re.into());
                row.push(u[(*l, *m)].im.into());
            }
        }
        let norm = phi_hat.norm();
        norm_range = (norm_range.0.min(norm), norm_range.1.max(norm));
        traj.push(row);
        if e.snapshot_every > 0 && j % e.snapshot_every == 0 {
            let field = reconstruct_phi(&x_snap, &phi_hat, &b)?;
            for (x, z) in x_snap.iter().zip(field) {
                snaps.push(vec![
                    j.into(),
                    xi.into(),
                    (*x).into(),
                    z.re.into(),
                    z.im.into(),
                    z.norm_sqr().into(),
                ]);
            }
        }
    }
    let mut tables = vec![traj];
    if e.snapshot_every > 0 {
        tables.push(snaps);
    }
    Ok(Output {
        tables,
        report: vec![format!(
            "{} rows, ‖φ̂‖ within [{:.15}, {:.15}]",
            phases.len(),
            norm_range.0,
            norm_range.1
        )],
        ..Output::default()
    })
}

pub fn cmd_scan(cfg: &RunConfig, r: &Resolved) -> Result<Output, CliError> {
    let s = &cfg.scan;
    let n = cfg.n_states;
    let b = basis(cfg, r, n)?;
    let dip = DipoleDecomposition::new(&b, n)?;
    let opts = ScanOptions {
        observable: r.observable,
        method: s.method,
        periods: s.periods,
        samples_per_period: s.samples_per_period,
        route: r.route,
        truncation: r.truncation,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.threads)
        .build()
        .map_err(|e| ConfigError::Field {
            field: "scan.threads".into(),
            reason: e.to_string(),
        })?;
    let points = pool.install(|| resonance_scan(&dip, &r.params, &r.drive, &r.omegas, &opts))?;

    let unit = r.params.frequency_unit();
    let mut table = Table::new("scan", ["omega", "omega_natural", "beta", "value"]);
    let mut plot = Table::new("scan_plot", ["omega_natural", "value"]);
    for p in &points {
        table.push(vec![
            p.omega.into(),
            (p.omega / unit).into(),
            p.beta.into(),
            p.value.into(),
        ]);
        plot.push(vec![(p.omega / unit).into(), p.value.into()]);
    }
    let mut peaks = cqwell::evolution::scan_peaks(&points);
    peaks.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.omega.total_cmp(&b.omega))
    });
    let mut peak_table = Table::new("scan_peaks", ["rank", "omega", "omega_natural", "value"]);
    for (i, p) in peaks.iter().enumerate() {
        peak_table.push(vec![
            i.into(),
            p.omega.into(),
            (p.omega / unit).into(),
            p.value.into(),
        ]);
    }
    let report = match dominant_peak(&points) {
        Some(p) => format!(
            "{} points, dominant {} peak at ω = {:.6} ({:.4} √(ω₁ω₂)), value {:.4e}",
            points.len(),
            r.observable,
            p.omega,
            p.omega / unit,
            p.value
        ),
        None => "empty frequency grid".into(),
    };
    Ok(Output {
        tables: vec![table, peak_table],
        plots: vec![plot],
        report: vec![report],
        ..Output::default()
    })
}

pub fn cmd_oracle(cfg: &RunConfig, r: &Resolved) -> Result<Output, CliError> {
    let n = cfg.n_states;
    let o = &cfg.oracle;
    let b = basis(cfg, r, n)?;
    let solver = b.natural_energies();
    let mut report = Vec::new();

    let gl = grid_levels(
        &r.params,
        &GridSpec::for_levels(&r.params, n, o.grid_points),
        n,
    )?;
    let mut levels = Table::new(
        "grid_levels",
        [
            "k",
            "eps",
            "coarse_natural",
            "fine_natural",
            "extrapolated_natural",
            "error_estimate",
            "solver_natural",
            "relative_difference",
        ],
    );
    let mut worst = 0.0f64;
    for k in 0..n {
        let rel = (solver[k] - gl.extrapolated[k]).abs() / gl.extrapolated[k];
        worst = worst.max(rel);
        levels.push(vec![
            k.into(),
            gl.energies[k].into(),
            gl.coarse[k].into(),
            gl.fine[k].into(),
            gl.extrapolated[k].into(),
            gl.error_estimate[k].into(),
            solver[k].into(),
            rel.into(),
        ]);
    }
    report.push(format!(
        "grid levels: largest relative difference to the solver {worst:.2e}"
    ));
    report.extend(gl.warnings.iter().map(|w| format!("warning: {w}")));

    let dip = DipoleDecomposition::new(&b, n)?;
    let phi0 = initial_state(cfg)?;
    let phases = sample_phases(cfg, r);
    let xi0 = phases[0];
    let xi_end = *phases.last().unwrap();
    let samples = reference_trajectory(&dip, &r.drive, &phi0, xi0, xi_end, phases.len() - 1)?;
    let mut traj = Table::new("trajectory", population_columns(n));
    traj.push(population_row(xi0, r.drive.omega, &phi0));
    for (xi, phi) in phases[1..].iter().zip(&samples) {
        traj.push(population_row(*xi, r.drive.omega, phi));
    }
    let mut tables = vec![levels, traj];

    if o.field_points > 0 {
        let grid = GridSpec::for_levels(&r.params, n, o.field_points);
        let ell = r.params.ell();
        let psi0 = grid
            .nodes()
            .iter()
            .map(|&x| {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += phi0[k] * eval_psi(&b, k, x * ell)?;
                }
                Ok(s)
            })
            .collect::<cqwell::Result<Vec<_>>>()?;
        let t0 = xi0 / r.drive.omega;
        let t1 = t0 + o.field_periods * 2.0 * PI / r.drive.omega;
        let g = reference_evolve_grid(
            &r.params,
            &r.drive,
            &grid,
            &psi0,
            t0,
            t1,
            o.dt,
            o.doubling_tol,
        )?;
        let mut field = Table::new("grid_field", ["x", "re", "im", "abs2"]);
        for (x, z) in g.x.iter().zip(&g.psi) {
            field.push(vec![
                (*x).into(),
                z.re.into(),
                z.im.into(),
                z.norm_sqr().into(),
            ]);
        }
        tables.push(field);
        report.push(format!(
            "grid field at t = {t1:.6}: norm drift {:.1e}, step-doubling difference {:.1e}",
            g.norm_drift, g.doubling_diff
        ));
    }
    Ok(Output {
        subdir: Some(format!("oracle-v{}", cqwell::VERSION)),
        tables,
        report,
        ..Output::default()
    })
}
