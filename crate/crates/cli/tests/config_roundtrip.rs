use cqwell::evolution::ScanMethod;
use cqwell::kernel::Route;
use cqwell_cli::config::{OmegaUnit, Propagation, RunConfig};
use cqwell_cli::Format;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6, Just(0.0)]
}

prop_compose! {
    fn run_config()(
        n_states in 1usize..20,
        well in (finite(), finite(), finite(), finite(), finite()),
        gamma in proptest::option::of(finite()),
        beta in proptest::option::of(finite()),
        drive in (finite(), finite()),
        route in prop_oneof![Just(Route::Power), Just(Route::Fourier)],
        k_max in proptest::option::of(0usize..100),
        m_max in proptest::option::of(0usize..100),
        periods in finite(),
        samples in 0usize..1000,
        propagation in prop_oneof![Just(Propagation::Product), Just(Propagation::OneShot)],
        initial in proptest::option::of(prop::collection::vec((finite(), finite()), 0..6)),
        u_entries in prop::collection::vec((0usize..9, 0usize..9), 0..4),
        flags in (any::<bool>(), 0usize..10, 0usize..500),
        scan in (finite(), finite(), 0usize..300, any::<bool>(), "[a-z_:0-9,]{0,20}", any::<bool>()),
        dump in (finite(), finite(), finite(), finite(), 0usize..500, any::<bool>()),
        oracle in (0usize..10000, 0usize..10000, finite(), finite(), finite()),
        output in ("[a-zA-Z0-9_/. -]{0,20}", any::<bool>()),
    ) -> RunConfig {
        let mut c = RunConfig { n_states, ..RunConfig::default() };
        (c.well.m, c.well.k1, c.well.k2, c.well.hbar, c.well.tol) = well;
        c.drive.gamma = gamma;
        c.drive.beta = beta;
        (c.drive.omega, c.drive.xi0) = drive;
        c.kernel.route = route;
        c.kernel.k_max = k_max;
        c.kernel.m_max = m_max;
        c.evolve.periods = periods;
        c.evolve.samples_per_period = samples;
        c.evolve.propagation = propagation;
        c.evolve.initial = initial.map(|v| v.into_iter().map(|(a, b)| [a, b]).collect());
        c.evolve.u_entries = u_entries.into_iter().map(|(a, b)| [a, b]).collect();
        (c.evolve.field_norm, c.evolve.snapshot_every, c.evolve.snapshot_points) = flags;
        c.scan.omega_min = scan.0;
        c.scan.omega_max = scan.1;
        c.scan.omega_points = scan.2;
        c.scan.omega_unit = if scan.3 { OmegaUnit::Natural } else { OmegaUnit::Physical };
        c.scan.observable = scan.4;
        c.scan.method = if scan.5 { ScanMethod::Reference } else { ScanMethod::Propagator };
        (c.kernel_dump.alpha, c.kernel_dump.xi0, c.kernel_dump.xi_min, c.kernel_dump.xi_max, c.kernel_dump.points, c.kernel_dump.quadrature) = dump;
        (c.oracle.grid_points, c.oracle.field_points, c.oracle.field_periods, c.oracle.dt, c.oracle.doubling_tol) = oracle;
        c.output.dir = output.0;
        c.output.format = if output.1 { Format::Json } else { Format::Csv };
        c
    }
}

proptest! {
    #[test]
    fn toml_round_trip_is_lossless(c in run_config()) {
        let text = c.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn json_round_trip_is_lossless(c in run_config()) {
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}
