//! Every bundled figure configuration parses and runs end to end.

use std::path::Path;
use std::time::{Duration, Instant};

use bilattice::{run_sweep, Engine, RunConfig, SweepSpec};

const FIGURES: [(&str, Engine); 9] = [
    ("fig2a", Engine::Bands),
    ("fig2b", Engine::Gaps),
    ("fig4", Engine::Gaps),
    ("fig5", Engine::Gaps),
    ("fig6", Engine::Transmit),
    ("fig7", Engine::Transmit),
    ("fig8", Engine::Transmit),
    ("fig9", Engine::Cavity),
    ("fig10", Engine::Cavity),
];

/// Runtime bound of the acceptance criterion covering each engine.
fn runtime_limit(engine: Engine) -> Duration {
    match engine {
        Engine::Bands | Engine::Gaps => Duration::from_secs(30),
        Engine::Transmit | Engine::Cavity => Duration::from_secs(60),
    }
}

fn load(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.cfg"));
    RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn every_figure_runs_within_bounds() {
    for (name, engine) in FIGURES {
        let config = load(name);
        assert_eq!(config.engine, Some(engine), "{name}");
        let start = Instant::now();
        let out = run_sweep(&SweepSpec {
            engine,
            config,
            workers: 0,
            fail_fast: true,
        })
        .unwrap_or_else(|e| panic!("{name}: {e}"));
        let elapsed = start.elapsed();
        assert!(elapsed < runtime_limit(engine), "{name} took {elapsed:?}");
        assert!(out.failures.is_empty(), "{name}");
        assert!(!out.table.rows.is_empty(), "{name}");
    }
}

#[test]
fn free_space_figures_share_one_lattice() {
    for (name, rho) in [("fig6", 0.0), ("fig7", 0.2), ("fig8", 0.24)] {
        let c = load(name);
        assert_eq!(c.cells, 500_000);
        assert!((c.areal_density.unwrap() - 5.7e10).abs() < 1.0);
        let lambda = c.species_even.wavelength();
        assert!((c.rho_grid[0] - rho * lambda).abs() < 1e-15, "{name}");
        // Trap light 10 gamma to the blue sets the cell size.
        let trap = std::f64::consts::TAU * bilattice_core::physics::SPEED_OF_LIGHT / c.cell_size;
        assert!((trap - c.species_even.transition_frequency() - 10.0 * c.gamma).abs() < 1.0);
    }
}

#[test]
fn cavity_figures_share_one_resonator() {
    for (name, phase) in [("fig9", std::f64::consts::FRAC_PI_2), ("fig10", 0.0)] {
        let c = load(name);
        let cav = c.cavity_config().unwrap();
        assert_eq!(cav.plane_count, 200);
        assert!((cav.length - 0.085).abs() < 1e-15);
        assert!((cav.waist - 130e-6).abs() < 1e-18);
        assert_eq!(cav.occupancy, 3000.0);
        assert!((cav.phase - phase).abs() < 1e-15);
        assert!(cav.commensurate);
        // Probe step at most kappa / 5 for peak extraction.
        let p = c.probe.as_ref().unwrap();
        assert!(p[1] - p[0] <= cav.decay_rate() / 5.0, "{name}");
    }
}
