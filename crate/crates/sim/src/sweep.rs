//! Parallel parameter sweeps producing one table per run.
//!
//! Grid cells are evaluated on a dedicated rayon pool and collected in input
//! order, so the table does not depend on the worker count. Rows follow the
//! lexicographic grid order `ϱ` (or `β`), then `φ`, then the probe frequency
//! or quasi-momentum.

use bilattice_core::bands::{
    analytic_band_edges, bands_at, default_gap_window, find_gaps, BandStructure,
};
use bilattice_core::cavity::{find_peaks, CavitySystem};
use bilattice_core::physics::LatticeConfig;
use bilattice_core::tmm::spectrum_point;
use bilattice_core::Error as CoreError;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{linspace, ConfigError, Engine, RunConfig};
use crate::table::Table;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{params}: {source}")]
    Numeric { params: String, source: CoreError },

    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl SweepError {
    /// Process exit status: 1 for configuration problems, 2 for numeric
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) | SweepError::Pool(_) => 1,
            SweepError::Numeric { .. } => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub engine: Engine,
    pub config: RunConfig,
    /// Worker threads; `0` uses all available cores.
    pub workers: usize,
    pub fail_fast: bool,
}

/// A grid cell whose engine call failed; its row holds NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub params: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub table: Table,
    pub failures: Vec<CellFailure>,
}

impl SweepOutput {
    /// One line per failed cell, for the `.errors.log` sidecar.
    pub fn error_log(&self) -> String {
        self.failures
            .iter()
            .map(|f| format!("{}: {}\n", f.params, f.message))
            .collect()
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput, SweepError> {
    spec.config.check_for(spec.engine)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()?;
    log::info!(
        "{} sweep on {} worker(s)",
        spec.engine.name(),
        pool.current_num_threads()
    );
    let mut out = match spec.engine {
        Engine::Transmit => transmit(spec, &pool)?,
        Engine::Cavity => cavity(spec, &pool)?,
        Engine::Bands => bands(spec, &pool)?,
        Engine::Gaps => gaps(spec, &pool)?,
    };
    let meta = &mut out.table.metadata;
    meta.insert("failed_cells".into(), json!(out.failures.len()));
    if !out.failures.is_empty() {
        log::warn!("{} grid cell(s) failed", out.failures.len());
    }
    Ok(out)
}

fn par_map<T, R, F>(pool: &ThreadPool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    pool.install(|| items.par_iter().map(f).collect())
}

/// Collects per-cell outcomes: aborts on the first failure (in grid order)
/// when `fail_fast`, otherwise records it and yields `None`.
struct Outcomes<'a> {
    fail_fast: bool,
    failures: &'a mut Vec<CellFailure>,
}

impl Outcomes<'_> {
    fn take<T>(
        &mut self,
        result: Result<T, CoreError>,
        params: impl FnOnce() -> String,
    ) -> Result<Option<T>, SweepError> {
        match result {
            Ok(v) => Ok(Some(v)),
            Err(source) if self.fail_fast => Err(SweepError::Numeric {
                params: params(),
                source,
            }),
            Err(e) => {
                self.failures.push(CellFailure {
                    params: params(),
                    message: e.to_string(),
                });
                Ok(None)
            }
        }
    }
}

/// Leading grid columns, present when the corresponding grid has more than
/// one value (`rho_a` always for the gap engine).
struct Axes {
    rho: bool,
    beta: bool,
    phi: bool,
}

impl Axes {
    fn new(cfg: &RunConfig, engine: Engine) -> Self {
        let multi_rho = cfg.rho_grid.len() > 1;
        Self {
            rho: multi_rho || engine == Engine::Gaps,
            beta: cfg.beta_grid.is_some() && (multi_rho || engine == Engine::Gaps),
            phi: engine == Engine::Cavity && cfg.phase_grid.len() > 1,
        }
    }

    fn columns(&self) -> Vec<String> {
        let mut c = Vec::new();
        if self.rho {
            c.push("rho_a".into());
        }
        if self.beta {
            c.push("beta".into());
        }
        if self.phi {
            c.push("phi_rad".into());
        }
        c
    }

    fn values(&self, cfg: &RunConfig, rho_idx: usize, phi_idx: usize) -> Vec<f64> {
        let mut v = Vec::new();
        if self.rho {
            v.push(cfg.rho_grid[rho_idx] / cfg.cell_size);
        }
        if self.beta {
            v.push(cfg.beta_grid.as_ref().map_or(f64::NAN, |b| b[rho_idx]));
        }
        if self.phi {
            v.push(cfg.phase_grid[phi_idx]);
        }
        v
    }
}

fn rho_label(cfg: &RunConfig, i: usize) -> String {
    let mut s = format!("rho = {:.6} a", cfg.rho_grid[i] / cfg.cell_size);
    if let Some(b) = &cfg.beta_grid {
        s.push_str(&format!(" (beta = {})", b[i]));
    }
    s
}

fn gamma_units(cfg: &RunConfig, omega: f64) -> f64 {
    (omega - cfg.reference) / cfg.gamma
}

fn base_metadata(cfg: &RunConfig, engine: Engine) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("engine".into(), json!(engine.name()));
    m.insert("reference_rad_s".into(), json!(cfg.reference));
    m.insert("gamma_rad_s".into(), json!(cfg.gamma));
    m.insert(
        "detuning_convention".into(),
        json!("detuning_gamma = (omega_p - omega_ref)/gamma; atomic detuning delta_j = omega_j - omega_p"),
    );
    m.insert(
        "omega_even_rad_s".into(),
        json!(cfg.species_even.transition_frequency()),
    );
    m.insert(
        "omega_odd_rad_s".into(),
        json!(cfg.species_odd.transition_frequency()),
    );
    m.insert("cell_size_m".into(), json!(cfg.cell_size));
    m.insert("cells".into(), json!(cfg.cells));
    m.insert("planes".into(), json!(2 * cfg.cells));
    m.insert("areal_density_per_m2".into(), json!(cfg.areal_density));
    m.insert("mode_area_m2".into(), json!(cfg.mode_area));
    m.insert(
        "rho_a".into(),
        json!(cfg
            .rho_grid
            .iter()
            .map(|r| r / cfg.cell_size)
            .collect::<Vec<_>>()),
    );
    m
}

fn lattices(cfg: &RunConfig, engine: Engine) -> Result<Vec<LatticeConfig>, ConfigError> {
    cfg.rho_grid
        .iter()
        .map(|&r| cfg.lattice(r, engine))
        .collect()
}

fn transmit(spec: &SweepSpec, pool: &ThreadPool) -> Result<SweepOutput, SweepError> {
    let cfg = &spec.config;
    let probe = cfg.probe_grid(Engine::Transmit)?;
    let lattices = lattices(cfg, Engine::Transmit)?;
    let cells: Vec<(usize, f64)> = (0..lattices.len())
        .flat_map(|i| probe.iter().map(move |&w| (i, w)))
        .collect();
    let results = par_map(pool, &cells, |&(i, w)| {
        spectrum_point(&lattices[i], w, cfg.reference)
    });

    let axes = Axes::new(cfg, Engine::Transmit);
    let mut columns = axes.columns();
    columns.extend(["omega_p_rad_s", "detuning_gamma", "T", "R", "A"].map(String::from));
    let mut table = Table::new(columns);
    let mut failures = Vec::new();
    let mut outcomes = Outcomes {
        fail_fast: spec.fail_fast,
        failures: &mut failures,
    };
    for (&(i, w), result) in cells.iter().zip(results) {
        let point = outcomes.take(result, || {
            format!("{}, omega_p = {w} rad/s", rho_label(cfg, i))
        })?;
        let mut row = axes.values(cfg, i, 0);
        row.extend([w, gamma_units(cfg, w)]);
        match point {
            Some(p) => row.extend([p.transmittance, p.reflectance, p.absorbance]),
            None => row.extend([f64::NAN; 3]),
        }
        table.push(row);
    }
    table.metadata = base_metadata(cfg, Engine::Transmit);
    Ok(SweepOutput { table, failures })
}

fn cavity(spec: &SweepSpec, pool: &ThreadPool) -> Result<SweepOutput, SweepError> {
    let cfg = &spec.config;
    let probe = cfg.probe_grid(Engine::Cavity)?;
    let base = cfg.cavity_config()?;
    let mut systems = Vec::new();
    for (i, &rho) in cfg.rho_grid.iter().enumerate() {
        for (j, &phi) in cfg.phase_grid.iter().enumerate() {
            let mut cavity = base;
            cavity.phase = phi;
            let system = CavitySystem::new(
                cavity,
                cfg.species_even,
                cfg.species_odd,
                cfg.cell_size,
                rho,
            )
            .map_err(|e| ConfigError::Invalid {
                key: "cavity".into(),
                message: e.to_string(),
            })?;
            systems.push((i, j, system));
        }
    }
    let cells: Vec<(usize, f64)> = (0..systems.len())
        .flat_map(|s| probe.iter().map(move |&w| (s, w)))
        .collect();
    let results = par_map(pool, &cells, |&(s, w)| systems[s].2.output_intensity(w));

    let axes = Axes::new(cfg, Engine::Cavity);
    let mut columns = axes.columns();
    columns.extend(["omega_p_rad_s", "detuning_gamma", "I_photons_s", "I_norm"].map(String::from));
    let mut table = Table::new(columns);
    let mut failures = Vec::new();
    let mut outcomes = Outcomes {
        fail_fast: spec.fail_fast,
        failures: &mut failures,
    };
    let mut spectra = vec![Vec::with_capacity(probe.len()); systems.len()];
    for (&(s, w), result) in cells.iter().zip(results) {
        let (i, j, ref system) = systems[s];
        let intensity = outcomes
            .take(result, || {
                format!(
                    "{}, phi = {} rad, omega_p = {w} rad/s",
                    rho_label(cfg, i),
                    cfg.phase_grid[j]
                )
            })?
            .unwrap_or(f64::NAN);
        spectra[s].push(intensity);
        let mut row = axes.values(cfg, i, j);
        row.extend([
            w,
            gamma_units(cfg, w),
            intensity,
            intensity / system.empty_cavity_peak(),
        ]);
        table.push(row);
    }

    let detunings: Vec<f64> = probe.iter().map(|&w| gamma_units(cfg, w)).collect();
    let mut meta = base_metadata(cfg, Engine::Cavity);
    let first = &systems[0].2;
    meta.insert("kappa_rad_s".into(), json!(first.kappa()));
    meta.insert("pump_rad_s".into(), json!(base.pump));
    meta.insert("occupancy".into(), json!(base.occupancy));
    meta.insert("commensurate".into(), json!(base.commensurate));
    meta.insert("mode_index".into(), json!(first.mode_index()));
    meta.insert(
        "quasi_momentum_rad_m".into(),
        json!(first.selected_quasi_momentum()),
    );
    meta.insert(
        "mirror_reflectivity".into(),
        json!(base.mirror_reflectivity),
    );
    meta.insert(
        "I_norm".into(),
        json!("output flux over the empty-cavity resonant peak 2 eta^2 / kappa"),
    );
    let couplings = systems
        .iter()
        .zip(&spectra)
        .map(|((i, j, system), spectrum)| {
            let (g1, g2) = system.couplings();
            let peaks: Vec<[f64; 2]> = find_peaks(&detunings, spectrum)
                .into_iter()
                .map(|(x, y)| [x, y])
                .collect();
            let predicted = system
                .rabi_peaks()
                .ok()
                .map(|(lo, hi)| [gamma_units(cfg, lo), gamma_units(cfg, hi)]);
            json!({
                "rho_a": cfg.rho_grid[*i] / cfg.cell_size,
                "phi_rad": cfg.phase_grid[*j],
                "g_even_rad_s": g1,
                "g_odd_rad_s": g2,
                "collective_r_rad2_s2": system.collective_r(),
                "cooperativity": system.cooperativity(),
                "rabi_peaks_gamma": predicted,
                "scanned_peaks_gamma": peaks,
            })
        })
        .collect::<Vec<_>>();
    meta.insert("systems".into(), Value::Array(couplings));
    table.metadata = meta;
    Ok(SweepOutput { table, failures })
}

/// q-grid, `(ϱ index, q index)` cells and one spectrum per cell.
type BandCells = (
    Vec<f64>,
    Vec<(usize, usize)>,
    Vec<Result<Vec<f64>, CoreError>>,
);

/// Band spectra of every `ϱ` over the configured q-grid, one result per
/// `(ϱ, q)` cell.
fn band_cells(
    spec: &SweepSpec,
    pool: &ThreadPool,
    engine: Engine,
    lattices: &[LatticeConfig],
) -> BandCells {
    let settings = spec.config.bands;
    let (q_min, q_max) = settings.q_range;
    let q_grid = linspace(q_min, q_max, settings.q_points);
    let cells: Vec<(usize, usize)> = (0..lattices.len())
        .flat_map(|i| (0..q_grid.len()).map(move |k| (i, k)))
        .collect();
    log::info!(
        "{}: {} Bloch matrices of dimension {}",
        engine.name(),
        cells.len(),
        2 * settings.n_bz + 3
    );
    let results = par_map(pool, &cells, |&(i, k)| {
        bands_at(&lattices[i], q_grid[k], settings.n_bz)
    });
    (q_grid, cells, results)
}

fn window_for(cfg: &RunConfig, lattice: &LatticeConfig) -> (f64, f64) {
    cfg.bands
        .window
        .unwrap_or_else(|| default_gap_window(lattice))
}

fn bands(spec: &SweepSpec, pool: &ThreadPool) -> Result<SweepOutput, SweepError> {
    let cfg = &spec.config;
    let lattices = lattices(cfg, Engine::Bands)?;
    let (q_grid, cells, results) = band_cells(spec, pool, Engine::Bands, &lattices);
    let g0 = std::f64::consts::TAU / cfg.cell_size;

    let mut failures = Vec::new();
    let mut outcomes = Outcomes {
        fail_fast: spec.fail_fast,
        failures: &mut failures,
    };
    let mut spectra: Vec<Option<Vec<f64>>> = Vec::with_capacity(cells.len());
    for (&(i, k), result) in cells.iter().zip(results) {
        spectra.push(outcomes.take(result, || {
            format!("{}, q = {} G0", rho_label(cfg, i), q_grid[k] / g0)
        })?);
    }

    // Keep bands that enter the search window for at least one ϱ.
    let band_count = 2 * cfg.bands.n_bz + 3;
    let mut keep = vec![false; band_count];
    for (&(i, _), spectrum) in cells.iter().zip(&spectra) {
        let (lo, hi) = window_for(cfg, &lattices[i]);
        if let Some(s) = spectrum {
            for (b, &w) in s.iter().enumerate() {
                keep[b] |= (lo..=hi).contains(&w);
            }
        }
    }
    let kept: Vec<usize> = (0..band_count).filter(|&b| keep[b]).collect();

    let axes = Axes::new(cfg, Engine::Bands);
    let mut columns = axes.columns();
    columns.push("q_G0".into());
    columns.extend(kept.iter().map(|b| format!("band_{b}_gamma")));
    let mut table = Table::new(columns);
    for (&(i, k), spectrum) in cells.iter().zip(&spectra) {
        let mut row = axes.values(cfg, i, 0);
        row.push(q_grid[k] / g0);
        match spectrum {
            Some(s) => row.extend(kept.iter().map(|&b| gamma_units(cfg, s[b]))),
            None => row.extend(std::iter::repeat(f64::NAN).take(kept.len())),
        }
        table.push(row);
    }

    let mut meta = base_metadata(cfg, Engine::Bands);
    meta.insert("n_bz".into(), json!(cfg.bands.n_bz));
    meta.insert("q_points".into(), json!(q_grid.len()));
    let per_rho = q_grid.len();
    let mut gap_meta = Vec::new();
    for (i, lattice) in lattices.iter().enumerate() {
        let chunk = &spectra[i * per_rho..(i + 1) * per_rho];
        let window = window_for(cfg, lattice);
        let gaps = match chunk.iter().cloned().collect::<Option<Vec<_>>>() {
            Some(b) => BandStructure::from_parts(q_grid.clone(), b, cfg.bands.n_bz)
                .ok()
                .map(|bs| find_gaps(&bs, window, &cfg.bands.gaps)),
            None => None,
        };
        gap_meta.push(json!({
            "rho_a": cfg.rho_grid[i] / cfg.cell_size,
            "window_gamma": [gamma_units(cfg, window.0), gamma_units(cfg, window.1)],
            "gaps_gamma": gaps.map(|g| g
                .iter()
                .map(|g| [gamma_units(cfg, g.lower_edge), gamma_units(cfg, g.upper_edge)])
                .collect::<Vec<_>>()),
        }));
    }
    meta.insert("gaps".into(), Value::Array(gap_meta));
    table.metadata = meta;
    Ok(SweepOutput { table, failures })
}

const ANALYTIC_COLUMNS: [&str; 6] = [
    "analytic_nu1_minus_gamma",
    "analytic_nu2_minus_gamma",
    "analytic_nu2_plus_gamma",
    "analytic_nu1_plus_gamma",
    "analytic_lower_width_gamma",
    "analytic_upper_width_gamma",
];

fn gaps(spec: &SweepSpec, pool: &ThreadPool) -> Result<SweepOutput, SweepError> {
    let cfg = &spec.config;
    let lattices = lattices(cfg, Engine::Gaps)?;
    let (q_grid, cells, results) = band_cells(spec, pool, Engine::Gaps, &lattices);
    let g0 = std::f64::consts::TAU / cfg.cell_size;

    let mut failures = Vec::new();
    let mut outcomes = Outcomes {
        fail_fast: spec.fail_fast,
        failures: &mut failures,
    };
    let per_rho = q_grid.len();
    let mut spectra: Vec<Option<Vec<f64>>> = Vec::with_capacity(cells.len());
    for (&(i, k), result) in cells.iter().zip(results) {
        spectra.push(outcomes.take(result, || {
            format!("{}, q = {} G0", rho_label(cfg, i), q_grid[k] / g0)
        })?);
    }

    struct Row {
        gaps: Option<Vec<[f64; 2]>>,
        analytic: [f64; 6],
    }
    let mut rows = Vec::with_capacity(lattices.len());
    for (i, lattice) in lattices.iter().enumerate() {
        let chunk = &spectra[i * per_rho..(i + 1) * per_rho];
        let gaps = match chunk.iter().cloned().collect::<Option<Vec<_>>>() {
            Some(b) => {
                let bs = BandStructure::from_parts(q_grid.clone(), b, cfg.bands.n_bz);
                let bs = outcomes.take(bs, || rho_label(cfg, i))?;
                bs.map(|bs| {
                    find_gaps(&bs, window_for(cfg, lattice), &cfg.bands.gaps)
                        .iter()
                        .map(|g| {
                            [
                                gamma_units(cfg, g.lower_edge),
                                gamma_units(cfg, g.upper_edge),
                            ]
                        })
                        .collect()
                })
            }
            None => None,
        };
        let analytic = match analytic_band_edges(lattice) {
            Ok(e) => {
                let [a, b, c, d] = e.as_array().map(|w| gamma_units(cfg, w));
                [a, b, c, d, b - a, d - c]
            }
            Err(CoreError::UnequalTransitions { .. }) => [f64::NAN; 6],
            Err(e) => outcomes
                .take(Err(e), || {
                    format!("{} (closed-form edges)", rho_label(cfg, i))
                })?
                .unwrap_or([f64::NAN; 6]),
        };
        rows.push(Row { gaps, analytic });
    }

    let max_gaps = rows
        .iter()
        .filter_map(|r| r.gaps.as_ref().map(Vec::len))
        .max()
        .unwrap_or(0);
    let axes = Axes::new(cfg, Engine::Gaps);
    let mut columns = axes.columns();
    columns.push("n_gaps".into());
    for g in 1..=max_gaps {
        columns.push(format!("gap{g}_lower_gamma"));
        columns.push(format!("gap{g}_upper_gamma"));
        columns.push(format!("gap{g}_width_gamma"));
    }
    columns.extend(ANALYTIC_COLUMNS.map(String::from));
    let mut table = Table::new(columns);
    for (i, r) in rows.iter().enumerate() {
        let mut row = axes.values(cfg, i, 0);
        match &r.gaps {
            Some(g) => {
                row.push(g.len() as f64);
                for slot in 0..max_gaps {
                    match g.get(slot) {
                        Some(&[lo, hi]) => row.extend([lo, hi, hi - lo]),
                        None => row.extend([f64::NAN; 3]),
                    }
                }
            }
            None => row.extend(std::iter::repeat(f64::NAN).take(1 + 3 * max_gaps)),
        }
        row.extend(r.analytic);
        table.push(row);
    }

    let mut meta = base_metadata(cfg, Engine::Gaps);
    meta.insert("n_bz".into(), json!(cfg.bands.n_bz));
    meta.insert("q_points".into(), json!(per_rho));
    meta.insert("cover_tol_rad_s".into(), json!(cfg.bands.gaps.cover_tol));
    meta.insert(
        "min_band_width_rad_s".into(),
        json!(cfg.bands.gaps.min_band_width),
    );
    table.metadata = meta;
    Ok(SweepOutput { table, failures })
}
