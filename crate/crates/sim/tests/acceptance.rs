//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every criterion is evaluated and
//! reported even when an earlier one fails. A failing criterion is reported
//! but only turns into a non-zero exit status when `BILATTICE_STRICT` is set,
//! so the rest of the workspace suite still runs.

use std::cell::Cell;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use bilattice::{run_sweep, Engine, RunConfig, SweepSpec};
use bilattice_core::bands::{
    analytic_band_edges, bands_at, compute_bands, default_gap_window, find_gaps, Gap, GapOptions,
    DEFAULT_BRILLOUIN_ZONES, DEFAULT_Q_POINTS,
};
use bilattice_core::cavity::{empty_cavity_intensity, find_peaks, CavityConfig, CavitySystem};
use bilattice_core::physics::{mode_area_from_waist, AtomSpecies, LatticeConfig};
use bilattice_core::tmm::{stack_response, Dimer};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const FIG6: &str = include_str!("../configs/fig6.cfg");
const FIG9: &str = include_str!("../configs/fig9.cfg");

/// Expected gap edge, in linewidths from the atomic line.
const EXPECTED_GAP_EDGE: f64 = 420.0;
const GAP_EDGE_TOLERANCE: f64 = 0.05;
const OPAQUE: f64 = 0.5;

const FREE_SPACE_LIMIT: Duration = Duration::from_secs(60);
const BAND_LIMIT: Duration = Duration::from_secs(30);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion(n: u32, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            o.pass = false;
            o.detail
                .push_str(&format!("; runtime over {} s", limit.as_secs()));
        }
    }
    println!(
        "criterion {n:>2} {}: {title}: {} [{:.1} s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
    o.pass
}

/// Replaces the value of `key` in a bundled config.
fn with_key(text: &str, key: &str, value: &str) -> String {
    let prefix = format!("{key} =");
    let mut found = false;
    let mut out: Vec<String> = text
        .lines()
        .map(|l| {
            if l.trim_start().starts_with(&prefix) {
                found = true;
                format!("{key} = {value}")
            } else {
                l.to_string()
            }
        })
        .collect();
    if !found {
        out.push(format!("{key} = {value}"));
    }
    out.join("\n")
}

/// `(detuning_gamma, T)` of the transmit engine on the free-space setup.
fn free_space_spectrum(rho: &str) -> Vec<(f64, f64)> {
    let text = with_key(FIG6, "rho", rho);
    let spec = SweepSpec {
        engine: Engine::Transmit,
        config: RunConfig::parse(&text).expect("bundled config parses"),
        workers: 0,
        fail_fast: true,
    };
    let table = run_sweep(&spec).expect("transmit sweep").table;
    let x = table.column("detuning_gamma").unwrap();
    let t = table.column("T").unwrap();
    x.into_iter().zip(t).collect()
}

/// Edges of the contiguous `T < OPAQUE` region containing the atomic line,
/// linearly interpolated between grid points.
fn opaque_window(spectrum: &[(f64, f64)]) -> Option<(f64, f64)> {
    let centre = spectrum
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.abs().total_cmp(&b.1 .0.abs()))?
        .0;
    if spectrum[centre].1 >= OPAQUE {
        return None;
    }
    let cross = |i: usize, j: usize| {
        let (x0, y0) = spectrum[i];
        let (x1, y1) = spectrum[j];
        x0 + (OPAQUE - y0) * (x1 - x0) / (y1 - y0)
    };
    let mut lo = centre;
    while lo > 0 && spectrum[lo - 1].1 < OPAQUE {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < spectrum.len() && spectrum[hi + 1].1 < OPAQUE {
        hi += 1;
    }
    if lo == 0 || hi + 1 == spectrum.len() {
        return None;
    }
    Some((cross(lo - 1, lo), cross(hi, hi + 1)))
}

fn lattice(rho_frac: f64, det_even: f64, det_odd: f64, cells: usize) -> LatticeConfig {
    let rb = AtomSpecies::rb85_d2();
    let g = rb.linewidth();
    let a = rb.wavelength();
    LatticeConfig::new(
        a,
        rho_frac * a,
        cells,
        5.7e10,
        rb.detuned(det_even * g).unwrap(),
        rb.detuned(det_odd * g).unwrap(),
        mode_area_from_waist(5e-6),
    )
    .unwrap()
}

fn detected_gaps(cfg: &LatticeConfig) -> Vec<Gap> {
    let bs = compute_bands(cfg, DEFAULT_BRILLOUIN_ZONES, DEFAULT_Q_POINTS).unwrap();
    let opts = GapOptions::for_linewidth(cfg.species_even().linewidth());
    find_gaps(&bs, default_gap_window(cfg), &opts)
}

fn cavity_setup(rho: &str, phase: &str) -> (RunConfig, CavitySystem) {
    let text = with_key(&with_key(FIG9, "rho", rho), "phase", phase);
    let cfg = RunConfig::parse(&text).expect("bundled config parses");
    let cavity = cfg.cavity_config().unwrap();
    let system = CavitySystem::new(
        cavity,
        cfg.species_even,
        cfg.species_odd,
        cfg.cell_size,
        cfg.rho_grid[0],
    )
    .unwrap();
    (cfg, system)
}

fn c1_gap_edges() -> Outcome {
    let spectrum = free_space_spectrum("0 a");
    match opaque_window(&spectrum) {
        Some((lo, hi)) => {
            let err = |edge: f64| (edge.abs() - EXPECTED_GAP_EDGE).abs() / EXPECTED_GAP_EDGE;
            let pass = err(lo) <= GAP_EDGE_TOLERANCE && err(hi) <= GAP_EDGE_TOLERANCE && lo < 0.0;
            outcome(
                pass,
                format!(
                    "|t|^2 = 0.5 crossings at {lo:.1} and {hi:.1} gamma (deviation {:.1}% / {:.1}%)",
                    100.0 * err(lo),
                    100.0 * err(hi)
                ),
            )
        }
        None => outcome(false, "no opaque window around the atomic line"),
    }
}

fn c2_mini_band() -> Outcome {
    let spectrum = free_space_spectrum("0.2 a");
    let inside_max = spectrum
        .iter()
        .filter(|(x, _)| x.abs() < EXPECTED_GAP_EDGE)
        .map(|p| p.1)
        .fold(0.0, f64::max);
    let at_line = spectrum
        .iter()
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
        .unwrap();
    outcome(
        inside_max > 0.5 && at_line.1 < 0.1,
        format!(
            "max |t|^2 inside +-420 gamma = {inside_max:.3}, |t|^2 at {:.2} gamma = {:.2e}",
            at_line.0, at_line.1
        ),
    )
}

fn c3_quarter_cell_transparency() -> Outcome {
    let spectrum = free_space_spectrum("0.25 a");
    let (x, t) = spectrum
        .iter()
        .filter(|(x, _)| x.abs() > 10.0 + 1e-6 && x.abs() < EXPECTED_GAP_EDGE)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .copied()
        .unwrap();
    outcome(
        t > 0.99,
        format!(
            "min |t|^2 for 10 < |detuning| < 420 gamma is {t:.4} at {x:.2} gamma (needs > 0.99)"
        ),
    )
}

fn c4_band_edges() -> Outcome {
    let mut worst: f64 = 0.0;
    for rho in [0.0, 0.1, 0.2, 0.3] {
        let cfg = lattice(rho, -10.0, -10.0, 100);
        let edges = analytic_band_edges(&cfg).unwrap();
        let span = edges.outer_span();
        let centre = bands_at(&cfg, 0.0, DEFAULT_BRILLOUIN_ZONES).unwrap();
        for nu in edges.as_array() {
            let nearest = centre
                .iter()
                .map(|w| (w - nu).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest / span);
        }
    }
    let small = detected_gaps(&lattice(0.2, -10.0, -10.0, 100));
    let large = detected_gaps(&lattice(0.2, -10.0, -10.0, 1000));
    let mut width_dev: f64 = if small.len() == large.len() && !small.is_empty() {
        0.0
    } else {
        f64::INFINITY
    };
    for (a, b) in small.iter().zip(&large) {
        width_dev = width_dev.max((a.width() - b.width()).abs() / a.width());
    }
    outcome(
        worst < 1e-3 && width_dev < 1e-6,
        format!(
            "max edge error {worst:.2e} of the band span; gap widths M = 100 vs 1000 differ by {width_dev:.1e}"
        ),
    )
}

fn c5_gap_closure() -> Outcome {
    let cfg = lattice(0.25, -10.0, -10.0, 100);
    let gamma = cfg.species_even().linewidth();
    let widest = detected_gaps(&cfg)
        .iter()
        .map(|g| g.width() / gamma)
        .fold(0.0, f64::max);
    outcome(
        widest < 0.2,
        format!("widest detected gap {widest:.3} gamma"),
    )
}

fn c6_gap_multiplicity() -> Outcome {
    let mut report = Vec::new();
    let mut pass = true;
    let cases: [(&str, f64, f64, &[f64], usize); 3] = [
        ("-10/+530", -10.0, 530.0, &[0.1, 0.2, 0.3], 3),
        ("equal", -10.0, -10.0, &[0.1, 0.2, 0.3], 2),
        ("monoperiodic", 0.0, 0.0, &[0.0], 1),
    ];
    for (name, d1, d2, rhos, expected) in cases {
        for &rho in rhos {
            let n = detected_gaps(&lattice(rho, d1, d2, 100)).len();
            pass &= n == expected;
            report.push(format!("{name} rho={rho}a: {n}"));
        }
    }
    outcome(pass, report.join(", "))
}

fn c7_empty_cavity() -> Outcome {
    let (cfg, system) = cavity_setup("0 a", "0.5 pi");
    let cavity = system.cavity();
    let mut worst: f64 = 0.0;
    for w in bilattice::config::linspace(-40.0, 40.0, 1000) {
        let omega_p = cfg.reference + w * cfg.gamma;
        let got = system.output_intensity(omega_p).unwrap();
        let want =
            empty_cavity_intensity(system.kappa(), cavity.pump, cavity.mode_frequency - omega_p);
        worst = worst.max((got - want).abs() / want);
    }
    outcome(worst < 1e-10, format!("max relative deviation {worst:.2e}"))
}

fn spectrum(cfg: &RunConfig, system: &CavitySystem) -> (Vec<f64>, Vec<f64>) {
    let probe = cfg.probe.as_ref().unwrap();
    let intensity = probe
        .iter()
        .map(|&w| system.output_intensity(w).unwrap())
        .collect();
    (probe.clone(), intensity)
}

fn c8_rabi_splitting() -> Outcome {
    let mut pass = true;
    let mut report = Vec::new();
    for rho in ["0.2 a", "0.4 a"] {
        let mut spectra = Vec::new();
        for phase in ["0 pi", "0.5 pi"] {
            let (cfg, system) = cavity_setup(rho, phase);
            let kappa = system.kappa();
            let (x, y) = spectrum(&cfg, &system);
            let step = x[1] - x[0];
            pass &= step <= kappa / 5.0;
            let mut peaks = find_peaks(&x, &y);
            peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
            let (lo, hi) = system.rabi_peaks().unwrap();
            let miss = if peaks.len() >= 2 {
                let mut two = [peaks[0].0, peaks[1].0];
                two.sort_by(f64::total_cmp);
                (two[0] - lo).abs().max((two[1] - hi).abs())
            } else {
                f64::INFINITY
            };
            pass &= miss < kappa;
            report.push(format!(
                "rho={rho} phi={phase}: peaks off by {:.3} kappa",
                miss / kappa
            ));
            spectra.push(y);
        }
        let dev = spectra[0]
            .iter()
            .zip(&spectra[1])
            .map(|(a, b)| (a - b).abs() / a.max(*b))
            .fold(0.0, f64::max);
        pass &= dev > 0.1;
        report.push(format!(
            "rho={rho} phi 0 vs pi/2 differ by {:.0}%",
            100.0 * dev
        ));
    }
    outcome(pass, report.join("; "))
}

fn c9_transparency_scaling() -> Outcome {
    let (cfg, base) = cavity_setup("0 a", "0 pi");
    let per_atom = base.cooperativity() / base.cavity().occupancy;
    let omega = cfg.reference;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let n = 31;
    for i in 0..n {
        let target = 10f64.powf(1.0 + 3.0 * i as f64 / (n - 1) as f64);
        let cavity = CavityConfig {
            occupancy: target / per_atom,
            ..*base.cavity()
        };
        let system = base.with_cavity(cavity).unwrap();
        let x = system.cooperativity().ln();
        let y = system.output_intensity(omega).unwrap().ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    outcome(
        (slope + 2.0).abs() <= 0.01,
        format!("log-log slope {slope:.4} over cooperativity 10..1e4"),
    )
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn xi(max: f64) -> impl Strategy<Value = Complex64> {
    (-max..max, 0.0..max).prop_map(|(re, im)| Complex64::new(re, im))
}

fn dimer(max: f64) -> impl Strategy<Value = Dimer> {
    (xi(max), xi(max), 0.0..20.0f64, 0.0..1.0f64)
        .prop_map(|(a, b, k, rho)| Dimer::new(a, b, k, rho, 1.0).unwrap())
}

fn c10_oracles() -> Outcome {
    let closed = Cell::new(0.0f64);
    let skipped = Cell::new(0usize);
    runner(100)
        .run(&(dimer(0.3), 1usize..=2000), |(d, n)| {
            let t = d.matrix().power_direct(n).unwrap().transmission();
            if !(t.norm() > 1e-200 && t.norm().is_finite()) {
                skipped.set(skipped.get() + 1);
                return Ok(());
            }
            let got = stack_response(&d, n).unwrap().transmission;
            closed.set(closed.get().max(((got - t) / t).norm()));
            Ok(())
        })
        .unwrap();

    let steady = Cell::new(0.0f64);
    let rb = AtomSpecies::rb85_d2();
    let strategy = (
        0.0..TAU,
        0.0..1.0f64,
        -80.0..80.0f64,
        any::<bool>(),
        1.0..1e4f64,
    );
    runner(100)
        .run(&strategy, |(phi, rho, det, commensurate, occupancy)| {
            let cavity = CavityConfig {
                mode_frequency: rb.transition_frequency(),
                linewidth: Some(TAU * 21e3),
                length: 0.085,
                finesse: None,
                waist: 130e-6,
                phase: phi,
                pump: 1.0,
                occupancy,
                plane_count: 200,
                commensurate,
                mirror_reflectivity: None,
            };
            let a = rb.wavelength();
            let system = CavitySystem::new(cavity, rb, rb, a, rho * a).unwrap();
            let w = rb.transition_frequency() + det * rb.linewidth();
            let got = system.output_intensity(w).unwrap();
            let want = system.closed_form_intensity(w).unwrap();
            steady.set(steady.get().max((got - want).abs() / want));
            Ok(())
        })
        .unwrap();

    let det = Cell::new(0.0f64);
    runner(10_000)
        .run(&dimer(2.0), |d| {
            let m = d.matrix();
            let scale = 1.0 + m.m11.norm() * m.m22.norm();
            det.set(det.get().max((m.determinant() - 1.0).norm() / scale));
            Ok(())
        })
        .unwrap();

    let lossless = Cell::new(0.0f64);
    let strategy = (
        -1.0..1.0f64,
        -1.0..1.0f64,
        0.0..20.0f64,
        0.0..1.0f64,
        1usize..1000,
    );
    runner(10_000)
        .run(&strategy, |(x1, x2, k, rho, n)| {
            let d = Dimer::new(
                Complex64::new(x1, 0.0),
                Complex64::new(x2, 0.0),
                k,
                rho,
                1.0,
            )
            .unwrap();
            let r = stack_response(&d, n).unwrap();
            lossless.set(
                lossless
                    .get()
                    .max((r.transmittance() + r.reflectance() - 1.0).abs()),
            );
            Ok(())
        })
        .unwrap();

    let pass =
        closed.get() < 1e-8 && steady.get() < 1e-12 && det.get() < 1e-12 && lossless.get() < 1e-10;
    outcome(
        pass,
        format!(
            "closed form vs power {:.1e} ({} underflowed draws skipped), steady state vs closed form {:.1e}, |det - 1| {:.1e}, lossless |r|^2+|t|^2-1 {:.1e}",
            closed.get(),
            skipped.get(),
            steady.get(),
            det.get(),
            lossless.get()
        ),
    )
}

fn main() {
    let results = [
        criterion(
            1,
            "gap edges at +-420 gamma",
            Some(FREE_SPACE_LIMIT),
            c1_gap_edges,
        ),
        criterion(
            2,
            "mini-band at rho = 0.2a",
            Some(FREE_SPACE_LIMIT),
            c2_mini_band,
        ),
        criterion(
            3,
            "transparency at rho = 0.25a",
            Some(FREE_SPACE_LIMIT),
            c3_quarter_cell_transparency,
        ),
        criterion(
            4,
            "analytic vs numeric band edges",
            Some(BAND_LIMIT),
            c4_band_edges,
        ),
        criterion(
            5,
            "gap closure at rho = a/4",
            Some(BAND_LIMIT),
            c5_gap_closure,
        ),
        criterion(6, "gap multiplicity", None, c6_gap_multiplicity),
        criterion(7, "empty-cavity equivalence", None, c7_empty_cavity),
        criterion(8, "vacuum Rabi splitting", None, c8_rabi_splitting),
        criterion(
            9,
            "cavity-induced transparency 1/C^2",
            None,
            c9_transparency_scaling,
        ),
        criterion(10, "oracle suites", None, c10_oracles),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() && std::env::var_os("BILATTICE_STRICT").is_some() {
        std::process::exit(1);
    }
}
