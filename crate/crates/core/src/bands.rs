//! Polariton band structure of the two-plane lattice.
//!
//! At each quasi-momentum `q` of the first Brillouin zone the two spin waves
//! (`b_q` on even planes, `d_q` on odd planes) couple to the photon modes at
//! `q + G`, `G = 2πm/a`, `|m| ≤ n_bz`. The resulting Hermitian block is
//! diagonalized densely. Absorption is not part of this model; it enters
//! through the transfer-matrix engine.
//!
//! Coupling phases follow the Hermitian block Hamiltonian: `b_q` couples to
//! `a_{q+G}` with `√M 𝒢₁` and `d_q` with `√M e^{iGϱ} 𝒢₂`. Writing the photon
//! equation with the opposite sign on the `d_q` term only rephases `d_q` and
//! leaves the spectrum unchanged.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::physics::{freespace_coupling, LatticeConfig, SPEED_OF_LIGHT};

pub const DEFAULT_BRILLOUIN_ZONES: usize = 40;
pub const DEFAULT_Q_POINTS: usize = 401;

/// Relative size, in units of `G₀`, below which `|q + G|` is taken as zero.
pub const ZERO_PHOTON_TOLERANCE: f64 = 1e-9;

/// Hermitian coupled-mode matrix for one quasi-momentum.
///
/// Basis order: photons `m = -n_bz ..= n_bz`, then `b_q`, then `d_q`. The
/// matrix is stored with `offset` removed from the diagonal, which keeps the
/// near-resonant eigenvalues well conditioned.
#[derive(Debug, Clone)]
pub struct BlochMatrix {
    q: f64,
    n_bz: usize,
    offset: f64,
    shifted: DMatrix<Complex64>,
}

impl BlochMatrix {
    pub fn quasi_momentum(&self) -> f64 {
        self.q
    }

    pub fn brillouin_zones(&self) -> usize {
        self.n_bz
    }

    pub fn dimension(&self) -> usize {
        self.shifted.nrows()
    }

    /// Frequency subtracted from the stored diagonal.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `H − offset·1`.
    pub fn shifted(&self) -> &DMatrix<Complex64> {
        &self.shifted
    }

    /// Full matrix in rad/s.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = self.shifted.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += Complex64::new(self.offset, 0.0);
        }
        m
    }

    /// Largest `|H_ij − conj(H_ji)|` relative to the largest entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.to_dense();
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// Sorted real eigenfrequencies in rad/s. Eigenvectors are never formed.
    pub fn eigenfrequencies(&self) -> Result<Vec<f64>> {
        let eig = self.shifted.symmetric_eigenvalues();
        let mut values: Vec<f64> = eig.iter().map(|&v| v + self.offset).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenNoConvergence { q: self.q });
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Ok(values)
    }
}

/// Folds `q` into `[-G₀/2, G₀/2]`.
pub fn fold_into_zone(q: f64, reciprocal: f64) -> f64 {
    if q.abs() <= reciprocal / 2.0 {
        return q;
    }
    let folded = q - reciprocal * (q / reciprocal).round();
    log::warn!("quasi-momentum {q} rad/m lies outside the first zone; folded to {folded}");
    folded
}

/// Assembles the coupled-mode matrix at quasi-momentum `q`.
///
/// The photon at `q + G = 0` has zero frequency and a divergent `1/√ω_k`
/// coupling; it is kept in the basis with zero coupling. `|q + G|` below
/// `ZERO_PHOTON_TOLERANCE · G₀` counts as zero, so grids that miss `q = 0`
/// by rounding give the same spectrum.
pub fn build_bloch_matrix(q: f64, cfg: &LatticeConfig, n_bz: usize) -> Result<BlochMatrix> {
    if n_bz == 0 {
        return Err(Error::InvalidParameter {
            name: "n_bz",
            value: 0.0,
            reason: "at least one Brillouin zone is required",
        });
    }
    if !q.is_finite() {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must be finite",
        });
    }
    let g0 = cfg.reciprocal_vector();
    let q = fold_into_zone(q, g0);

    let n_photon = 2 * n_bz + 1;
    let dim = n_photon + 2;
    let b = n_photon;
    let d = n_photon + 1;

    let even = cfg.species_even();
    let odd = cfg.species_odd();
    let offset = even.transition_frequency();
    let volume = cfg.quantization_volume();
    let sqrt_m = (cfg.cell_count() as f64).sqrt();
    let rho = cfg.intracell_distance();
    let minus_i = Complex64::new(0.0, -1.0);

    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    h[(b, b)] = Complex64::new(0.0, 0.0);
    h[(d, d)] = Complex64::new(odd.transition_frequency() - offset, 0.0);

    for (idx, m) in (-(n_bz as i64)..=n_bz as i64).enumerate() {
        let g = g0 * m as f64;
        let k = (q + g).abs();
        let omega_k = if k <= ZERO_PHOTON_TOLERANCE * g0 {
            0.0
        } else {
            SPEED_OF_LIGHT * k
        };
        h[(idx, idx)] = Complex64::new(omega_k - offset, 0.0);
        if omega_k == 0.0 {
            continue;
        }
        let g_even = minus_i * (sqrt_m * freespace_coupling(even, omega_k, volume));
        let g_odd = minus_i
            * Complex64::from_polar(sqrt_m * freespace_coupling(odd, omega_k, volume), g * rho);
        h[(b, idx)] = g_even;
        h[(idx, b)] = g_even.conj();
        h[(d, idx)] = g_odd;
        h[(idx, d)] = g_odd.conj();
    }

    Ok(BlochMatrix {
        q,
        n_bz,
        offset,
        shifted: h,
    })
}

/// Uniform grid of `n_q` points over `[-G₀/2, G₀/2]`, exactly symmetric and
/// containing `q = 0` when `n_q` is odd.
pub fn zone_grid(cfg: &LatticeConfig, n_q: usize) -> Vec<f64> {
    let g0 = cfg.reciprocal_vector();
    if n_q == 1 {
        return alloc::vec![0.0];
    }
    let span = (n_q - 1) as f64;
    (0..n_q)
        .map(|i| g0 * (2.0 * i as f64 - span) / (2.0 * span))
        .collect()
}

/// Sorted eigenfrequencies at one quasi-momentum.
pub fn bands_at(cfg: &LatticeConfig, q: f64, n_bz: usize) -> Result<Vec<f64>> {
    build_bloch_matrix(q, cfg, n_bz)?.eigenfrequencies()
}

/// Eigenfrequencies over a q-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    q_grid: Vec<f64>,
    bands: Vec<Vec<f64>>,
    n_bz: usize,
}

impl BandStructure {
    /// Assembles a band structure from per-q spectra computed elsewhere
    /// (e.g. in parallel). `bands[i]` belongs to `q_grid[i]`.
    pub fn from_parts(q_grid: Vec<f64>, bands: Vec<Vec<f64>>, n_bz: usize) -> Result<Self> {
        let expected = 2 * n_bz + 3;
        if q_grid.len() != bands.len() || bands.iter().any(|b| b.len() != expected) {
            return Err(Error::InvalidParameter {
                name: "bands",
                value: bands.len() as f64,
                reason: "one spectrum of 2*n_bz + 3 values per q-point is required",
            });
        }
        Ok(Self {
            q_grid,
            bands,
            n_bz,
        })
    }

    pub fn q_grid(&self) -> &[f64] {
        &self.q_grid
    }

    /// Spectrum at `q_grid[i]`, ascending.
    pub fn bands_at(&self, i: usize) -> &[f64] {
        &self.bands[i]
    }

    pub fn spectra(&self) -> &[Vec<f64>] {
        &self.bands
    }

    pub fn band_count(&self) -> usize {
        2 * self.n_bz + 3
    }

    pub fn brillouin_zones(&self) -> usize {
        self.n_bz
    }

    /// Largest `|ω_n(q) − ω_n(−q)|` over the grid, relative to `scale`.
    /// Assumes a grid symmetric about zero.
    pub fn inversion_asymmetry(&self, scale: f64) -> f64 {
        let n = self.q_grid.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let j = n - 1 - i;
            for (a, b) in self.bands[i].iter().zip(&self.bands[j]) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
        worst
    }
}

/// Dense eigensolve on a uniform zone grid.
pub fn compute_bands(cfg: &LatticeConfig, n_bz: usize, n_q: usize) -> Result<BandStructure> {
    if n_q < 3 {
        return Err(Error::InvalidParameter {
            name: "n_q",
            value: n_q as f64,
            reason: "at least three q-points are required",
        });
    }
    compute_bands_on(cfg, n_bz, zone_grid(cfg, n_q))
}

/// Dense eigensolve on a caller-supplied q-grid (ascending).
pub fn compute_bands_on(
    cfg: &LatticeConfig,
    n_bz: usize,
    q_grid: Vec<f64>,
) -> Result<BandStructure> {
    let bands = q_grid
        .iter()
        .map(|&q| bands_at(cfg, q, n_bz))
        .collect::<Result<Vec<_>>>()?;
    BandStructure::from_parts(q_grid, bands, n_bz)
}

/// The four polariton frequencies at `q ≈ 0` from the two-photon (`Q = ±G₀`)
/// truncation, ordered `ν₁₋ ≤ ν₂₋ ≤ ν₂₊ ≤ ν₁₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEdges {
    pub nu_1_minus: f64,
    pub nu_2_minus: f64,
    pub nu_2_plus: f64,
    pub nu_1_plus: f64,
}

impl AnalyticEdges {
    /// Lower gap `[ν₁₋, ν₂₋]`.
    pub fn lower_gap(&self) -> Gap {
        Gap {
            lower_edge: self.nu_1_minus,
            upper_edge: self.nu_2_minus,
            index: 1,
        }
    }

    /// Upper gap `[ν₂₊, ν₁₊]`.
    pub fn upper_gap(&self) -> Gap {
        Gap {
            lower_edge: self.nu_2_plus,
            upper_edge: self.nu_1_plus,
            index: 2,
        }
    }

    /// Width of the transmission window `ν₂₊ − ν₂₋` between the two gaps.
    pub fn inner_window(&self) -> f64 {
        self.nu_2_plus - self.nu_2_minus
    }

    /// Width of the monoperiodic gap `ν₁₊ − ν₁₋`.
    pub fn outer_span(&self) -> f64 {
        self.nu_1_plus - self.nu_1_minus
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.nu_1_minus,
            self.nu_2_minus,
            self.nu_2_plus,
            self.nu_1_plus,
        ]
    }
}

/// Closed-form band edges for equal transition frequencies, couplings taken
/// at `Q = G₀`:
///
/// `ν_{j,±} = (ω_Q + ω₁)/2 ± √(((ω_Q − ω₁)/2)² + M𝒢²(1 − (−1)^j √(1 − (2|𝒢₁𝒢₂|/𝒢²)² sin² G₀ϱ)))`
pub fn analytic_band_edges(cfg: &LatticeConfig) -> Result<AnalyticEdges> {
    let even = cfg.species_even();
    let odd = cfg.species_odd();
    let w1 = even.transition_frequency();
    let w2 = odd.transition_frequency();
    if (w1 - w2).abs() > 1e-12 * w1 {
        return Err(Error::UnequalTransitions {
            omega_even: w1,
            omega_odd: w2,
        });
    }
    let omega_q = cfg.bragg_frequency();
    let volume = cfg.quantization_volume();
    let g1 = freespace_coupling(even, omega_q, volume);
    let g2 = freespace_coupling(odd, omega_q, volume);
    let total_sq = g1 * g1 + g2 * g2;
    let m = cfg.cell_count() as f64;
    let ratio = if total_sq > 0.0 {
        2.0 * g1 * g2 / total_sq
    } else {
        0.0
    };
    let s = (cfg.reciprocal_vector() * cfg.intracell_distance()).sin();
    let root = (1.0 - ratio * ratio * s * s).max(0.0).sqrt();

    let half_detuning = (omega_q - w1) / 2.0;
    let outer = (half_detuning * half_detuning + m * total_sq * (1.0 + root)).sqrt();
    let inner = (half_detuning * half_detuning + m * total_sq * (1.0 - root)).sqrt();
    // Offsets are formed relative to ω₁ so the edges keep their absolute
    // precision.
    let centre = w1 + half_detuning;
    Ok(AnalyticEdges {
        nu_1_minus: centre - outer,
        nu_2_minus: centre - inner,
        nu_2_plus: centre + inner,
        nu_1_plus: centre + outer,
    })
}

/// A frequency interval free of propagating polaritons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lower_edge: f64,
    pub upper_edge: f64,
    /// 1 for the lowest-frequency gap in the searched window.
    pub index: usize,
}

impl Gap {
    pub fn width(&self) -> f64 {
        self.upper_edge - self.lower_edge
    }
}

/// Coverage rules for [`find_gaps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    /// Padding added on both sides of every band segment.
    pub cover_tol: f64,
    /// Covered strips narrower than this do not split a gap (flat,
    /// dark-state bands at the atomic lines).
    pub min_band_width: f64,
}

impl GapOptions {
    /// `cover_tol = γ/10`, `min_band_width = γ`.
    pub fn for_linewidth(linewidth: f64) -> Self {
        Self {
            cover_tol: linewidth / 10.0,
            min_band_width: linewidth,
        }
    }
}

/// Default search window: the atomic lines and the Bragg frequency, widened by
/// four collective coupling strengths on each side.
pub fn default_gap_window(cfg: &LatticeConfig) -> (f64, f64) {
    let omega_q = cfg.bragg_frequency();
    let volume = cfg.quantization_volume();
    let m = cfg.cell_count() as f64;
    let g1 = freespace_coupling(cfg.species_even(), omega_q, volume);
    let g2 = freespace_coupling(cfg.species_odd(), omega_q, volume);
    let collective = (m * (g1 * g1 + g2 * g2)).sqrt();
    let w1 = cfg.species_even().transition_frequency();
    let w2 = cfg.species_odd().transition_frequency();
    let lo = w1.min(w2).min(omega_q);
    let hi = w1.max(w2).max(omega_q);
    let margin = 4.0 * collective + 50.0 * cfg.species_even().linewidth();
    (lo - margin, hi + margin)
}

/// Frequency intervals inside `window` not reached by any band.
///
/// Each band is treated as continuous between neighbouring q-samples: band
/// `n` covers `[min, max]` of its values at `q_i` and `q_{i+1}`, padded by
/// `cover_tol`. The complement of the union of those segments, with strips
/// narrower than `min_band_width` absorbed, gives the gaps.
pub fn find_gaps(bs: &BandStructure, window: (f64, f64), opts: &GapOptions) -> Vec<Gap> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Vec::new();
    }

    let mut segments: Vec<(f64, f64)> = Vec::new();
    let spectra = bs.spectra();
    let mut push = |a: f64, b: f64| {
        let (s, e) = (a.min(b) - opts.cover_tol, a.max(b) + opts.cover_tol);
        if e >= lo && s <= hi {
            segments.push((s, e));
        }
    };
    if spectra.len() == 1 {
        for &w in &spectra[0] {
            push(w, w);
        }
    }
    for pair in spectra.windows(2) {
        for (&a, &b) in pair[0].iter().zip(&pair[1]) {
            push(a, b);
        }
    }
    segments.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));

    // Union of covered segments, clipped to the window.
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for (s, e) in segments {
        let (s, e) = (s.max(lo), e.min(hi));
        match covered.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => covered.push((s, e)),
        }
    }

    let mut open: Vec<(f64, f64)> = Vec::new();
    let mut cursor = lo;
    for &(s, e) in &covered {
        if s > cursor {
            open.push((cursor, s));
        }
        cursor = cursor.max(e);
    }
    if cursor < hi {
        open.push((cursor, hi));
    }

    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in open {
        match merged.last_mut() {
            Some(last) if s - last.1 < opts.min_band_width => last.1 = e,
            _ => merged.push((s, e)),
        }
    }

    merged
        .into_iter()
        .enumerate()
        .map(|(i, (s, e))| Gap {
            lower_edge: s,
            upper_edge: e,
            index: i + 1,
        })
        .collect()
}

/// Settings for a gap-versus-ϱ scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScanOptions {
    pub n_bz: usize,
    pub n_q: usize,
    /// `None` selects [`default_gap_window`] per ϱ.
    pub window: Option<(f64, f64)>,
    pub gaps: GapOptions,
}

impl GapScanOptions {
    pub fn for_lattice(cfg: &LatticeConfig) -> Self {
        Self {
            n_bz: DEFAULT_BRILLOUIN_ZONES,
            n_q: DEFAULT_Q_POINTS,
            window: None,
            gaps: GapOptions::for_linewidth(cfg.species_even().linewidth()),
        }
    }
}

/// Numeric gaps at one ϱ, plus the closed-form edges when they apply.
#[derive(Debug, Clone, PartialEq)]
pub struct GapScanRow {
    pub rho: f64,
    pub numeric: Vec<Gap>,
    pub analytic: Option<AnalyticEdges>,
}

/// Gaps for a single intracell distance.
pub fn gap_row(template: &LatticeConfig, rho: f64, opts: &GapScanOptions) -> Result<GapScanRow> {
    let cfg = template.with_intracell_distance(rho)?;
    let bs = compute_bands(&cfg, opts.n_bz, opts.n_q)?;
    let window = opts.window.unwrap_or_else(|| default_gap_window(&cfg));
    let analytic = match analytic_band_edges(&cfg) {
        Ok(edges) => Some(edges),
        Err(Error::UnequalTransitions { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(GapScanRow {
        rho,
        numeric: find_gaps(&bs, window, &opts.gaps),
        analytic,
    })
}

/// Gap widths as a function of the intracell distance.
pub fn gap_widths_vs_rho(
    template: &LatticeConfig,
    rho_grid: &[f64],
    opts: &GapScanOptions,
) -> Result<Vec<GapScanRow>> {
    rho_grid
        .iter()
        .map(|&rho| gap_row(template, rho, opts))
        .collect()
}

/// Reciprocal-lattice vector for photon index `m`.
pub fn reciprocal(cfg: &LatticeConfig, m: i64) -> f64 {
    TAU / cfg.cell_size() * m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{mode_area_from_waist, AtomSpecies};
    use approx::assert_relative_eq;

    fn fig2(rho_frac: f64) -> LatticeConfig {
        let base = AtomSpecies::rb85_d2();
        let gamma = base.linewidth();
        let atoms = base.detuned(-10.0 * gamma).unwrap();
        let a = base.wavelength();
        LatticeConfig::new(
            a,
            rho_frac * a,
            100,
            5.7e10,
            atoms,
            atoms,
            mode_area_from_waist(5e-6),
        )
        .unwrap()
    }

    #[test]
    fn dimension_counts_zones_and_spins() {
        let m = build_bloch_matrix(0.0, &fig2(0.2), 40).unwrap();
        assert_eq!(m.dimension(), 83);
    }

    #[test]
    fn matrix_is_hermitian() {
        let cfg = fig2(0.37);
        for q in [-0.4, -0.1, 0.0, 0.23, 0.5] {
            let m = build_bloch_matrix(q * cfg.reciprocal_vector(), &cfg, 5).unwrap();
            assert!(m.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn decoupled_limit_gives_bare_frequencies() {
        let base = AtomSpecies::rb85_d2();
        let dark =
            AtomSpecies::with_dipole_moment(base.transition_frequency(), base.linewidth(), 0.0)
                .unwrap();
        let shifted = dark.detuned(300.0 * base.linewidth()).unwrap();
        let cfg = LatticeConfig::new(780e-9, 0.3 * 780e-9, 10, 1.0, dark, shifted, 1e-10).unwrap();
        let q = 0.17 * cfg.reciprocal_vector();
        let got = bands_at(&cfg, q, 3).unwrap();
        let mut expected: Vec<f64> = (-3..=3)
            .map(|m| SPEED_OF_LIGHT * (q + reciprocal(&cfg, m)).abs())
            .collect();
        expected.push(dark.transition_frequency());
        expected.push(shifted.transition_frequency());
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-13 * e.abs().max(1.0), "{g} vs {e}");
        }
    }

    #[test]
    fn rounding_off_zero_keeps_the_zone_centre_spectrum() {
        let cfg = fig2(0.0);
        let at_zero = bands_at(&cfg, 0.0, 10).unwrap();
        let nearby = bands_at(&cfg, -4.7e-10, 10).unwrap();
        let gamma = cfg.species_even().linewidth();
        for (a, b) in at_zero.iter().zip(&nearby) {
            assert!((a - b).abs() < 1e-3 * gamma, "{a} vs {b}");
        }
    }

    #[test]
    fn out_of_zone_q_is_folded() {
        let cfg = fig2(0.2);
        let g0 = cfg.reciprocal_vector();
        let m = build_bloch_matrix(0.1 * g0 + 2.0 * g0, &cfg, 2).unwrap();
        assert_relative_eq!(m.quasi_momentum(), 0.1 * g0, max_relative = 1e-9);
    }

    #[test]
    fn zone_grid_is_symmetric_and_contains_zero() {
        let cfg = fig2(0.2);
        let q = zone_grid(&cfg, 11);
        assert_eq!(q[5], 0.0);
        for i in 0..11 {
            assert_eq!(q[i], -q[10 - i]);
        }
        assert_relative_eq!(q[10], cfg.reciprocal_vector() / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn analytic_edges_single_gap_at_zero_rho() {
        let cfg = fig2(0.0);
        let e = analytic_band_edges(&cfg).unwrap();
        let wq = cfg.bragg_frequency();
        let w1 = cfg.species_even().transition_frequency();
        let pair = [e.nu_2_minus, e.nu_2_plus];
        assert!((pair[0] - w1.min(wq)).abs() < 1e-6 * cfg.species_even().linewidth());
        assert!((pair[1] - w1.max(wq)).abs() < 1e-6 * cfg.species_even().linewidth());
    }

    #[test]
    fn analytic_edges_close_at_quarter_cell() {
        let cfg = fig2(0.25);
        let e = analytic_band_edges(&cfg).unwrap();
        let gamma = cfg.species_even().linewidth();
        assert!(e.lower_gap().width().abs() < 1e-6 * gamma);
        assert!(e.upper_gap().width().abs() < 1e-6 * gamma);
    }

    #[test]
    fn analytic_edges_independent_of_cell_count() {
        let a = analytic_band_edges(&fig2(0.2)).unwrap();
        let b = analytic_band_edges(&fig2(0.2).with_cell_count(400).unwrap()).unwrap();
        let gamma = fig2(0.2).species_even().linewidth();
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            assert!((x - y).abs() < 1e-9 * gamma);
        }
    }

    #[test]
    fn analytic_edges_refuse_unequal_lines() {
        let cfg = fig2(0.2);
        let odd = cfg.species_odd().detuned(1e9).unwrap();
        let cfg = cfg.with_species(*cfg.species_even(), odd).unwrap();
        assert!(matches!(
            analytic_band_edges(&cfg),
            Err(Error::UnequalTransitions { .. })
        ));
    }

    #[test]
    fn degenerate_window_yields_no_gaps() {
        let cfg = fig2(0.2);
        let bs = compute_bands(&cfg, 1, 5).unwrap();
        let w = cfg.species_even().transition_frequency();
        assert!(find_gaps(&bs, (w, w), &GapOptions::for_linewidth(1.0)).is_empty());
    }

    #[test]
    fn compute_bands_requires_three_points() {
        assert!(compute_bands(&fig2(0.2), 2, 2).is_err());
    }
}
