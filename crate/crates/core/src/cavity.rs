//! Driven optical resonator containing the lattice, in the weak-pump
//! (linear) regime.
//!
//! The cavity mode `a` couples to the spin waves at `±Q`, where `Q + G = k`.
//! For an incommensurate mode both `±Q` branches participate with half
//! amplitude and the dependence on `ϱ` and `φ` drops out of every observable.
//! For a commensurate mode `k = 𝒩π/a` the two branches are one and the same
//! spin wave (`Q = 0` for even `𝒩`, `π/a` for odd `𝒩`) and the coupling
//! picks up the standing-wave factors `cos φ` and `cos(kϱ + φ)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::physics::{cavity_coupling, AtomSpecies, SPEED_OF_LIGHT};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative mismatch between `κ` and `πc/(LF)` above which a warning is
/// logged.
pub const FINESSE_TOLERANCE: f64 = 0.2;

/// Resonator and drive parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    /// `ω_c` in rad/s.
    pub mode_frequency: f64,
    /// Field decay rate `κ` in rad/s. When absent it is derived from the
    /// finesse.
    pub linewidth: Option<f64>,
    pub length: f64,
    pub finesse: Option<f64>,
    pub waist: f64,
    /// Offset `φ` between the cavity standing wave and the lattice.
    pub phase: f64,
    /// Pump amplitude `η` in rad/s; `2κ|⟨a⟩|²` is then a photon flux.
    pub pump: f64,
    /// Mean number of atoms per lattice site, `n̄`.
    pub occupancy: f64,
    /// Number of atomic planes `N = 2M` inside the resonator.
    pub plane_count: usize,
    pub commensurate: bool,
    /// Mirror intensity reflectivity. Kept as metadata only.
    pub mirror_reflectivity: Option<f64>,
}

impl CavityConfig {
    /// Checks ranges and, when both `κ` and the finesse are given, their
    /// mutual consistency (warning only).
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            ensure(v.is_finite() && v > 0.0, name, v, "must be positive")
        };
        positive("mode_frequency", self.mode_frequency)?;
        positive("length", self.length)?;
        positive("waist", self.waist)?;
        ensure(
            self.occupancy.is_finite() && self.occupancy >= 0.0,
            "occupancy",
            self.occupancy,
            "must be non-negative",
        )?;
        ensure(self.pump.is_finite(), "pump", self.pump, "must be finite")?;
        ensure(
            self.phase.is_finite(),
            "phase",
            self.phase,
            "must be finite",
        )?;
        ensure(
            self.plane_count >= 2 && self.plane_count % 2 == 0,
            "plane_count",
            self.plane_count as f64,
            "must be a positive even number (two planes per cell)",
        )?;
        if let Some(k) = self.linewidth {
            positive("linewidth", k)?;
        }
        if let Some(f) = self.finesse {
            positive("finesse", f)?;
        }
        if let Some(r) = self.mirror_reflectivity {
            ensure(
                (0.0..=1.0).contains(&r),
                "mirror_reflectivity",
                r,
                "must lie in [0, 1]",
            )?;
        }
        match (self.linewidth, self.finesse) {
            (None, None) => Err(Error::InvalidParameter {
                name: "linewidth",
                value: f64::NAN,
                reason: "either the linewidth or the finesse is required",
            }),
            (Some(kappa), Some(_)) => {
                if let Some(mismatch) = self.finesse_mismatch() {
                    if mismatch > FINESSE_TOLERANCE {
                        log::warn!(
                            "cavity linewidth {kappa} rad/s differs from pi*c/(L*F) by {:.0}%; using the linewidth",
                            100.0 * mismatch
                        );
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `δω = 2πc/L`.
    pub fn free_spectral_range(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.length
    }

    /// `πc/(LF)`, if a finesse is set.
    pub fn finesse_linewidth(&self) -> Option<f64> {
        self.finesse
            .map(|f| PI * SPEED_OF_LIGHT / (self.length * f))
    }

    /// Relative difference between the given `κ` and the finesse estimate.
    pub fn finesse_mismatch(&self) -> Option<f64> {
        match (self.linewidth, self.finesse_linewidth()) {
            (Some(k), Some(kf)) => Some((k - kf).abs() / k),
            _ => None,
        }
    }

    /// `κ`: the explicit linewidth if given, else `πc/(LF)`.
    pub fn decay_rate(&self) -> f64 {
        self.linewidth
            .or_else(|| self.finesse_linewidth())
            .unwrap_or(f64::NAN)
    }

    pub fn cell_count(&self) -> usize {
        self.plane_count / 2
    }
}

/// `𝓡` for the incommensurate (`(g₁² + g₂²)/2`) or commensurate
/// (`g₁² cos² φ + g₂² cos²(kϱ + φ)`) geometry.
pub fn collective_r(g1: f64, g2: f64, k: f64, rho: f64, phi: f64, commensurate: bool) -> f64 {
    if commensurate {
        let c1 = phi.cos();
        let c2 = (k * rho + phi).cos();
        g1 * g1 * c1 * c1 + g2 * g2 * c2 * c2
    } else {
        (g1 * g1 + g2 * g2) / 2.0
    }
}

/// Complex normal-mode frequencies in the frame rotating at the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityModes {
    /// Dark spin waves, `Δ − iγ/2`.
    pub nu_0: Complex64,
    pub nu_plus: Complex64,
    pub nu_minus: Complex64,
}

/// Eigenfrequencies for equal atomic detunings `Δ` and linewidths `γ`:
/// `ν± = (δ_c + Δ − i(κ + γ/2))/2 ± √((δ_c − Δ − iκ + iγ/2)²/4 + M𝓡)`.
pub fn eigenfrequencies(
    delta_c: f64,
    delta: f64,
    kappa: f64,
    gamma: f64,
    cells: usize,
    r: f64,
) -> CavityModes {
    let mean = Complex64::new(delta_c + delta, -(kappa + gamma / 2.0)) / 2.0;
    let half_diff = Complex64::new(delta_c - delta, -kappa + gamma / 2.0) / 2.0;
    let root = (half_diff * half_diff + cells as f64 * r).sqrt();
    CavityModes {
        nu_0: Complex64::new(delta, -gamma / 2.0),
        nu_plus: mean + root,
        nu_minus: mean - root,
    }
}

/// Peak frequencies `(ω_c + ω_a)/2 ± √(((ω_c − ω_a)/2)² + M𝓡)`, returned
/// as `(lower, upper)`.
pub fn rabi_peak_positions(omega_c: f64, omega_a: f64, cells: usize, r: f64) -> (f64, f64) {
    let half = (omega_c - omega_a) / 2.0;
    let split = (half * half + cells as f64 * r).sqrt();
    let centre = omega_a + half;
    (centre - split, centre + split)
}

/// Mean amplitudes `⟨a⟩, ⟨b₊⟩, ⟨b₋⟩, ⟨d₊⟩, ⟨d₋⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    pub d_plus: Complex64,
    pub d_minus: Complex64,
}

impl SteadyState {
    pub fn as_array(&self) -> [Complex64; 5] {
        [self.a, self.b_plus, self.b_minus, self.d_plus, self.d_minus]
    }
}

/// Atoms inside a resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySystem {
    cavity: CavityConfig,
    species_even: AtomSpecies,
    species_odd: AtomSpecies,
    cell_size: f64,
    intracell_distance: f64,
}

impl CavitySystem {
    pub fn new(
        cavity: CavityConfig,
        species_even: AtomSpecies,
        species_odd: AtomSpecies,
        cell_size: f64,
        intracell_distance: f64,
    ) -> Result<Self> {
        cavity.validate()?;
        ensure(
            cell_size.is_finite() && cell_size > 0.0,
            "cell_size",
            cell_size,
            "must be positive",
        )?;
        ensure(
            (0.0..=cell_size).contains(&intracell_distance),
            "intracell_distance",
            intracell_distance,
            "must lie in [0, cell_size]",
        )?;
        Ok(Self {
            cavity,
            species_even,
            species_odd,
            cell_size,
            intracell_distance,
        })
    }

    pub fn with_intracell_distance(&self, rho: f64) -> Result<Self> {
        Self::new(
            self.cavity,
            self.species_even,
            self.species_odd,
            self.cell_size,
            rho,
        )
    }

    pub fn with_phase(&self, phase: f64) -> Result<Self> {
        let mut cavity = self.cavity;
        cavity.phase = phase;
        Self::new(
            cavity,
            self.species_even,
            self.species_odd,
            self.cell_size,
            self.intracell_distance,
        )
    }

    pub fn with_cavity(&self, cavity: CavityConfig) -> Result<Self> {
        Self::new(
            cavity,
            self.species_even,
            self.species_odd,
            self.cell_size,
            self.intracell_distance,
        )
    }

    pub fn cavity(&self) -> &CavityConfig {
        &self.cavity
    }

    pub fn species_even(&self) -> &AtomSpecies {
        &self.species_even
    }

    pub fn species_odd(&self) -> &AtomSpecies {
        &self.species_odd
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn intracell_distance(&self) -> f64 {
        self.intracell_distance
    }

    pub fn cells(&self) -> usize {
        self.cavity.cell_count()
    }

    pub fn kappa(&self) -> f64 {
        self.cavity.decay_rate()
    }

    /// Single-site couplings `(√n̄ g₁, √n̄ g₂)`.
    pub fn couplings(&self) -> (f64, f64) {
        (
            cavity_coupling(&self.species_even, &self.cavity),
            cavity_coupling(&self.species_odd, &self.cavity),
        )
    }

    /// `𝒩 = round(ω_c a/(cπ))`, the standing-wave index of a commensurate
    /// mode.
    pub fn mode_index(&self) -> i64 {
        (self.cavity.mode_frequency * self.cell_size / (SPEED_OF_LIGHT * PI)).round() as i64
    }

    /// Cavity wavenumber: `ω_c/c`, or `𝒩π/a` when commensurate.
    pub fn wavenumber(&self) -> f64 {
        if self.cavity.commensurate {
            self.mode_index() as f64 * PI / self.cell_size
        } else {
            self.cavity.mode_frequency / SPEED_OF_LIGHT
        }
    }

    /// Spin-wave quasi-momentum addressed by a commensurate mode: `0` for even
    /// `𝒩`, `π/a` for odd `𝒩`. `None` for an incommensurate mode.
    pub fn selected_quasi_momentum(&self) -> Option<f64> {
        if !self.cavity.commensurate {
            return None;
        }
        Some(if self.mode_index() % 2 == 0 {
            0.0
        } else {
            PI / self.cell_size
        })
    }

    pub fn collective_r(&self) -> f64 {
        let (g1, g2) = self.couplings();
        collective_r(
            g1,
            g2,
            self.wavenumber(),
            self.intracell_distance,
            self.cavity.phase,
            self.cavity.commensurate,
        )
    }

    /// `𝒞 = M𝓡/(κγ₁)`.
    pub fn cooperativity(&self) -> f64 {
        self.cells() as f64 * self.collective_r() / (self.kappa() * self.species_even.linewidth())
    }

    /// Coupling of `a` to `[b₊, b₋, d₊, d₋]`.
    fn mode_couplings(&self) -> [Complex64; 4] {
        let (g1, g2) = self.couplings();
        let sqrt_m = (self.cells() as f64).sqrt();
        let phi = self.cavity.phase;
        let odd_phase = self.wavenumber() * self.intracell_distance + phi;
        let zero = Complex64::new(0.0, 0.0);
        if self.cavity.commensurate {
            [
                Complex64::new(sqrt_m * g1 * phi.cos(), 0.0),
                zero,
                Complex64::new(sqrt_m * g2 * odd_phase.cos(), 0.0),
                zero,
            ]
        } else {
            let h = sqrt_m / 2.0;
            [
                Complex64::from_polar(h * g1, phi),
                Complex64::from_polar(h * g1, -phi),
                Complex64::from_polar(h * g2, odd_phase),
                Complex64::from_polar(h * g2, -odd_phase),
            ]
        }
    }

    /// Solves the linearized equations of motion with zero-mean noise.
    pub fn steady_state(&self, omega_p: f64) -> Result<SteadyState> {
        let kappa = self.kappa();
        let delta_c = self.cavity.mode_frequency - omega_p;
        let spins = [
            &self.species_even,
            &self.species_even,
            &self.species_odd,
            &self.species_odd,
        ];
        let c = self.mode_couplings();

        let mut m = SMatrix::<Complex64, 5, 5>::zeros();
        m[(0, 0)] = -Complex64::new(kappa, delta_c);
        for (j, (cj, s)) in c.iter().zip(spins).enumerate() {
            let delta_j = s.transition_frequency() - omega_p;
            m[(0, j + 1)] = -I * cj.conj();
            m[(j + 1, 0)] = -I * cj;
            m[(j + 1, j + 1)] = -Complex64::new(s.linewidth() / 2.0, delta_j);
        }
        let mut rhs = SVector::<Complex64, 5>::zeros();
        rhs[0] = Complex64::new(-self.cavity.pump, 0.0);

        let x = m
            .lu()
            .solve(&rhs)
            .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .ok_or(Error::SingularSteadyState { omega_p })?;
        Ok(SteadyState {
            a: x[0],
            b_plus: x[1],
            b_minus: x[2],
            d_plus: x[3],
            d_minus: x[4],
        })
    }

    /// Output photon flux `2κ|⟨a⟩|²`.
    pub fn output_intensity(&self, omega_p: f64) -> Result<f64> {
        Ok(2.0 * self.kappa() * self.steady_state(omega_p)?.a.norm_sqr())
    }

    fn symmetric_atoms(&self) -> Result<(f64, f64)> {
        let (e, o) = (&self.species_even, &self.species_odd);
        let tol = 1e-12 * e.transition_frequency();
        if (e.transition_frequency() - o.transition_frequency()).abs() > tol
            || (e.linewidth() - o.linewidth()).abs() > 1e-12 * e.linewidth()
        {
            return Err(Error::OutsideClosedForm);
        }
        Ok((e.transition_frequency(), e.linewidth()))
    }

    /// `2κη²(Δ² + γ²/4)/((κγ/2 − δ_cΔ + M𝓡)² + (Δκ + δ_cγ/2)²)`, valid for
    /// identical transitions.
    pub fn closed_form_intensity(&self, omega_p: f64) -> Result<f64> {
        let (omega_a, gamma) = self.symmetric_atoms()?;
        let kappa = self.kappa();
        let eta = self.cavity.pump;
        let delta_c = self.cavity.mode_frequency - omega_p;
        let delta = omega_a - omega_p;
        let mr = self.cells() as f64 * self.collective_r();
        let re = kappa * gamma / 2.0 - delta_c * delta + mr;
        let im = delta * kappa + delta_c * gamma / 2.0;
        Ok(2.0 * kappa * eta * eta * (delta * delta + gamma * gamma / 4.0) / (re * re + im * im))
    }

    /// Normal modes at probe `omega_p`, valid for identical transitions.
    pub fn eigenfrequencies(&self, omega_p: f64) -> Result<CavityModes> {
        let (omega_a, gamma) = self.symmetric_atoms()?;
        Ok(eigenfrequencies(
            self.cavity.mode_frequency - omega_p,
            omega_a - omega_p,
            self.kappa(),
            gamma,
            self.cells(),
            self.collective_r(),
        ))
    }

    /// Predicted output maxima for identical transitions.
    pub fn rabi_peaks(&self) -> Result<(f64, f64)> {
        let (omega_a, _) = self.symmetric_atoms()?;
        Ok(rabi_peak_positions(
            self.cavity.mode_frequency,
            omega_a,
            self.cells(),
            self.collective_r(),
        ))
    }

    /// Resonant output of the empty cavity, `2η²/κ`.
    pub fn empty_cavity_peak(&self) -> f64 {
        2.0 * self.cavity.pump * self.cavity.pump / self.kappa()
    }
}

/// Output flux `2κη²/(δ_c² + κ²)` of an empty resonator.
pub fn empty_cavity_intensity(kappa: f64, pump: f64, delta_c: f64) -> f64 {
    2.0 * kappa * pump * pump / (delta_c * delta_c + kappa * kappa)
}

/// One row of a cavity output spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityPoint {
    pub omega_p: f64,
    /// `(ω_p − ω_ref)/γ₁`.
    pub detuning: f64,
    pub intensity: f64,
    /// Intensity over the empty-cavity resonant peak.
    pub normalized: f64,
}

pub fn cavity_point(system: &CavitySystem, omega_p: f64, reference: f64) -> Result<CavityPoint> {
    let intensity = system.output_intensity(omega_p)?;
    Ok(CavityPoint {
        omega_p,
        detuning: (omega_p - reference) / system.species_even().linewidth(),
        intensity,
        normalized: intensity / system.empty_cavity_peak(),
    })
}

/// Output spectrum over `probe_grid`, in grid order.
pub fn cavity_spectrum(
    system: &CavitySystem,
    probe_grid: &[f64],
    reference: f64,
) -> Result<Vec<CavityPoint>> {
    ensure(
        !probe_grid.is_empty(),
        "probe_grid",
        0.0,
        "at least one probe frequency is required",
    )?;
    probe_grid
        .iter()
        .map(|&w| cavity_point(system, w, reference))
        .collect()
}

/// Local maxima of `ys` over the uniformly spaced `xs`, refined by a parabola
/// through each maximum and its two neighbours. Returns `(x, y)` pairs in
/// ascending `x`.
pub fn find_peaks(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let n = xs.len().min(ys.len());
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    for i in 1..n - 1 {
        let (l, c, r) = (ys[i - 1], ys[i], ys[i + 1]);
        if !(c > l && c >= r) {
            continue;
        }
        let curvature = l - 2.0 * c + r;
        let h = (xs[i + 1] - xs[i - 1]) / 2.0;
        if curvature < 0.0 {
            let shift = 0.5 * (l - r) / curvature;
            let y = c - 0.25 * (l - r) * shift;
            peaks.push((xs[i] + shift * h, y));
        } else {
            peaks.push((xs[i], c));
        }
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_cavity() -> CavityConfig {
        let rb = AtomSpecies::rb85_d2();
        CavityConfig {
            mode_frequency: rb.transition_frequency(),
            linewidth: Some(2.0 * PI * 21e3),
            length: 0.085,
            finesse: Some(170_000.0),
            waist: 130e-6,
            phase: PI / 2.0,
            pump: 1.0e3,
            occupancy: 3000.0,
            plane_count: 200,
            commensurate: true,
            mirror_reflectivity: Some(1.0 - 1.8e-5),
        }
    }

    fn system(rho_frac: f64) -> CavitySystem {
        let rb = AtomSpecies::rb85_d2();
        CavitySystem::new(
            reference_cavity(),
            rb,
            rb,
            rb.wavelength(),
            rho_frac * rb.wavelength(),
        )
        .unwrap()
    }

    #[test]
    fn frozen_coupling_value() {
        // √n̄ √(ς/(4πA)) √(γ 2πc/L) for Rb D2, L = 85 mm, w = 130 µm, n̄ = 3000.
        let s = system(0.0);
        let (g1, g2) = s.couplings();
        assert_relative_eq!(g1, 6.606_768_361_774_823e7, max_relative = 1e-9);
        assert_eq!(g1, g2);
        let mut bare = reference_cavity();
        bare.occupancy = 1.0;
        let g = cavity_coupling(s.species_even(), &bare);
        assert_relative_eq!(g, 1.206_225_354_651_840_9e6, max_relative = 1e-9);
    }

    #[test]
    fn occupancy_scales_as_square_root() {
        let rb = AtomSpecies::rb85_d2();
        let mut c = reference_cavity();
        c.occupancy = 1.0;
        let g1 = cavity_coupling(&rb, &c);
        c.occupancy = 4.0;
        assert_relative_eq!(cavity_coupling(&rb, &c), 2.0 * g1, max_relative = 1e-15);
    }

    #[test]
    fn finesse_estimate_is_used_without_linewidth() {
        let mut c = reference_cavity();
        c.linewidth = None;
        c.validate().unwrap();
        assert_relative_eq!(
            c.decay_rate(),
            PI * SPEED_OF_LIGHT / (0.085 * 170_000.0),
            max_relative = 1e-15
        );
        c.finesse = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn linewidth_wins_over_finesse() {
        let c = reference_cavity();
        c.validate().unwrap();
        assert_eq!(c.decay_rate(), 2.0 * PI * 21e3);
        assert!(c.finesse_mismatch().unwrap() > FINESSE_TOLERANCE);
    }

    #[test]
    fn collective_r_limits() {
        assert_eq!(collective_r(2.0, 2.0, 1.0, 0.3, 0.7, false), 4.0);
        assert!(collective_r(2.0, 3.0, 1.0, 0.0, PI / 2.0, true) < 1e-30);
        assert_relative_eq!(collective_r(2.0, 3.0, 1.0, 0.0, 0.0, true), 13.0);
    }

    #[test]
    fn decoupled_modes() {
        let m = eigenfrequencies(3.0, -1.0, 0.5, 0.2, 10, 0.0);
        let expect_c = Complex64::new(3.0, -0.5);
        let expect_a = Complex64::new(-1.0, -0.1);
        assert!((m.nu_plus - expect_c).norm() < 1e-14);
        assert!((m.nu_minus - expect_a).norm() < 1e-14);
        assert_eq!(m.nu_0, expect_a);
    }

    #[test]
    fn resonant_splitting_is_twice_root_mr() {
        let m = eigenfrequencies(0.0, 0.0, 1e-3, 1e-3, 100, 4.0);
        assert_relative_eq!(
            m.nu_plus.re - m.nu_minus.re,
            2.0 * 20.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn mode_index_parity_selects_q() {
        let s = system(0.0);
        assert_eq!(s.mode_index(), 2);
        assert_eq!(s.selected_quasi_momentum(), Some(0.0));
        let mut c = reference_cavity();
        c.mode_frequency *= 1.5;
        let s = s.with_cavity(c).unwrap();
        assert_eq!(s.mode_index(), 3);
        assert_relative_eq!(s.selected_quasi_momentum().unwrap(), PI / s.cell_size());
    }

    #[test]
    fn zero_pump_gives_zero_field() {
        let mut c = reference_cavity();
        c.pump = 0.0;
        let s = system(0.2).with_cavity(c).unwrap();
        let st = s.steady_state(s.cavity().mode_frequency + 1e7).unwrap();
        assert!(st.as_array().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn nodes_decouple_the_atoms() {
        let s = system(0.0);
        let kappa = s.kappa();
        for dw in [-3e8, -1e5, 0.0, 2e4, 7e7] {
            let w = s.cavity().mode_frequency + dw;
            let st = s.steady_state(w).unwrap();
            let expect = empty_cavity_intensity(kappa, s.cavity().pump, -dw);
            assert_relative_eq!(s.output_intensity(w).unwrap(), expect, max_relative = 1e-12);
            assert!(st.b_plus.norm() < 1e-12 * st.a.norm());
        }
    }

    #[test]
    fn steady_state_matches_closed_form() {
        let s = system(0.2).with_phase(0.3).unwrap();
        let gamma = s.species_even().linewidth();
        for i in -20..=20 {
            let w = s.cavity().mode_frequency + i as f64 * 1.7 * gamma;
            let a = s.output_intensity(w).unwrap();
            let b = s.closed_form_intensity(w).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn closed_form_refuses_unequal_lines() {
        let rb = AtomSpecies::rb85_d2();
        let odd = rb.detuned(1e8).unwrap();
        let s = CavitySystem::new(reference_cavity(), rb, odd, rb.wavelength(), 0.0).unwrap();
        assert_eq!(s.closed_form_intensity(1e15), Err(Error::OutsideClosedForm));
        assert!(s.output_intensity(rb.transition_frequency()).is_ok());
    }

    #[test]
    fn parabolic_peak_refinement_is_exact_for_parabola() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 4.0 - (x - 2.3) * (x - 2.3)).collect();
        let p = find_peaks(&xs, &ys);
        assert_eq!(p.len(), 1);
        assert_relative_eq!(p[0].0, 2.3, epsilon = 1e-12);
        assert_relative_eq!(p[0].1, 4.0, epsilon = 1e-12);
    }
}
