//! Physical constants, atomic species, lattice geometry and the single-atom
//! coupling constants shared by the band-structure, transfer-matrix and
//! cavity engines.
//!
//! Everything is SI with `f64`. Frequencies are angular (rad/s); the spectral
//! engines report detunings in units of the even-site linewidth on top of that.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::cavity::CavityConfig;
use crate::error::{ensure, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Dimensionless complex response of a plane or stack (polarizability scalings,
/// `xi`, reflection and transmission amplitudes, Bloch phases).
pub type ComplexResponse = Complex64;

/// One dipolar transition.
///
/// The scattering cross section and the dipole moment are tied together by
/// `ς = 2 k D² / (ε₀ ħ γ)`; constructors take one and derive the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    transition_frequency: f64,
    linewidth: f64,
    wavelength: f64,
    cross_section: f64,
    dipole_moment: f64,
}

impl AtomSpecies {
    /// Radiatively broadened two-level atom: `ς = 3λ²/2π` and the dipole
    /// moment that produces `linewidth` by spontaneous emission.
    pub fn radiative(transition_frequency: f64, linewidth: f64) -> Result<Self> {
        check_transition(transition_frequency, linewidth)?;
        let dipole_sq = 3.0 * PI * VACUUM_PERMITTIVITY * HBAR * SPEED_OF_LIGHT.powi(3) * linewidth
            / transition_frequency.powi(3);
        Self::with_dipole_moment(transition_frequency, linewidth, dipole_sq.sqrt())
    }

    pub fn with_cross_section(
        transition_frequency: f64,
        linewidth: f64,
        cross_section: f64,
    ) -> Result<Self> {
        check_transition(transition_frequency, linewidth)?;
        ensure(
            cross_section.is_finite() && cross_section >= 0.0,
            "cross_section",
            cross_section,
            "must be finite and non-negative",
        )?;
        let k = transition_frequency / SPEED_OF_LIGHT;
        let dipole_sq = cross_section * VACUUM_PERMITTIVITY * HBAR * linewidth / (2.0 * k);
        Ok(Self {
            transition_frequency,
            linewidth,
            wavelength: TAU * SPEED_OF_LIGHT / transition_frequency,
            cross_section,
            dipole_moment: dipole_sq.sqrt(),
        })
    }

    pub fn with_dipole_moment(
        transition_frequency: f64,
        linewidth: f64,
        dipole_moment: f64,
    ) -> Result<Self> {
        check_transition(transition_frequency, linewidth)?;
        ensure(
            dipole_moment.is_finite() && dipole_moment >= 0.0,
            "dipole_moment",
            dipole_moment,
            "must be finite and non-negative",
        )?;
        let k = transition_frequency / SPEED_OF_LIGHT;
        Ok(Self {
            transition_frequency,
            linewidth,
            wavelength: TAU * SPEED_OF_LIGHT / transition_frequency,
            cross_section: 2.0 * k * dipole_moment * dipole_moment
                / (VACUUM_PERMITTIVITY * HBAR * linewidth),
            dipole_moment,
        })
    }

    /// Rb-85 D2 line with the rounded values used throughout: 780 nm and
    /// `γ = 2π × 6 MHz`.
    pub fn rb85_d2() -> Self {
        Self::radiative(TAU * SPEED_OF_LIGHT / 780e-9, TAU * 6.0e6)
            .expect("tabulated species is valid")
    }

    /// Same dipole moment and linewidth, transition moved to `frequency`
    /// (e.g. light-shifted atoms in the trap).
    pub fn with_transition_frequency(&self, frequency: f64) -> Result<Self> {
        Self::with_dipole_moment(frequency, self.linewidth, self.dipole_moment)
    }

    /// Transition shifted by `shift` rad/s.
    pub fn detuned(&self, shift: f64) -> Result<Self> {
        self.with_transition_frequency(self.transition_frequency + shift)
    }

    pub fn transition_frequency(&self) -> f64 {
        self.transition_frequency
    }

    pub fn linewidth(&self) -> f64 {
        self.linewidth
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn cross_section(&self) -> f64 {
        self.cross_section
    }

    pub fn dipole_moment(&self) -> f64 {
        self.dipole_moment
    }
}

fn check_transition(transition_frequency: f64, linewidth: f64) -> Result<()> {
    ensure(
        transition_frequency.is_finite() && transition_frequency > 0.0,
        "transition_frequency",
        transition_frequency,
        "must be positive",
    )?;
    ensure(
        linewidth.is_finite() && linewidth > 0.0,
        "linewidth",
        linewidth,
        "must be positive",
    )
}

/// Geometry and composition of the two-plane lattice.
///
/// Plane `2ℓ` sits at `ℓa` and holds `species_even`; plane `2ℓ+1` sits at
/// `ℓa + ϱ` and holds `species_odd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    cell_size: f64,
    intracell_distance: f64,
    cell_count: usize,
    areal_density: f64,
    species_even: AtomSpecies,
    species_odd: AtomSpecies,
    mode_area: f64,
}

impl LatticeConfig {
    pub fn new(
        cell_size: f64,
        intracell_distance: f64,
        cell_count: usize,
        areal_density: f64,
        species_even: AtomSpecies,
        species_odd: AtomSpecies,
        mode_area: f64,
    ) -> Result<Self> {
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
            "must satisfy 0 <= rho <= a",
        )?;
        ensure(
            cell_count >= 1,
            "cell_count",
            cell_count as f64,
            "must be at least 1",
        )?;
        ensure(
            areal_density.is_finite() && areal_density > 0.0,
            "areal_density",
            areal_density,
            "must be positive",
        )?;
        ensure(
            mode_area.is_finite() && mode_area > 0.0,
            "mode_area",
            mode_area,
            "must be positive",
        )?;
        Ok(Self {
            cell_size,
            intracell_distance,
            cell_count,
            areal_density,
            species_even,
            species_odd,
            mode_area,
        })
    }

    pub fn with_intracell_distance(&self, rho: f64) -> Result<Self> {
        Self::new(
            self.cell_size,
            rho,
            self.cell_count,
            self.areal_density,
            self.species_even,
            self.species_odd,
            self.mode_area,
        )
    }

    pub fn with_cell_count(&self, cell_count: usize) -> Result<Self> {
        Self::new(
            self.cell_size,
            self.intracell_distance,
            cell_count,
            self.areal_density,
            self.species_even,
            self.species_odd,
            self.mode_area,
        )
    }

    pub fn with_species(&self, even: AtomSpecies, odd: AtomSpecies) -> Result<Self> {
        Self::new(
            self.cell_size,
            self.intracell_distance,
            self.cell_count,
            self.areal_density,
            even,
            odd,
            self.mode_area,
        )
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn intracell_distance(&self) -> f64 {
        self.intracell_distance
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn plane_count(&self) -> usize {
        2 * self.cell_count
    }

    pub fn areal_density(&self) -> f64 {
        self.areal_density
    }

    pub fn species_even(&self) -> &AtomSpecies {
        &self.species_even
    }

    pub fn species_odd(&self) -> &AtomSpecies {
        &self.species_odd
    }

    pub fn mode_area(&self) -> f64 {
        self.mode_area
    }

    /// `G₀ = 2π/a`.
    pub fn reciprocal_vector(&self) -> f64 {
        TAU / self.cell_size
    }

    /// Frequency of the free photon at `|k| = G₀`, where the lowest Bragg
    /// resonance sits.
    pub fn bragg_frequency(&self) -> f64 {
        SPEED_OF_LIGHT * self.reciprocal_vector()
    }

    /// One-dimensional quantization volume `A_eff · M a`.
    pub fn quantization_volume(&self) -> f64 {
        self.mode_area * self.cell_count as f64 * self.cell_size
    }

    /// Plane coordinates, even planes first within each cell.
    pub fn plane_positions(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.plane_count());
        for l in 0..self.cell_count {
            let base = l as f64 * self.cell_size;
            x.push(base);
            x.push(base + self.intracell_distance);
        }
        x
    }
}

/// Transverse area of a Gaussian mode of waist `w`, `πw²/4`.
pub fn mode_area_from_waist(waist: f64) -> f64 {
    PI * waist * waist / 4.0
}

/// Well spacings of the double-well potential `β² cos²(kx/2) + cos²(kx)`.
///
/// Returns `(d1, d2)` with `d1 + d2 = λ`; use them as `(ϱ, a − ϱ)` with `a = λ`.
pub fn beta_to_spacings(beta: f64, wavelength: f64) -> Result<(f64, f64)> {
    let beta_sq = beta * beta;
    if !(0.0..=4.0).contains(&beta_sq) {
        return Err(Error::BetaOutOfRange { beta_sq });
    }
    ensure(
        wavelength.is_finite() && wavelength > 0.0,
        "wavelength",
        wavelength,
        "must be positive",
    )?;
    let d2 = wavelength / PI * (-beta_sq / 4.0).acos();
    Ok((wavelength - d2, d2))
}

/// Classical polarizability per atom in SI units (C·m²/V):
/// `α = (3/4π²) ε₀ λ_p³ (2δ/γ + i) / (1 + 4δ²/γ²)` with `δ = ω_j − ω_p`.
///
/// Divide by `4πε₀` for the Gaussian-unit polarizability entering
/// [`xi_parameter`].
pub fn polarizability(omega_p: f64, species: &AtomSpecies) -> Complex64 {
    let lambda_p = TAU * SPEED_OF_LIGHT / omega_p;
    let scaled = (species.transition_frequency - omega_p) / species.linewidth;
    let prefactor = 3.0 / (4.0 * PI * PI) * VACUUM_PERMITTIVITY * lambda_p.powi(3);
    Complex64::new(2.0 * scaled, 1.0) * (prefactor / (1.0 + 4.0 * scaled * scaled))
}

/// Dimensionless plane strength `ξ = 2π k_p n_s α`, with `α` the Gaussian-unit
/// polarizability `α_SI / 4πε₀`. On resonance `ξ = i n_s ς / 2`.
pub fn xi_parameter(omega_p: f64, species: &AtomSpecies, areal_density: f64) -> ComplexResponse {
    let k_p = omega_p / SPEED_OF_LIGHT;
    let alpha_gaussian = polarizability(omega_p, species) / (4.0 * PI * VACUUM_PERMITTIVITY);
    alpha_gaussian * (TAU * k_p * areal_density)
}

/// Magnitude of the single-atom coupling to a free-space mode of frequency
/// `omega_k` in quantization volume `volume`:
/// `|G| = ω_j D √(1 / (2 V ε₀ ħ ω_k))`. Polarization is taken parallel to the
/// dipole.
pub fn freespace_coupling(species: &AtomSpecies, omega_k: f64, volume: f64) -> f64 {
    species.transition_frequency
        * species.dipole_moment
        * (1.0 / (2.0 * volume * VACUUM_PERMITTIVITY * HBAR * omega_k)).sqrt()
}

/// Atom-cavity coupling `√n̄ · √(ς / 4πA) · √(γ δω)`, with `A = πw²/4` and
/// free spectral range `δω = 2πc/L`. The occupancy factor is included.
pub fn cavity_coupling(species: &AtomSpecies, cavity: &CavityConfig) -> f64 {
    let area = mode_area_from_waist(cavity.waist);
    let fsr = cavity.free_spectral_range();
    cavity.occupancy.sqrt()
        * (species.cross_section / (4.0 * PI * area)).sqrt()
        * (species.linewidth * fsr).sqrt()
}
