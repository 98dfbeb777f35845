#![allow(dead_code)]

use bilattice_core::physics::{mode_area_from_waist, AtomSpecies, LatticeConfig};

pub const AREAL_DENSITY: f64 = 5.7e10;

pub fn rb() -> AtomSpecies {
    AtomSpecies::rb85_d2()
}

pub fn gamma() -> f64 {
    rb().linewidth()
}

/// Lattice laser frequency `ω₀`; the cell is one lattice wavelength.
pub fn omega_0() -> f64 {
    rb().transition_frequency()
}

/// Both species detuned from `ω₀` by the given multiples of `γ`, 5 µm mode
/// waist, areal density 5.7e-2 µm⁻².
pub fn lattice(rho_frac: f64, det_even: f64, det_odd: f64, cells: usize) -> LatticeConfig {
    let base = rb();
    let g = base.linewidth();
    let a = base.wavelength();
    LatticeConfig::new(
        a,
        rho_frac * a,
        cells,
        AREAL_DENSITY,
        base.detuned(det_even * g).unwrap(),
        base.detuned(det_odd * g).unwrap(),
        mode_area_from_waist(5e-6),
    )
    .unwrap()
}
