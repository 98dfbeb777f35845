//! Photonic spectra of one-dimensional bichromatic atomic lattices.
//!
//! Two atomic planes per cell of size `a`, separated by `ϱ`, interact with
//! light along the lattice axis. Three engines share the same physical
//! description:
//!
//! * [`bands`]: polariton band structure from the Bloch coupled-mode
//!   eigenproblem, photonic gaps and their closed-form edges;
//! * [`tmm`]: transmission and reflection of a finite lattice with
//!   absorption, via transfer matrices and their Chebyshev closed form;
//! * [`cavity`]: linear steady state of the lattice inside a driven
//!   resonator.
//!
//! The crate is `no_std` with `alloc`; enable `std` to use the standard
//! library math backend.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod bands;
pub mod cavity;
pub mod error;
pub mod physics;
pub mod tmm;

pub use bands::{
    analytic_band_edges, build_bloch_matrix, compute_bands, find_gaps, gap_widths_vs_rho,
    AnalyticEdges, BandStructure, BlochMatrix, Gap, GapOptions,
};
pub use cavity::{collective_r, CavityConfig, CavitySystem, SteadyState};
pub use error::{Error, Result};
pub use physics::{
    beta_to_spacings, cavity_coupling, freespace_coupling, polarizability, xi_parameter,
    AtomSpecies, ComplexResponse, LatticeConfig,
};
pub use tmm::{
    cell_dephasing, dimer_matrix, period_matrix, plane_coefficients, spectrum_scan,
    transmission_asymptotic, transmission_closed_form, ScatterMatrix, SpectrumPoint,
};
