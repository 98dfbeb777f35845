//! Probe transmission and reflection of a finite lattice with absorption.
//!
//! A plane of strength `ξ` followed by free propagation over `d` has the
//! unimodular transfer matrix
//!
//! ```text
//! [[1 + iξ,  iξ   ],   [[e^{ikd}, 0       ],
//!  [ -iξ,    1 - iξ]] · [0,       e^{-ikd}]]
//! ```
//!
//! and an `n`-cell stack is handled through the Chebyshev identity for powers
//! of a unimodular matrix, so `n = 10⁶` costs the same as `n = 1`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::Mul;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::physics::{xi_parameter, LatticeConfig, SPEED_OF_LIGHT};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Largest power the brute-force product will compute.
pub const DIRECT_POWER_LIMIT: usize = 10_000;

/// 2×2 complex transfer matrix mapping right-side forward/backward amplitudes
/// to left-side ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl ScatterMatrix {
    pub const IDENTITY: Self = Self {
        m11: ONE,
        m12: Complex64 { re: 0.0, im: 0.0 },
        m21: Complex64 { re: 0.0, im: 0.0 },
        m22: ONE,
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    /// Free propagation over `d` at wavenumber `k`.
    pub fn propagation(k: f64, d: f64) -> Self {
        let e = Complex64::from_polar(1.0, k * d);
        Self::new(
            e,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            e.conj(),
        )
    }

    pub fn determinant(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    /// Transmission amplitude `1/M₂₂`.
    pub fn transmission(&self) -> Complex64 {
        self.m22.inv()
    }

    /// Reflection amplitude `M₁₂/M₂₂`.
    pub fn reflection(&self) -> Complex64 {
        self.m12 / self.m22
    }

    /// `selfⁿ` by repeated multiplication. Intended as a reference for the
    /// closed forms; refuses `n > DIRECT_POWER_LIMIT`.
    pub fn power_direct(&self, n: usize) -> Result<Self> {
        ensure(
            n <= DIRECT_POWER_LIMIT,
            "n",
            n as f64,
            "direct matrix powers are limited to 10^4",
        )?;
        let mut acc = Self::IDENTITY;
        for _ in 0..n {
            acc = acc * *self;
        }
        Ok(acc)
    }
}

impl Mul for ScatterMatrix {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Self {
            m11: self.m11 * o.m11 + self.m12 * o.m21,
            m12: self.m11 * o.m12 + self.m12 * o.m22,
            m21: self.m21 * o.m11 + self.m22 * o.m21,
            m22: self.m21 * o.m12 + self.m22 * o.m22,
        }
    }
}

/// Reflection and transmission of a single plane: `r = iξ/(1 − iξ)`,
/// `t = 1/(1 − iξ)`.
pub fn plane_coefficients(xi: Complex64) -> Result<(Complex64, Complex64)> {
    let den = ONE - I * xi;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPlane);
    }
    Ok((I * xi / den, den.inv()))
}

/// Plane of strength `xi` followed by propagation over `d`.
pub fn period_matrix(xi: Complex64, d: f64, k: f64) -> Result<ScatterMatrix> {
    plane_coefficients(xi)?;
    let plane = ScatterMatrix::new(ONE + I * xi, I * xi, -I * xi, ONE - I * xi);
    Ok(plane * ScatterMatrix::propagation(k, d))
}

/// One lattice cell at a fixed probe frequency: planes `ξ₁` at 0 and `ξ₂` at
/// `ϱ`, period `a`, probe wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimer {
    pub xi_even: Complex64,
    pub xi_odd: Complex64,
    pub wavenumber: f64,
    pub intracell_distance: f64,
    pub cell_size: f64,
}

impl Dimer {
    pub fn new(
        xi_even: Complex64,
        xi_odd: Complex64,
        wavenumber: f64,
        intracell_distance: f64,
        cell_size: f64,
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
            "must lie in [0, cell_size]",
        )?;
        ensure(
            wavenumber.is_finite(),
            "wavenumber",
            wavenumber,
            "must be finite",
        )?;
        for xi in [xi_even, xi_odd] {
            ensure(
                xi.re.is_finite() && xi.im.is_finite(),
                "xi",
                xi.norm(),
                "must be finite",
            )?;
            plane_coefficients(xi)?;
        }
        Ok(Self {
            xi_even,
            xi_odd,
            wavenumber,
            intracell_distance,
            cell_size,
        })
    }

    /// The lattice cell seen by a probe at `omega_p`.
    pub fn from_lattice(cfg: &LatticeConfig, omega_p: f64) -> Result<Self> {
        ensure(
            omega_p.is_finite() && omega_p > 0.0,
            "omega_p",
            omega_p,
            "must be positive",
        )?;
        let n_s = cfg.areal_density();
        Self::new(
            xi_parameter(omega_p, cfg.species_even(), n_s),
            xi_parameter(omega_p, cfg.species_odd(), n_s),
            omega_p / SPEED_OF_LIGHT,
            cfg.intracell_distance(),
            cfg.cell_size(),
        )
    }

    /// `M_{d₁} · M_{d₂}` with `d₁ = ϱ`, `d₂ = a − ϱ`.
    pub fn matrix(&self) -> ScatterMatrix {
        let k = self.wavenumber;
        let first = ScatterMatrix::new(
            ONE + I * self.xi_even,
            I * self.xi_even,
            -I * self.xi_even,
            ONE - I * self.xi_even,
        );
        let second = ScatterMatrix::new(
            ONE + I * self.xi_odd,
            I * self.xi_odd,
            -I * self.xi_odd,
            ONE - I * self.xi_odd,
        );
        first
            * ScatterMatrix::propagation(k, self.intracell_distance)
            * second
            * ScatterMatrix::propagation(k, self.cell_size - self.intracell_distance)
    }

    /// `cos Θ = ξ₁ξ₂ cos k(2ϱ − a) + (1 − ξ₁ξ₂) cos ka − (ξ₁ + ξ₂) sin ka`,
    /// i.e. half the trace of [`Dimer::matrix`].
    pub fn cos_theta(&self) -> Complex64 {
        self.half_trace().value()
    }

    fn half_trace(&self) -> HalfTrace {
        let p = self.xi_even * self.xi_odd;
        let s = self.xi_even + self.xi_odd;
        let ka = reduce_phase(self.wavenumber * self.cell_size);
        let psi = reduce_phase(self.wavenumber * (2.0 * self.intracell_distance - self.cell_size));
        let (sin_ka, sin_half_ka, cos_half_ka) = (ka.sin(), (ka / 2.0).sin(), (ka / 2.0).cos());
        let (sin_half_psi, cos_half_psi) = ((psi / 2.0).sin(), (psi / 2.0).cos());
        let one_minus = (ONE - p) * (2.0 * sin_half_ka * sin_half_ka)
            + p * (2.0 * sin_half_psi * sin_half_psi)
            + s * sin_ka;
        let one_plus = (ONE - p) * (2.0 * cos_half_ka * cos_half_ka)
            + p * (2.0 * cos_half_psi * cos_half_psi)
            - s * sin_ka;
        HalfTrace {
            one_minus,
            one_plus,
        }
    }
}

/// `1 − x` and `1 + x` for a half trace `x`, each formed without cancellation.
#[derive(Debug, Clone, Copy)]
struct HalfTrace {
    one_minus: Complex64,
    one_plus: Complex64,
}

impl HalfTrace {
    fn value(&self) -> Complex64 {
        (self.one_plus - self.one_minus) / 2.0
    }

    /// Bloch phase folded to the branch nearest zero.
    ///
    /// Returns `(Θ', s)` with `cos Θ = s cos Θ'`, `Re Θ' ∈ [0, π/2]` and
    /// `Im Θ' ≥ 0`.
    fn reduced_phase(&self) -> (Complex64, f64) {
        let x = self.value();
        let (w, sign) = if x.re >= 0.0 {
            (self.one_minus, 1.0)
        } else {
            (self.one_plus, -1.0)
        };
        let mut theta = (w / 2.0).sqrt().asin() * 2.0;
        if theta.im < 0.0 {
            theta = -theta;
        }
        (theta, sign)
    }
}

/// Maps a phase to `(−π, π]` by whole turns.
fn reduce_phase(phase: f64) -> f64 {
    phase - TAU * (phase / TAU).round()
}

fn full_phase(theta_prime: Complex64, sign: f64) -> Complex64 {
    let theta = if sign > 0.0 {
        theta_prime
    } else {
        Complex64::new(PI, 0.0) - theta_prime
    };
    if theta.im < 0.0 {
        -theta
    } else {
        theta
    }
}

fn single_slice_phase(xi: Complex64, k: f64, d: f64) -> Complex64 {
    let kd = reduce_phase(k * d);
    let (s, c) = ((kd / 2.0).sin(), (kd / 2.0).cos());
    let h = HalfTrace {
        one_minus: Complex64::new(2.0 * s * s, 0.0) + xi * kd.sin(),
        one_plus: Complex64::new(2.0 * c * c, 0.0) - xi * kd.sin(),
    };
    let (theta, sign) = h.reduced_phase();
    full_phase(theta, sign)
}

/// Complex Bloch phase of the cell and of its two slices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellDephasing {
    /// `Θ` with `Im Θ ≥ 0`, so that `e^{inΘ}` decays.
    pub theta: Complex64,
    /// Slice `ξ₁` + propagation over `ϱ`.
    pub theta_even: Complex64,
    /// Slice `ξ₂` + propagation over `a − ϱ`.
    pub theta_odd: Complex64,
    /// `cos Θ` from the closed-form bracket.
    pub cos_theta: Complex64,
}

pub fn dimer_dephasing(dimer: &Dimer) -> CellDephasing {
    let h = dimer.half_trace();
    let (theta, sign) = h.reduced_phase();
    let k = dimer.wavenumber;
    CellDephasing {
        theta: full_phase(theta, sign),
        theta_even: single_slice_phase(dimer.xi_even, k, dimer.intracell_distance),
        theta_odd: single_slice_phase(dimer.xi_odd, k, dimer.cell_size - dimer.intracell_distance),
        cos_theta: h.value(),
    }
}

pub fn dimer_matrix(cfg: &LatticeConfig, omega_p: f64) -> Result<ScatterMatrix> {
    Ok(Dimer::from_lattice(cfg, omega_p)?.matrix())
}

pub fn cell_dephasing(cfg: &LatticeConfig, omega_p: f64) -> Result<CellDephasing> {
    Ok(dimer_dephasing(&Dimer::from_lattice(cfg, omega_p)?))
}

/// Transmission and reflection of an `n`-cell stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackResponse {
    pub transmission: Complex64,
    pub reflection: Complex64,
    pub theta: Complex64,
}

impl StackResponse {
    pub fn transmittance(&self) -> f64 {
        self.transmission.norm_sqr()
    }

    pub fn reflectance(&self) -> f64 {
        self.reflection.norm_sqr()
    }
}

/// Closed-form response of `n` identical cells.
///
/// With `x = cos Θ` and `B = (M₂₂ − M₁₁)/2`,
/// `t_n = 1/(cos nΘ + B sin nΘ/sin Θ)` and `r_n = M₁₂ (sin nΘ/sin Θ) t_n`.
/// Deep in a gap the trigonometric functions overflow; there numerator and
/// denominator are rescaled by `e^{inΘ}`.
pub fn stack_response(dimer: &Dimer, n: usize) -> Result<StackResponse> {
    ensure(n >= 1, "n", n as f64, "at least one cell is required")?;
    let m = dimer.matrix();
    let h = dimer.half_trace();
    let (theta_p, sign) = h.reduced_phase();
    let b = (m.m22 - m.m11) / 2.0;
    let nf = n as f64;
    let parity = if sign < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };

    let (transmission, reflection) = if nf * theta_p.im <= 1.0 {
        let sin_t = theta_p.sin();
        let ratio = if sin_t == Complex64::new(0.0, 0.0) {
            Complex64::new(nf, 0.0)
        } else {
            (theta_p * nf).sin() / sin_t
        };
        let den = (theta_p * nf).cos() + b * ratio * sign;
        (
            Complex64::new(parity, 0.0) / den,
            m.m12 * ratio * sign / den,
        )
    } else {
        let z = (I * theta_p * nf).exp();
        let z2m1 = z * z - ONE;
        let shape = z2m1 / (I * theta_p.sin());
        let den = (z * z + ONE) + b * shape * sign;
        (z * (2.0 * parity) / den, m.m12 * shape * sign / den)
    };

    Ok(StackResponse {
        transmission,
        reflection,
        theta: full_phase(theta_p, sign),
    })
}

/// `t_n` for the lattice's own cell at probe `omega_p`.
pub fn transmission_closed_form(cfg: &LatticeConfig, omega_p: f64, n: usize) -> Result<Complex64> {
    Ok(stack_response(&Dimer::from_lattice(cfg, omega_p)?, n)?.transmission)
}

/// Large-`n` limit of the transmission, `2e^{inΘ} sin Θ/(sin Θ + iB)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTransmission {
    pub value: Complex64,
    /// `Im Θ > |Re Θ|`, the regime where the limit is meant to be used.
    pub valid: bool,
}

pub fn dimer_asymptotic(dimer: &Dimer, n: usize) -> AsymptoticTransmission {
    let m = dimer.matrix();
    let b = (m.m22 - m.m11) / 2.0;
    let theta = dimer_dephasing(dimer).theta;
    let sin_t = theta.sin();
    AsymptoticTransmission {
        value: (I * theta * n as f64).exp() * 2.0 * sin_t / (sin_t + I * b),
        valid: theta.im > theta.re.abs(),
    }
}

pub fn transmission_asymptotic(
    cfg: &LatticeConfig,
    omega_p: f64,
    n: usize,
) -> Result<AsymptoticTransmission> {
    let dimer = Dimer::from_lattice(cfg, omega_p)?;
    let out = dimer_asymptotic(&dimer, n);
    if !out.valid {
        log::debug!("asymptotic transmission used outside Im Θ > |Re Θ| at {omega_p} rad/s");
    }
    Ok(out)
}

/// One row of a probe spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega_p: f64,
    /// `(ω_p − ω_ref)/γ₁`.
    pub detuning: f64,
    pub transmittance: f64,
    pub reflectance: f64,
    pub absorbance: f64,
}

/// Spectrum point of the full `M`-cell lattice.
pub fn spectrum_point(cfg: &LatticeConfig, omega_p: f64, reference: f64) -> Result<SpectrumPoint> {
    let resp = stack_response(&Dimer::from_lattice(cfg, omega_p)?, cfg.cell_count())?;
    let t = resp.transmittance();
    let r = resp.reflectance();
    Ok(SpectrumPoint {
        omega_p,
        detuning: (omega_p - reference) / cfg.species_even().linewidth(),
        transmittance: t,
        reflectance: r,
        absorbance: 1.0 - t - r,
    })
}

/// Spectrum over `probe_grid`, in grid order. Detunings are reported relative
/// to `reference`.
pub fn spectrum_scan(
    cfg: &LatticeConfig,
    probe_grid: &[f64],
    reference: f64,
) -> Result<Vec<SpectrumPoint>> {
    ensure(
        !probe_grid.is_empty(),
        "probe_grid",
        0.0,
        "at least one probe frequency is required",
    )?;
    probe_grid
        .iter()
        .map(|&w| spectrum_point(cfg, w, reference))
        .collect()
}
