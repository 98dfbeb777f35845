use thiserror::Error;

/// Failures raised by the spectral engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("beta^2 = {beta_sq} lies outside [0, 4]; the double-well spacing is undefined")]
    BetaOutOfRange { beta_sq: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// `1 - i xi = 0`: the plane would amplify without bound.
    #[error("atomic plane response is singular (1 - i*xi = 0)")]
    SingularPlane,

    #[error("Hermitian eigensolver did not converge at q = {q} rad/m")]
    EigenNoConvergence { q: f64 },

    #[error(
        "analytic band edges need equal transition frequencies (got {omega_even} and {omega_odd} rad/s)"
    )]
    UnequalTransitions { omega_even: f64, omega_odd: f64 },

    #[error("closed-form cavity eigenfrequencies need equal detunings and linewidths")]
    OutsideClosedForm,

    #[error("steady-state linear system is singular at probe frequency {omega_p} rad/s")]
    SingularSteadyState { omega_p: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
