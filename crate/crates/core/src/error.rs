use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("impact parameter b = {b} leaves a zero-length trajectory")]
    DegenerateTrajectory { b: f64 },
    #[error("initial amplitudes not normalized: |a|^2 = {norm}")]
    NotNormalized { norm: f64 },
    #[error("integrator exhausted {steps} steps at z = {z} (norm drift so far {norm_drift:e})")]
    StepLimit { steps: usize, z: f64, norm_drift: f64 },
    #[error("integrator step size underflow at z = {z}")]
    StepUnderflow { z: f64 },
    #[error("norm drift {norm_drift:e} exceeds bound {bound:e}")]
    Accuracy { norm_drift: f64, bound: f64 },
    #[error("quadrature failed to converge (achieved tolerance {achieved:e})")]
    Quadrature { achieved: f64 },
    #[error("matrix dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("invalid embedding: {0}")]
    Embedding(String),
    #[error("power-law fit rejected: R^2 = {r_squared:.6} ({points} points)")]
    ScalingFit { r_squared: f64, points: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid search settings: {0}")]
    Search(String),
}

impl Error {
    /// `true` for failures of the numerics (integration, quadrature, fits,
    /// searches), as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepLimit { .. }
                | Error::StepUnderflow { .. }
                | Error::Accuracy { .. }
                | Error::Quadrature { .. }
                | Error::NotUnitary { .. }
                | Error::ScalingFit { .. }
                | Error::Search(_)
        )
    }
}
