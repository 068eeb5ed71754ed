//! Quantum gates from controlled non-adiabatic transitions.
//!
//! A two-state Hamiltonian `H(s) = f(s) H0 + g(s) H_W` is driven along a
//! straight-line "collision" `s(z) = sqrt(z^2 + b^2)` at speed `v`. The
//! passage through the avoided crossing mixes the two adiabatic states, and
//! tuning `(v, b)` turns the resulting evolution operator into a logic gate.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod error;
pub mod gatemodel;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod ode;
pub mod propagator;
pub mod scalar;
pub mod simplex;
pub mod synthesis;
pub mod trajectory;

pub use error::{Error, Result};
pub use gatemodel::{
    error_scaling, fit_zn_form, gate_error, transition_probability, zn_unitary, Axis, GateErrorReport,
    PerturbationCoefficients, ScalingFit, ScalingLaw, ScalingReference, ZhuNakamuraForm,
};
pub use linalg::CMatrix;
pub use model::{AdiabaticFrame, ModelSpec};
pub use propagator::{
    full_evolution_operator, half_passage_p, propagate, EvolutionOperator, IntegratorSettings, Method,
    PropagationResult,
};
pub use scalar::Real;
pub use synthesis::{
    compose, embed, embedded_dynamics, recipe, synthesize, target_unitary, EmbeddedGate, GateName, GateRecipe,
    GateTarget, PairHamiltonian, SearchWindow, SynthesisResult,
};
pub use trajectory::{adiabaticity, eta, AdiabaticityReport, Trajectory};

pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;
pub type Matrix = CMatrix<f64>;
pub type Model = ModelSpec<f64>;
pub type Frame = AdiabaticFrame<f64>;
pub type Passage = Trajectory<f64>;
pub type Settings = IntegratorSettings<f64>;
pub type Evolution = EvolutionOperator<f64>;
pub type Adiabaticity = AdiabaticityReport<f64>;
pub type ZnForm = ZhuNakamuraForm<f64>;
pub type GateError = GateErrorReport<f64>;
pub type Scaling = ScalingFit<f64>;
pub type Synthesis = SynthesisResult<f64>;
pub type Target = GateTarget<f64>;
