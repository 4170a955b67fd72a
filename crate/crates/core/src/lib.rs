//! Quantified Tauberian decay rates for bounded sequences and operator orbits.
//!
//! * [`rates`]: rate functions `m`, the derived rates `m_log`, `m_k`, their
//!   inverses and the predicted decay bounds.
//! * [`operators`]: finite-dimensional operators, orbit norms `‖Tⁿ(I−T)‖`,
//!   boundary resolvent norms and envelopes.
//! * [`kernels`]: smoothing kernels `y^ε`, convolution and spectral forms of
//!   the smoothed sequence, and the identities behind the decay estimate.
//! * [`analysis`]: hypothesis checks and calibrate-then-validate certification.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32`, `f64`); the
//! aliases below fix `f64`. Exact checks use `num_rational::BigRational`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod kernels;
pub mod operators;
pub mod quad;
pub mod rates;
pub mod scalar;

pub use scalar::Real;

pub type RateFunction = rates::RateFunction<f64>;
pub type DerivedRate = rates::DerivedRate<f64>;
pub type Prediction = rates::Prediction<f64>;
pub type Operator = operators::Operator<f64>;
pub type OrbitSeries = operators::OrbitSeries<f64>;
pub type ResolventProfile = operators::ResolventProfile<f64>;
pub type CMatrix = operators::CMatrix<f64>;
pub type KernelFamily = kernels::KernelFamily<f64>;
pub type Sequence = kernels::Sequence<f64>;
pub type BoundarySampler = kernels::BoundarySampler<f64>;
pub type AnalysisConfig = analysis::AnalysisConfig<f64>;
pub type DecayReport = analysis::DecayReport<f64>;
pub type HypothesisReport = analysis::HypothesisReport<f64>;

pub use kernels::CutoffKind;
pub use operators::OperatorSpec;
pub use rates::{DerivedKind, Regime, Tail};
