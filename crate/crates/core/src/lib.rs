//! Random unitary mixing channels `R(ρ) = (1/N) Σ Uᵢ ρ Uᵢ†` built from Haar unitaries,
//! and tools to certify or refute that such a channel is ε-randomizing, i.e.
//! `‖R(φ) - I/d‖∞ ≤ ε/d` for every state `φ`.
//!
//! The numerical core ([`linalg`], [`haar`], [`channel`], [`netcover`], [`certify`]) is
//! generic over the scalar type ([`Real`], implemented for `f32` and `f64`). The
//! aliases below fix `f64`, which is what the experiment harnesses and file formats use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certify;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod linalg;
pub mod netcover;
pub mod scalar;

pub use error::{Error, Result};
pub use haar::RngStream;
pub use scalar::{Real, Tolerances};

pub type ComplexMatrix = linalg::ComplexMatrix<f64>;
pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
pub type EigenSystem = linalg::EigenSystem<f64>;
pub type UnitaryMatrix = haar::UnitaryMatrix<f64>;
pub type PureState = channel::PureState<f64>;
pub type MixedState = channel::MixedState<f64>;
pub type Channel = channel::RandomUnitaryChannel<f64>;
pub type PureStateNet = netcover::PureStateNet<f64>;
pub type DeviationCertificate = certify::DeviationCertificate<f64>;

pub type ComplexMatrix32 = linalg::ComplexMatrix<f32>;
pub type HermitianMatrix32 = linalg::HermitianMatrix<f32>;
pub type UnitaryMatrix32 = haar::UnitaryMatrix<f32>;
pub type PureState32 = channel::PureState<f32>;
pub type Channel32 = channel::RandomUnitaryChannel<f32>;
pub type PureStateNet32 = netcover::PureStateNet<f32>;
