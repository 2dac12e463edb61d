//! Coherent resonant tunneling through finite periodic potentials.
//!
//! The unit cell is a stack of constant-potential layers between two
//! zero-potential half-spaces. Its 2x2 transfer matrix gives the band
//! structure of the infinite medium, the transmission resonances of the
//! n-period structure, the tunneling times there and the velocity
//! expectation value of the in-structure wave function.
//!
//! Core types are generic over the scalar ([`Real`]: `f32` or `f64`); the
//! aliases at the crate root fix them to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod bloch;
pub mod chebyshev;
pub mod error;
pub mod potential;
pub mod quadrature;
pub mod resonance;
pub mod roots;
pub mod scalar;
pub mod sweep;
pub mod transfer;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Layer = potential::Layer<f64>;
pub type UnitCell = potential::UnitCell<f64>;
pub type TransferMatrix = transfer::TransferMatrix<f64>;
pub type NPeriodMatrix = transfer::NPeriodMatrix<f64>;
pub type BandWindow = band::BandWindow<f64>;
pub type ResonanceLevel = resonance::ResonanceLevel<f64>;
pub type TimeReport = resonance::TimeReport<f64>;
pub type VelocityReport = resonance::VelocityReport<f64>;
pub type ScatteringState = bloch::ScatteringState<f64>;
pub type BlochDecomposition = bloch::BlochDecomposition<f64>;

pub use sweep::{load_config, run_sweep, run_verify, SweepConfig, SweepRow};

pub type UnitCellF32 = potential::UnitCell<f32>;
pub type TransferMatrixF32 = transfer::TransferMatrix<f32>;
