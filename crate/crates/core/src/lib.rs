//! Qudit-register option pricing toolkit.
//!
//! This crate prices a European call option by simulating, exactly, the
//! quantum pipeline that a register of qudits would run:
//!
//! 1. [`market`] — geometric Brownian motion, the log-normal terminal
//!    density, and classical analytic / Monte Carlo payoff baselines.
//! 2. [`grid`] — truncation and discretisation of the asset-price domain
//!    onto the `d^n` basis states of the register.
//! 3. [`engine`] — a dense statevector simulator over subsystems of
//!    arbitrary dimension (asset qudits plus carry, comparator and payoff
//!    qubits), with value-controlled gates and full-space operators.
//! 4. [`circuits`] — the pricing subroutines: a Householder probability
//!    loader, a base-`d` ripple-carry comparator (two ancilla budgets),
//!    and the controlled-rotation payoff encoder, composed into the
//!    pricing oracle.
//! 5. [`mlae`] — the Grover operator built from the oracle, a geometric
//!    measurement schedule, and maximum-likelihood amplitude estimation.
//!
//! All numeric code is generic over the scalar type through [`num::Real`];
//! `f64` is the working precision and carries type aliases at the crate
//! root ([`AssetGrid64`], [`StateVector64`], ...). `f32` builds and runs
//! but validates unitarity at correspondingly looser tolerances.

pub mod circuits;
pub mod engine;
pub mod error;
pub mod grid;
pub mod market;
pub mod math;
pub mod mlae;
pub mod num;
pub mod rng;

pub use error::{Error, Result};
pub use num::Real;
pub use rng::{derive_stream, SimRng};

/// Complex amplitude at working precision.
pub type Amplitude64 = num_complex::Complex<f64>;
/// Market model parameters at working precision.
pub type GbmParams64 = market::GbmParams<f64>;
/// Sampled price path at working precision.
pub type PricePath64 = market::PricePath<f64>;
/// Discretised asset grid at working precision.
pub type AssetGrid64 = grid::AssetGrid<f64>;
/// Statevector at working precision.
pub type StateVector64 = engine::StateVector<f64>;
/// Dense full-space operator at working precision.
pub type MatrixOp64 = engine::MatrixOp<f64>;
/// Value-controlled gate at working precision.
pub type ControlledGate64 = engine::ControlledGate<f64>;
/// Payoff encoding parameters at working precision.
pub type PayoffEncoding64 = circuits::PayoffEncoding<f64>;
/// Estimation result at working precision.
pub type MleResult64 = mlae::MleResult<f64>;
