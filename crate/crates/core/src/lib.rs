//! Self-adaptive evolutionary optimization of simulated femtosecond pulse shapes.
//!
//! A pool of competing mating operators breeds gene strings that decode to
//! spectral phase/amplitude masks. Masks are scored on closed-form
//! nonlinear-optics landscapes (second-harmonic yield, self-phase-modulated
//! Stokes-band contrast), operator weights adapt through genealogical credit
//! assignment, and elite pulses can be rendered as Wigner or Husimi
//! time-frequency portraits.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod export;
pub mod field;
pub mod operators;
pub mod physics;
pub mod rng;

pub use error::{Error, Result};
