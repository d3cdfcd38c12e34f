//! Simulation and asymptotics of a three-period, two-state discrete-time
//! quantum walk on the integer line.
//!
//! The walk alternates a coin on the internal spin with a spin-conditioned
//! shift (spin 0 moves left, spin 1 moves right). In the canonical model the
//! coin sequence is `[C, C, I]`: two rotation-coin steps followed by a bare
//! shift. The crate provides
//!
//! - [`walk`]: exact state-vector evolution under any finite-period protocol,
//! - [`limit`]: the closed-form long-time density of `X_{3t} / 3t`, the
//!   quasi-momentum eigen system it comes from, and k-space quadratures,
//! - [`analysis`]: distances between a finite-time distribution and the
//!   limit law.
//!
//! Without the default `std` feature the crate is `no_std` and only needs
//! `alloc`; float math then goes through `libm`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
mod error;
pub mod limit;
pub mod quad;
pub mod walk;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Complex;
