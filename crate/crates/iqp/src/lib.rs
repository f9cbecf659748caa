//! Commuting X-rotation programs over GF(2) and what can be done with them:
//! exact output distributions, the quadratic-residue challenge protocol and
//! its classical attack, stabilizer machinery for the Clifford corner cases,
//! and control-bit phase estimation with a ternary zoom decoder.
//!
//! The crate is `no_std`-compatible (allocation required). Builds without
//! `std` must enable the `libm` feature to supply float math.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("builds without `std` must enable the `libm` feature");

pub mod attack;
pub mod codes;
pub mod eigest;
pub mod f2la;
pub mod protocol;
pub mod stab;
pub mod xprog;

mod fmath;
mod rng;

pub use num_complex::Complex64;
