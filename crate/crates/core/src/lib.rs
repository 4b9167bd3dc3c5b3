//! Random geometric complexes and the persistence of their homology.
//!
//! The crate samples point clouds on the unit cube (with either Euclidean or
//! flat-torus distance), builds radius-capped Čech and Vietoris–Rips
//! filtrations over them, computes persistent homology over Z/2, and reduces
//! the resulting diagrams to maximal multiplicative persistence statistics.
//!
//! Everything here is deterministic: the same seeds produce bit-identical
//! clouds, complexes, and diagrams. The crate is `no_std`-compatible (enable
//! the `libm` feature and disable `std`); allocation is required.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("geopers-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod filtration;
pub mod geometry;
mod math;
pub mod persistence;
pub mod sampling;
pub mod statistics;

use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
///
/// Invalid input covers malformed arguments (dimension mismatches, empty
/// inputs, out-of-range parameters). Unsupported configuration covers inputs
/// that are well formed but outside the domain an operation can handle, such
/// as flat-torus point sets too spread out for a unique enclosing ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    InvalidInput(String),
    UnsupportedConfiguration(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::UnsupportedConfiguration(msg) => {
                write!(f, "unsupported configuration: {msg}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::UnsupportedConfiguration(msg.into())
}
