//! Rydberg-atom RF receivers: dressed-state Hamiltonians, Autler-Townes
//! metrology, EIT spectra, vapor-cell standing waves and gain patterns.
//!
//! Frequencies are angular (rad/s) throughout; see [`units`] for conversions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod cellfield;
pub mod error;
pub mod hamiltonian;
pub mod metrology;
pub mod patterns;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod guide_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/polarization.md")]
mod guide_polarization {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/hamiltonian.md")]
mod guide_hamiltonian {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/metrology.md")]
mod guide_metrology {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/spectra.md")]
mod guide_spectra {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cellfield.md")]
mod guide_cellfield {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/patterns.md")]
mod guide_patterns {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod guide_cli {}
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
