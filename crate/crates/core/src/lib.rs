#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]
//! Tight-binding spectra and level statistics of honeycomb sector billiards.

extern crate alloc;

pub mod error;
pub mod lattice;
pub mod lengthspec;
pub mod qbilliard;
pub mod rmtstats;
pub mod hamiltonian;
pub mod spectra;
pub mod unfold;
mod math;

pub use error::{Error, Result};
