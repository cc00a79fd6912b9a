//! Analysis toolkit for distributed-array MIMO links in free-space
//! line-of-sight space environments.
//!
//! The crate is organised bottom-up:
//!
//! - [`linkmodel`]: physical link parameters, channel gain, input SNR and the
//!   spatial degrees-of-freedom count of the aperture region.
//! - [`geometry`]: seeded uniform-disc antenna placements.
//! - [`channel`]: unit-modulus LOS channel matrices, log-det spectral
//!   efficiency and the random-array capacity bounds.
//! - [`operator`]: disc quadrature and the singular-value spectrum of the
//!   continuous LOS kernel operator.
//! - [`tradeoff`]: spectral efficiency versus energy per bit, Shannon limit,
//!   wide-band slope and the optimal antenna count.
//! - [`montecarlo`]: ergodic capacity estimates over random placements.
//!
//! All quantities are SI and linear scale; conversions from dB happen at the
//! command-line boundary only.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod linkmodel;
pub mod montecarlo;
pub mod numfmt;
pub mod operator;
pub mod tradeoff;

pub use error::{Error, Result};
