//! Photon-pair generation in silicon microring devices.
//!
//! Single rings, conventional waveguides and coupled-resonator optical
//! waveguides (CROWs) are described by one [`model::DeviceSpec`]. From it the
//! crate computes pair flux with the slow-light design equations
//! ([`pair_flux`]), the coupled-mode joint spectral amplitude ([`cmt`]), and
//! the Schmidt number of the heralded state ([`spectral`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cmt;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pair_flux;
pub mod quad;
pub mod single_ring;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
