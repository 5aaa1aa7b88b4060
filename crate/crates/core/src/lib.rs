//! Quantum-mirror optics for ghost imaging.
//!
//! A pumped thin nonlinear crystal turns signal photons into idler photons
//! under energy and momentum conservation, so it images like a mirror whose
//! "reflection" law depends on the pump wavefront and the frequency ratio.
//! This crate provides:
//!
//! - [`kinematics`]: frequency and wavevector bookkeeping, phase mismatch and
//!   the frequency-scaled reflection law.
//! - [`dfg`]: difference-frequency power for focused Gaussian beams (with the
//!   focusing-function double integral) and in the plane-wave limit.
//! - [`ray`]: a paraxial meridional ray tracer with a quantum-mirror element,
//!   the imaging laws it obeys and a best-focus search.
//! - [`wave`]: a 1-D angular-spectrum wave engine with a thin conversion
//!   plane, fringe analysis and a stimulated-emission visibility model.
//! - [`cli`]: scenario files, canned reproductions and CSV/PGM output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dfg;
pub mod error;
pub mod kinematics;
pub mod ray;
pub mod rng;
pub mod scene;
pub mod wave;

pub use error::{Error, Result};
