//! Angular-velocity estimation for a rotating rigid body from two body-frame
//! vector measurements, without rate gyros and without attitude
//! reconstruction.
//!
//! * [`linalg`]: fixed-size vectors and matrices, 9×9 exponential, norm and
//!   eigenvalue routines.
//! * [`rigid_body`]: attitude kinematics and Euler equations (ground truth).
//! * [`sensors`]: vector measurements with sensor mounting and noise.
//! * [`observer`]: the 9-state nonlinear observer and its error variables.
//! * [`gain`]: the closed-form convergence certificate and its numerical checks.
//! * [`harness`]: scenario configuration, simulation runs, sweeps and output.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod gain;
pub mod harness;
pub mod linalg;
pub mod observer;
pub mod rigid_body;
pub mod sensors;

pub use error::{Error, Result};
