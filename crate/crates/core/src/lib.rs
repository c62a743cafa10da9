//! Two-phase Mullins–Sekerka / Stokes interface solvers on planar star-shaped geometry.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bc;
pub mod bie;
pub mod error;
pub mod evolution;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod ms_operator;
mod nearfield;
pub mod oracle;
mod radial_fem;
pub mod sobolev;
pub mod twophase_elliptic;
pub mod twophase_stokes;
pub mod verify;

pub use bc::{BoundaryConfig, MuOuter, VelocityOuter};
pub use error::{Error, Result};
pub use field::{PeriodicField, VectorField, C64};
pub use geometry::{InterfaceGeometry, Phase};
pub use sobolev::Trajectory;
pub use twophase_elliptic::{Backend, TwoPhaseScalarField};
pub use twophase_stokes::{StokesData, TwoPhaseFlowField};
