//! Train-track calculus on punctured surfaces.
//!
//! Tracks are finite ribbon graphs ([`track_core`]); the elementary moves
//! live in [`moves`]; [`carrying`] models one track sitting inside another;
//! [`flat_cone`] enumerates the cubical cones cut out by a lamination proxy;
//! [`orbit`] computes the colored-graph invariant; [`generators`] builds
//! benchmark inputs.

pub mod error;
pub mod track_core;

pub use error::{Result, TtError};
pub mod carrying;
pub mod moves;
pub mod generators;
pub mod flat_cone;
pub mod orbit;
pub mod ambient;
