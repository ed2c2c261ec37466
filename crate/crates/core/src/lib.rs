//! Holonomy algebras of Lorentz-Kähler metrics.

pub mod config;
pub mod conventions;
pub mod error;
pub mod jets;

pub use config::Tolerances;
pub use error::{Error, JetError, Result};
pub use jets::{C64, Jet, JetMatrix, Var};
pub mod hermitian;
pub mod linalg;
pub mod serial;
pub mod lie;
pub mod classify;
pub mod curvspace;
pub mod geometry;
pub mod potentials;
pub mod symspace;
