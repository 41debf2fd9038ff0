//! Exact verification and exploitation of the integrable structure of open
//! simple exclusion processes (ASEP, TASEP, SSEP) and a reaction–diffusion model.

pub mod ansatz;
pub mod error;
pub mod markov;
pub mod models;
pub mod transfer;
pub mod verifier;

pub use error::{Error, Result};
pub use models::{BoundaryKind, Convention, LocalOperators, Model, ModelKind, Rates};
