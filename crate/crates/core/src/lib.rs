//! Persistent Betti number estimation via block-encoded persistent Laplacians.

pub mod blockenc;
pub mod complex;
pub mod error;
pub mod homology;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod qsvt;

pub use error::{Error, ErrorCategory, Result};
