pub mod catalog;
pub mod config;
pub mod constructor;
mod error;
pub mod geometry;
pub mod hypersurface;
pub mod io;
pub mod run;
pub mod verifier;

pub use config::Tolerances;
pub use error::{GeomError, Result};
