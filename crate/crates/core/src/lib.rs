//! Numerical verification toolkit for immersed surfaces with finite
//! Willmore energy.

pub mod error;
pub mod flatness;
pub mod geom;
pub mod inversion;
pub mod jet;
pub mod measure;
pub mod topology;

pub use error::{Error, Result};
