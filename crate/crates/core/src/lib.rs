//! Left and right dilations of product systems, computed exactly on dense
//! domains of exponential vectors and finite-dimensional tensors.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod grid;
pub mod numeric;
pub mod product;
pub mod semigroup;
pub mod step;

pub use error::{DilationError, Result};
pub use grid::{Grid, GridRational};
pub use numeric::C64;
