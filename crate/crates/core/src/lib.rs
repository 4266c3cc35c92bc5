//! Dense double-precision linear algebra, deterministic counter-based
//! sketch generation, and the communication bound/cost calculators shared by
//! the distributed layers and the benchmark CLI.

pub mod bounds;
pub mod cost;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod rng;

pub use error::{CoreError, Result};
pub use grid::GridSpec;
pub use matrix::DenseMatrix;
