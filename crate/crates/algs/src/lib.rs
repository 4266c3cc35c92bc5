//! Distributed sketch multiply and the two-multiply low-rank pipeline over
//! the message-passing fabric, plus the serial reference pipeline used to
//! verify them.

mod dist;
mod error;
mod nystrom;
mod randmatmul;
mod serial;

pub use dist::{gather_matrix, scatter_matrix, BlockRole, DistMatrix};
pub use error::{AlgError, Result};
pub use nystrom::{nystrom, nystrom_instrumented, redistribute, NystromOptions, NystromPhases};
pub use randmatmul::{rand_matmul, rand_matmul_instrumented, SketchPhases};
pub use serial::{serial_nystrom, serial_rand_matmul};
