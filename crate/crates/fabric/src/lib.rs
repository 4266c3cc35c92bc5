//! Rank-based message passing with All-Gather, Reduce-Scatter and
//! All-to-All over arbitrary rank subgroups, two interchangeable backends
//! (free-running threads and a serialized deterministic executor), and a
//! word-exact communication cost meter.

mod comm;
mod error;
mod group;
mod lockstep;
mod meter;
mod runner;
mod threaded;

pub use comm::{Backend, Comm};
pub use error::{FabricError, RankFailure, Result};
pub use group::Group;
pub use meter::{CallRecord, CostReport, RankCost};
pub use runner::{run_spmd, SpmdRun};
