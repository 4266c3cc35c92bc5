//! The per-rank communicator handed to SPMD programs.

use std::sync::Arc;

use crate::error::{FabricError, Result};
use crate::group::Group;
use crate::lockstep::{Kind, LockstepEngine, Payload};
use crate::meter::Meter;
use crate::threaded::ThreadedLinks;

/// Which engine runs the collectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// One free-running worker thread per rank with real message passing.
    Threaded,
    /// Serialized round-based execution with deadlock detection.
    Lockstep,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "threaded" => Ok(Backend::Threaded),
            "lockstep" | "lockstep-sim" => Ok(Backend::Lockstep),
            other => Err(format!("unknown backend `{other}` (expected threaded or lockstep)")),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Threaded => write!(f, "threaded"),
            Backend::Lockstep => write!(f, "lockstep"),
        }
    }
}

pub(crate) enum Engine {
    Threaded(ThreadedLinks),
    Lockstep(Arc<LockstepEngine>),
}

fn ceil_log2(q: usize) -> u64 {
    if q <= 1 {
        0
    } else {
        (usize::BITS - (q - 1).leading_zeros()) as u64
    }
}

/// One rank's handle onto the fabric. All cross-rank effects of an SPMD
/// program flow through these collectives.
pub struct Comm {
    rank: usize,
    world: usize,
    backend: Backend,
    pub(crate) engine: Engine,
    pub(crate) meter: Arc<Meter>,
}

impl Comm {
    pub(crate) fn new(
        rank: usize,
        world: usize,
        backend: Backend,
        engine: Engine,
        meter: Arc<Meter>,
    ) -> Comm {
        Comm {
            rank,
            world,
            backend,
            engine,
            meter,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn world_size(&self) -> usize {
        self.world
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Stops charging the meter for this rank until `resume_meter`; used by
    /// verification-only traffic that must not show up in cost reports.
    pub fn pause_meter(&self) {
        self.meter.set_paused(self.rank, true);
    }

    pub fn resume_meter(&self) {
        self.meter.set_paused(self.rank, false);
    }

    fn position_in(&self, site: &'static str, group: &Group) -> Result<usize> {
        if let Some(&bad) = group.members().iter().find(|&&m| m >= self.world) {
            return Err(FabricError::InvalidGroup {
                reason: format!("member {bad} outside world of {}", self.world),
            });
        }
        group
            .position_of(self.rank)
            .ok_or(FabricError::CallerNotInGroup {
                site,
                rank: self.rank,
            })
    }

    /// Every member contributes an equal-size block; all members receive the
    /// concatenation in group order. Charges `(1 - 1/Q) W` model words where
    /// `W` is the concatenated size.
    pub fn all_gather(&mut self, site: &'static str, local: &[f64], group: &Group) -> Result<Vec<f64>> {
        let pos = self.position_in(site, group)?;
        let q = group.len();
        if q == 1 {
            return Ok(local.to_vec());
        }
        let result = match &mut self.engine {
            Engine::Threaded(links) => links.all_gather(site, local, group.members(), pos)?,
            Engine::Lockstep(engine) => {
                match engine.post(
                    self.rank,
                    site,
                    Kind::AllGather,
                    group.members(),
                    Payload::Buffer(local.to_vec()),
                )? {
                    Payload::Buffer(b) => b,
                    Payload::Chunks(_) => unreachable!(),
                }
            }
        };
        let moved = ((q - 1) * local.len()) as u64;
        self.meter.charge(
            self.rank,
            site,
            "all_gather",
            q,
            moved,
            moved,
            (q - 1) as u64,
            moved,
            ceil_log2(q),
        );
        Ok(result)
    }

    /// Every member contributes an equal full buffer whose length divides by
    /// the group size; member `q` receives the element-wise sum of all
    /// members' `q`-th contiguous segment. Summation runs in ascending group
    /// order on every backend.
    pub fn reduce_scatter(
        &mut self,
        site: &'static str,
        local: &[f64],
        group: &Group,
    ) -> Result<Vec<f64>> {
        let pos = self.position_in(site, group)?;
        let q = group.len();
        if !local.len().is_multiple_of(q) {
            return Err(FabricError::NonDivisibleBuffer {
                site,
                len: local.len(),
                group: q,
            });
        }
        if q == 1 {
            return Ok(local.to_vec());
        }
        let result = match &mut self.engine {
            Engine::Threaded(links) => links.reduce_scatter(site, local, group.members(), pos)?,
            Engine::Lockstep(engine) => {
                match engine.post(
                    self.rank,
                    site,
                    Kind::ReduceScatter,
                    group.members(),
                    Payload::Buffer(local.to_vec()),
                )? {
                    Payload::Buffer(b) => b,
                    Payload::Chunks(_) => unreachable!(),
                }
            }
        };
        let moved = (local.len() - local.len() / q) as u64;
        self.meter.charge(
            self.rank,
            site,
            "reduce_scatter",
            q,
            moved,
            moved,
            (q - 1) as u64,
            moved,
            ceil_log2(q),
        );
        Ok(result)
    }

    /// Member `s` supplies one chunk per member (chunk sizes may differ);
    /// member `t` receives chunk `t` from every member, in group order.
    /// Charges model bandwidth `W` = the caller's total chunk words, and
    /// model latency `Q - 1`; the measured counters record only the words
    /// that actually leave or enter the rank (the self chunk never moves).
    pub fn all_to_all(
        &mut self,
        site: &'static str,
        chunks: Vec<Vec<f64>>,
        group: &Group,
    ) -> Result<Vec<Vec<f64>>> {
        let pos = self.position_in(site, group)?;
        let q = group.len();
        if chunks.len() != q {
            return Err(FabricError::ChunkCount {
                site,
                got: chunks.len(),
                expected: q,
            });
        }
        if q == 1 {
            return Ok(chunks);
        }
        let total: usize = chunks.iter().map(Vec::len).sum();
        let own = chunks[pos].len();
        let result = match &mut self.engine {
            Engine::Threaded(links) => links.all_to_all(site, chunks, group.members(), pos)?,
            Engine::Lockstep(engine) => {
                match engine.post(
                    self.rank,
                    site,
                    Kind::AllToAll,
                    group.members(),
                    Payload::Chunks(chunks),
                )? {
                    Payload::Chunks(c) => c,
                    Payload::Buffer(_) => unreachable!(),
                }
            }
        };
        let received: usize = result
            .iter()
            .enumerate()
            .filter(|(p, _)| *p != pos)
            .map(|(_, c)| c.len())
            .sum();
        self.meter.charge(
            self.rank,
            site,
            "all_to_all",
            q,
            (total - own) as u64,
            received as u64,
            (q - 1) as u64,
            total as u64,
            (q - 1) as u64,
        );
        Ok(result)
    }
}
