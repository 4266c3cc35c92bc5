//! SPMD execution: runs one program on every rank under a chosen backend
//! and merges results with the communication cost report.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use crate::comm::{Backend, Comm, Engine};
use crate::error::{FabricError, RankFailure, Result};
use crate::lockstep::LockstepEngine;
use crate::meter::{CostReport, Meter};
use crate::threaded;

/// Results of a successful run: one output per rank plus the merged report.
#[derive(Debug)]
pub struct SpmdRun<T> {
    pub outputs: Vec<T>,
    pub report: CostReport,
}

/// Executes `program(comm)` on `world` ranks. Any rank failing turns into an
/// aggregate error naming the rank; a lockstep run that wedges reports the
/// deadlock instead.
pub fn run_spmd<T, F>(world: usize, backend: Backend, program: F) -> Result<SpmdRun<T>>
where
    T: Send,
    F: Fn(&mut Comm) -> std::result::Result<T, RankFailure> + Sync,
{
    if world == 0 {
        return Err(FabricError::EmptyWorld);
    }
    let meter = Meter::new(world);
    let lockstep = match backend {
        Backend::Lockstep => Some(Arc::new(LockstepEngine::new(world))),
        Backend::Threaded => None,
    };
    let mut links: Vec<Option<threaded::ThreadedLinks>> = match backend {
        Backend::Threaded => threaded::build_links(world).into_iter().map(Some).collect(),
        Backend::Lockstep => (0..world).map(|_| None).collect(),
    };

    let mut slots: Vec<Option<std::result::Result<T, RankFailure>>> = Vec::new();
    slots.resize_with(world, || None);
    let mut panicked: Vec<bool> = vec![false; world];

    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(world);
        for (rank, (slot, panic_flag)) in slots.iter_mut().zip(panicked.iter_mut()).enumerate() {
            let engine = match backend {
                Backend::Threaded => Engine::Threaded(links[rank].take().unwrap()),
                Backend::Lockstep => Engine::Lockstep(lockstep.as_ref().unwrap().clone()),
            };
            let mut comm = Comm::new(rank, world, backend, engine, meter.clone());
            let program = &program;
            let lockstep = lockstep.clone();
            handles.push(scope.spawn(move || {
                if let Some(engine) = &lockstep {
                    engine.wait_start(rank);
                }
                let outcome = catch_unwind(AssertUnwindSafe(|| program(&mut comm)));
                if let Some(engine) = &lockstep {
                    engine.finish(rank);
                }
                // Drop the comm before recording so threaded peers blocked
                // on this rank observe the disconnect.
                drop(comm);
                match outcome {
                    Ok(result) => *slot = Some(result),
                    Err(_) => *panic_flag = true,
                }
            }));
        }
        for handle in handles {
            // The closure already caught panics; join cannot fail.
            let _ = handle.join();
        }
    });

    let mut failures: Vec<(usize, RankFailure)> = Vec::new();
    let mut outputs = Vec::with_capacity(world);
    for (rank, (slot, panic_flag)) in slots.into_iter().zip(panicked).enumerate() {
        if panic_flag {
            return Err(FabricError::RankPanicked { rank });
        }
        match slot.expect("every rank records an outcome") {
            Ok(v) => outputs.push(v),
            Err(failure) => failures.push((rank, failure)),
        }
    }
    if !failures.is_empty() {
        // Blocked ranks all report the deadlock; prefer a root-cause failure
        // (e.g. the geometry mismatch that caused it) when one exists.
        if let Some((rank, failure)) = failures.iter().find(|(_, f)| !f.0.starts_with("deadlock")) {
            return Err(FabricError::RankFailed {
                rank: *rank,
                message: failure.0.clone(),
            });
        }
        let (_, failure) = failures.remove(0);
        let detail = failure
            .0
            .strip_prefix("deadlock: ")
            .unwrap_or(&failure.0)
            .to_string();
        return Err(FabricError::Deadlock { detail });
    }
    Ok(SpmdRun {
        outputs,
        report: meter.collect(),
    })
}
