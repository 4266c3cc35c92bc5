//! Serialized round-based backend.
//!
//! Exactly one rank executes at any instant; a baton moves round-robin over
//! runnable ranks, switching whenever the running rank blocks on an
//! incomplete collective or finishes. Collectives rendezvous through a
//! central table, which makes execution order reproducible run to run and
//! lets the scheduler prove a deadlock: if every unfinished rank is blocked,
//! no pending collective can ever complete.

use std::collections::HashMap;
use std::sync::{Condvar, Mutex};

use crate::error::{FabricError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    AllGather,
    ReduceScatter,
    AllToAll,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::AllGather => "all_gather",
            Kind::ReduceScatter => "reduce_scatter",
            Kind::AllToAll => "all_to_all",
        }
    }
}

#[derive(Debug)]
pub(crate) enum Payload {
    Buffer(Vec<f64>),
    Chunks(Vec<Vec<f64>>),
}

impl Payload {
    fn words(&self) -> usize {
        match self {
            Payload::Buffer(b) => b.len(),
            Payload::Chunks(c) => c.iter().map(Vec::len).sum(),
        }
    }
}

enum Phase {
    /// Runnable (or currently running, when `current` points here).
    Idle,
    /// Posted to an incomplete collective.
    Blocked,
    /// Collective completed; resumes when the baton arrives.
    Ready(Payload),
    Done,
}

struct Pending {
    site: &'static str,
    kind: Kind,
    posts: Vec<Option<Payload>>,
    posted: usize,
}

struct State {
    current: usize,
    phase: Vec<Phase>,
    instance_seq: HashMap<Vec<usize>, u64>,
    pending: HashMap<(Vec<usize>, u64), Pending>,
    deadlock: Option<String>,
}

pub(crate) struct LockstepEngine {
    state: Mutex<State>,
    turn: Condvar,
}

impl LockstepEngine {
    pub(crate) fn new(world: usize) -> LockstepEngine {
        LockstepEngine {
            state: Mutex::new(State {
                current: 0,
                phase: (0..world).map(|_| Phase::Idle).collect(),
                instance_seq: HashMap::new(),
                pending: HashMap::new(),
                deadlock: None,
            }),
            turn: Condvar::new(),
        }
    }

    /// Blocks until the baton reaches `rank` for the first time.
    pub(crate) fn wait_start(&self, rank: usize) {
        let mut state = self.state.lock().unwrap();
        while state.deadlock.is_none() && state.current != rank {
            state = self.turn.wait(state).unwrap();
        }
    }

    pub(crate) fn finish(&self, rank: usize) {
        let mut state = self.state.lock().unwrap();
        state.phase[rank] = Phase::Done;
        if state.current == rank {
            advance(&mut state);
        }
        self.turn.notify_all();
    }

    /// Posts this rank's contribution and blocks until the instance
    /// completes (yielding the baton meanwhile).
    pub(crate) fn post(
        &self,
        rank: usize,
        site: &'static str,
        kind: Kind,
        members: &[usize],
        payload: Payload,
    ) -> Result<Payload> {
        let mut state = self.state.lock().unwrap();
        if let Some(detail) = &state.deadlock {
            return Err(FabricError::Deadlock {
                detail: detail.clone(),
            });
        }
        let q = members.len();
        let pos = members
            .iter()
            .position(|&m| m == rank)
            .expect("caller membership checked before posting");
        let seq = *state.instance_seq.get(members).unwrap_or(&0);
        let key = (members.to_vec(), seq);
        let entry = state.pending.entry(key.clone()).or_insert_with(|| Pending {
            site,
            kind,
            posts: (0..q).map(|_| None).collect(),
            posted: 0,
        });
        if entry.kind != kind {
            return Err(FabricError::GeometryMismatch {
                site,
                detail: format!(
                    "rank {rank} posted {} where the group already runs {}",
                    kind.name(),
                    entry.kind.name()
                ),
            });
        }
        if let Some(prior) = entry.posts.iter().flatten().next() {
            if let Err(detail) = geometry_compatible(kind, prior, &payload) {
                return Err(FabricError::GeometryMismatch { site, detail });
            }
        }
        entry.posts[pos] = Some(payload);
        entry.posted += 1;

        if entry.posted == q {
            let done = state.pending.remove(&key).unwrap();
            *state.instance_seq.entry(members.to_vec()).or_default() += 1;
            let mut outcomes = compute(done);
            let mine = outcomes[pos].take().unwrap();
            for (p, member) in members.iter().enumerate() {
                if p != pos {
                    state.phase[*member] = Phase::Ready(outcomes[p].take().unwrap());
                }
            }
            // The completing rank keeps the baton and continues.
            self.turn.notify_all();
            return Ok(mine);
        }

        state.phase[rank] = Phase::Blocked;
        advance(&mut state);
        self.turn.notify_all();
        loop {
            if let Some(detail) = &state.deadlock {
                return Err(FabricError::Deadlock {
                    detail: detail.clone(),
                });
            }
            if state.current == rank && matches!(state.phase[rank], Phase::Ready(_)) {
                let outcome = std::mem::replace(&mut state.phase[rank], Phase::Idle);
                match outcome {
                    Phase::Ready(payload) => return Ok(payload),
                    _ => unreachable!(),
                }
            }
            state = self.turn.wait(state).unwrap();
        }
    }
}

/// Hands the baton to the next runnable rank after `state.current`, or flags
/// a deadlock when every unfinished rank is blocked.
fn advance(state: &mut State) {
    let world = state.phase.len();
    for offset in 1..=world {
        let candidate = (state.current + offset) % world;
        match state.phase[candidate] {
            Phase::Idle | Phase::Ready(_) => {
                state.current = candidate;
                return;
            }
            _ => {}
        }
    }
    if state.phase.iter().any(|p| matches!(p, Phase::Blocked)) {
        let mut lines = Vec::new();
        for ((members, _), pending) in &state.pending {
            let missing: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|(p, _)| pending.posts[*p].is_none())
                .map(|(_, m)| *m)
                .collect();
            lines.push(format!(
                "{} `{}` on {:?} has {}/{} posts, waiting on ranks {:?}",
                pending.kind.name(),
                pending.site,
                members,
                pending.posted,
                members.len(),
                missing
            ));
        }
        lines.sort();
        state.deadlock = Some(lines.join("; "));
    }
}

fn geometry_compatible(kind: Kind, prior: &Payload, new: &Payload) -> std::result::Result<(), String> {
    match (kind, prior, new) {
        (Kind::AllGather | Kind::ReduceScatter, Payload::Buffer(a), Payload::Buffer(b)) => {
            if a.len() != b.len() {
                Err(format!("buffer of {} words where peers posted {}", b.len(), a.len()))
            } else {
                Ok(())
            }
        }
        (Kind::AllToAll, Payload::Chunks(a), Payload::Chunks(b)) => {
            if a.len() != b.len() {
                Err(format!("{} chunks where peers posted {}", b.len(), a.len()))
            } else {
                Ok(())
            }
        }
        _ => Err("mixed payload shapes in one collective".to_string()),
    }
}

fn compute(done: Pending) -> Vec<Option<Payload>> {
    let q = done.posts.len();
    let posts: Vec<Payload> = done.posts.into_iter().map(Option::unwrap).collect();
    match done.kind {
        Kind::AllGather => {
            let mut concat = Vec::with_capacity(posts.iter().map(Payload::words).sum());
            for p in &posts {
                match p {
                    Payload::Buffer(b) => concat.extend_from_slice(b),
                    Payload::Chunks(_) => unreachable!(),
                }
            }
            (0..q).map(|_| Some(Payload::Buffer(concat.clone()))).collect()
        }
        Kind::ReduceScatter => {
            let w = posts[0].words();
            let seg = w / q;
            let buffers: Vec<&Vec<f64>> = posts
                .iter()
                .map(|p| match p {
                    Payload::Buffer(b) => b,
                    Payload::Chunks(_) => unreachable!(),
                })
                .collect();
            (0..q)
                .map(|pos| {
                    // Sum in ascending group order: both backends and every
                    // repetition produce identical bits.
                    let mut acc = buffers[0][pos * seg..(pos + 1) * seg].to_vec();
                    for b in &buffers[1..] {
                        for (a, v) in acc.iter_mut().zip(&b[pos * seg..(pos + 1) * seg]) {
                            *a += *v;
                        }
                    }
                    Some(Payload::Buffer(acc))
                })
                .collect()
        }
        Kind::AllToAll => {
            let mut chunks: Vec<Vec<Vec<f64>>> = posts
                .into_iter()
                .map(|p| match p {
                    Payload::Chunks(c) => c,
                    Payload::Buffer(_) => unreachable!(),
                })
                .collect();
            let mut outcomes: Vec<Option<Payload>> = (0..q).map(|_| None).collect();
            for pos in (0..q).rev() {
                let received = chunks
                    .iter_mut()
                    .map(|sender| std::mem::take(&mut sender[pos]))
                    .collect();
                outcomes[pos] = Some(Payload::Chunks(received));
            }
            outcomes
        }
    }
}
