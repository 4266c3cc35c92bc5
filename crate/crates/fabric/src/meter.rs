//! Word-exact communication accounting.
//!
//! Each collective call charges two ledgers: the measured words the backend
//! schedule actually moves, and the model cost of the collective
//! (`(1 - 1/Q) W` bandwidth with `ceil(log2 Q)` messages for all-gather and
//! reduce-scatter, `W` bandwidth with `Q - 1` messages for all-to-all). On
//! the schedules implemented here both ledgers are integer word counts.

use std::sync::{Arc, Mutex};

/// One collective invocation as seen by one rank.
#[derive(Debug, Clone)]
pub struct CallRecord {
    pub rank: usize,
    /// Call index within the rank's own sequence.
    pub seq: usize,
    /// Caller-supplied label of the call site.
    pub site: &'static str,
    pub collective: &'static str,
    pub group_size: usize,
    pub words_sent: u64,
    pub words_received: u64,
    pub messages: u64,
    pub model_bandwidth: u64,
    pub model_latency: u64,
}

/// Totals accumulated along one rank's call sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankCost {
    pub words_sent: u64,
    pub words_received: u64,
    pub messages: u64,
    pub model_bandwidth: u64,
    pub model_latency: u64,
}

/// Per-rank totals plus the full call log of an SPMD run.
#[derive(Debug, Clone)]
pub struct CostReport {
    pub ranks: Vec<RankCost>,
    pub calls: Vec<CallRecord>,
}

impl CostReport {
    /// Maximum over ranks of words sent plus words received.
    pub fn critical_path_words(&self) -> u64 {
        self.ranks
            .iter()
            .map(|r| r.words_sent + r.words_received)
            .max()
            .unwrap_or(0)
    }

    pub fn total_words_sent(&self) -> u64 {
        self.ranks.iter().map(|r| r.words_sent).sum()
    }

    pub fn total_words_received(&self) -> u64 {
        self.ranks.iter().map(|r| r.words_received).sum()
    }

    /// Largest per-rank model bandwidth, the model analogue of the critical
    /// path.
    pub fn max_model_bandwidth(&self) -> u64 {
        self.ranks.iter().map(|r| r.model_bandwidth).max().unwrap_or(0)
    }

    pub fn max_model_latency(&self) -> u64 {
        self.ranks.iter().map(|r| r.model_latency).max().unwrap_or(0)
    }

    /// Measured words moved at calls whose site label satisfies `pred`,
    /// summed per rank, maximum over ranks.
    pub fn max_measured_at(&self, pred: impl Fn(&str) -> bool) -> u64 {
        let mut per_rank = vec![0u64; self.ranks.len()];
        for c in &self.calls {
            if pred(c.site) {
                per_rank[c.rank] += c.words_sent + c.words_received;
            }
        }
        per_rank.into_iter().max().unwrap_or(0)
    }

    /// `(measured, model)` words at the sites satisfying `pred`: per rank
    /// the measured count is `max(sent, received)` (one direction, like the
    /// model's bandwidth term), summed over matching calls; both numbers are
    /// maxima over ranks.
    pub fn site_words(&self, pred: impl Fn(&str) -> bool) -> (u64, u64) {
        let mut measured = vec![0u64; self.ranks.len()];
        let mut model = vec![0u64; self.ranks.len()];
        for c in &self.calls {
            if pred(c.site) {
                measured[c.rank] += c.words_sent.max(c.words_received);
                model[c.rank] += c.model_bandwidth;
            }
        }
        (
            measured.into_iter().max().unwrap_or(0),
            model.into_iter().max().unwrap_or(0),
        )
    }

    /// One CSV row per (rank, call), stable column order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "rank,seq,site,collective,group_size,words_sent,words_received,messages,model_bandwidth,model_latency\n",
        );
        for c in &self.calls {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                c.rank,
                c.seq,
                c.site,
                c.collective,
                c.group_size,
                c.words_sent,
                c.words_received,
                c.messages,
                c.model_bandwidth,
                c.model_latency
            ));
        }
        out
    }
}

#[derive(Default)]
struct RankSlot {
    paused: bool,
    seq: usize,
    cost: RankCost,
    calls: Vec<CallRecord>,
}

/// Shared accounting for one SPMD run; each rank only touches its own slot.
pub(crate) struct Meter {
    slots: Vec<Mutex<RankSlot>>,
}

impl Meter {
    pub(crate) fn new(world: usize) -> Arc<Meter> {
        Arc::new(Meter {
            slots: (0..world).map(|_| Mutex::new(RankSlot::default())).collect(),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn charge(
        &self,
        rank: usize,
        site: &'static str,
        collective: &'static str,
        group_size: usize,
        words_sent: u64,
        words_received: u64,
        messages: u64,
        model_bandwidth: u64,
        model_latency: u64,
    ) {
        let mut slot = self.slots[rank].lock().unwrap();
        if slot.paused {
            return;
        }
        let seq = slot.seq;
        slot.seq += 1;
        slot.cost.words_sent += words_sent;
        slot.cost.words_received += words_received;
        slot.cost.messages += messages;
        slot.cost.model_bandwidth += model_bandwidth;
        slot.cost.model_latency += model_latency;
        slot.calls.push(CallRecord {
            rank,
            seq,
            site,
            collective,
            group_size,
            words_sent,
            words_received,
            messages,
            model_bandwidth,
            model_latency,
        });
    }

    pub(crate) fn set_paused(&self, rank: usize, paused: bool) {
        self.slots[rank].lock().unwrap().paused = paused;
    }

    pub(crate) fn collect(&self) -> CostReport {
        let mut ranks = Vec::with_capacity(self.slots.len());
        let mut calls = Vec::new();
        for slot in &self.slots {
            let slot = slot.lock().unwrap();
            ranks.push(slot.cost.clone());
            calls.extend(slot.calls.iter().cloned());
        }
        CostReport { ranks, calls }
    }
}
