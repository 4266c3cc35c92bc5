//! Free-running backend: one worker thread per rank, point-to-point
//! delivery over bounded per-pair mailboxes.
//!
//! Collectives use schedules that move exactly the model bandwidth: ring
//! all-gather, direct-exchange reduce-scatter (each contribution goes
//! straight to its owner so the owner can sum in ascending group order), and
//! pairwise-exchange all-to-all. Message matching needs no tags: rank pairs
//! communicate over dedicated FIFO channels and all members issue their
//! collectives in program order.

use std::sync::mpsc::{sync_channel, Receiver, SyncSender};

use crate::error::{FabricError, Result};

/// Per-pair mailbox depth, in messages. Senders may run a bounded distance
/// ahead of receivers; the backpressure cannot deadlock because every
/// receive eventually drains its channel.
const MAILBOX_DEPTH: usize = 4;

pub(crate) struct ThreadedLinks {
    pub(crate) send_to: Vec<SyncSender<Vec<f64>>>,
    pub(crate) recv_from: Vec<Receiver<Vec<f64>>>,
}

/// Builds the full `world x world` channel matrix and hands each rank its
/// senders and receivers.
pub(crate) fn build_links(world: usize) -> Vec<ThreadedLinks> {
    let mut senders: Vec<Vec<Option<SyncSender<Vec<f64>>>>> = Vec::with_capacity(world);
    let mut receivers: Vec<Vec<Option<Receiver<Vec<f64>>>>> = Vec::with_capacity(world);
    for _ in 0..world {
        senders.push((0..world).map(|_| None).collect());
        receivers.push((0..world).map(|_| None).collect());
    }
    for src in 0..world {
        for dst in 0..world {
            let (tx, rx) = sync_channel(MAILBOX_DEPTH);
            senders[src][dst] = Some(tx);
            receivers[dst][src] = Some(rx);
        }
    }
    senders
        .into_iter()
        .zip(receivers)
        .map(|(tx_row, rx_row)| ThreadedLinks {
            send_to: tx_row.into_iter().map(Option::unwrap).collect(),
            recv_from: rx_row.into_iter().map(Option::unwrap).collect(),
        })
        .collect()
}

impl ThreadedLinks {
    fn send(&self, site: &'static str, peer: usize, payload: Vec<f64>) -> Result<()> {
        self.send_to[peer]
            .send(payload)
            .map_err(|_| FabricError::PeerDisconnected { site, peer })
    }

    fn recv(&self, site: &'static str, peer: usize) -> Result<Vec<f64>> {
        self.recv_from[peer]
            .recv()
            .map_err(|_| FabricError::PeerDisconnected { site, peer })
    }

    /// Ring all-gather: hands the most recently seen block to the right
    /// neighbor for `Q - 1` steps.
    pub(crate) fn all_gather(
        &self,
        site: &'static str,
        local: &[f64],
        members: &[usize],
        pos: usize,
    ) -> Result<Vec<f64>> {
        let q = members.len();
        let w = local.len();
        let mut result = vec![0.0; q * w];
        result[pos * w..(pos + 1) * w].copy_from_slice(local);
        let right = members[(pos + 1) % q];
        let left = members[(pos + q - 1) % q];
        let mut forward = local.to_vec();
        for step in 1..q {
            self.send(site, right, forward)?;
            let received = self.recv(site, left)?;
            if received.len() != w {
                return Err(FabricError::GeometryMismatch {
                    site,
                    detail: format!(
                        "rank {left} contributed {} words where this rank holds {w}",
                        received.len()
                    ),
                });
            }
            let src_pos = (pos + q - step) % q;
            result[src_pos * w..(src_pos + 1) * w].copy_from_slice(&received);
            forward = received;
        }
        Ok(result)
    }

    /// Direct-exchange reduce-scatter: every rank sends each segment to its
    /// owner, and owners fold contributions in ascending group order.
    pub(crate) fn reduce_scatter(
        &self,
        site: &'static str,
        local: &[f64],
        members: &[usize],
        pos: usize,
    ) -> Result<Vec<f64>> {
        let q = members.len();
        let seg = local.len() / q;
        for (peer_pos, &peer) in members.iter().enumerate() {
            if peer_pos != pos {
                self.send(site, peer, local[peer_pos * seg..(peer_pos + 1) * seg].to_vec())?;
            }
        }
        let mut contributions: Vec<Option<Vec<f64>>> = (0..q).map(|_| None).collect();
        for (peer_pos, &peer) in members.iter().enumerate() {
            if peer_pos == pos {
                continue;
            }
            let received = self.recv(site, peer)?;
            if received.len() != seg {
                return Err(FabricError::GeometryMismatch {
                    site,
                    detail: format!(
                        "rank {peer} contributed a segment of {} words, expected {seg}",
                        received.len()
                    ),
                });
            }
            contributions[peer_pos] = Some(received);
        }
        // The slot at our own position is None and stands for the local
        // segment; fold strictly in group order.
        let own = &local[pos * seg..(pos + 1) * seg];
        let mut acc = match &contributions[0] {
            Some(first) => first.clone(),
            None => own.to_vec(),
        };
        for contribution in contributions.iter().skip(1) {
            let slice = contribution.as_deref().unwrap_or(own);
            for (a, v) in acc.iter_mut().zip(slice) {
                *a += *v;
            }
        }
        Ok(acc)
    }

    /// Pairwise exchange: chunk `t` goes straight to member `t`.
    pub(crate) fn all_to_all(
        &self,
        site: &'static str,
        mut chunks: Vec<Vec<f64>>,
        members: &[usize],
        pos: usize,
    ) -> Result<Vec<Vec<f64>>> {
        let q = members.len();
        let mut result: Vec<Vec<f64>> = (0..q).map(|_| Vec::new()).collect();
        result[pos] = std::mem::take(&mut chunks[pos]);
        for (peer_pos, &peer) in members.iter().enumerate() {
            if peer_pos != pos {
                self.send(site, peer, std::mem::take(&mut chunks[peer_pos]))?;
            }
        }
        for (peer_pos, &peer) in members.iter().enumerate() {
            if peer_pos != pos {
                result[peer_pos] = self.recv(site, peer)?;
            }
        }
        Ok(result)
    }
}
