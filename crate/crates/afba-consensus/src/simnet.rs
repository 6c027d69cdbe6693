//! Deterministic in-process message passing with bulk-synchronous rounds.
//!
//! Every agent broadcasts one n-vector per round to each neighbor; the round
//! barrier (`advance_round`) refuses to move until everyone has broadcast and
//! consumed its inbox. Byte accounting uses 8-byte floats as the cost model.

use ndarray::Array1;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum SimnetError {
    #[error("node {node} broadcast twice in round {round}")]
    DoubleBroadcast { node: usize, round: usize },
    #[error("round {round} advanced with missing broadcasts from nodes {nodes:?}")]
    MissingBroadcasts { nodes: Vec<usize>, round: usize },
    #[error("round {round} advanced before nodes {nodes:?} consumed their inbox")]
    MissingReads { nodes: Vec<usize>, round: usize },
    #[error("node {node} read round {requested} but the mailbox is at round {current}")]
    StaleRound { node: usize, requested: usize, current: usize },
    #[error("node {node} read before neighbor {from} broadcast")]
    MissingInput { node: usize, from: usize },
    #[error("vector length {got} does not match mailbox dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
}

/// Communication counters; `bytes_sent` is `vectors_sent * dim * 8`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommStats {
    pub rounds: usize,
    pub vectors_sent: usize,
    pub bytes_sent: usize,
}

/// Per-round mailbox: one slot per directed edge `(j -> i)`, each written
/// exactly once per round before any consumer reads it.
pub struct RoundMailbox {
    dim: usize,
    round: usize,
    neighbors: Vec<Vec<usize>>,
    slots: Vec<Vec<Option<Array1<f64>>>>,
    sent: Vec<bool>,
    consumed: Vec<bool>,
    stats: CommStats,
}

impl RoundMailbox {
    pub fn new(graph: &Graph, dim: usize) -> Self {
        let neighbors: Vec<Vec<usize>> =
            (0..graph.num_nodes()).map(|i| graph.neighbors(i).to_vec()).collect();
        let slots = neighbors.iter().map(|list| vec![None; list.len()]).collect();
        Self {
            dim,
            round: 0,
            sent: vec![false; graph.num_nodes()],
            consumed: vec![false; graph.num_nodes()],
            neighbors,
            slots,
            stats: CommStats::default(),
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn stats(&self) -> &CommStats {
        &self.stats
    }

    /// Copies `u` into the slot of every neighbor of `node` and updates the
    /// traffic counters.
    pub fn broadcast(&mut self, node: usize, u: &Array1<f64>) -> Result<(), SimnetError> {
        let n = self.sent.len();
        if node >= n {
            return Err(SimnetError::NodeOutOfRange { node, num_nodes: n });
        }
        if u.len() != self.dim {
            return Err(SimnetError::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        if self.sent[node] {
            return Err(SimnetError::DoubleBroadcast { node, round: self.round });
        }
        for idx in 0..self.neighbors[node].len() {
            let receiver = self.neighbors[node][idx];
            let pos = self.neighbors[receiver]
                .binary_search(&node)
                .expect("neighbor lists are symmetric");
            debug_assert!(self.slots[receiver][pos].is_none());
            self.slots[receiver][pos] = Some(u.clone());
        }
        self.sent[node] = true;
        let degree = self.neighbors[node].len();
        self.stats.vectors_sent += degree;
        self.stats.bytes_sent += degree * self.dim * 8;
        Ok(())
    }

    /// Returns `(sender, vector)` pairs for `node`, sorted by sender id. The
    /// caller states its round; a mismatch is a protocol violation.
    pub fn read(
        &mut self,
        node: usize,
        round: usize,
    ) -> Result<Vec<(usize, Array1<f64>)>, SimnetError> {
        let n = self.sent.len();
        if node >= n {
            return Err(SimnetError::NodeOutOfRange { node, num_nodes: n });
        }
        if round != self.round {
            return Err(SimnetError::StaleRound { node, requested: round, current: self.round });
        }
        let mut inbox = Vec::with_capacity(self.neighbors[node].len());
        for (pos, &sender) in self.neighbors[node].iter().enumerate() {
            match &self.slots[node][pos] {
                Some(u) => inbox.push((sender, u.clone())),
                None => return Err(SimnetError::MissingInput { node, from: sender }),
            }
        }
        self.consumed[node] = true;
        Ok(inbox)
    }

    /// Barrier: verifies every node broadcast and consumed, then clears the
    /// slots and increments the round counter.
    pub fn advance_round(&mut self) -> Result<(), SimnetError> {
        let lagging: Vec<usize> =
            (0..self.sent.len()).filter(|&i| !self.sent[i]).collect();
        if !lagging.is_empty() {
            return Err(SimnetError::MissingBroadcasts { nodes: lagging, round: self.round });
        }
        let unread: Vec<usize> =
            (0..self.consumed.len()).filter(|&i| !self.consumed[i]).collect();
        if !unread.is_empty() {
            return Err(SimnetError::MissingReads { nodes: unread, round: self.round });
        }
        for node_slots in &mut self.slots {
            for slot in node_slots.iter_mut() {
                *slot = None;
            }
        }
        self.sent.iter_mut().for_each(|s| *s = false);
        self.consumed.iter_mut().for_each(|s| *s = false);
        self.round += 1;
        self.stats.rounds += 1;
        Ok(())
    }
}
