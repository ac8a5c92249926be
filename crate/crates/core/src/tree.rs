//! Spanning-tree topology and a deterministic phase simulator.
//!
//! Node `0` is the leader. Announce and Challenge phases flow from parents to
//! children, Commit and Respond phases from children to parents. Each phase
//! is executed in dependency order by [`Tree::run_phase`], which calls a
//! per-node handler with the messages that node received and routes its
//! output along the tree edges.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{OpCounter, OpCounts};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    level: Vec<usize>,
    depth: usize,
    branching: usize,
}

/// Number of nodes in a complete `branching`-ary tree of the given depth
/// (depth 0 is a lone root). Saturates at `usize::MAX`.
pub fn capacity(branching: usize, max_depth: usize) -> usize {
    let mut total: usize = 1;
    let mut layer: usize = 1;
    for _ in 0..max_depth {
        layer = layer.saturating_mul(branching);
        total = total.saturating_add(layer);
    }
    total
}

/// Breadth-first complete `branching`-ary fill of `n` nodes.
pub fn build_tree(n: usize, branching: usize, max_depth: usize) -> Result<Tree> {
    Tree::build(n, branching, max_depth)
}

impl Tree {
    pub fn build(n: usize, branching: usize, max_depth: usize) -> Result<Tree> {
        if n == 0 {
            return Err(Error::InvalidTopology("a tree needs at least one node".into()));
        }
        if branching == 0 {
            return Err(Error::InvalidTopology("branching factor must be at least 1".into()));
        }
        let cap = capacity(branching, max_depth);
        if n > cap {
            return Err(Error::CapacityExceeded {
                requested: n,
                branching,
                max_depth,
                capacity: cap,
            });
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut level = vec![0; n];
        for i in 1..n {
            let p = (i - 1) / branching;
            parent[i] = Some(p);
            children[p].push(i);
            level[i] = level[p] + 1;
        }
        let depth = level.iter().copied().max().unwrap_or(0);
        Ok(Tree {
            parent,
            children,
            level,
            depth,
            branching,
        })
    }

    /// Smallest branching factor whose depth-`max_depth` tree holds `n` nodes.
    pub fn for_signers(n: usize, max_depth: usize) -> Result<Tree> {
        if max_depth == 0 {
            return Tree::build(n, 1, 0);
        }
        let branching = (1..=n.max(1)).find(|&b| capacity(b, max_depth) >= n).unwrap_or(1);
        Tree::build(n, branching, max_depth)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node]
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node]
    }

    pub fn node_level(&self, node: NodeId) -> usize {
        self.level[node]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn edge_count(&self) -> usize {
        self.len() - 1
    }

    /// Nodes grouped by distance from the root, ascending ids within a level.
    pub fn levels(&self) -> Vec<Vec<NodeId>> {
        let mut levels = vec![Vec::new(); self.depth + 1];
        for (node, &l) in self.level.iter().enumerate() {
            levels[l].push(node);
        }
        levels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Announce,
    Commit,
    Challenge,
    Respond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TopDown,
    BottomUp,
}

impl Phase {
    pub fn direction(self) -> Direction {
        match self {
            Phase::Announce | Phase::Challenge => Direction::TopDown,
            Phase::Commit | Phase::Respond => Direction::BottomUp,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Announce => "announce",
            Phase::Commit => "commit",
            Phase::Challenge => "challenge",
            Phase::Respond => "respond",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseMessage {
    pub phase: Phase,
    pub from: NodeId,
    pub to: NodeId,
    #[serde(rename = "payload_hex", with = "hex::serde")]
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeliveryOrder {
    /// Deepest level first (bottom-up) or shallowest first (top-down), ascending ids.
    #[default]
    BfsDeterministic,
    /// Level order is kept; order within a level and inbox order are shuffled.
    SeededShuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimSchedule {
    pub seed: u64,
    pub order: DeliveryOrder,
}

impl SimSchedule {
    pub fn shuffled(seed: u64) -> Self {
        SimSchedule {
            seed,
            order: DeliveryOrder::SeededShuffle,
        }
    }

    fn rng_for(&self, phase: Phase) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(phase as u64);
        rng
    }
}

/// Everything observable about one executed phase.
#[derive(Debug, Clone)]
pub struct PhaseOutcome {
    pub phase: Phase,
    pub messages: Vec<PhaseMessage>,
    /// Leader output of a bottom-up phase; empty for top-down phases.
    pub root_output: Vec<u8>,
    /// Order in which node handlers fired.
    pub firing_order: Vec<NodeId>,
    /// Group operations performed inside each node's handler.
    pub node_ops: Vec<OpCounts>,
    pub wall: Duration,
}

impl PhaseOutcome {
    pub fn total_ops(&self) -> OpCounts {
        self.node_ops.iter().copied().sum()
    }
}

impl Tree {
    /// Executes one phase.
    ///
    /// The handler receives the node id and its inbox: the messages from its
    /// children for bottom-up phases, or the single message from its parent
    /// for top-down phases (empty at the root). Its output is sent to the
    /// parent (bottom-up) or to every child (top-down). A handler error aborts
    /// the phase with [`Error::HandlerFailure`].
    pub fn run_phase<F>(&self, phase: Phase, schedule: &SimSchedule, mut handler: F) -> Result<PhaseOutcome>
    where
        F: FnMut(NodeId, &[PhaseMessage]) -> Result<Vec<u8>>,
    {
        let started = Instant::now();
        let mut rng = self.rng_for(schedule, phase);
        let mut levels = self.levels();
        if phase.direction() == Direction::BottomUp {
            levels.reverse();
        }
        let mut inboxes: Vec<Vec<PhaseMessage>> = vec![Vec::new(); self.len()];
        let mut messages = Vec::with_capacity(self.edge_count());
        let mut node_ops = vec![OpCounts::default(); self.len()];
        let mut firing_order = Vec::with_capacity(self.len());
        let mut root_output = Vec::new();

        for mut level in levels {
            if let Some(rng) = rng.as_mut() {
                level.shuffle(rng);
            }
            for node in level {
                let mut inbox = std::mem::take(&mut inboxes[node]);
                if let Some(rng) = rng.as_mut() {
                    inbox.shuffle(rng);
                }
                let counter = OpCounter::start(phase.name());
                let output = handler(node, &inbox).map_err(|e| Error::HandlerFailure {
                    node,
                    source: Box::new(e),
                })?;
                node_ops[node] = counter.read();
                firing_order.push(node);
                match phase.direction() {
                    Direction::BottomUp => match self.parent[node] {
                        Some(p) => {
                            let msg = PhaseMessage {
                                phase,
                                from: node,
                                to: p,
                                payload: output,
                            };
                            inboxes[p].push(msg.clone());
                            messages.push(msg);
                        }
                        None => root_output = output,
                    },
                    Direction::TopDown => {
                        for &child in &self.children[node] {
                            let msg = PhaseMessage {
                                phase,
                                from: node,
                                to: child,
                                payload: output.clone(),
                            };
                            inboxes[child].push(msg.clone());
                            messages.push(msg);
                        }
                    }
                }
            }
        }

        Ok(PhaseOutcome {
            phase,
            messages,
            root_output,
            firing_order,
            node_ops,
            wall: started.elapsed(),
        })
    }

    fn rng_for(&self, schedule: &SimSchedule, phase: Phase) -> Option<ChaCha8Rng> {
        match schedule.order {
            DeliveryOrder::BfsDeterministic => None,
            DeliveryOrder::SeededShuffle => Some(schedule.rng_for(phase)),
        }
    }
}

/// Ordered log of all messages exchanged during a protocol run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub messages: Vec<PhaseMessage>,
}

impl Transcript {
    pub fn extend(&mut self, outcome: &PhaseOutcome) {
        self.messages.extend(outcome.messages.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Messages sorted by `(phase, from, to)`, for schedule-independent comparison.
    pub fn canonicalized(&self) -> Transcript {
        let mut messages = self.messages.clone();
        messages.sort_by_key(|m| (m.phase, m.from, m.to));
        Transcript { messages }
    }

    /// One JSON object per line: `{"phase", "from", "to", "payload_hex"}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&serde_json::to_string(m).expect("message serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Transcript> {
        let messages = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Malformed(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Transcript { messages })
    }
}
