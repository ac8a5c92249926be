use thiserror::Error;

use crate::group::GroupError;
use crate::tree::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] GroupError),

    #[error("tree of branching {branching} and depth {max_depth} holds {capacity} nodes, {requested} requested")]
    CapacityExceeded {
        requested: usize,
        branching: usize,
        max_depth: usize,
        capacity: usize,
    },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("handler at node {node} failed: {source}")]
    HandlerFailure {
        node: NodeId,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed message: {0}")]
    Malformed(String),

    #[error("signing state was already consumed")]
    NonceReuse,

    #[error("sessions come from different offline runs")]
    MixedSessions,

    #[error("signing session is not in the expected state: {0}")]
    SessionState(String),

    #[error("key set is empty")]
    EmptySet,

    #[error("expected {expected} keys for the tree, got {got}")]
    KeyCountMismatch { expected: usize, got: usize },

    #[error("{0} did not produce a usable value within the resampling budget")]
    ResampleExhausted(&'static str),

    #[error("attack operation requires the toy backend")]
    BackendRefused,

    #[error("attack failed: {0}")]
    AttackFailure(String),

    #[error("endorsement policy unsatisfied: {0}")]
    PolicyUnsatisfied(String),

    #[error("client public key failed key verification")]
    InvalidClient,

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
