//! Toy-scale reproductions of the rogue-key and k-sum forgeries.
//!
//! Both attacks target CoSi; the same machinery is pointed at the proof of
//! possession and at AGMS as negative controls. Every reported forgery has
//! been re-checked with the target scheme's own verifier.

pub mod ksum;
pub mod rogue;
pub mod wagner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupId;

pub use ksum::{ksum_attack, ksum_attack_cosi, AttackTarget, KSumConfig, KSumForgery, KSumOutcome};
pub use rogue::{rogue_key_forge, RogueKeyAdversary, RogueKeyOutcome};
pub use wagner::{ksum_solve, KSumInstance};

/// Largest toy subgroup order the attack harness accepts.
pub const MAX_ATTACK_Q: u64 = 1 << 20;

/// Machine-readable summary of one attack run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: String,
    pub params: serde_json::Value,
    pub attempts: usize,
    pub successes: usize,
    pub example_forgery_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cosi_accepts: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kvf_accepts: Option<bool>,
}

/// The k-sum harness needs small moduli; the curve backend is refused.
pub fn ensure_attackable(group: GroupId, q: u64) -> Result<()> {
    match group {
        GroupId::Curve => Err(Error::BackendRefused),
        GroupId::Toy if q > MAX_ATTACK_Q => Err(Error::AttackFailure(format!(
            "toy order {q} exceeds the attack limit {MAX_ATTACK_Q}"
        ))),
        GroupId::Toy => Ok(()),
    }
}
