//! Simulated Fabric-style endorsement, default versus revised.
//!
//! The revised flow arranges the endorsers in a tree under the client and
//! endorses with one AGMS joint signature:
//!
//! 1. Synchronization — Commitment, Challenge and in-tree key aggregation.
//! 2. Proposal — the client announces `m`.
//! 3. Endorsement — every endorser checks the client key with KVf and runs
//!    the chaincode stub.
//! 4. Proposal response — the Response phase yields `(c, S)`.
//! 5. Submission, 6. ordering into a block, 7. one `Vf` per peer.
//!
//! The default flow has each endorser produce its own Gamma signature and
//! Step 7 checks all of them. Steps 2–4 are timed together because the
//! announcement and response run in a single online call.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::RngCore;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gamma::{gamma_sign, gamma_vf, GammaKeyPair, GammaSignature};
use crate::group::counter::measure;
use crate::group::{Group, OpCounts};
use crate::schemes::{
    agms_offline, agms_online, kg, kvf, vf, AggregatedKey, JointSignature, MultiSigKeyPair, PublicKey,
};
use crate::tree::{SimSchedule, Tree};

/// Tree depth used to place the endorsers under the client.
pub const ENDORSEMENT_TREE_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Client,
    Endorser,
    Orderer,
    PeerNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Actor {
    pub role: Role,
    pub id: usize,
}

/// "AND" of `required_endorsers` endorsements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndorsementPolicy {
    pub required_endorsers: usize,
}

impl EndorsementPolicy {
    pub fn and_of(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::PolicyUnsatisfied("policy needs at least one endorser".into()));
        }
        Ok(EndorsementPolicy { required_endorsers: n })
    }

    fn check(&self, endorsers: usize) -> Result<()> {
        if endorsers != self.required_endorsers {
            return Err(Error::PolicyUnsatisfied(format!(
                "AND of {} endorsers, got {endorsers}",
                self.required_endorsers
            )));
        }
        Ok(())
    }
}

/// Certificate authority: keys are admitted only after KVf accepts them.
#[derive(Debug, Clone)]
pub struct CaRegistry<G: Group> {
    admitted: Vec<(Actor, PublicKey<G>)>,
}

impl<G: Group> Default for CaRegistry<G> {
    fn default() -> Self {
        CaRegistry { admitted: Vec::new() }
    }
}

impl<G: Group> CaRegistry<G> {
    pub fn register(&mut self, grp: &G, actor: Actor, pk: PublicKey<G>) -> Result<()> {
        if !kvf(grp, &pk) {
            return Err(match actor.role {
                Role::Client => Error::InvalidClient,
                _ => Error::PolicyUnsatisfied(format!("{:?} {} failed key verification", actor.role, actor.id)),
            });
        }
        self.admitted.push((actor, pk));
        Ok(())
    }

    pub fn is_admitted(&self, pk: &PublicKey<G>) -> bool {
        self.admitted
            .iter()
            .any(|(_, k)| k.y == pk.y && k.pop.a == pk.pop.a && k.pop.d == pk.pop.d)
    }

    pub fn len(&self) -> usize {
        self.admitted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.admitted.is_empty()
    }
}

/// Client and endorser keys for the revised flow.
#[derive(Debug, Clone)]
pub struct Participants<G: Group> {
    pub client: MultiSigKeyPair<G>,
    pub endorsers: Vec<MultiSigKeyPair<G>>,
}

impl<G: Group> Participants<G> {
    /// Fresh keys for one client and `n` endorsers, each admitted by `ca`.
    pub fn enroll<R: RngCore + ?Sized>(grp: &G, n: usize, ca: &mut CaRegistry<G>, rng: &mut R) -> Result<Self> {
        let client = kg(grp, rng)?;
        ca.register(
            grp,
            Actor {
                role: Role::Client,
                id: 0,
            },
            client.public,
        )?;
        let mut endorsers = Vec::with_capacity(n);
        for id in 1..=n {
            let kp = kg(grp, rng)?;
            ca.register(
                grp,
                Actor {
                    role: Role::Endorser,
                    id,
                },
                kp.public,
            )?;
            endorsers.push(kp);
        }
        Ok(Participants { client, endorsers })
    }

    /// Node `0` is the client; endorser `i` sits at node `i + 1`.
    pub fn tree_keys(&self) -> Vec<MultiSigKeyPair<G>> {
        std::iter::once(self.client)
            .chain(self.endorsers.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flow {
    Default,
    Revised,
}

impl Flow {
    pub fn name(self) -> &'static str {
        match self {
            Flow::Default => "default",
            Flow::Revised => "revised",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepMetrics {
    pub step: &'static str,
    /// Message-independent work that can run ahead of the transaction.
    pub offline: bool,
    pub wall_ns: u128,
    pub ops: OpCounts,
    pub verify_calls: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone)]
pub enum Endorsements<G: Group> {
    Joint {
        aggregated: AggregatedKey<G>,
        signature: JointSignature<G>,
    },
    Individual(Vec<(G::Element, GammaSignature<G>)>),
}

impl<G: Group> Endorsements<G> {
    pub fn signature_count(&self) -> usize {
        match self {
            Endorsements::Joint { .. } => 1,
            Endorsements::Individual(list) => list.len(),
        }
    }

    /// Serialized signatures only (no keys, no payload).
    pub fn signature_bytes(&self, grp: &G) -> Vec<u8> {
        match self {
            Endorsements::Joint { signature, .. } => signature.to_bytes(grp),
            Endorsements::Individual(list) => list.iter().flat_map(|(_, s)| s.to_bytes(grp)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransactionRecord<G: Group> {
    pub flow: Flow,
    pub payload: Vec<u8>,
    /// Chaincode stub output.
    pub rw_set_hash: [u8; 32],
    pub endorsements: Endorsements<G>,
    pub steps: Vec<StepMetrics>,
}

impl<G: Group> TransactionRecord<G> {
    pub fn step(&self, name: &str) -> Option<&StepMetrics> {
        self.steps.iter().find(|s| s.step == name)
    }

    /// Verification calls made while updating the ledger.
    pub fn ledger_verify_calls(&self) -> usize {
        self.step("7").map_or(0, |s| s.verify_calls)
    }

    /// Steps 5–7 folded into one metrics entry.
    pub fn submission_to_ledger(&self) -> StepMetrics {
        let mut out = StepMetrics {
            step: "5-7",
            offline: false,
            wall_ns: 0,
            ops: OpCounts::default(),
            verify_calls: 0,
            bytes: 0,
        };
        for s in self.steps.iter().filter(|s| matches!(s.step, "5" | "6" | "7")) {
            out.wall_ns += s.wall_ns;
            out.ops += s.ops;
            out.verify_calls += s.verify_calls;
            out.bytes = out.bytes.max(s.bytes);
        }
        out
    }

    /// Envelope as submitted to the orderer: payload, rw-set hash, endorsements.
    pub fn envelope_bytes(&self, grp: &G) -> Vec<u8> {
        let mut out = Vec::new();
        for part in [
            &self.payload[..],
            &self.rw_set_hash[..],
            &self.endorsements.signature_bytes(grp),
        ] {
            out.extend_from_slice(&(part.len() as u32).to_be_bytes());
            out.extend_from_slice(part);
        }
        out
    }

    pub fn to_json(&self, grp: &G) -> serde_json::Value {
        let endorsements = match &self.endorsements {
            Endorsements::Joint { aggregated, signature } => serde_json::json!({
                "aggregated_key": hex::encode(grp.encode_element(&aggregated.x_tilde)),
                "members": aggregated.member_count,
                "signature": hex::encode(signature.to_bytes(grp)),
            }),
            Endorsements::Individual(list) => serde_json::json!(list
                .iter()
                .map(|(pk, s)| serde_json::json!({
                    "pk": hex::encode(grp.encode_element(pk)),
                    "signature": hex::encode(s.to_bytes(grp)),
                }))
                .collect::<Vec<_>>()),
        };
        serde_json::json!({
            "flow": self.flow,
            "payload": hex::encode(&self.payload),
            "rw_set_hash": hex::encode(self.rw_set_hash),
            "endorsements": endorsements,
            "steps": self.steps,
        })
    }
}

/// Ordered transactions with a hash link to the previous block.
#[derive(Debug, Clone)]
pub struct Block<G: Group> {
    pub number: u64,
    pub previous_hash: [u8; 32],
    pub transactions: Vec<TransactionRecord<G>>,
}

impl<G: Group> Block<G> {
    pub fn hash(&self, grp: &G) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.number.to_be_bytes());
        h.update(self.previous_hash);
        for tx in &self.transactions {
            h.update(tx.envelope_bytes(grp));
        }
        h.finalize().into()
    }
}

/// Deterministic stand-in for chaincode execution.
pub fn chaincode_stub(payload: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"rw-set");
    h.update(payload);
    h.finalize().into()
}

/// Step 6: the orderer packs transactions into a block.
pub fn order_block<G: Group>(
    number: u64,
    previous_hash: [u8; 32],
    transactions: Vec<TransactionRecord<G>>,
) -> Block<G> {
    Block {
        number,
        previous_hash,
        transactions,
    }
}

/// Step 7 at one peer. Returns the number of verification calls made.
pub fn validate_block<G: Group>(grp: &G, block: &Block<G>) -> Result<usize> {
    let mut calls = 0;
    for (i, tx) in block.transactions.iter().enumerate() {
        if chaincode_stub(&tx.payload) != tx.rw_set_hash {
            return Err(Error::PolicyUnsatisfied(format!(
                "transaction {i}: read/write set mismatch"
            )));
        }
        let ok = match &tx.endorsements {
            Endorsements::Joint { aggregated, signature } => {
                calls += 1;
                vf(grp, aggregated, &tx.payload, signature)
            }
            Endorsements::Individual(list) => list.iter().all(|(pk, s)| {
                calls += 1;
                gamma_vf(grp, pk, &tx.payload, s)
            }),
        };
        if !ok {
            return Err(Error::PolicyUnsatisfied(format!(
                "transaction {i}: endorsement rejected"
            )));
        }
    }
    Ok(calls)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, OpCounts, Duration)> {
    let start = Instant::now();
    let (out, ops) = measure(f);
    Ok((out?, ops, start.elapsed()))
}

fn metrics(
    step: &'static str,
    offline: bool,
    ops: OpCounts,
    wall: Duration,
    verify_calls: usize,
    bytes: usize,
) -> StepMetrics {
    StepMetrics {
        step,
        offline,
        wall_ns: wall.as_nanos(),
        ops,
        verify_calls,
        bytes,
    }
}

/// Steps 5–7 shared by both flows; appends their metrics to `record`.
fn submit_order_validate<G: Group>(grp: &G, mut record: TransactionRecord<G>) -> Result<TransactionRecord<G>> {
    let (envelope, ops5, wall5) = timed(|| Ok(record.envelope_bytes(grp)))?;
    let (block, ops6, wall6) = timed(|| Ok(order_block(0, [0u8; 32], vec![record.clone()])))?;
    let (calls, ops7, wall7) = timed(|| validate_block(grp, &block))?;
    let sig_bytes = record.endorsements.signature_bytes(grp).len();
    record.steps.push(metrics("5", false, ops5, wall5, 0, envelope.len()));
    record.steps.push(metrics("6", false, ops6, wall6, 0, envelope.len()));
    record.steps.push(metrics("7", false, ops7, wall7, calls, sig_bytes));
    Ok(record)
}

fn endorser_failure(e: Error) -> Error {
    match e {
        Error::PolicyUnsatisfied(_) | Error::InvalidClient => e,
        other => Error::PolicyUnsatisfied(format!("endorser handler failed: {other}")),
    }
}

/// Revised flow over already enrolled participants.
pub fn run_revised_flow_with<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    participants: &Participants<G>,
    policy: EndorsementPolicy,
    m: &[u8],
    rng: &mut R,
) -> Result<TransactionRecord<G>> {
    policy.check(participants.endorsers.len())?;
    let tree = Tree::for_signers(participants.endorsers.len() + 1, ENDORSEMENT_TREE_DEPTH)?;
    let keys = participants.tree_keys();
    let schedule = SimSchedule::default();
    let mut steps = Vec::with_capacity(7);

    let (mut offline, ops1, wall1) =
        timed(|| agms_offline(grp, &tree, &keys, rng, &schedule).map_err(endorser_failure))?;
    steps.push(metrics("1", true, ops1, wall1, 0, 0));

    let client_pk = participants.client.public;
    let ((rw_set_hash, run), ops24, wall24) = timed(|| {
        // Step 3 checks happen at every endorser before it responds.
        for _ in &participants.endorsers {
            if !kvf(grp, &client_pk) {
                return Err(Error::InvalidClient);
            }
        }
        let rw = chaincode_stub(m);
        let run = agms_online(grp, &tree, &mut offline.sessions, m, &schedule).map_err(endorser_failure)?;
        Ok((rw, run))
    })?;
    let endorsements = Endorsements::Joint {
        aggregated: offline.aggregated_key,
        signature: run.signature,
    };
    let sig_len = endorsements.signature_bytes(grp).len();
    steps.push(metrics(
        "2-4",
        false,
        ops24,
        wall24,
        participants.endorsers.len(),
        sig_len,
    ));

    submit_order_validate(
        grp,
        TransactionRecord {
            flow: Flow::Revised,
            payload: m.to_vec(),
            rw_set_hash,
            endorsements,
            steps,
        },
    )
}

/// Enrolls a client and `n_endorsers` endorsers, then runs the revised flow.
pub fn run_revised_flow<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    n_endorsers: usize,
    m: &[u8],
    rng: &mut R,
) -> Result<TransactionRecord<G>> {
    let policy = EndorsementPolicy::and_of(n_endorsers)?;
    let participants = Participants::enroll(grp, n_endorsers, &mut CaRegistry::default(), rng)?;
    run_revised_flow_with(grp, &participants, policy, m, rng)
}

/// Default flow: one Gamma signature per endorser, all checked in Step 7.
pub fn run_default_flow_with<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    endorsers: &[GammaKeyPair<G>],
    policy: EndorsementPolicy,
    m: &[u8],
    rng: &mut R,
) -> Result<TransactionRecord<G>> {
    policy.check(endorsers.len())?;
    let ((rw_set_hash, sigs), ops24, wall24) = timed(|| {
        let rw = chaincode_stub(m);
        let sigs = endorsers
            .iter()
            .map(|kp| gamma_sign(grp, kp, m, rng).map(|s| (kp.pk, s)))
            .collect::<Result<Vec<_>>>()
            .map_err(endorser_failure)?;
        Ok((rw, sigs))
    })?;
    let endorsements = Endorsements::Individual(sigs);
    let sig_len = endorsements.signature_bytes(grp).len();
    submit_order_validate(
        grp,
        TransactionRecord {
            flow: Flow::Default,
            payload: m.to_vec(),
            rw_set_hash,
            endorsements,
            steps: vec![metrics("2-4", false, ops24, wall24, 0, sig_len)],
        },
    )
}

pub fn run_default_flow<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    n_endorsers: usize,
    m: &[u8],
    rng: &mut R,
) -> Result<TransactionRecord<G>> {
    let policy = EndorsementPolicy::and_of(n_endorsers)?;
    let endorsers: Vec<_> = (0..n_endorsers).map(|_| GammaKeyPair::generate(grp, rng)).collect();
    run_default_flow_with(grp, &endorsers, policy, m, rng)
}

/// One summary row per flow and endorser count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub flow: Flow,
    pub n_endorsers: usize,
    pub step: &'static str,
    pub wall_ns: u128,
    pub exp_count: u64,
    pub verify_calls: usize,
    pub bytes: usize,
}

pub const COMPARISON_CSV_HEADER: &str = "flow,n_endorsers,step,wall_ns,exp_count,verify_calls,bytes";

#[derive(Debug, Clone)]
pub struct FlowComparison<G: Group> {
    pub records: Vec<(usize, TransactionRecord<G>, TransactionRecord<G>)>,
}

impl<G: Group> FlowComparison<G> {
    /// Steps 5–7 per flow and `N`: `2 × |n_list|` rows.
    pub fn rows(&self) -> Vec<ComparisonRow> {
        self.records
            .iter()
            .flat_map(|(n, default, revised)| [default, revised].map(|r| row(*n, r.flow, &r.submission_to_ledger())))
            .collect()
    }

    /// Every recorded step, Step 1 included (its row carries the offline flag in `step`).
    pub fn detailed_rows(&self) -> Vec<ComparisonRow> {
        self.records
            .iter()
            .flat_map(|(n, default, revised)| {
                [default, revised]
                    .into_iter()
                    .flat_map(move |r| r.steps.iter().map(move |s| row(*n, r.flow, s)))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        csv(&self.rows())
    }

    pub fn detailed_csv(&self) -> String {
        csv(&self.detailed_rows())
    }
}

fn row(n: usize, flow: Flow, s: &StepMetrics) -> ComparisonRow {
    ComparisonRow {
        flow,
        n_endorsers: n,
        step: if s.offline { "1-offline" } else { s.step },
        wall_ns: s.wall_ns,
        exp_count: s.ops.exp_equivalents(),
        verify_calls: s.verify_calls,
        bytes: s.bytes,
    }
}

fn csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.flow.name(),
            r.n_endorsers,
            r.step,
            r.wall_ns,
            r.exp_count,
            r.verify_calls,
            r.bytes
        );
    }
    out
}

/// Runs both flows for every `N` in `n_list`.
pub fn compare_flows<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    n_list: &[usize],
    m: &[u8],
    rng: &mut R,
) -> Result<FlowComparison<G>> {
    let records = n_list
        .iter()
        .map(|&n| {
            let default = run_default_flow(grp, n, m, rng)?;
            let revised = run_revised_flow(grp, n, m, rng)?;
            Ok((n, default, revised))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowComparison { records })
}
