//! Per-signer ephemeral state and the tree phase handlers shared by all schemes.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::group::{Group, OpCounts};
use crate::hashing::{hash_to_scalar, HashInput, HashTag};
use crate::tree::{NodeId, Phase, PhaseMessage, PhaseOutcome, SimSchedule, Transcript, Tree};

use super::signature::{JointSignature, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Fresh,
    Committed,
    Challenged,
    Responded,
}

/// One signer's state for a single signing run. Never reusable.
#[derive(Debug, Clone)]
pub struct SigningSession<G: Group> {
    scheme: Scheme,
    node: NodeId,
    sk: G::Scalar,
    y: G::Element,
    v: Option<G::Scalar>,
    big_v: Option<G::Element>,
    v_agg: Option<G::Element>,
    x_agg: Option<G::Element>,
    c: Option<G::Scalar>,
    vc: Option<G::Scalar>,
    state: SessionState,
    consumed: bool,
}

impl<G: Group> SigningSession<G> {
    pub fn new(scheme: Scheme, node: NodeId, sk: G::Scalar, y: G::Element) -> Self {
        SigningSession {
            scheme,
            node,
            sk,
            y,
            v: None,
            big_v: None,
            v_agg: None,
            x_agg: None,
            c: None,
            vc: None,
            state: SessionState::Fresh,
            consumed: false,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    pub fn nonce(&self) -> Option<G::Scalar> {
        self.v
    }

    pub fn commitment(&self) -> Option<G::Element> {
        self.big_v
    }

    /// `Ṽᵢ`, the commitment product over this node's subtree.
    pub fn partial_commitment(&self) -> Option<G::Element> {
        self.v_agg
    }

    /// `X̃ᵢ`, the key product over this node's subtree (AGMS only).
    pub fn partial_key(&self) -> Option<G::Element> {
        self.x_agg
    }

    pub fn challenge(&self) -> Option<G::Scalar> {
        self.c
    }

    /// Precomputed `vᵢ·c` (AGMS only).
    pub fn precomputed_vc(&self) -> Option<G::Scalar> {
        self.vc
    }
}

/// Per-run nonce seed; each node derives its own stream so draws do not
/// depend on the order in which handlers fire.
#[derive(Debug, Clone)]
pub(crate) struct NonceSeed([u8; 32]);

impl NonceSeed {
    pub(crate) fn draw<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        NonceSeed(seed)
    }

    pub(crate) fn node_rng(&self, node: NodeId) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.0);
        rng.set_stream(node as u64);
        rng
    }
}

/// Executed phases of one signing (or partial signing) run.
#[derive(Debug, Clone)]
pub struct SigningRun<G: Group> {
    pub signature: JointSignature<G>,
    pub phases: Vec<PhaseOutcome>,
    /// Commit/challenge rounds performed; more than one only if a zero challenge was resampled.
    pub attempts: usize,
}

impl<G: Group> SigningRun<G> {
    pub fn transcript(&self) -> Transcript {
        let mut t = Transcript::default();
        for p in &self.phases {
            t.extend(p);
        }
        t
    }

    pub fn message_count(&self) -> usize {
        self.phases.iter().map(|p| p.messages.len()).sum()
    }

    /// Operations summed over all nodes and phases.
    pub fn total_ops(&self) -> OpCounts {
        self.phases.iter().map(PhaseOutcome::total_ops).sum()
    }

    /// Per-node operations summed over the phases matching `filter`.
    pub fn node_ops(&self, filter: impl Fn(Phase) -> bool) -> Vec<OpCounts> {
        let n = self.phases.first().map(|p| p.node_ops.len()).unwrap_or(0);
        let mut out = vec![OpCounts::default(); n];
        for p in self.phases.iter().filter(|p| filter(p.phase)) {
            for (acc, ops) in out.iter_mut().zip(&p.node_ops) {
                *acc += *ops;
            }
        }
        out
    }

    pub fn wall(&self) -> std::time::Duration {
        self.phases.iter().map(|p| p.wall).sum()
    }
}

pub(crate) fn message_digest<G: Group>(grp: &G, m: &[u8]) -> G::Scalar {
    hash_to_scalar(grp, HashTag::H3, &HashInput::new().bytes(m))
}

fn parent_payload(inbox: &[PhaseMessage]) -> Result<&[u8]> {
    inbox
        .first()
        .map(|m| m.payload.as_slice())
        .ok_or_else(|| Error::Malformed("no message from parent".into()))
}

fn split_elements<G: Group>(grp: &G, payload: &[u8], count: usize) -> Result<Vec<G::Element>> {
    let len = grp.params().element_len;
    if payload.len() != len * count {
        return Err(Error::Malformed(format!(
            "expected {} bytes of elements, got {}",
            len * count,
            payload.len()
        )));
    }
    payload
        .chunks(len)
        .map(|chunk| grp.decode_element(chunk).map_err(Error::from))
        .collect()
}

pub(crate) fn check_sessions<G: Group>(tree: &Tree, sessions: &[SigningSession<G>]) -> Result<()> {
    if sessions.len() != tree.len() {
        return Err(Error::KeyCountMismatch {
            expected: tree.len(),
            got: sessions.len(),
        });
    }
    if let Some((i, _)) = sessions.iter().enumerate().find(|(i, s)| s.node != *i) {
        return Err(Error::SessionState(format!(
            "session at position {i} belongs to another node"
        )));
    }
    Ok(())
}

/// Top-down distribution of `m`; returns what each node received.
pub(crate) fn announce(tree: &Tree, schedule: &SimSchedule, m: &[u8]) -> Result<(PhaseOutcome, Vec<Vec<u8>>)> {
    let mut received = vec![Vec::new(); tree.len()];
    let outcome = tree.run_phase(Phase::Announce, schedule, |node, inbox| {
        let msg = if node == tree.root() {
            m.to_vec()
        } else {
            parent_payload(inbox)?.to_vec()
        };
        received[node] = msg.clone();
        Ok(msg)
    })?;
    Ok((outcome, received))
}

pub(crate) struct CommitOutcome<G: Group> {
    pub phase: PhaseOutcome,
    pub v_tilde: G::Element,
    pub x_tilde: Option<G::Element>,
}

/// Bottom-up commitment: `Ṽᵢ = Vᵢ · ∏ Ṽᵢⱼ`, and for AGMS also `X̃ᵢ = yᵢ · ∏ X̃ᵢⱼ`.
pub(crate) fn commit<G: Group>(
    grp: &G,
    tree: &Tree,
    schedule: &SimSchedule,
    sessions: &mut [SigningSession<G>],
    seed: &NonceSeed,
) -> Result<CommitOutcome<G>> {
    let phase = tree.run_phase(Phase::Commit, schedule, |node, inbox| {
        let session = &mut sessions[node];
        if !matches!(session.state, SessionState::Fresh | SessionState::Committed) || session.consumed {
            return Err(Error::SessionState(format!(
                "node {node} cannot commit in {:?}",
                session.state
            )));
        }
        let with_keys = session.scheme == Scheme::Agms;
        let width = if with_keys { 2 } else { 1 };
        let v = grp.random_scalar(&mut seed.node_rng(node));
        let big_v = grp.exp_g(&v);
        let mut v_agg = big_v;
        let mut x_agg = session.y;
        for msg in inbox {
            let parts = split_elements(grp, &msg.payload, width)?;
            v_agg = grp.mul(&v_agg, &parts[0]);
            if with_keys {
                x_agg = grp.mul(&x_agg, &parts[1]);
            }
        }
        session.v = Some(v);
        session.big_v = Some(big_v);
        session.v_agg = Some(v_agg);
        session.x_agg = with_keys.then_some(x_agg);
        session.c = None;
        session.vc = None;
        session.state = SessionState::Committed;
        let mut out = grp.encode_element(&v_agg);
        if with_keys {
            out.extend(grp.encode_element(&x_agg));
        }
        Ok(out)
    })?;
    let root = &sessions[tree.root()];
    let v_tilde = root.v_agg.expect("root committed");
    let x_tilde = root.x_agg;
    Ok(CommitOutcome {
        phase,
        v_tilde,
        x_tilde,
    })
}

/// Top-down distribution of `c`. AGMS signers precompute `vᵢ·c` here.
pub(crate) fn challenge<G: Group>(
    grp: &G,
    tree: &Tree,
    schedule: &SimSchedule,
    sessions: &mut [SigningSession<G>],
    c: G::Scalar,
) -> Result<PhaseOutcome> {
    tree.run_phase(Phase::Challenge, schedule, |node, inbox| {
        let session = &mut sessions[node];
        if session.state != SessionState::Committed {
            return Err(Error::SessionState(format!("node {node} has not committed")));
        }
        let c_node = if node == tree.root() {
            c
        } else {
            grp.decode_scalar(parent_payload(inbox)?)?
        };
        session.c = Some(c_node);
        if session.scheme == Scheme::Agms {
            session.vc = Some(session.v.expect("committed") * c_node);
        }
        session.state = SessionState::Challenged;
        Ok(grp.encode_scalar(&c_node))
    })
}

/// Bottom-up response: `s̃ᵢ = sᵢ + Σ s̃ᵢⱼ` with the per-scheme `sᵢ`:
/// CoSi `vᵢ + c·skᵢ`, GMS `vᵢ·c − e·skᵢ`, AGMS `(vᵢ·c) − e·skᵢ`, `e = H₃(m)`.
pub(crate) fn respond<G: Group>(
    grp: &G,
    tree: &Tree,
    schedule: &SimSchedule,
    sessions: &mut [SigningSession<G>],
    received: &[Vec<u8>],
) -> Result<(PhaseOutcome, G::Scalar)> {
    let phase = tree.run_phase(Phase::Respond, schedule, |node, inbox| {
        let session = &mut sessions[node];
        if session.consumed {
            return Err(Error::NonceReuse);
        }
        if session.state != SessionState::Challenged {
            return Err(Error::SessionState(format!("node {node} has no challenge")));
        }
        session.consumed = true;
        session.state = SessionState::Responded;
        let v = session.v.expect("committed");
        let c = session.c.expect("challenged");
        let s = match session.scheme {
            Scheme::CoSi => v + c * session.sk,
            Scheme::Gms => v * c - message_digest(grp, &received[node]) * session.sk,
            Scheme::Agms => session.vc.expect("precomputed") - message_digest(grp, &received[node]) * session.sk,
        };
        let mut acc = s;
        for msg in inbox {
            acc = acc + grp.decode_scalar(&msg.payload)?;
        }
        Ok(grp.encode_scalar(&acc))
    })?;
    let s_total = grp.decode_scalar(&phase.root_output)?;
    Ok((phase, s_total))
}
