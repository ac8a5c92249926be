//! AGMS: the GMS phases reordered so that Commitment and Challenge (and the
//! key aggregation) run before the message is known. Online signing is then
//! Announcement plus a Response that needs no exponentiation.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gamma::RESAMPLE_LIMIT;
use crate::group::Group;
use crate::tree::{PhaseOutcome, SimSchedule, Tree};

use super::gms::{check_keys, collective_challenge, fresh_sessions};
use super::keys::{AggregatedKey, MultiSigKeyPair};
use super::session::{self, check_sessions, NonceSeed, SessionState, SigningRun, SigningSession};
use super::signature::{JointSignature, Scheme};

/// Result of the message-independent phases.
#[derive(Debug, Clone)]
pub struct AgmsOffline<G: Group> {
    /// One session per node, indexed by node id.
    pub sessions: Vec<SigningSession<G>>,
    /// `X̃` as aggregated up the tree by the Commitment phase.
    pub aggregated_key: AggregatedKey<G>,
    /// Collective challenge held by the leader.
    pub challenge: G::Scalar,
    pub phases: Vec<PhaseOutcome>,
    pub attempts: usize,
}

pub fn agms_offline<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    tree: &Tree,
    keys: &[MultiSigKeyPair<G>],
    rng: &mut R,
    schedule: &SimSchedule,
) -> Result<AgmsOffline<G>> {
    check_keys(tree, keys)?;
    let mut sessions = fresh_sessions(Scheme::Agms, keys);
    let mut phases = Vec::with_capacity(2);

    for attempt in 1..=RESAMPLE_LIMIT {
        let seed = NonceSeed::draw(rng);
        let committed = session::commit(grp, tree, schedule, &mut sessions, &seed)?;
        phases.push(committed.phase);
        let x_tilde = committed.x_tilde.expect("AGMS commitment aggregates keys");
        let c = collective_challenge(grp, &committed.v_tilde, &x_tilde);
        if grp.is_zero(&c) {
            continue;
        }
        phases.push(session::challenge(grp, tree, schedule, &mut sessions, c)?);
        return Ok(AgmsOffline {
            sessions,
            aggregated_key: AggregatedKey {
                x_tilde,
                member_count: tree.len(),
            },
            challenge: c,
            phases,
            attempts: attempt,
        });
    }
    Err(Error::ResampleExhausted("collective challenge"))
}

/// Announces `m` and runs the Response phase over precomputed sessions.
pub fn agms_online<G: Group>(
    grp: &G,
    tree: &Tree,
    sessions: &mut [SigningSession<G>],
    m: &[u8],
    schedule: &SimSchedule,
) -> Result<SigningRun<G>> {
    check_sessions(tree, sessions)?;
    if sessions.iter().any(|s| s.is_consumed()) {
        return Err(Error::NonceReuse);
    }
    if let Some(s) = sessions
        .iter()
        .find(|s| s.scheme() != Scheme::Agms || s.state() != SessionState::Challenged)
    {
        return Err(Error::SessionState(format!(
            "node {} is not a challenged AGMS session",
            s.node()
        )));
    }
    let c = sessions[tree.root()].challenge().expect("challenged");
    if sessions.iter().any(|s| s.challenge() != Some(c)) {
        return Err(Error::MixedSessions);
    }

    let (announced, received) = session::announce(tree, schedule, m)?;
    let (responded, s) = session::respond(grp, tree, schedule, sessions, &received)?;
    Ok(SigningRun {
        signature: JointSignature {
            scheme: Scheme::Agms,
            c,
            s,
        },
        phases: vec![announced, responded],
        attempts: 1,
    })
}

/// Offline and online phases back to back.
pub fn agms_sign<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    tree: &Tree,
    keys: &[MultiSigKeyPair<G>],
    m: &[u8],
    rng: &mut R,
) -> Result<(AggregatedKey<G>, JointSignature<G>)> {
    let schedule = SimSchedule::default();
    let mut offline = agms_offline(grp, tree, keys, rng, &schedule)?;
    let run = agms_online(grp, tree, &mut offline.sessions, m, &schedule)?;
    Ok((offline.aggregated_key, run.signature))
}
