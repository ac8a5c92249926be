//! CoSi baseline: tree Schnorr with `c = H₀(Ṽ, m)`, `sᵢ = vᵢ + c·skᵢ`, and
//! naive key aggregation (no proof of possession).

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gamma::RESAMPLE_LIMIT;
use crate::group::Group;
use crate::hashing::{hash_to_scalar, HashInput, HashTag};
use crate::tree::{SimSchedule, Tree};

use super::keys::AggregatedKey;
use super::session::{self, NonceSeed, SigningRun, SigningSession};
use super::signature::{JointSignature, Scheme};

/// `c = H₀(Ṽ, m)`.
pub fn cosi_challenge<G: Group>(grp: &G, v_tilde: &G::Element, m: &[u8]) -> G::Scalar {
    let input = HashInput::new().element(grp, v_tilde).bytes(m);
    hash_to_scalar(grp, HashTag::H0, &input)
}

/// Runs CoSi over `tree` with `secret_keys[i]` held by node `i`.
pub fn cosi_sign_run<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    tree: &Tree,
    secret_keys: &[G::Scalar],
    m: &[u8],
    rng: &mut R,
    schedule: &SimSchedule,
) -> Result<SigningRun<G>> {
    if secret_keys.len() != tree.len() {
        return Err(Error::KeyCountMismatch {
            expected: tree.len(),
            got: secret_keys.len(),
        });
    }
    let mut sessions = cosi_sessions(grp, secret_keys);
    let mut phases = Vec::with_capacity(4);
    let (announced, received) = session::announce(tree, schedule, m)?;
    phases.push(announced);

    for attempt in 1..=RESAMPLE_LIMIT {
        let seed = NonceSeed::draw(rng);
        let committed = session::commit(grp, tree, schedule, &mut sessions, &seed)?;
        phases.push(committed.phase);
        let c = cosi_challenge(grp, &committed.v_tilde, m);
        if grp.is_zero(&c) {
            continue;
        }
        phases.push(session::challenge(grp, tree, schedule, &mut sessions, c)?);
        let (responded, s) = session::respond(grp, tree, schedule, &mut sessions, &received)?;
        phases.push(responded);
        return Ok(SigningRun {
            signature: JointSignature {
                scheme: Scheme::CoSi,
                c,
                s,
            },
            phases,
            attempts: attempt,
        });
    }
    Err(Error::ResampleExhausted("collective challenge"))
}

pub fn cosi_sign<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    tree: &Tree,
    secret_keys: &[G::Scalar],
    m: &[u8],
    rng: &mut R,
) -> Result<JointSignature<G>> {
    cosi_sign_run(grp, tree, secret_keys, m, rng, &SimSchedule::default()).map(|r| r.signature)
}

pub(crate) fn cosi_sessions<G: Group>(grp: &G, secret_keys: &[G::Scalar]) -> Vec<SigningSession<G>> {
    // CoSi nodes never aggregate keys in-protocol, so the public key slot is unused.
    secret_keys
        .iter()
        .enumerate()
        .map(|(i, sk)| SigningSession::new(Scheme::CoSi, i, *sk, grp.identity()))
        .collect()
}

/// Accepts iff `H₀(g₁^S · X̃^(−c), m) = c`.
pub fn cosi_vf<G: Group>(grp: &G, aggregated: &AggregatedKey<G>, m: &[u8], sig: &JointSignature<G>) -> bool {
    if sig.scheme != Scheme::CoSi || grp.is_zero(&sig.c) {
        return false;
    }
    let v_tilde = grp.multi_exp(&[(grp.generator(), sig.s), (aggregated.x_tilde, -sig.c)]);
    cosi_challenge(grp, &v_tilde, m) == sig.c
}
