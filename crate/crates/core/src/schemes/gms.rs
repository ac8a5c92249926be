//! GMS: Announcement → Commitment → Challenge → Response, with `X̃` from a
//! standalone key aggregation.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gamma::RESAMPLE_LIMIT;
use crate::group::Group;
use crate::hashing::{hash_to_scalar, HashInput, HashTag};
use crate::tree::{SimSchedule, Tree};

use super::keys::{AggregatedKey, MultiSigKeyPair};
use super::session::{self, message_digest, NonceSeed, SigningRun, SigningSession};
use super::signature::{JointSignature, Scheme};

/// `c = H₀(g₁, Ṽ, X̃)`.
pub fn collective_challenge<G: Group>(grp: &G, v_tilde: &G::Element, x_tilde: &G::Element) -> G::Scalar {
    let input = HashInput::new()
        .element(grp, &grp.generator())
        .element(grp, v_tilde)
        .element(grp, x_tilde);
    hash_to_scalar(grp, HashTag::H0, &input)
}

pub(crate) fn check_keys<G: Group>(tree: &Tree, keys: &[MultiSigKeyPair<G>]) -> Result<()> {
    if keys.len() != tree.len() {
        return Err(Error::KeyCountMismatch {
            expected: tree.len(),
            got: keys.len(),
        });
    }
    Ok(())
}

pub(crate) fn fresh_sessions<G: Group>(scheme: Scheme, keys: &[MultiSigKeyPair<G>]) -> Vec<SigningSession<G>> {
    keys.iter()
        .enumerate()
        .map(|(i, k)| SigningSession::new(scheme, i, k.sk, k.public.y))
        .collect()
}

/// Runs the full GMS protocol over `tree`; `keys[i]` belongs to node `i`.
pub fn gms_sign_run<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    tree: &Tree,
    keys: &[MultiSigKeyPair<G>],
    aggregated: &AggregatedKey<G>,
    m: &[u8],
    rng: &mut R,
    schedule: &SimSchedule,
) -> Result<SigningRun<G>> {
    check_keys(tree, keys)?;
    let mut sessions = fresh_sessions(Scheme::Gms, keys);
    let mut phases = Vec::with_capacity(4);

    let (announced, received) = session::announce(tree, schedule, m)?;
    phases.push(announced);

    for attempt in 1..=RESAMPLE_LIMIT {
        let seed = NonceSeed::draw(rng);
        let committed = session::commit(grp, tree, schedule, &mut sessions, &seed)?;
        phases.push(committed.phase);
        let c = collective_challenge(grp, &committed.v_tilde, &aggregated.x_tilde);
        if grp.is_zero(&c) {
            continue;
        }
        phases.push(session::challenge(grp, tree, schedule, &mut sessions, c)?);
        let (responded, s) = session::respond(grp, tree, schedule, &mut sessions, &received)?;
        phases.push(responded);
        return Ok(SigningRun {
            signature: JointSignature {
                scheme: Scheme::Gms,
                c,
                s,
            },
            phases,
            attempts: attempt,
        });
    }
    Err(Error::ResampleExhausted("collective challenge"))
}

pub fn gms_sign<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    tree: &Tree,
    keys: &[MultiSigKeyPair<G>],
    aggregated: &AggregatedKey<G>,
    m: &[u8],
    rng: &mut R,
) -> Result<JointSignature<G>> {
    gms_sign_run(grp, tree, keys, aggregated, m, rng, &SimSchedule::default()).map(|r| r.signature)
}

/// Accepts iff `c = H₀(g₁, Ṽ, X̃)` for `Ṽ = (g₁^S · X̃^e)^(c⁻¹)`, `e = H₃(m)`.
/// Shared by GMS and AGMS; CoSi-tagged signatures are rejected.
pub fn vf<G: Group>(grp: &G, aggregated: &AggregatedKey<G>, m: &[u8], sig: &JointSignature<G>) -> bool {
    if sig.scheme == Scheme::CoSi {
        return false;
    }
    let Ok(c_inv) = grp.scalar_inv(&sig.c) else {
        return false;
    };
    let e = message_digest(grp, m);
    let v_tilde = grp.multi_exp(&[(grp.generator(), sig.s * c_inv), (aggregated.x_tilde, e * c_inv)]);
    collective_challenge(grp, &v_tilde, &aggregated.x_tilde) == sig.c
}
