//! Key generation with proof of possession, key verification and aggregation.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gamma::RESAMPLE_LIMIT;
use crate::group::Group;
use crate::hashing::{hash_to_scalar, HashInput, HashTag};

/// Self-signature `π = (a, d)` over the public key `y`.
#[derive(Debug, PartialEq, Eq)]
pub struct ProofOfPossession<G: Group> {
    pub a: G::Scalar,
    pub d: G::Scalar,
}

/// `pk = (y, π)`.
#[derive(Debug, PartialEq, Eq)]
pub struct PublicKey<G: Group> {
    pub y: G::Element,
    pub pop: ProofOfPossession<G>,
}

#[derive(Debug, PartialEq, Eq)]
pub struct MultiSigKeyPair<G: Group> {
    pub sk: G::Scalar,
    pub public: PublicKey<G>,
}

impl<G: Group> MultiSigKeyPair<G> {
    pub fn y(&self) -> &G::Element {
        &self.public.y
    }
}

/// `X̃ = ∏ yᵢ` over a multiset of signers.
#[derive(Debug, PartialEq, Eq)]
pub struct AggregatedKey<G: Group> {
    pub x_tilde: G::Element,
    pub member_count: usize,
}

crate::impl_copy!(ProofOfPossession, PublicKey, MultiSigKeyPair, AggregatedKey);

pub(crate) fn pop_commitment_hash<G: Group>(grp: &G, commitment: &G::Element) -> G::Scalar {
    let input = HashInput::new().element(grp, &grp.generator()).element(grp, commitment);
    hash_to_scalar(grp, HashTag::H1, &input)
}

pub(crate) fn key_binding_hash<G: Group>(grp: &G, y: &G::Element) -> G::Scalar {
    hash_to_scalar(grp, HashTag::H2, &HashInput::new().element(grp, y))
}

/// Generates `sk`, `y = g₁^sk` and `π = (a, d)` with
/// `a = H₁(g₁, g₁^r)`, `b = H₂(y)`, `d = r·a − b·sk`.
pub fn kg<G: Group, R: RngCore + ?Sized>(grp: &G, rng: &mut R) -> Result<MultiSigKeyPair<G>> {
    let sk = grp.random_scalar(rng);
    keypair_from_secret(grp, sk, rng)
}

pub fn keypair_from_secret<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    sk: G::Scalar,
    rng: &mut R,
) -> Result<MultiSigKeyPair<G>> {
    let y = grp.exp_g(&sk);
    let pop = prove_possession(grp, &sk, &y, rng)?;
    Ok(MultiSigKeyPair {
        sk,
        public: PublicKey { y, pop },
    })
}

pub(crate) fn prove_possession<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    sk: &G::Scalar,
    y: &G::Element,
    rng: &mut R,
) -> Result<ProofOfPossession<G>> {
    let b = key_binding_hash(grp, y);
    for _ in 0..RESAMPLE_LIMIT {
        let r = grp.random_scalar(rng);
        let a = pop_commitment_hash(grp, &grp.exp_g(&r));
        if grp.is_zero(&a) {
            continue;
        }
        return Ok(ProofOfPossession { a, d: r * a - b * *sk });
    }
    Err(Error::ResampleExhausted("proof of possession"))
}

/// Checks `a = H₁(g₁, V)` with `V = (g₁^d · y^b)^(a⁻¹)` and `b = H₂(y)`.
pub fn kvf<G: Group>(grp: &G, pk: &PublicKey<G>) -> bool {
    let Ok(a_inv) = grp.scalar_inv(&pk.pop.a) else {
        return false;
    };
    let b = key_binding_hash(grp, &pk.y);
    let commitment = grp.multi_exp(&[(grp.generator(), pk.pop.d * a_inv), (pk.y, b * a_inv)]);
    pop_commitment_hash(grp, &commitment) == pk.pop.a
}

/// Multiplies the given public keys. Duplicates are kept.
pub fn kag<G: Group>(grp: &G, ys: &[G::Element]) -> Result<AggregatedKey<G>> {
    if ys.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(AggregatedKey {
        x_tilde: grp.product(ys),
        member_count: ys.len(),
    })
}

/// [`kag`] over full public keys; proofs of possession are not checked here.
pub fn kag_public<G: Group>(grp: &G, pks: &[PublicKey<G>]) -> Result<AggregatedKey<G>> {
    let ys: Vec<_> = pks.iter().map(|pk| pk.y).collect();
    kag(grp, &ys)
}
