//! Rogue-key forgery against naive key aggregation.
//!
//! The adversary publishes `y₁ = g₁^sk₁ · (∏ᵢ₌₂ yᵢ)⁻¹`, so the naive aggregate
//! collapses to `g₁^sk₁` and a single-signer CoSi signature under `sk₁`
//! verifies as a joint signature of the whole set. Without the discrete log
//! of `y₁` it cannot produce a proof of possession that passes [`kvf`].

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gamma::RESAMPLE_LIMIT;
use crate::group::Group;
use crate::schemes::keys::{pop_commitment_hash, prove_possession};
use crate::schemes::{
    cosi_challenge, cosi_vf, kag, kvf, AggregatedKey, JointSignature, ProofOfPossession, PublicKey, Scheme,
};

#[derive(Debug, Clone)]
pub struct RogueKeyAdversary<G: Group> {
    pub honest_ys: Vec<G::Element>,
    pub adversary_sk: G::Scalar,
    pub rogue_y: G::Element,
}

impl<G: Group> RogueKeyAdversary<G> {
    pub fn new(grp: &G, honest_ys: &[G::Element], adversary_sk: G::Scalar) -> Self {
        let honest_product = grp.product(honest_ys);
        let rogue_y = grp.mul(&grp.exp_g(&adversary_sk), &grp.element_inv(&honest_product));
        RogueKeyAdversary {
            honest_ys: honest_ys.to_vec(),
            adversary_sk,
            rogue_y,
        }
    }

    /// Naive product of the rogue key and every honest key.
    pub fn aggregate(&self, grp: &G) -> AggregatedKey<G> {
        let mut ys = Vec::with_capacity(self.honest_ys.len() + 1);
        ys.push(self.rogue_y);
        ys.extend_from_slice(&self.honest_ys);
        kag(grp, &ys).expect("non-empty")
    }

    /// CoSi signature on `m` produced by the adversary alone.
    pub fn forge<R: RngCore + ?Sized>(&self, grp: &G, m: &[u8], rng: &mut R) -> Result<JointSignature<G>> {
        for _ in 0..RESAMPLE_LIMIT {
            let v = grp.random_scalar(rng);
            let c = cosi_challenge(grp, &grp.exp_g(&v), m);
            if grp.is_zero(&c) {
                continue;
            }
            return Ok(JointSignature {
                scheme: Scheme::CoSi,
                c,
                s: v + c * self.adversary_sk,
            });
        }
        Err(Error::ResampleExhausted("rogue-key forgery challenge"))
    }

    /// One fabricated proof of possession for `rogue_y`; strategies rotate with `attempt`.
    pub fn fabricate_pop<R: RngCore + ?Sized>(&self, grp: &G, attempt: usize, rng: &mut R) -> ProofOfPossession<G> {
        match attempt % 3 {
            // uniformly random pair
            0 => ProofOfPossession {
                a: grp.random_scalar(rng),
                d: grp.random_scalar(rng),
            },
            // an honest proof made with sk₁, which is not the log of y₁
            1 => prove_possession(grp, &self.adversary_sk, &self.rogue_y, rng).unwrap_or(ProofOfPossession {
                a: grp.scalar_one(),
                d: grp.scalar_one(),
            }),
            // pick d, guess a, then re-derive a from the implied commitment
            _ => {
                let d = grp.random_scalar(rng);
                let guess = grp.random_scalar(rng);
                let b = crate::schemes::keys::key_binding_hash(grp, &self.rogue_y);
                let inv = grp.scalar_inv(&guess).expect("nonzero sample");
                let commitment = grp.multi_exp(&[(grp.generator(), d * inv), (self.rogue_y, b * inv)]);
                ProofOfPossession {
                    a: pop_commitment_hash(grp, &commitment),
                    d,
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RogueKeyOutcome<G: Group> {
    pub rogue_y: G::Element,
    pub aggregated: AggregatedKey<G>,
    pub message: Vec<u8>,
    pub forgery: JointSignature<G>,
    pub cosi_accepts: bool,
    pub pop_attempts: usize,
    pub pop_accepts: usize,
}

/// Builds the rogue key, forges a CoSi joint signature on `m`, and tries
/// `pop_attempts` fabricated proofs of possession against [`kvf`].
pub fn rogue_key_forge<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    honest_ys: &[G::Element],
    adversary_sk: G::Scalar,
    m: &[u8],
    pop_attempts: usize,
    rng: &mut R,
) -> Result<RogueKeyOutcome<G>> {
    if honest_ys.is_empty() {
        return Err(Error::EmptySet);
    }
    let adversary = RogueKeyAdversary::new(grp, honest_ys, adversary_sk);
    let aggregated = adversary.aggregate(grp);
    let forgery = adversary.forge(grp, m, rng)?;
    let cosi_accepts = cosi_vf(grp, &aggregated, m, &forgery);
    let pop_accepts = (0..pop_attempts)
        .filter(|&i| {
            let pk = PublicKey {
                y: adversary.rogue_y,
                pop: adversary.fabricate_pop(grp, i, rng),
            };
            kvf(grp, &pk)
        })
        .count();
    Ok(RogueKeyOutcome {
        rogue_y: adversary.rogue_y,
        aggregated,
        message: m.to_vec(),
        forgery,
        cosi_accepts,
        pop_attempts,
        pop_accepts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Ristretto255, ToyGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn toy_rogue_key_values() {
        let grp = ToyGroup::default();
        let y2 = grp.exp_g(&grp.scalar(3));
        assert_eq!(y2.value(), 8);
        let adv = RogueKeyAdversary::new(&grp, &[y2], grp.scalar(2));
        assert_eq!(adv.rogue_y.value(), 12);
        assert_eq!(adv.aggregate(&grp).x_tilde.value(), 4);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sig = adv.forge(&grp, b"pay the adversary", &mut rng).unwrap();
        assert!(cosi_vf(&grp, &adv.aggregate(&grp), b"pay the adversary", &sig));
    }

    #[test]
    fn curve_forgery_accepted_but_pop_rejected() {
        let grp = Ristretto255::new();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let honest: Vec<_> = (0..5).map(|_| grp.exp_g(&grp.random_scalar(&mut rng))).collect();
        let sk1 = grp.random_scalar(&mut rng);
        let out = rogue_key_forge(&grp, &honest, sk1, b"m", 100, &mut rng).unwrap();
        assert!(out.cosi_accepts);
        assert_eq!(out.pop_accepts, 0);
        assert_eq!(out.aggregated.x_tilde, grp.exp_g(&sk1));
    }
}
