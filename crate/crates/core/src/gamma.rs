//! Single-signer Gamma signatures with an explicit offline/online split.
//!
//! Offline: `v ← [1, q−1]`, `V = g₁^v`, `c = H₀(V, pk)`, `vc = v·c`.
//! Online:  `e = H₁(m)`, `s = vc − e·sk`.
//! Verify:  `V = (g₁^s · pk^e)^(c⁻¹)` and accept iff `H₀(V, pk) = c`.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::hashing::{hash_to_scalar, HashInput, HashTag};

pub(crate) const RESAMPLE_LIMIT: usize = 64;

#[derive(Debug, PartialEq, Eq)]
pub struct GammaKeyPair<G: Group> {
    pub sk: G::Scalar,
    pub pk: G::Element,
}

crate::impl_copy!(GammaKeyPair);

impl<G: Group> GammaKeyPair<G> {
    pub fn generate<R: RngCore + ?Sized>(grp: &G, rng: &mut R) -> Self {
        Self::from_secret(grp, grp.random_scalar(rng))
    }

    pub fn from_secret(grp: &G, sk: G::Scalar) -> Self {
        GammaKeyPair { sk, pk: grp.exp_g(&sk) }
    }
}

/// Message-independent signing state. Single use.
#[derive(Debug, Clone)]
pub struct GammaPrecomputation<G: Group> {
    pub v: G::Scalar,
    pub big_v: G::Element,
    pub c: G::Scalar,
    pub vc: G::Scalar,
    consumed: bool,
}

impl<G: Group> GammaPrecomputation<G> {
    pub fn is_consumed(&self) -> bool {
        self.consumed
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct GammaSignature<G: Group> {
    pub c: G::Scalar,
    pub s: G::Scalar,
}

crate::impl_copy!(GammaSignature);

impl<G: Group> GammaSignature<G> {
    /// `encode(c) ‖ encode(s)`.
    pub fn to_bytes(&self, grp: &G) -> Vec<u8> {
        let mut out = grp.encode_scalar(&self.c);
        out.extend(grp.encode_scalar(&self.s));
        out
    }

    pub fn from_bytes(grp: &G, bytes: &[u8]) -> Result<Self> {
        let (c, s) = split_pair(grp, bytes)?;
        Ok(GammaSignature { c, s })
    }
}

pub(crate) fn split_pair<G: Group>(grp: &G, bytes: &[u8]) -> Result<(G::Scalar, G::Scalar)> {
    let n = grp.params().scalar_len;
    if bytes.len() != 2 * n {
        return Err(crate::group::GroupError::BadLength {
            expected: 2 * n,
            got: bytes.len(),
        }
        .into());
    }
    Ok((grp.decode_scalar(&bytes[..n])?, grp.decode_scalar(&bytes[n..])?))
}

fn commitment_challenge<G: Group>(grp: &G, big_v: &G::Element, pk: &G::Element) -> G::Scalar {
    let input = HashInput::new().element(grp, big_v).element(grp, pk);
    hash_to_scalar(grp, HashTag::H0, &input)
}

fn message_digest<G: Group>(grp: &G, m: &[u8]) -> G::Scalar {
    hash_to_scalar(grp, HashTag::H1, &HashInput::new().bytes(m))
}

pub fn gamma_precompute<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    kp: &GammaKeyPair<G>,
    rng: &mut R,
) -> Result<GammaPrecomputation<G>> {
    for _ in 0..RESAMPLE_LIMIT {
        let v = grp.random_scalar(rng);
        let big_v = grp.exp_g(&v);
        let c = commitment_challenge(grp, &big_v, &kp.pk);
        if grp.is_zero(&c) {
            continue;
        }
        return Ok(GammaPrecomputation {
            v,
            big_v,
            c,
            vc: v * c,
            consumed: false,
        });
    }
    Err(Error::ResampleExhausted("gamma challenge"))
}

pub fn gamma_sign_online<G: Group>(
    grp: &G,
    pre: &mut GammaPrecomputation<G>,
    kp: &GammaKeyPair<G>,
    m: &[u8],
) -> Result<GammaSignature<G>> {
    if pre.consumed {
        return Err(Error::NonceReuse);
    }
    pre.consumed = true;
    let e = message_digest(grp, m);
    Ok(GammaSignature {
        c: pre.c,
        s: pre.vc - e * kp.sk,
    })
}

/// Offline and online phases back to back.
pub fn gamma_sign<G: Group, R: RngCore + ?Sized>(
    grp: &G,
    kp: &GammaKeyPair<G>,
    m: &[u8],
    rng: &mut R,
) -> Result<GammaSignature<G>> {
    let mut pre = gamma_precompute(grp, kp, rng)?;
    gamma_sign_online(grp, &mut pre, kp, m)
}

pub fn gamma_vf<G: Group>(grp: &G, pk: &G::Element, m: &[u8], sig: &GammaSignature<G>) -> bool {
    let Ok(c_inv) = grp.scalar_inv(&sig.c) else {
        return false;
    };
    let e = message_digest(grp, m);
    // (g^s · pk^e)^(1/c) = g^(s/c) · pk^(e/c)
    let big_v = grp.multi_exp(&[(grp.generator(), sig.s * c_inv), (*pk, e * c_inv)]);
    commitment_challenge(grp, &big_v, pk) == sig.c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::counter::measure;
    use crate::group::{Ristretto255, ToyGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn completeness_and_tamper_on_curve() {
        let grp = Ristretto255::new();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let kp = GammaKeyPair::generate(&grp, &mut rng);
        for i in 0..500u32 {
            let mut m = format!("message {i}").into_bytes();
            let sig = gamma_sign(&grp, &kp, &m, &mut rng).unwrap();
            assert!(gamma_vf(&grp, &kp.pk, &m, &sig));
            let bumped = GammaSignature {
                c: sig.c,
                s: sig.s + grp.scalar_one(),
            };
            assert!(!gamma_vf(&grp, &kp.pk, &m, &bumped));
            let bit = (i as usize) % (m.len() * 8);
            m[bit / 8] ^= 1 << (bit % 8);
            assert!(!gamma_vf(&grp, &kp.pk, &m, &sig));
        }
    }

    #[test]
    fn online_phase_is_exponentiation_free_and_single_use() {
        let grp = Ristretto255::new();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let kp = GammaKeyPair::generate(&grp, &mut rng);
        let (pre, offline) = measure(|| gamma_precompute(&grp, &kp, &mut rng).unwrap());
        assert_eq!(offline.exp_equivalents(), 1);
        assert_eq!(pre.vc, pre.v * pre.c);
        let mut pre = pre;
        let (sig, online) = measure(|| gamma_sign_online(&grp, &mut pre, &kp, b"m").unwrap());
        assert!(online.is_zero());
        assert!(pre.is_consumed());
        assert!(matches!(
            gamma_sign_online(&grp, &mut pre, &kp, b"m"),
            Err(Error::NonceReuse)
        ));
        assert!(gamma_vf(&grp, &kp.pk, b"m", &sig));
    }

    #[test]
    fn zero_challenge_is_rejected() {
        let grp = ToyGroup::default();
        let kp = GammaKeyPair::from_secret(&grp, grp.scalar(3));
        let sig = GammaSignature {
            c: grp.scalar(0),
            s: grp.scalar(1),
        };
        assert!(!gamma_vf(&grp, &kp.pk, b"m", &sig));
    }

    #[test]
    fn toy_completeness() {
        let grp = ToyGroup::default();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for i in 0..200u32 {
            let kp = GammaKeyPair::generate(&grp, &mut rng);
            let m = i.to_be_bytes();
            let sig = gamma_sign(&grp, &kp, &m, &mut rng).unwrap();
            assert!(gamma_vf(&grp, &kp.pk, &m, &sig));
            let bytes = sig.to_bytes(&grp);
            assert_eq!(bytes.len(), 4);
            assert_eq!(GammaSignature::from_bytes(&grp, &bytes).unwrap(), sig);
        }
    }
}
