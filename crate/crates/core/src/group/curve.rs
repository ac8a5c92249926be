//! Ristretto255 backend (prime-order group over Curve25519).

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, VartimeMultiscalarMul};
use rand::RngCore;

use super::{Group, GroupError, GroupId, GroupParams};

const ELEMENT_LEN: usize = 32;
const SCALAR_LEN: usize = 32;

/// ℓ = 2²⁵² + 27742317777372353535851937790883648493, big-endian.
const ORDER_BE: [u8; 32] = [
    0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x14, 0xde, 0xf9,
    0xde, 0xa2, 0xf7, 0x9c, 0xd6, 0x58, 0x12, 0x63, 0x1a, 0x5c, 0xf5, 0xd3, 0xed,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ristretto255 {
    params: GroupParams,
}

impl Default for Ristretto255 {
    fn default() -> Self {
        Ristretto255::new()
    }
}

impl Ristretto255 {
    pub fn new() -> Self {
        Ristretto255 {
            params: GroupParams {
                group_id: GroupId::Curve,
                q: ORDER_BE.to_vec(),
                g1: RISTRETTO_BASEPOINT_POINT.compress().to_bytes().to_vec(),
                element_len: ELEMENT_LEN,
                scalar_len: SCALAR_LEN,
            },
        }
    }
}

impl Group for Ristretto255 {
    type Scalar = Scalar;
    type Element = RistrettoPoint;

    fn params(&self) -> &GroupParams {
        &self.params
    }

    fn generator(&self) -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn identity(&self) -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn scalar_from_u64(&self, v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn scalar_inv(&self, s: &Scalar) -> Result<Scalar, GroupError> {
        if *s == Scalar::ZERO {
            return Err(GroupError::InvOfZero);
        }
        Ok(s.invert())
    }

    fn scalar_from_wide(&self, wide_be: &[u8; 64]) -> Scalar {
        let mut le = *wide_be;
        le.reverse();
        Scalar::from_bytes_mod_order_wide(&le)
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let mut wide = [0u8; 64];
            rng.fill_bytes(&mut wide);
            let s = Scalar::from_bytes_mod_order_wide(&wide);
            if s != Scalar::ZERO {
                return s;
            }
        }
    }

    fn encode_scalar(&self, s: &Scalar) -> Vec<u8> {
        let mut be = s.to_bytes();
        be.reverse();
        be.to_vec()
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Scalar, GroupError> {
        let mut le: [u8; SCALAR_LEN] = bytes.try_into().map_err(|_| GroupError::BadLength {
            expected: SCALAR_LEN,
            got: bytes.len(),
        })?;
        le.reverse();
        Option::from(Scalar::from_canonical_bytes(le)).ok_or(GroupError::NonCanonical)
    }

    fn encode_element(&self, x: &RistrettoPoint) -> Vec<u8> {
        x.compress().to_bytes().to_vec()
    }

    fn decode_element(&self, bytes: &[u8]) -> Result<RistrettoPoint, GroupError> {
        let compressed = CompressedRistretto::from_slice(bytes).map_err(|_| GroupError::BadLength {
            expected: ELEMENT_LEN,
            got: bytes.len(),
        })?;
        compressed.decompress().ok_or(GroupError::NotInGroup)
    }

    fn element_inv(&self, x: &RistrettoPoint) -> RistrettoPoint {
        -x
    }

    fn pow_raw(&self, base: &RistrettoPoint, e: &Scalar) -> RistrettoPoint {
        base * e
    }

    fn mul_raw(&self, a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn multi_pow_raw(&self, terms: &[(RistrettoPoint, Scalar)]) -> RistrettoPoint {
        RistrettoPoint::vartime_multiscalar_mul(terms.iter().map(|t| t.1), terms.iter().map(|t| t.0))
    }

    fn exp_g(&self, e: &Scalar) -> RistrettoPoint {
        super::counter::record_exp();
        RistrettoPoint::mul_base(e)
    }
}
