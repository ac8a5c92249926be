//! Prime-order group abstraction.
//!
//! Every scheme in this crate is written against [`Group`], which exposes a
//! cyclic group `𝔾` of prime order `q` with a distinguished generator `g₁`,
//! its scalar field `ℤ_q`, and fixed-length canonical byte encodings.
//!
//! Two backends are provided:
//! - [`Ristretto255`]: the prime-order Ristretto group over Curve25519
//!   (~128-bit security), used for realistic benchmarks.
//! - [`ToyGroup`]: the order-`q` subgroup of `ℤ_p^*` for small primes, used
//!   for hand-checkable values, brute-force oracles and attack demos.
//!
//! Exponentiations, multi-exponentiations and multiplications go through
//! counted entry points so efficiency claims can be asserted exactly.

/// `Clone` + `Copy` for structs generic over a group whose fields are all
/// scalars, elements or plain data; derives would demand `G: Copy`.
#[macro_export]
#[doc(hidden)]
macro_rules! impl_copy {
    ($($t:ident),* $(,)?) => {$(
        impl<G: $crate::group::Group> Clone for $t<G> {
            fn clone(&self) -> Self {
                *self
            }
        }
        impl<G: $crate::group::Group> Copy for $t<G> {}
    )*};
}

pub mod counter;
pub mod curve;
pub mod toy;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use counter::{OpCounter, OpCounts};
pub use curve::Ristretto255;
pub use toy::{ToyElement, ToyGroup, ToyScalar};

/// Backend identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupId {
    Curve,
    Toy,
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Curve => f.write_str("curve"),
            GroupId::Toy => f.write_str("toy"),
        }
    }
}

impl std::str::FromStr for GroupId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "curve" => Ok(GroupId::Curve),
            "toy" => Ok(GroupId::Toy),
            other => Err(format!("unknown backend `{other}` (expected curve|toy)")),
        }
    }
}

/// Public parameters `(𝔾, g₁, q)` plus encoding lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParams {
    pub group_id: GroupId,
    /// Group order, big-endian, minimal length.
    #[serde(with = "hex::serde")]
    pub q: Vec<u8>,
    /// Canonical encoding of the generator.
    #[serde(with = "hex::serde")]
    pub g1: Vec<u8>,
    pub element_len: usize,
    pub scalar_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("bad encoding length: expected {expected} bytes, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("encoded value is not a member of the prime-order subgroup")]
    NotInGroup,
    #[error("non-canonical encoding")]
    NonCanonical,
    #[error("attempted to invert zero")]
    InvOfZero,
    #[error("invalid group parameters: {0}")]
    InvalidParams(String),
}

/// A cyclic group of prime order `q` together with its scalar field.
///
/// Backends implement the `*_raw` operations; schemes call the counted
/// [`exp`](Group::exp), [`mul`](Group::mul) and [`multi_exp`](Group::multi_exp).
pub trait Group: Clone + fmt::Debug + Send + Sync + 'static {
    type Scalar: Copy
        + Eq
        + fmt::Debug
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>;
    type Element: Copy + Eq + fmt::Debug + Send + Sync;

    fn params(&self) -> &GroupParams;
    fn generator(&self) -> Self::Element;
    fn identity(&self) -> Self::Element;

    fn scalar_from_u64(&self, v: u64) -> Self::Scalar;
    fn scalar_inv(&self, s: &Self::Scalar) -> Result<Self::Scalar, GroupError>;
    /// Reduces a 64-byte big-endian integer modulo `q`.
    fn scalar_from_wide(&self, wide_be: &[u8; 64]) -> Self::Scalar;
    /// Samples uniformly from `[1, q−1]`.
    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Scalar;

    fn encode_scalar(&self, s: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar, GroupError>;
    fn encode_element(&self, x: &Self::Element) -> Vec<u8>;
    fn decode_element(&self, bytes: &[u8]) -> Result<Self::Element, GroupError>;

    fn element_inv(&self, x: &Self::Element) -> Self::Element;

    fn pow_raw(&self, base: &Self::Element, e: &Self::Scalar) -> Self::Element;
    fn mul_raw(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn multi_pow_raw(&self, terms: &[(Self::Element, Self::Scalar)]) -> Self::Element {
        terms
            .iter()
            .fold(self.identity(), |acc, (b, e)| self.mul_raw(&acc, &self.pow_raw(b, e)))
    }

    fn scalar_zero(&self) -> Self::Scalar {
        self.scalar_from_u64(0)
    }

    fn scalar_one(&self) -> Self::Scalar {
        self.scalar_from_u64(1)
    }

    fn is_zero(&self, s: &Self::Scalar) -> bool {
        *s == self.scalar_zero()
    }

    /// `base^e`, counted as one exponentiation.
    fn exp(&self, base: &Self::Element, e: &Self::Scalar) -> Self::Element {
        counter::record_exp();
        self.pow_raw(base, e)
    }

    /// `g₁^e`, counted as one exponentiation.
    fn exp_g(&self, e: &Self::Scalar) -> Self::Element {
        self.exp(&self.generator(), e)
    }

    /// Group product, counted as one multiplication.
    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element {
        counter::record_mul();
        self.mul_raw(a, b)
    }

    /// `∏ bᵢ^eᵢ`, counted as one multi-exponentiation of `terms.len()` terms.
    fn multi_exp(&self, terms: &[(Self::Element, Self::Scalar)]) -> Self::Element {
        counter::record_multi_exp(terms.len());
        self.multi_pow_raw(terms)
    }

    /// Product of all elements; identity for an empty iterator.
    fn product<'a, I>(&self, items: I) -> Self::Element
    where
        I: IntoIterator<Item = &'a Self::Element>,
    {
        items.into_iter().fold(self.identity(), |acc, x| self.mul(&acc, x))
    }
}
