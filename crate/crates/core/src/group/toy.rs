//! Order-`q` subgroup of `ℤ_p^*` for small primes.
//!
//! Values are carried as `u64` with their modulus, so scalars and elements
//! support the standard operators without a group handle. Moduli must stay
//! below 2³² so products fit comfortably; the default is `p = 23, q = 11, g = 2`.

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, RngCore};

use super::{Group, GroupError, GroupId, GroupParams};

const MAX_MODULUS: u64 = 1 << 32;

/// A residue modulo the subgroup order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToyScalar {
    value: u64,
    q: u64,
}

impl ToyScalar {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }
}

impl Add for ToyScalar {
    type Output = ToyScalar;
    fn add(self, rhs: ToyScalar) -> ToyScalar {
        debug_assert_eq!(self.q, rhs.q);
        ToyScalar {
            value: (self.value + rhs.value) % self.q,
            q: self.q,
        }
    }
}

impl Sub for ToyScalar {
    type Output = ToyScalar;
    fn sub(self, rhs: ToyScalar) -> ToyScalar {
        debug_assert_eq!(self.q, rhs.q);
        ToyScalar {
            value: (self.value + self.q - rhs.value) % self.q,
            q: self.q,
        }
    }
}

impl Mul for ToyScalar {
    type Output = ToyScalar;
    fn mul(self, rhs: ToyScalar) -> ToyScalar {
        debug_assert_eq!(self.q, rhs.q);
        ToyScalar {
            value: mulmod(self.value, rhs.value, self.q),
            q: self.q,
        }
    }
}

impl Neg for ToyScalar {
    type Output = ToyScalar;
    fn neg(self) -> ToyScalar {
        ToyScalar {
            value: (self.q - self.value) % self.q,
            q: self.q,
        }
    }
}

/// A member of the order-`q` subgroup of `ℤ_p^*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToyElement {
    value: u64,
    p: u64,
}

impl ToyElement {
    pub fn value(&self) -> u64 {
        self.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyGroup {
    p: u64,
    q: u64,
    g: u64,
    params: GroupParams,
}

impl Default for ToyGroup {
    fn default() -> Self {
        ToyGroup::new(23, 11, 2).expect("default toy parameters are valid")
    }
}

impl ToyGroup {
    /// Validates `p, q` prime, `q | p−1`, and `g` of order exactly `q`.
    pub fn new(p: u64, q: u64, g: u64) -> Result<Self, GroupError> {
        if p >= MAX_MODULUS {
            return Err(GroupError::InvalidParams(format!("p = {p} exceeds 2^32")));
        }
        if !is_prime(p) || !is_prime(q) {
            return Err(GroupError::InvalidParams(format!(
                "p = {p} and q = {q} must both be prime"
            )));
        }
        if !(p - 1).is_multiple_of(q) {
            return Err(GroupError::InvalidParams(format!("q = {q} does not divide p − 1")));
        }
        if g <= 1 || g >= p || powmod(g, q, p) != 1 {
            return Err(GroupError::InvalidParams(format!(
                "g = {g} does not have order {q} mod {p}"
            )));
        }
        let element_len = byte_len(p).max(2);
        let scalar_len = byte_len(q).max(2);
        let params = GroupParams {
            group_id: GroupId::Toy,
            q: minimal_be(q),
            g1: be_fixed(g, element_len),
            element_len,
            scalar_len,
        };
        Ok(ToyGroup { p, q, g, params })
    }

    /// Builds a group of prime order `q` inside `ℤ_p^*` with the smallest prime
    /// `p = k·q + 1`, and the generator `h^((p−1)/q)` for the smallest `h ≥ 2`
    /// that does not land on 1.
    pub fn with_order(q: u64) -> Result<Self, GroupError> {
        if !is_prime(q) {
            return Err(GroupError::InvalidParams(format!("q = {q} is not prime")));
        }
        let mut k = 2u64;
        let p = loop {
            let p = k
                .checked_mul(q)
                .and_then(|x| x.checked_add(1))
                .filter(|&p| p < MAX_MODULUS)
                .ok_or_else(|| GroupError::InvalidParams(format!("no p = kq+1 below 2^32 for q = {q}")))?;
            if is_prime(p) {
                break p;
            }
            k += 2;
        };
        let cofactor = (p - 1) / q;
        let g = (2..p)
            .map(|h| powmod(h, cofactor, p))
            .find(|&g| g != 1)
            .ok_or_else(|| GroupError::InvalidParams("no generator found".into()))?;
        ToyGroup::new(p, q, g)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn scalar(&self, v: u64) -> ToyScalar {
        ToyScalar {
            value: v % self.q,
            q: self.q,
        }
    }

    /// Wraps a residue, checking subgroup membership.
    pub fn element(&self, v: u64) -> Result<ToyElement, GroupError> {
        if v == 0 || v >= self.p {
            return Err(GroupError::NonCanonical);
        }
        if powmod(v, self.q, self.p) != 1 {
            return Err(GroupError::NotInGroup);
        }
        Ok(ToyElement { value: v, p: self.p })
    }

    /// All `q` subgroup members, `g⁰, g¹, …, g^(q−1)`.
    pub fn elements(&self) -> impl Iterator<Item = ToyElement> + '_ {
        (0..self.q).map(move |k| ToyElement {
            value: powmod(self.g, k, self.p),
            p: self.p,
        })
    }
}

impl Group for ToyGroup {
    type Scalar = ToyScalar;
    type Element = ToyElement;

    fn params(&self) -> &GroupParams {
        &self.params
    }

    fn generator(&self) -> ToyElement {
        ToyElement {
            value: self.g,
            p: self.p,
        }
    }

    fn identity(&self) -> ToyElement {
        ToyElement { value: 1, p: self.p }
    }

    fn scalar_from_u64(&self, v: u64) -> ToyScalar {
        self.scalar(v)
    }

    fn scalar_inv(&self, s: &ToyScalar) -> Result<ToyScalar, GroupError> {
        if s.value == 0 {
            return Err(GroupError::InvOfZero);
        }
        // q is prime, so s^(q−2) = s⁻¹
        Ok(self.scalar(powmod(s.value, self.q - 2, self.q)))
    }

    fn scalar_from_wide(&self, wide_be: &[u8; 64]) -> ToyScalar {
        let q = self.q as u128;
        let v = wide_be.iter().fold(0u128, |acc, &b| (acc * 256 + b as u128) % q);
        self.scalar(v as u64)
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> ToyScalar {
        self.scalar(rng.gen_range(1..self.q))
    }

    fn encode_scalar(&self, s: &ToyScalar) -> Vec<u8> {
        be_fixed(s.value, self.params.scalar_len)
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<ToyScalar, GroupError> {
        let v = read_be(bytes, self.params.scalar_len)?;
        if v >= self.q {
            return Err(GroupError::NonCanonical);
        }
        Ok(self.scalar(v))
    }

    fn encode_element(&self, x: &ToyElement) -> Vec<u8> {
        be_fixed(x.value, self.params.element_len)
    }

    fn decode_element(&self, bytes: &[u8]) -> Result<ToyElement, GroupError> {
        let v = read_be(bytes, self.params.element_len)?;
        self.element(v)
    }

    fn element_inv(&self, x: &ToyElement) -> ToyElement {
        ToyElement {
            value: powmod(x.value, self.p - 2, self.p),
            p: self.p,
        }
    }

    fn pow_raw(&self, base: &ToyElement, e: &ToyScalar) -> ToyElement {
        ToyElement {
            value: powmod(base.value, e.value, self.p),
            p: self.p,
        }
    }

    fn mul_raw(&self, a: &ToyElement, b: &ToyElement) -> ToyElement {
        ToyElement {
            value: mulmod(a.value, b.value, self.p),
            p: self.p,
        }
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn powmod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod(result, b, m);
        }
        b = mulmod(b, b, m);
        exp >>= 1;
    }
    result
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn byte_len(v: u64) -> usize {
    (64 - v.leading_zeros() as usize).div_ceil(8)
}

fn minimal_be(v: u64) -> Vec<u8> {
    be_fixed(v, byte_len(v).max(1))
}

fn be_fixed(v: u64, len: usize) -> Vec<u8> {
    let full = v.to_be_bytes();
    full[8 - len..].to_vec()
}

fn read_be(bytes: &[u8], len: usize) -> Result<u64, GroupError> {
    if bytes.len() != len {
        return Err(GroupError::BadLength {
            expected: len,
            got: bytes.len(),
        });
    }
    Ok(bytes.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> ToyGroup {
        ToyGroup::default()
    }

    #[test]
    fn exp_examples() {
        let grp = g();
        let gen = grp.generator();
        assert_eq!(grp.exp(&gen, &grp.scalar(0)), grp.identity());
        assert_eq!(grp.exp(&gen, &grp.scalar(3)).value(), 8);
        // exponent 11 reduces to 0 mod q; use the raw residue to check the order
        assert_eq!(powmod(2, 11, 23), 1);
    }

    #[test]
    fn mul_examples() {
        let grp = g();
        let a = grp.element(4).unwrap();
        let b = grp.element(8).unwrap();
        assert_eq!(grp.mul(&a, &b).value(), 9);
        assert_eq!(grp.mul(&a, &grp.identity()), a);
        assert_eq!(grp.mul(&a, &b), grp.mul(&b, &a));
    }

    #[test]
    fn scalar_inverse() {
        let grp = g();
        assert_eq!(grp.scalar_inv(&grp.scalar(3)).unwrap().value(), 4);
        assert_eq!(grp.scalar_inv(&grp.scalar(0)), Err(GroupError::InvOfZero));
        for c in 1..11 {
            let c = grp.scalar(c);
            assert_eq!(grp.scalar_inv(&c).unwrap() * c, grp.scalar_one());
        }
        let x = grp.scalar(7);
        assert_eq!(x - x, grp.scalar_zero());
    }

    #[test]
    fn encoding_examples() {
        let grp = g();
        assert_eq!(grp.encode_scalar(&grp.scalar(5)), vec![0x00, 0x05]);
        assert_eq!(grp.decode_element(&[0x00, 0x05]), Err(GroupError::NotInGroup));
        assert_eq!(grp.decode_element(&[0x00, 0x17]), Err(GroupError::NonCanonical));
        assert_eq!(grp.decode_element(&[0x00, 0x00]), Err(GroupError::NonCanonical));
        assert_eq!(grp.decode_scalar(&[0x00, 0x0b]), Err(GroupError::NonCanonical));
        assert_eq!(
            grp.decode_scalar(&[0x05]),
            Err(GroupError::BadLength { expected: 2, got: 1 })
        );
        for x in grp.elements() {
            assert_eq!(grp.decode_element(&grp.encode_element(&x)).unwrap(), x);
        }
    }

    #[test]
    fn subgroup_has_exact_order() {
        let grp = g();
        let members: std::collections::HashSet<u64> = grp.elements().map(|e| e.value()).collect();
        assert_eq!(members.len(), 11);
        assert!(!members.contains(&5));
    }

    #[test]
    fn parameter_validation() {
        assert!(ToyGroup::new(23, 11, 5).is_err());
        assert!(ToyGroup::new(23, 7, 2).is_err());
        assert!(ToyGroup::new(21, 11, 2).is_err());
        let grp = ToyGroup::with_order(251).unwrap();
        assert_eq!(grp.p(), 503);
        assert_eq!(powmod(grp.g(), 251, 503), 1);
    }

    #[test]
    fn wide_reduction_matches_big_endian_value() {
        let grp = g();
        let mut wide = [0u8; 64];
        wide[63] = 200;
        wide[62] = 1;
        assert_eq!(grp.scalar_from_wide(&wide).value(), 456 % 11);
    }
}
