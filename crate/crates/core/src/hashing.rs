//! Domain-separated hashing into `ℤ_q`.
//!
//! `Hᵢ(x₁, …, x_n) = SHA-512(i ‖ len(x₁) ‖ x₁ ‖ … ‖ len(x_n) ‖ x_n) mod q`, with a
//! one-byte tag prefix, 4-byte big-endian item lengths, and the digest read as
//! a big-endian integer.

use std::cell::RefCell;

use sha2::{Digest, Sha512};

use crate::group::Group;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum HashTag {
    H0 = 0,
    H1 = 1,
    H2 = 2,
    H3 = 3,
}

impl HashTag {
    pub const ALL: [HashTag; 4] = [HashTag::H0, HashTag::H1, HashTag::H2, HashTag::H3];

    pub fn prefix(self) -> u8 {
        self as u8
    }

    /// `H2` (public-key binding) and `H3` (message digest) are only required to
    /// be target one-way; `H0` and `H1` are treated as random oracles.
    pub fn is_target_one_way_role(self) -> bool {
        matches!(self, HashTag::H2 | HashTag::H3)
    }
}

/// See [`HashTag::is_target_one_way_role`].
pub fn is_target_one_way_role(tag: HashTag) -> bool {
    tag.is_target_one_way_role()
}

/// Ordered hash arguments, each already in canonical byte form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HashInput {
    items: Vec<Vec<u8>>,
}

impl HashInput {
    pub fn new() -> Self {
        HashInput::default()
    }

    pub fn element<G: Group>(mut self, grp: &G, x: &G::Element) -> Self {
        self.items.push(grp.encode_element(x));
        self
    }

    pub fn scalar<G: Group>(mut self, grp: &G, s: &G::Scalar) -> Self {
        self.items.push(grp.encode_scalar(s));
        self
    }

    pub fn bytes(mut self, b: &[u8]) -> Self {
        self.items.push(b.to_vec());
        self
    }

    pub fn items(&self) -> &[Vec<u8>] {
        &self.items
    }

    /// Length-prefixed concatenation of all items.
    pub fn serialize(&self) -> Vec<u8> {
        let total: usize = self.items.iter().map(|i| 4 + i.len()).sum();
        let mut out = Vec::with_capacity(total);
        for item in &self.items {
            let len = u32::try_from(item.len()).expect("hash item longer than 4 GiB");
            out.extend_from_slice(&len.to_be_bytes());
            out.extend_from_slice(item);
        }
        out
    }
}

/// Raw 64-byte digest of `tag ‖ serialize(input)`.
pub fn digest(tag: HashTag, input: &HashInput) -> [u8; 64] {
    let mut h = Sha512::new();
    h.update([tag.prefix()]);
    h.update(input.serialize());
    h.finalize().into()
}

pub fn hash_to_scalar<G: Group>(grp: &G, tag: HashTag, input: &HashInput) -> G::Scalar {
    record(tag, input);
    grp.scalar_from_wide(&digest(tag, input))
}

/// A hash evaluation captured by [`trace`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracedHash {
    pub tag: HashTag,
    pub input: HashInput,
}

thread_local! {
    static TRACE: RefCell<Option<Vec<TracedHash>>> = const { RefCell::new(None) };
}

fn record(tag: HashTag, input: &HashInput) {
    TRACE.with(|t| {
        if let Some(log) = t.borrow_mut().as_mut() {
            log.push(TracedHash {
                tag,
                input: input.clone(),
            });
        }
    });
}

/// Runs `f` and returns every `hash_to_scalar` call it made on this thread.
pub fn trace<T>(f: impl FnOnce() -> T) -> (T, Vec<TracedHash>) {
    let previous = TRACE.with(|t| t.borrow_mut().replace(Vec::new()));
    let out = f();
    let log = TRACE.with(|t| {
        let mut slot = t.borrow_mut();
        let log = slot.take().unwrap_or_default();
        *slot = previous;
        log
    });
    (out, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Ristretto255, ToyGroup};

    #[test]
    fn boundary_shift_changes_serialization() {
        let a = HashInput::new().bytes(b"ab").bytes(b"c");
        let b = HashInput::new().bytes(b"a").bytes(b"bc");
        assert_ne!(a.serialize(), b.serialize());
        let c = HashInput::new().bytes(b"abc");
        assert_ne!(a.serialize(), c.serialize());
        assert_ne!(HashInput::new().serialize(), HashInput::new().bytes(b"").serialize());
    }

    #[test]
    fn target_one_way_roles() {
        assert!(!is_target_one_way_role(HashTag::H0));
        assert!(!is_target_one_way_role(HashTag::H1));
        assert!(is_target_one_way_role(HashTag::H2));
        assert!(is_target_one_way_role(HashTag::H3));
    }

    #[test]
    fn output_in_range_and_deterministic() {
        let grp = ToyGroup::default();
        for i in 0u32..1000 {
            let input = HashInput::new().bytes(&i.to_le_bytes());
            let s = hash_to_scalar(&grp, HashTag::H3, &input);
            assert!(s.value() < 11);
            assert_eq!(s, hash_to_scalar(&grp, HashTag::H3, &input));
        }
    }

    #[test]
    fn tags_separate_on_curve() {
        let grp = Ristretto255::new();
        let mut seen = std::collections::HashSet::new();
        for i in 0u32..1000 {
            let input = HashInput::new().bytes(&i.to_be_bytes());
            for tag in HashTag::ALL {
                assert!(seen.insert(hash_to_scalar(&grp, tag, &input).to_bytes()));
            }
        }
    }

    #[test]
    fn trace_captures_and_restores() {
        let grp = ToyGroup::default();
        let ((), outer) = trace(|| {
            hash_to_scalar(&grp, HashTag::H0, &HashInput::new().bytes(b"x"));
            let ((), inner) = trace(|| {
                hash_to_scalar(&grp, HashTag::H1, &HashInput::new().bytes(b"y"));
            });
            assert_eq!(inner.len(), 1);
            assert_eq!(inner[0].tag, HashTag::H1);
        });
        assert_eq!(outer.len(), 1);
        assert_eq!(outer[0].tag, HashTag::H0);
    }
}
