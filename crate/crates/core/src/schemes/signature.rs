use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gamma::split_pair;
use crate::group::Group;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(rename = "cosi")]
    CoSi,
    Gms,
    Agms,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::CoSi, Scheme::Gms, Scheme::Agms];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CoSi => "cosi",
            Scheme::Gms => "gms",
            Scheme::Agms => "agms",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cosi" => Ok(Scheme::CoSi),
            "gms" => Ok(Scheme::Gms),
            "agms" => Ok(Scheme::Agms),
            other => Err(format!("unknown scheme `{other}` (expected cosi|gms|agms)")),
        }
    }
}

/// Joint signature `(c, S)`.
#[derive(Debug, PartialEq, Eq)]
pub struct JointSignature<G: Group> {
    pub scheme: Scheme,
    pub c: G::Scalar,
    pub s: G::Scalar,
}

crate::impl_copy!(JointSignature);

impl<G: Group> JointSignature<G> {
    /// `encode(c) ‖ encode(S)`, exactly `2·scalar_len` bytes.
    pub fn to_bytes(&self, grp: &G) -> Vec<u8> {
        let mut out = grp.encode_scalar(&self.c);
        out.extend(grp.encode_scalar(&self.s));
        out
    }

    pub fn from_bytes(grp: &G, scheme: Scheme, bytes: &[u8]) -> Result<Self> {
        let (c, s) = split_pair(grp, bytes)?;
        Ok(JointSignature { scheme, c, s })
    }
}
