//! On-disk formats: key bundles, secret bundles, aggregated keys and signatures.
//!
//! JSON files carry a `schema` tag and the group parameters they were
//! produced under; readers refuse files from a different group. Signature
//! files are raw `encode(c) ‖ encode(S)`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Group, GroupParams};
use crate::schemes::{AggregatedKey, MultiSigKeyPair, ProofOfPossession, PublicKey};

pub const KEYS_SCHEMA: &str = "gms-public-keys/v1";
pub const SECRETS_SCHEMA: &str = "gms-secret-keys/v1";
pub const AGGREGATE_SCHEMA: &str = "gms-aggregate/v1";

/// `{y, a, d}` as hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFile {
    pub y: String,
    pub a: String,
    pub d: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyBundle {
    pub schema: String,
    pub params: GroupParams,
    pub keys: Vec<KeyFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretBundle {
    pub schema: String,
    pub params: GroupParams,
    pub sk: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateFile {
    pub schema: String,
    pub params: GroupParams,
    pub x_tilde: String,
    pub members: usize,
}

fn check_header(schema: &str, expected: &str, params: &GroupParams, grp_params: &GroupParams) -> Result<()> {
    if schema != expected {
        return Err(Error::Malformed(format!("schema `{schema}`, expected `{expected}`")));
    }
    if params != grp_params {
        return Err(Error::Malformed(format!(
            "file was written for the {} group with different parameters",
            params.group_id
        )));
    }
    Ok(())
}

fn unhex(field: &str, s: &str) -> Result<Vec<u8>> {
    hex::decode(s).map_err(|e| Error::Malformed(format!("{field}: {e}")))
}

pub fn key_file<G: Group>(grp: &G, pk: &PublicKey<G>) -> KeyFile {
    KeyFile {
        y: hex::encode(grp.encode_element(&pk.y)),
        a: hex::encode(grp.encode_scalar(&pk.pop.a)),
        d: hex::encode(grp.encode_scalar(&pk.pop.d)),
    }
}

pub fn public_key_from_file<G: Group>(grp: &G, f: &KeyFile) -> Result<PublicKey<G>> {
    Ok(PublicKey {
        y: grp.decode_element(&unhex("y", &f.y)?)?,
        pop: ProofOfPossession {
            a: grp.decode_scalar(&unhex("a", &f.a)?)?,
            d: grp.decode_scalar(&unhex("d", &f.d)?)?,
        },
    })
}

impl KeyBundle {
    pub fn new<G: Group>(grp: &G, pks: &[PublicKey<G>]) -> Self {
        KeyBundle {
            schema: KEYS_SCHEMA.into(),
            params: grp.params().clone(),
            keys: pks.iter().map(|pk| key_file(grp, pk)).collect(),
        }
    }

    pub fn public_keys<G: Group>(&self, grp: &G) -> Result<Vec<PublicKey<G>>> {
        check_header(&self.schema, KEYS_SCHEMA, &self.params, grp.params())?;
        self.keys.iter().map(|f| public_key_from_file(grp, f)).collect()
    }
}

impl SecretBundle {
    pub fn new<G: Group>(grp: &G, keys: &[MultiSigKeyPair<G>]) -> Self {
        SecretBundle {
            schema: SECRETS_SCHEMA.into(),
            params: grp.params().clone(),
            sk: keys.iter().map(|kp| hex::encode(grp.encode_scalar(&kp.sk))).collect(),
        }
    }

    pub fn secret_keys<G: Group>(&self, grp: &G) -> Result<Vec<G::Scalar>> {
        check_header(&self.schema, SECRETS_SCHEMA, &self.params, grp.params())?;
        self.sk
            .iter()
            .map(|s| Ok(grp.decode_scalar(&unhex("sk", s)?)?))
            .collect()
    }
}

/// Pairs secret keys with their public halves, checking `y = g₁^sk`.
pub fn load_keypairs<G: Group>(grp: &G, public: &KeyBundle, secret: &SecretBundle) -> Result<Vec<MultiSigKeyPair<G>>> {
    let pks = public.public_keys(grp)?;
    let sks = secret.secret_keys(grp)?;
    if pks.len() != sks.len() {
        return Err(Error::KeyCountMismatch {
            expected: pks.len(),
            got: sks.len(),
        });
    }
    pks.into_iter()
        .zip(sks)
        .enumerate()
        .map(|(i, (public, sk))| {
            if grp.exp_g(&sk) != public.y {
                return Err(Error::Malformed(format!(
                    "secret key {i} does not match its public key"
                )));
            }
            Ok(MultiSigKeyPair { sk, public })
        })
        .collect()
}

impl AggregateFile {
    pub fn new<G: Group>(grp: &G, agg: &AggregatedKey<G>) -> Self {
        AggregateFile {
            schema: AGGREGATE_SCHEMA.into(),
            params: grp.params().clone(),
            x_tilde: hex::encode(grp.encode_element(&agg.x_tilde)),
            members: agg.member_count,
        }
    }

    pub fn aggregated_key<G: Group>(&self, grp: &G) -> Result<AggregatedKey<G>> {
        check_header(&self.schema, AGGREGATE_SCHEMA, &self.params, grp.params())?;
        Ok(AggregatedKey {
            x_tilde: grp.decode_element(&unhex("x_tilde", &self.x_tilde)?)?,
            member_count: self.members,
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
