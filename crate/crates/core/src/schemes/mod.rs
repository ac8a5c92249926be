//! Tree-structured multi-signature schemes: GMS, AGMS and a CoSi baseline.
//!
//! All three share key material ([`keys`]), the per-node phase handlers in
//! [`session`], and the two-scalar [`JointSignature`]. GMS and AGMS verify
//! with the same [`vf`]; AGMS differs only in running Commitment and
//! Challenge before the message is announced.

pub mod agms;
pub mod cosi;
pub mod gms;
pub mod keys;
pub mod session;
pub mod signature;

pub use agms::{agms_offline, agms_online, agms_sign, AgmsOffline};
pub use cosi::{cosi_challenge, cosi_sign, cosi_sign_run, cosi_vf};
pub use gms::{collective_challenge, gms_sign, gms_sign_run, vf};
pub use keys::{
    kag, kag_public, keypair_from_secret, kg, kvf, AggregatedKey, MultiSigKeyPair, ProofOfPossession, PublicKey,
};
pub use session::{SessionState, SigningRun, SigningSession};
pub use signature::{JointSignature, Scheme};
