//! Gamma multi-signatures (GMS, AGMS) over a spanning tree of signers, with a
//! CoSi baseline, toy-scale attack reproductions and an endorsement-flow
//! simulation.
//!
//! Everything is generic over [`group::Group`]; [`Ristretto255`] is the
//! benchmark backend and [`ToyGroup`] the hand-checkable one.

pub mod attacks;
pub mod endorsement;
pub mod error;
pub mod gamma;
pub mod group;
pub mod hashing;
pub mod io;
pub mod schemes;
pub mod tree;

pub use error::{Error, Result};
pub use group::{Group, GroupId, Ristretto255, ToyGroup};

/// Key pair on the benchmark curve.
pub type CurveKeyPair = schemes::MultiSigKeyPair<Ristretto255>;
pub type CurveSignature = schemes::JointSignature<Ristretto255>;
pub type ToyKeyPair = schemes::MultiSigKeyPair<ToyGroup>;
pub type ToySignature = schemes::JointSignature<ToyGroup>;
