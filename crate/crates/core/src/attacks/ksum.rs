//! k-sum forgery by a malicious CoSi leader.
//!
//! The leader opens `k − 1` concurrent sessions on `m` with an honest subtree
//! and collects its aggregated commitments `Rᵢ`. Honest signers derive their
//! challenge themselves from the final commitment `Aᵢ·Rᵢ`, so the leader only
//! controls its own share `Aᵢ = g₁^αᵢ`. For each session it tabulates
//! `H₀(g₁^α·Rᵢ, m)` over many `α`, plus one list of `−H₀(R*·g₁^ρ, m′)` with
//! `R* = ∏ Rᵢ`, and asks [`ksum_solve`] for a zero-sum tuple. Then
//! `Σ cᵢ = c*` and `(c*, Σ sᵢ + ρ + c*·sk₀)` is a CoSi signature on `m′`.
//!
//! Against AGMS the challenge does not involve the message and responses
//! are `vᵢ·c − e·sk`, so the same assembly yields nothing; it runs as a
//! negative control.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::group::{Group, ToyGroup, ToyScalar};
use crate::schemes::cosi::cosi_sessions;
use crate::schemes::gms::fresh_sessions;
use crate::schemes::session::{self, message_digest, NonceSeed, SigningSession};
use crate::schemes::{
    collective_challenge, cosi_challenge, cosi_vf, kg, vf, AggregatedKey, JointSignature, MultiSigKeyPair, Scheme,
};
use crate::tree::{SimSchedule, Tree};

use super::wagner::{ksum_solve, KSumInstance};
use super::{ensure_attackable, AttackReport};

type El = <ToyGroup as Group>::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackTarget {
    CoSi,
    Agms,
}

impl AttackTarget {
    pub fn name(self) -> &'static str {
        match self {
            AttackTarget::CoSi => "cosi",
            AttackTarget::Agms => "agms",
        }
    }

    fn scheme(self) -> Scheme {
        match self {
            AttackTarget::CoSi => Scheme::CoSi,
            AttackTarget::Agms => Scheme::Agms,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KSumConfig {
    /// Number of lists; `k − 1` concurrent sessions are opened.
    pub k: usize,
    pub retries: usize,
    pub honest_signers: usize,
    /// Entries per list; `None` uses [`KSumInstance::default_list_len`].
    pub list_len: Option<usize>,
    /// Message the honest signers agree to sign.
    pub message: Vec<u8>,
    /// Message the leader forges on.
    pub target_message: Vec<u8>,
}

impl Default for KSumConfig {
    fn default() -> Self {
        KSumConfig {
            k: 4,
            retries: 8,
            honest_signers: 3,
            list_len: None,
            message: b"transfer 1 coin to carol".to_vec(),
            target_message: b"transfer 1000 coins to mallory".to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KSumForgery {
    pub message: Vec<u8>,
    pub signature: JointSignature<ToyGroup>,
    pub aggregated: AggregatedKey<ToyGroup>,
}

#[derive(Debug, Clone)]
pub struct KSumOutcome {
    pub target: AttackTarget,
    pub q: u64,
    pub k: usize,
    pub list_len: usize,
    pub attempts: usize,
    /// Retries in which the solver found no tuple.
    pub solver_misses: usize,
    /// Forgeries accepted by the target's verifier.
    pub forgeries: Vec<KSumForgery>,
}

impl KSumOutcome {
    pub fn successes(&self) -> usize {
        self.forgeries.len()
    }

    pub fn report(&self, grp: &ToyGroup) -> AttackReport {
        AttackReport {
            attack: "ksum".into(),
            params: serde_json::json!({
                "target": self.target.name(),
                "q": self.q,
                "p": grp.p(),
                "k": self.k,
                "list_len": self.list_len,
                "solver_misses": self.solver_misses,
            }),
            attempts: self.attempts,
            successes: self.successes(),
            example_forgery_hex: self.forgeries.first().map(|f| hex::encode(f.signature.to_bytes(grp))),
            cosi_accepts: None,
            kvf_accepts: None,
        }
    }
}

/// An honest subtree: real session handlers over its own tree, with the
/// adversarial leader as the parent of its root.
struct HonestSubtree<'a> {
    grp: &'a ToyGroup,
    tree: Tree,
    target: AttackTarget,
    sks: Vec<ToyScalar>,
    keys: Vec<MultiSigKeyPair<ToyGroup>>,
    /// Aggregate over the full signer set, leader included.
    x_full: El,
}

/// One concurrent session as seen by the leader.
struct OpenSession {
    sessions: Vec<SigningSession<ToyGroup>>,
    received: Vec<Vec<u8>>,
    commitment: El,
}

impl HonestSubtree<'_> {
    fn open<R: RngCore + ?Sized>(&self, m: &[u8], rng: &mut R) -> Result<OpenSession> {
        let schedule = SimSchedule::default();
        let mut sessions = match self.target {
            AttackTarget::CoSi => cosi_sessions(self.grp, &self.sks),
            AttackTarget::Agms => fresh_sessions(Scheme::Agms, &self.keys),
        };
        let (_, received) = session::announce(&self.tree, &schedule, m)?;
        let committed = session::commit(self.grp, &self.tree, &schedule, &mut sessions, &NonceSeed::draw(rng))?;
        Ok(OpenSession {
            sessions,
            received,
            commitment: committed.v_tilde,
        })
    }

    /// The challenge honest signers derive once the leader adds `share`.
    fn challenge_for(&self, commitment: &El, share: &El, m: &[u8]) -> ToyScalar {
        let v_tilde = self.grp.mul(share, commitment);
        match self.target {
            AttackTarget::CoSi => cosi_challenge(self.grp, &v_tilde, m),
            AttackTarget::Agms => collective_challenge(self.grp, &v_tilde, &self.x_full),
        }
    }

    /// Leader reveals its share; the subtree derives `c` and responds.
    fn finish(&self, mut open: OpenSession, share: &El, m: &[u8]) -> Result<ToyScalar> {
        let schedule = SimSchedule::default();
        let c = self.challenge_for(&open.commitment, share, m);
        if self.grp.is_zero(&c) {
            return Err(Error::SessionState("honest signers refuse a zero challenge".into()));
        }
        session::challenge(self.grp, &self.tree, &schedule, &mut open.sessions, c)?;
        let (_, s) = session::respond(self.grp, &self.tree, &schedule, &mut open.sessions, &open.received)?;
        Ok(s)
    }
}

/// Runs the k-sum forgery against `target` with `config.retries` fresh
/// rounds of `k − 1` sessions each. Only verified forgeries are returned.
pub fn ksum_attack<R: RngCore + ?Sized>(
    grp: &ToyGroup,
    target: AttackTarget,
    config: &KSumConfig,
    rng: &mut R,
) -> Result<KSumOutcome> {
    ensure_attackable(grp.params().group_id, grp.q())?;
    let k = config.k;
    if k < 2 || !k.is_power_of_two() {
        return Err(Error::AttackFailure(format!("k = {k} must be a power of two ≥ 2")));
    }
    if config.honest_signers == 0 {
        return Err(Error::EmptySet);
    }
    let q = grp.q();
    let list_len = config.list_len.unwrap_or_else(|| KSumInstance::default_list_len(q, k));

    let leader = kg(grp, rng)?;
    let keys = (0..config.honest_signers)
        .map(|_| kg(grp, rng))
        .collect::<Result<Vec<_>>>()?;
    let sks: Vec<ToyScalar> = keys.iter().map(|kp| kp.sk).collect();
    let honest_product = grp.product(keys.iter().map(|kp| kp.y()));
    let x_full = grp.mul(leader.y(), &honest_product);
    let aggregated = AggregatedKey {
        x_tilde: x_full,
        member_count: config.honest_signers + 1,
    };
    let subtree = HonestSubtree {
        grp,
        tree: Tree::for_signers(config.honest_signers, 3)?,
        target,
        sks,
        keys,
        x_full,
    };

    let mut outcome = KSumOutcome {
        target,
        q,
        k,
        list_len,
        attempts: 0,
        solver_misses: 0,
        forgeries: Vec::new(),
    };
    let m = &config.message;
    let m_prime = &config.target_message;

    for _ in 0..config.retries {
        outcome.attempts += 1;
        let opened = (0..k - 1).map(|_| subtree.open(m, rng)).collect::<Result<Vec<_>>>()?;
        let r_star = grp.product(opened.iter().map(|o| &o.commitment));

        let mut alphas = Vec::with_capacity(k - 1);
        let mut lists = Vec::with_capacity(k);
        for o in &opened {
            let (exps, values) = candidates(grp, list_len, rng, |alpha| {
                subtree.challenge_for(&o.commitment, &grp.exp_g(alpha), m)
            });
            alphas.push(exps);
            lists.push(values);
        }
        let forged_challenge = |rho: &ToyScalar| {
            let v = grp.mul(&r_star, &grp.exp_g(rho));
            match target {
                AttackTarget::CoSi => cosi_challenge(grp, &v, m_prime),
                AttackTarget::Agms => collective_challenge(grp, &v, &x_full),
            }
        };
        let (rhos, c_stars) = candidates(grp, list_len, rng, forged_challenge);
        lists.push(c_stars.iter().map(|&c| (q - c) % q).collect());

        let instance = KSumInstance { q, lists };
        let Some(idx) = ksum_solve(&instance) else {
            outcome.solver_misses += 1;
            continue;
        };

        let rho = rhos[idx[k - 1]];
        let c_star = grp.scalar(c_stars[idx[k - 1]]);
        let mut s_sum = grp.scalar_zero();
        for (i, o) in opened.into_iter().enumerate() {
            let share = grp.exp_g(&alphas[i][idx[i]]);
            s_sum = s_sum + subtree.finish(o, &share, m)?;
        }

        let candidates = match target {
            AttackTarget::CoSi => vec![s_sum + rho + c_star * leader.sk],
            AttackTarget::Agms => vec![
                s_sum + rho + c_star * leader.sk,
                s_sum + rho * c_star - message_digest(grp, m_prime) * leader.sk,
            ],
        };
        for s in candidates {
            let sig = JointSignature {
                scheme: target.scheme(),
                c: c_star,
                s,
            };
            let accepted = match target {
                AttackTarget::CoSi => cosi_vf(grp, &aggregated, m_prime, &sig),
                AttackTarget::Agms => vf(grp, &aggregated, m_prime, &sig),
            };
            if accepted {
                outcome.forgeries.push(KSumForgery {
                    message: m_prime.clone(),
                    signature: sig,
                    aggregated,
                });
                break;
            }
        }
    }
    Ok(outcome)
}

/// `list_len` random exponents with their nonzero hash values.
fn candidates<R, F>(grp: &ToyGroup, list_len: usize, rng: &mut R, hash: F) -> (Vec<ToyScalar>, Vec<u64>)
where
    R: RngCore + ?Sized,
    F: Fn(&ToyScalar) -> ToyScalar,
{
    let mut exps = Vec::with_capacity(list_len);
    let mut values = Vec::with_capacity(list_len);
    while exps.len() < list_len {
        let e = grp.random_scalar(rng);
        let h = hash(&e);
        if grp.is_zero(&h) {
            continue;
        }
        exps.push(e);
        values.push(h.value());
    }
    (exps, values)
}

/// First verified CoSi forgery, or [`Error::AttackFailure`] once retries run out.
pub fn ksum_attack_cosi<R: RngCore + ?Sized>(grp: &ToyGroup, config: &KSumConfig, rng: &mut R) -> Result<KSumForgery> {
    let outcome = ksum_attack(grp, AttackTarget::CoSi, config, rng)?;
    outcome
        .forgeries
        .into_iter()
        .next()
        .ok_or_else(|| Error::AttackFailure(format!("no k-sum tuple within {} retries", config.retries)))
}
