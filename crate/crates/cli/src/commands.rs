use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use gms_core::attacks::{ensure_attackable, ksum_attack, rogue_key_forge, AttackReport, AttackTarget, KSumConfig};
use gms_core::endorsement::compare_flows;
use gms_core::group::counter::measure;
use gms_core::group::{GroupParams, OpCounts};
use gms_core::io::{self, AggregateFile, KeyBundle, SecretBundle};
use gms_core::schemes::{
    agms_offline, agms_online, cosi_sign_run, cosi_vf, gms_sign_run, kag, kag_public, kg, kvf, vf, AggregatedKey,
    JointSignature, MultiSigKeyPair, Scheme, SigningRun,
};
use gms_core::tree::{SimSchedule, Tree};
use gms_core::{Error, Group, GroupId, Ristretto255, ToyGroup};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::{AttackKind, Cli, Command, Format, OutputArgs, Target, TreeArgs};

/// Default subgroup order for attack demos when `--toy-q` is absent.
const ATTACK_TOY_Q: u64 = 65521;
const METRICS_SCHEMA: &str = "gms-metrics/v1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    /// A verification or attack expectation did not hold.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_)
            | CliError::Core(Error::CapacityExceeded { .. } | Error::BackendRefused | Error::InvalidTopology(_)) => 2,
            _ => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn rng_for(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn toy_group(q: Option<u64>) -> CliResult<ToyGroup> {
    match q {
        None => Ok(ToyGroup::default()),
        Some(q) => ToyGroup::with_order(q).map_err(|e| CliError::Usage(format!("--toy-q {q}: {e}"))),
    }
}

/// Runs `$body` with `$g` bound to the selected backend.
macro_rules! with_group {
    ($backend:expr, $toy:expr, |$g:ident| $body:expr) => {
        match $backend {
            GroupId::Curve => {
                let $g = &Ristretto255::new();
                $body
            }
            GroupId::Toy => {
                let $g = &$toy;
                $body
            }
        }
    };
}

/// Backend named in a file header; `--backend`, if given, must agree.
fn group_from_params(params: &GroupParams, requested: Option<GroupId>) -> CliResult<(GroupId, ToyGroup)> {
    if let Some(b) = requested.filter(|b| *b != params.group_id) {
        return Err(CliError::Usage(format!(
            "--backend {b} but the file was written for {}",
            params.group_id
        )));
    }
    let toy = match params.group_id {
        GroupId::Toy => {
            let q = params.q.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b));
            ToyGroup::with_order(q).map_err(|e| CliError::Core(e.into()))?
        }
        GroupId::Curve => ToyGroup::default(),
    };
    Ok((params.group_id, toy))
}

pub fn run(cli: Cli) -> CliResult {
    let backend = cli.backend.unwrap_or(GroupId::Curve);
    let mut rng = rng_for(cli.seed);
    match cli.command {
        Command::Keygen { count, out } => {
            with_group!(backend, toy_group(cli.toy_q)?, |g| keygen(g, count, &out, &mut rng))
        }
        Command::VerifyKeys { keys } => {
            let bundle: KeyBundle = io::read_json(&keys)?;
            let (id, toy) = group_from_params(&bundle.params, cli.backend)?;
            with_group!(id, toy, |g| verify_keys(g, &bundle))
        }
        Command::Simulate {
            tree,
            scheme,
            message,
            keys,
            out,
        } => {
            let seed = cli.seed;
            with_group!(backend, toy_group(cli.toy_q)?, |g| simulate(
                g,
                &SimulateArgs {
                    tree: &tree,
                    scheme,
                    message: message.as_bytes(),
                    keys: keys.as_deref(),
                    out: &out,
                    seed,
                },
                &mut rng
            ))
        }
        Command::Verify {
            scheme,
            aggregate,
            signature,
            message,
        } => {
            let agg: AggregateFile = io::read_json(&aggregate)?;
            let (id, toy) = group_from_params(&agg.params, cli.backend)?;
            let sig = io::read_bytes(&signature)?;
            with_group!(id, toy, |g| verify(g, scheme, &agg, &sig, message.as_bytes()))
        }
        Command::Bench {
            scheme,
            signers,
            branching,
            depth,
            reps,
            output,
        } => {
            let rows = with_group!(backend, toy_group(cli.toy_q)?, |g| bench(
                g, &scheme, &signers, branching, depth, reps, &mut rng
            ))?;
            emit_rows(&output, BENCH_HEADER, &rows, |r| {
                format!(
                    "{},{},{},{:.1},{:.1},{}",
                    r.scheme, r.n, r.phase, r.mean_ns, r.std_ns, r.exp_count
                )
            })
        }
        Command::Attack {
            kind,
            target,
            k,
            retries,
            signers,
            out,
        } => {
            let backend = cli.backend.unwrap_or(GroupId::Toy);
            let toy = toy_group(Some(cli.toy_q.unwrap_or(ATTACK_TOY_Q)))?;
            let report = match kind {
                AttackKind::RogueKey => with_group!(backend, toy, |g| rogue_key(g, signers, &mut rng))?,
                AttackKind::Ksum => {
                    ensure_attackable(backend, toy.q())?;
                    let config = KSumConfig {
                        k,
                        retries,
                        honest_signers: signers,
                        ..KSumConfig::default()
                    };
                    let target = match target {
                        Target::Cosi => AttackTarget::CoSi,
                        Target::Agms => AttackTarget::Agms,
                    };
                    ksum_attack(&toy, target, &config, &mut rng)?.report(&toy)
                }
            };
            write_output(out.as_deref(), &json_text(&report)?)?;
            eprintln!(
                "{}: {} success(es) in {} attempt(s)",
                report.attack, report.successes, report.attempts
            );
            check_attack(kind, target, &report)
        }
        Command::Endorse {
            signers,
            detailed,
            output,
        } => with_group!(backend, toy_group(cli.toy_q)?, |g| {
            let cmp = compare_flows(g, &signers, b"endorse", &mut rng)?;
            let rows = if detailed { cmp.detailed_rows() } else { cmp.rows() };
            emit_rows(&output, gms_core::endorsement::COMPARISON_CSV_HEADER, &rows, |r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    r.flow.name(),
                    r.n_endorsers,
                    r.step,
                    r.wall_ns,
                    r.exp_count,
                    r.verify_calls,
                    r.bytes
                )
            })
        }),
    }
}

fn json_text<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(Error::Malformed(e.to_string())))?;
    s.push('\n');
    Ok(s)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => Ok(io::write_bytes(path, text.as_bytes())?),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Core(Error::Io(e.to_string())))?;
            Ok(())
        }
    }
}

fn emit_rows<T: Serialize>(output: &OutputArgs, header: &str, rows: &[T], line: impl Fn(&T) -> String) -> CliResult {
    let text = match output.format {
        Format::Json => json_text(&rows)?,
        Format::Csv => {
            let mut s = format!("{header}\n");
            for r in rows {
                s.push_str(&line(r));
                s.push('\n');
            }
            s
        }
    };
    write_output(output.out.as_deref(), &text)
}

fn keygen<G: Group>(grp: &G, count: usize, out: &Path, rng: &mut impl RngCore) -> CliResult {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let keys = (0..count).map(|_| kg(grp, rng)).collect::<Result<Vec<_>, _>>()?;
    let pks: Vec<_> = keys.iter().map(|k| k.public).collect();
    io::write_json(&out.join("public.json"), &KeyBundle::new(grp, &pks))?;
    io::write_json(&out.join("secret.json"), &SecretBundle::new(grp, &keys))?;
    eprintln!("wrote {count} key(s) to {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct KeyCheck {
    schema: &'static str,
    total: usize,
    valid: usize,
    invalid: Vec<usize>,
}

fn verify_keys<G: Group>(grp: &G, bundle: &KeyBundle) -> CliResult {
    let pks = bundle.public_keys(grp)?;
    let invalid: Vec<usize> = pks
        .iter()
        .enumerate()
        .filter(|(_, pk)| !kvf(grp, pk))
        .map(|(i, _)| i)
        .collect();
    let report = KeyCheck {
        schema: "gms-key-check/v1",
        total: pks.len(),
        valid: pks.len() - invalid.len(),
        invalid,
    };
    write_output(None, &json_text(&report)?)?;
    if report.invalid.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("{} key(s) failed KVf", report.invalid.len())))
    }
}

fn build_tree(n: usize, branching: Option<usize>, depth: usize) -> CliResult<Tree> {
    Ok(match branching {
        Some(b) => Tree::build(n, b, depth)?,
        None => Tree::for_signers(n, depth)?,
    })
}

struct SimulateArgs<'a> {
    tree: &'a TreeArgs,
    scheme: Scheme,
    message: &'a [u8],
    keys: Option<&'a Path>,
    out: &'a Path,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct PhaseMetrics {
    phase: &'static str,
    messages: usize,
    exp_count: u64,
    max_node_exp: u64,
    wall_ns: u128,
}

#[derive(Serialize)]
struct SimulationMetrics {
    schema: &'static str,
    backend: GroupId,
    scheme: Scheme,
    signers: usize,
    branching: usize,
    depth: usize,
    seed: Option<u64>,
    message_hex: String,
    attempts: usize,
    messages: usize,
    offline_exp: u64,
    online_exp: u64,
    vf_exp: u64,
    verified: bool,
    offline_ns: u128,
    online_ns: u128,
    total_ns: u128,
    vf_ns: u128,
    phases: Vec<PhaseMetrics>,
}

/// Signature and per-phase record of one simulated signing.
struct Signed<G: Group> {
    aggregated: AggregatedKey<G>,
    signature: JointSignature<G>,
    runs: Vec<SigningRun<G>>,
    attempts: usize,
    offline_ns: u128,
    online_ns: u128,
}

fn sign_once<G: Group>(
    grp: &G,
    tree: &Tree,
    scheme: Scheme,
    keys: &[MultiSigKeyPair<G>],
    m: &[u8],
    rng: &mut impl RngCore,
) -> CliResult<Signed<G>> {
    let schedule = SimSchedule::default();
    Ok(match scheme {
        Scheme::Agms => {
            let t0 = Instant::now();
            let mut offline = agms_offline(grp, tree, keys, rng, &schedule)?;
            let offline_ns = t0.elapsed().as_nanos();
            let t1 = Instant::now();
            let online = agms_online(grp, tree, &mut offline.sessions, m, &schedule)?;
            let online_ns = t1.elapsed().as_nanos();
            let offline_run = SigningRun {
                signature: online.signature,
                phases: offline.phases,
                attempts: offline.attempts,
            };
            Signed {
                aggregated: offline.aggregated_key,
                signature: online.signature,
                attempts: offline.attempts,
                runs: vec![offline_run, online],
                offline_ns,
                online_ns,
            }
        }
        Scheme::Gms => {
            let pks: Vec<_> = keys.iter().map(|k| k.public).collect();
            let aggregated = kag_public(grp, &pks)?;
            let t0 = Instant::now();
            let run = gms_sign_run(grp, tree, keys, &aggregated, m, rng, &schedule)?;
            Signed {
                aggregated,
                signature: run.signature,
                attempts: run.attempts,
                runs: vec![run],
                offline_ns: 0,
                online_ns: t0.elapsed().as_nanos(),
            }
        }
        Scheme::CoSi => {
            let ys: Vec<_> = keys.iter().map(|k| k.public.y).collect();
            let sks: Vec<_> = keys.iter().map(|k| k.sk).collect();
            let aggregated = kag(grp, &ys)?;
            let t0 = Instant::now();
            let run = cosi_sign_run(grp, tree, &sks, m, rng, &schedule)?;
            Signed {
                aggregated,
                signature: run.signature,
                attempts: run.attempts,
                runs: vec![run],
                offline_ns: 0,
                online_ns: t0.elapsed().as_nanos(),
            }
        }
    })
}

fn verify_signature<G: Group>(grp: &G, agg: &AggregatedKey<G>, m: &[u8], sig: &JointSignature<G>) -> bool {
    match sig.scheme {
        Scheme::CoSi => cosi_vf(grp, agg, m, sig),
        Scheme::Gms | Scheme::Agms => vf(grp, agg, m, sig),
    }
}

fn load_or_generate<G: Group>(
    grp: &G,
    n: usize,
    dir: Option<&Path>,
    rng: &mut impl RngCore,
) -> CliResult<Vec<MultiSigKeyPair<G>>> {
    let Some(dir) = dir else {
        return Ok((0..n).map(|_| kg(grp, rng)).collect::<Result<Vec<_>, _>>()?);
    };
    let public: KeyBundle = io::read_json(&dir.join("public.json"))?;
    let secret: SecretBundle = io::read_json(&dir.join("secret.json"))?;
    let keys = io::load_keypairs(grp, &public, &secret)?;
    if keys.len() != n {
        return Err(CliError::Usage(format!(
            "--signers {n} but {} holds {} keys",
            dir.display(),
            keys.len()
        )));
    }
    Ok(keys)
}

fn simulate<G: Group>(grp: &G, args: &SimulateArgs<'_>, rng: &mut impl RngCore) -> CliResult {
    let tree = build_tree(args.tree.signers, args.tree.branching, args.tree.depth)?;
    let keys = load_or_generate(grp, tree.len(), args.keys, rng)?;
    let signed = sign_once(grp, &tree, args.scheme, &keys, args.message, rng)?;
    let t = Instant::now();
    let (verified, vf_ops) = measure(|| verify_signature(grp, &signed.aggregated, args.message, &signed.signature));
    let vf_ns = t.elapsed().as_nanos();

    let offline_exp = if args.scheme == Scheme::Agms {
        signed.runs[0].total_ops().exp_equivalents()
    } else {
        0
    };
    let total_exp: u64 = signed.runs.iter().map(|r| r.total_ops().exp_equivalents()).sum();
    let phases: Vec<PhaseMetrics> = signed
        .runs
        .iter()
        .flat_map(|r| &r.phases)
        .map(|p| PhaseMetrics {
            phase: p.phase.name(),
            messages: p.messages.len(),
            exp_count: p.total_ops().exp_equivalents(),
            max_node_exp: p.node_ops.iter().map(OpCounts::exp_equivalents).max().unwrap_or(0),
            wall_ns: p.wall.as_nanos(),
        })
        .collect();
    let metrics = SimulationMetrics {
        schema: METRICS_SCHEMA,
        backend: grp.params().group_id,
        scheme: args.scheme,
        signers: tree.len(),
        branching: tree.branching(),
        depth: tree.depth(),
        seed: args.seed,
        message_hex: hex::encode(args.message),
        attempts: signed.attempts,
        messages: phases.iter().map(|p| p.messages).sum(),
        offline_exp,
        online_exp: total_exp - offline_exp,
        vf_exp: vf_ops.exp_equivalents(),
        verified,
        offline_ns: signed.offline_ns,
        online_ns: signed.online_ns,
        total_ns: signed.offline_ns + signed.online_ns,
        vf_ns,
        phases,
    };

    let mut transcript = gms_core::tree::Transcript::default();
    for p in signed.runs.iter().flat_map(|r| &r.phases) {
        transcript.extend(p);
    }
    io::write_bytes(&args.out.join("signature.bin"), &signed.signature.to_bytes(grp))?;
    io::write_json(
        &args.out.join("aggregate.json"),
        &AggregateFile::new(grp, &signed.aggregated),
    )?;
    io::write_json(&args.out.join("metrics.json"), &metrics)?;
    io::write_bytes(&args.out.join("transcript.jsonl"), transcript.to_jsonl().as_bytes())?;
    eprintln!(
        "{} N={} signature {} (offline {} ns, online {} ns)",
        args.scheme,
        tree.len(),
        if verified { "verified" } else { "REJECTED" },
        signed.offline_ns,
        signed.online_ns
    );
    if verified {
        Ok(())
    } else {
        Err(CliError::Check("signature failed verification".into()))
    }
}

#[derive(Serialize)]
struct VerifyReport {
    schema: &'static str,
    scheme: Scheme,
    valid: bool,
}

fn verify<G: Group>(grp: &G, scheme: Scheme, agg: &AggregateFile, sig: &[u8], m: &[u8]) -> CliResult {
    let aggregated = agg.aggregated_key(grp)?;
    let sig = JointSignature::from_bytes(grp, scheme, sig)?;
    let valid = verify_signature(grp, &aggregated, m, &sig);
    write_output(
        None,
        &json_text(&VerifyReport {
            schema: "gms-verify/v1",
            scheme,
            valid,
        })?,
    )?;
    if valid {
        Ok(())
    } else {
        Err(CliError::Check("signature rejected".into()))
    }
}

const BENCH_HEADER: &str = "scheme,N,phase,mean_ns,std_ns,exp_count";

#[derive(Debug, Serialize)]
struct BenchRow {
    scheme: Scheme,
    #[serde(rename = "N")]
    n: usize,
    phase: &'static str,
    mean_ns: f64,
    std_ns: f64,
    exp_count: u64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Rows per scheme and `N`: `offline` (empty for CoSi and GMS), `online`, `vf`.
fn bench<G: Group>(
    grp: &G,
    schemes: &[Scheme],
    signers: &[usize],
    branching: Option<usize>,
    depth: usize,
    reps: u32,
    rng: &mut impl RngCore,
) -> CliResult<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in signers {
        let tree = build_tree(n, branching, depth)?;
        let keys = (0..n).map(|_| kg(grp, rng)).collect::<Result<Vec<_>, _>>()?;
        for &scheme in schemes {
            let mut samples = [Vec::new(), Vec::new(), Vec::new()];
            let mut exps = [0u64; 3];
            for _ in 0..reps {
                let signed = sign_once(grp, &tree, scheme, &keys, b"bench", rng)?;
                let t = Instant::now();
                let (ok, vf_ops) = measure(|| verify_signature(grp, &signed.aggregated, b"bench", &signed.signature));
                let vf_ns = t.elapsed().as_nanos();
                if !ok {
                    return Err(CliError::Check(format!("{scheme} N={n}: signature rejected")));
                }
                let offline = if scheme == Scheme::Agms {
                    signed.runs[0].total_ops().exp_equivalents()
                } else {
                    0
                };
                let total: u64 = signed.runs.iter().map(|r| r.total_ops().exp_equivalents()).sum();
                exps = [offline, total - offline, vf_ops.exp_equivalents()];
                for (s, v) in samples.iter_mut().zip([signed.offline_ns, signed.online_ns, vf_ns]) {
                    s.push(v as f64);
                }
            }
            for (i, phase) in ["offline", "online", "vf"].into_iter().enumerate() {
                let (mean_ns, std_ns) = mean_std(&samples[i]);
                rows.push(BenchRow {
                    scheme,
                    n,
                    phase,
                    mean_ns,
                    std_ns,
                    exp_count: exps[i],
                });
            }
        }
    }
    Ok(rows)
}

fn rogue_key<G: Group>(grp: &G, signers: usize, rng: &mut impl RngCore) -> CliResult<AttackReport> {
    let honest: Vec<_> = (0..signers.max(1))
        .map(|_| grp.exp_g(&grp.random_scalar(rng)))
        .collect();
    let sk1 = grp.random_scalar(rng);
    let out = rogue_key_forge(grp, &honest, sk1, b"rogue-key forgery", 100, rng)?;
    Ok(AttackReport {
        attack: "rogue-key".into(),
        params: serde_json::json!({
            "backend": grp.params().group_id,
            "q": hex::encode(&grp.params().q),
            "honest_signers": honest.len(),
            "pop_accepts": out.pop_accepts,
        }),
        attempts: out.pop_attempts,
        successes: usize::from(out.cosi_accepts),
        example_forgery_hex: Some(hex::encode(out.forgery.to_bytes(grp))),
        cosi_accepts: Some(out.cosi_accepts),
        kvf_accepts: Some(out.pop_accepts > 0),
    })
}

fn check_attack(kind: AttackKind, target: Target, report: &AttackReport) -> CliResult {
    let ok = match (kind, target) {
        (AttackKind::RogueKey, _) => report.cosi_accepts == Some(true) && report.kvf_accepts == Some(false),
        (AttackKind::Ksum, Target::Cosi) => report.successes >= 1,
        (AttackKind::Ksum, Target::Agms) => report.successes == 0,
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{} attack did not behave as expected",
            report.attack
        )))
    }
}
