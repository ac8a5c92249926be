//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use gms_core::attacks::{ksum_attack, rogue_key_forge, AttackTarget, KSumConfig};
use gms_core::endorsement::{run_default_flow, run_revised_flow};
use gms_core::gamma::{gamma_sign, gamma_vf, GammaKeyPair, GammaSignature};
use gms_core::group::counter::measure;
use gms_core::hashing::{hash_to_scalar, HashInput, HashTag};
use gms_core::schemes::{
    agms_offline, agms_online, agms_sign, cosi_vf, gms_sign, kag_public, kg, kvf, vf, AggregatedKey, JointSignature,
    MultiSigKeyPair, ProofOfPossession, PublicKey, Scheme,
};
use gms_core::tree::{Phase, SimSchedule, Tree};
use gms_core::{Group, Ristretto255, ToyGroup};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn keys<G: Group>(grp: &G, n: usize, r: &mut impl RngCore) -> Vec<MultiSigKeyPair<G>> {
    (0..n).map(|_| kg(grp, r).unwrap()).collect()
}

fn c1_completeness() -> Outcome {
    let grp = Ristretto255::new();
    let start = Instant::now();
    let mut r = rng(1);
    let mut checked = 0;
    for n in [1, 3, 7, 63, 511] {
        let tree = Tree::for_signers(n, 3).map_err(|e| e.to_string())?;
        ensure(tree.depth() <= 3, || format!("N={n}: depth {}", tree.depth()))?;
        let ks = keys(&grp, n, &mut r);
        let agg = kag_public(&grp, &ks.iter().map(|k| k.public).collect::<Vec<_>>()).unwrap();
        for i in 0..200 {
            let m = format!("message {i} for {n}").into_bytes();
            let g = gms_sign(&grp, &tree, &ks, &agg, &m, &mut r).map_err(|e| e.to_string())?;
            ensure(vf(&grp, &agg, &m, &g), || format!("GMS N={n} message {i} rejected"))?;
            let (agg_a, a) = agms_sign(&grp, &tree, &ks, &m, &mut r).map_err(|e| e.to_string())?;
            ensure(vf(&grp, &agg_a, &m, &a), || format!("AGMS N={n} message {i} rejected"))?;
            checked += 2;
        }
    }
    let kp = GammaKeyPair::generate(&grp, &mut r);
    for i in 0..200 {
        let m = format!("gamma {i}").into_bytes();
        let s = gamma_sign(&grp, &kp, &m, &mut r).map_err(|e| e.to_string())?;
        ensure(gamma_vf(&grp, &kp.pk, &m, &s), || format!("Gamma message {i} rejected"))?;
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{checked}/{checked} signatures accepted in {secs:.1} s"))
}

fn c2_replay() -> Outcome {
    let grp = Ristretto255::new();
    let mut mismatches = 0;
    for run in 0..100u64 {
        let n = if run % 2 == 0 { 3 } else { 15 };
        let tree = Tree::for_signers(n, 3).unwrap();
        let ks = keys(&grp, n, &mut rng(1000 + run));
        let agg = kag_public(&grp, &ks.iter().map(|k| k.public).collect::<Vec<_>>()).unwrap();
        let m = format!("replay {run}").into_bytes();
        let g = gms_sign(&grp, &tree, &ks, &agg, &m, &mut rng(run)).unwrap();
        let schedule = SimSchedule::default();
        let mut off = agms_offline(&grp, &tree, &ks, &mut rng(run), &schedule).unwrap();
        let a = agms_online(&grp, &tree, &mut off.sessions, &m, &schedule)
            .unwrap()
            .signature;
        if g.to_bytes(&grp) != a.to_bytes(&grp) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches}/100 mismatches"))?;
    Ok("100 runs, 0 mismatches".into())
}

fn c3_op_counts() -> Outcome {
    let grp = Ristretto255::new();
    let mut r = rng(3);
    let mut max_vf = 0;
    let mut max_kvf = 0;
    for n in [1, 7, 63] {
        let tree = Tree::for_signers(n, 3).unwrap();
        let ks = keys(&grp, n, &mut r);
        let schedule = SimSchedule::default();
        let mut off = agms_offline(&grp, &tree, &ks, &mut r, &schedule).unwrap();
        ensure(off.attempts == 1, || "unexpected challenge resample".into())?;
        for p in &off.phases {
            let expected = if p.phase == Phase::Commit { 1 } else { 0 };
            for (node, ops) in p.node_ops.iter().enumerate() {
                ensure(ops.exp_equivalents() == expected, || {
                    format!("N={n} {} node {node}: {} exps", p.phase.name(), ops.exp_equivalents())
                })?;
            }
        }
        let online = agms_online(&grp, &tree, &mut off.sessions, b"m", &schedule).unwrap();
        for p in &online.phases {
            for (node, ops) in p.node_ops.iter().enumerate() {
                ensure(ops.exp_equivalents() == 0, || {
                    format!("N={n} online node {node}: {ops:?}")
                })?;
            }
        }
        let (ok, vf_ops) = measure(|| vf(&grp, &off.aggregated_key, b"m", &online.signature));
        ensure(ok, || "signature rejected".into())?;
        max_vf = max_vf.max(vf_ops.exp_equivalents());
        for k in &ks {
            let (ok, ops) = measure(|| kvf(&grp, &k.public));
            ensure(ok, || "kvf rejected honest key".into())?;
            max_kvf = max_kvf.max(ops.exp_equivalents());
        }
    }
    ensure(max_vf <= 3 && max_kvf <= 3, || {
        format!("vf {max_vf}, kvf {max_kvf} exps")
    })?;
    Ok(format!(
        "online 0, offline 1 per signer, vf {max_vf}, kvf {max_kvf} exp-equivalents"
    ))
}

fn c4_online_fraction() -> Outcome {
    let grp = Ristretto255::new();
    let mut r = rng(4);
    let tree = Tree::for_signers(1024, 3).unwrap();
    let ks = keys(&grp, 1024, &mut r);
    let schedule = SimSchedule::default();
    let mut fractions = Vec::new();
    for rep in 0..5 {
        let t0 = Instant::now();
        let mut off = agms_offline(&grp, &tree, &ks, &mut r, &schedule).unwrap();
        let offline = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let run = agms_online(&grp, &tree, &mut off.sessions, format!("m{rep}").as_bytes(), &schedule).unwrap();
        let online = t1.elapsed().as_secs_f64();
        ensure(
            vf(&grp, &off.aggregated_key, format!("m{rep}").as_bytes(), &run.signature),
            || "rejected".into(),
        )?;
        fractions.push(online / (online + offline));
    }
    fractions.sort_by(f64::total_cmp);
    let median = fractions[fractions.len() / 2];
    ensure(median <= 0.10, || format!("online fraction {:.2}%", median * 100.0))?;
    Ok(format!(
        "median online fraction {:.2}% over 5 runs at N=1024",
        median * 100.0
    ))
}

fn c5_rogue_key() -> Outcome {
    let grp = Ristretto255::new();
    let mut r = rng(5);
    let honest: Vec<_> = (0..7).map(|_| grp.exp_g(&grp.random_scalar(&mut r))).collect();
    let sk1 = grp.random_scalar(&mut r);
    let out = rogue_key_forge(&grp, &honest, sk1, b"forged", 100, &mut r).map_err(|e| e.to_string())?;
    ensure(out.cosi_accepts, || "forgery rejected by cosi_vf".into())?;
    ensure(cosi_vf(&grp, &out.aggregated, b"forged", &out.forgery), || {
        "re-check failed".into()
    })?;
    ensure(out.pop_accepts == 0, || {
        format!("{}/100 fabricated pops accepted", out.pop_accepts)
    })?;
    Ok("cosi_vf accepts forgery; kvf rejects 100/100 fabricated pops".into())
}

fn c6_ksum() -> Outcome {
    let start = Instant::now();
    let grp = ToyGroup::with_order(65521).unwrap();
    let config = KSumConfig::default();
    let cosi = ksum_attack(&grp, AttackTarget::CoSi, &config, &mut rng(42)).map_err(|e| e.to_string())?;
    let agms = ksum_attack(&grp, AttackTarget::Agms, &config, &mut rng(42)).map_err(|e| e.to_string())?;
    for f in &cosi.forgeries {
        ensure(cosi_vf(&grp, &f.aggregated, &f.message, &f.signature), || {
            "unverified forgery".into()
        })?;
    }
    ensure(cosi.successes() >= 1, || {
        format!("0 CoSi forgeries in {} retries", cosi.attempts)
    })?;
    ensure(agms.successes() == 0, || format!("{} AGMS forgeries", agms.successes()))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "q={}, k=4: CoSi {}/{} retries forged, AGMS {}/{} ({secs:.2} s)",
        grp.q(),
        cosi.successes(),
        cosi.attempts,
        agms.successes(),
        agms.attempts
    ))
}

fn c7_endorsement() -> Outcome {
    let grp = Ristretto255::new();
    let mut r = rng(7);
    let sig_len = 2 * grp.params().scalar_len;
    for n in [2, 4, 8, 16, 32] {
        let rev = run_revised_flow(&grp, n, b"tx", &mut r).map_err(|e| e.to_string())?;
        let def = run_default_flow(&grp, n, b"tx", &mut r).map_err(|e| e.to_string())?;
        ensure(rev.ledger_verify_calls() == 1, || {
            format!("revised N={n}: {} calls", rev.ledger_verify_calls())
        })?;
        ensure(def.ledger_verify_calls() == n, || {
            format!("default N={n}: {} calls", def.ledger_verify_calls())
        })?;
        let (rb, db) = (
            rev.endorsements.signature_bytes(&grp).len(),
            def.endorsements.signature_bytes(&grp).len(),
        );
        ensure(rb == sig_len, || format!("revised N={n}: {rb} bytes"))?;
        ensure(db == n * sig_len, || format!("default N={n}: {db} bytes"))?;
    }
    Ok(format!("revised 1 call / {sig_len} B; default N calls / N×{sig_len} B"))
}

fn flip_bit(bytes: &[u8], r: &mut impl Rng) -> Vec<u8> {
    let mut out = bytes.to_vec();
    let bit = r.gen_range(0..out.len() * 8);
    out[bit / 8] ^= 1 << (bit % 8);
    out
}

fn c8_tamper() -> Outcome {
    let grp = Ristretto255::new();
    let mut r = rng(8);
    let tree = Tree::for_signers(7, 3).unwrap();
    let ks = keys(&grp, 7, &mut r);
    let mut trials = 0;
    let mut false_accepts = 0;
    while trials < 600 {
        let m = format!("tamper {trials}").into_bytes();
        let (agg, sig) = agms_sign(&grp, &tree, &ks, &m, &mut r).unwrap();
        let field = trials % 6;
        let accepted = match field {
            0 => vf(&grp, &agg, &flip_bit(&m, &mut r), &sig),
            1 | 2 => {
                let enc = grp.encode_scalar(if field == 1 { &sig.c } else { &sig.s });
                match grp.decode_scalar(&flip_bit(&enc, &mut r)) {
                    Err(_) => false,
                    Ok(x) => {
                        let t = if field == 1 {
                            JointSignature { c: x, ..sig }
                        } else {
                            JointSignature { s: x, ..sig }
                        };
                        vf(&grp, &agg, &m, &t)
                    }
                }
            }
            3 => match grp.decode_element(&flip_bit(&grp.encode_element(&agg.x_tilde), &mut r)) {
                Err(_) => false,
                Ok(x) => vf(&grp, &AggregatedKey { x_tilde: x, ..agg }, &m, &sig),
            },
            _ => {
                let pk = ks[trials % ks.len()].public;
                let which = if field == 4 { pk.pop.a } else { pk.pop.d };
                match grp.decode_scalar(&flip_bit(&grp.encode_scalar(&which), &mut r)) {
                    Err(_) => false,
                    Ok(x) => {
                        let pop = if field == 4 {
                            ProofOfPossession { a: x, ..pk.pop }
                        } else {
                            ProofOfPossession { d: x, ..pk.pop }
                        };
                        kvf(&grp, &PublicKey { pop, ..pk })
                    }
                }
            }
        };
        false_accepts += usize::from(accepted);
        trials += 1;
    }
    ensure(false_accepts == 0, || {
        format!("{false_accepts}/{trials} tampered inputs accepted")
    })?;
    Ok(format!("{trials} single-bit tampers over m, c, S, X̃, a, d: 0 accepted"))
}

/// Oracle over p = 23, q = 11 built from repeated multiplication and
/// exhaustive discrete-log search.
struct BruteForce {
    p: u64,
    q: u64,
    g: u64,
}

impl BruteForce {
    fn pow(&self, b: u64, e: u64) -> u64 {
        (0..e).fold(1, |acc, _| acc * b % self.p)
    }

    fn dlog(&self, x: u64) -> u64 {
        (0..self.q)
            .find(|&e| self.pow(self.g, e) == x)
            .expect("subgroup member")
    }

    fn inv_scalar(&self, s: u64) -> u64 {
        (1..self.q).find(|&t| s * t % self.q == 1).expect("nonzero")
    }

    /// Verification `(g^s · y^e)^(1/c)` computed in the exponent.
    fn verify_point(&self, s: u64, y: u64, e: u64, c: u64) -> u64 {
        let exp = (s + e * self.dlog(y)) % self.q * self.inv_scalar(c) % self.q;
        self.pow(self.g, exp)
    }
}

fn c9_toy_oracle() -> Outcome {
    let grp = ToyGroup::default();
    let o = BruteForce { p: 23, q: 11, g: 2 };
    let mut r = rng(9);
    let el = |x: u64| grp.element(x).unwrap();
    for case in 0..1000 {
        let (i, j) = (r.gen_range(0..11), r.gen_range(0..11));
        let (s, t) = (r.gen_range(0..11u64), r.gen_range(1..11u64));
        let (a, b) = (o.pow(2, i), o.pow(2, j));
        let mismatch = |what: &str| format!("case {case}: {what}");
        ensure(grp.exp(&el(a), &grp.scalar(s)).value() == o.pow(a, s), || {
            mismatch("exp")
        })?;
        ensure(grp.mul(&el(a), &el(b)).value() == a * b % 23, || mismatch("mul"))?;
        ensure(
            grp.scalar_inv(&grp.scalar(t)).unwrap().value() == o.inv_scalar(t),
            || mismatch("inv"),
        )?;
        ensure(grp.element_inv(&el(a)).value() == o.pow(2, (11 - i) % 11), || {
            mismatch("element inv")
        })?;
        let me = grp.multi_exp(&[(el(a), grp.scalar(s)), (el(b), grp.scalar(t))]);
        ensure(me.value() == o.pow(a, s) * o.pow(b, t) % 23, || mismatch("multi_exp"))?;

        let m = format!("oracle {case}").into_bytes();
        // Gamma: c = H0(V, pk), e = H1(m)
        let kp = GammaKeyPair::generate(&grp, &mut r);
        let mut sig = gamma_sign(&grp, &kp, &m, &mut r).unwrap();
        if case % 2 == 1 {
            sig = GammaSignature {
                s: grp.scalar(r.gen_range(0..11)),
                ..sig
            };
        }
        let e = hash_to_scalar(&grp, HashTag::H1, &HashInput::new().bytes(&m)).value();
        let v = o.verify_point(sig.s.value(), kp.pk.value(), e, sig.c.value());
        let want = hash_to_scalar(
            &grp,
            HashTag::H0,
            &HashInput::new().element(&grp, &el(v)).element(&grp, &kp.pk),
        ) == sig.c;
        ensure(gamma_vf(&grp, &kp.pk, &m, &sig) == want, || mismatch("gamma_vf"))?;

        // KVf: b = H2(y), V = (g^d y^b)^(1/a), a = H1(g, V)
        let mk = kg(&grp, &mut r).unwrap();
        let mut pk = mk.public;
        if case % 3 == 1 {
            pk.pop.d = grp.scalar(r.gen_range(0..11));
        }
        let bh = hash_to_scalar(&grp, HashTag::H2, &HashInput::new().element(&grp, &pk.y)).value();
        let want = pk.pop.a.value() != 0 && {
            let v = o.verify_point(pk.pop.d.value(), pk.y.value(), bh, pk.pop.a.value());
            let h = HashInput::new().element(&grp, &grp.generator()).element(&grp, &el(v));
            hash_to_scalar(&grp, HashTag::H1, &h) == pk.pop.a
        };
        ensure(kvf(&grp, &pk) == want, || mismatch("kvf"))?;

        // Vf: e = H3(m), V = (g^S X̃^e)^(1/c), c = H0(g, V, X̃)
        let x = el(o.pow(2, r.gen_range(0..11)));
        let js: JointSignature<ToyGroup> = JointSignature {
            scheme: Scheme::Gms,
            c: grp.scalar(r.gen_range(1..11)),
            s: grp.scalar(r.gen_range(0..11)),
        };
        let agg: AggregatedKey<ToyGroup> = AggregatedKey {
            x_tilde: x,
            member_count: 1,
        };
        let e3 = hash_to_scalar(&grp, HashTag::H3, &HashInput::new().bytes(&m)).value();
        let v = o.verify_point(js.s.value(), x.value(), e3, js.c.value());
        let h = HashInput::new()
            .element(&grp, &grp.generator())
            .element(&grp, &el(v))
            .element(&grp, &x);
        let want = hash_to_scalar(&grp, HashTag::H0, &h) == js.c;
        ensure(vf(&grp, &agg, &m, &js) == want, || mismatch("vf"))?;
    }
    Ok("1000 cases: group ops, gamma_vf, kvf and vf agree with brute force".into())
}

fn gms_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_gms"))
}

fn normalized(path: &Path) -> String {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(map) => {
                map.retain(|k, _| !k.ends_with("_ns"));
                map.values_mut().for_each(strip);
            }
            Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let bytes = fs::read(path).unwrap();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let mut v: Value = serde_json::from_slice(&bytes).unwrap();
            strip(&mut v);
            v.to_string()
        }
        Some("csv") => {
            let text = String::from_utf8(bytes).unwrap();
            let mut lines = text.lines();
            let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
            let keep: Vec<usize> = (0..header.len()).filter(|&i| !header[i].ends_with("_ns")).collect();
            std::iter::once(header.join(","))
                .chain(lines.map(str::to_string))
                .map(|l| {
                    let cells: Vec<&str> = l.split(',').collect();
                    keep.iter().map(|&i| cells[i]).collect::<Vec<_>>().join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        _ => hex::encode(bytes),
    }
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn c10_determinism() -> Outcome {
    let commands: &[&[&str]] = &[
        &["keygen", "--count", "5", "--out", "o/keys"],
        &["simulate", "--scheme", "agms", "--signers", "31", "--out", "o/agms"],
        &["simulate", "--scheme", "gms", "--signers", "31", "--out", "o/gms"],
        &["simulate", "--scheme", "cosi", "--signers", "31", "--out", "o/cosi"],
        &["--backend", "toy", "simulate", "--signers", "7", "--out", "o/toy"],
        &["bench", "--signers", "4,16", "--reps", "2", "--out", "o/bench.csv"],
        &["attack", "rogue-key", "--out", "o/rogue.json"],
        &["attack", "ksum", "--out", "o/ksum.json"],
        &["attack", "ksum", "--target", "agms", "--out", "o/ksum_agms.json"],
        &["endorse", "--signers", "2,4", "--out", "o/endorse.csv"],
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for args in commands {
        for d in &dirs {
            let out = Command::new(gms_bin())
                .current_dir(d.path())
                .env_remove("MULTISIG_BACKEND")
                .args(["--seed", "2024"])
                .args(*args)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{args:?} exited with {}", out.status))?;
        }
    }
    let (a, b) = (dirs[0].path(), dirs[1].path());
    let files = files_under(&a.join("o"));
    let mut raw_identical = 0;
    for f in &files {
        let rel = f.strip_prefix(a).unwrap();
        let other = b.join(rel);
        if fs::read(f).unwrap() == fs::read(&other).unwrap() {
            raw_identical += 1;
        }
        ensure(normalized(f) == normalized(&other), || {
            format!("{} differs", rel.display())
        })?;
    }
    Ok(format!(
        "{} files from {} commands identical ({} byte-for-byte; the rest differ only in *_ns timings)",
        files.len(),
        commands.len(),
        raw_identical
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 completeness", c1_completeness),
        ("2 GMS≡AGMS replay", c2_replay),
        ("3 operation counts", c3_op_counts),
        ("4 online fraction", c4_online_fraction),
        ("5 rogue-key attack", c5_rogue_key),
        ("6 k-sum attack", c6_ksum),
        ("7 endorsement comparison", c7_endorsement),
        ("8 tamper suite", c8_tamper),
        ("9 toy-group oracle", c9_toy_oracle),
        ("10 CLI determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    panic::set_hook(Box::new(|_| {}));
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
