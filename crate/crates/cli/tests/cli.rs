use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gms(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gms"))
        .current_dir(dir)
        .env_remove("MULTISIG_BACKEND")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = gms(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Wall-clock fields (`*_ns`) are the only run-to-run variation allowed.
fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !k.ends_with("_ns"));
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn strip_csv_timings(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !header[i].ends_with("_ns")).collect();
    std::iter::once(header.join(","))
        .chain(lines.map(str::to_string))
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| cells[i].to_string()).collect()
        })
        .collect()
}

fn normalized(path: &Path) -> String {
    let bytes = fs::read(path).unwrap();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let mut v: Value = serde_json::from_slice(&bytes).unwrap();
            strip_timings(&mut v);
            v.to_string()
        }
        Some("csv") => format!("{:?}", strip_csv_timings(std::str::from_utf8(&bytes).unwrap())),
        _ => hex::encode(bytes),
    }
}

#[test]
fn keygen_then_verify_keys() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--seed", "7", "keygen", "--count", "1", "--out", "k"]);
    assert!(dir.path().join("k/public.json").exists());
    assert!(dir.path().join("k/secret.json").exists());
    let out = ok(dir.path(), &["verify-keys", "--keys", "k/public.json"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], 1);

    let mut bundle = json(&dir.path().join("k/public.json"));
    let d = bundle["keys"][0]["d"].as_str().unwrap().to_string();
    let flipped = format!("{}{}", &d[..d.len() - 1], if d.ends_with('0') { '1' } else { '0' });
    bundle["keys"][0]["d"] = Value::String(flipped);
    fs::write(dir.path().join("bad.json"), bundle.to_string()).unwrap();
    assert_eq!(
        gms(dir.path(), &["verify-keys", "--keys", "bad.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn simulate_agms_metrics_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--seed",
            "3",
            "simulate",
            "--scheme",
            "agms",
            "--signers",
            "63",
            "--out",
            "a",
        ],
    );
    let m = json(&dir.path().join("a/metrics.json"));
    let (off, on) = (m["offline_ns"].as_u64().unwrap(), m["online_ns"].as_u64().unwrap());
    assert!(on < off, "online {on} ns vs offline {off} ns");
    assert_eq!(m["online_exp"], 0);
    assert_eq!(m["offline_exp"], 63);
    assert_eq!(m["verified"], true);
    assert_eq!(fs::read(dir.path().join("a/signature.bin")).unwrap().len(), 64);

    ok(
        dir.path(),
        &[
            "verify",
            "--scheme",
            "agms",
            "--aggregate",
            "a/aggregate.json",
            "--signature",
            "a/signature.bin",
        ],
    );
    let bad = gms(
        dir.path(),
        &[
            "verify",
            "--scheme",
            "agms",
            "--aggregate",
            "a/aggregate.json",
            "--signature",
            "a/signature.bin",
            "--message",
            "other",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn gms_and_agms_sign_identically() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["gms", "agms"] {
        ok(
            dir.path(),
            &[
                "--seed",
                "11",
                "simulate",
                "--scheme",
                scheme,
                "--signers",
                "15",
                "--out",
                scheme,
            ],
        );
    }
    assert_eq!(
        fs::read(dir.path().join("gms/signature.bin")).unwrap(),
        fs::read(dir.path().join("agms/signature.bin")).unwrap()
    );
}

#[test]
fn simulate_with_keygen_keys_on_toy() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--backend",
            "toy",
            "--toy-q",
            "1009",
            "--seed",
            "1",
            "keygen",
            "--count",
            "7",
            "--out",
            "k",
        ],
    );
    ok(
        dir.path(),
        &[
            "--backend",
            "toy",
            "--toy-q",
            "1009",
            "--seed",
            "2",
            "simulate",
            "--scheme",
            "cosi",
            "--signers",
            "7",
            "--keys",
            "k",
            "--out",
            "s",
        ],
    );
    ok(
        dir.path(),
        &[
            "verify",
            "--scheme",
            "cosi",
            "--aggregate",
            "s/aggregate.json",
            "--signature",
            "s/signature.bin",
        ],
    );
    let wrong = gms(
        dir.path(),
        &[
            "--backend",
            "curve",
            "verify",
            "--aggregate",
            "s/aggregate.json",
            "--signature",
            "s/signature.bin",
        ],
    );
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn bench_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--seed",
            "1",
            "bench",
            "--signers",
            "4,16,64",
            "--reps",
            "2",
            "--out",
            "b.csv",
        ],
    );
    let text = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,N,phase,mean_ns,std_ns,exp_count");
    assert_eq!(lines.len() - 1, 3 * 3 * 3);
    for l in lines
        .iter()
        .filter(|l| l.starts_with("agms,") && l.contains(",online,"))
    {
        assert!(l.ends_with(",0"), "{l}");
    }
}

#[test]
fn attacks_report_expected_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--seed", "1", "attack", "rogue-key", "--out", "r.json"]);
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["cosi_accepts"], true);
    assert_eq!(r["kvf_accepts"], false);

    ok(dir.path(), &["--seed", "42", "attack", "ksum", "--out", "k.json"]);
    assert!(json(&dir.path().join("k.json"))["successes"].as_u64().unwrap() >= 1);
    ok(
        dir.path(),
        &["--seed", "42", "attack", "ksum", "--target", "agms", "--out", "a.json"],
    );
    assert_eq!(json(&dir.path().join("a.json"))["successes"], 0);

    let refused = gms(dir.path(), &["--backend", "curve", "attack", "ksum"]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn endorse_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["--seed", "1", "endorse", "--signers", "2,4,8", "--out", "e.csv"],
    );
    let text = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let expected = if r[0] == "revised" { "1" } else { r[1] };
        assert_eq!(r[5], expected);
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gms(dir.path(), &["simulate", "--scheme", "bls"]).status.code(), Some(2));
    assert_eq!(
        gms(
            dir.path(),
            &["simulate", "--signers", "100", "--branching", "2", "--depth", "2"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(gms(dir.path(), &["bench", "--reps", "0"]).status.code(), Some(2));
}

#[test]
fn env_selects_backend() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gms"))
        .current_dir(dir.path())
        .env("MULTISIG_BACKEND", "toy")
        .args(["--seed", "1", "keygen", "--out", "k"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("k/public.json"))["params"]["group_id"], "toy");
}

/// Every command run twice with the same seed writes identical files.
#[test]
fn seeded_commands_are_reproducible() {
    let runs: &[&[&str]] = &[
        &["--seed", "9", "keygen", "--count", "4", "--out", "o/keys"],
        &[
            "--seed",
            "9",
            "simulate",
            "--scheme",
            "agms",
            "--signers",
            "15",
            "--out",
            "o/sim",
        ],
        &[
            "--seed",
            "9",
            "simulate",
            "--scheme",
            "cosi",
            "--signers",
            "7",
            "--out",
            "o/cosi",
        ],
        &[
            "--seed",
            "9",
            "bench",
            "--signers",
            "4,8",
            "--reps",
            "2",
            "--out",
            "o/bench.csv",
        ],
        &[
            "--seed",
            "9",
            "bench",
            "--signers",
            "4",
            "--reps",
            "2",
            "--format",
            "json",
            "--out",
            "o/bench.json",
        ],
        &["--seed", "9", "attack", "rogue-key", "--out", "o/rogue.json"],
        &["--seed", "9", "attack", "ksum", "--out", "o/ksum.json"],
        &["--seed", "9", "endorse", "--signers", "2,4", "--out", "o/endorse.csv"],
        &[
            "--seed",
            "9",
            "endorse",
            "--signers",
            "2",
            "--detailed",
            "--format",
            "json",
            "--out",
            "o/endorse.json",
        ],
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for args in runs {
        ok(a.path(), args);
        ok(b.path(), args);
    }
    let mut files = Vec::new();
    collect(&a.path().join("o"), &mut files);
    assert!(files.len() >= 12);
    for f in files {
        let rel = f.strip_prefix(a.path()).unwrap();
        assert_eq!(normalized(&f), normalized(&b.path().join(rel)), "{}", rel.display());
    }
}

fn collect(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect(&p, out);
        } else {
            out.push(p);
        }
    }
}
