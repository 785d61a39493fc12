use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kyfrog::kem::{Kem, KemCiphertext};
use kyfrog::pke::{PublicKey, SecretKey};
use kyfrog::rng::Drbg;
use kyfrog::REFERENCE;

fn kyfrog(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kyfrog"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn seed_hex(b: u8) -> String {
    hex::encode([b; 48])
}

fn det<'a>(seed: &'a str, args: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["--insecure-deterministic", "--drbg-seed", seed];
    v.extend_from_slice(args);
    v
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn params_prints_reference_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kyfrog(dir.path(), &["params"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in ["n=1024", "q=1103", "pk=1440", "sk=2048", "ct=524813", "alpha=0.001269265639165911"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
    let csv = String::from_utf8(kyfrog(dir.path(), &["params", "--csv"]).stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["keygen", "--pk-out", "pk"],
        vec!["frobnicate"],
        vec!["params", "--bogus"],
        vec![],
        vec!["--drbg-seed", "00", "params"],
        vec!["bench", "--iterations", "0"],
    ] {
        let out = kyfrog(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(kyfrog(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = kyfrog(dir.path(), &["encap", "--pk", "missing", "--ct-out", "c", "--key-out", "k"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn file_roundtrip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let s1 = seed_hex(1);
    let s2 = seed_hex(2);
    assert!(kyfrog(p, &det(&s1, &["keygen", "--pk-out", "pk", "--sk-out", "sk"])).status.success());
    assert!(kyfrog(p, &det(&s2, &["encap", "--pk", "pk", "--ct-out", "ct", "--key-out", "k1"])).status.success());
    assert!(kyfrog(p, &["decap", "--sk", "sk", "--pk", "pk", "--ct", "ct", "--key-out", "k2"]).status.success());
    let (k1, k2) = (fs::read(p.join("k1")).unwrap(), fs::read(p.join("k2")).unwrap());
    assert_eq!(k1.len(), 32);
    assert_eq!(k2.len(), 32);

    // the files match the library and any key mismatch is a genuine decryption failure
    let kem = Kem::reference();
    let pk = PublicKey::from_file_bytes(&REFERENCE, &fs::read(p.join("pk")).unwrap()).unwrap();
    let sk = SecretKey::from_file_bytes(&REFERENCE, &fs::read(p.join("sk")).unwrap()).unwrap();
    let (lib_pk, _) = kem.keygen(&mut Drbg::from_seed(&[1; 48])).unwrap();
    assert_eq!(lib_pk, pk);
    let m: [u8; 32] = Drbg::from_seed(&[2; 48]).array().unwrap();
    let (ct, key) = kem.encap_derand(&pk, &m).unwrap();
    assert_eq!(ct, fs::read(p.join("ct")).unwrap());
    assert_eq!(key.as_bytes().as_slice(), k1.as_slice());
    let parsed = KemCiphertext::decode(&REFERENCE, &ct).unwrap();
    let max_err = parsed
        .bits()
        .iter()
        .enumerate()
        .map(|(i, c)| kem.pke().decryption_error(&sk, c, (m[i / 8] >> (i % 8)) & 1).abs())
        .max()
        .unwrap();
    assert_eq!(k1 == k2, max_err < 276, "max |E| = {max_err}");

    // same seeds, same bytes
    let q = tempfile::tempdir().unwrap();
    assert!(kyfrog(q.path(), &det(&s1, &["keygen", "--pk-out", "pk", "--sk-out", "sk"])).status.success());
    assert!(kyfrog(q.path(), &det(&s2, &["encap", "--pk", "pk", "--ct-out", "ct", "--key-out", "k1"])).status.success());
    for f in ["pk", "sk", "ct", "k1"] {
        assert_eq!(fs::read(p.join(f)).unwrap(), fs::read(q.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("pk"), b"keep me").unwrap();
    let out = kyfrog(p, &["keygen", "--pk-out", "pk", "--sk-out", "sk"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read(p.join("pk")).unwrap(), b"keep me");
    assert!(!p.join("sk").exists());
    assert!(kyfrog(p, &["keygen", "--pk-out", "pk", "--sk-out", "sk", "--force"]).status.success());
    assert_eq!(fs::read(p.join("pk")).unwrap().len(), 1445);
}

#[test]
fn decap_of_garbage_succeeds_silently() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let s = seed_hex(3);
    assert!(kyfrog(p, &det(&s, &["keygen", "--pk-out", "pk", "--sk-out", "sk"])).status.success());
    fs::write(p.join("junk"), b"not a ciphertext").unwrap();
    let out = kyfrog(p, &["decap", "--sk", "sk", "--pk", "pk", "--ct", "junk", "--key-out", "k"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    assert_eq!(fs::read(p.join("k")).unwrap().len(), 32);
}

#[test]
fn bad_key_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("pk"), b"KYPK\x01short").unwrap();
    fs::write(p.join("in"), b"x").unwrap();
    let out = kyfrog(p, &["encrypt", "--pk", "pk", "--in", "in", "--out", "out"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tampered_container_is_an_authentication_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let s = seed_hex(4);
    assert!(kyfrog(p, &det(&s, &["keygen", "--pk-out", "pk", "--sk-out", "sk"])).status.success());
    fs::write(p.join("in"), vec![7u8; 1000]).unwrap();
    assert!(kyfrog(p, &["encrypt", "--pk", "pk", "--in", "in", "--out", "enc"]).status.success());
    let mut c = fs::read(p.join("enc")).unwrap();
    let last = c.len() - 1;
    c[last] ^= 1;
    fs::write(p.join("bad"), &c).unwrap();
    let out = kyfrog(p, &["decrypt", "--sk", "sk", "--pk", "pk", "--in", "bad", "--out", "dec"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "kyfrog: authentication failure");
    assert!(!p.join("dec").exists());
}

#[test]
fn bench_has_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = kyfrog(dir.path(), &["bench", "--iterations", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "operation,iterations,mean_ms,median_ms");
    let ops: Vec<_> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ops, ["keygen", "encap", "decap"]);
}

#[test]
fn analyze_failure_reports_both_models_and_the_claim() {
    let dir = tempfile::tempdir().unwrap();
    let out = kyfrog(dir.path(), &["analyze-failure", "--monte-carlo", "2000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in [
        "paper_model.sigma_E=62.735623",
        "full_model.sigma_E=88.710522",
        "paper_model.log10_per_bit=-4.948",
        "claimed_log10_fail_per_ct=-150",
        "monte_carlo.trials=2000",
    ] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
    assert!(text.contains("model,sigma_E,log10_per_bit,log10_per_ct,claimed_log10_fail_per_ct"));
}

#[test]
fn hunt_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = kyfrog(
        p,
        &["hunt", "--q-lo", "2", "--q-hi", "100", "--min-bits", "0", "--max-log10-fail", "0", "--out", "run.log"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = fs::read_to_string(p.join("run.log")).unwrap();
    assert!(log.contains("candidate_count=25"));
    let out = kyfrog(p, &["summarize", "run.log", "run.log"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("2,50,25.000,"), "{text}");

    let logs: Vec<String> = (1..=16)
        .map(|i| fixtures().join(format!("hunter_logs/run{i:02}.log")).display().to_string())
        .collect();
    let mut args = vec!["summarize"];
    args.extend(logs.iter().map(String::as_str));
    let out = kyfrog(p, &args);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().nth(1),
        Some("16,6638,414.875,20.001,120.006,61.253")
    );

    fs::write(p.join("broken.log"), "cpu_model=x\n").unwrap();
    assert_eq!(kyfrog(p, &["summarize", "broken.log"]).status.code(), Some(3));
}

#[test]
fn hunt_with_fixture_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = format!("fixture:{}", fixtures().join("estimates/reference.txt").display());
    let out = kyfrog(
        dir.path(),
        &["hunt", "--q-lo", "1100", "--q-hi", "1110", "--oracle", &fixture, "--max-log10-fail", "0"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\n1103,0.001269265639165911,325.3,325.3,"), "{text}");
    assert!(text.contains("\n1109,0.0012623985572587917,,,"));
    assert!(text.contains("unevaluated"));
}
