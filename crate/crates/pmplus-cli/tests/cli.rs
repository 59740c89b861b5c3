//! End-to-end checks of the binary: exit codes, output shape, and the
//! benchmark acceptance criterion.

use std::path::PathBuf;
use std::process::{Command, Output};

fn pmplus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmplus"))
        .args(args)
        .env_remove("PMPLUS_SEED")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pmplus-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn golden_key(width: u32) -> String {
    format!(
        "{}/../pmplus/tests/data/golden{width}.pmph",
        env!("CARGO_MANIFEST_DIR")
    )
}

#[test]
fn keygen_is_reproducible_and_sized() {
    for (bits, expected) in [("32", 4136u64), ("64", 8264)] {
        let a = scratch(&format!("rep-a-{bits}.pmph"));
        let b = scratch(&format!("rep-b-{bits}.pmph"));
        for path in [&a, &b] {
            let out = pmplus(&["keygen", "--bits", bits, "--seed", "7", "--out",
                path.to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        assert_eq!(std::fs::metadata(&a).unwrap().len(), expected);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn keygen_without_bits_is_usage_error() {
    let out = pmplus(&["keygen"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = pmplus(&["test", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn hash_is_deterministic_and_formatted() {
    let data = scratch("message.bin");
    std::fs::write(&data, b"the quick brown fox").unwrap();
    let key = golden_key(64);
    let run = || pmplus(&["hash", "--key", &key, data.to_str().unwrap()]);
    let first = run();
    assert!(first.status.success());
    let line = String::from_utf8(first.stdout).unwrap();
    let (digest, rest) = line.trim_end().split_once("  ").unwrap();
    assert_eq!(digest.len(), 16);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(rest.ends_with("message.bin"));
    assert_eq!(line, String::from_utf8(run().stdout).unwrap());
}

#[test]
fn corrupted_key_is_rejected() {
    let mut bytes = std::fs::read(golden_key(32)).unwrap();
    bytes[0] ^= 0xff;
    let bad = scratch("bad.pmph");
    std::fs::write(&bad, &bytes).unwrap();
    let data = scratch("noop.bin");
    std::fs::write(&data, b"x").unwrap();
    let out = pmplus(&["hash", "--key", bad.to_str().unwrap(), data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn criterion_11_bench_csv() {
    let mut ok = true;
    for bits in ["32", "64"] {
        let key = golden_key(if bits == "32" { 32 } else { 64 });
        let out = pmplus(&["bench", "--bits", bits, "--key", &key]);
        ok &= out.status.success();
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        ok &= lines.next() == Some("length,bytes_per_ns,bytes_per_cycle");
        let rows: Vec<(u64, f64)> = lines
            .map(|l| {
                let mut f = l.split(',');
                let len = f.next().unwrap().parse().unwrap();
                let tput = f.next().unwrap().parse().unwrap();
                (len, tput)
            })
            .collect();
        let lengths: Vec<u64> = rows.iter().map(|r| r.0).collect();
        let expect: Vec<u64> = (0..13).map(|i| 64u64 << i).collect();
        ok &= lengths == expect;
        ok &= rows.last().unwrap().1 > rows[0].1;
    }
    println!(
        "criterion=11 name=bench_csv_and_throughput status={}",
        if ok { "pass" } else { "fail" }
    );
    assert!(ok);
}
