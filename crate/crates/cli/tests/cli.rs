use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn crldc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crldc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn encode_corrupt_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let msg: String = (0..1024).map(|i| if (i * 7 + i / 3) % 5 < 2 { '1' } else { '0' }).collect();
    let msg_path = dir.path().join("msg.txt");
    fs::write(&msg_path, &msg).unwrap();
    let cw = dir.path().join("cw.bin");
    let out = crldc(&["--code", "hamming", "encode", "--message", p(&msg_path), "--out", p(&cw)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["codeword_bits"], 12384);

    let bytes = fs::read(&cw).unwrap();
    assert_eq!(&bytes[..8], &12384u64.to_le_bytes());
    assert_eq!(bytes.len(), 8 + 12384 / 8);
    let side = fs::read_to_string(dir.path().join("cw.bin.json")).unwrap();
    assert!(side.contains("\"pk\""));
    assert!(!side.contains("\"sk\""));

    let word = dir.path().join("word.bin");
    let out = crldc(&["corrupt", "--input", p(&cw), "--out", p(&word), "--attack", "random-hamming", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert_eq!(rep["attack"], "random-hamming");
    assert!(rep["distance"]["raw"].as_u64().unwrap() > 0);

    for i in [1usize, 129, 700, 1024] {
        let idx = i.to_string();
        let out = crldc(&["decode", "--input", p(&word), "--index", &idx, "--seed", "9"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rep = json(&out);
        let expect = msg.as_bytes()[i - 1] == b'1';
        assert!(rep["value"].is_null() || rep["value"] == expect, "index {i}: {rep}");
        assert!(rep["queries"].as_u64().unwrap() <= 43344);
    }
    let out = crldc(&["decode", "--input", p(&cw), "--index", "5"]);
    assert_eq!(json(&out)["value"], msg.as_bytes()[4] == b'1');
}

#[test]
fn verdicts_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strawman.toml");
    fs::write(
        &cfg,
        "code = \"hamming\"\ndecoder = \"strawman\"\nk = 12288\nattack = \"strawman-key-substitution\"\n\
         trials = 20\nindices = [1, 64, 128]\nseed = 5\n",
    )
    .unwrap();
    let csv = dir.path().join("counts.csv");
    let out = crldc(&["--config", p(&cfg), "fool", "--csv", p(&csv)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["fooled"], true);
    let rows = fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("instance,index,correct,bot,wrong,trials\n"));
    assert_eq!(rows.lines().count(), 4);
    assert!(rows.contains("0,1,0,0,20,20"));

    let clean = crldc(&["--code", "hamming", "--trials", "5", "fool"]);
    assert_eq!(clean.status.code(), Some(0));
    assert_eq!(json(&clean)["fooled"], false);
}

#[test]
fn audit_worksheet_and_blockmap() {
    let out = crldc(&["--code", "hamming", "--trials", "2", "audit-locality"]);
    assert!(out.status.success());
    let rep = json(&out);
    assert_eq!(rep["bound"], 43344);
    assert_eq!(rep["violations"], 0);

    let out = crldc(&["--code", "hamming", "worksheet"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("K") && text.contains("12384"));

    let out = crldc(&["--code", "insdel", "worksheet", "--json"]);
    let ws = json(&out);
    let gamma = ws["lines"].as_array().unwrap().iter().find(|l| l["name"] == "gamma").unwrap();
    assert_eq!(gamma["value"], "1/12");

    let out = crldc(&["--code", "insdel", "blockmap"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert_eq!(rep["decomposition"]["total_raw"], 0);
    assert_eq!(rep["gamma"]["good_indices"].as_array().unwrap().len(), 8);
}

#[test]
fn bad_input_is_an_error() {
    let out = crldc(&["fool"]);
    assert_eq!(out.status.code(), Some(2));
    let out = crldc(&["--code", "hamming", "--attack", "rotation-insdel", "fool"]);
    assert_eq!(out.status.code(), Some(2));
    let out = crldc(&["--code", "insdel", "--attack", "no-such", "fool"]);
    assert_eq!(out.status.code(), Some(2));
    let out = crldc(&["--code", "hamming", "blockmap"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_replay_byte_for_byte() {
    let run = || crldc(&["--code", "insdel", "--attack", "rotation-insdel", "--rho", "1/8", "--trials", "3", "limit"]).stdout;
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}
