//! Round trip through the `oligo` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use oligo_bench::campaign::{Campaign, CampaignKind};
use oligo_bench::{emit_reports, make_input, CampaignReport};

fn oligo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oligo"))
        .args(args)
        .output()
        .expect("run oligo")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_simulate_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.bin");
    let pool = dir.path().join("pool.fa");
    let reads = dir.path().join("reads.fa");
    let out = dir.path().join("out.bin");
    let report = dir.path().join("report.json");
    let data = make_input(1500, 3);
    fs::write(&input, &data).unwrap();

    let enc = oligo(&[
        "encode",
        "--in",
        path(&input),
        "--out",
        path(&pool),
        "--profile",
        "hifi",
        "--r",
        "5",
        "--seed",
        "11",
    ]);
    assert!(
        enc.status.success(),
        "{}",
        String::from_utf8_lossy(&enc.stderr)
    );
    let header = fs::read_to_string(dir.path().join("pool.fa.header")).unwrap();
    assert!(
        header.contains("profile=hifi") && header.contains("pool_seed=11"),
        "{header}"
    );

    let sim = oligo(&[
        "simulate",
        "--pool",
        path(&pool),
        "--out",
        path(&reads),
        "--profile",
        "hifi",
        "--r",
        "5",
        "--sd",
        "10",
        "--seed",
        "4",
    ]);
    assert!(
        sim.status.success(),
        "{}",
        String::from_utf8_lossy(&sim.stderr)
    );
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("reads.fa.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["seed"], 4);
    assert_eq!(
        sidecar["sources"].as_array().unwrap().len() as u64,
        sidecar["reads_emitted"].as_u64().unwrap()
    );

    let dec = oligo(&[
        "decode",
        "--reads",
        path(&reads),
        "--header",
        &format!("{}.header", path(&pool)),
        "--out",
        path(&out),
        "--report",
        path(&report),
    ]);
    assert!(
        dec.status.success(),
        "{}",
        String::from_utf8_lossy(&dec.stderr)
    );
    assert_eq!(fs::read(&out).unwrap(), data);
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["success"], true);
}

#[test]
fn decode_without_reads_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.bin");
    let pool = dir.path().join("pool.fa");
    let reads = dir.path().join("reads.fa");
    fs::write(&input, make_input(200, 1)).unwrap();
    assert!(oligo(&[
        "encode",
        "--in",
        path(&input),
        "--out",
        path(&pool),
        "--profile",
        "lofi",
        "--r",
        "2"
    ])
    .status
    .success());
    fs::write(&reads, "").unwrap();
    let out = dir.path().join("out.bin");
    let dec = oligo(&[
        "decode",
        "--reads",
        path(&reads),
        "--header",
        &format!("{}.header", path(&pool)),
        "--out",
        path(&out),
    ]);
    assert_eq!(dec.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn bad_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        !oligo(&["bench", "--campaign", "nonsense", "--out", path(dir.path())])
            .status
            .success()
    );
    let input = dir.path().join("x");
    fs::write(&input, b"abc").unwrap();
    let bad = oligo(&[
        "encode",
        "--in",
        path(&input),
        "--out",
        path(&dir.path().join("p")),
        "--profile",
        "hifi",
        "--r",
        "1",
        "--parity-fraction",
        "1.5",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = oligo(&[
        "decode", "--reads", "nope", "--header", "nope", "--out", "nope",
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn report_flattens_campaign_directory() {
    let dir = tempfile::tempdir().unwrap();
    let campaign = Campaign {
        kind: CampaignKind::Native,
        cells: vec![],
        trials: 1,
        seed_base: 1,
        input_len: 16,
    };
    emit_reports(&[CampaignReport::empty(&campaign)], dir.path()).unwrap();
    let csv = dir.path().join("all.csv");
    let rep = oligo(&["report", "--in", path(dir.path()), "--csv", path(&csv)]);
    assert!(
        rep.status.success(),
        "{}",
        String::from_utf8_lossy(&rep.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("campaign,profile"));
}
