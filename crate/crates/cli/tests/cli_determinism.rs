//! Criterion 9 and the command-line contract: byte-identical reruns of
//! every subcommand at any worker count, documented exit codes, and
//! byte-exact re-serialization of the bundled files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_keyrate")
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
        .display()
        .to_string()
}

/// Run the binary with args plus `--out <tmp>`; return (exit code, bytes).
fn run_to_file(args: &[&str], threads: &str, dir: &Path, tag: &str) -> (i32, Vec<u8>) {
    let out = dir.join(format!("{tag}.json"));
    let mut cmd = Command::new(bin());
    cmd.args(args)
        .arg("--out")
        .arg(&out)
        .env("RAYON_NUM_THREADS", threads)
        .env_remove("KEYRATE_OUT_DIR");
    let status = cmd.output().expect("binary runs");
    let code = status.status.code().unwrap_or(-1);
    let bytes = fs::read(&out).unwrap_or_default();
    let _ = fs::remove_file(&out);
    (code, bytes)
}

#[test]
fn criterion_9_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let noiseless = fixture("channels/noiseless-binary.json");
    let bsc = fixture("channels/bsc-wiretap.json");
    let nofb_scheme = fixture("schemes/nofb-uniform-u0.json");
    let fb_scheme = fixture("schemes/fb-identity.json");
    let fb_rx1 = fixture("schemes/fb-rx1-only.json");

    let cases: Vec<(&str, Vec<&str>)> = vec![
        (
            "inner-nofb-eval",
            vec![
                "region",
                "inner-nofb",
                "--channel",
                &noiseless,
                "--scheme",
                &nofb_scheme,
            ],
        ),
        (
            "inner-nofb-search",
            vec![
                "region",
                "inner-nofb",
                "--channel",
                &bsc,
                "--search",
                "--u0",
                "2",
                "--u1",
                "1",
                "--u2",
                "1",
                "--restarts",
                "8",
                "--iters",
                "60",
                "--seed",
                "5",
            ],
        ),
        (
            "outer-nofb-search",
            vec![
                "region",
                "outer-nofb",
                "--channel",
                &bsc,
                "--search",
                "--restarts",
                "6",
                "--iters",
                "60",
                "--seed",
                "5",
            ],
        ),
        (
            "inner-fb",
            vec!["region", "inner-fb", "--channel", &bsc, "--scheme", &fb_scheme],
        ),
        (
            "fm-verify",
            vec![
                "region",
                "fm-verify",
                "--channel",
                &bsc,
                "--scheme",
                &fb_scheme,
                "--grid-step",
                "0.02",
            ],
        ),
        (
            "simulate-nofb",
            vec![
                "simulate",
                "nofb",
                "--channel",
                &noiseless,
                "--scheme",
                &nofb_scheme,
                "--rt0",
                "1",
                "--r0",
                "0.5",
                "--n",
                "8",
                "--eps",
                "0.2",
                "--trials",
                "200",
                "--seed",
                "7",
            ],
        ),
        (
            "simulate-fb",
            vec![
                "simulate",
                "fb",
                "--channel",
                &noiseless,
                "--scheme",
                &fb_rx1,
                "--rp1",
                "0.35",
                "--r1",
                "0.125",
                "--n",
                "8",
                "--eps",
                "0.9",
                "--trials",
                "200",
                "--seed",
                "7",
            ],
        ),
        (
            "reduce-wiretap",
            vec!["reduce", "wiretap", "--channel", &bsc, "--mode", "nofb"],
        ),
    ];

    for (tag, args) in cases {
        let (c1, first) = run_to_file(&args, "1", dir.path(), tag);
        let (c2, second) = run_to_file(&args, "4", dir.path(), tag);
        assert_eq!(c1, 0, "{tag} failed on first run");
        assert_eq!(c2, 0, "{tag} failed on rerun");
        assert!(!first.is_empty(), "{tag} wrote nothing");
        let identical = first == second;
        println!(
            "criterion 9 [{tag}]: {} ({} bytes)",
            if identical { "PASS" } else { "FAIL" },
            first.len()
        );
        assert!(identical, "{tag}: reruns differ");
    }
    println!("criterion 9: PASS byte-identical reruns across worker counts");
}

#[test]
fn exit_codes_follow_the_documented_mapping() {
    // No arguments: usage, exit 1.
    let none = Command::new(bin()).output().unwrap();
    assert_eq!(none.status.code(), Some(1));

    // Unknown subcommand: usage, exit 1.
    let unk = Command::new(bin()).arg("frobnicate").output().unwrap();
    assert_eq!(unk.status.code(), Some(1));

    // Missing input file: validation error, exit 1.
    let missing = Command::new(bin())
        .args([
            "region",
            "inner-fb",
            "--channel",
            "/nonexistent/ch.json",
            "--scheme",
            "/nonexistent/s.json",
        ])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    // Malformed mass: validation error naming the cell, exit 1.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut file: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(fixture("channels/noiseless-binary.json")).unwrap(),
    )
    .unwrap();
    file["transition"][0][0][0][0][0] = serde_json::json!(1.1);
    fs::write(&bad, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let malformed = Command::new(bin())
        .args(["region", "outer-nofb", "--channel"])
        .arg(&bad)
        .arg("--search")
        .args(["--restarts", "2", "--iters", "5"])
        .output()
        .unwrap();
    assert_eq!(malformed.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&malformed.stderr);
    assert!(
        stderr.contains("(x=0, s=0)"),
        "error should name the offending cell, got: {stderr}"
    );

    // Help is a success.
    let help = Command::new(bin()).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn bundled_channels_reserialize_byte_identically() {
    for rel in [
        "channels/noiseless-binary.json",
        "channels/bsc-wiretap.json",
        "channels/state-binary.json",
    ] {
        let path = PathBuf::from(fixture(rel));
        let bytes = fs::read(&path).unwrap();
        let parsed: keyrate_cli::schema::ChannelFile =
            serde_json::from_slice(&bytes).unwrap();
        // Parse to the core type and back, then re-serialize.
        let channel = parsed.to_channel().unwrap();
        let reserialized = keyrate_cli::schema::ChannelFile::from_channel(&channel);
        let mut text = serde_json::to_string_pretty(&reserialized).unwrap();
        text.push('\n');
        assert_eq!(
            text.as_bytes(),
            bytes.as_slice(),
            "{rel} does not round-trip byte-identically"
        );
    }
}

#[test]
fn reduce_emits_loadable_channel_file() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = dir.path().join("reduced.json");
    let status = Command::new(bin())
        .args([
            "reduce",
            "wiretap",
            "--channel",
            &fixture("channels/bsc-wiretap.json"),
            "--mode",
            "fb-keep-rx1",
            "--channel-out",
        ])
        .arg(&reduced)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    // The emitted file must itself parse as a channel and drive a command.
    let eval = Command::new(bin())
        .args(["region", "inner-fb", "--channel"])
        .arg(&reduced)
        .args(["--scheme", &fixture("schemes/fb-rx1-only.json")])
        .output()
        .unwrap();
    assert_eq!(eval.status.code(), Some(0));
}
