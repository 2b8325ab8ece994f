use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use degen_universal::block_model::check_labels;
use degen_universal::graph::{read_edge_list, verify_embedding, EmbeddingMap};

fn degen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let ok = degen(&["params", "--n", "1000000", "--d", "2"]);
    assert_eq!(code(&ok), 0);
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text.contains("N = 3"), "{text}");

    assert_eq!(code(&degen(&["params", "--n", "8", "--d", "2"])), 2);
    assert_eq!(code(&degen(&["params", "--n", "100", "--d", "1"])), 2);
    assert_eq!(code(&degen(&["nonsense"])), 1);
    assert_eq!(code(&degen(&["params", "--n", "abc", "--d", "2"])), 1);
    assert_eq!(code(&degen(&["--help"])), 0);

    let flagged = degen(&[
        "params",
        "--n",
        "100000",
        "--d",
        "2",
        "--block-constant",
        "4",
    ]);
    assert_eq!(code(&flagged), 0);
    assert!(String::from_utf8_lossy(&flagged.stdout).contains("block_constant"));
}

#[test]
fn sample_embed_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (h, g, e) = (
        dir.path().join("h"),
        dir.path().join("g"),
        dir.path().join("e"),
    );
    let model = [
        "--n",
        "2000",
        "--d",
        "2",
        "--block-constant",
        "4",
        "--prob-boost",
        "0.5",
    ];

    let mut args = vec!["sample", "--seed", "11", "--out", p(&h)];
    args.extend(model);
    assert_eq!(code(&degen(&args)), 0);
    let gen = [
        "gen",
        "--family",
        "random-degenerate",
        "--mode",
        "varied",
        "--n",
        "300",
        "--d",
        "2",
        "--count",
        "2",
        "--seed",
        "4",
        "--out",
        p(&g),
    ];
    assert_eq!(code(&degen(&gen)), 0);
    let manifest = fs::read_to_string(g.join("manifest.json")).unwrap();
    assert!(manifest.contains("guest_0001.edges"));

    let guest = g.join("guest_0000.edges");
    let out = degen(&[
        "embed",
        "--host",
        p(&h),
        "--guest",
        p(&guest),
        "--out",
        p(&e),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let emb = e.join("embedding.txt");
    assert_eq!(
        code(&degen(&[
            "verify",
            "--guest",
            p(&guest),
            "--host",
            p(&h),
            "--embedding",
            p(&emb)
        ])),
        0
    );

    // re-verify from the files alone, with an independent reader
    let hg = read_edge_list(&fs::read_to_string(h.join("host.edges")).unwrap()).unwrap();
    let gg = read_edge_list(&fs::read_to_string(&guest).unwrap()).unwrap();
    let m = EmbeddingMap::from_text(&fs::read_to_string(&emb).unwrap(), gg.vertex_count()).unwrap();
    assert!(verify_embedding(&gg, &hg, &m).is_ok());
    let trace = fs::read_to_string(e.join("trace.txt")).unwrap();
    assert_eq!(trace.lines().count(), 300);
    assert_eq!(trace.lines().next().unwrap().split(' ').count(), 6);

    // break injectivity: map guest 1 onto guest 0's image
    let text = fs::read_to_string(&emb).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let first_host = lines[0].split(' ').nth(1).unwrap().to_string();
    lines[1] = format!("1 {first_host}");
    let bad = e.join("bad.txt");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    assert_eq!(
        code(&degen(&[
            "verify",
            "--guest",
            p(&guest),
            "--host",
            p(&h),
            "--embedding",
            p(&bad)
        ])),
        3
    );

    // labels stay consistent with params
    let params_json = fs::read_to_string(h.join("params.json")).unwrap();
    let params = serde_json::from_str(&params_json).unwrap();
    check_labels(&fs::read_to_string(h.join("host.labels")).unwrap(), &params).unwrap();
}

#[test]
fn bounds_rows() {
    let one = degen(&["bounds", "--d", "2", "--n", "1000000"]);
    assert_eq!(code(&one), 0);
    let text = String::from_utf8_lossy(&one.stdout);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("1000000,2,500000"));
    let empty = degen(&["bounds", "--d", "2", "--n-min", "100", "--n-max", "10"]);
    assert_eq!(code(&empty), 0);
    assert_eq!(String::from_utf8_lossy(&empty.stdout).lines().count(), 1);
    assert_eq!(code(&degen(&["bounds", "--d", "0", "--n", "100"])), 1);
}

const CONFIG: &str = r#"{
  "n": 2000,
  "d": 2,
  "overrides": {"block_constant": 4.0, "prob_boost": 0.5},
  "corpora": [
    {"n": 200, "d": 2, "family": {"kind": "random_degenerate", "mode": "varied"}, "count": 3, "seed": 1},
    {"n": 100, "d": 1, "family": {"kind": "star"}, "count": 1}
  ],
  "host_seeds": [3, 1],
  "embed": {"choice": {"kind": "seeded", "seed": 9}},
  "artifacts": true
}"#;

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, CONFIG).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let r = degen(&["experiment", "--config", p(&cfg), "--out", p(out)]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in [
        "results.csv",
        "manifest.json",
        "audit.csv",
        "failures.txt",
        "hosts/host_s3.edges",
        "embeddings/s1_c0_g2.emb",
        "traces/s3_c1_g0.trace",
    ] {
        let (x, y) = (fs::read(a.join(f)), fs::read(b.join(f)));
        assert!(x.is_ok(), "missing {f}");
        assert_eq!(x.unwrap(), y.unwrap(), "{f} differs");
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["tool_version"].is_string());

    // every embedding in the artifacts re-verifies from the files alone
    let host = read_edge_list(&fs::read_to_string(a.join("hosts/host_s1.edges")).unwrap()).unwrap();
    let guest = read_edge_list(&fs::read_to_string(a.join("guests/c0_g2.edges")).unwrap()).unwrap();
    let m = EmbeddingMap::from_text(
        &fs::read_to_string(a.join("embeddings/s1_c0_g2.emb")).unwrap(),
        guest.vertex_count(),
    )
    .unwrap();
    assert!(verify_embedding(&guest, &host, &m).is_ok());

    let strict = degen(&[
        "experiment",
        "--config",
        p(&cfg),
        "--out",
        p(&a),
        "--assert-level",
        "strict",
    ]);
    assert_eq!(code(&strict), 2);
    let no_out = degen(&["experiment", "--config", p(&cfg)]);
    assert_eq!(code(&no_out), 1);
}
