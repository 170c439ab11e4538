use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rise_core::io::{load_pairs, load_prototype, save_anchors, save_pairs, save_prototype, sha256_file};
use rise_core::synth::{generate, substream, uniform_sphere_point, SynthSpec};
use rise_core::{NormPolicy, Pair, Prototype, RotorBackend, UnitVector};
use serde_json::Value;
use tempfile::TempDir;

fn rise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = rise(args);
    assert!(
        out.status.success(),
        "rise {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    rise(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn synth(dir: &Path, name: &str, lang: &str, dim: usize, n: usize, seed: u64) -> PathBuf {
    let out = dir.join(name);
    let seed = seed.to_string();
    let (dim, n) = (dim.to_string(), n.to_string());
    ok(&[
        "synth", "--dim", &dim, "--pairs", &n, "--magnitude", "0.4", "--seed", &seed, "--language", lang,
        "--phenomenon", "negation", "--out", p(&out),
    ]);
    out
}

#[test]
fn learned_prototype_matches_planted_shift() {
    let dir = TempDir::new().unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    let truth = dir.path().join("truth.json");
    ok(&[
        "synth", "--dim", "32", "--pairs", "40", "--magnitude", "0.7", "--sigma", "0", "--seed", "11",
        "--out", p(&pairs), "--truth-out", p(&truth),
    ]);
    let proto = dir.path().join("proto.json");
    ok(&["learn", "--pairs", p(&pairs), "--out", p(&proto)]);

    let (got, want) = (load_prototype(&proto).unwrap(), load_prototype(&truth).unwrap());
    let err = got
        .as_slice()
        .iter()
        .zip(want.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "max deviation {err:e}");
    assert_eq!(got.pair_count(), 40);

    let manifest = json(&dir.path().join("proto.json.manifest.json"));
    assert_eq!(manifest["inputs"][0]["sha256"], sha256_file(&pairs).unwrap());
    assert_eq!(manifest["outputs"][0]["sha256"], sha256_file(&proto).unwrap());
}

#[test]
fn empty_pair_file_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = dir.path().join("p.json");
    assert_eq!(code(&["learn", "--pairs", p(&empty), "--out", p(&out)]), 5);
    assert!(!out.exists());
}

#[test]
fn rerun_reproduces_output_bytes() {
    let dir = TempDir::new().unwrap();
    let pairs = synth(dir.path(), "en.jsonl", "en", 24, 30, 5);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["learn", "--pairs", p(&pairs), "--out", p(&a), "--workers", "1"]);
    ok(&["learn", "--pairs", p(&pairs), "--out", p(&b), "--workers", "4"]);
    assert_eq!(sha256_file(&a).unwrap(), sha256_file(&b).unwrap());
}

#[test]
fn transfer_on_planted_languages_is_perfect_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("ds");
    std::fs::create_dir(&ds).unwrap();
    // One planted shift, base points split across two language tags.
    let data = generate(&SynthSpec::new(16, 80, 0.4, 0.0, 1).with_tags("xx", "negation")).unwrap();
    for (k, lang) in ["de", "en"].into_iter().enumerate() {
        let pairs: Vec<Pair> = data.pairs[k * 40..(k + 1) * 40]
            .iter()
            .map(|q| Pair::new(q.id.clone(), lang, "negation", q.neutral().clone(), q.variant().clone()).unwrap())
            .collect();
        save_pairs(&ds.join(format!("{lang}.jsonl")), &pairs).unwrap();
    }

    let csv = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let svg = dir.path().join(format!("{name}.svg"));
        ok(&[
            "eval-transfer", "--datasets", p(&ds), "--split", "0.8", "--seed", "9", "--csv", p(&path),
            "--heatmap", p(&svg), "--workers", workers,
        ]);
        (std::fs::read_to_string(&path).unwrap(), std::fs::read(&svg).unwrap())
    };
    let (first, svg1) = csv("a.csv", "1");
    let (second, svg2) = csv("b.csv", "3");
    assert_eq!(first, second);
    assert_eq!(svg1, svg2);

    let rows: Vec<&str> = first.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let mean: f64 = cols[2].parse().unwrap();
        assert!((mean - 1.0).abs() < 1e-9, "{row}");
    }
}

#[test]
fn full_training_split_is_degenerate() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "en.jsonl", "en", 8, 10, 1);
    assert_eq!(code(&["eval-transfer", "--datasets", p(dir.path()), "--split", "1.0"]), 6);
}

#[test]
fn baseline_smoke_report() {
    let dir = TempDir::new().unwrap();
    let pairs = synth(dir.path(), "en.jsonl", "en", 32, 50, 4);
    let proto = dir.path().join("p.json");
    ok(&["learn", "--pairs", p(&pairs), "--out", p(&proto)]);
    let report = dir.path().join("baseline.json");
    ok(&[
        "baseline", "--pairs", p(&pairs), "--proto", p(&proto), "--trials", "10", "--seed", "2", "--out", p(&report),
    ]);
    let r = json(&report);
    assert_eq!(r["trials"], 10);
    assert!(r["random_sem"].as_f64().unwrap() > 0.0);
    let (rise_score, mean, ratio) = (
        r["rise_score"].as_f64().unwrap(),
        r["random_mean"].as_f64().unwrap(),
        r["advantage_ratio"].as_f64().unwrap(),
    );
    assert!((ratio * mean - rise_score).abs() < 1e-12);
}

#[test]
fn zero_prototype_commutes_exactly() {
    let dir = TempDir::new().unwrap();
    let zero = dir.path().join("zero.json");
    save_prototype(&zero, &Prototype::zero(12, RotorBackend::Householder).unwrap()).unwrap();
    let other = dir.path().join("other.json");
    ok(&["random-proto", "--dim", "12", "--magnitude", "0.5", "--seed", "3", "--out", p(&other)]);
    let report = dir.path().join("commute.json");
    ok(&[
        "commute", "--proto-a", p(&zero), "--proto-b", p(&other), "--samples", "6", "--out", p(&report),
    ]);
    let r = json(&report);
    for s in r["samples"].as_array().unwrap() {
        assert!(s["gaps"].as_array().unwrap().iter().all(|g| g.as_f64() == Some(0.0)));
        assert!(s["slope"].is_null());
    }
}

#[test]
fn random_prototypes_commute_to_second_order() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    ok(&["random-proto", "--dim", "16", "--magnitude", "0.5", "--seed", "1", "--out", p(&a)]);
    ok(&["random-proto", "--dim", "16", "--magnitude", "0.5", "--seed", "2", "--out", p(&b)]);
    let report = dir.path().join("commute.json");
    ok(&["commute", "--proto-a", p(&a), "--proto-b", p(&b), "--samples", "30", "--out", p(&report)]);
    let median = json(&report)["median_slope"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&median), "median slope {median}");
}

#[test]
fn commute_needs_three_scales() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    ok(&["random-proto", "--dim", "8", "--magnitude", "0.5", "--out", p(&a)]);
    let out = rise(&["commute", "--proto-a", p(&a), "--proto-b", p(&a), "--scales", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 3"));
}

/// `x -> H x` with `H` a reflection whose normal is orthogonal to `e1`.
fn reflect(x: &[f64], w: &[f64]) -> Vec<f64> {
    let wx: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    x.iter().zip(w).map(|(a, b)| a - 2.0 * wx * b).collect()
}

fn unit(x: &[f64]) -> UnitVector {
    UnitVector::new(x).unwrap()
}

fn cross_model_fixture(dir: &Path, transform: impl Fn(&[f64]) -> Vec<f64>) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let d = 12;
    let data = generate(&SynthSpec::new(d, 60, 0.5, 0.0, 21).with_tags("en", "negation")).unwrap();
    let proto = dir.join("proto.json");
    save_prototype(&proto, &rise_core::learn_prototype(&data.pairs, RotorBackend::Householder).unwrap()).unwrap();

    let mut rng = substream(77, 0);
    let src: Vec<(String, UnitVector)> = (0..40)
        .map(|i| (format!("a{i}"), uniform_sphere_point(d, &mut rng)))
        .collect();
    let tgt: Vec<(String, UnitVector)> = src
        .iter()
        .map(|(id, x)| (id.clone(), unit(&transform(x.as_slice()))))
        .collect();
    let (fs, ft) = (dir.join("src.jsonl"), dir.join("tgt.jsonl"));
    save_anchors(&fs, &src).unwrap();
    save_anchors(&ft, &tgt).unwrap();

    let moved: Vec<Pair> = data
        .pairs
        .iter()
        .map(|q| {
            let (n, v) = (transform(q.neutral().as_slice()), transform(q.variant().as_slice()));
            Pair::new(q.id.clone(), "en", "negation", unit(&n), unit(&v)).unwrap()
        })
        .collect();
    let pairs = dir.join("tgt_pairs.jsonl");
    save_pairs(&pairs, &moved).unwrap();
    (fs, ft, proto, pairs)
}

fn cross_model_report(dir: &Path, fixture: &(PathBuf, PathBuf, PathBuf, PathBuf)) -> Value {
    let report = dir.join("report.json");
    let (fs, ft, proto, pairs) = fixture;
    ok(&[
        "cross-model", "--anchors-src", p(fs), "--anchors-tgt", p(ft), "--proto", p(proto), "--tgt-pairs", p(pairs),
        "--out", p(&report), "--map-out", p(&dir.join("map.json")), "--proto-out", p(&dir.join("ported.json")),
    ]);
    json(&report)
}

#[test]
fn identity_map_reproduces_native_score() {
    let dir = TempDir::new().unwrap();
    let fixture = cross_model_fixture(dir.path(), |x| x.to_vec());
    let r = cross_model_report(dir.path(), &fixture);
    let (ported, native) = (r["ported_score"].as_f64().unwrap(), r["native_score"].as_f64().unwrap());
    assert!((ported - native).abs() < 1e-9, "{ported} vs {native}");
    assert!(dir.path().join("ported.json").exists());
}

#[test]
fn orthogonal_map_keeps_most_of_the_native_score() {
    let dir = TempDir::new().unwrap();
    let mut w: Vec<f64> = (0..12).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
    w[0] = 0.0;
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= n);
    let fixture = cross_model_fixture(dir.path(), |x| reflect(x, &w));
    let r = cross_model_report(dir.path(), &fixture);
    assert!(r["ported_over_native"].as_f64().unwrap() >= 0.95, "{r}");
}

#[test]
fn missing_anchors_are_rank_deficient() {
    let dir = TempDir::new().unwrap();
    let (_, ft, proto, pairs) = cross_model_fixture(dir.path(), |x| x.to_vec());
    let empty = dir.path().join("none.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(
        code(&[
            "cross-model", "--anchors-src", p(&empty), "--anchors-tgt", p(&ft), "--proto", p(&proto),
            "--tgt-pairs", p(&pairs),
        ]),
        10
    );
}

#[test]
fn bench_needs_several_dimensions_and_records_the_machine() {
    let dir = TempDir::new().unwrap();
    assert_ne!(code(&["bench", "--dims", "256"]), 0);

    let out = dir.path().join("bench.json");
    ok(&["bench", "--dims", "64,128,256,512", "--reps", "1", "--out", p(&out)]);
    let r = json(&out);
    assert_eq!(r["points"].as_array().unwrap().len(), 4);
    assert!(r["slope"].is_number());
    let manifest = json(&dir.path().join("bench.json.manifest.json"));
    assert!(manifest["machine"]["cpus"].as_u64().unwrap() >= 1);
    assert_eq!(manifest["machine"]["os"], std::env::consts::OS);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("rise.toml");
    std::fs::write(&cfg, "seed = 5\nbackend = \"givens\"\n").unwrap();
    let out = dir.path().join("r.json");
    ok(&[
        "--config", p(&cfg), "random-proto", "--dim", "8", "--magnitude", "0.3", "--seed", "6", "--out", p(&out),
    ]);
    let manifest = json(&dir.path().join("r.json.manifest.json"));
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["config"]["settings"]["backend"], "givens");
    assert_eq!(load_prototype(&out).unwrap().backend(), RotorBackend::Givens);

    std::fs::write(&cfg, "sede = 5\n").unwrap();
    assert_eq!(code(&["--config", p(&cfg), "random-proto", "--dim", "8", "--magnitude", "0.3", "--out", p(&out)]), 2);
}

#[test]
fn newer_prototype_format_is_rejected() {
    let dir = TempDir::new().unwrap();
    let proto = dir.path().join("p.json");
    ok(&["random-proto", "--dim", "8", "--magnitude", "0.3", "--out", p(&proto)]);
    let bumped = std::fs::read_to_string(&proto)
        .unwrap()
        .replace("\"format_version\": 1", "\"format_version\": 2");
    std::fs::write(&proto, bumped).unwrap();
    let out = rise(&["commute", "--proto-a", p(&proto), "--proto-b", p(&proto)]);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains('2') && stderr.contains('1'), "{stderr}");
}

#[test]
fn binary_corpus_is_accepted() {
    let dir = TempDir::new().unwrap();
    let bin = dir.path().join("pairs.bin");
    let jsonl = dir.path().join("pairs.jsonl");
    for out in [&bin, &jsonl] {
        ok(&["synth", "--dim", "10", "--pairs", "12", "--magnitude", "0.3", "--seed", "8", "--out", p(out)]);
    }
    assert_eq!(&std::fs::read(&bin).unwrap()[..8], b"RISEPAIR");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    ok(&["learn", "--pairs", p(&bin), "--out", p(&a)]);
    ok(&["learn", "--pairs", p(&jsonl), "--out", p(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

/// Serves `requests` OpenAI-style embedding calls, answering each text with
/// `[len, 1, 0, 0]`, and returns how many it saw.
fn serve(listener: TcpListener, requests: usize) -> std::thread::JoinHandle<usize> {
    std::thread::spawn(move || {
        let mut seen = 0;
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        len = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let req: Value = serde_json::from_slice(&body).unwrap();
            let data: Vec<Value> = req["input"]
                .as_array()
                .unwrap()
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let l = t.as_str().unwrap().len() as f64;
                    serde_json::json!({"index": i, "embedding": [l, 1.0, 0.0, 0.0]})
                })
                .collect();
            let reply = serde_json::json!({ "data": data }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
            seen += 1;
        }
        seen
    })
}

#[test]
fn embed_through_provider_then_from_cache() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("texts.jsonl");
    std::fs::write(
        &input,
        "{\"id\":\"1\",\"language\":\"en\",\"phenomenon\":\"negation\",\"neutral_text\":\"it works\",\"variant_text\":\"it does not work\"}\n\
         {\"id\":\"2\",\"language\":\"en\",\"phenomenon\":\"negation\",\"neutral_text\":\"I agree\",\"variant_text\":\"I disagree\"}\n",
    )
    .unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/embeddings", listener.local_addr().unwrap());
    let server = serve(listener, 1);

    let cache = dir.path().join("cache");
    let out = dir.path().join("pairs.jsonl");
    let args = [
        "embed", "--input", p(&input), "--out", p(&out), "--endpoint", &url, "--model-id", "toy", "--cache-dir",
        p(&cache),
    ];
    ok(&args);
    assert_eq!(server.join().unwrap(), 1);

    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"variant_text\":\"it does not work\""));
    let loaded = load_pairs(&out, NormPolicy::Strict).unwrap();
    assert_eq!(loaded.pairs.len(), 2);

    // The server is gone, so this can only succeed from the cache.
    let again = dir.path().join("again.jsonl");
    let mut args = args.to_vec();
    args[4] = p(&again);
    ok(&args);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn embed_without_provider_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("t.jsonl");
    std::fs::write(&input, "").unwrap();
    assert_eq!(code(&["embed", "--input", p(&input), "--out", p(&dir.path().join("o.jsonl"))]), 2);
}

#[test]
fn missing_token_is_a_provider_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("t.jsonl");
    std::fs::write(
        &input,
        "{\"id\":\"1\",\"language\":\"en\",\"phenomenon\":\"x\",\"neutral_text\":\"a\",\"variant_text\":\"b\"}\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rise"))
        .args([
            "embed", "--input", p(&input), "--out", p(&dir.path().join("o.jsonl")), "--endpoint",
            "http://127.0.0.1:9/embed", "--model-id", "m", "--token-env", "RISE_TEST_TOKEN_UNSET", "--no-cache",
        ])
        .env_remove("RISE_TEST_TOKEN_UNSET")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(13));
}
