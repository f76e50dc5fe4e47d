//! End-to-end tests driving the `forge` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forge_core::embeddings::{embed_sentences, read_vectors, EmbedderSpec};

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .output()
        .expect("failed to spawn forge")
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn score_identity_prints_100() {
    let f = fixture("text/devsample_kaa_ref.txt");
    let out = forge(&[
        "score",
        "--hyp",
        path_str(&f),
        "--ref",
        path_str(&f),
        "--metric",
        "both",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("BLEU = 100.00"), "got: {text}");
    assert!(text.contains("chrF++ = 100.00"), "got: {text}");
    assert!(text.contains("tok:13a"), "missing signature: {text}");
}

#[test]
fn score_json_mode() {
    let f = fixture("text/devsample_kaa_ref.txt");
    let out = forge(&[
        "score",
        "--json",
        "--hyp",
        path_str(&f),
        "--ref",
        path_str(&f),
        "--metric",
        "both",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["bleu"]["score"], 100.0);
    assert_eq!(doc["chrfpp"]["score"], 100.0);
    assert_eq!(doc["nrefs"], 1);
}

#[test]
fn unknown_subcommand_exits_1_with_usage() {
    let out = forge(&["bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("Usage"), "stderr: {err}");
}

#[test]
fn help_exits_0() {
    let out = forge(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("translit"));
}

#[test]
fn translit_strict_fails_on_unmapped() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, "salem ж\n").unwrap();
    let table = fixture("tables/lat2009_to_lat2016.tsv");
    let out_path = dir.path().join("out.txt");

    let relaxed = forge(&[
        "translit",
        "--table",
        path_str(&table),
        "--in",
        path_str(&input),
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(relaxed.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), "salem ж\n");

    let strict = forge(&[
        "translit",
        "--table",
        path_str(&table),
        "--in",
        path_str(&input),
        "--out",
        path_str(&out_path),
        "--strict",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_2() {
    let out = forge(&[
        "score",
        "--hyp",
        "/nonexistent/hyp.txt",
        "--ref",
        "/nonexistent/ref.txt",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_writes_readable_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("text/devsample_kaa_ref.txt");
    let out_path = dir.path().join("v.emb");
    let out = forge(&[
        "embed",
        "--in",
        path_str(&input),
        "--spec",
        "hashed:2,4,64",
        "--out",
        path_str(&out_path),
        "--json",
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["count"], 3);
    assert_eq!(summary["dim"], 64);
    let matrix = read_vectors(&out_path).unwrap();
    assert_eq!((matrix.len(), matrix.dim()), (3, 64));
}

/// The full pipeline: transliterate both sides to the 2016 orthography,
/// embed with explicit vector files, align, then score. The expected
/// pair count comes from a brute-force enumeration over the same score
/// matrix the aligner sees.
#[test]
fn end_to_end_pipeline_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let a_path = dir.path().join("a2016.txt");
    let b_path = dir.path().join("b2016.txt");

    let run = |args: &[&str]| {
        let out = forge(args);
        assert!(
            out.status.success(),
            "forge {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    };

    run(&[
        "translit",
        "--table",
        path_str(&fixture("tables/lat2009_to_lat2016.tsv")),
        "--in",
        path_str(&fixture("text/chapter.lat2009")),
        "--out",
        path_str(&a_path),
        "--strict",
    ]);
    run(&[
        "translit",
        "--table",
        path_str(&fixture("tables/cyr_to_lat2016.tsv")),
        "--in",
        path_str(&fixture("text/chapter.cyr")),
        "--out",
        path_str(&b_path),
        "--strict",
    ]);

    let a_vec = dir.path().join("a.emb");
    let b_vec = dir.path().join("b.emb");
    run(&["embed", "--in", path_str(&a_path), "--out", path_str(&a_vec)]);
    run(&["embed", "--in", path_str(&b_path), "--out", path_str(&b_vec)]);

    let tsv_path = dir.path().join("pairs.tsv");
    run(&[
        "align",
        "--src",
        path_str(&a_path),
        "--tgt",
        path_str(&b_path),
        "--src-vec",
        path_str(&a_vec),
        "--tgt-vec",
        path_str(&b_vec),
        "--threshold",
        "0.5",
        "--out",
        path_str(&tsv_path),
    ]);

    let tsv = std::fs::read_to_string(&tsv_path).unwrap();
    let rows: Vec<&str> = tsv.lines().collect();

    // Oracle: embed the same files through the library, enumerate every
    // monotone matching, and count pairs at the same threshold.
    let src: Vec<String> = std::fs::read_to_string(&a_path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    let tgt: Vec<String> = std::fs::read_to_string(&b_path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    let spec = EmbedderSpec::default();
    let v_src = embed_sentences(&src, &spec).unwrap();
    let v_tgt = embed_sentences(&tgt, &spec).unwrap();
    let scores: Vec<Vec<f64>> = (0..src.len())
        .map(|i| {
            (0..tgt.len())
                .map(|j| {
                    forge_core::align::pair_score(&src[i], &tgt[j], v_src.row(i), v_tgt.row(j))
                        .unwrap()
                })
                .collect()
        })
        .collect();
    let (_, best_pairs) = brute_force(&scores, 0, 0);
    let expected: usize = best_pairs.iter().filter(|&&(i, j)| scores[i][j] >= 0.5).count();

    assert_eq!(rows.len(), expected);
    assert_eq!(rows.len(), 6, "all six true pairs survive the threshold");

    // Each TSV row: doc_id, src_index, tgt_index, score, src_text, tgt_text.
    for row in &rows {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols.len(), 6, "bad row {row:?}");
        let i: usize = cols[1].parse().unwrap();
        let j: usize = cols[2].parse().unwrap();
        assert_eq!(cols[4], src[i]);
        assert_eq!(cols[5], tgt[j]);
    }

    // Mined columns score 100 against themselves.
    let mined_src = dir.path().join("mined_src.txt");
    let text: String = rows
        .iter()
        .map(|r| r.split('\t').nth(4).unwrap().to_string() + "\n")
        .collect();
    std::fs::write(&mined_src, text).unwrap();
    let score_out = run(&[
        "score",
        "--hyp",
        path_str(&mined_src),
        "--ref",
        path_str(&mined_src),
    ]);
    assert!(stdout(&score_out).contains("BLEU = 100.00"));
}

/// Exhaustive monotone matching maximum, returning the best pair set.
fn brute_force(scores: &[Vec<f64>], i: usize, j: usize) -> (f64, Vec<(usize, usize)>) {
    let mut best = (0.0f64, Vec::new());
    for ii in i..scores.len() {
        for jj in j..scores[ii].len() {
            let (tail, mut pairs) = brute_force(scores, ii + 1, jj + 1);
            let total = scores[ii][jj] + tail;
            if total > best.0 {
                pairs.insert(0, (ii, jj));
                best = (total, pairs);
            }
        }
    }
    best
}

#[test]
fn align_manifest_batch_mode() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d1.src"), "bir gáp\neki gáp\n").unwrap();
    std::fs::write(dir.path().join("d1.tgt"), "bir gáp\neki gáp\n").unwrap();
    std::fs::write(dir.path().join("d2.src"), "úsh gáp\n").unwrap();
    std::fs::write(dir.path().join("d2.tgt"), "úsh gáp\n").unwrap();
    let manifest = dir.path().join("docs.jsonl");
    std::fs::write(
        &manifest,
        r#"{"doc_id":"d1","src_path":"d1.src","tgt_path":"d1.tgt"}
{"doc_id":"d2","src_path":"d2.src","tgt_path":"d2.tgt"}
"#,
    )
    .unwrap();

    let out = forge(&["align", "--manifest", path_str(&manifest)]);
    assert!(out.status.success());
    let rows: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("d1\t0\t0\t"));
    assert!(rows[2].starts_with("d2\t0\t0\t"));
}

#[test]
fn expand_vocab_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let vocab_path = dir.path().join("toy.vocab");
    std::fs::write(&vocab_path, "qar\nlı\nday\n").unwrap();

    let sentences = ["qar", "lı", "day"];
    let spec = EmbedderSpec::parse("hashed:1,2,16").unwrap();
    let emb = embed_sentences(&sentences, &spec).unwrap();
    let emb_path = dir.path().join("toy.emb");
    forge_core::embeddings::write_vectors(&emb_path, &emb).unwrap();

    let plan_path = dir.path().join("plan.tsv");
    std::fs::write(&plan_path, "qarlı\tqar lı\nqarlıday\tqar lı day\n").unwrap();

    let out_path = dir.path().join("expanded.emb");
    let out = forge(&[
        "expand-vocab",
        "--vocab",
        path_str(&vocab_path),
        "--emb",
        path_str(&emb_path),
        "--plan",
        path_str(&plan_path),
        "--out",
        path_str(&out_path),
        "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["total_rows"], 5);

    let expanded = read_vectors(&out_path).unwrap();
    assert_eq!(expanded.len(), 5);
    // First rows preserved bit-for-bit.
    assert_eq!(&expanded.as_slice()[..3 * 16], emb.as_slice());
}

#[test]
fn corpus_stats_and_mix() {
    let dir = tempfile::tempdir().unwrap();
    let write_pairs = |name: &str, n: usize| {
        let src: String = (0..n).map(|i| format!("kaa gáp {i}\n")).collect();
        let tgt: String = (0..n).map(|i| format!("uzb gap {i}\n")).collect();
        std::fs::write(dir.path().join(format!("{name}.kaa")), src).unwrap();
        std::fs::write(dir.path().join(format!("{name}.uzb")), tgt).unwrap();
    };
    write_pairs("news", 23);
    write_pairs("books", 77);
    let manifest = dir.path().join("manifest.jsonl");
    std::fs::write(
        &manifest,
        r#"{"name":"news","src_lang":"kaa","tgt_lang":"uzb","src_path":"news.kaa","tgt_path":"news.uzb","domain":"news"}
{"name":"books","src_lang":"kaa","tgt_lang":"uzb","src_path":"books.kaa","tgt_path":"books.uzb","domain":"books"}
"#,
    )
    .unwrap();

    let stats = forge(&["corpus", "stats", "--manifest", path_str(&manifest), "--json"]);
    assert!(stats.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&stats)).unwrap();
    assert_eq!(doc["total"], 100);
    assert_eq!(doc["rows"][0]["domain"], "news");
    assert_eq!(doc["rows"][0]["fraction"], 0.23);

    let out_a = dir.path().join("mix_a.tsv");
    let out_b = dir.path().join("mix_b.tsv");
    for out in [&out_a, &out_b] {
        let mix = forge(&[
            "corpus",
            "mix",
            "--manifest",
            path_str(&manifest),
            "--rate-uzkaz",
            "0.20",
            "--rate-other",
            "0.05",
            "--cap",
            "300000",
            "--seed",
            "42",
            "--out",
            path_str(out),
        ]);
        assert!(mix.status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "same seed must give identical bytes");
    // Both datasets involve Uzbek: floor(0.2 * 23) + floor(0.2 * 77) = 19.
    let lines = a.split(|&c| c == b'\n').filter(|l| !l.is_empty()).count();
    assert_eq!(lines, 19);
}
