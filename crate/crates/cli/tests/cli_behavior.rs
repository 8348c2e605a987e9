//! Black-box tests of the binary: exit-code contract (0 success, 1 usage,
//! 2 data, 3 numeric), error-message content, and the shapes of the files
//! each command leaves behind.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use textseg::corpus::read_manifest;

fn textseg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textseg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn textseg")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = textseg(dir, args);
    assert!(
        out.status.success(),
        "textseg {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exited with a code")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Generates a small corpus and trains a tiny checkpoint under `root`:
/// `data/corpus.txt`, `data/embeddings.vec`, `model/checkpoint-final.bin`.
fn make_artifacts(root: &Path) {
    run_ok(root, &[
        "gen-synth", "--out", "data", "--docs", "8", "--segs-per-doc", "3",
        "--seg-len-lo", "2", "--seg-len-hi", "3", "--sources", "6",
        "--sentences-per-source", "10", "--vocab-per-source", "5",
        "--words-lo", "3", "--words-hi", "5", "--seed", "11", "--pool-seed", "7",
        "--emit-embeddings", "--embed-dim", "8",
    ]);
    run_ok(root, &[
        "train", "--train", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
        "--out", "model", "--h1", "2", "--h2", "2", "--epochs", "2", "--seed", "13",
    ]);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = TempDir::new().unwrap();
    for flags in [&["--help"][..], &["--version"][..], &["train", "--help"][..]] {
        let out = textseg(dir.path(), flags);
        assert_eq!(exit_code(&out), 0, "{flags:?}");
    }
}

#[test]
fn missing_subcommand_and_unknown_flags_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(exit_code(&textseg(dir.path(), &[])), 1);
    assert_eq!(exit_code(&textseg(dir.path(), &["stats", "--bogus"])), 1);
    assert_eq!(exit_code(&textseg(dir.path(), &["no-such-command"])), 1);
}

#[test]
fn missing_input_file_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let out = textseg(dir.path(), &["stats", "--corpus", "nope/corpus.txt"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("nope/corpus.txt"), "message names the path");
}

#[test]
fn stats_on_empty_corpus_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("corpus.txt"), "").unwrap();
    let out = textseg(dir.path(), &["stats", "--corpus", "corpus.txt"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn stats_prints_every_field() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &[
        "gen-synth", "--out", "g", "--docs", "4", "--segs-per-doc", "3",
        "--seg-len-lo", "2", "--seg-len-hi", "3", "--sources", "5",
        "--sentences-per-source", "8", "--vocab-per-source", "5", "--seed", "3",
    ]);
    let stdout = run_ok(dir.path(), &["stats", "--corpus", "g/corpus.txt"]);
    for field in [
        "doc_count", "segment_count", "sentence_count", "seg_len_mean",
        "seg_len_std", "segs_per_doc_mean", "segs_per_doc_std",
    ] {
        assert!(stdout.contains(&format!("{field} = ")), "missing {field} in:\n{stdout}");
    }
}

#[test]
fn predict_requires_a_threshold() {
    let dir = TempDir::new().unwrap();
    make_artifacts(dir.path());
    let out = textseg(dir.path(), &[
        "predict", "--checkpoint", "model/checkpoint-final.bin",
        "--corpus", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
        "--out", "p",
    ]);
    assert_eq!(exit_code(&out), 1, "{}", stderr_of(&out));
    let msg = stderr_of(&out);
    assert!(msg.contains("--tau"), "message points at the missing flag: {msg}");
}

#[test]
fn dimension_mismatch_names_both_dims() {
    let dir = TempDir::new().unwrap();
    make_artifacts(dir.path());
    // A 4-dimensional table against the 8-dimensional checkpoint.
    fs::write(
        dir.path().join("small.vec"),
        "2 4\ns0w0 1 0 0 0\ns0w1 0 1 0 0\n",
    )
    .unwrap();
    let out = textseg(dir.path(), &[
        "predict", "--checkpoint", "model/checkpoint-final.bin",
        "--corpus", "data/corpus.txt", "--embeddings", "small.vec",
        "--out", "p", "--tau", "0.5",
    ]);
    assert_eq!(exit_code(&out), 2, "{}", stderr_of(&out));
    let msg = stderr_of(&out);
    assert!(
        msg.contains('4') && msg.contains('8'),
        "mismatch message names both dimensions: {msg}"
    );
}

#[test]
fn evaluate_with_perfect_oracle_file_scores_zero() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    run_ok(root, &[
        "gen-synth", "--out", "g", "--docs", "6", "--segs-per-doc", "3",
        "--seg-len-lo", "2", "--seg-len-hi", "4", "--sources", "6",
        "--sentences-per-source", "10", "--vocab-per-source", "5", "--seed", "9",
    ]);
    // Reference labels, replayed as the hypothesis file.
    let docs = read_manifest(&root.join("g/corpus.txt")).unwrap();
    let lines: Vec<String> = docs
        .iter()
        .map(|d| {
            serde_json::json!({ "id": d.id, "boundaries": d.labels }).to_string()
        })
        .collect();
    fs::write(root.join("oracle.jsonl"), lines.join("\n") + "\n").unwrap();

    let stdout = run_ok(root, &[
        "evaluate", "--corpus", "g/corpus.txt", "--segmenter", "file",
        "--hypotheses", "oracle.jsonl", "--out", "e",
    ]);
    assert!(stdout.contains("Pk ("), "prints the aggregate line:\n{stdout}");
    assert!(stdout.contains("id"), "prints the per-document table:\n{stdout}");
    let report: Value =
        serde_json::from_str(&fs::read_to_string(root.join("e/eval_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["aggregate_pk"].as_f64().unwrap(), 0.0);
    assert_eq!(report["docs"].as_array().unwrap().len(), 6);
}

#[test]
fn predict_with_tau_one_yields_single_segments() {
    let dir = TempDir::new().unwrap();
    make_artifacts(dir.path());
    run_ok(dir.path(), &[
        "predict", "--checkpoint", "model/checkpoint-final.bin",
        "--corpus", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
        "--out", "p", "--tau", "1.0",
    ]);
    let body = fs::read_to_string(dir.path().join("p/predictions.jsonl")).unwrap();
    let mut seen = 0;
    for line in body.lines() {
        let rec: Value = serde_json::from_str(line).unwrap();
        let boundaries = rec["boundaries"].as_array().unwrap();
        assert!(boundaries.iter().all(|b| b.as_u64() == Some(0)), "{line}");
        assert_eq!(rec["segment_sizes"].as_array().unwrap().len(), 1, "{line}");
        seen += 1;
    }
    assert_eq!(seen, 8);
}

#[test]
fn tuned_file_feeds_predict() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    make_artifacts(root);
    run_ok(root, &[
        "tune", "--checkpoint", "model/checkpoint-final.bin", "--dev", "data/corpus.txt",
        "--embeddings", "data/embeddings.vec", "--out", "tuned",
    ]);
    run_ok(root, &[
        "predict", "--checkpoint", "model/checkpoint-final.bin",
        "--corpus", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
        "--out", "p", "--tau-file", "tuned/tuned.json",
    ]);
    let tuned: Value =
        serde_json::from_str(&fs::read_to_string(root.join("tuned/tuned.json")).unwrap()).unwrap();
    let tau = tuned["tau"].as_f64().unwrap();
    let first = fs::read_to_string(root.join("p/predictions.jsonl")).unwrap();
    let rec: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(rec["tau"].as_f64().unwrap(), tau);
}

#[test]
fn build_corpus_with_every_document_rejected_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    let docs = root.join("docs");
    fs::create_dir(&docs).unwrap();
    // Two-segment documents: all rejected by the ≥3-segments rule.
    for d in 0..3 {
        fs::write(
            docs.join(format!("doc{d}.txt")),
            format!(
                "========,1,One.\nAlpha{d} one. Alpha{d} two.\n\
                 ========,1,Two.\nBeta{d} one. Beta{d} two.\n"
            ),
        )
        .unwrap();
    }
    let out = textseg(root, &["build-corpus", "--in", "docs", "--out", "b", "--seed", "13"]);
    assert_eq!(exit_code(&out), 2, "{}", stderr_of(&out));
    // The report still lands on disk so the rejection counts can be read.
    let report: Value =
        serde_json::from_str(&fs::read_to_string(root.join("b/build_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["accepted"].as_u64(), Some(0));
    assert_eq!(report["rejected"]["too_few_segments"].as_u64(), Some(3));
    for split in ["train.txt", "dev.txt", "test.txt"] {
        assert_eq!(fs::read_to_string(root.join("b").join(split)).unwrap(), "");
    }
}

#[test]
fn train_early_stopping_requires_a_dev_set() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    run_ok(root, &[
        "gen-synth", "--out", "data", "--docs", "4", "--segs-per-doc", "3",
        "--seg-len-lo", "2", "--seg-len-hi", "3", "--sources", "5",
        "--sentences-per-source", "8", "--vocab-per-source", "5", "--seed", "21",
        "--emit-embeddings", "--embed-dim", "4",
    ]);
    let out = textseg(root, &[
        "train", "--train", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
        "--out", "m", "--early-stopping",
    ]);
    assert_eq!(exit_code(&out), 1, "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("--dev"));
}

#[test]
fn evaluate_model_segmenter_requires_checkpoint_and_embeddings() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("corpus.txt"), "").unwrap();
    let out = textseg(dir.path(), &["evaluate", "--corpus", "corpus.txt"]);
    assert_eq!(exit_code(&out), 1, "{}", stderr_of(&out));
}

#[test]
fn gen_synth_validates_ranges() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["gen-synth", "--out", "g", "--seg-len-lo", "0"][..],
        &["gen-synth", "--out", "g", "--words-lo", "0"][..],
        &["gen-synth", "--out", "g", "--segs-per-doc", "30", "--sources", "4"][..],
        &["gen-synth", "--out", "g", "--seg-len-lo", "5", "--seg-len-hi", "2"][..],
    ] {
        let out = textseg(dir.path(), args);
        assert_eq!(exit_code(&out), 1, "{args:?}: {}", stderr_of(&out));
    }
}

#[test]
fn diverged_training_is_a_numeric_error() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    run_ok(root, &[
        "gen-synth", "--out", "data", "--docs", "4", "--segs-per-doc", "3",
        "--seg-len-lo", "2", "--seg-len-hi", "3", "--sources", "5",
        "--sentences-per-source", "8", "--vocab-per-source", "5", "--seed", "23",
        "--emit-embeddings", "--embed-dim", "4",
    ]);
    // An infinite learning rate turns the first SGD step into non-finite
    // weights; the next forward pass must surface that as a numeric failure,
    // not a crash.
    let out = textseg(root, &[
        "train", "--train", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
        "--out", "m", "--h1", "2", "--h2", "2", "--lr", "inf", "--epochs", "2",
    ]);
    assert_eq!(exit_code(&out), 3, "{}", stderr_of(&out));
}

#[test]
fn every_artifact_run_writes_a_manifest() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    make_artifacts(root);
    for (out_dir, command) in [("data", "gen-synth"), ("model", "train")] {
        let manifest: Value = serde_json::from_str(
            &fs::read_to_string(root.join(out_dir).join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["command"].as_str(), Some(command));
        assert!(manifest["argv"].is_array());
        assert!(manifest["seeds"].is_object());
        assert!(manifest["wall_clock_seconds"].is_number());
        assert!(manifest["version"].is_string());
        assert!(!manifest["outputs"].as_array().unwrap().is_empty());
    }
}

#[test]
fn jobs_flag_does_not_change_predictions() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    make_artifacts(root);
    for (out, jobs) in [("p1", "1"), ("p2", "3")] {
        run_ok(root, &[
            "predict", "--checkpoint", "model/checkpoint-final.bin",
            "--corpus", "data/corpus.txt", "--embeddings", "data/embeddings.vec",
            "--out", out, "--tau", "0.4", "--jobs", jobs,
        ]);
    }
    let a = fs::read(root.join("p1/predictions.jsonl")).unwrap();
    let b = fs::read(root.join("p2/predictions.jsonl")).unwrap();
    assert_eq!(a, b, "parallel prediction must preserve order and values");
}
