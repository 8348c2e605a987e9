//! Implementations of the seven subcommands. Each reads its inputs, delegates
//! the real work to the library crate, writes artifacts under `--out`, and
//! finishes with a run manifest.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use walkdir::WalkDir;

use textseg::corpus::{
    apply_filters, corpus_stats, generate_choi_style, parse_document, prepare_training_doc,
    read_manifest, synthetic_pool, to_labeled, write_labeled_record, write_manifest,
    LabeledDocument, Rejection,
};
use textseg::embeddings::{load_vectors, one_hot_table, save_vectors, EmbeddingTable, OovPolicy};
use textseg::infer::{tune_threshold, Hypothesis, PredictionRecord};
use textseg::metrics::{
    evaluate_corpus, random_baseline_with, window_size, EvalReport, PkVariant,
};
use textseg::model::{predict_probs, ModelConfig, ModelError, ModelParams};
use textseg::train::{train as run_train, TrainConfig};

use crate::manifest::{write_run_manifest, ManifestInfo};
use crate::{
    BuildCorpusArgs, CliError, EvaluateArgs, GenSynthArgs, PredictArgs, SegmenterKind, StatsArgs,
    TrainArgs, TuneArgs,
};

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn ensure_dir(p: &Path) -> Result<(), CliError> {
    fs::create_dir_all(p).map_err(|e| CliError::Data(format!("cannot create {}: {e}", p.display())))
}

fn read_file(p: &Path) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("cannot serialize {}: {e}", path.display())))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn open_table(path: &Path, policy: OovPolicy) -> Result<EmbeddingTable, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    load_vectors(BufReader::new(file), policy)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_split(path: &Path) -> Result<Vec<LabeledDocument>, CliError> {
    Ok(read_manifest(path)?)
}

fn load_model(path: &Path) -> Result<ModelParams, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    ModelParams::load(BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn rejection_kind(r: &Rejection) -> &'static str {
    match r {
        Rejection::MostSegmentsFiltered { .. } => "most_segments_filtered",
        Rejection::TooFewSegments { .. } => "too_few_segments",
        Rejection::TooFewTrainingSegments { .. } => "too_few_training_segments",
    }
}

/// Decoding threshold from --tau, falling back to a tuned.json file; having
/// neither is a usage error.
fn resolve_tau(tau: Option<f64>, tau_file: Option<&Path>) -> Result<f64, CliError> {
    #[derive(Deserialize)]
    struct TunedFile {
        tau: f64,
    }
    let value = match (tau, tau_file) {
        (Some(t), _) => t,
        (None, Some(path)) => {
            let parsed: TunedFile = serde_json::from_str(&read_file(path)?)
                .map_err(|e| CliError::Data(format!("{}: not a tuned-threshold file: {e}", path.display())))?;
            parsed.tau
        }
        (None, None) => {
            return Err(CliError::Usage(
                "a decoding threshold is required: pass --tau or --tau-file".into(),
            ))
        }
    };
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(CliError::Usage(format!(
            "threshold must lie in [0, 1], got {value}"
        )));
    }
    Ok(value)
}

/// One prediction per document, in corpus order. Documents too short to
/// segment (fewer than two sentences) get an empty probability vector rather
/// than an error.
fn predict_all(
    params: &ModelParams,
    corpus: &[LabeledDocument],
    table: &EmbeddingTable,
    tau: f64,
    jobs: usize,
) -> Result<Vec<PredictionRecord>, CliError> {
    let run = |doc: &LabeledDocument| -> Result<PredictionRecord, ModelError> {
        let probs = match predict_probs(params, doc, table) {
            Ok(p) => p,
            Err(ModelError::DocumentTooShort { .. }) => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(PredictionRecord::new(doc.id.clone(), probs, tau))
    };
    if jobs == 1 {
        corpus.iter().map(run).collect::<Result<Vec<_>, _>>().map_err(CliError::from)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Data(format!("cannot build thread pool: {e}")))?;
        pool.install(|| corpus.par_iter().map(run).collect::<Result<Vec<_>, _>>())
            .map_err(CliError::from)
    }
}

// ---------------------------------------------------------------- build-corpus

#[derive(Serialize)]
struct SkippedFile {
    path: String,
    reason: String,
}

fn record_name(id: &str) -> String {
    let flat = id.replace(['/', '\\'], "__");
    match flat.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => format!("{stem}.json"),
        _ => format!("{flat}.json"),
    }
}

pub fn build_corpus(args: &BuildCorpusArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    if !args.in_dir.is_dir() {
        return Err(CliError::Data(format!(
            "input directory {} does not exist",
            args.in_dir.display()
        )));
    }
    let mut files: Vec<PathBuf> = WalkDir::new(&args.in_dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().to_path_buf())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "no input files under {}",
            args.in_dir.display()
        )));
    }

    let mut accepted: Vec<LabeledDocument> = Vec::new();
    let mut rejected: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut skipped: Vec<SkippedFile> = Vec::new();
    for file in &files {
        let rel = file
            .strip_prefix(&args.in_dir)
            .unwrap_or(file)
            .to_string_lossy()
            .replace('\\', "/");
        let raw = match fs::read_to_string(file) {
            Ok(r) => r,
            Err(e) => {
                skipped.push(SkippedFile { path: rel, reason: e.to_string() });
                continue;
            }
        };
        let doc = match parse_document(&raw, &rel) {
            Ok(d) => d,
            Err(e) => {
                skipped.push(SkippedFile { path: rel, reason: e.to_string() });
                continue;
            }
        };
        match apply_filters(doc) {
            Ok(kept) => accepted.push(to_labeled(&kept)?),
            Err(rej) => *rejected.entry(rejection_kind(&rej)).or_default() += 1,
        }
    }

    ensure_dir(&args.out)?;
    let records_dir = args.out.join("records");
    ensure_dir(&records_dir)?;
    let mut used: HashSet<String> = HashSet::new();
    let mut rel_paths: Vec<String> = Vec::new();
    for doc in &accepted {
        let mut name = record_name(&doc.id);
        if !used.insert(name.clone()) {
            let stem = name.trim_end_matches(".json").to_string();
            let mut i = 2;
            loop {
                name = format!("{stem}-{i}.json");
                if used.insert(name.clone()) {
                    break;
                }
                i += 1;
            }
        }
        write_labeled_record(&records_dir.join(&name), doc)?;
        rel_paths.push(format!("records/{name}"));
    }

    let mut order: Vec<usize> = (0..rel_paths.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(args.seed));
    let n = order.len();
    let n_train = n * 8 / 10;
    let n_dev = n * 9 / 10 - n_train;
    let pick = |range: std::ops::Range<usize>| -> Vec<String> {
        order[range].iter().map(|&i| rel_paths[i].clone()).collect()
    };
    let train_paths = pick(0..n_train);
    let dev_paths = pick(n_train..n_train + n_dev);
    let test_paths = pick(n_train + n_dev..n);
    write_manifest(&args.out.join("train.txt"), &train_paths)?;
    write_manifest(&args.out.join("dev.txt"), &dev_paths)?;
    write_manifest(&args.out.join("test.txt"), &test_paths)?;

    let report = json!({
        "input_files": files.len(),
        "accepted": accepted.len(),
        "rejected": rejected,
        "skipped": skipped,
        "split": {
            "train": train_paths.len(),
            "dev": dev_paths.len(),
            "test": test_paths.len(),
        },
    });
    write_json(&args.out.join("build_report.json"), &report)?;
    println!(
        "{} input file(s): {} accepted, {} rejected, {} skipped",
        files.len(),
        accepted.len(),
        rejected.values().sum::<usize>(),
        skipped.len()
    );
    println!(
        "split: {} train / {} dev / {} test",
        train_paths.len(),
        dev_paths.len(),
        test_paths.len()
    );
    write_run_manifest(
        &args.out,
        ManifestInfo {
            command: "build-corpus",
            argv,
            seeds: &[("seed", args.seed)],
            inputs: vec![display(&args.in_dir)],
            outputs: vec![
                "records/".into(),
                "train.txt".into(),
                "dev.txt".into(),
                "test.txt".into(),
                "build_report.json".into(),
            ],
        },
        started,
    )?;
    if accepted.is_empty() {
        return Err(CliError::Data(
            "every input document was rejected or skipped; see build_report.json".into(),
        ));
    }
    Ok(())
}

// ----------------------------------------------------------------------- stats

pub fn stats(args: &StatsArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let corpus = load_split(&args.corpus)?;
    let stats = corpus_stats(&corpus)?;
    println!("doc_count = {}", stats.doc_count);
    println!("segment_count = {}", stats.segment_count);
    println!("sentence_count = {}", stats.sentence_count);
    println!("seg_len_mean = {}", stats.seg_len_mean);
    println!("seg_len_std = {}", stats.seg_len_std);
    println!("segs_per_doc_mean = {}", stats.segs_per_doc_mean);
    println!("segs_per_doc_std = {}", stats.segs_per_doc_std);
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("stats.json"), &stats)?;
        write_run_manifest(
            out,
            ManifestInfo {
                command: "stats",
                argv,
                seeds: &[],
                inputs: vec![display(&args.corpus)],
                outputs: vec!["stats.json".into()],
            },
            started,
        )?;
    }
    Ok(())
}

// ----------------------------------------------------------------------- train

pub fn train(args: &TrainArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    if args.early_stopping && args.dev.is_none() {
        return Err(CliError::Usage("--early-stopping requires --dev".into()));
    }
    let table = open_table(&args.embeddings, args.oov)?;
    let raw_train = load_split(&args.train)?;
    let dev = match &args.dev {
        Some(path) => load_split(path)?,
        None => Vec::new(),
    };

    let mut prepared = Vec::new();
    let mut prep_rejected: BTreeMap<&'static str, usize> = BTreeMap::new();
    for doc in &raw_train {
        match prepare_training_doc(doc) {
            Ok(d) => prepared.push(d),
            Err(r) => *prep_rejected.entry(rejection_kind(&r)).or_default() += 1,
        }
    }
    if prepared.is_empty() {
        return Err(CliError::Data(
            "no trainable documents remain after the training transform".into(),
        ));
    }

    let mut model_cfg = ModelConfig::new(table.dim(), args.h1, args.h2, args.seed);
    model_cfg.token_cap = args.token_cap;
    let init = ModelParams::init(&model_cfg);
    let train_cfg = TrainConfig {
        lr: args.lr,
        epochs: args.epochs,
        clip: args.clip,
        seed: args.seed,
        shuffle: !args.no_shuffle,
        early_stopping: args.early_stopping,
    };

    ensure_dir(&args.out)?;
    let best_path = args.out.join("checkpoint-best.bin");
    let (params, history) = run_train(init, &prepared, &dev, &table, &train_cfg, |_, p| {
        let mut w = BufWriter::new(File::create(&best_path)?);
        p.save(&mut w)?;
        w.flush()
    })?;

    let final_path = args.out.join("checkpoint-final.bin");
    let mut w = BufWriter::new(
        File::create(&final_path)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", final_path.display())))?,
    );
    params
        .save(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", final_path.display())))?;

    // History holds only seeded quantities so identical flags give identical
    // bytes; wall-clock timings go in the report instead.
    write_json(
        &args.out.join("history.json"),
        &json!({
            "train_loss": history.train_loss,
            "dev_loss": history.dev_loss,
        }),
    )?;
    let best_dev = history.dev_loss.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let report = json!({
        "epochs_run": history.train_loss.len(),
        "final_train_loss": history.train_loss.last(),
        "best_dev_loss": if best_dev.is_finite() { Some(best_dev) } else { None },
        "prepared": {
            "kept": prepared.len(),
            "rejected": prep_rejected,
        },
        "epoch_seconds": history.epoch_seconds,
    });
    write_json(&args.out.join("train_report.json"), &report)?;
    println!(
        "trained {} epoch(s) on {} document(s); final mean train loss {:.6}",
        history.train_loss.len(),
        prepared.len(),
        history.train_loss.last().copied().unwrap_or(f64::NAN)
    );

    let mut inputs = vec![display(&args.train), display(&args.embeddings)];
    if let Some(dev_path) = &args.dev {
        inputs.push(display(dev_path));
    }
    let mut outputs = vec![
        "checkpoint-final.bin".to_string(),
        "history.json".to_string(),
        "train_report.json".to_string(),
    ];
    if best_path.exists() {
        outputs.insert(0, "checkpoint-best.bin".to_string());
    }
    write_run_manifest(
        &args.out,
        ManifestInfo {
            command: "train",
            argv,
            seeds: &[("seed", args.seed)],
            inputs,
            outputs,
        },
        started,
    )
}

// ------------------------------------------------------------------------ tune

pub fn tune(args: &TuneArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let params = load_model(&args.checkpoint)?;
    let table = open_table(&args.embeddings, args.oov)?;
    let dev = load_split(&args.dev)?;
    let (tau, dev_pk) = tune_threshold(&params, &dev, &table)?;
    ensure_dir(&args.out)?;
    write_json(&args.out.join("tuned.json"), &json!({ "tau": tau, "dev_pk": dev_pk }))?;
    println!("tau = {tau} (dev Pk = {dev_pk:.4})");
    write_run_manifest(
        &args.out,
        ManifestInfo {
            command: "tune",
            argv,
            seeds: &[],
            inputs: vec![
                display(&args.checkpoint),
                display(&args.embeddings),
                display(&args.dev),
            ],
            outputs: vec!["tuned.json".into()],
        },
        started,
    )
}

// --------------------------------------------------------------------- predict

pub fn predict(args: &PredictArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let tau = resolve_tau(args.tau, args.tau_file.as_deref())?;
    let params = load_model(&args.checkpoint)?;
    let table = open_table(&args.embeddings, args.oov)?;
    let corpus = load_split(&args.corpus)?;
    let records = predict_all(&params, &corpus, &table, tau, args.jobs)?;

    ensure_dir(&args.out)?;
    let pred_path = args.out.join("predictions.jsonl");
    let mut w = BufWriter::new(
        File::create(&pred_path)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", pred_path.display())))?,
    );
    for record in &records {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::Data(format!("cannot serialize prediction: {e}")))?;
        writeln!(w, "{line}")
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", pred_path.display())))?;
    }
    w.flush()
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", pred_path.display())))?;

    write_json(
        &args.out.join("predict_report.json"),
        &json!({
            "docs": records.len(),
            "tau": tau,
            "wall_clock_seconds": started.elapsed().as_secs_f64(),
        }),
    )?;
    println!("wrote {} prediction(s) at tau = {tau}", records.len());

    let mut inputs = vec![
        display(&args.checkpoint),
        display(&args.corpus),
        display(&args.embeddings),
    ];
    if let Some(tf) = &args.tau_file {
        inputs.push(display(tf));
    }
    write_run_manifest(
        &args.out,
        ManifestInfo {
            command: "predict",
            argv,
            seeds: &[],
            inputs,
            outputs: vec!["predictions.jsonl".into(), "predict_report.json".into()],
        },
        started,
    )
}

// -------------------------------------------------------------------- evaluate

fn eval_precomputed(
    hyps: Vec<Hypothesis>,
    corpus: &[LabeledDocument],
    variant: PkVariant,
    tau: Option<f64>,
) -> Result<EvalReport, CliError> {
    let mut it = hyps.into_iter();
    Ok(evaluate_corpus(
        move |_| it.next().expect("one hypothesis per document"),
        corpus,
        variant,
        tau,
    )?)
}

fn read_hypotheses(path: &Path, corpus: &[LabeledDocument]) -> Result<Vec<Hypothesis>, CliError> {
    #[derive(Deserialize)]
    struct HypothesisLine {
        id: String,
        boundaries: Vec<u8>,
    }
    let text = read_file(path)?;
    let mut map: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: HypothesisLine = serde_json::from_str(line).map_err(|e| {
            CliError::Data(format!("{}:{}: bad hypothesis line: {e}", path.display(), lineno + 1))
        })?;
        if parsed.boundaries.iter().any(|&b| b > 1) {
            return Err(CliError::Data(format!(
                "{}:{}: boundaries must be 0 or 1",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(parsed.id, parsed.boundaries);
    }
    corpus
        .iter()
        .map(|doc| {
            map.get(&doc.id).cloned().map(Hypothesis::from_boundaries).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: no hypothesis for document {:?}",
                    path.display(),
                    doc.id
                ))
            })
        })
        .collect()
}

pub fn evaluate(args: &EvaluateArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let corpus = load_split(&args.corpus)?;
    let mut inputs = vec![display(&args.corpus)];
    let mut seeds: Vec<(&str, u64)> = Vec::new();

    let report = match args.segmenter {
        SegmenterKind::Model => {
            let checkpoint = args.checkpoint.as_ref().ok_or_else(|| {
                CliError::Usage("--segmenter model requires --checkpoint".into())
            })?;
            let embeddings = args.embeddings.as_ref().ok_or_else(|| {
                CliError::Usage("--segmenter model requires --embeddings".into())
            })?;
            let tau = resolve_tau(args.tau, args.tau_file.as_deref())?;
            let params = load_model(checkpoint)?;
            let table = open_table(embeddings, args.oov)?;
            inputs.push(display(checkpoint));
            inputs.push(display(embeddings));
            let records = predict_all(&params, &corpus, &table, tau, args.jobs)?;
            let hyps = records
                .into_iter()
                .map(|r| Hypothesis::from_boundaries(r.boundaries))
                .collect();
            eval_precomputed(hyps, &corpus, args.variant, Some(tau))?
        }
        SegmenterKind::Random => {
            seeds.push(("seed", args.seed));
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            evaluate_corpus(
                |d| {
                    let k = window_size(&d.segment_sizes);
                    random_baseline_with(&mut rng, d.n(), k as f64)
                },
                &corpus,
                args.variant,
                None,
            )?
        }
        SegmenterKind::File => {
            let hyp_path = args.hypotheses.as_ref().ok_or_else(|| {
                CliError::Usage("--segmenter file requires --hypotheses".into())
            })?;
            inputs.push(display(hyp_path));
            let hyps = read_hypotheses(hyp_path, &corpus)?;
            eval_precomputed(hyps, &corpus, args.variant, None)?
        }
    };

    println!(
        "Pk ({} windows) = {:.4} over {} document(s)",
        report.variant,
        report.aggregate_pk,
        report.docs.len()
    );
    let width = report.docs.iter().map(|d| d.id.len()).fold("id".len(), usize::max);
    println!("{:<width$}  {:>4}  {:>8}", "id", "k", "pk");
    for doc in &report.docs {
        println!("{:<width$}  {:>4}  {:>8.4}", doc.id, doc.k, doc.pk);
    }
    if !report.skipped.is_empty() {
        println!("skipped (window does not fit):");
        for s in &report.skipped {
            println!("  {} (k = {}, positions = {})", s.id, s.k, s.positions);
        }
    }

    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("eval_report.json"), &report)?;
        write_run_manifest(
            out,
            ManifestInfo {
                command: "evaluate",
                argv,
                seeds: &seeds,
                inputs,
                outputs: vec!["eval_report.json".into()],
            },
            started,
        )?;
    }
    Ok(())
}

// ------------------------------------------------------------------- gen-synth

pub fn gen_synth(args: &GenSynthArgs, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    if args.seg_len_lo < 1 || args.seg_len_lo > args.seg_len_hi {
        return Err(CliError::Usage(format!(
            "--seg-len-lo/--seg-len-hi must satisfy 1 <= lo <= hi, got [{}, {}]",
            args.seg_len_lo, args.seg_len_hi
        )));
    }
    if args.words_lo < 1 || args.words_lo > args.words_hi {
        return Err(CliError::Usage(format!(
            "--words-lo/--words-hi must satisfy 1 <= lo <= hi, got [{}, {}]",
            args.words_lo, args.words_hi
        )));
    }
    if args.vocab_per_source == 0 {
        return Err(CliError::Usage("--vocab-per-source must be positive".into()));
    }
    if args.segs_per_doc == 0 || args.sources < args.segs_per_doc {
        return Err(CliError::Usage(format!(
            "need 1 <= --segs-per-doc <= --sources, got {} segments from {} sources",
            args.segs_per_doc, args.sources
        )));
    }
    if args.embed_dim == 0 {
        return Err(CliError::Usage("--embed-dim must be positive".into()));
    }

    let pool = synthetic_pool(
        args.sources,
        args.sentences_per_source,
        args.vocab_per_source,
        (args.words_lo, args.words_hi),
        args.pool_seed,
    );
    let docs = generate_choi_style(
        &pool.sources,
        args.docs,
        args.segs_per_doc,
        (args.seg_len_lo, args.seg_len_hi),
        args.seed,
    )?;

    ensure_dir(&args.out)?;
    let records_dir = args.out.join("records");
    ensure_dir(&records_dir)?;
    let mut rel_paths = Vec::with_capacity(docs.len());
    for doc in &docs {
        let name = format!("{}.json", doc.id);
        write_labeled_record(&records_dir.join(&name), doc)?;
        rel_paths.push(format!("records/{name}"));
    }
    write_manifest(&args.out.join("corpus.txt"), &rel_paths)?;

    let mut outputs = vec!["records/".to_string(), "corpus.txt".to_string(), "gen_report.json".to_string()];
    if args.emit_embeddings {
        let table = one_hot_table(args.embed_dim, &pool.vocab)
            .map_err(|e| CliError::Data(e.to_string()))?;
        let emb_path = args.out.join("embeddings.vec");
        let mut w = BufWriter::new(
            File::create(&emb_path)
                .map_err(|e| CliError::Data(format!("cannot create {}: {e}", emb_path.display())))?,
        );
        save_vectors(&mut w, &table)
            .and_then(|()| w.flush())
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", emb_path.display())))?;
        outputs.push("embeddings.vec".into());
    }
    let report = json!({
        "docs": docs.len(),
        "segs_per_doc": args.segs_per_doc,
        "seg_len_range": [args.seg_len_lo, args.seg_len_hi],
        "sources": args.sources,
        "vocab_words": pool.vocab.iter().map(Vec::len).sum::<usize>(),
        "embeddings_emitted": args.emit_embeddings,
    });
    write_json(&args.out.join("gen_report.json"), &report)?;
    println!(
        "generated {} synthetic document(s) with {} segment(s) each",
        docs.len(),
        args.segs_per_doc
    );
    write_run_manifest(
        &args.out,
        ManifestInfo {
            command: "gen-synth",
            argv,
            seeds: &[("seed", args.seed), ("pool_seed", args.pool_seed)],
            inputs: Vec::new(),
            outputs,
        },
        started,
    )
}
