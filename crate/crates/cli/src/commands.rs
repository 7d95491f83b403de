use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use chrono::Utc;
use conflens::analysis::{run_experiment, Corpus, Experiment, Group};
use conflens::ingest::{
    fetch_reviews, parse_review_archive, write_review_archive, FetchOptions, MalformedPolicy, ReviewRecord,
    ReviewStatus, SelectionMode, UreqTransport,
};
use conflens::lexing::{FileKind, TokenSets};
use conflens::lm::{build_counts, NGramModel};
use serde_json::{json, Value};

use crate::manifest::{file_digest, RunManifest};
use crate::{ExperimentArgs, Format, IngestArgs, ModelArgs, TrainArgs};

/// Invalid combination of arguments not caught by the parser.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// The inputs do not allow the requested computation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct PreconditionError(pub String);

pub fn ingest(args: IngestArgs) -> Result<()> {
    let started = Utc::now();
    let policy = if args.fail_fast { MalformedPolicy::FailFast } else { MalformedPolicy::Skip };
    let (parsed, source, digest) = match (&args.input, &args.gerrit) {
        (Some(path), _) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let parsed = parse_review_archive(BufReader::new(file), policy)
                .with_context(|| format!("reading {}", path.display()))?;
            (parsed, json!({ "input": path }), Some(file_digest(path)?))
        }
        (None, Some(endpoint)) => {
            let query = args.query.as_deref().ok_or_else(|| UsageError("--gerrit needs --query".into()))?;
            let opts = FetchOptions { max_changes: args.max_changes, ..FetchOptions::default() };
            let transport = UreqTransport::new(Duration::from_secs(60));
            let bytes = fetch_reviews(&transport, endpoint, query, &opts)?;
            let parsed = parse_review_archive(bytes.as_slice(), policy)?;
            (parsed, json!({ "gerrit": endpoint, "query": query, "max_changes": args.max_changes }), None)
        }
        (None, None) => return Err(UsageError("either --input or --gerrit is required".into()).into()),
    };
    write_archive(&args.output, &parsed.records)?;
    println!("{} records, {} skipped", parsed.records.len(), parsed.skipped.len());

    let config = json!({ "command": "ingest", "source": source, "fail_fast": args.fail_fast });
    let mut manifest = RunManifest::new("ingest", config, digest, started);
    manifest.outputs.push(args.output.clone());
    manifest.write(&sidecar(&args.output, "manifest.json"))
}

fn write_archive(path: &Path, records: &[ReviewRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_review_archive(&mut w, records)?;
    w.flush()?;
    Ok(())
}

/// `model.txt` -> `model.txt.<suffix>`.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn load_archive(path: &Path) -> Result<Vec<ReviewRecord>> {
    let file = File::open(path).with_context(|| format!("opening archive {}", path.display()))?;
    let parsed = parse_review_archive(BufReader::new(file), MalformedPolicy::Skip)
        .with_context(|| format!("reading archive {}", path.display()))?;
    if !parsed.skipped.is_empty() {
        log::warn!("{} malformed records skipped in {}", parsed.skipped.len(), path.display());
    }
    Ok(parsed.records)
}

fn token_sets(args: &ModelArgs) -> Result<TokenSets> {
    match &args.token_sets {
        Some(dir) => TokenSets::load_dir(dir).with_context(|| format!("loading token sets from {}", dir.display())),
        None => Ok(TokenSets::builtin().clone()),
    }
}

fn model_config(args: &ModelArgs) -> Value {
    json!({
        "smoothing": args.smoothing.to_string(),
        "min_count": args.min_count,
        "mode": SelectionMode::from(args.mode).as_str(),
        "ext": args.ext,
        "kind": args.kind.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
        "token_sets": args.token_sets,
    })
}

fn cache_dir() -> Option<PathBuf> {
    match std::env::var_os("CONFLENS_CACHE") {
        Some(dir) if !dir.is_empty() => Some(PathBuf::from(dir)),
        _ => dirs::cache_dir().map(|d| d.join("conflens")),
    }
}

pub fn train(args: TrainArgs) -> Result<()> {
    let started = Utc::now();
    let order = usize::from(args.order);
    let digest = file_digest(&args.archive)?;
    let mut config = model_config(&args.model);
    config["command"] = json!("train");
    config["order"] = json!(order);
    let mut manifest = RunManifest::new(format!("train --order {order}"), config, Some(digest), started);
    let cached = cache_dir().map(|d| d.join(format!("{}.model", manifest.cache_key())));

    match cached.as_ref().filter(|p| !args.no_cache && p.is_file()) {
        Some(hit) => {
            log::info!("model cache hit: {}", hit.display());
            std::fs::copy(hit, &args.output).with_context(|| format!("writing {}", args.output.display()))?;
        }
        None => {
            let text = train_model(&args, order)?;
            std::fs::write(&args.output, &text).with_context(|| format!("writing {}", args.output.display()))?;
            if let Some(path) = cached.filter(|_| !args.no_cache) {
                let stored =
                    path.parent().map(std::fs::create_dir_all).transpose().and_then(|_| std::fs::write(&path, &text));
                if let Err(e) = stored {
                    log::warn!("could not cache model at {}: {e}", path.display());
                }
            }
        }
    }
    println!("wrote {}", args.output.display());
    manifest.outputs.push(args.output.clone());
    manifest.write(&sidecar(&args.output, "manifest.json"))
}

fn train_model(args: &TrainArgs, order: usize) -> Result<String> {
    let records = load_archive(&args.archive)?;
    let sets = token_sets(&args.model)?;
    let corpus = Corpus::prepare(&records, args.model.mode.into(), &sets)?;
    let mut groups: Vec<Group> = args.model.ext.iter().cloned().map(Group::Extension).collect();
    groups.extend(args.model.kind.iter().copied().map(Group::Kind));
    if groups.is_empty() {
        groups.extend(FileKind::ANALYZED.into_iter().map(Group::Kind));
    }
    let streams: Vec<_> = corpus
        .reviews
        .iter()
        .filter(|r| r.status == ReviewStatus::Accepted)
        .flat_map(|r| r.post.iter())
        .filter(|s| groups.iter().any(|g| g.contains(s)))
        .collect();
    if streams.is_empty() {
        return Err(
            PreconditionError("empty training corpus: no accepted post-review files match the filters".into()).into()
        );
    }
    log::info!("training order-{order} model on {} files", streams.len());
    let counts = build_counts(streams.iter().map(|s| s.texts()), order, args.model.min_count)?;
    let model = NGramModel::train(counts, args.model.smoothing)?;
    Ok(model.to_text())
}

/// `<dir>/<stem>` with a millisecond timestamp, made unique if needed.
fn output_stem(dir: &Path, experiment: Experiment) -> PathBuf {
    let stamp = Utc::now().format("%Y%m%dT%H%M%S%3fZ").to_string();
    let mut stem = dir.join(format!("{experiment}_{stamp}"));
    let mut n = 1;
    while ["csv", "json", "manifest.json"].iter().any(|e| sidecar(&stem, e).exists()) {
        stem = dir.join(format!("{experiment}_{stamp}-{n}"));
        n += 1;
    }
    stem
}

pub fn experiment(args: ExperimentArgs) -> Result<()> {
    let started = Utc::now();
    let experiment = Experiment::from(args.experiment);
    let digest = file_digest(&args.archive)?;
    let records = load_archive(&args.archive)?;
    let sets = token_sets(&args.model)?;
    let config = conflens::ExperimentConfig {
        orders: args.order.0..=args.order.1,
        smoothing: args.model.smoothing,
        min_count: args.model.min_count,
        mode: args.model.mode.into(),
        policy: args.train_policy.into(),
        extensions: (!args.model.ext.is_empty()).then(|| args.model.ext.clone()),
        kinds: (!args.model.kind.is_empty()).then(|| args.model.kind.clone()),
    };
    let k = args.k as usize;
    let threads = args.jobs.unwrap_or(0);
    if args.jobs == Some(0) {
        return Err(UsageError("--jobs must be at least 1".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let report = pool.install(|| run_experiment(experiment, &records, &config, &sets, k))?;
    for w in &report.warnings {
        log::warn!("{w}");
    }

    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let stem = output_stem(&args.out_dir, experiment);
    let mut outputs = Vec::new();
    if matches!(args.format, Format::Csv | Format::Both) {
        let path = sidecar(&stem, "csv");
        std::fs::write(&path, report.table.to_csv_string()).with_context(|| format!("writing {}", path.display()))?;
        outputs.push(path);
    }
    if matches!(args.format, Format::Json | Format::Both) {
        let path = sidecar(&stem, "json");
        std::fs::write(&path, report.json_string()).with_context(|| format!("writing {}", path.display()))?;
        outputs.push(path);
    }
    for p in &outputs {
        println!("wrote {}", p.display());
    }

    let mut cfg = model_config(&args.model);
    cfg["command"] = json!("experiment");
    cfg["experiment"] = json!(experiment.as_str());
    cfg["orders"] = json!([args.order.0, args.order.1]);
    cfg["train_policy"] = json!(config.policy.as_str());
    cfg["format"] = json!(format!("{:?}", args.format).to_lowercase());
    cfg["seed"] = json!(args.seed);
    cfg["k"] = json!(k);
    let mut manifest = RunManifest::new(format!("experiment {experiment}"), cfg, Some(digest), started);
    manifest.outputs = outputs;
    manifest.write(&sidecar(&stem, "manifest.json"))
}
