use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dupq::corpus::{
    filter_pairs, load_quora_tsv, load_stackexchange, process_pairs, read_cache, split_dataset,
    write_cache, ProcessedPair, Source,
};
use dupq::embeddings::{build_vocab, load_text_embeddings, EmbeddingTable, EncodedPair, Vocab};
use dupq::eval::{
    evaluate as evaluate_split, fit, read_eval_reports, results_table, run_combined_baseline,
    write_eval_reports, Approach, ConfigEcho, EvalReport, Fitted, FittedModel, LabeledSplit,
    ModelKind,
};
use dupq::features::FeatureContext;
use dupq::gbt::{read_model, write_model};
use dupq::net::{
    read_parameters, write_history, write_parameters, Aggregation, Encoder, Snn, SnnSpec,
};
use dupq::transfer::{
    enumerate_configs, run_transfer_experiment, summary_table, write_manifest, write_reports,
    SourceModel, SweepMode, TargetData,
};
use dupq::{synth, Error};
use serde::Serialize;

use crate::config::{digest, RunConfig};
use crate::{
    AggregationArg, EncoderArg, EvaluateArgs, IngestArgs, ModelArg, Recipe, ReportArgs, RunArgs,
    SourceKind, SweepArg, TransferArgs,
};

const RUN_FILE: &str = "run.json";
const REPORTS_FILE: &str = "reports.jsonl";

fn invalid(message: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(message.into()).into()
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    let input = |i: usize, what: &str| -> Result<&PathBuf> {
        a.inputs
            .get(i)
            .ok_or_else(|| invalid(format!("--input needs the {what}")))
    };
    let (source, pairs, skipped) = match a.source {
        SourceKind::Quora => {
            let loaded = load_quora_tsv(input(0, "Quora TSV")?)?;
            (Source::Quora, loaded.pairs, loaded.skipped)
        }
        SourceKind::Askubuntu | SourceKind::Englishse => {
            let source = match a.source {
                SourceKind::Askubuntu => Source::AskUbuntu,
                _ => Source::EnglishSE,
            };
            let posts = input(0, "Posts.xml path")?;
            let links = input(1, "PostLinks.xml path")?;
            (
                source,
                load_stackexchange(posts, links, source, a.negative_ratio, a.seed)?,
                0,
            )
        }
        SourceKind::Synthetic => {
            let pairs = match a.recipe {
                Recipe::Overlap => synth::overlap_pairs(a.pairs, a.seed),
                Recipe::Paraphrase => synth::paraphrase_pairs(a.pairs, a.seed),
            };
            (Source::Synthetic, pairs, 0)
        }
    };
    let loaded = pairs.len();
    let outcome = filter_pairs(pairs);
    let processed = process_pairs(&outcome.kept);
    let name = a
        .dataset
        .clone()
        .unwrap_or_else(|| source.as_str().to_string());
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{name}.corpus.jsonl"));
    write_cache(&path, &name, &processed)?;
    let tally = serde_json::json!({
        "dataset": name,
        "loaded": loaded,
        "skipped_rows": skipped,
        "dropped_empty": outcome.tally.empty,
        "dropped_non_english": outcome.tally.non_english,
        "kept": processed.len(),
        "cache": path,
    });
    println!("{tally}");
    Ok(())
}

/// Config file, then each flag that was given.
fn resolve(a: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(a.config.as_deref())?;
    apply_flags(&mut cfg, a);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_flags(cfg: &mut RunConfig, a: &RunArgs) {
    if !a.dataset.is_empty() {
        cfg.datasets = a.dataset.clone();
    }
    if let Some(seed) = a.seed {
        cfg.set_seed(seed);
    }
    if let Some(path) = &a.embeddings {
        cfg.embeddings = Some(path.clone());
    }
    if let Some(dim) = a.dim {
        cfg.set_dim(dim);
    }
    if let Some(model) = a.model {
        cfg.pipeline.approach = match model {
            ModelArg::Gbt => Approach::Gbt,
            ModelArg::Snn => Approach::Snn,
        };
    }
    if let Some(agg) = a.aggregation {
        cfg.pipeline.snn.aggregation = match agg {
            AggregationArg::Expabs => Aggregation::ExpAbsDiff,
            AggregationArg::Concat => Aggregation::Concat,
        };
    }
    if let Some(enc) = a.encoder {
        cfg.pipeline.snn.encoder = match enc {
            EncoderArg::Mean => Encoder::MeanPool,
            EncoderArg::Lstm => Encoder::Lstm,
        };
    }
    if let Some(epochs) = a.epochs {
        cfg.pipeline.train.epochs = epochs;
    }
    if let Some(rounds) = a.rounds {
        cfg.pipeline.gbt.rounds = rounds;
    }
    if let Some(dir) = &a.data_dir {
        cfg.data_dir = Some(dir.clone());
    }
    if let Some(out) = &a.out {
        cfg.out = out.clone();
    }
}

fn load_datasets(cfg: &RunConfig) -> Result<Vec<LabeledSplit>> {
    if cfg.datasets.is_empty() {
        bail!(invalid(
            "no dataset given; pass --dataset or set `datasets` in the config"
        ));
    }
    cfg.datasets
        .iter()
        .map(|d| {
            let path = cfg.dataset_path(d);
            let (header, pairs) = read_cache(&path)?;
            Ok(LabeledSplit {
                dataset: header.dataset,
                preprocess: header.preprocess,
                split: split_dataset(pairs, cfg.pipeline.split_seed)?,
            })
        })
        .collect()
}

fn load_table(cfg: &RunConfig) -> Result<Option<EmbeddingTable>> {
    match &cfg.embeddings {
        Some(path) => Ok(Some(load_text_embeddings(path, cfg.embedding_dim)?.table)),
        None => Ok(None),
    }
}

fn all_pairs(d: &LabeledSplit) -> Vec<&ProcessedPair> {
    d.split
        .train
        .iter()
        .chain(&d.split.validation)
        .chain(&d.split.test)
        .collect()
}

fn kind_of(approach: Approach) -> ModelKind {
    match approach {
        Approach::Gbt => ModelKind::Gbt,
        Approach::Snn => ModelKind::Snn,
    }
}

fn approach_name(approach: Approach) -> &'static str {
    match approach {
        Approach::Gbt => "gbt",
        Approach::Snn => "snn",
    }
}

/// `<out>/<command>-<label>-<hash>`, created empty of stale files.
fn run_dir(out: &Path, command: &str, label: &str, hash: &str) -> Result<PathBuf> {
    let dir = out.join(format!("{command}-{label}-{hash}"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    write_text(path, &out)
}

fn print_reports(reports: &[EvalReport], dir: &Path) {
    for r in reports {
        println!("{}\t{}\tauc={:.4}", r.kind, r.dataset, r.auc);
    }
    println!("run directory: {}", dir.display());
}

pub fn train(a: &RunArgs) -> Result<()> {
    let cfg = resolve(a)?;
    let data = load_datasets(&cfg)?;
    let table = load_table(&cfg)?;
    let names: Vec<&str> = data.iter().map(|d| d.dataset.as_str()).collect();
    let label = format!(
        "{}-{}",
        names.join("+"),
        approach_name(cfg.pipeline.approach)
    );
    let dir = run_dir(&cfg.out, "train", &label, &cfg.hash())?;
    write_text(&dir.join(RUN_FILE), &cfg.to_json())?;

    let reports = if let [d] = data.as_slice() {
        let fitted = fit(
            &d.split.train,
            &d.split.validation,
            &all_pairs(d),
            table.as_ref(),
            &d.preprocess,
            &cfg.pipeline,
        )?;
        let report = evaluate_split(&fitted, d, kind_of(cfg.pipeline.approach))?;
        match &fitted.model {
            FittedModel::Gbt { model, history, .. } => {
                write_model(&dir.join("model.gbt"), model)?;
                write_jsonl(&dir.join("history.jsonl"), history)?;
            }
            FittedModel::Snn {
                model,
                vocab,
                history,
            } => {
                write_parameters(&dir.join("model.params"), &model.spec, &model.params)?;
                vocab.write(&dir.join("vocab.txt"))?;
                write_history(&dir.join("history.jsonl"), history)?;
            }
        }
        vec![report]
    } else {
        run_combined_baseline(&data, table.as_ref(), &cfg.pipeline)?
    };
    write_eval_reports(&dir.join(REPORTS_FILE), &reports)?;
    print_reports(&reports, &dir);
    Ok(())
}

fn read_run_config(run: &Path) -> Result<RunConfig> {
    let path = run.join(RUN_FILE);
    if !path.is_file() {
        bail!(invalid(format!(
            "{} is not a run directory (no {RUN_FILE})",
            run.display()
        )));
    }
    RunConfig::load(Some(&path))
}

fn single(data: Vec<LabeledSplit>, command: &str) -> Result<LabeledSplit> {
    let mut data = data;
    if data.len() != 1 {
        bail!(invalid(format!(
            "{command} takes exactly one dataset, got {}",
            data.len()
        )));
    }
    Ok(data.remove(0))
}

/// Loads a train run's model and scores the test split of `--dataset`
/// (the run's own datasets when omitted). GBT features are rebuilt from
/// that dataset.
pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut cfg = read_run_config(&a.run_dir)?;
    let saved = cfg.clone();
    apply_flags(&mut cfg, &a.run);
    // The model fixes everything but where to read data and write results.
    cfg = RunConfig {
        datasets: cfg.datasets,
        data_dir: cfg.data_dir,
        out: cfg.out,
        embeddings: cfg.embeddings,
        ..saved
    };
    cfg.validate()?;
    let d = single(load_datasets(&cfg)?, "evaluate")?;
    let model = match cfg.pipeline.approach {
        Approach::Gbt => {
            let model = read_model(&a.run_dir.join("model.gbt"))?;
            let table = load_table(&cfg)?
                .unwrap_or_else(|| EmbeddingTable::new(cfg.pipeline.snn.embed_dim));
            let context = FeatureContext::build(
                &d.split.train,
                &all_pairs(&d),
                table,
                cfg.pipeline.use_graph,
            );
            FittedModel::Gbt {
                model,
                context,
                history: Vec::new(),
            }
        }
        Approach::Snn => {
            let (spec, params) = read_parameters(&a.run_dir.join("model.params"))?;
            let vocab = Vocab::read(&a.run_dir.join("vocab.txt"))?;
            FittedModel::Snn {
                model: Snn { spec, params },
                vocab,
                history: Vec::new(),
            }
        }
    };
    let fitted = Fitted {
        model,
        preprocess: cfg.preprocess.clone(),
        config: cfg.pipeline.clone(),
    };
    let report = evaluate_split(&fitted, &d, kind_of(cfg.pipeline.approach))?;
    let label = format!("{}-{}", d.dataset, approach_name(cfg.pipeline.approach));
    let model_dir = a
        .run_dir
        .canonicalize()
        .unwrap_or_else(|_| a.run_dir.clone());
    let hash = digest(&format!("{}|{}", cfg.hash(), model_dir.display()));
    let dir = run_dir(&cfg.out, "evaluate", &label, &hash)?;
    write_text(&dir.join(RUN_FILE), &cfg.to_json())?;
    // Kept apart from `reports.jsonl` so that re-scoring a trained cell
    // does not count as a second result for it.
    write_eval_reports(&dir.join("evaluation.jsonl"), std::slice::from_ref(&report))?;
    print_reports(&[report], &dir);
    Ok(())
}

pub fn transfer(a: &TransferArgs) -> Result<()> {
    let cfg = resolve(&a.run)?;
    let source_cfg = read_run_config(&a.source_run)?;
    if source_cfg.pipeline.approach != Approach::Snn {
        bail!(invalid(format!(
            "{} is not an SNN run",
            a.source_run.display()
        )));
    }
    let (source_spec, params) = read_parameters(&a.source_run.join("model.params"))?;
    let source = SourceModel {
        model: Snn {
            spec: source_spec.clone(),
            params,
        },
        vocab: Vocab::read(&a.source_run.join("vocab.txt"))?,
    };

    let d = single(load_datasets(&cfg)?, "transfer")?;
    let vocab = build_vocab(
        d.split
            .train
            .iter()
            .flat_map(|p| [&p.q1.tokens, &p.q2.tokens]),
        source_cfg.pipeline.snn.min_count,
    )?;
    let spec = SnnSpec {
        vocab_size: vocab.len(),
        seed: cfg.pipeline.snn.seed,
        ..source_spec
    };
    let encode = |v: &[ProcessedPair]| -> Vec<EncodedPair> {
        v.iter()
            .map(|p| EncodedPair::from_processed(&vocab, p, spec.max_len))
            .collect()
    };
    let (train, validation, test) = (
        encode(&d.split.train),
        encode(&d.split.validation),
        encode(&d.split.test),
    );
    let target = TargetData {
        dataset: d.dataset.clone(),
        spec: spec.clone(),
        vocab: vocab.clone(),
        table: load_table(&cfg)?,
        train,
        validation,
        test,
    };
    let mode = match a.sweep {
        SweepArg::Curated => SweepMode::Curated,
        SweepArg::Full => SweepMode::Full,
    };
    let configs = enumerate_configs(mode);
    let outcome = run_transfer_experiment(&source, &target, &configs, &cfg.pipeline.train)?;

    let source_names = source_cfg
        .datasets
        .iter()
        .map(|s| {
            Path::new(s)
                .file_name()
                .and_then(|f| f.to_str())
                .unwrap_or(s)
                .split('.')
                .next()
                .unwrap_or(s)
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("+");
    let hash = digest(&format!("{}|{}|{mode:?}", cfg.hash(), source_cfg.hash()));
    let dir = run_dir(
        &cfg.out,
        "transfer",
        &format!("{source_names}-to-{}", d.dataset),
        &hash,
    )?;
    write_text(&dir.join(RUN_FILE), &cfg.to_json())?;
    write_text(&dir.join("source_run.json"), &source_cfg.to_json())?;
    write_manifest(
        &dir.join("manifest.jsonl"),
        &configs,
        cfg.pipeline.train.seed,
    )?;
    write_reports(&dir.join("sweep.jsonl"), &outcome.reports)?;
    let summary = summary_table(&outcome);
    write_text(&dir.join("summary.txt"), &summary)?;

    let best = &outcome.reports[outcome.best.expect("sweeps are never empty")];
    let mut seeds = cfg.pipeline.seeds();
    seeds.retain(|k, _| k == "split");
    seeds.insert("snn_init".into(), spec.seed);
    seeds.insert("snn_train".into(), cfg.pipeline.train.seed);
    seeds.insert("source_snn_init".into(), source_cfg.pipeline.snn.seed);
    let report = EvalReport {
        kind: ModelKind::SnnTransfer,
        dataset: d.dataset.clone(),
        split_sizes: d.split.sizes(),
        auc: best.transferred_auc,
        config: ConfigEcho {
            preprocess_version: d.preprocess.clone(),
            catalog_version: None,
            seeds,
            hyperparameters: serde_json::json!({
                "best_config": best.config.to_string(),
                "sweep": mode,
                "train": cfg.pipeline.train,
                "spec": spec,
                "source": source_cfg,
            }),
        },
    };
    write_eval_reports(&dir.join(REPORTS_FILE), std::slice::from_ref(&report))?;
    print!("{summary}");
    print_reports(&[report], &dir);
    Ok(())
}

fn find_reports(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for entry in entries {
        let path = entry?.path();
        if path.is_dir() {
            find_reports(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == REPORTS_FILE) {
            found.push(path);
        }
    }
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut files = Vec::new();
    find_reports(&a.dir, &mut files)?;
    files.sort();
    let mut reports = Vec::new();
    for f in &files {
        reports.extend(read_eval_reports(f)?);
    }
    let table = results_table(&reports)?;
    let text = table.to_text();
    print!("{text}");
    if let Some(out) = &a.out {
        let all: Vec<String> = reports
            .iter()
            .map(serde_json::to_string)
            .collect::<Result<_, _>>()?;
        let dir = run_dir(
            out,
            "report",
            &format!("{}cells", table.filled()),
            &digest(&all.join("\n")),
        )?;
        write_text(&dir.join("results.txt"), &text)?;
        write_text(&dir.join("results.tsv"), &table.to_tsv())?;
        write_jsonl(&dir.join("results.jsonl"), &reports)?;
        println!("run directory: {}", dir.display());
    }
    Ok(())
}
