use dupq::corpus::{process_pairs, split_dataset};
use dupq::embeddings::{build_vocab, EncodedPair, Vocab};
use dupq::net::{
    init_parameters, score_pairs, train_snn, Aggregation, Encoder, Group, Snn, SnnSpec, TrainConfig,
};
use dupq::synth;
use dupq::transfer::{
    apply_init_config, enumerate_configs, run_transfer_experiment, summary_table, write_reports,
    InitState, SourceModel, SweepMode, TargetData, TlConfig, TlReport,
};
use dupq::Error;
use InitState::{I1, I2, I3};

/// Splits a synthetic overlap set; the vocabulary comes from the training
/// split only.
fn target_data(name: &str, n: usize, seed: u64, encoder: Encoder) -> TargetData {
    let processed = process_pairs(&synth::overlap_pairs(n, seed));
    let split = split_dataset(processed, seed).unwrap();
    let vocab = build_vocab(
        split
            .train
            .iter()
            .flat_map(|p| [&p.q1.tokens, &p.q2.tokens]),
        1,
    )
    .unwrap();
    let encode = |v: &[dupq::corpus::ProcessedPair]| -> Vec<EncodedPair> {
        v.iter()
            .map(|p| EncodedPair::from_processed(&vocab, p, 30))
            .collect()
    };
    let (train, validation, test) = (
        encode(&split.train),
        encode(&split.validation),
        encode(&split.test),
    );
    let spec = SnnSpec {
        embed_dim: 16,
        hidden_dim: 16,
        representation: vec![16],
        decision: vec![8, 1],
        ..SnnSpec::new(vocab.len(), encoder, Aggregation::ExpAbsDiff, seed)
    };
    TargetData {
        dataset: name.into(),
        spec,
        vocab,
        table: None,
        train,
        validation,
        test,
    }
}

/// Splits a synthetic paraphrase set the same way as [`target_data`].
fn paraphrase_data(name: &str, n: usize, seed: u64) -> TargetData {
    let processed = process_pairs(&synth::paraphrase_pairs(n, seed));
    let split = split_dataset(processed, seed).unwrap();
    let vocab = build_vocab(
        split
            .train
            .iter()
            .flat_map(|p| [&p.q1.tokens, &p.q2.tokens]),
        1,
    )
    .unwrap();
    let encode = |v: &[dupq::corpus::ProcessedPair]| -> Vec<EncodedPair> {
        v.iter()
            .map(|p| EncodedPair::from_processed(&vocab, p, 30))
            .collect()
    };
    let (train, validation, test) = (
        encode(&split.train),
        encode(&split.validation),
        encode(&split.test),
    );
    let spec = SnnSpec {
        embed_dim: 16,
        hidden_dim: 16,
        representation: vec![16],
        decision: vec![8, 1],
        ..SnnSpec::new(
            vocab.len(),
            Encoder::MeanPool,
            Aggregation::ExpAbsDiff,
            seed,
        )
    };
    TargetData {
        dataset: name.into(),
        spec,
        vocab,
        table: None,
        train,
        validation,
        test,
    }
}

fn train_source(data: &TargetData, config: &TrainConfig) -> SourceModel {
    let init = Snn {
        spec: data.spec.clone(),
        params: init_parameters(&data.spec, &data.vocab, None).unwrap(),
    };
    let model = train_snn(init, &data.train, &data.validation, config)
        .unwrap()
        .model;
    SourceModel {
        model,
        vocab: data.vocab.clone(),
    }
}

fn config(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        patience: None,
        seed,
        ..TrainConfig::default()
    }
}

fn row<'a>(
    store: &'a dupq::net::ParameterStore,
    vocab: &Vocab,
    token: &str,
    d: usize,
) -> &'a [f64] {
    let id = vocab.get(token).unwrap();
    &store.get("embedding").unwrap().data[id * d..(id + 1) * d]
}

#[test]
fn all_i2_copies_everything_and_freezes_nothing() {
    let data = target_data("src", 200, 1, Encoder::Lstm);
    let source = train_source(&data, &config(2, 1));
    let store = apply_init_config(
        &source,
        &data.spec,
        &data.vocab,
        None,
        &TlConfig::uniform(I2),
    )
    .unwrap();
    assert_eq!(store.arrays, source.model.params.arrays);
    assert!(Group::ALL.iter().all(|&g| !store.is_frozen(g)));

    let once = apply_init_config(
        &source,
        &data.spec,
        &data.vocab,
        None,
        &TlConfig::new(I1, I3, I3, I1),
    )
    .unwrap();
    let twice = apply_init_config(
        &source,
        &data.spec,
        &data.vocab,
        None,
        &TlConfig::new(I1, I3, I3, I1),
    )
    .unwrap();
    assert_eq!(once, twice);
    assert!(once.is_frozen(Group::E) && once.is_frozen(Group::D));
    assert!(!once.is_frozen(Group::R) && !once.is_frozen(Group::A));
    let fresh = init_parameters(&data.spec, &data.vocab, None).unwrap();
    for a in once.group_arrays(Group::R) {
        assert_eq!(Some(a), fresh.get(&a.name));
    }
}

/// Embedding rows move by token name; rows for target-only tokens keep the
/// target-only initialisation.
#[test]
fn embedding_rows_follow_tokens_across_vocabularies() {
    let source_data = target_data("src", 200, 2, Encoder::MeanPool);
    let source = train_source(&source_data, &config(2, 2));
    let words: Vec<String> = ["alpha", "zulu", "kiwi", "newword", "another"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let vocab = build_vocab([&words], 1).unwrap();
    let spec = SnnSpec {
        vocab_size: vocab.len(),
        seed: 77,
        ..source_data.spec.clone()
    };
    let store =
        apply_init_config(&source, &spec, &vocab, None, &TlConfig::new(I2, I2, I3, I3)).unwrap();
    let fresh = init_parameters(&spec, &vocab, None).unwrap();
    let d = spec.embed_dim;
    for w in ["alpha", "zulu", "kiwi"] {
        assert_eq!(
            row(&store, &vocab, w, d),
            row(&source.model.params, &source.vocab, w, d),
            "{w}"
        );
    }
    for w in ["newword", "another"] {
        assert_eq!(row(&store, &vocab, w, d), row(&fresh, &vocab, w, d), "{w}");
    }
    assert_eq!(store.get("rep.0.w"), source.model.params.get("rep.0.w"));
    assert_eq!(store.get("dec.0.w"), fresh.get("dec.0.w"));
}

#[test]
fn shape_mismatch_names_the_group() {
    let data = target_data("src", 120, 3, Encoder::MeanPool);
    let source = train_source(&data, &config(1, 3));
    let wider = SnnSpec {
        representation: vec![24],
        ..data.spec.clone()
    };
    let err = apply_init_config(
        &source,
        &wider,
        &data.vocab,
        None,
        &TlConfig::new(I3, I2, I3, I3),
    )
    .unwrap_err();
    assert!(err.to_string().contains("group R"), "{err}");
    // D reads the representation width, so it cannot be copied either.
    let err = apply_init_config(
        &source,
        &wider,
        &data.vocab,
        None,
        &TlConfig::new(I3, I3, I3, I2),
    )
    .unwrap_err();
    assert!(err.to_string().contains("group D"), "{err}");
    // Only R and D are fresh here, so the wider spec is fine.
    apply_init_config(
        &source,
        &wider,
        &data.vocab,
        None,
        &TlConfig::new(I2, I3, I2, I3),
    )
    .unwrap();

    let lstm = SnnSpec {
        encoder: Encoder::Lstm,
        ..data.spec.clone()
    };
    let err =
        apply_init_config(&source, &lstm, &data.vocab, None, &TlConfig::uniform(I2)).unwrap_err();
    assert!(
        matches!(err, Error::InvalidArgument(ref m) if m.contains("group R")),
        "{err}"
    );
}

#[test]
fn frozen_embedding_survives_fine_tuning() {
    let source_data = target_data("src", 300, 4, Encoder::Lstm);
    let source = train_source(&source_data, &config(3, 4));
    let target = target_data("tgt", 200, 5, Encoder::Lstm);
    let cfg = TlConfig::new(I1, I2, I3, I3);
    let params = apply_init_config(&source, &target.spec, &target.vocab, None, &cfg).unwrap();
    let init = Snn {
        spec: target.spec.clone(),
        params: params.clone(),
    };
    let tuned = train_snn(init, &target.train, &target.validation, &config(5, 6)).unwrap();
    assert_eq!(tuned.history.len(), 5);
    let after = &tuned.model.params;
    assert_eq!(after.get("embedding"), params.get("embedding"));
    let d = target.spec.embed_dim;
    for token in target.vocab.tokens().iter().skip(2) {
        if source.vocab.get(token).is_some() {
            assert_eq!(
                row(after, &target.vocab, token, d),
                row(&source.model.params, &source.vocab, token, d)
            );
        }
    }
    for a in after.group_arrays(Group::R) {
        assert_ne!(Some(a), source.model.params.get(&a.name), "{}", a.name);
    }
}

#[test]
fn identity_transfer_and_all_i3_baseline() {
    let data = target_data("src", 200, 6, Encoder::MeanPool);
    let source = train_source(&data, &config(3, 6));
    let labels: Vec<u8> = data.test.iter().map(|p| p.label).collect();
    let source_auc = dupq::eval::auc(&score_pairs(&source.model, &data.test), &labels).unwrap();

    let configs = [TlConfig::uniform(I2), TlConfig::uniform(I3)];
    let out = run_transfer_experiment(&source, &data, &configs, &config(0, 6)).unwrap();
    assert_eq!(out.reports.len(), 2);
    assert_eq!(out.reports[0].transferred_auc, source_auc);

    let out = run_transfer_experiment(&source, &data, &configs, &config(4, 9)).unwrap();
    let all_i3 = &out.reports[1];
    assert_eq!(all_i3.transferred_auc, out.baseline_auc);
    assert_eq!(all_i3.history, out.baseline_history);
    assert!(out
        .reports
        .iter()
        .all(|r| (0.0..=1.0).contains(&r.transferred_auc)));
}

/// Source and target come from the same paraphrase recipe, so the source
/// has already learned synonym pairs the small target set can only partly
/// show.
#[test]
fn transfer_from_a_related_source_helps() {
    let source_data = paraphrase_data("src", 1500, 20);
    let source = train_source(
        &source_data,
        &TrainConfig {
            patience: Some(5),
            ..config(60, 20)
        },
    );
    let target = paraphrase_data("tgt", 200, 21);
    let configs = enumerate_configs(SweepMode::Curated);
    let train = TrainConfig {
        patience: Some(5),
        ..config(40, 23)
    };
    let out = run_transfer_experiment(&source, &target, &configs, &train).unwrap();
    assert_eq!(out.reports.len(), configs.len());
    for (r, c) in out.reports.iter().zip(&configs) {
        assert_eq!(&r.config, c);
        assert_eq!(r.dataset, "tgt");
    }
    let best = &out.reports[out.best.unwrap()];
    assert!(out
        .reports
        .iter()
        .all(|r| r.transferred_auc <= best.transferred_auc));
    assert!(
        best.transferred_auc >= out.baseline_auc,
        "{}",
        summary_table(&out)
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reports.jsonl");
    write_reports(&path, &out.reports).unwrap();
    let back: Vec<TlReport> = std::fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(back, out.reports);
    assert_eq!(summary_table(&out).lines().count(), configs.len() + 1);
}
