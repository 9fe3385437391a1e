use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use semgrad::classifier::ClassifierConfig;
use semgrad::corpus::{build_vocab, subsample, tokenize_bytes, TokenizerMode};
use semgrad::embeddings::{EmbeddingStore, Format};
use semgrad::experiment::{
    cross_lingual_contrast, mix_seed, similarity_split_report, ExperimentSpec, GradientTrace,
    HyperOverrides, PreparedExperiment, Resolution, RunOptions, UngrammaticalMode,
};
use semgrad::skipgram::{SkipgramConfig, SkipgramTrainer};

use crate::args::{
    ContrastArgs, HyperArgs, NeighborsArgs, OutputFormat, RunExperimentArgs, TrainEmbeddingsArgs,
    ValidateSpecArgs,
};
use crate::error::CliError;
use crate::manifest::{sibling, RunManifest};

const MANIFEST_SUFFIX: &str = ".manifest.json";
const DEFAULT_SKIPGRAM_SEED: u64 = 1;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn load_store(path: &Path, manifest: &mut RunManifest) -> Result<EmbeddingStore, CliError> {
    let bytes = read(path)?;
    manifest.input(path, &bytes);
    EmbeddingStore::from_bytes(&bytes).map_err(|e| CliError::in_file(path, e))
}

fn load_spec(path: &Path, manifest: &mut RunManifest) -> Result<ExperimentSpec, CliError> {
    let bytes = read(path)?;
    manifest.input(path, &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|e| CliError::Validation(format!("{}: not valid UTF-8: {e}", path.display())))?;
    ExperimentSpec::parse(&text, path.parent()).map_err(|e| CliError::in_file(path, e))
}

fn resolution(lenient: bool) -> Resolution {
    if lenient {
        Resolution::Lenient
    } else {
        Resolution::Strict
    }
}

fn run_options(h: &HyperArgs) -> RunOptions {
    RunOptions {
        resolution: resolution(h.lenient),
        overrides: HyperOverrides {
            eta: h.eta,
            gamma: h.gamma,
            hidden: h.hidden,
            epochs: h.epochs,
            seed: h.seed.seed,
            dim: h.dim,
        },
        ..RunOptions::default()
    }
}

fn resolution_name(r: Resolution) -> &'static str {
    match r {
        Resolution::Strict => "strict",
        Resolution::Lenient => "lenient",
    }
}

fn mode_name(m: UngrammaticalMode) -> &'static str {
    match m {
        UngrammaticalMode::Measured => "measured",
        UngrammaticalMode::Complement => "complement",
    }
}

fn record_classifier(manifest: &mut RunManifest, c: &ClassifierConfig) {
    manifest.set("input_dim", c.input_dim);
    manifest.set("hidden_dim", c.hidden_dim);
    manifest.set("output_dim", c.output_dim);
    manifest.set("eta", c.learning_rate);
    manifest.set("gamma", c.weight_decay);
    manifest.set("epochs", c.epochs);
    manifest.set("seed", c.seed);
}

fn convergence_text(trace: &GradientTrace) -> String {
    trace
        .convergence_epoch
        .map_or_else(|| "none".to_owned(), |e| e.to_string())
}

pub fn train_embeddings(args: &TrainEmbeddingsArgs) -> Result<(), CliError> {
    let mode: TokenizerMode = args.tokenizer.parse()?;
    let lowercase = args.lowercase.unwrap_or_else(|| mode.default_lowercase());
    let seed = args.seed.seed.unwrap_or(DEFAULT_SKIPGRAM_SEED);
    let config = SkipgramConfig {
        dim: args.dim,
        window_before: args.window_before,
        window_after: args.window_after,
        learning_rate: args.eta,
        epochs: args.epochs,
        seed,
    };
    config.validate()?;
    let format = match args.format {
        Some(OutputFormat::Binary) => Format::Binary,
        Some(OutputFormat::Text) => Format::Text,
        None if args.out.extension().is_some_and(|e| e == "bin") => Format::Binary,
        None => Format::Text,
    };

    let mut manifest = RunManifest::new("train-embeddings");
    let bytes = read(&args.corpus)?;
    manifest.input(&args.corpus, &bytes);
    let tokens =
        tokenize_bytes(&bytes, mode, lowercase).map_err(|e| CliError::in_file(&args.corpus, e))?;
    let vocab = build_vocab(&tokens, args.min_count)?;
    let ids = subsample(
        &vocab.encode(&tokens),
        &vocab,
        args.subsample_t,
        mix_seed(seed, 0),
    )?;

    let mut trainer = SkipgramTrainer::new(&ids, &vocab, config)?;
    let losses = trainer.run();
    let final_loss = losses.last().copied().unwrap_or_else(|| trainer.loss());
    let store = EmbeddingStore::from_matrix(trainer.into_matrix());

    let loss_path = sibling(&args.out, ".loss.csv");
    let mut loss_csv = String::from("epoch,mean_loss\n");
    for (i, l) in losses.iter().enumerate() {
        writeln!(loss_csv, "{},{l:.10}", i + 1).unwrap();
    }
    store
        .save(&args.out, format)
        .map_err(|e| CliError::in_file(&args.out, e))?;
    write(&loss_path, &loss_csv)?;

    manifest.set("tokenizer", mode.to_string());
    manifest.set("lowercase", lowercase);
    manifest.set("min_count", args.min_count);
    manifest.set("subsampling", args.subsample_t > 0.0);
    manifest.set("subsample_t", args.subsample_t);
    manifest.set("dim", args.dim);
    manifest.set("window_before", args.window_before);
    manifest.set("window_after", args.window_after);
    manifest.set("eta", args.eta);
    manifest.set("epochs", args.epochs);
    manifest.set("seed", seed);
    manifest.set(
        "format",
        match format {
            Format::Text => "text",
            Format::Binary => "binary",
        },
    );
    manifest.output(&args.out);
    manifest.output(&loss_path);
    manifest.write(&sibling(&args.out, MANIFEST_SUFFIX))?;

    println!("vocabulary size: {}", vocab.len());
    println!("tokens: {} ({} after subsampling)", tokens.len(), ids.len());
    println!("final mean loss: {final_loss:.6}");
    Ok(())
}

fn experiment_store_path(
    args: &RunExperimentArgs,
    spec: &ExperimentSpec,
) -> Result<PathBuf, CliError> {
    args.embeddings
        .clone()
        .or_else(|| spec.embedding_source.clone())
        .ok_or_else(|| {
            CliError::Usage("no --embeddings given and the spec names no embeddings file".into())
        })
}

pub fn run_experiment(args: &RunExperimentArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("run-experiment");
    let spec = load_spec(&args.spec, &mut manifest)?;
    let store_path = experiment_store_path(args, &spec)?;
    let store = load_store(&store_path, &mut manifest)?;
    let opts = run_options(&args.hyper);

    let prepared = PreparedExperiment::new(&spec, &store, &opts)?;
    let trace = prepared.run()?;
    write(&args.out, &trace.to_csv())?;

    manifest.set("spec_name", spec.name.clone());
    manifest.set("resolution", resolution_name(opts.resolution));
    manifest.set("ungrammatical", mode_name(spec.ungrammatical));
    record_classifier(&mut manifest, &prepared.config);
    manifest.output(&args.out);
    manifest.write(&sibling(&args.out, MANIFEST_SUFFIX))?;

    println!("convergence epoch: {}", convergence_text(&trace));
    println!("final gap: {:.6}", trace.final_gap().unwrap_or(0.0));
    let report = similarity_split_report(&spec, &store, &opts).ok();
    if let Some((Some(g), Some(u))) = report.map(|r| (r.grammatical, r.ungrammatical)) {
        println!("test-to-training similarity: grammatical {g:.6}, ungrammatical {u:.6}");
    }
    if opts.resolution == Resolution::Lenient {
        println!("dropped pairs: {}", trace.dropped_pairs);
    }
    Ok(())
}

pub fn contrast(args: &ContrastArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("contrast");
    let spec = load_spec(&args.spec, &mut manifest)?;
    let store_a = load_store(&args.embeddings, &mut manifest)?;
    let store_b = load_store(&args.embeddings_b, &mut manifest)?;
    let opts = run_options(&args.hyper);

    let c = cross_lingual_contrast(&spec, &store_a, &store_b, &opts)?;
    let path_a = sibling(&args.out, "_a.csv");
    let path_b = sibling(&args.out, "_b.csv");
    write(&path_a, &c.trace_a.to_csv())?;
    write(&path_b, &c.trace_b.to_csv())?;

    manifest.set("spec_name", spec.name.clone());
    manifest.set("resolution", resolution_name(opts.resolution));
    manifest.set("ungrammatical", mode_name(spec.ungrammatical));
    record_classifier(&mut manifest, &c.config);
    manifest.output(&path_a);
    manifest.output(&path_b);
    manifest.write(&sibling(&args.out, MANIFEST_SUFFIX))?;

    println!("convergence epoch a: {}", convergence_text(&c.trace_a));
    println!("convergence epoch b: {}", convergence_text(&c.trace_b));
    println!("gap_a: {:.6}", c.gap_a);
    println!("gap_b: {:.6}", c.gap_b);
    Ok(())
}

pub fn neighbors(args: &NeighborsArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("neighbors");
    let store = load_store(&args.embeddings, &mut manifest)?;
    let mut table = String::from("word\tneighbor\tcosine\n");
    for word in &args.words {
        for (n, s) in store.nearest_neighbors(word, args.k)? {
            writeln!(table, "{word}\t{n}\t{s:.6}").unwrap();
        }
    }
    print!("{table}");
    if let Some(out) = &args.out {
        write(out, &table)?;
        manifest.set("words", args.words.clone());
        manifest.set("k", args.k);
        manifest.output(out);
        manifest.write(&sibling(out, MANIFEST_SUFFIX))?;
    }
    Ok(())
}

pub fn validate_spec(args: &ValidateSpecArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("validate-spec");
    let spec = load_spec(&args.spec, &mut manifest)?;
    println!(
        "{}: {} novel words, {} training pairs, {} test pairs",
        spec.name,
        spec.novel_words.len(),
        spec.training_pairs.len(),
        spec.test_pairs.len()
    );
    let store_path = args
        .embeddings
        .clone()
        .or_else(|| spec.embedding_source.clone());
    if let Some(path) = store_path {
        let store = load_store(&path, &mut manifest)?;
        let opts = RunOptions {
            resolution: resolution(args.lenient),
            overrides: HyperOverrides {
                dim: args.dim,
                ..HyperOverrides::default()
            },
            ..RunOptions::default()
        };
        let prepared = PreparedExperiment::new(&spec, &store, &opts)?;
        println!(
            "all nouns resolved against {} ({} dropped)",
            path.display(),
            prepared.dropped_pairs
        );
    }
    Ok(())
}
