//! Command-line surface for the hanenc library.
//!
//! Resolved configuration goes to stderr, results to stdout; every failure
//! exits nonzero with a single-line diagnostic.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hanenc_core::datasets::{split_validation, SplitSpec};
use hanenc_core::encodings::{CharVocabulary, Encoder, EncodingScheme};
use hanenc_core::featurizer::featurize;
use hanenc_core::hangul::{
    cho_char, classify_codepoint, decompose, jong_char, jung_char, standalone_slot,
    CodepointClass, SlotKind,
};
use hanenc_core::nn::{
    grad_check, tiny_config, Architecture, Checkpoint, ModelConfig,
};
use hanenc_core::trainer::{
    build_encoder, evaluate, run_matrix, train, write_results_table, MatrixConfig, Task,
    TrainConfig,
};

#[derive(Parser)]
#[command(
    name = "hanenc",
    version,
    about = "Korean (sub-)character feature encodings and recurrent text classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Subcommand)]
enum Command {
    /// Classify each symbol of a text and list syllable decompositions
    Decompose { text: String },
    /// Dump the feature matrix of a text, one row per line
    Encode {
        text: String,
        #[arg(long)]
        scheme: EncodingScheme,
        /// Sequence length L
        #[arg(long)]
        len: usize,
        /// Dense vector file (char-dense scheme)
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Vocabulary file (char-onehot scheme)
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a syllable vocabulary from a text corpus
    Vocab {
        /// Corpus file, plain UTF-8 text
        #[arg(long = "train-file")]
        train_file: PathBuf,
        /// Output file, one syllable per line (line number = index)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the trainable-parameter count of a configuration
    Params {
        #[arg(long)]
        scheme: EncodingScheme,
        #[arg(long)]
        arch: Architecture,
        #[arg(long)]
        task: Task,
        /// Override the input width (defaults to the published dimension)
        #[arg(long)]
        dim: Option<usize>,
        /// Override the sequence length (defaults to the task's length)
        #[arg(long)]
        len: Option<usize>,
        /// Derive the one-hot width from a vocabulary file
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Derive the dense width from a vector file
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Verify analytic gradients against central finite differences
    Gradcheck {
        /// bilstm, bilstm-sa or both
        #[arg(long, default_value = "both")]
        arch: String,
        #[arg(long, default_value_t = 17)]
        seed: u64,
    },
    /// Train one configuration and evaluate it on the test file
    Train {
        #[arg(long)]
        task: Task,
        #[arg(long)]
        scheme: EncodingScheme,
        #[arg(long)]
        arch: Architecture,
        #[arg(long = "train-file")]
        train_file: PathBuf,
        #[arg(long = "test-file")]
        test_file: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Sequence length override
        #[arg(long)]
        len: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix for checkpoint, history and report files
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a saved checkpoint on a test file
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "test-file")]
        test_file: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Run the full scheme x architecture grid from a TOML config
    Matrix {
        #[arg(long)]
        config: PathBuf,
        /// Results table file (tab-separated); stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Decompose { text } => cmd_decompose(&text),
        Command::Encode { text, scheme, len, vectors, vocab, out } => {
            cmd_encode(&text, scheme, len, vectors.as_deref(), vocab.as_deref(), out.as_deref())
        }
        Command::Vocab { train_file, out } => cmd_vocab(&train_file, out.as_deref()),
        Command::Params { scheme, arch, task, dim, len, vocab, vectors } => {
            cmd_params(scheme, arch, task, dim, len, vocab.as_deref(), vectors.as_deref())
        }
        Command::Gradcheck { arch, seed } => cmd_gradcheck(&arch, seed),
        Command::Train {
            task,
            scheme,
            arch,
            train_file,
            test_file,
            vectors,
            vocab,
            len,
            batch,
            epochs,
            patience,
            seed,
            out,
        } => cmd_train(CmdTrain {
            task,
            scheme,
            arch,
            train_file,
            test_file,
            vectors,
            vocab,
            len,
            batch,
            epochs,
            patience,
            seed,
            out,
        }),
        Command::Eval { checkpoint, test_file, vectors, vocab } => {
            cmd_eval(&checkpoint, &test_file, vectors.as_deref(), vocab.as_deref())
        }
        Command::Matrix { config, out } => cmd_matrix(&config, out.as_deref()),
    }
}

fn cmd_decompose(text: &str) -> Result<()> {
    eprintln!("config: command=decompose symbols={}", text.chars().count());
    for c in text.chars() {
        match classify_codepoint(c) {
            CodepointClass::PrecomposedSyllable => {
                let t = decompose(c).expect("classified as syllable");
                let jong = jong_char(t.jong).map(String::from).unwrap_or_else(|| "-".into());
                println!(
                    "{c}: PrecomposedSyllable cho={} jung={} jong={jong}",
                    cho_char(t.cho),
                    jung_char(t.jung)
                );
            }
            CodepointClass::StandaloneJamo(i) => {
                let slot = standalone_slot(i);
                let kind = match slot.kind {
                    SlotKind::First => "first",
                    SlotKind::Second => "second",
                    SlotKind::Third => "third",
                };
                println!("{c}: StandaloneJamo index={i} slot={kind}({})", slot.index);
            }
            CodepointClass::Space => println!("<space>: Space"),
            CodepointClass::Other => println!("{c}: Other (ignored by featurizer)"),
        }
    }
    Ok(())
}

fn make_encoder(
    scheme: EncodingScheme,
    vocab: Option<&Path>,
    vectors: Option<&Path>,
) -> Result<Encoder> {
    Ok(build_encoder(scheme, vocab, vectors, &[])?)
}

fn cmd_encode(
    text: &str,
    scheme: EncodingScheme,
    len: usize,
    vectors: Option<&Path>,
    vocab: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    if len == 0 {
        bail!("--len must be positive");
    }
    let encoder = make_encoder(scheme, vocab, vectors)?;
    eprintln!("config: command=encode scheme={scheme} len={len} dim={}", encoder.dim());
    let matrix = featurize(&encoder, text, len);
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| path.display().to_string())?);
            matrix.write_text(&mut w)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            matrix.write_text(&mut w)?;
        }
    }
    Ok(())
}

fn cmd_vocab(train_file: &Path, out: Option<&Path>) -> Result<()> {
    eprintln!("config: command=vocab train_file={}", train_file.display());
    let content = std::fs::read_to_string(train_file)
        .with_context(|| train_file.display().to_string())?;
    let vocab = CharVocabulary::from_corpus(content.lines());
    println!("vocabulary size={}", vocab.len());
    if let Some(path) = out {
        vocab.save(path).with_context(|| path.display().to_string())?;
    }
    Ok(())
}

fn cmd_params(
    scheme: EncodingScheme,
    arch: Architecture,
    task: Task,
    dim: Option<usize>,
    len: Option<usize>,
    vocab: Option<&Path>,
    vectors: Option<&Path>,
) -> Result<()> {
    // published widths when no resource pins them
    let input_dim = match (dim, scheme) {
        (Some(d), _) => d,
        (None, EncodingScheme::Jamo67 | EncodingScheme::CharMultiHot) => 67,
        (None, EncodingScheme::Jamo118) => 118,
        (None, EncodingScheme::CharOneHot) => match vocab {
            Some(path) => CharVocabulary::load(path)?.len(),
            None => 2534,
        },
        (None, EncodingScheme::CharDense) => match vectors {
            Some(path) => hanenc_core::encodings::DenseVectorTable::load(path)?.width(),
            None => 100,
        },
    };
    let seq_len = len.unwrap_or_else(|| task.default_seq_len(scheme));
    let model = match arch {
        Architecture::BiLstm => ModelConfig::bilstm(input_dim, seq_len, task.classes()),
        Architecture::BiLstmSa => ModelConfig::bilstm_sa(input_dim, seq_len, task.classes()),
    };
    eprintln!(
        "config: command=params task={task} scheme={scheme} arch={arch} dim={input_dim} len={seq_len} classes={}",
        task.classes()
    );
    println!("{}", model.param_count());
    Ok(())
}

fn cmd_gradcheck(arch: &str, seed: u64) -> Result<()> {
    let archs: Vec<Architecture> = match arch {
        "both" => vec![Architecture::BiLstm, Architecture::BiLstmSa],
        other => vec![other.parse().map_err(anyhow::Error::msg)?],
    };
    eprintln!("config: command=gradcheck seed={seed} tolerance={GRADCHECK_TOLERANCE}");
    let mut all_ok = true;
    for a in archs {
        let cfg = tiny_config(a);
        let report = grad_check(&cfg, seed);
        let ok = report.max_rel_err < GRADCHECK_TOLERANCE;
        all_ok &= ok;
        println!(
            "{a}: max_rel_err={:.3e} ({} parameters) {}",
            report.max_rel_err,
            report.checked,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if !all_ok {
        bail!("gradient check exceeded tolerance {GRADCHECK_TOLERANCE}");
    }
    Ok(())
}

struct CmdTrain {
    task: Task,
    scheme: EncodingScheme,
    arch: Architecture,
    train_file: PathBuf,
    test_file: PathBuf,
    vectors: Option<PathBuf>,
    vocab: Option<PathBuf>,
    len: Option<usize>,
    batch: Option<usize>,
    epochs: Option<usize>,
    patience: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
}

fn cmd_train(args: CmdTrain) -> Result<()> {
    let (train_full, test) = args.task.load(&args.train_file, &args.test_file)?;
    let (train_set, val_set) = split_validation(train_full, SplitSpec::new(args.seed));

    let mut cfg = TrainConfig::new(args.task, args.scheme, args.arch);
    cfg.seed = args.seed;
    cfg.verbose = true;
    if let Some(l) = args.len {
        cfg.max_len = l;
    }
    if let Some(b) = args.batch {
        cfg.batch_size = b;
    }
    if let Some(e) = args.epochs {
        cfg.max_epochs = e;
    }
    if let Some(p) = args.patience {
        cfg.patience = p;
    }

    let encoder =
        build_encoder(args.scheme, args.vocab.as_deref(), args.vectors.as_deref(), &train_set)?;
    let model = cfg.model_config(encoder.dim());
    eprintln!(
        "config: command=train task={} scheme={} arch={} dim={} len={} batch={} lr={} epochs={} patience={} seed={} class_weights={} train={} val={} test={} params={}",
        cfg.task,
        cfg.scheme,
        cfg.arch,
        encoder.dim(),
        cfg.max_len,
        cfg.batch_size,
        cfg.lr,
        cfg.max_epochs,
        cfg.patience,
        cfg.seed,
        cfg.use_class_weights,
        train_set.len(),
        val_set.len(),
        test.len(),
        model.param_count()
    );

    let outcome = train(&cfg, &model, &encoder, &train_set, &val_set)?;
    println!(
        "best epoch {} with validation accuracy {:.4}",
        outcome.best_epoch, outcome.best_val_accuracy
    );
    let report = evaluate(&model, &outcome.params, &encoder, &test);
    println!("test: {report}");

    if let Some(prefix) = &args.out {
        let prefix = prefix.as_os_str().to_string_lossy();
        let ckpt_path = PathBuf::from(format!("{prefix}.checkpoint.json"));
        let mut ckpt = Checkpoint::new(model, &outcome.params, cfg.seed);
        ckpt.task = Some(cfg.task.name().into());
        ckpt.scheme = Some(cfg.scheme.name().into());
        ckpt.max_len = Some(cfg.max_len);
        ckpt.save(&ckpt_path)?;

        let history_path = PathBuf::from(format!("{prefix}.history.jsonl"));
        let mut w = BufWriter::new(
            File::create(&history_path).with_context(|| history_path.display().to_string())?,
        );
        for rec in &outcome.history {
            serde_json::to_writer(&mut w, rec)?;
            writeln!(w)?;
        }
        println!("wrote {ckpt_path:?} and {history_path:?}");
    }
    Ok(())
}

fn cmd_eval(
    checkpoint: &Path,
    test_file: &Path,
    vectors: Option<&Path>,
    vocab: Option<&Path>,
) -> Result<()> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let task: Task = ckpt
        .task
        .as_deref()
        .context("checkpoint records no task; re-save it with the train command")?
        .parse()
        .map_err(anyhow::Error::msg)?;
    let scheme: EncodingScheme = ckpt
        .scheme
        .as_deref()
        .context("checkpoint records no scheme")?
        .parse()?;
    let encoder = make_encoder(scheme, vocab, vectors)?;
    if encoder.dim() != ckpt.config.input_dim {
        bail!(
            "encoder width {} does not match the checkpoint's input dimension {}",
            encoder.dim(),
            ckpt.config.input_dim
        );
    }
    eprintln!(
        "config: command=eval task={task} scheme={scheme} arch={} len={}",
        ckpt.config.arch, ckpt.config.seq_len
    );
    let test = match task {
        Task::Nsmc => hanenc_core::datasets::load_nsmc_file(test_file)?,
        Task::ThreeI4k => hanenc_core::datasets::load_3i4k_file(test_file)?,
    };
    let params = ckpt.params()?;
    let report = evaluate(&ckpt.config, &params, &encoder, &test);
    println!("{report}");
    Ok(())
}

fn cmd_matrix(config: &Path, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| config.display().to_string())?;
    let mut cfg: MatrixConfig = toml::from_str(&text).context("invalid matrix config")?;
    cfg.verbose = true;
    eprintln!(
        "config: command=matrix tasks={} schemes={:?} archs={:?} epochs={} seed={}",
        cfg.tasks.len(),
        cfg.schemes.iter().map(|s| s.name()).collect::<Vec<_>>(),
        cfg.archs.iter().map(|a| a.name()).collect::<Vec<_>>(),
        cfg.epochs,
        cfg.seed
    );
    let cells = run_matrix(&cfg)?;
    match out {
        Some(path) => {
            let mut w =
                BufWriter::new(File::create(path).with_context(|| path.display().to_string())?);
            write_results_table(&mut w, &cells)?;
            println!("wrote results for {} cells to {}", cells.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_results_table(&mut w, &cells)?;
        }
    }
    Ok(())
}
