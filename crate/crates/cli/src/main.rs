//! `forge` — one binary wiring the corpus toolkit into subcommands.
//!
//! Exit codes: 0 success, 1 validation error (including `--strict`
//! transliteration failures and usage errors), 2 I/O error. Diagnostics
//! go to stderr; data goes to stdout or the path named by `--out`.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use serde_json::json;

use forge_core::align::{
    align_documents_with_vectors, mine_local, AlignmentResult, DocumentPair,
};
use forge_core::corpus::{composition_report, dataset_to_tsv, load_from_manifest, mix_til, MixSpec};
use forge_core::embeddings::{embed_sentences, read_vectors, write_vectors, EmbedderSpec};
use forge_core::metrics::{score_files_opt, ChrfConfig, ScoreOptions, Smoothing, WhichMetric};
use forge_core::translit::{transliterate, TranslitTable};
use forge_core::vocab::{expand_embeddings, ExpansionPlan, Vocabulary};

#[derive(Parser)]
#[command(name = "forge", version, about = "Corpus mining, transliteration and MT evaluation toolkit")]
struct Cli {
    /// Emit machine-readable JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    /// Override the default seed everywhere one is not given explicitly
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert text between orthographies with a rule table
    Translit {
        /// Rule table file
        #[arg(long)]
        table: PathBuf,
        /// Input file, or - for stdin
        #[arg(long = "in", default_value = "-")]
        input: String,
        /// Output file, or - for stdout
        #[arg(long, default_value = "-")]
        out: String,
        /// Exit nonzero when any character is unmapped
        #[arg(long)]
        strict: bool,
    },
    /// Embed sentences (one per line) into a binary vector file
    Embed {
        /// Sentence file, one sentence per line
        #[arg(long = "in")]
        input: PathBuf,
        /// Embedder spec: hashed:MIN,MAX,DIM[,SEED] or file:PATH
        #[arg(long, default_value = "hashed:2,4,256")]
        spec: String,
        /// Output vector file
        #[arg(long)]
        out: PathBuf,
    },
    /// Align two sentence-per-line documents, or a manifest of document pairs
    Align {
        #[arg(long, requires = "tgt", conflicts_with = "manifest")]
        src: Option<PathBuf>,
        #[arg(long, requires = "src")]
        tgt: Option<PathBuf>,
        /// JSON-lines batch manifest with src_path, tgt_path, doc_id
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Embedder spec for both sides
        #[arg(long, default_value = "hashed:2,4,256")]
        spec: String,
        /// Precomputed vectors for --src (overrides --spec for that side)
        #[arg(long, requires = "src")]
        src_vec: Option<PathBuf>,
        /// Precomputed vectors for --tgt
        #[arg(long, requires = "tgt")]
        tgt_vec: Option<PathBuf>,
        /// Drop pairs scoring below this value
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Output TSV, or - for stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Score a hypothesis file against reference files
    Score {
        #[arg(long)]
        hyp: PathBuf,
        /// Reference file (repeatable)
        #[arg(long = "ref", required = true)]
        refs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::Both)]
        metric: MetricArg,
        /// chrF++ word n-gram order
        #[arg(long, default_value_t = 2)]
        word_order: usize,
        /// BLEU zero-count smoothing
        #[arg(long, value_enum, default_value_t = SmoothArg::None)]
        smooth: SmoothArg,
    },
    /// Initialize embeddings for new vocabulary tokens by subtoken averaging
    ExpandVocab {
        /// Original vocabulary, one token per line
        #[arg(long)]
        vocab: PathBuf,
        /// Embedding matrix for the original vocabulary
        #[arg(long)]
        emb: PathBuf,
        /// Plan file: newtoken<TAB>sub1 sub2 ...
        #[arg(long)]
        plan: PathBuf,
        /// Output vector file
        #[arg(long)]
        out: PathBuf,
    },
    /// Parallel corpus utilities
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Domain composition of the datasets in a manifest
    Stats {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Stratified sample across datasets with an upper cap
    Mix {
        #[arg(long)]
        manifest: PathBuf,
        /// Sample rate for datasets involving Uzbek or Kazakh
        #[arg(long, default_value_t = 0.20)]
        rate_uzkaz: f64,
        /// Sample rate for all other datasets
        #[arg(long, default_value_t = 0.05)]
        rate_other: f64,
        /// Upper limit on mixed pairs
        #[arg(long, default_value_t = 300_000)]
        cap: usize,
        /// Sampling seed (falls back to the global --seed, then 42)
        #[arg(long)]
        seed: Option<u64>,
        /// Output TSV, or - for stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Bleu,
    Chrfpp,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothArg {
    None,
    Exp,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too and must stay exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("forge: {e:#}");
            let io = e
                .downcast_ref::<forge_core::Error>()
                .is_some_and(forge_core::Error::is_io)
                || e.downcast_ref::<std::io::Error>().is_some();
            ExitCode::from(if io { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Translit {
            table,
            input,
            out,
            strict,
        } => cmd_translit(cli, table, input, out, *strict),
        Command::Embed { input, spec, out } => cmd_embed(cli, input, spec, out),
        Command::Align {
            src,
            tgt,
            manifest,
            spec,
            src_vec,
            tgt_vec,
            threshold,
            out,
        } => cmd_align(
            cli,
            src.as_deref(),
            tgt.as_deref(),
            manifest.as_deref(),
            spec,
            src_vec.as_deref(),
            tgt_vec.as_deref(),
            *threshold,
            out,
        ),
        Command::Score {
            hyp,
            refs,
            metric,
            word_order,
            smooth,
        } => cmd_score(cli, hyp, refs, *metric, *word_order, *smooth),
        Command::ExpandVocab {
            vocab,
            emb,
            plan,
            out,
        } => cmd_expand_vocab(cli, vocab, emb, plan, out),
        Command::Corpus { command } => match command {
            CorpusCommand::Stats { manifest } => cmd_corpus_stats(cli, manifest),
            CorpusCommand::Mix {
                manifest,
                rate_uzkaz,
                rate_other,
                cap,
                seed,
                out,
            } => cmd_corpus_mix(cli, manifest, *rate_uzkaz, *rate_other, *cap, *seed, out),
        },
    }
}

fn parse_spec(cli: &Cli, spec: &str) -> anyhow::Result<EmbedderSpec> {
    Ok(match cli.seed {
        Some(seed) => EmbedderSpec::parse_with_seed(spec, seed)?,
        None => EmbedderSpec::parse(spec)?,
    })
}

fn read_input(input: &str) -> anyhow::Result<String> {
    if input == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(input)
            .map_err(|e| forge_core::Error::io(input, e))?)
    }
}

fn write_output(out: &str, data: &str) -> anyhow::Result<()> {
    if out == "-" {
        print!("{data}");
        Ok(())
    } else {
        std::fs::write(out, data).map_err(|e| forge_core::Error::io(out, e))?;
        Ok(())
    }
}

fn read_sentence_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| forge_core::Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim_end().to_string()).collect())
}

fn cmd_translit(
    cli: &Cli,
    table_path: &Path,
    input: &str,
    out: &str,
    strict: bool,
) -> anyhow::Result<ExitCode> {
    let table = TranslitTable::load(table_path)?;
    log::info!(
        "loaded {} -> {} table with {} rules",
        table.source,
        table.target,
        table.rule_count()
    );
    let text = read_input(input)?;

    let mut converted = String::with_capacity(text.len());
    let mut unmapped = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let report = transliterate(line, &table);
        for (col, c) in &report.unmapped {
            unmapped.push((lineno + 1, col + 1, *c));
        }
        converted.push_str(&report.converted);
        converted.push('\n');
    }

    if cli.json {
        let doc = json!({
            "source": table.source.as_str(),
            "target": table.target.as_str(),
            "converted": converted,
            "unmapped": unmapped
                .iter()
                .map(|(line, col, c)| json!({"line": line, "col": col, "char": c.to_string()}))
                .collect::<Vec<_>>(),
        });
        write_output(out, &format!("{doc:#}\n"))?;
    } else {
        write_output(out, &converted)?;
        for (line, col, c) in &unmapped {
            eprintln!("forge: unmapped {c:?} at {line}:{col}");
        }
    }

    if strict && !unmapped.is_empty() {
        eprintln!("forge: {} unmapped character(s) in strict mode", unmapped.len());
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_embed(cli: &Cli, input: &Path, spec: &str, out: &Path) -> anyhow::Result<ExitCode> {
    let spec = parse_spec(cli, spec)?;
    let sentences = read_sentence_lines(input)?;
    let matrix = embed_sentences(&sentences, &spec)?;
    write_vectors(out, &matrix)?;
    let summary = json!({"count": matrix.len(), "dim": matrix.dim(), "out": out});
    if cli.json {
        println!("{summary:#}");
    } else {
        log::info!("wrote {} x {} vectors to {}", matrix.len(), matrix.dim(), out.display());
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_align(
    cli: &Cli,
    src: Option<&Path>,
    tgt: Option<&Path>,
    manifest: Option<&Path>,
    spec: &str,
    src_vec: Option<&Path>,
    tgt_vec: Option<&Path>,
    threshold: f64,
    out: &str,
) -> anyhow::Result<ExitCode> {
    let spec = parse_spec(cli, spec)?;
    match (src, tgt, manifest) {
        (Some(src), Some(tgt), None) => {
            let src_lines = read_sentence_lines(src)?;
            let tgt_lines = read_sentence_lines(tgt)?;
            let doc_id = src
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "doc".into());

            let embed_side = |lines: &[String], vec_file: Option<&Path>| match vec_file {
                Some(path) => {
                    let spec = EmbedderSpec::File { path: path.into() };
                    embed_sentences(lines, &spec)
                }
                None => embed_sentences(lines, &spec),
            };
            let v_src = embed_side(&src_lines, src_vec)?;
            let v_tgt = embed_side(&tgt_lines, tgt_vec)?;
            let result =
                align_documents_with_vectors(&src_lines, &tgt_lines, &v_src, &v_tgt, threshold)?;

            if cli.json {
                let doc = alignment_json(&doc_id, &result, &src_lines, &tgt_lines);
                write_output(out, &format!("{doc:#}\n"))?;
            } else {
                let mut tsv = String::new();
                for p in &result.pairs {
                    tsv.push_str(&format!(
                        "{doc_id}\t{}\t{}\t{:.6}\t{}\t{}\n",
                        p.src_index,
                        p.tgt_index,
                        p.score,
                        src_lines[p.src_index],
                        tgt_lines[p.tgt_index]
                    ));
                }
                write_output(out, &tsv)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        (None, None, Some(manifest)) => {
            let docs = read_align_manifest(manifest)?;
            let report = mine_local(&docs, &spec, threshold);
            for e in &report.errors {
                eprintln!("forge: document {}: {}", e.doc_id, e.error);
            }
            let texts: std::collections::HashMap<&str, &DocumentPair> =
                docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
            if cli.json {
                let doc = json!({
                    "pairs": report.pairs.iter().map(|p| {
                        let d = texts[p.doc_id.as_str()];
                        json!({
                            "doc_id": p.doc_id,
                            "src_index": p.src_index,
                            "tgt_index": p.tgt_index,
                            "score": p.score,
                            "src_text": d.src[p.src_index],
                            "tgt_text": d.tgt[p.tgt_index],
                        })
                    }).collect::<Vec<_>>(),
                    "errors": report.errors.iter().map(|e| {
                        json!({"doc_id": e.doc_id, "message": e.error.to_string()})
                    }).collect::<Vec<_>>(),
                });
                write_output(out, &format!("{doc:#}\n"))?;
            } else {
                let mut tsv = String::new();
                for p in &report.pairs {
                    let d = texts[p.doc_id.as_str()];
                    tsv.push_str(&format!(
                        "{}\t{}\t{}\t{:.6}\t{}\t{}\n",
                        p.doc_id,
                        p.src_index,
                        p.tgt_index,
                        p.score,
                        d.src[p.src_index],
                        d.tgt[p.tgt_index]
                    ));
                }
                write_output(out, &tsv)?;
            }
            Ok(ExitCode::from(u8::from(!report.errors.is_empty())))
        }
        _ => anyhow::bail!("pass either --src/--tgt or --manifest"),
    }
}

fn alignment_json(
    doc_id: &str,
    result: &AlignmentResult,
    src_lines: &[String],
    tgt_lines: &[String],
) -> serde_json::Value {
    json!({
        "doc_id": doc_id,
        "threshold": result.threshold,
        "total_score": result.total_score,
        "pairs": result.pairs.iter().map(|p| json!({
            "src_index": p.src_index,
            "tgt_index": p.tgt_index,
            "score": p.score,
            "src_text": src_lines[p.src_index],
            "tgt_text": tgt_lines[p.tgt_index],
        })).collect::<Vec<_>>(),
        "unaligned_src": result.unaligned_src,
        "unaligned_tgt": result.unaligned_tgt,
    })
}

fn read_align_manifest(path: &Path) -> anyhow::Result<Vec<DocumentPair>> {
    #[derive(serde::Deserialize)]
    struct Entry {
        src_path: PathBuf,
        tgt_path: PathBuf,
        doc_id: String,
    }
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
    let text = std::fs::read_to_string(path).map_err(|e| forge_core::Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = serde_json::from_str(line).map_err(|e| forge_core::Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(DocumentPair {
            doc_id: entry.doc_id,
            src: read_sentence_lines(&resolve(entry.src_path))?,
            tgt: read_sentence_lines(&resolve(entry.tgt_path))?,
        });
    }
    Ok(docs)
}

fn cmd_score(
    cli: &Cli,
    hyp: &Path,
    refs: &[PathBuf],
    metric: MetricArg,
    word_order: usize,
    smooth: SmoothArg,
) -> anyhow::Result<ExitCode> {
    let which = match metric {
        MetricArg::Bleu => WhichMetric::Bleu,
        MetricArg::Chrfpp => WhichMetric::Chrfpp,
        MetricArg::Both => WhichMetric::Both,
    };
    let options = ScoreOptions {
        smoothing: match smooth {
            SmoothArg::None => Smoothing::None,
            SmoothArg::Exp => Smoothing::Exponential,
        },
        chrf: ChrfConfig {
            word_order,
            ..ChrfConfig::default()
        },
    };
    let report = score_files_opt(hyp, refs, which, &options)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_expand_vocab(
    cli: &Cli,
    vocab: &Path,
    emb: &Path,
    plan: &Path,
    out: &Path,
) -> anyhow::Result<ExitCode> {
    let vocabulary = Vocabulary::load(vocab)?;
    let matrix = read_vectors(emb)?;
    let plan = ExpansionPlan::load(plan, &vocabulary)?;
    let expanded = expand_embeddings(&vocabulary, &matrix, &plan)?;
    write_vectors(out, &expanded)?;
    let summary = json!({
        "orig_rows": matrix.len(),
        "new_rows": plan.len(),
        "total_rows": expanded.len(),
        "dim": expanded.dim(),
        "out": out,
    });
    if cli.json {
        println!("{summary:#}");
    } else {
        log::info!(
            "expanded {} rows by {} to {}",
            matrix.len(),
            plan.len(),
            expanded.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus_stats(cli: &Cli, manifest: &Path) -> anyhow::Result<ExitCode> {
    let datasets = load_from_manifest(manifest)?;
    let report = composition_report(&datasets)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus_mix(
    cli: &Cli,
    manifest: &Path,
    rate_uzkaz: f64,
    rate_other: f64,
    cap: usize,
    seed: Option<u64>,
    out: &str,
) -> anyhow::Result<ExitCode> {
    let datasets = load_from_manifest(manifest)?;
    let seed = seed.or(cli.seed).unwrap_or(42);
    let spec = MixSpec {
        rate_uzb_kaz: rate_uzkaz,
        rate_other,
        cap,
        seed,
    };
    let mixed = mix_til(&datasets, &spec)?;
    write_output(out, &dataset_to_tsv(&mixed))?;
    let summary = json!({
        "datasets": datasets.len(),
        "pairs": mixed.len(),
        "cap": cap,
        "seed": seed,
    });
    if cli.json {
        println!("{summary:#}");
    } else {
        log::info!("mixed {} pairs from {} datasets", mixed.len(), datasets.len());
    }
    Ok(ExitCode::SUCCESS)
}
