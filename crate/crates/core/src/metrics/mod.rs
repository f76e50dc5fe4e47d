//! Corpus-level MT evaluation: BLEU under the sacreBLEU convention and
//! chrF++.
//!
//! Both scorers aggregate integer match counts corpus-wide and compute
//! the final score from the sums — never by averaging per-segment
//! scores — so segment order and parallel reduction cannot change the
//! result. Reports carry a metric signature so printed scores stay
//! comparable across runs.

mod bleu;
mod chrf;
mod tokenize;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use bleu::{bleu_corpus, bleu_corpus_opt, BleuReport, Smoothing};
pub use chrf::{chrfpp_corpus, chrfpp_corpus_opt, ChrfConfig, ChrfReport};
pub use tokenize::tokenize_13a;

use crate::error::{Error, Result};

/// One hypothesis with its reference translations (at least one).
#[derive(Debug, Clone)]
pub struct SegmentPair {
    pub hypothesis: String,
    pub references: Vec<String>,
}

impl SegmentPair {
    pub fn new(hypothesis: impl Into<String>, references: Vec<String>) -> SegmentPair {
        SegmentPair {
            hypothesis: hypothesis.into(),
            references,
        }
    }
}

pub(crate) fn validate_corpus(pairs: &[SegmentPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("empty corpus".into()));
    }
    for (i, p) in pairs.iter().enumerate() {
        if p.references.is_empty() {
            return Err(Error::EmptyInput(format!("segment {i} has no references")));
        }
    }
    Ok(())
}

/// Which metric(s) to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichMetric {
    Bleu,
    Chrfpp,
    Both,
}

/// Options threaded through [`score_files`].
#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    pub smoothing: Smoothing,
    pub chrf: ChrfConfig,
}

/// Combined report; absent metric was not requested.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu: Option<BleuReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chrfpp: Option<ChrfReport>,
    pub nrefs: usize,
}

impl MetricReport {
    /// One-line `BLEU = .. | chrF++ = ..` summary, two decimals.
    pub fn summary_line(&self) -> String {
        let mut parts = Vec::new();
        if let Some(b) = &self.bleu {
            parts.push(format!("BLEU = {:.2}", b.score));
        }
        if let Some(c) = &self.chrfpp {
            parts.push(format!("chrF++ = {:.2}", c.score));
        }
        parts.join(" | ")
    }

    /// Summary line followed by one signature line per metric.
    pub fn to_text(&self) -> String {
        let mut out = self.summary_line();
        out.push('\n');
        if let Some(b) = &self.bleu {
            out.push_str(&format!("BLEU|{}\n", b.signature(self.nrefs)));
        }
        if let Some(c) = &self.chrfpp {
            out.push_str(&format!("chrF++|{}\n", c.signature(self.nrefs)));
        }
        out
    }
}

/// Score a hypothesis file against one or more line-aligned reference
/// files.
pub fn score_files(
    hyp_path: impl AsRef<Path>,
    ref_paths: &[PathBuf],
    which: WhichMetric,
) -> Result<MetricReport> {
    score_files_opt(hyp_path, ref_paths, which, &ScoreOptions::default())
}

pub fn score_files_opt(
    hyp_path: impl AsRef<Path>,
    ref_paths: &[PathBuf],
    which: WhichMetric,
    options: &ScoreOptions,
) -> Result<MetricReport> {
    let hyp_path = hyp_path.as_ref();
    if ref_paths.is_empty() {
        return Err(Error::EmptyInput("no reference files".into()));
    }
    let hyp_lines = read_lines(hyp_path)?;
    let mut ref_columns = Vec::with_capacity(ref_paths.len());
    for rp in ref_paths {
        let lines = read_lines(rp)?;
        if lines.len() != hyp_lines.len() {
            return Err(Error::LineCountMismatch {
                left: hyp_path.to_path_buf(),
                left_count: hyp_lines.len(),
                right: rp.clone(),
                right_count: lines.len(),
            });
        }
        ref_columns.push(lines);
    }

    let pairs: Vec<SegmentPair> = hyp_lines
        .into_iter()
        .enumerate()
        .map(|(i, hypothesis)| SegmentPair {
            hypothesis,
            references: ref_columns.iter().map(|c| c[i].clone()).collect(),
        })
        .collect();

    let bleu = match which {
        WhichMetric::Bleu | WhichMetric::Both => {
            Some(bleu_corpus_opt(&pairs, options.smoothing)?)
        }
        WhichMetric::Chrfpp => None,
    };
    let chrfpp = match which {
        WhichMetric::Chrfpp | WhichMetric::Both => {
            Some(chrfpp_corpus_opt(&pairs, &options.chrf)?)
        }
        WhichMetric::Bleu => None,
    };
    Ok(MetricReport {
        bleu,
        chrfpp,
        nrefs: ref_paths.len(),
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim_end().to_string()).collect())
}
