//! Corpus BLEU with n-grams 1..4 over v13a tokens, clipped counts summed
//! corpus-wide, and the closest-reference-length brevity penalty.

use std::collections::HashMap;

use serde::Serialize;

use super::tokenize::tokenize_13a;
use super::{validate_corpus, SegmentPair};
use crate::error::Result;

const MAX_ORDER: usize = 4;

/// Zero-count smoothing for the modified precisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    /// No smoothing: any zero precision zeroes the score.
    #[default]
    None,
    /// mteval-style exponential smoothing: the k-th zero-count order gets
    /// precision `1 / (2^k * total)`.
    Exponential,
}

impl Smoothing {
    fn name(&self) -> &'static str {
        match self {
            Smoothing::None => "none",
            Smoothing::Exponential => "exp",
        }
    }
}

/// Corpus BLEU with its component statistics.
///
/// Invariant: `score == brevity_penalty * geometric_mean(precisions) * 100`
/// (precisions as fractions in `[0, 1]`).
#[derive(Debug, Clone, Serialize)]
pub struct BleuReport {
    pub score: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
    pub smoothing: Smoothing,
}

impl BleuReport {
    pub fn signature(&self, nrefs: usize) -> String {
        format!(
            "nrefs:{nrefs}|case:mixed|tok:13a|smooth:{}|ngram:{MAX_ORDER}",
            self.smoothing.name()
        )
    }
}

/// Corpus BLEU with the default (no) smoothing.
pub fn bleu_corpus(pairs: &[SegmentPair]) -> Result<BleuReport> {
    bleu_corpus_opt(pairs, Smoothing::None)
}

pub fn bleu_corpus_opt(pairs: &[SegmentPair], smoothing: Smoothing) -> Result<BleuReport> {
    validate_corpus(pairs)?;

    let mut correct = [0u64; MAX_ORDER];
    let mut total = [0u64; MAX_ORDER];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for pair in pairs {
        let hyp = tokenize_13a(&pair.hypothesis);
        let refs: Vec<Vec<String>> = pair.references.iter().map(|r| tokenize_13a(r)).collect();

        hyp_len += hyp.len() as u64;
        // Effective reference length: closest to the hypothesis, ties to
        // the shorter reference.
        let closest = refs
            .iter()
            .map(Vec::len)
            .min_by_key(|&len| ((len as i64 - hyp.len() as i64).abs(), len))
            .unwrap();
        ref_len += closest as u64;

        for n in 1..=MAX_ORDER {
            if hyp.len() < n {
                continue;
            }
            total[n - 1] += (hyp.len() - n + 1) as u64;
            let hyp_counts = ngram_counts(&hyp, n);
            let mut clip: HashMap<&[String], u64> = HashMap::new();
            for r in &refs {
                for (gram, count) in ngram_counts(r, n) {
                    let entry = clip.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, count) in hyp_counts {
                correct[n - 1] += count.min(clip.get(gram).copied().unwrap_or(0));
            }
        }
    }

    let mut precisions = [0.0f64; MAX_ORDER];
    let mut smooth_scale = 1.0f64;
    for n in 0..MAX_ORDER {
        if total[n] == 0 {
            continue;
        }
        if correct[n] > 0 {
            precisions[n] = correct[n] as f64 / total[n] as f64;
        } else if smoothing == Smoothing::Exponential {
            smooth_scale *= 2.0;
            precisions[n] = 1.0 / (smooth_scale * total[n] as f64);
        }
    }

    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let geo_mean = if precisions.contains(&0.0) {
        0.0
    } else {
        (precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64).exp()
    };

    Ok(BleuReport {
        score: 100.0 * brevity_penalty * geo_mean,
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
        smoothing,
    })
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}
