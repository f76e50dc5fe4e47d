//! Monotone 1-1 sentence alignment by dynamic programming.
//!
//! Each candidate pair is scored as `max(cosine, 0) × length ratio`, the
//! length ratio being the shorter sentence's character count divided by
//! the longer's. The DP finds the monotone matching (each sentence used
//! at most once, skips free) that maximizes the total score:
//!
//! ```text
//! D[i][j] = max(D[i-1][j], D[i][j-1], D[i-1][j-1] + s(i,j))
//! ```
//!
//! Negative cosines are clamped to zero before the length multiplier so
//! skipping always weakly dominates aligning dissimilar sentences. Ties
//! resolve diagonal first, then source-skip, then target-skip, which
//! makes the traceback reproducible. A threshold then filters low-scoring
//! pairs; it never changes which matching was selected.

use rayon::prelude::*;
use serde::Serialize;

use crate::embeddings::{cosine, embed_sentences, EmbedderSpec, EmbeddingMatrix};
use crate::error::{Error, Result};

/// One aligned sentence pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredPair {
    pub src_index: usize,
    pub tgt_index: usize,
    pub score: f64,
}

/// A monotone alignment of two documents after threshold filtering.
///
/// `pairs` is strictly increasing in both indices; every index appears in
/// exactly one of `pairs` / the matching unaligned set; `total_score` is
/// the sum of retained pair scores.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentResult {
    pub pairs: Vec<ScoredPair>,
    pub unaligned_src: Vec<usize>,
    pub unaligned_tgt: Vec<usize>,
    pub total_score: f64,
    pub threshold: f64,
}

/// `max(cosine, 0) × (min len / max len)`, lengths in Unicode scalar
/// characters.
pub fn pair_score(src: &str, tgt: &str, v_src: &[f32], v_tgt: &[f32]) -> Result<f64> {
    if src.is_empty() {
        return Err(Error::EmptyInput("empty source sentence".into()));
    }
    if tgt.is_empty() {
        return Err(Error::EmptyInput("empty target sentence".into()));
    }
    let cos = cosine(v_src, v_tgt)?.max(0.0);
    let (a, b) = (src.chars().count() as f64, tgt.chars().count() as f64);
    Ok(cos * (a.min(b) / a.max(b)))
}

/// Align two pre-scored documents; `scores[i][j]` is the pair score of
/// source sentence `i` against target sentence `j`.
///
/// Entry point for callers holding scores from an external scorer; kept
/// separate from the embedding step so the DP is testable against an
/// exhaustive oracle on raw matrices.
pub fn align_with_scores(scores: &[Vec<f64>], threshold: f64) -> Result<AlignmentResult> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::ThresholdRange(threshold));
    }
    let n = scores.len();
    let m = scores.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(Error::EmptyInput("empty document".into()));
    }
    if let Some(bad) = scores.iter().find(|row| row.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: bad.len(),
        });
    }

    // moves: 0 = diagonal (match), 1 = source skip, 2 = target skip.
    let mut dp = vec![0.0f64; (n + 1) * (m + 1)];
    let mut moves = vec![0u8; (n + 1) * (m + 1)];
    let w = m + 1;
    for i in 1..=n {
        moves[i * w] = 1;
    }
    moves[1..=m].fill(2);
    for i in 1..=n {
        let row = &scores[i - 1];
        for j in 1..=m {
            let diag = dp[(i - 1) * w + (j - 1)] + row[j - 1];
            let skip_src = dp[(i - 1) * w + j];
            let skip_tgt = dp[i * w + (j - 1)];
            // Fixed preference on ties: diagonal, then source skip.
            let (best, mv) = if diag >= skip_src && diag >= skip_tgt {
                (diag, 0)
            } else if skip_src >= skip_tgt {
                (skip_src, 1)
            } else {
                (skip_tgt, 2)
            };
            dp[i * w + j] = best;
            moves[i * w + j] = mv;
        }
    }

    let mut matched = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match moves[i * w + j] {
            0 => {
                matched.push(ScoredPair {
                    src_index: i - 1,
                    tgt_index: j - 1,
                    score: scores[i - 1][j - 1],
                });
                i -= 1;
                j -= 1;
            }
            1 => i -= 1,
            _ => j -= 1,
        }
    }
    matched.reverse();

    let pairs: Vec<ScoredPair> = matched
        .into_iter()
        .filter(|p| p.score >= threshold)
        .collect();
    let total_score = pairs.iter().map(|p| p.score).sum();

    let mut aligned_src = vec![false; n];
    let mut aligned_tgt = vec![false; m];
    for p in &pairs {
        aligned_src[p.src_index] = true;
        aligned_tgt[p.tgt_index] = true;
    }
    let unaligned = |flags: Vec<bool>| {
        flags
            .iter()
            .enumerate()
            .filter(|(_, &a)| !a)
            .map(|(i, _)| i)
            .collect()
    };

    Ok(AlignmentResult {
        pairs,
        unaligned_src: unaligned(aligned_src),
        unaligned_tgt: unaligned(aligned_tgt),
        total_score,
        threshold,
    })
}

/// Embed both documents, score every pair, and run the DP alignment.
pub fn align_documents(
    src: &[impl AsRef<str>],
    tgt: &[impl AsRef<str>],
    spec: &EmbedderSpec,
    threshold: f64,
) -> Result<AlignmentResult> {
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::EmptyInput("empty document".into()));
    }
    let v_src = embed_sentences(src, spec)?;
    let v_tgt = embed_sentences(tgt, spec)?;
    align_documents_with_vectors(src, tgt, &v_src, &v_tgt, threshold)
}

/// Align documents whose sentence vectors were computed elsewhere
/// (row `i` of each matrix belongs to sentence `i`).
pub fn align_documents_with_vectors(
    src: &[impl AsRef<str>],
    tgt: &[impl AsRef<str>],
    v_src: &EmbeddingMatrix,
    v_tgt: &EmbeddingMatrix,
    threshold: f64,
) -> Result<AlignmentResult> {
    if v_src.len() != src.len() {
        return Err(Error::DimensionMismatch {
            expected: src.len(),
            got: v_src.len(),
        });
    }
    if v_tgt.len() != tgt.len() {
        return Err(Error::DimensionMismatch {
            expected: tgt.len(),
            got: v_tgt.len(),
        });
    }
    let scores = score_matrix(src, tgt, v_src, v_tgt)?;
    align_with_scores(&scores, threshold)
}

fn score_matrix(
    src: &[impl AsRef<str>],
    tgt: &[impl AsRef<str>],
    v_src: &EmbeddingMatrix,
    v_tgt: &EmbeddingMatrix,
) -> Result<Vec<Vec<f64>>> {
    src.iter()
        .enumerate()
        .map(|(i, s)| {
            tgt.iter()
                .enumerate()
                .map(|(j, t)| pair_score(s.as_ref(), t.as_ref(), v_src.row(i), v_tgt.row(j)))
                .collect()
        })
        .collect()
}

/// One source/target document pair known to be translations of the same
/// work.
#[derive(Debug, Clone)]
pub struct DocumentPair {
    pub doc_id: String,
    pub src: Vec<String>,
    pub tgt: Vec<String>,
}

/// A mined pair with document provenance.
#[derive(Debug, Clone, Serialize)]
pub struct MinedPair {
    pub doc_id: String,
    pub src_index: usize,
    pub tgt_index: usize,
    pub score: f64,
}

/// Per-document failure that did not abort the batch.
#[derive(Debug)]
pub struct DocumentError {
    pub doc_id: String,
    pub error: Error,
}

/// Outcome of mining a batch of document pairs.
#[derive(Debug, Default)]
pub struct MineReport {
    /// Ordered by input document order, then source index.
    pub pairs: Vec<MinedPair>,
    pub errors: Vec<DocumentError>,
}

/// Align each document pair independently — sentences are never matched
/// across different documents. Documents run in parallel; output order is
/// input order, so results are deterministic.
pub fn mine_local(doc_pairs: &[DocumentPair], spec: &EmbedderSpec, threshold: f64) -> MineReport {
    let per_doc: Vec<(String, Result<AlignmentResult>)> = doc_pairs
        .par_iter()
        .map(|dp| {
            (
                dp.doc_id.clone(),
                align_documents(&dp.src, &dp.tgt, spec, threshold),
            )
        })
        .collect();

    let mut report = MineReport::default();
    for (doc_id, outcome) in per_doc {
        match outcome {
            Ok(result) => report.pairs.extend(result.pairs.into_iter().map(|p| MinedPair {
                doc_id: doc_id.clone(),
                src_index: p.src_index,
                tgt_index: p.tgt_index,
                score: p.score,
            })),
            Err(error) => report.errors.push(DocumentError { doc_id, error }),
        }
    }
    report
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn doc(lines: &[&str]) -> Vec<String> {
        lines.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pair_score_identity() {
        let v = [0.6f32, 0.8];
        let s = pair_score("salem", "salem", &v, &v).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pair_score_length_ratio() {
        // cosine 1, lengths 10 and 20 -> 0.5
        let v = [1.0f32, 0.0];
        let s = pair_score(&"a".repeat(10), &"b".repeat(20), &v, &v).unwrap();
        assert!((s - 0.5).abs() < 1e-9);
    }

    #[test]
    fn pair_score_counts_chars_not_bytes() {
        let v = [1.0f32, 0.0];
        // 2 Cyrillic chars (4 bytes) vs 4 ASCII chars: ratio 0.5.
        let s = pair_score("жж", "abcd", &v, &v).unwrap();
        assert!((s - 0.5).abs() < 1e-9);
    }

    #[test]
    fn negative_cosine_clamped() {
        let s = pair_score("ab", "cd", &[1.0, 0.2], &[-1.0, 0.2]).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn pair_score_empty_sentence() {
        let v = [1.0f32];
        assert!(matches!(
            pair_score("", "x", &v, &v).unwrap_err(),
            Error::EmptyInput(_)
        ));
    }

    #[test]
    fn identity_documents_align_diagonally() {
        let d = doc(&["bir gáp", "eki gáp", "úsh gáp", "tórt gáp"]);
        let r = align_documents(&d, &d, &EmbedderSpec::default(), 0.0).unwrap();
        assert_eq!(r.pairs.len(), 4);
        for (i, p) in r.pairs.iter().enumerate() {
            assert_eq!((p.src_index, p.tgt_index), (i, i));
            assert!((p.score - 1.0).abs() < 1e-9);
        }
        assert!(r.unaligned_src.is_empty());
        assert!(r.unaligned_tgt.is_empty());
    }

    #[test]
    fn inserted_sentence_lands_unaligned() {
        let src = doc(&["bir gáp keldi", "eki gáp ketti", "úsh gáp qaldı", "tórt gáp boldı"]);
        let mut tgt = src.clone();
        tgt.insert(2, "qosımsha júdá uzın basqa gáp".to_string());
        let spec = EmbedderSpec::default();
        let r = align_documents(&src, &tgt, &spec, 0.0).unwrap();

        // Oracle: exhaustive enumeration on the same score matrix.
        let v_src = embed_sentences(&src, &spec).unwrap();
        let v_tgt = embed_sentences(&tgt, &spec).unwrap();
        let scores = score_matrix(&src, &tgt, &v_src, &v_tgt).unwrap();
        assert!((r.total_score - oracle::best_total(&scores)).abs() < 1e-9);

        let diag: Vec<(usize, usize)> = r.pairs.iter().map(|p| (p.src_index, p.tgt_index)).collect();
        assert_eq!(diag, vec![(0, 0), (1, 1), (2, 3), (3, 4)]);
        assert_eq!(r.unaligned_tgt, vec![2]);
        assert!(r.unaligned_src.is_empty());
    }

    #[test]
    fn random_instances_match_bruteforce() {
        let mut rng = StdRng::seed_from_u64(0xA11C);
        for case in 0..200 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(1..=6);
            let scores: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let r = align_with_scores(&scores, 0.0).unwrap();
            let best = oracle::best_total(&scores);
            assert!(
                (r.total_score - best).abs() < 1e-9,
                "case {case}: dp {} vs oracle {best}",
                r.total_score
            );
        }
    }

    #[test]
    fn reversal_mirrors_alignment() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(2..=6);
            let scores: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let rev: Vec<Vec<f64>> = scores
                .iter()
                .rev()
                .map(|row| row.iter().rev().copied().collect())
                .collect();
            let fwd = align_with_scores(&scores, 0.0).unwrap();
            let bwd = align_with_scores(&rev, 0.0).unwrap();
            assert!((fwd.total_score - bwd.total_score).abs() < 1e-9);
            let mirrored: Vec<(usize, usize)> = bwd
                .pairs
                .iter()
                .rev()
                .map(|p| (n - 1 - p.src_index, m - 1 - p.tgt_index))
                .collect();
            let original: Vec<(usize, usize)> =
                fwd.pairs.iter().map(|p| (p.src_index, p.tgt_index)).collect();
            assert_eq!(original, mirrored);
        }
    }

    #[test]
    fn threshold_filters_without_changing_matching() {
        let scores = vec![
            vec![0.9, 0.1, 0.0],
            vec![0.2, 0.4, 0.1],
            vec![0.0, 0.1, 0.7],
        ];
        let loose = align_with_scores(&scores, 0.0).unwrap();
        let tight = align_with_scores(&scores, 0.5).unwrap();
        assert!(tight.pairs.len() <= loose.pairs.len());
        assert!(tight.pairs.iter().all(|p| p.score >= 0.5));
        // Retained pairs are a subset of the unfiltered matching.
        for p in &tight.pairs {
            assert!(loose
                .pairs
                .iter()
                .any(|q| (q.src_index, q.tgt_index) == (p.src_index, p.tgt_index)));
        }
        let sum: f64 = tight.pairs.iter().map(|p| p.score).sum();
        assert!((tight.total_score - sum).abs() < 1e-9);
    }

    #[test]
    fn threshold_out_of_range() {
        assert!(matches!(
            align_with_scores(&[vec![1.0]], 1.5).unwrap_err(),
            Error::ThresholdRange(_)
        ));
    }

    #[test]
    fn result_partitions_indices() {
        let scores = vec![vec![0.9, 0.0], vec![0.0, 0.0], vec![0.0, 0.8]];
        let r = align_with_scores(&scores, 0.5).unwrap();
        let mut src: Vec<usize> = r.pairs.iter().map(|p| p.src_index).collect();
        src.extend(&r.unaligned_src);
        src.sort_unstable();
        assert_eq!(src, vec![0, 1, 2]);
        let mut tgt: Vec<usize> = r.pairs.iter().map(|p| p.tgt_index).collect();
        tgt.extend(&r.unaligned_tgt);
        tgt.sort_unstable();
        assert_eq!(tgt, vec![0, 1]);
    }

    #[test]
    fn mine_local_never_crosses_documents() {
        let docs = vec![
            DocumentPair {
                doc_id: "a".into(),
                src: doc(&["birinshi gáp", "ekinshi gáp"]),
                tgt: doc(&["birinshi gáp", "ekinshi gáp"]),
            },
            DocumentPair {
                doc_id: "b".into(),
                src: doc(&["úshinshi gáp", "tórtinshi gáp"]),
                tgt: doc(&["úshinshi gáp", "tórtinshi gáp"]),
            },
        ];
        let report = mine_local(&docs, &EmbedderSpec::default(), 0.5);
        assert!(report.errors.is_empty());
        assert_eq!(report.pairs.len(), 4);
        assert_eq!(report.pairs[0].doc_id, "a");
        assert_eq!(report.pairs[2].doc_id, "b");
        // Locality: indices stay within each 2-sentence document.
        assert!(report.pairs.iter().all(|p| p.src_index < 2 && p.tgt_index < 2));
    }

    #[test]
    fn mine_local_isolates_bad_documents() {
        let docs = vec![
            DocumentPair {
                doc_id: "good".into(),
                src: doc(&["aman esen"]),
                tgt: doc(&["aman esen"]),
            },
            DocumentPair {
                doc_id: "empty".into(),
                src: vec![],
                tgt: doc(&["jalǵız"]),
            },
        ];
        let report = mine_local(&docs, &EmbedderSpec::default(), 0.0);
        assert_eq!(report.pairs.len(), 1);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].doc_id, "empty");
    }

    #[test]
    fn mine_local_equals_per_document_runs() {
        let spec = EmbedderSpec::default();
        let chapters = vec![
            DocumentPair {
                doc_id: "ch1".into(),
                src: doc(&["suw aǵadı", "ot janadı", "jer aylanadı"]),
                tgt: doc(&["suw aǵadı", "qosımsha", "ot janadı", "jer aylanadı"]),
            },
            DocumentPair {
                doc_id: "ch2".into(),
                src: doc(&["kún shıǵadı", "ay batadı"]),
                tgt: doc(&["kún shıǵadı", "ay batadı"]),
            },
        ];
        let batch = mine_local(&chapters, &spec, 0.5);
        let separate: usize = chapters
            .iter()
            .map(|c| {
                align_documents(&c.src, &c.tgt, &spec, 0.5)
                    .unwrap()
                    .pairs
                    .len()
            })
            .sum();
        assert_eq!(batch.pairs.len(), separate);
    }
}
