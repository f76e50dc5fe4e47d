//! Vocabulary-expansion embedding initialization.
//!
//! Given an original vocabulary with one embedding row per token and a
//! plan of new tokens, each new token's vector is the arithmetic mean of
//! its constituent subtokens' vectors. Summation is left to right in
//! decomposition order with a single division at the end, and the result
//! is not renormalized, so outputs are bit-reproducible.

use std::collections::HashMap;
use std::path::Path;

use crate::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};

/// An ordered token list with a token-to-row index.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Build from tokens; duplicates are rejected.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocabulary> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Parse {
                    path: "<tokens>".into(),
                    line: i + 1,
                    message: format!("duplicate token {t:?}"),
                });
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    /// Load a vocabulary file: one token per line, row = line number.
    pub fn load(path: impl AsRef<Path>) -> Result<Vocabulary> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut tokens = Vec::new();
        let mut index = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let token = line.trim_end_matches('\r');
            if token.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "empty token line".into(),
                });
            }
            if index.insert(token.to_string(), i).is_some() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("duplicate token {token:?}"),
                });
            }
            tokens.push(token.to_string());
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Validated list of new tokens with their decompositions into original
/// vocabulary tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionPlan {
    entries: Vec<(String, Vec<String>)>,
}

impl ExpansionPlan {
    /// Validate `(token, decomposition)` entries against `orig`:
    /// decompositions must be non-empty and covered by the original
    /// vocabulary; new tokens must be new and unique.
    pub fn new(orig: &Vocabulary, entries: Vec<(String, Vec<String>)>) -> Result<ExpansionPlan> {
        let mut seen: HashMap<&str, ()> = HashMap::with_capacity(entries.len());
        for (token, decomposition) in &entries {
            if orig.contains(token) || seen.insert(token, ()).is_some() {
                return Err(Error::DuplicateNewToken(token.clone()));
            }
            if decomposition.is_empty() {
                return Err(Error::EmptyDecomposition(token.clone()));
            }
            for sub in decomposition {
                if !orig.contains(sub) {
                    return Err(Error::UnknownSubtoken {
                        token: token.clone(),
                        subtoken: sub.clone(),
                    });
                }
            }
        }
        Ok(ExpansionPlan { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, Vec<String>)] {
        &self.entries
    }

    /// Load a plan file (`newtoken<TAB>sub1 sub2 ...`) and validate it.
    pub fn load(path: impl AsRef<Path>, orig: &Vocabulary) -> Result<ExpansionPlan> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, subs) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected newtoken<TAB>sub1 sub2 ...".into(),
            })?;
            entries.push((
                token.to_string(),
                subs.split_whitespace().map(str::to_string).collect(),
            ));
        }
        ExpansionPlan::new(orig, entries)
    }

    /// Write the plan in the same format [`ExpansionPlan::load`] reads.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for (token, decomposition) in &self.entries {
            out.push_str(token);
            out.push('\t');
            out.push_str(&decomposition.join(" "));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Build a validated plan from new tokens and a segmentation map,
/// preserving the input token order.
pub fn plan_from_tokenizer_output(
    orig: &Vocabulary,
    new_tokens: &[String],
    segmentation: &HashMap<String, Vec<String>>,
) -> Result<ExpansionPlan> {
    let mut entries = Vec::with_capacity(new_tokens.len());
    for token in new_tokens {
        let decomposition = segmentation
            .get(token)
            .ok_or_else(|| Error::UncoveredToken(token.clone()))?;
        if decomposition.is_empty() {
            return Err(Error::EmptyDecomposition(token.clone()));
        }
        entries.push((token.clone(), decomposition.clone()));
    }
    ExpansionPlan::new(orig, entries)
}

/// Append one mean row per plan entry to the original embedding matrix.
///
/// The first `orig.len()` rows of the output are bit-identical to the
/// input; row for new token `t` is the left-to-right f64 sum of its
/// decomposition rows divided once by the decomposition size.
pub fn expand_embeddings(
    orig: &Vocabulary,
    emb: &EmbeddingMatrix,
    plan: &ExpansionPlan,
) -> Result<EmbeddingMatrix> {
    if emb.len() != orig.len() {
        return Err(Error::DimensionMismatch {
            expected: orig.len(),
            got: emb.len(),
        });
    }
    let dim = emb.dim();
    let mut out = emb.clone();
    let mut sum = vec![0.0f64; dim];
    let mut row = vec![0.0f32; dim];
    for (token, decomposition) in plan.entries() {
        sum.fill(0.0);
        for sub in decomposition {
            let idx = orig.index_of(sub).ok_or_else(|| Error::UnknownSubtoken {
                token: token.clone(),
                subtoken: sub.clone(),
            })?;
            for (s, &v) in sum.iter_mut().zip(emb.row(idx)) {
                *s += f64::from(v);
            }
        }
        let n = decomposition.len() as f64;
        for (r, &s) in row.iter_mut().zip(&sum) {
            *r = (s / n) as f32;
        }
        out.push_row(&row)?;
    }
    Ok(out)
}
