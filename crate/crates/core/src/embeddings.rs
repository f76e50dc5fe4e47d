//! Sentence vectors behind one provider interface.
//!
//! The aligner only needs vectors whose cosine reflects sentence
//! similarity. Two providers implement that contract:
//!
//! - `file`: precomputed vectors (e.g. from a multilingual encoder run
//!   elsewhere) read from a binary sidecar file, positional against the
//!   sentence list;
//! - `hashed_ngram`: a deterministic signed feature-hashing embedder over
//!   character n-grams. No ML runtime, language-agnostic, and related
//!   strings get high cosine — enough to drive and test the aligner.
//!
//! Vector file layout: magic `EMB1`, u32 count, u32 dim (little-endian),
//! then `count × dim` f32 values row-major.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_NGRAM_MIN: usize = 2;
pub const DEFAULT_NGRAM_MAX: usize = 4;
pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_SEED: u64 = 42;

const MAGIC: &[u8; 4] = b"EMB1";

/// Dense row-per-sentence vector store.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    data: Vec<f32>,
    normalized: bool,
}

impl EmbeddingMatrix {
    /// Build from explicit rows, validating dimensions and finiteness.
    pub fn from_rows(dim: usize, rows: &[Vec<f32>]) -> Result<EmbeddingMatrix> {
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            data.extend_from_slice(row);
        }
        Ok(EmbeddingMatrix {
            dim,
            data,
            normalized: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// Flat row-major view of the stored values.
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Append a row; must match the matrix dimension.
    pub fn push_row(&mut self, row: &[f32]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(self.len()));
        }
        self.data.extend_from_slice(row);
        self.normalized = false;
        Ok(())
    }

    /// Scale every row to unit Euclidean norm. All-zero rows are forbidden.
    pub fn normalize(&mut self) -> Result<()> {
        let dim = self.dim;
        for (i, row) in self.data.chunks_exact_mut(dim).enumerate() {
            let norm = row.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroVector(i));
            }
            for v in row.iter_mut() {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
        self.normalized = true;
        Ok(())
    }
}

/// Which provider fills the vector store, and with what parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EmbedderSpec {
    /// Precomputed vectors, positional against the sentence list.
    File { path: PathBuf },
    /// Signed feature hashing over character n-grams.
    HashedNgram {
        ngram_min: usize,
        ngram_max: usize,
        dim: usize,
        seed: u64,
    },
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        EmbedderSpec::HashedNgram {
            ngram_min: DEFAULT_NGRAM_MIN,
            ngram_max: DEFAULT_NGRAM_MAX,
            dim: DEFAULT_DIM,
            seed: DEFAULT_SEED,
        }
    }
}

impl EmbedderSpec {
    /// Parse a CLI spec string: `hashed`, `hashed:MIN,MAX,DIM[,SEED]`,
    /// or `file:PATH`.
    pub fn parse(s: &str) -> Result<EmbedderSpec> {
        Self::parse_with_seed(s, DEFAULT_SEED)
    }

    /// [`EmbedderSpec::parse`] with a caller-supplied fallback seed for
    /// hashed specs that do not pin one themselves.
    pub fn parse_with_seed(s: &str, default_seed: u64) -> Result<EmbedderSpec> {
        let bad = || Error::InvalidEmbedderSpec(s.to_string());
        if s == "hashed" {
            return Ok(EmbedderSpec::HashedNgram {
                ngram_min: DEFAULT_NGRAM_MIN,
                ngram_max: DEFAULT_NGRAM_MAX,
                dim: DEFAULT_DIM,
                seed: default_seed,
            });
        }
        if let Some(rest) = s.strip_prefix("hashed:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 && parts.len() != 4 {
                return Err(bad());
            }
            let ngram_min: usize = parts[0].trim().parse().map_err(|_| bad())?;
            let ngram_max: usize = parts[1].trim().parse().map_err(|_| bad())?;
            let dim: usize = parts[2].trim().parse().map_err(|_| bad())?;
            let seed: u64 = match parts.get(3) {
                Some(v) => v.trim().parse().map_err(|_| bad())?,
                None => default_seed,
            };
            let spec = EmbedderSpec::HashedNgram {
                ngram_min,
                ngram_max,
                dim,
                seed,
            };
            spec.validate()?;
            return Ok(spec);
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(EmbedderSpec::File { path: path.into() });
        }
        Err(bad())
    }

    pub fn validate(&self) -> Result<()> {
        if let EmbedderSpec::HashedNgram {
            ngram_min,
            ngram_max,
            dim,
            ..
        } = self
        {
            if *ngram_min == 0 || ngram_min > ngram_max {
                return Err(Error::InvalidEmbedderSpec(format!(
                    "ngram_min {ngram_min} must be >= 1 and <= ngram_max {ngram_max}"
                )));
            }
            if *dim < 8 {
                return Err(Error::InvalidEmbedderSpec(format!(
                    "dim {dim} must be >= 8"
                )));
            }
        }
        Ok(())
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a 64 with the seed XORed into the offset basis; seed 0 reproduces
/// the published FNV-1a test vectors.
fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Embed each sentence into one row, L2-normalized.
///
/// Pure: row `i` depends only on `sentences[i]` bytes and the embedder
/// parameters, so repeated calls are byte-identical and sentence lists
/// may be embedded in parallel by the caller.
pub fn embed_sentences(sentences: &[impl AsRef<str>], spec: &EmbedderSpec) -> Result<EmbeddingMatrix> {
    if sentences.is_empty() {
        return Err(Error::EmptyInput("no sentences to embed".into()));
    }
    spec.validate()?;
    match spec {
        EmbedderSpec::File { path } => {
            let mut matrix = read_vectors(path)?;
            if matrix.len() != sentences.len() {
                return Err(Error::MissingVectors {
                    path: path.clone(),
                    expected: sentences.len(),
                    got: matrix.len(),
                });
            }
            matrix.normalize()?;
            Ok(matrix)
        }
        EmbedderSpec::HashedNgram {
            ngram_min,
            ngram_max,
            dim,
            seed,
        } => {
            let mut matrix = EmbeddingMatrix {
                dim: *dim,
                data: Vec::with_capacity(dim * sentences.len()),
                normalized: false,
            };
            let mut acc = vec![0.0f64; *dim];
            for sentence in sentences {
                acc.fill(0.0);
                hash_sentence(sentence.as_ref(), *ngram_min, *ngram_max, *seed, &mut acc);
                let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
                matrix
                    .data
                    .extend(acc.iter().map(|&v| (v / norm) as f32));
            }
            matrix.normalized = true;
            Ok(matrix)
        }
    }
}

fn hash_sentence(sentence: &str, ngram_min: usize, ngram_max: usize, seed: u64, acc: &mut [f64]) {
    let dim = acc.len() as u64;
    // Char boundaries let each n-gram be sliced from the original bytes.
    let mut bounds: Vec<usize> = sentence.char_indices().map(|(i, _)| i).collect();
    bounds.push(sentence.len());
    let n_chars = bounds.len() - 1;

    let mut features = 0usize;
    for n in ngram_min..=ngram_max.min(n_chars) {
        for start in 0..=(n_chars - n) {
            let gram = &sentence.as_bytes()[bounds[start]..bounds[start + n]];
            add_feature(fnv1a64(seed, gram), dim, acc);
            features += 1;
        }
    }
    // Sentences shorter than ngram_min (or adversarial full cancellation)
    // fall back to a single whole-sentence feature so no row is all-zero.
    if features == 0 || acc.iter().all(|&v| v == 0.0) {
        add_feature(fnv1a64(seed ^ 1, sentence.as_bytes()), dim, acc);
    }
}

fn add_feature(h: u64, dim: u64, acc: &mut [f64]) {
    let idx = (h % dim) as usize;
    let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
    acc[idx] += sign;
}

/// Cosine similarity `dot(a,b) / (‖a‖‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 {
        return Err(Error::ZeroVector(0));
    }
    if nb == 0.0 {
        return Err(Error::ZeroVector(1));
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Write a matrix in the `EMB1` binary layout.
pub fn write_vectors(path: impl AsRef<Path>, matrix: &EmbeddingMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(12 + matrix.data.len() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&u32::try_from(matrix.len()).unwrap().to_le_bytes());
    bytes.extend_from_slice(&u32::try_from(matrix.dim).unwrap().to_le_bytes());
    for v in &matrix.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read an `EMB1` file. Rows are returned as stored, without renormalizing.
pub fn read_vectors(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let fmt = |message: &str| Error::VectorFormat {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    if bytes.len() < 12 || &bytes[0..4] != MAGIC {
        return Err(fmt("missing EMB1 magic"));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if dim == 0 {
        return Err(fmt("dimension 0"));
    }
    let expected = 12 + count * dim * 4;
    if bytes.len() != expected {
        return Err(fmt(&format!(
            "expected {expected} bytes for {count}x{dim} f32, found {}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(count * dim);
    for chunk in bytes[12..].chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(fmt("non-finite value"));
        }
        data.push(v);
    }
    Ok(EmbeddingMatrix {
        dim,
        data,
        normalized: false,
    })
}
