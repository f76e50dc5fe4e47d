//! Corpus-engineering toolkit for low-resource machine translation work:
//! orthography transliteration, embedding-based parallel sentence mining,
//! MT evaluation metrics, vocabulary-expansion embedding initialization,
//! and deterministic corpus mixing.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`translit`] — rule-table transliteration between orthographies
//!   (Cyrillic and the 1995/2009/2016 Latin revisions).
//! - [`embeddings`] — sentence vectors: a file-backed provider for
//!   precomputed encoder output plus a deterministic hashed character
//!   n-gram fallback, behind one [`embeddings::EmbedderSpec`] interface.
//! - [`align`] — length-ratio-weighted cosine scoring and monotone 1-1
//!   sentence alignment by dynamic programming, with threshold filtering
//!   and per-document local mining.
//! - [`metrics`] — corpus-level BLEU (sacreBLEU convention) and chrF++.
//! - [`vocab`] — embedding initialization for new subword tokens by
//!   averaging constituent-subtoken vectors.
//! - [`corpus`] — line-aligned bitext loading, composition statistics,
//!   and seeded stratified mixing with an upper cap.
//!
//! All randomness flows from explicit seeds; every operation is
//! deterministic given its inputs.

pub mod align;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod metrics;
pub mod translit;
pub mod vocab;

pub use error::{Error, Result};
