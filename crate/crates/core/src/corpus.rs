//! Parallel corpus loading, composition statistics, and stratified
//! mixing.
//!
//! Bitext arrives as two line-aligned UTF-8 files or a 2-column TSV,
//! described by a JSON-lines manifest. The mixer samples a fixed rate
//! from each dataset — one rate for pairs involving Uzbek or Kazakh,
//! another for everything else — and truncates the union to a cap with a
//! seeded uniform subsample, so the same seed always reproduces the same
//! mix byte for byte.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::translit::Orthography;

/// Closed registry of language tags: the pipeline's own languages plus
/// the Turkic-corpus languages the mixer samples from, and `mul` for
/// mixed-language output datasets.
pub const LANG_REGISTRY: &[&str] = &[
    "aze", "bak", "chv", "crh", "eng", "kaa", "kaz", "kir", "kjh", "krc", "kum", "mul", "rus",
    "sah", "slr", "tat", "tuk", "tur", "tyv", "uig", "uzb",
];

/// A language tag from [`LANG_REGISTRY`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lang(&'static str);

impl Lang {
    pub fn parse(tag: &str) -> Result<Lang> {
        LANG_REGISTRY
            .iter()
            .find(|&&known| known == tag)
            .map(|&known| Lang(known))
            .ok_or_else(|| Error::UnknownLanguage(tag.to_string()))
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

impl FromStr for Lang {
    type Err = Error;
    fn from_str(s: &str) -> Result<Lang> {
        Lang::parse(s)
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl Serialize for Lang {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.0)
    }
}

/// Source-domain tag carried by every record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    News,
    Books,
    Dictionaries,
    Textbooks,
    Other,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::News,
        Domain::Books,
        Domain::Dictionaries,
        Domain::Textbooks,
        Domain::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::News => "news",
            Domain::Books => "books",
            Domain::Dictionaries => "dictionaries",
            Domain::Textbooks => "textbooks",
            Domain::Other => "other",
        }
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Domain> {
        match s {
            "news" => Ok(Domain::News),
            "books" => Ok(Domain::Books),
            "dictionaries" => Ok(Domain::Dictionaries),
            "textbooks" => Ok(Domain::Textbooks),
            "other" => Ok(Domain::Other),
            other => Err(Error::UnknownDomain(other.to_string())),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sentence with its language, optional orthography, and domain tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceRecord {
    pub text: String,
    pub lang: Lang,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orthography: Option<Orthography>,
    pub domain: Domain,
}

/// A loaded parallel dataset with manifest metadata.
#[derive(Debug, Clone)]
pub struct ParallelDataset {
    pub name: String,
    pub src_lang: Lang,
    pub tgt_lang: Lang,
    pub domain: Domain,
    pub pairs: Vec<(SentenceRecord, SentenceRecord)>,
}

impl ParallelDataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when either side is Uzbek or Kazakh.
    pub fn involves_uzbek_or_kazakh(&self) -> bool {
        let hit = |l: Lang| matches!(l.as_str(), "uzb" | "kaz");
        hit(self.src_lang) || hit(self.tgt_lang)
    }
}

/// Dataset-level metadata attached to every loaded record.
#[derive(Debug, Clone)]
pub struct DatasetMeta {
    pub name: String,
    pub src_lang: Lang,
    pub tgt_lang: Lang,
    pub domain: Domain,
    pub orthography: Option<Orthography>,
}

/// One line of the JSON-lines manifest.
#[derive(Debug, Clone, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub src_lang: String,
    pub tgt_lang: String,
    pub src_path: PathBuf,
    /// Absent for 2-column TSV datasets, where `src_path` holds both sides.
    #[serde(default)]
    pub tgt_path: Option<PathBuf>,
    pub domain: String,
    #[serde(default)]
    pub orthography: Option<String>,
}

impl ManifestEntry {
    fn meta(&self) -> Result<DatasetMeta> {
        Ok(DatasetMeta {
            name: self.name.clone(),
            src_lang: Lang::parse(&self.src_lang)?,
            tgt_lang: Lang::parse(&self.tgt_lang)?,
            domain: Domain::from_str(&self.domain)?,
            orthography: self
                .orthography
                .as_deref()
                .map(Orthography::from_str)
                .transpose()?,
        })
    }
}

/// Read a JSON-lines manifest; blank lines are skipped.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Load every dataset named by a manifest; relative paths resolve against
/// the manifest's directory.
pub fn load_from_manifest(path: impl AsRef<Path>) -> Result<Vec<ParallelDataset>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    read_manifest(path)?
        .iter()
        .map(|entry| {
            let meta = entry.meta()?;
            match &entry.tgt_path {
                Some(tgt) => load_parallel(resolve(&entry.src_path), resolve(tgt), &meta),
                None => load_tsv(resolve(&entry.src_path), &meta),
            }
        })
        .collect()
}

/// Load two line-aligned files into positional pairs.
///
/// Lines are trimmed of trailing whitespace; a pair with an empty side is
/// rejected with the offending 1-based line numbers.
pub fn load_parallel(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
    meta: &DatasetMeta,
) -> Result<ParallelDataset> {
    let src_path = src_path.as_ref();
    let tgt_path = tgt_path.as_ref();
    let src_lines = read_trimmed_lines(src_path)?;
    let tgt_lines = read_trimmed_lines(tgt_path)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(Error::LineCountMismatch {
            left: src_path.to_path_buf(),
            left_count: src_lines.len(),
            right: tgt_path.to_path_buf(),
            right_count: tgt_lines.len(),
        });
    }
    check_no_empty_lines(src_path, &src_lines)?;
    check_no_empty_lines(tgt_path, &tgt_lines)?;
    build_dataset(src_lines, tgt_lines, meta)
}

/// Load a 2-column (`src<TAB>tgt`) TSV bitext.
pub fn load_tsv(path: impl AsRef<Path>, meta: &DatasetMeta) -> Result<ParallelDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut src_lines = Vec::new();
    let mut tgt_lines = Vec::new();
    let mut empty = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let (src, tgt) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected src<TAB>tgt".into(),
        })?;
        let (src, tgt) = (src.trim_end(), tgt.trim_end());
        if src.trim().is_empty() || tgt.trim().is_empty() {
            empty.push(i + 1);
        }
        src_lines.push(src.to_string());
        tgt_lines.push(tgt.to_string());
    }
    if !empty.is_empty() {
        return Err(Error::EmptyLines {
            path: path.to_path_buf(),
            lines: empty,
        });
    }
    build_dataset(src_lines, tgt_lines, meta)
}

fn read_trimmed_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim_end().to_string()).collect())
}

fn check_no_empty_lines(path: &Path, lines: &[String]) -> Result<()> {
    let empty: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.trim().is_empty())
        .map(|(i, _)| i + 1)
        .collect();
    if empty.is_empty() {
        Ok(())
    } else {
        Err(Error::EmptyLines {
            path: path.to_path_buf(),
            lines: empty,
        })
    }
}

fn build_dataset(
    src_lines: Vec<String>,
    tgt_lines: Vec<String>,
    meta: &DatasetMeta,
) -> Result<ParallelDataset> {
    if src_lines.is_empty() {
        return Err(Error::EmptyInput(format!("dataset {} has no pairs", meta.name)));
    }
    let pairs = src_lines
        .into_iter()
        .zip(tgt_lines)
        .map(|(s, t)| {
            (
                SentenceRecord {
                    text: s,
                    lang: meta.src_lang,
                    orthography: meta.orthography,
                    domain: meta.domain,
                },
                SentenceRecord {
                    text: t,
                    lang: meta.tgt_lang,
                    orthography: meta.orthography,
                    domain: meta.domain,
                },
            )
        })
        .collect();
    Ok(ParallelDataset {
        name: meta.name.clone(),
        src_lang: meta.src_lang,
        tgt_lang: meta.tgt_lang,
        domain: meta.domain,
        pairs,
    })
}

/// Per-domain share of a dataset collection.
#[derive(Debug, Clone, Serialize)]
pub struct DomainShare {
    pub domain: Domain,
    pub count: usize,
    pub fraction: f64,
}

/// Domain composition of a dataset collection; fractions sum to 1.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    pub total: usize,
    pub rows: Vec<DomainShare>,
}

impl CompositionReport {
    /// Aligned text table, one domain per row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&format!(
                "{:<14} {:>10}  {:>6.2}%\n",
                row.domain,
                row.count,
                row.fraction * 100.0
            ));
        }
        out.push_str(&format!("{:<14} {:>10}\n", "total", self.total));
        out
    }
}

/// Count pairs per domain over all datasets.
pub fn composition_report(datasets: &[ParallelDataset]) -> Result<CompositionReport> {
    if datasets.is_empty() {
        return Err(Error::EmptyInput("no datasets".into()));
    }
    let mut counts: HashMap<Domain, usize> = HashMap::new();
    let mut total = 0usize;
    for ds in datasets {
        for (src, _) in &ds.pairs {
            *counts.entry(src.domain).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyInput("datasets hold no pairs".into()));
    }
    let rows = Domain::ALL
        .iter()
        .filter_map(|&domain| {
            counts.get(&domain).map(|&count| DomainShare {
                domain,
                count,
                fraction: count as f64 / total as f64,
            })
        })
        .collect();
    Ok(CompositionReport { total, rows })
}

/// Stratified sampling parameters.
#[derive(Debug, Clone, Copy)]
pub struct MixSpec {
    /// Sample rate for datasets whose pair involves Uzbek or Kazakh.
    pub rate_uzb_kaz: f64,
    /// Sample rate for every other dataset.
    pub rate_other: f64,
    /// Upper limit on the mixed output size.
    pub cap: usize,
    pub seed: u64,
}

impl MixSpec {
    fn validate(&self) -> Result<()> {
        for (name, rate) in [("rate_uzb_kaz", self.rate_uzb_kaz), ("rate_other", self.rate_other)]
        {
            if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
                return Err(Error::InvalidMixSpec(format!("{name} {rate} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Sample `floor(rate × n)` pairs from each dataset without replacement,
/// then truncate the union to `cap` with a seeded uniform subsample.
///
/// All randomness comes from one ChaCha20 stream seeded by `spec.seed`,
/// so identical inputs give byte-identical output across runs and
/// platforms. Output order is dataset order, then sampled order.
pub fn mix_til(datasets: &[ParallelDataset], spec: &MixSpec) -> Result<ParallelDataset> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

    let mut union: Vec<(SentenceRecord, SentenceRecord)> = Vec::new();
    for ds in datasets {
        let rate = if ds.involves_uzbek_or_kazakh() {
            spec.rate_uzb_kaz
        } else {
            spec.rate_other
        };
        // Floor of the true product; the epsilon guards against the
        // binary representation of rates like 0.2 landing a hair high.
        let k = ((rate * ds.len() as f64) + 1e-9).floor() as usize;
        let k = k.min(ds.len());
        let mut indices: Vec<usize> = (0..ds.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(k);
        union.extend(indices.into_iter().map(|i| ds.pairs[i].clone()));
    }

    if union.len() > spec.cap {
        let mut keep: Vec<usize> = (0..union.len()).collect();
        keep.shuffle(&mut rng);
        keep.truncate(spec.cap);
        keep.sort_unstable();
        union = keep.into_iter().map(|i| union[i].clone()).collect();
    }

    Ok(ParallelDataset {
        name: "mix".into(),
        src_lang: Lang::parse("mul").unwrap(),
        tgt_lang: Lang::parse("mul").unwrap(),
        domain: Domain::Other,
        pairs: union,
    })
}

/// Serialize pairs as a 2-column TSV, one pair per line.
pub fn dataset_to_tsv(dataset: &ParallelDataset) -> String {
    let mut out = String::new();
    for (src, tgt) in &dataset.pairs {
        out.push_str(&src.text);
        out.push('\t');
        out.push_str(&tgt.text);
        out.push('\n');
    }
    out
}
