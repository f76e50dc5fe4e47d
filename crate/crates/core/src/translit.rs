//! Rule-table transliteration between Karakalpak orthographies.
//!
//! Tables are data files, not code: one rule per line, applied
//! longest-pattern-first, left to right. Rules are stored lowercase and a
//! case-transfer step restores capitalization (first-letter case of the
//! match carries to the replacement; an all-caps match uppercases the
//! whole replacement). Characters that neither match a rule nor sit in
//! the table's passthrough set are copied unchanged and reported, so
//! mixed-script corpus noise never aborts a conversion.
//!
//! Input is normalized to NFC before matching because the diacritic
//! letters (á, ǵ, ı, ń, ó, ú) have both composed and decomposed encodings
//! in the wild.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// A Karakalpak writing system revision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orthography {
    Cyrillic,
    Latin1995,
    Latin2009,
    Latin2016,
}

impl Orthography {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orthography::Cyrillic => "cyrillic",
            Orthography::Latin1995 => "latin1995",
            Orthography::Latin2009 => "latin2009",
            Orthography::Latin2016 => "latin2016",
        }
    }
}

impl FromStr for Orthography {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyrillic" => Ok(Orthography::Cyrillic),
            "latin1995" => Ok(Orthography::Latin1995),
            "latin2009" => Ok(Orthography::Latin2009),
            "latin2016" => Ok(Orthography::Latin2016),
            other => Err(Error::UnknownOrthography(other.to_string())),
        }
    }
}

impl fmt::Display for Orthography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One lowercase rewrite rule.
#[derive(Debug, Clone)]
struct Rule {
    pattern: Vec<char>,
    replacement: Vec<char>,
}

/// An ordered longest-match rewrite table between two orthographies.
///
/// Immutable after [`load_table`]/[`TranslitTable::parse`]; a `&TranslitTable`
/// can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct TranslitTable {
    pub source: Orthography,
    pub target: Orthography,
    /// Declared round-trip-safe in the table header.
    pub bijective: bool,
    rules: Vec<Rule>,
    passthrough: HashSet<char>,
    max_pattern_len: usize,
}

/// Result of transliterating one text: the converted output plus every
/// character that was copied through without a rule or passthrough entry,
/// as `(char index in the normalized input, character)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslitReport {
    pub converted: String,
    pub unmapped: Vec<(usize, char)>,
}

impl TranslitReport {
    pub fn is_clean(&self) -> bool {
        self.unmapped.is_empty()
    }
}

/// The six diacritic letter pairs of the 2016 Latin alphabet.
pub const LATIN2016_DIACRITICS: [(char, char); 6] = [
    ('Á', 'á'),
    ('Ǵ', 'ǵ'),
    ('Í', 'ı'),
    ('Ń', 'ń'),
    ('Ó', 'ó'),
    ('Ú', 'ú'),
];

/// Uppercase a character under the 2016 alphabet's case pairs.
///
/// Unicode maps `ı` (dotless i) to plain `I`, but the alphabet pairs it
/// with `Í`; that override keeps `i`/`ı` distinct through case transfer.
fn upper_char(c: char) -> char {
    match c {
        'ı' => 'Í',
        _ => c.to_uppercase().next().unwrap_or(c),
    }
}

/// Lowercase counterpart of [`upper_char`] (`Í` pairs with `ı`).
fn lower_char(c: char) -> char {
    match c {
        'Í' => 'ı',
        _ => c.to_lowercase().next().unwrap_or(c),
    }
}

fn is_cased(c: char) -> bool {
    upper_char(c) != lower_char(c)
}

impl TranslitTable {
    /// Load and validate a table file.
    ///
    /// Format: header lines `source: <orthography>`, `target: <orthography>`,
    /// optional `bijective: true`, optional `passthrough: <characters>`
    /// (repeatable, unioned; `\s` `\t` `\n` `\\` escapes); then one rule per
    /// line as `pattern<TAB>replacement`. `#` starts a comment.
    pub fn load(path: impl AsRef<Path>) -> Result<TranslitTable> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parse table text; `origin` is used in error messages only.
    pub fn parse(text: &str, origin: impl Into<PathBuf>) -> Result<TranslitTable> {
        let origin = origin.into();
        let err = |line: usize, message: String| Error::Parse {
            path: origin.clone(),
            line,
            message,
        };

        let mut source = None;
        let mut target = None;
        let mut bijective = false;
        let mut passthrough = HashSet::new();
        let mut rules: Vec<Rule> = Vec::new();
        let mut seen_patterns: HashSet<Vec<char>> = HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                // Only full-line comments: '#' inside a rule would be data.
                Some(0) => continue,
                _ => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            if let Some(value) = line.strip_prefix("source:") {
                source = Some(Orthography::from_str(value.trim())?);
            } else if let Some(value) = line.strip_prefix("target:") {
                target = Some(Orthography::from_str(value.trim())?);
            } else if let Some(value) = line.strip_prefix("bijective:") {
                bijective = value.trim() == "true";
            } else if let Some(value) = line.strip_prefix("passthrough:") {
                let value = value.strip_prefix(' ').unwrap_or(value);
                passthrough.extend(unescape_chars(value, lineno, &err)?);
            } else {
                let (pattern, replacement) = line
                    .split_once('\t')
                    .ok_or_else(|| err(lineno, "expected pattern<TAB>replacement".into()))?;
                if pattern.is_empty() {
                    return Err(err(lineno, "empty rule pattern".into()));
                }
                // Rules are stored lowercase; capitalization is restored
                // by case transfer at apply time.
                let pattern: Vec<char> = pattern.nfc().map(lower_char).collect();
                if !seen_patterns.insert(pattern.clone()) {
                    return Err(Error::DuplicatePattern {
                        pattern: pattern.iter().collect(),
                        line: lineno,
                    });
                }
                rules.push(Rule {
                    pattern,
                    replacement: replacement.nfc().map(lower_char).collect(),
                });
            }
        }

        let source = source
            .ok_or_else(|| err(0, "missing `source:` header".into()))?;
        let target = target
            .ok_or_else(|| err(0, "missing `target:` header".into()))?;

        // Longest pattern first; original order breaks length ties.
        rules.sort_by_key(|r| std::cmp::Reverse(r.pattern.len()));
        let max_pattern_len = rules.first().map_or(0, |r| r.pattern.len());

        Ok(TranslitTable {
            source,
            target,
            bijective,
            rules,
            passthrough,
            max_pattern_len,
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Iterate `(pattern, replacement)` pairs, longest pattern first.
    pub fn rules(&self) -> impl Iterator<Item = (String, String)> + '_ {
        self.rules
            .iter()
            .map(|r| (r.pattern.iter().collect(), r.replacement.iter().collect()))
    }

    /// Uppercase a character under the target alphabet's case pairs
    /// (`ı` pairs with `Í`, everything else follows Unicode).
    pub fn uppercase_char(c: char) -> char {
        upper_char(c)
    }

    /// Every character that can appear in converted output: replacement
    /// characters (both cases) plus the passthrough set.
    pub fn output_alphabet(&self) -> HashSet<char> {
        let mut set: HashSet<char> = self.passthrough.clone();
        for rule in &self.rules {
            for &c in &rule.replacement {
                set.insert(c);
                set.insert(upper_char(c));
            }
        }
        set
    }

    /// Characters the table can consume via rules (both cases).
    pub fn input_alphabet(&self) -> HashSet<char> {
        let mut set = HashSet::new();
        for rule in &self.rules {
            for &c in &rule.pattern {
                set.insert(c);
                set.insert(upper_char(c));
            }
        }
        set
    }

    fn matches_at(&self, chars: &[char], pos: usize) -> Option<&Rule> {
        let remaining = chars.len() - pos;
        self.rules.iter().find(|rule| {
            rule.pattern.len() <= remaining
                && rule
                    .pattern
                    .iter()
                    .zip(&chars[pos..pos + rule.pattern.len()])
                    .all(|(&p, &c)| lower_char(c) == p)
        })
    }
}

fn unescape_chars(
    value: &str,
    lineno: usize,
    err: &impl Fn(usize, String) -> Error,
) -> Result<Vec<char>> {
    let mut out = Vec::new();
    let mut it = value.chars();
    while let Some(c) = it.next() {
        if c == '\\' {
            match it.next() {
                Some('s') => out.push(' '),
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                other => {
                    return Err(err(
                        lineno,
                        format!("bad escape \\{}", other.map(String::from).unwrap_or_default()),
                    ))
                }
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// Case style of a matched slice, used to re-case the replacement.
enum MatchCase {
    AsIs,
    TitleFirst,
    AllCaps,
}

fn match_case(slice: &[char]) -> MatchCase {
    let cased: Vec<char> = slice.iter().copied().filter(|&c| is_cased(c)).collect();
    if cased.is_empty() {
        return MatchCase::AsIs;
    }
    let all_upper = cased.iter().all(|&c| c == upper_char(c) && c != lower_char(c));
    if all_upper && cased.len() >= 2 {
        MatchCase::AllCaps
    } else if cased[0] == upper_char(cased[0]) && cased[0] != lower_char(cased[0]) {
        MatchCase::TitleFirst
    } else {
        MatchCase::AsIs
    }
}

fn apply_case(replacement: &[char], case: MatchCase, out: &mut String) {
    match case {
        MatchCase::AsIs => out.extend(replacement.iter().copied()),
        MatchCase::AllCaps => out.extend(replacement.iter().map(|&c| upper_char(c))),
        MatchCase::TitleFirst => {
            let mut it = replacement.iter();
            if let Some(&first) = it.next() {
                out.push(upper_char(first));
            }
            out.extend(it.copied());
        }
    }
}

/// Rewrite `text` left to right with longest-match rules.
///
/// Deterministic and pure: the same `(text, table)` always yields the same
/// bytes. Unmatched characters outside the passthrough set are copied and
/// reported in [`TranslitReport::unmapped`].
pub fn transliterate(text: &str, table: &TranslitTable) -> TranslitReport {
    let chars: Vec<char> = text.nfc().collect();
    let mut converted = String::with_capacity(text.len());
    let mut unmapped = Vec::new();

    let mut pos = 0;
    while pos < chars.len() {
        if table.max_pattern_len > 0 {
            if let Some(rule) = table.matches_at(&chars, pos) {
                let matched = &chars[pos..pos + rule.pattern.len()];
                apply_case(&rule.replacement, match_case(matched), &mut converted);
                pos += rule.pattern.len();
                continue;
            }
        }
        let c = chars[pos];
        if !table.passthrough.contains(&c) {
            unmapped.push((pos, c));
        }
        converted.push(c);
        pos += 1;
    }

    TranslitReport { converted, unmapped }
}

/// True iff `backward(forward(text))` reproduces the NFC form of `text`
/// exactly and neither pass reported an unmapped character.
///
/// Comparison is over the canonical composed form, matching the
/// normalization [`transliterate`] applies before matching.
pub fn round_trip_check(
    text: &str,
    forward: &TranslitTable,
    backward: &TranslitTable,
) -> Result<bool> {
    if forward.source != backward.target || forward.target != backward.source {
        return Err(Error::OrthographyMismatch {
            fwd_src: forward.source.to_string(),
            fwd_tgt: forward.target.to_string(),
            bwd_src: backward.source.to_string(),
            bwd_tgt: backward.target.to_string(),
        });
    }
    let there = transliterate(text, forward);
    if !there.is_clean() {
        return Ok(false);
    }
    let back = transliterate(&there.converted, backward);
    if !back.is_clean() {
        return Ok(false);
    }
    let canonical: String = text.nfc().collect();
    Ok(back.converted == canonical)
}

/// Convenience loader for the forward/backward pair used by
/// [`round_trip_check`].
pub fn load_table(path: impl AsRef<Path>) -> Result<TranslitTable> {
    TranslitTable::load(path)
}
