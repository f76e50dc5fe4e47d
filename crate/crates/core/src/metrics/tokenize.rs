//! The mteval-v13a tokenization used for BLEU: punctuation is split off,
//! except periods and commas inside numbers, and dashes after digits are
//! separated. Case is left untouched.

use std::sync::LazyLock;

use regex::Regex;

static PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([\{-\~\[-\x60 -\&\(-\+\:-\@/])").unwrap());
static PERIOD_COMMA_AFTER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([^0-9])([\.,])").unwrap());
static PERIOD_COMMA_BEFORE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([\.,])([^0-9])").unwrap());
static DASH_AFTER_DIGIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([0-9])(-)").unwrap());

/// Tokenize one segment.
pub fn tokenize_13a(line: &str) -> Vec<String> {
    let mut s = line.replace("<skipped>", "");
    s = s.replace("-\n", "").replace('\n', " ");
    s = s
        .replace("&quot;", "\"")
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">");

    let s = PUNCT.replace_all(&s, " $1 ");
    let s = PERIOD_COMMA_AFTER.replace_all(&s, "$1 $2 ");
    let s = PERIOD_COMMA_BEFORE.replace_all(&s, " $1 $2");
    let s = DASH_AFTER_DIGIT.replace_all(&s, "$1 $2 ");

    s.split_whitespace().map(str::to_string).collect()
}
