use std::sync::OnceLock;

use regex::Regex;

use crate::corpus::Sentiment;

/// Separator between sentence and label in generated lines.
pub const DELIMITER: &str = "|||";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedBatch {
    pub accepted: Vec<(String, Sentiment)>,
    pub rejected: Vec<String>,
}

impl ParsedBatch {
    pub fn total_lines(&self) -> usize {
        self.accepted.len() + self.rejected.len()
    }
}

fn enumeration_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:\d+[.)]|[-*•])\s+").unwrap())
}

fn parse_line(line: &str, classes: &[Sentiment]) -> Option<(String, Sentiment)> {
    let line = enumeration_re().replace(line.trim(), "");
    let (text, label) = line.rsplit_once(DELIMITER)?;
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if text.is_empty() || text.contains(DELIMITER) {
        return None;
    }
    let label = Sentiment::from_raw(label)?;
    classes.contains(&label).then_some((text, label))
}

/// Splits a model reply into accepted `(text, label)` pairs and rejected
/// lines. Blank lines are ignored. A leading `N.`, `N)`, `-` or `*` is
/// tolerated; labels match case-insensitively.
pub fn parse_generation(response: &str, classes: &[Sentiment]) -> ParsedBatch {
    let mut batch = ParsedBatch::default();
    for line in response.lines().filter(|l| !l.trim().is_empty()) {
        match parse_line(line, classes) {
            Some(pair) => batch.accepted.push(pair),
            None => batch.rejected.push(line.to_string()),
        }
    }
    batch
}

/// Maps a zero-shot classification reply onto a label: an exact label
/// (ignoring case and surrounding punctuation) wins, otherwise exactly one
/// label name must occur as a substring.
pub fn parse_label_reply(reply: &str) -> Option<Sentiment> {
    let lowered = reply.to_lowercase();
    let trimmed = lowered.trim_matches(|c: char| !c.is_alphanumeric());
    if let Some(label) = Sentiment::from_raw(trimmed) {
        return Some(label);
    }
    let mut hits = Sentiment::ALL.iter().filter(|s| lowered.contains(s.as_str()));
    match (hits.next(), hits.next()) {
        (Some(label), None) => Some(*label),
        _ => None,
    }
}
