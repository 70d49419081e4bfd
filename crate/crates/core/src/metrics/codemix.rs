use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::SentenceRecord;

/// Language tag -> lowercase word set.
pub type Lexicons = BTreeMap<String, HashSet<String>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMPatternStats {
    pub sentences: usize,
    pub switch_points_per_sentence: f64,
    pub total_switch_points: usize,
    pub total_tokens: usize,
    pub known_tokens: usize,
    /// Share of all tokens tagged with each language; the remainder up to 1
    /// is unknown tokens.
    pub lang_token_ratio: BTreeMap<String, f64>,
    /// Language with the largest ratio; `None` when no token is known or
    /// the top two tie.
    pub dominant_language: Option<String>,
}

fn normalize_token(token: &str) -> String {
    token.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Tags a token with the single lexicon containing it; tokens found in no
/// lexicon or in several are unknown.
fn tag<'a>(token: &str, lexicons: &'a Lexicons) -> Option<&'a str> {
    let mut hits = lexicons
        .iter()
        .filter(|(_, words)| words.contains(token))
        .map(|(lang, _)| lang.as_str());
    match (hits.next(), hits.next()) {
        (Some(lang), None) => Some(lang),
        _ => None,
    }
}

/// Lexicon-based language tagging. A switch point is a pair of adjacent
/// known tokens with different tags; unknown tokens are skipped.
pub fn cm_stats(records: &[SentenceRecord], lexicons: &Lexicons) -> Result<CMPatternStats, MetricsError> {
    if lexicons.len() < 2 {
        return Err(MetricsError::Config(
            "lexicons for both languages of the pair are required".into(),
        ));
    }
    if let Some((lang, _)) = lexicons.iter().find(|(_, words)| words.is_empty()) {
        return Err(MetricsError::Config(format!("lexicon for {lang:?} is empty")));
    }
    let mut per_lang: BTreeMap<String, usize> = lexicons.keys().map(|k| (k.clone(), 0)).collect();
    let mut total_tokens = 0;
    let mut switches = 0;
    for record in records {
        let mut previous: Option<&str> = None;
        for token in record.text.split_whitespace() {
            total_tokens += 1;
            let Some(lang) = tag(&normalize_token(token), lexicons) else {
                continue;
            };
            *per_lang.get_mut(lang).expect("tag comes from lexicons") += 1;
            if previous.is_some_and(|p| p != lang) {
                switches += 1;
            }
            previous = Some(lang);
        }
    }
    let known_tokens: usize = per_lang.values().sum();
    let lang_token_ratio: BTreeMap<String, f64> = per_lang
        .iter()
        .map(|(lang, &n)| {
            let r = if total_tokens == 0 {
                0.0
            } else {
                n as f64 / total_tokens as f64
            };
            (lang.clone(), r)
        })
        .collect();
    let mut ranked: Vec<(&String, usize)> = per_lang.iter().map(|(l, &n)| (l, n)).collect();
    ranked.sort_by_key(|(_, n)| std::cmp::Reverse(*n));
    let dominant_language = match ranked.as_slice() {
        [(lang, top), rest @ ..] if *top > 0 && rest.first().is_none_or(|(_, n)| n < top) => Some((*lang).clone()),
        _ => None,
    };
    Ok(CMPatternStats {
        sentences: records.len(),
        switch_points_per_sentence: if records.is_empty() {
            0.0
        } else {
            switches as f64 / records.len() as f64
        },
        total_switch_points: switches,
        total_tokens,
        known_tokens,
        lang_token_ratio,
        dominant_language,
    })
}
