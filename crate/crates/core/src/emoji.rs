//! Emoji to English description lookup.
//!
//! The bundled table maps every emoji sequence (including skin-tone and ZWJ
//! variants) to its CLDR short name, lowercased with underscores turned into
//! spaces, e.g. `😂` -> `face with tears of joy`.

use std::collections::HashMap;
use std::sync::OnceLock;

const BUNDLED: &str = include_str!("../data/emoji.tsv");

#[derive(Debug, Clone)]
pub struct EmojiTable {
    entries: HashMap<String, String>,
    /// Longest key, in chars.
    max_chars: usize,
}

impl EmojiTable {
    /// Parses `emoji<TAB>description` lines. Blank lines are ignored.
    pub fn from_tsv(source: &str) -> Self {
        let mut entries = HashMap::new();
        let mut max_chars = 0;
        for line in source.lines() {
            let Some((emoji, desc)) = line.split_once('\t') else {
                continue;
            };
            if emoji.is_empty() {
                continue;
            }
            max_chars = max_chars.max(emoji.chars().count());
            entries.insert(emoji.to_string(), desc.trim().to_lowercase().replace('_', " "));
        }
        Self { entries, max_chars }
    }

    /// The table shipped with the crate.
    pub fn bundled() -> &'static EmojiTable {
        static TABLE: OnceLock<EmojiTable> = OnceLock::new();
        TABLE.get_or_init(|| EmojiTable::from_tsv(BUNDLED))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn describe(&self, emoji: &str) -> Option<&str> {
        self.entries.get(emoji).map(String::as_str)
    }

    /// Replaces every emoji with ` <description> `, matching the longest
    /// sequence at each position. Whitespace is not collapsed here.
    pub fn replace_all(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let boundaries: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        let mut pos = 0;
        while pos + 1 < boundaries.len() {
            let start = boundaries[pos];
            let longest = (pos + 1..boundaries.len())
                .take(self.max_chars)
                .rev()
                .find_map(|end| self.entries.get(&text[start..boundaries[end]]).map(|desc| (end, desc)));
            match longest {
                Some((end, desc)) => {
                    out.push(' ');
                    out.push_str(desc);
                    out.push(' ');
                    pos = end;
                }
                None => {
                    out.push_str(&text[start..boundaries[pos + 1]]);
                    pos += 1;
                }
            }
        }
        out
    }
}
