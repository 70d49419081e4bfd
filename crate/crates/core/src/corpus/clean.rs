use std::sync::OnceLock;

use regex::Regex;

use super::SentenceRecord;
use crate::emoji::EmojiTable;

#[derive(Debug, Clone, Copy)]
pub struct PreprocessOptions<'a> {
    pub emoji: &'a EmojiTable,
    /// Remove whole `#tag`/`@user` tokens instead of only their markers.
    pub drop_hashtag_tokens: bool,
}

impl Default for PreprocessOptions<'static> {
    fn default() -> Self {
        Self {
            emoji: EmojiTable::bundled(),
            drop_hashtag_tokens: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cleaned {
    Kept(SentenceRecord),
    Dropped { id: String },
}

impl Cleaned {
    pub fn kept(self) -> Option<SentenceRecord> {
        match self {
            Cleaned::Kept(r) => Some(r),
            Cleaned::Dropped { .. } => None,
        }
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").unwrap())
}

const MARKERS: [char; 2] = ['#', '@'];

/// Emoji to description, URL removal, `#`/`@` marker stripping and
/// whitespace collapsing, in that order.
pub fn clean_text(text: &str, options: &PreprocessOptions<'_>) -> String {
    let described = options.emoji.replace_all(text);
    let without_urls = url_re().replace_all(&described, " ");
    without_urls
        .split_whitespace()
        .filter_map(|token| {
            let stripped = token.trim_start_matches(MARKERS);
            if stripped.len() != token.len() && options.drop_hashtag_tokens {
                return None;
            }
            (!stripped.is_empty()).then_some(stripped)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn preprocess(record: SentenceRecord, options: &PreprocessOptions<'_>) -> Cleaned {
    let text = clean_text(&record.text, options);
    if text.is_empty() {
        Cleaned::Dropped { id: record.id }
    } else {
        Cleaned::Kept(SentenceRecord { text, ..record })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentiment;
    use proptest::prelude::*;

    fn clean(s: &str) -> String {
        clean_text(s, &PreprocessOptions::default())
    }

    #[test]
    fn url_removed_and_emoji_described() {
        assert_eq!(
            clean("Get ready! https://t.co/x 😂"),
            "Get ready! face with tears of joy"
        );
    }

    #[test]
    fn whitespace_only_is_dropped() {
        let r = SentenceRecord::natural("x", "   ", Sentiment::Neutral);
        assert_eq!(
            preprocess(r, &PreprocessOptions::default()),
            Cleaned::Dropped { id: "x".into() }
        );
    }

    #[test]
    fn hashtag_marker_stripped_token_kept() {
        assert_eq!(
            clean("#PerksDeLosFinales y no podia entrar"),
            "PerksDeLosFinales y no podia entrar"
        );
        assert_eq!(clean("@maria jajaja"), "maria jajaja");
    }

    #[test]
    fn hashtag_tokens_dropped_on_request() {
        let opts = PreprocessOptions {
            drop_hashtag_tokens: true,
            ..PreprocessOptions::default()
        };
        assert_eq!(clean_text("#Perks y @maria no", &opts), "y no");
    }

    #[test]
    fn www_links_and_bare_markers() {
        assert_eq!(clean("mira www.example.com # @ ya"), "mira ya");
    }

    #[test]
    fn emoji_only_text_survives_as_description() {
        assert_eq!(clean("😦"), "frowning face with open mouth");
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        let pieces = prop::sample::select(vec![
            "hola",
            "world",
            " ",
            "  ",
            "#",
            "@",
            "#tag",
            "@user",
            "https://t.co/ab",
            "www.x.org",
            "😂",
            "👍🏽",
            "#️⃣",
            "*️⃣",
            "\t",
            "\n",
            "qué",
            "http",
            "://",
            "www",
            ".",
            "a#b",
            "ñ",
        ]);
        prop::collection::vec(pieces, 0..12).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(text in text_strategy(), drop in any::<bool>()) {
            let opts = PreprocessOptions { drop_hashtag_tokens: drop, ..PreprocessOptions::default() };
            let once = clean_text(&text, &opts);
            let twice = clean_text(&once, &opts);
            prop_assert_eq!(&once, &twice);
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
        }

        #[test]
        fn preprocess_is_idempotent_on_arbitrary_unicode(text in "\\PC{0,40}") {
            let opts = PreprocessOptions::default();
            let once = clean_text(&text, &opts);
            prop_assert_eq!(clean_text(&once, &opts), once);
        }
    }
}
