use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use parking_lot::Mutex;
use rand::seq::IndexedRandom;
use rand::Rng;
use regex::Regex;

use super::endpoint::{ChatEndpoint, ChatRequest, ChatResponse, EndpointError, TokenUsage};
use super::parse::DELIMITER;
use crate::corpus::{LangPair, Sentiment};
use crate::seed;

/// Deterministic in-process endpoint for tests and dry runs.
///
/// Replies depend only on the mock seed and the request content, never on
/// call order, so runs with parallel requests stay reproducible. Generation
/// prompts (containing `exactly N`) get `N` template sentences, each
/// replaced by a malformed line with probability `malformed_rate`; any other
/// prompt is treated as a zero-shot classification request.
#[derive(Debug)]
pub struct MockEndpoint {
    seed: u64,
    malformed_rate: f64,
    lang_pair: LangPair,
    /// Every call from this (0-based) index on fails fatally.
    fail_from_call: Option<usize>,
    /// Leading transient failures injected per distinct request.
    transient_failures: u32,
    calls: AtomicUsize,
    attempts: Mutex<HashMap<u64, u32>>,
}

impl MockEndpoint {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            malformed_rate: 0.0,
            lang_pair: LangPair::EsEn,
            fail_from_call: None,
            transient_failures: 0,
            calls: AtomicUsize::new(0),
            attempts: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_malformed_rate(mut self, rate: f64) -> Self {
        self.malformed_rate = rate.clamp(0.0, 1.0);
        self
    }

    pub fn with_lang_pair(mut self, lang_pair: LangPair) -> Self {
        self.lang_pair = lang_pair;
        self
    }

    pub fn failing_from_call(mut self, call: usize) -> Self {
        self.fail_from_call = Some(call);
        self
    }

    pub fn with_transient_failures(mut self, per_request: u32) -> Self {
        self.transient_failures = per_request;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

fn batch_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"exactly (\d+) ").unwrap())
}

fn estimate(text: &str) -> u64 {
    (text.split_whitespace().count() as f64 * 1.3).ceil() as u64
}

struct Lexicon {
    openers: [&'static [&'static str]; 3],
    subjects: &'static [&'static str],
    comments: [&'static [&'static str]; 3],
}

const ES_EN: Lexicon = Lexicon {
    openers: [
        &[
            "que chido",
            "me encanta",
            "qué bonito",
            "está padrísimo",
            "ay que lindo",
            "muy bueno",
        ],
        &[
            "qué lata",
            "no manches",
            "qué horror",
            "me choca",
            "está bien feo",
            "ya me cansé",
        ],
        &["oye", "mañana", "hoy en la tarde", "alguien sabe", "creo que", "pues"],
    ],
    subjects: &[
        "this song",
        "the new movie",
        "my job",
        "this weather",
        "the game",
        "la clase de hoy",
        "my abuela's tamales",
        "el concierto",
        "the traffic",
        "mi jefe",
        "this show",
        "the bus",
    ],
    comments: [
        &[
            "is amazing",
            "was so good",
            "is the best",
            "made my day",
            "is awesome lol",
            "is beautiful",
        ],
        &[
            "is terrible",
            "was the worst",
            "is so annoying",
            "ruined my day",
            "is boring af",
            "sucks",
        ],
        &[
            "starts at 8",
            "is on tomorrow",
            "is downtown",
            "changed again",
            "is on channel 5",
            "is next week",
        ],
    ],
};

const ML_EN: Lexicon = Lexicon {
    openers: [
        &["adipoli", "pwoli", "super aanu", "ishtapettu", "mass", "polichu"],
        &[
            "waste aanu",
            "bore aanu",
            "onnum illa",
            "kashttam",
            "mosham",
            "thallipoli",
        ],
        &[
            "trailer kandu",
            "release eppozha",
            "nale",
            "njan",
            "ente friend",
            "ee week",
        ],
    ],
    subjects: &[
        "this movie",
        "the songs",
        "Lalettan's entry",
        "the climax",
        "the bgm",
        "the story",
        "first half",
        "second half",
        "the trailer",
        "the director",
        "the teaser",
        "the cast",
    ],
    comments: [
        &[
            "is fantastic",
            "was really good",
            "is the best",
            "goosebumps",
            "fully worth it",
            "loved it",
        ],
        &[
            "is too slow",
            "was disappointing",
            "is a flop",
            "makes no sense",
            "is overrated",
            "was bad",
        ],
        &[
            "comes friday",
            "is on youtube",
            "in theatres now",
            "is 2 hours",
            "out next month",
            "is in malayalam",
        ],
    ],
};

const MALFORMED: &[&str] = &[
    "Sure! Here are some more examples:",
    "{text} - {label}",
    "{text} |||",
    "||| {label}",
    "{text} ||| excited",
];

fn class_index(label: Sentiment) -> usize {
    Sentiment::ALL.iter().position(|s| *s == label).unwrap()
}

impl MockEndpoint {
    fn lexicon(&self) -> &'static Lexicon {
        match self.lang_pair {
            LangPair::MlEn => &ML_EN,
            _ => &ES_EN,
        }
    }

    fn sentence(&self, rng: &mut impl Rng, label: Sentiment) -> String {
        let lex = self.lexicon();
        let c = class_index(label);
        let opener = lex.openers[c].choose(rng).unwrap();
        let subject = lex.subjects.choose(rng).unwrap();
        let comment = lex.comments[c].choose(rng).unwrap();
        match rng.random_range(0..3) {
            0 => format!("{opener} {subject} {comment}"),
            1 => format!("{subject} {comment}, {opener}"),
            _ => format!("{opener}! {subject} {comment} jaja"),
        }
    }

    fn generate(&self, rng: &mut impl Rng, n: usize) -> String {
        let mut lines = Vec::with_capacity(n);
        for i in 0..n {
            let label = *Sentiment::ALL.choose(rng).unwrap();
            let text = self.sentence(rng, label);
            if rng.random_bool(self.malformed_rate) {
                let template = MALFORMED.choose(rng).unwrap();
                lines.push(template.replace("{text}", &text).replace("{label}", label.as_str()));
            } else if rng.random_bool(0.2) {
                lines.push(format!("{}. {text} {DELIMITER} {label}", i + 1));
            } else {
                lines.push(format!("{text} {DELIMITER} {label}"));
            }
        }
        lines.join("\n")
    }

    fn classify(&self, rng: &mut impl Rng, prompt: &str) -> String {
        let comment = prompt.rsplit("Comment:").next().unwrap_or(prompt).to_lowercase();
        let lex = self.lexicon();
        let cue = (0..3).find(|&c| {
            lex.openers[c]
                .iter()
                .chain(lex.comments[c].iter())
                .any(|w| comment.contains(w))
        });
        let label = match cue {
            Some(c) if rng.random_bool(0.8) => Sentiment::ALL[c],
            _ => *Sentiment::ALL.choose(rng).unwrap(),
        };
        match rng.random_range(0..20) {
            0 => "It is hard to say.".to_string(),
            1..=3 => format!("I think this is {}.", capitalize(label.as_str())),
            _ => label.to_string(),
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    chars
        .next()
        .map(|c| c.to_uppercase().collect::<String>() + chars.as_str())
        .unwrap_or_default()
}

impl ChatEndpoint for MockEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        if self.fail_from_call.is_some_and(|n| call >= n) {
            return Err(EndpointError::Fatal("injected failure".into()));
        }
        let prompt: String = request
            .messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        let key = seed::stable_hash(prompt.as_bytes());
        if self.transient_failures > 0 {
            let mut attempts = self.attempts.lock();
            let seen = attempts.entry(key).or_insert(0);
            if *seen < self.transient_failures {
                *seen += 1;
                return Err(EndpointError::Transient("injected rate limit".into()));
            }
        }
        let mut rng = seed::rng(seed::mix(self.seed, key));
        let text = match batch_re().captures(&prompt) {
            Some(caps) => {
                let n: usize = caps[1].parse().unwrap_or(50);
                self.generate(&mut rng, n)
            }
            None => self.classify(&mut rng, &prompt),
        };
        let usage = TokenUsage {
            input_tokens: estimate(&prompt),
            output_tokens: estimate(&text),
        };
        Ok(ChatResponse { text, usage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::endpoint::ChatMessage;
    use crate::generation::parse::{parse_generation, parse_label_reply};

    fn req(content: &str) -> ChatRequest {
        ChatRequest {
            model: "mock".into(),
            messages: vec![ChatMessage::user(content)],
            temperature: 0.6,
        }
    }

    #[test]
    fn clean_batches_parse_fully() {
        let mock = MockEndpoint::new(1);
        let r = mock.complete(&req("Generate exactly 50 new lines")).unwrap();
        let parsed = parse_generation(&r.text, &Sentiment::ALL);
        assert_eq!(parsed.accepted.len(), 50);
        assert!(parsed.rejected.is_empty());
        assert!(r.usage.output_tokens > 0);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let mock = MockEndpoint::new(1).with_malformed_rate(0.5);
        let r = mock.complete(&req("Generate exactly 200 new lines")).unwrap();
        let parsed = parse_generation(&r.text, &Sentiment::ALL);
        assert!(parsed.rejected.len() > 50, "{}", parsed.rejected.len());
        assert!(parsed.total_lines() <= 200);
    }

    #[test]
    fn replies_depend_on_content_not_order() {
        let mock = MockEndpoint::new(9);
        let a = mock.complete(&req("Generate exactly 5 x")).unwrap();
        let _ = mock.complete(&req("Generate exactly 6 y")).unwrap();
        let b = mock.complete(&req("Generate exactly 5 x")).unwrap();
        assert_eq!(a, b);
        let other = MockEndpoint::new(10).complete(&req("Generate exactly 5 x")).unwrap();
        assert_ne!(a.text, other.text);
    }

    #[test]
    fn classification_mode() {
        let mock = MockEndpoint::new(2);
        let mut parsed = 0;
        for i in 0..50 {
            let reply = mock
                .complete(&req(&format!("Classify ...\n\nComment: que chido this song {i}")))
                .unwrap();
            if parse_label_reply(&reply.text).is_some() {
                parsed += 1;
            }
        }
        assert!(parsed > 35);
    }

    #[test]
    fn injected_failures() {
        let mock = MockEndpoint::new(0).failing_from_call(1);
        assert!(mock.complete(&req("a")).is_ok());
        assert!(matches!(mock.complete(&req("a")), Err(EndpointError::Fatal(_))));

        let flaky = MockEndpoint::new(0).with_transient_failures(2);
        assert!(flaky.complete(&req("a")).is_err());
        assert!(flaky.complete(&req("a")).is_err());
        assert!(flaky.complete(&req("a")).is_ok());
    }
}
