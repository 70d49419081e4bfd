use serde::{Deserialize, Serialize};

use super::parse::DELIMITER;
use super::PromptSpec;
use crate::corpus::{LangPair, SentenceRecord, Sentiment};

/// Default generation instruction. `{lang}` is substituted at build time.
pub const DEFAULT_INSTRUCTION: &str = "You are a bilingual {lang} speaker writing social media \
comments. Write realistic code-mixed sentences that switch between both languages within the \
same sentence, the way bilingual people actually type online: informal, short, sometimes with \
slang, abbreviations or spelling mistakes, and about varied everyday topics. Do not translate \
whole sentences and do not stay in a single language. Each sentence must carry the sentiment \
given by its label. Use the examples below only as a guide to style and label meaning; do not \
copy them.";

/// Pluggable token counter for prompt cost estimates.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> f64;
}

impl<F> TokenCounter for F
where
    F: Fn(&str) -> f64 + Send + Sync,
{
    fn count(&self, text: &str) -> f64 {
        self(text)
    }
}

/// Whitespace word count times 1.3. A rough estimate, not a tokenizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceEstimate;

impl TokenCounter for WhitespaceEstimate {
    fn count(&self, text: &str) -> f64 {
        text.split_whitespace().count() as f64 * 1.3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltPrompt {
    pub text: String,
    /// Instruction and directive tokens plus the demonstration lines.
    pub token_estimate: u64,
}

fn instruction_text(spec: &PromptSpec) -> String {
    spec.instruction.replace("{lang}", &spec.lang_pair.display_name())
}

fn directive(batch_size: usize, lang: &LangPair) -> String {
    let labels: Vec<&str> = Sentiment::ALL.iter().map(|s| s.as_str()).collect();
    format!(
        "Generate exactly {batch_size} new {} code-mixed sentences. Write one per line in the \
         format <sentence> {DELIMITER} <label>, where <label> is one of {}. Do not add any other \
         text.",
        lang.display_name(),
        labels.join(", ")
    )
}

pub(crate) fn render_demo(record: &SentenceRecord) -> String {
    let text: String = record.text.split_whitespace().collect::<Vec<_>>().join(" ");
    format!("{text} {DELIMITER} {}", record.label)
}

/// Instruction, demonstrations (one per line), then the output directive.
/// With no demonstrations the prompt is instruction plus directive.
pub fn build_prompt(spec: &PromptSpec, demos: &[SentenceRecord], counter: &dyn TokenCounter) -> BuiltPrompt {
    let instruction = instruction_text(spec);
    let directive = directive(spec.batch_size, &spec.lang_pair);
    let lines: Vec<String> = demos.iter().map(render_demo).collect();
    let mut text = instruction.clone();
    text.push_str("\n\n");
    if !lines.is_empty() {
        text.push_str("Examples:\n");
        for line in &lines {
            text.push_str(line);
            text.push('\n');
        }
        text.push('\n');
    }
    text.push_str(&directive);

    let fixed = format!("{instruction}\n\n{directive}");
    let estimate = counter.count(&fixed) + lines.iter().map(|l| counter.count(l)).sum::<f64>();
    BuiltPrompt {
        text,
        token_estimate: estimate.round() as u64,
    }
}

/// Instruction-only classification prompt for one sentence.
pub fn build_zero_shot_prompt(lang: &LangPair, text: &str) -> String {
    format!(
        "Classify the sentiment of the following {} code-mixed social media comment as \
         positive, negative, or neutral. Answer with the label only.\n\nComment: {}",
        lang.display_name(),
        text.split_whitespace().collect::<Vec<_>>().join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo(i: usize, words: usize, label: Sentiment) -> SentenceRecord {
        let text = (0..words).map(|w| format!("w{i}_{w}")).collect::<Vec<_>>().join(" ");
        SentenceRecord::natural(format!("d{i}"), text, label)
    }

    #[test]
    fn token_estimate_for_published_configuration() {
        // 14 words + "|||" + label = 16 whitespace tokens -> 20.8 estimated tokens per demo
        let demos: Vec<_> = (0..15).map(|i| demo(i, 14, Sentiment::ALL[i % 3])).collect();
        let spec = PromptSpec::default();
        let fixed_prefix = instruction_text(&spec);
        let counter = move |t: &str| {
            if t.starts_with(&fixed_prefix) {
                330.0
            } else {
                WhitespaceEstimate.count(t)
            }
        };
        let built = build_prompt(&spec, &demos, &counter);
        assert_eq!(built.token_estimate, 642);
    }

    #[test]
    fn zero_demos_is_instruction_plus_directive() {
        let spec = PromptSpec {
            shots: 0,
            ..PromptSpec::default()
        };
        let built = build_prompt(&spec, &[], &WhitespaceEstimate);
        let expected = format!(
            "{}\n\n{}",
            instruction_text(&spec),
            directive(spec.batch_size, &spec.lang_pair)
        );
        assert_eq!(built.text, expected);
        assert!(!built.text.contains("Examples:"));
    }

    #[test]
    fn demos_rendered_one_per_line() {
        let demos = vec![
            SentenceRecord::natural("a", "que  chido\tthe show", Sentiment::Positive),
            SentenceRecord::natural("b", "no me gusta this", Sentiment::Negative),
        ];
        let built = build_prompt(&PromptSpec::default(), &demos, &WhitespaceEstimate);
        assert!(built.text.contains("\nque chido the show ||| positive\n"));
        assert!(built.text.contains("\nno me gusta this ||| negative\n"));
        assert!(built.text.contains("Generate exactly 50 new Spanish-English"));
        assert!(built.text.contains("Spanish-English speaker"));
    }

    #[test]
    fn deterministic() {
        let demos: Vec<_> = (0..6).map(|i| demo(i, 5, Sentiment::ALL[i % 3])).collect();
        let a = build_prompt(&PromptSpec::default(), &demos, &WhitespaceEstimate);
        let b = build_prompt(&PromptSpec::default(), &demos, &WhitespaceEstimate);
        assert_eq!(a, b);
    }
}
