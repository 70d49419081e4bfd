use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::endpoint::{send_with_retries, ChatEndpoint, ChatMessage, ChatRequest, TokenUsage};
use super::parse::parse_label_reply;
use super::prompt::build_zero_shot_prompt;
use super::{GenerationConfig, GenerationError};
use crate::corpus::{SentenceRecord, Sentiment};
use crate::metrics::Predicted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotPrediction {
    pub id: String,
    pub prediction: Predicted<Sentiment>,
    pub reply: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotOutcome {
    pub predictions: Vec<ZeroShotPrediction>,
    pub invalid: usize,
    pub usage: TokenUsage,
}

/// Classifies each record with an instruction-only prompt. Replies that do
/// not map onto a unique label are kept as `Predicted::Invalid`.
pub fn zero_shot_predict(
    records: &[SentenceRecord],
    config: &GenerationConfig,
    endpoint: &dyn ChatEndpoint,
) -> Result<ZeroShotOutcome, GenerationError> {
    config.validate()?;
    if records.is_empty() {
        return Err(GenerationError::Config("no records to classify".into()));
    }
    let policy = config.retry_policy();
    let mut predictions = Vec::with_capacity(records.len());
    let mut usage = TokenUsage::default();
    for chunk in records.chunks(config.parallelism) {
        let replies: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|record| {
                    let request = ChatRequest {
                        model: config.model_id.clone(),
                        messages: vec![ChatMessage::user(build_zero_shot_prompt(
                            &record.lang_pair,
                            &record.text,
                        ))],
                        temperature: config.temperature,
                    };
                    let policy = &policy;
                    scope.spawn(move || send_with_retries(endpoint, &request, policy))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("request worker panicked"))
                .collect()
        });
        for (record, reply) in chunk.iter().zip(replies) {
            match reply {
                Ok((exchange, _)) => {
                    if let Some(u) = exchange.usage {
                        usage += u;
                    }
                    let prediction =
                        parse_label_reply(&exchange.response_text).map_or(Predicted::Invalid, Predicted::Label);
                    predictions.push(ZeroShotPrediction {
                        id: record.id.clone(),
                        prediction,
                        reply: exchange.response_text,
                    });
                }
                Err((err, _)) => {
                    persist(config.partial_path.as_deref(), &predictions)?;
                    return Err(GenerationError::ZeroShotAborted {
                        record_id: record.id.clone(),
                        reason: err.to_string(),
                        partial: predictions,
                    });
                }
            }
        }
    }
    let invalid = predictions
        .iter()
        .filter(|p| p.prediction == Predicted::Invalid)
        .count();
    Ok(ZeroShotOutcome {
        predictions,
        invalid,
        usage,
    })
}

fn persist(path: Option<&Path>, predictions: &[ZeroShotPrediction]) -> Result<(), GenerationError> {
    let Some(path) = path else {
        return Ok(());
    };
    let mut out = String::new();
    for p in predictions {
        out.push_str(&serde_json::to_string(p).expect("predictions serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| GenerationError::Persist {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::endpoint::{ChatResponse, EndpointError};
    use crate::generation::MockEndpoint;

    struct Scripted(Vec<&'static str>);

    impl ChatEndpoint for Scripted {
        fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
            let text = &request.messages[0].content;
            let idx: usize = text.rsplit(' ').next().unwrap().parse().unwrap();
            Ok(ChatResponse {
                text: self.0[idx].to_string(),
                usage: TokenUsage {
                    input_tokens: 10,
                    output_tokens: 2,
                },
            })
        }
    }

    fn records(n: usize) -> Vec<SentenceRecord> {
        (0..n)
            .map(|i| SentenceRecord::natural(format!("r{i}"), format!("text {i}"), Sentiment::Neutral))
            .collect()
    }

    #[test]
    fn replies_map_to_predictions() {
        let ep = Scripted(vec!["negative", "I think this is Positive.", "both good and bad"]);
        let out = zero_shot_predict(&records(3), &GenerationConfig::default(), &ep).unwrap();
        let preds: Vec<_> = out.predictions.iter().map(|p| p.prediction).collect();
        assert_eq!(
            preds,
            vec![
                Predicted::Label(Sentiment::Negative),
                Predicted::Label(Sentiment::Positive),
                Predicted::Invalid
            ]
        );
        assert_eq!(out.invalid, 1);
        assert_eq!(out.usage.input_tokens, 30);
    }

    #[test]
    fn failure_persists_partial_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.jsonl");
        let config = GenerationConfig {
            parallelism: 1,
            max_retries: 0,
            partial_path: Some(path.clone()),
            ..GenerationConfig::default()
        };
        let err = zero_shot_predict(&records(5), &config, &MockEndpoint::new(0).failing_from_call(3)).unwrap_err();
        match err {
            GenerationError::ZeroShotAborted { record_id, partial, .. } => {
                assert_eq!(record_id, "r3");
                assert_eq!(partial.len(), 3);
            }
            other => panic!("unexpected {other}"),
        }
        assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 3);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(zero_shot_predict(&[], &GenerationConfig::default(), &MockEndpoint::new(0)).is_err());
    }
}
