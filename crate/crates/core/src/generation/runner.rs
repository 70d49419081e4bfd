use std::collections::VecDeque;
use std::path::Path;
use std::thread;

use log::{debug, info};

use super::demos::sample_demonstrations;
use super::endpoint::{send_with_retries, ChatEndpoint, ChatMessage, ChatRequest};
use super::parse::parse_generation;
use super::prompt::{build_prompt, TokenCounter, WhitespaceEstimate};
use super::{GenerationConfig, GenerationError, GenerationJob, PromptSpec};
use crate::corpus::{write_dataset, Provenance, SentenceRecord, Sentiment};

struct Outcome {
    index: usize,
    demo_seed: u64,
    estimate: u64,
    result: Result<(super::ChatExchange, u32), (super::EndpointError, u32)>,
}

/// Runs the generation loop with the default whitespace token estimate.
pub fn run_generation(
    job: &mut GenerationJob,
    spec: &PromptSpec,
    config: &GenerationConfig,
    train: &[SentenceRecord],
    endpoint: &dyn ChatEndpoint,
) -> Result<Vec<SentenceRecord>, GenerationError> {
    run_generation_with(job, spec, config, train, endpoint, &WhitespaceEstimate)
}

/// Requests batches until `job.target_size` sentences are accepted.
///
/// Request `i` samples its demonstrations with seed `job.seed + i`. Up to
/// `config.parallelism` requests are in flight per wave, and a wave never
/// holds more requests than the remaining target needs at full batch
/// yield. Replies are consumed strictly by request index, so the output
/// does not depend on completion order. Overshoot is truncated in arrival
/// order.
pub fn run_generation_with(
    job: &mut GenerationJob,
    spec: &PromptSpec,
    config: &GenerationConfig,
    train: &[SentenceRecord],
    endpoint: &dyn ChatEndpoint,
    counter: &dyn TokenCounter,
) -> Result<Vec<SentenceRecord>, GenerationError> {
    spec.validate()?;
    config.validate()?;
    // fail fast before any request if the pools are too small
    sample_demonstrations(train, spec.shots, job.seed)?;

    let policy = config.retry_policy();
    let classes = Sentiment::ALL;
    let mut records: Vec<SentenceRecord> = Vec::with_capacity(job.target_size);
    let mut window: VecDeque<(usize, usize)> = VecDeque::with_capacity(config.reject_window);

    while records.len() < job.target_size {
        let remaining = job.target_size - records.len();
        let wave = config.parallelism.min(remaining.div_ceil(spec.batch_size));
        let first = job.requests_sent;

        let mut prepared = Vec::with_capacity(wave);
        for index in first..first + wave {
            let demo_seed = job.seed.wrapping_add(index as u64);
            let demos = sample_demonstrations(train, spec.shots, demo_seed)?;
            let prompt = build_prompt(spec, &demos, counter);
            let request = ChatRequest {
                model: config.model_id.clone(),
                messages: vec![ChatMessage::user(prompt.text)],
                temperature: config.temperature,
            };
            prepared.push((index, demo_seed, prompt.token_estimate, request));
        }

        let outcomes: Vec<Outcome> = thread::scope(|scope| {
            let handles: Vec<_> = prepared
                .iter()
                .map(|(index, demo_seed, estimate, request)| {
                    let policy = &policy;
                    scope.spawn(move || Outcome {
                        index: *index,
                        demo_seed: *demo_seed,
                        estimate: *estimate,
                        result: send_with_retries(endpoint, request, policy),
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("request worker panicked"))
                .collect()
        });
        job.requests_sent += wave;

        for outcome in outcomes {
            let (exchange, _) = match outcome.result {
                Ok(ok) => ok,
                Err((err, attempts)) => {
                    job.produced = records.len().min(job.target_size);
                    persist_partial(config.partial_path.as_deref(), &records)?;
                    return Err(GenerationError::Aborted {
                        request_index: outcome.index,
                        attempts,
                        reason: err.to_string(),
                        partial: records,
                    });
                }
            };
            job.token_usage.input_tokens += outcome.estimate;
            job.token_usage.output_tokens += exchange.usage.map_or(0, |u| u.output_tokens);

            let parsed = parse_generation(&exchange.response_text, &classes);
            job.rejected_lines += parsed.rejected.len();
            job.shortfall_lines += spec.batch_size.saturating_sub(parsed.total_lines());
            debug!(
                "request {}: {} accepted, {} rejected",
                outcome.index,
                parsed.accepted.len(),
                parsed.rejected.len()
            );
            if window.len() == config.reject_window {
                window.pop_front();
            }
            window.push_back((parsed.accepted.len(), parsed.rejected.len()));

            for (text, label) in parsed.accepted {
                let n = records.len();
                let mut record = SentenceRecord::new(
                    format!("llm-{}-{n:06}", job.seed),
                    text,
                    label,
                    spec.lang_pair.clone(),
                    Provenance::SyntheticLlm,
                );
                record.meta.insert("request".into(), outcome.index.to_string());
                record.meta.insert("demo_seed".into(), outcome.demo_seed.to_string());
                records.push(record);
            }
        }
        job.produced = records.len().min(job.target_size);

        if window.len() == config.reject_window {
            let (accepted, rejected) = window.iter().fold((0, 0), |(a, r), (wa, wr)| (a + wa, r + wr));
            let total = accepted + rejected;
            let rate = if total == 0 {
                1.0
            } else {
                rejected as f64 / total as f64
            };
            if rate > config.reject_ceiling {
                persist_partial(config.partial_path.as_deref(), &records)?;
                return Err(GenerationError::DegenerateOutput {
                    rate,
                    window: config.reject_window,
                });
            }
        }
    }

    records.truncate(job.target_size);
    job.produced = records.len();
    info!(
        "generated {} records in {} requests ({} rejected lines)",
        job.produced, job.requests_sent, job.rejected_lines
    );
    Ok(records)
}

fn persist_partial(path: Option<&Path>, records: &[SentenceRecord]) -> Result<(), GenerationError> {
    let Some(path) = path else {
        return Ok(());
    };
    write_dataset(path, records).map_err(|e| GenerationError::Persist {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::MockEndpoint;

    fn train() -> Vec<SentenceRecord> {
        (0..60)
            .map(|i| {
                SentenceRecord::natural(
                    format!("n{i}"),
                    format!("sentence number {i} pues yes"),
                    Sentiment::ALL[i % 3],
                )
            })
            .collect()
    }

    fn fast_config() -> GenerationConfig {
        GenerationConfig {
            retry_base_delay_ms: 0,
            retry_max_delay_ms: 0,
            ..GenerationConfig::default()
        }
    }

    #[test]
    fn ceiling_division_and_truncation() {
        let mut job = GenerationJob::new(120, 7);
        let out = run_generation(
            &mut job,
            &PromptSpec::default(),
            &fast_config(),
            &train(),
            &MockEndpoint::new(1),
        )
        .unwrap();
        assert_eq!(job.requests_sent, 3);
        assert_eq!(out.len(), 120);
        assert_eq!(job.produced, 120);
        assert!(out.iter().all(|r| r.provenance == Provenance::SyntheticLlm));
    }

    #[test]
    fn token_usage_accumulates() {
        let mut job = GenerationJob::new(100, 3);
        run_generation(
            &mut job,
            &PromptSpec::default(),
            &fast_config(),
            &train(),
            &MockEndpoint::new(1),
        )
        .unwrap();
        assert!(job.token_usage.input_tokens > 0);
        assert!(job.token_usage.output_tokens > 0);
    }

    #[test]
    fn abort_keeps_partial_results() {
        let dir = tempfile::tempdir().unwrap();
        let partial = dir.path().join("partial.jsonl");
        let config = GenerationConfig {
            parallelism: 1,
            partial_path: Some(partial.clone()),
            ..fast_config()
        };
        let mut job = GenerationJob::new(500, 1);
        let err = run_generation(
            &mut job,
            &PromptSpec::default(),
            &config,
            &train(),
            &MockEndpoint::new(1).failing_from_call(2),
        )
        .unwrap_err();
        match err {
            GenerationError::Aborted {
                request_index,
                partial: kept,
                ..
            } => {
                assert_eq!(request_index, 2);
                assert_eq!(kept.len(), 100);
            }
            other => panic!("unexpected {other}"),
        }
        let saved = std::fs::read_to_string(partial).unwrap();
        assert_eq!(saved.lines().count(), 100);
    }

    #[test]
    fn transient_errors_are_absorbed() {
        let mut job = GenerationJob::new(100, 1);
        let out = run_generation(
            &mut job,
            &PromptSpec::default(),
            &fast_config(),
            &train(),
            &MockEndpoint::new(1).with_transient_failures(2),
        )
        .unwrap();
        assert_eq!(out.len(), 100);
        assert_eq!(job.requests_sent, 2);
    }

    #[test]
    fn degenerate_endpoint_trips_breaker() {
        let mut job = GenerationJob::new(10_000, 1);
        let err = run_generation(
            &mut job,
            &PromptSpec::default(),
            &fast_config(),
            &train(),
            &MockEndpoint::new(1).with_malformed_rate(0.9),
        )
        .unwrap_err();
        assert!(matches!(err, GenerationError::DegenerateOutput { window: 10, .. }));
    }

    #[test]
    fn insufficient_demonstrations_fail_before_requests() {
        let mock = MockEndpoint::new(1);
        let mut job = GenerationJob::new(10, 1);
        let err = run_generation(&mut job, &PromptSpec::default(), &fast_config(), &train()[..6], &mock).unwrap_err();
        assert!(matches!(err, GenerationError::InsufficientDemonstrations { .. }));
        assert_eq!(mock.calls(), 0);
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let run = |parallelism| {
            let mut job = GenerationJob::new(300, 5);
            let config = GenerationConfig {
                parallelism,
                ..fast_config()
            };
            let out = run_generation(
                &mut job,
                &PromptSpec::default(),
                &config,
                &train(),
                &MockEndpoint::new(4).with_malformed_rate(0.1),
            )
            .unwrap();
            (out, job.rejected_lines)
        };
        let (a, ra) = run(1);
        let (b, rb) = run(4);
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }
}
