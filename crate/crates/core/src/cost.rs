//! Closed-form cost models: crowd annotation (HIT arithmetic) versus LLM
//! generation (token arithmetic).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationCostModel {
    pub n_sentences: u64,
    /// Items shown per HIT, including quality-control items.
    pub per_hit: u64,
    /// Items per HIT that are actually annotated.
    pub annotated_per_hit: u64,
    pub price_per_hit: f64,
    /// Fraction of assignments rejected and reassigned, in `[0, 1)`.
    pub rejection_rate: f64,
    pub annotators_per_item: u64,
}

impl Default for AnnotationCostModel {
    fn default() -> Self {
        Self {
            n_sentences: 0,
            per_hit: 10,
            annotated_per_hit: 8,
            price_per_hit: 1.00,
            rejection_rate: 0.0,
            annotators_per_item: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationCost {
    pub hits: u64,
    /// Before the rejection surcharge and rounding.
    pub base_cost: f64,
    pub unrounded: f64,
    /// Rounded to the nearest whole currency unit.
    pub total: f64,
}

pub fn mturk_cost(model: &AnnotationCostModel) -> Result<AnnotationCost, CostError> {
    if model.annotated_per_hit == 0 {
        return Err(CostError::Config("annotated_per_hit must be at least 1".into()));
    }
    if model.annotated_per_hit > model.per_hit {
        return Err(CostError::Config(format!(
            "annotated_per_hit ({}) exceeds per_hit ({})",
            model.annotated_per_hit, model.per_hit
        )));
    }
    if !(0.0..1.0).contains(&model.rejection_rate) {
        return Err(CostError::Config("rejection_rate must be in [0, 1)".into()));
    }
    if model.price_per_hit < 0.0 {
        return Err(CostError::Config("price_per_hit must be nonnegative".into()));
    }
    let hits = model.n_sentences.div_ceil(model.annotated_per_hit);
    let base_cost = hits as f64 * model.price_per_hit * model.annotators_per_item as f64;
    // Rejected assignments are re-posted once at the same price.
    let unrounded = base_cost * (1.0 + model.rejection_rate);
    Ok(AnnotationCost {
        hits,
        base_cost,
        unrounded,
        total: unrounded.round(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmCostModel {
    pub instruction_tokens: f64,
    pub demos: u64,
    pub demo_tokens_avg: f64,
    pub out_examples: u64,
    pub out_tokens_avg: f64,
    pub requests: u64,
    /// Price per million input tokens.
    pub price_in: f64,
    /// Price per million output tokens.
    pub price_out: f64,
}

impl Default for LlmCostModel {
    fn default() -> Self {
        Self {
            instruction_tokens: 330.0,
            demos: 15,
            demo_tokens_avg: 20.8,
            out_examples: 50,
            out_tokens_avg: 21.0,
            requests: 1_000,
            price_in: 10.00,
            price_out: 30.00,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmCost {
    pub input_tokens_per_request: f64,
    pub output_tokens_per_request: f64,
    pub tokens_per_request: f64,
    pub input_tokens: f64,
    pub output_tokens: f64,
    pub total_tokens: f64,
    pub input_cost: f64,
    pub output_cost: f64,
    pub total: f64,
}

impl LlmCost {
    /// Costs are kept unrounded; presentation rounds to cents.
    pub fn cents(value: f64) -> i64 {
        (value * 100.0).round() as i64
    }
}

pub fn llm_cost(model: &LlmCostModel) -> Result<LlmCost, CostError> {
    let nonneg = [
        model.instruction_tokens,
        model.demo_tokens_avg,
        model.out_tokens_avg,
        model.price_in,
        model.price_out,
    ];
    if nonneg.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(CostError::Config("token counts and prices must be nonnegative".into()));
    }
    let input_per = model.instruction_tokens + model.demos as f64 * model.demo_tokens_avg;
    let output_per = model.out_examples as f64 * model.out_tokens_avg;
    Ok(from_token_totals(
        input_per,
        output_per,
        input_per * model.requests as f64,
        output_per * model.requests as f64,
        model.price_in,
        model.price_out,
    ))
}

/// Accounting mode: price measured token usage from a generation run.
pub fn llm_cost_from_usage(
    input_tokens: u64,
    output_tokens: u64,
    requests: u64,
    price_in: f64,
    price_out: f64,
) -> LlmCost {
    let per = |t: u64| if requests == 0 { 0.0 } else { t as f64 / requests as f64 };
    from_token_totals(
        per(input_tokens),
        per(output_tokens),
        input_tokens as f64,
        output_tokens as f64,
        price_in,
        price_out,
    )
}

fn from_token_totals(
    input_per: f64,
    output_per: f64,
    input_tokens: f64,
    output_tokens: f64,
    price_in: f64,
    price_out: f64,
) -> LlmCost {
    let input_cost = input_tokens / 1e6 * price_in;
    let output_cost = output_tokens / 1e6 * price_out;
    LlmCost {
        input_tokens_per_request: input_per,
        output_tokens_per_request: output_per,
        tokens_per_request: input_per + output_per,
        input_tokens,
        output_tokens,
        total_tokens: input_tokens + output_tokens,
        input_cost,
        output_cost,
        total: input_cost + output_cost,
    }
}

pub fn render_mturk(model: &AnnotationCostModel, cost: &AnnotationCost) -> String {
    format!(
        "sentences            {:>12}\n\
         annotated per HIT    {:>12}\n\
         HITs                 {:>12}\n\
         price per HIT        {:>12.2}\n\
         annotators per item  {:>12}\n\
         rejection rate       {:>12.2}\n\
         base cost            {:>12.2}\n\
         total                {:>12.0}\n",
        model.n_sentences,
        model.annotated_per_hit,
        cost.hits,
        model.price_per_hit,
        model.annotators_per_item,
        model.rejection_rate,
        cost.base_cost,
        cost.total
    )
}

pub fn render_llm(cost: &LlmCost) -> String {
    format!(
        "tokens per request   {:>14.1}\n\
         input tokens         {:>14.0}\n\
         output tokens        {:>14.0}\n\
         total tokens         {:>14.0}\n\
         input cost           {:>14.2}\n\
         output cost          {:>14.2}\n\
         total                {:>14.2}\n",
        cost.tokens_per_request,
        cost.input_tokens,
        cost.output_tokens,
        cost.total_tokens,
        cost.input_cost,
        cost.output_cost,
        cost.total
    )
}
