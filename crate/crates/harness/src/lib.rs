//! Evaluation harness: the four prompt regimes, model clients (stubs and
//! an HTTP adapter), last-number answer extraction, and accuracy metrics
//! with bootstrap confidence intervals.

pub mod client;
pub mod eval;
pub mod metrics;
pub mod prompt;

pub use client::{
    ClientError, CompletionRequest, CompletionResponse, ConstantClient, GoldEchoClient,
    HttpClient, ModelClient, ScriptedClient, API_TOKEN_ENV,
};
pub use eval::{run_eval, write_eval_records, EvalError, EvalOptions, EvalRecord};
pub use metrics::{bootstrap_ci, extract_answer, Metrics, MetricsError};
pub use prompt::{
    assemble_prompt, default_shots, generate_shots, record_complexity, shot_seed,
    AssembledPrompt, PromptError, PromptSpec, Regime, ShotMeta,
};
