//! Token-likelihood providers and perplexity.
//!
//! A [`LikelihoodProvider`] turns a tokenized sentence into one
//! [`TokenScore`] per token. Two backends ship with the crate: a trainable
//! smoothed [`NGramModel`] and [`PrecomputedScores`], which replays
//! per-token log-probabilities produced by any external model.

mod ngram;
mod precomputed;

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textseg::Document;

pub use ngram::{train_ngram, NGramModel, Smoothing, TrainOptions, BOS, EOS, UNK};
pub use precomputed::{load_precomputed, write_precomputed, PrecomputedScores};

#[derive(Debug, Error)]
pub enum LmError {
    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,
    #[error("invalid model options: {0}")]
    InvalidOptions(String),
    #[error("perplexity of an empty score list is undefined")]
    EmptyInput,
    #[error("cannot score an empty sentence")]
    EmptySentence,
    #[error("document `{0}` has no tokens")]
    EmptyDocument(String),
    #[error("no precomputed scores for document `{0}`")]
    MissingDocument(String),
    #[error("provider failure: {0}")]
    ProviderFailure(String),
    #[error("schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("model file version mismatch: {0}")]
    VersionMismatch(String),
    #[error("malformed model file at line {line}: {message}")]
    MalformedModel { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, LmError>;

/// Model probability of one realized token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenScore {
    pub token: String,
    /// Probability in (0, 1].
    pub probability: f64,
    /// Token is outside the provider's vocabulary.
    pub oov: bool,
}

impl TokenScore {
    /// Natural-log probability.
    pub fn logprob(&self) -> f64 {
        self.probability.ln()
    }
}

/// Identifies a sentence by document and position so that precomputed
/// backends can look it up.
#[derive(Debug, Clone, Copy)]
pub struct SentenceRef<'a> {
    pub doc_id: &'a str,
    pub index: usize,
    pub tokens: &'a [String],
}

/// Anything that can assign a probability to every token of a sentence.
pub trait LikelihoodProvider: Sync {
    /// Returns exactly `sentence.tokens.len()` scores, in token order.
    fn score_sentence(&self, sentence: SentenceRef<'_>) -> Result<Vec<TokenScore>>;
}

/// Score a non-empty sentence, checking the provider contract.
pub fn score_tokens(provider: &dyn LikelihoodProvider, sentence: SentenceRef<'_>) -> Result<Vec<TokenScore>> {
    if sentence.tokens.is_empty() {
        return Err(LmError::EmptySentence);
    }
    let scores = provider.score_sentence(sentence)?;
    if scores.len() != sentence.tokens.len() {
        return Err(LmError::ProviderFailure(format!(
            "expected {} scores for sentence {} of `{}`, got {}",
            sentence.tokens.len(),
            sentence.index,
            sentence.doc_id,
            scores.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !(s.probability > 0.0 && s.probability <= 1.0)) {
        return Err(LmError::ProviderFailure(format!(
            "probability {} for token `{}` is outside (0, 1]",
            bad.probability, bad.token
        )));
    }
    Ok(scores)
}

/// Scores for every non-empty sentence of a document, in order.
/// Sentences without tokens are skipped.
pub fn score_document(provider: &dyn LikelihoodProvider, doc: &Document) -> Result<Vec<Vec<TokenScore>>> {
    doc.sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.tokens.is_empty())
        .map(|(index, s)| score_tokens(provider, SentenceRef { doc_id: &doc.id, index, tokens: &s.tokens }))
        .collect()
}

/// `exp(mean(-ln p))` over the scored tokens.
pub fn perplexity(scores: &[TokenScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(LmError::EmptyInput);
    }
    let nll: f64 = scores.iter().map(|s| -s.probability.ln()).sum();
    Ok((nll / scores.len() as f64).exp())
}

/// `2^(-mean(log2 p))`; equal to [`perplexity`] up to rounding.
pub fn perplexity_base2(scores: &[TokenScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(LmError::EmptyInput);
    }
    let mean_log2: f64 = scores.iter().map(|s| s.probability.log2()).sum::<f64>() / scores.len() as f64;
    Ok((-mean_log2).exp2())
}

/// Perplexity over all token scores of a document.
pub fn document_perplexity(provider: &dyn LikelihoodProvider, doc: &Document) -> Result<f64> {
    let all: Vec<TokenScore> = score_document(provider, doc)?.into_iter().flatten().collect();
    if all.is_empty() {
        return Err(LmError::EmptyDocument(doc.id.clone()));
    }
    perplexity(&all)
}
