//! Word negative log-likelihood and the ranked sentence readability score.
//!
//! For one sentence of `S` tokens, every token gets `WNLL = -ln p` from a
//! likelihood provider. Tokens are sorted by ascending WNLL (stable, so
//! ties keep sentence order) and the token at rank `i` (1-based) is weighted
//! by `sqrt(i)`, or `2 * sqrt(i)` when it is out of vocabulary. The sentence
//! score is the weighted sum divided by `S`; the document score is the mean
//! over its non-empty sentences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::langmodel::{perplexity, score_document, LikelihoodProvider, LmError, TokenScore};
use crate::textseg::Document;

#[derive(Debug, Error)]
pub enum RsrsError {
    #[error("probability {0} is outside (0, 1]")]
    InvalidProbability(f64),
    #[error("cannot rank an empty sentence")]
    EmptySentence,
    #[error("document `{0}` has no scorable sentence")]
    EmptyDocument(String),
    #[error(transparent)]
    Provider(#[from] LmError),
}

pub type Result<T> = std::result::Result<T, RsrsError>;

/// One token placed at its WNLL rank within a sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWord {
    pub token: String,
    pub wnll: f64,
    /// 1-based rank by ascending WNLL.
    pub rank: usize,
    pub weight: f64,
    pub oov: bool,
}

/// `-ln p` of the realized token.
pub fn wnll(score: &TokenScore) -> Result<f64> {
    let p = score.probability;
    if !(p > 0.0 && p <= 1.0) {
        return Err(RsrsError::InvalidProbability(p));
    }
    // -ln(1) is -0.0
    Ok((-p.ln()).max(0.0))
}

/// Rank the tokens of a sentence; the result is ordered by rank.
pub fn rank_sentence(scores: &[TokenScore]) -> Result<Vec<RankedWord>> {
    if scores.is_empty() {
        return Err(RsrsError::EmptySentence);
    }
    let mut with_wnll = scores
        .iter()
        .map(|s| Ok((s, wnll(s)?)))
        .collect::<Result<Vec<_>>>()?;
    with_wnll.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(with_wnll
        .into_iter()
        .enumerate()
        .map(|(i, (s, w))| {
            let rank = i + 1;
            let base = (rank as f64).sqrt();
            RankedWord {
                token: s.token.clone(),
                wnll: w,
                rank,
                weight: if s.oov { 2.0 * base } else { base },
                oov: s.oov,
            }
        })
        .collect())
}

/// RSRS of one sentence.
pub fn sentence_rsrs(scores: &[TokenScore]) -> Result<f64> {
    let ranked = rank_sentence(scores)?;
    let total: f64 = ranked.iter().map(|r| r.weight * r.wnll).sum();
    Ok(total / ranked.len() as f64)
}

/// Mean sentence RSRS over a document. Token-less sentences are skipped.
pub fn document_rsrs(provider: &dyn LikelihoodProvider, doc: &Document) -> Result<f64> {
    Ok(document_lm_scores(provider, doc)?.rsrs)
}

/// Language-model derived scores of one document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmScores {
    pub rsrs: f64,
    pub perplexity: f64,
}

/// RSRS and perplexity from a single pass over the provider.
pub fn document_lm_scores(provider: &dyn LikelihoodProvider, doc: &Document) -> Result<LmScores> {
    let sentences = score_document(provider, doc)?;
    if sentences.is_empty() {
        return Err(RsrsError::EmptyDocument(doc.id.clone()));
    }
    let mut sum = 0.0;
    for s in &sentences {
        sum += sentence_rsrs(s)?;
    }
    let rsrs = sum / sentences.len() as f64;
    let all: Vec<TokenScore> = sentences.into_iter().flatten().collect();
    Ok(LmScores { rsrs, perplexity: perplexity(&all)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(wnll: f64, oov: bool) -> TokenScore {
        TokenScore { token: format!("w{wnll}"), probability: (-wnll).exp(), oov }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn wnll_values() {
        assert_eq!(wnll(&ts(0.0, false)).unwrap(), 0.0);
        assert!((wnll(&ts(2.0, false)).unwrap() - 2.0).abs() < 1e-12);
        let half = TokenScore { token: "x".into(), probability: 0.5, oov: false };
        assert!((wnll(&half).unwrap() - 0.693147).abs() < 1e-6);
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            let s = TokenScore { token: "x".into(), probability: bad, oov: false };
            assert!(matches!(wnll(&s), Err(RsrsError::InvalidProbability(_))));
        }
    }

    #[test]
    fn hand_sentence_without_oov() {
        let scores = [ts(2.0, false), ts(1.0, false), ts(3.0, false)];
        let expected = (1.0 * 1.0 + 2f64.sqrt() * 2.0 + 3f64.sqrt() * 3.0) / 3.0;
        let got = sentence_rsrs(&scores).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 3.0082).abs() < 1e-4);
    }

    #[test]
    fn hand_sentence_with_oov() {
        let scores = [ts(2.0, true), ts(1.0, false), ts(3.0, false)];
        let got = sentence_rsrs(&scores).unwrap();
        assert!((got - 3.9510).abs() < 1e-4, "{got}");
    }

    #[test]
    fn single_word_identity() {
        assert!((sentence_rsrs(&[ts(1.7, false)]).unwrap() - 1.7).abs() < 1e-12);
        assert!(matches!(sentence_rsrs(&[]), Err(RsrsError::EmptySentence)));
    }

    #[test]
    fn ranks_are_stable_on_ties() {
        let mut a = ts(1.0, false);
        a.token = "first".into();
        let mut b = ts(1.0, false);
        b.token = "second".into();
        let ranked = rank_sentence(&[ts(5.0, false), a, b]).unwrap();
        let order: Vec<_> = ranked.iter().map(|r| (r.token.as_str(), r.rank)).collect();
        assert_eq!(order[0], ("first", 1));
        assert_eq!(order[1], ("second", 2));
        assert_eq!(ranked[2].rank, 3);
        assert!((ranked[2].weight - 3f64.sqrt()).abs() < 1e-15);
    }
}
