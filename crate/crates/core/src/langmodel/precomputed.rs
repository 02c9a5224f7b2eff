use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{score_tokens, LikelihoodProvider, LmError, Result, SentenceRef, TokenScore};
use crate::textseg::Document;

#[derive(Debug, Serialize, Deserialize)]
struct TokenRecord {
    token: String,
    /// Natural-log probability.
    logprob: f64,
    oov: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    sentences: Vec<Vec<TokenRecord>>,
}

/// Per-token scores produced elsewhere, keyed by document id and sentence
/// index.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedScores {
    docs: HashMap<String, Vec<Vec<TokenScore>>>,
}

impl PrecomputedScores {
    pub fn parse(text: &str) -> Result<Self> {
        let mut docs = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let schema = |message: String| LmError::SchemaError { line: line_no, message };
            let record: DocumentRecord = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
            let mut sentences = Vec::with_capacity(record.sentences.len());
            for sentence in record.sentences {
                let mut scores = Vec::with_capacity(sentence.len());
                for t in sentence {
                    if !t.logprob.is_finite() || t.logprob > 0.0 {
                        return Err(schema(format!("logprob {} of `{}` must be finite and <= 0", t.logprob, t.token)));
                    }
                    let probability = t.logprob.exp();
                    if probability <= 0.0 {
                        return Err(schema(format!("logprob {} of `{}` underflows", t.logprob, t.token)));
                    }
                    scores.push(TokenScore { token: t.token, probability, oov: t.oov });
                }
                sentences.push(scores);
            }
            if docs.insert(record.doc_id.clone(), sentences).is_some() {
                return Err(schema(format!("duplicate doc_id `{}`", record.doc_id)));
            }
        }
        Ok(Self { docs })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.docs.contains_key(doc_id)
    }
}

/// Load a JSONL score file, one document object per line.
pub fn load_precomputed(path: &Path) -> Result<PrecomputedScores> {
    PrecomputedScores::parse(&fs::read_to_string(path)?)
}

impl LikelihoodProvider for PrecomputedScores {
    fn score_sentence(&self, sentence: SentenceRef<'_>) -> Result<Vec<TokenScore>> {
        let doc = self
            .docs
            .get(sentence.doc_id)
            .ok_or_else(|| LmError::MissingDocument(sentence.doc_id.to_string()))?;
        let stored = doc.get(sentence.index).ok_or_else(|| {
            LmError::ProviderFailure(format!(
                "document `{}` has {} stored sentences, sentence {} requested",
                sentence.doc_id,
                doc.len(),
                sentence.index
            ))
        })?;
        if stored.len() != sentence.tokens.len()
            || stored.iter().zip(sentence.tokens).any(|(s, t)| &s.token != t)
        {
            return Err(LmError::ProviderFailure(format!(
                "stored tokens of sentence {} in `{}` do not match the segmented text",
                sentence.index, sentence.doc_id
            )));
        }
        Ok(stored.clone())
    }
}

/// Export a provider's scores for `docs` in the precomputed JSONL format.
/// Every sentence is written, including token-less ones (as empty lists), so
/// that sentence indices line up with the segmentation.
pub fn write_precomputed<W: Write>(provider: &dyn LikelihoodProvider, docs: &[Document], out: &mut W) -> Result<()> {
    for doc in docs {
        let mut sentences = Vec::with_capacity(doc.sentences.len());
        for (index, s) in doc.sentences.iter().enumerate() {
            if s.tokens.is_empty() {
                sentences.push(Vec::new());
                continue;
            }
            let scores = score_tokens(provider, SentenceRef { doc_id: &doc.id, index, tokens: &s.tokens })?;
            sentences.push(
                scores
                    .into_iter()
                    .map(|t| TokenRecord { logprob: t.probability.ln(), token: t.token, oov: t.oov })
                    .collect(),
            );
        }
        let record = DocumentRecord { doc_id: doc.id.clone(), sentences };
        serde_json::to_writer(&mut *out, &record).map_err(|e| LmError::ProviderFailure(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"doc_id":"d1","sentences":[[{"token":"It","logprob":-1.5,"oov":false},{"token":"rained","logprob":-4.0,"oov":true}]]}"#;

    fn tokens(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn answers_stored_sentence() {
        let p = PrecomputedScores::parse(LINE).unwrap();
        let toks = tokens(&["It", "rained"]);
        let scores = p.score_sentence(SentenceRef { doc_id: "d1", index: 0, tokens: &toks }).unwrap();
        assert_eq!(scores.len(), 2);
        assert!((scores[0].probability.ln() - -1.5).abs() < 1e-12);
        assert!((scores[1].logprob() - -4.0).abs() < 1e-12);
        assert!(scores[1].oov && !scores[0].oov);
    }

    #[test]
    fn missing_document() {
        let p = PrecomputedScores::parse(LINE).unwrap();
        let toks = tokens(&["x"]);
        let r = p.score_sentence(SentenceRef { doc_id: "nope", index: 0, tokens: &toks });
        assert!(matches!(r, Err(LmError::MissingDocument(id)) if id == "nope"));
    }

    #[test]
    fn token_mismatch_is_provider_failure() {
        let p = PrecomputedScores::parse(LINE).unwrap();
        let toks = tokens(&["It", "snowed"]);
        let r = p.score_sentence(SentenceRef { doc_id: "d1", index: 0, tokens: &toks });
        assert!(matches!(r, Err(LmError::ProviderFailure(_))));
        let r = p.score_sentence(SentenceRef { doc_id: "d1", index: 3, tokens: &toks });
        assert!(matches!(r, Err(LmError::ProviderFailure(_))));
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let text = format!("{LINE}\n\n{{\"doc_id\":\"d2\"}}\n");
        match PrecomputedScores::parse(&text) {
            Err(LmError::SchemaError { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let positive = r#"{"doc_id":"d","sentences":[[{"token":"a","logprob":0.5,"oov":false}]]}"#;
        assert!(matches!(PrecomputedScores::parse(positive), Err(LmError::SchemaError { line: 1, .. })));
        let dup = format!("{LINE}\n{LINE}");
        assert!(matches!(PrecomputedScores::parse(&dup), Err(LmError::SchemaError { line: 2, .. })));
    }
}
