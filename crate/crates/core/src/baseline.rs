//! Feature-based supervised baseline: readability measures as features and
//! a multinomial logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulas::{FormulaError, GfiVariant, Measure};
use crate::langmodel::LikelihoodProvider;
use crate::rsrs::{document_lm_scores, RsrsError};
use crate::textseg::{profile, Document, SyllableProfile, WordList};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("document `{doc_id}`: {source}")]
    DegenerateProfile { doc_id: String, source: FormulaError },
    #[error("language-model features requested but no likelihood provider given")]
    MissingProvider,
    #[error("document `{doc_id}`: {source}")]
    LanguageModel { doc_id: String, source: RsrsError },
    #[error("training data contains fewer than two classes")]
    SingleClass,
    #[error("no training samples")]
    EmptyTrainingSet,
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("feature vector has length {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training loss became non-finite at epoch {0}")]
    NonFiniteLoss(usize),
}

pub type Result<T> = std::result::Result<T, BaselineError>;

/// Which features to extract. The seven traditional measures are always
/// present, in [`Measure::ALL`] order, followed by the optional LM features.
#[derive(Debug, Clone, Default)]
pub struct FeatureConfig {
    pub gfi_variant: GfiVariant,
    pub wordlist: Option<WordList>,
    pub lang: SyllableProfile,
    pub include_rsrs: bool,
    pub include_log_perplexity: bool,
}

impl FeatureConfig {
    pub fn needs_provider(&self) -> bool {
        self.include_rsrs || self.include_log_perplexity
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Measure::ALL.iter().map(|m| m.name().to_string()).collect();
        if self.include_rsrs {
            names.push("RSRS".into());
        }
        if self.include_log_perplexity {
            names.push("logPPL".into());
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub standardized: bool,
}

/// Extract the configured features of one document.
pub fn featurize(
    doc: &Document,
    config: &FeatureConfig,
    provider: Option<&dyn LikelihoodProvider>,
) -> Result<FeatureVector> {
    let p = profile(doc, config.wordlist.as_ref(), config.lang);
    let mut values = Vec::with_capacity(9);
    for m in Measure::ALL {
        let v = m
            .compute(&p, config.gfi_variant)
            .map_err(|source| BaselineError::DegenerateProfile { doc_id: doc.id.clone(), source })?;
        values.push(v);
    }
    if config.needs_provider() {
        let provider = provider.ok_or(BaselineError::MissingProvider)?;
        let lm = document_lm_scores(provider, doc)
            .map_err(|source| BaselineError::LanguageModel { doc_id: doc.id.clone(), source })?;
        if config.include_rsrs {
            values.push(lm.rsrs);
        }
        if config.include_log_perplexity {
            values.push(lm.perplexity.ln());
        }
    }
    Ok(FeatureVector { values, standardized: false })
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Class logits for one input row; `weights[c][0]` is the bias.
fn logits(weights: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .map(|row| row[0] + row[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect()
}

/// Mean cross-entropy and its gradient with respect to `weights`
/// (`C × (F+1)`, bias in column 0).
pub fn loss_and_gradient(weights: &[Vec<f64>], xs: &[Vec<f64>], labels: &[usize]) -> (f64, Vec<Vec<f64>>) {
    let n = xs.len() as f64;
    let mut grad = vec![vec![0.0; weights[0].len()]; weights.len()];
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(labels) {
        let probs = softmax(&logits(weights, x));
        loss -= probs[y].ln();
        for (c, (g, p)) in grad.iter_mut().zip(&probs).enumerate() {
            let err = p - f64::from(u8::from(c == y));
            g[0] += err;
            for (gj, xj) in g[1..].iter_mut().zip(x) {
                *gj += err * xj;
            }
        }
    }
    for g in grad.iter_mut().flatten() {
        *g /= n;
    }
    (loss / n, grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 1000 }
    }
}

/// Standard deviations at or below this are treated as zero variance.
const MIN_STD: f64 = 1e-12;

/// A trained multinomial logistic regression with its standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub feature_names: Vec<String>,
    /// Train-set statistics of every input feature.
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    /// Input features actually used (zero-variance ones are dropped).
    pub kept_features: Vec<usize>,
    pub n_classes: usize,
    /// `n_classes × (kept + 1)`, bias in column 0.
    pub weights: Vec<Vec<f64>>,
}

impl LogRegModel {
    /// Standardize a raw feature row with the stored train statistics,
    /// keeping only the used features.
    pub fn standardize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.feature_means.len() {
            return Err(BaselineError::DimensionMismatch { expected: self.feature_means.len(), got: raw.len() });
        }
        Ok(self
            .kept_features
            .iter()
            .map(|&j| (raw[j] - self.feature_means[j]) / self.feature_stds[j])
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Result of [`train_logreg`]: the model plus the loss before the first
/// update and after every epoch.
#[derive(Debug, Clone)]
pub struct TrainedLogReg {
    pub model: LogRegModel,
    pub losses: Vec<f64>,
}

/// Fit on raw (unstandardized) feature rows. Weights start at zero, so the
/// result is fully determined by the data and `config`.
pub fn train_logreg(
    features: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    feature_names: Vec<String>,
    config: &TrainConfig,
) -> Result<TrainedLogReg> {
    if features.len() != labels.len() {
        return Err(BaselineError::LengthMismatch { features: features.len(), labels: labels.len() });
    }
    if features.is_empty() {
        return Err(BaselineError::EmptyTrainingSet);
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(BaselineError::LabelOutOfRange { label, n_classes });
    }
    let first = labels[0];
    if labels.iter().all(|&l| l == first) {
        return Err(BaselineError::SingleClass);
    }
    let dim = features[0].len();
    if let Some(row) = features.iter().find(|r| r.len() != dim) {
        return Err(BaselineError::DimensionMismatch { expected: dim, got: row.len() });
    }

    let n = features.len() as f64;
    let means: Vec<f64> = (0..dim).map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let stds: Vec<f64> = (0..dim)
        .map(|j| (features.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    let kept: Vec<usize> = (0..dim).filter(|&j| stds[j] > MIN_STD).collect();
    for j in (0..dim).filter(|j| !kept.contains(j)) {
        let name = feature_names.get(j).map_or("?", String::as_str);
        log::warn!("dropping zero-variance feature {j} ({name})");
    }

    let mut model = LogRegModel {
        feature_names,
        feature_means: means,
        feature_stds: stds,
        kept_features: kept,
        n_classes,
        weights: Vec::new(),
    };
    model.weights = vec![vec![0.0; model.kept_features.len() + 1]; n_classes];
    let xs: Vec<Vec<f64>> = features.iter().map(|r| model.standardize(r)).collect::<Result<_>>()?;

    let mut losses = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..=config.epochs {
        let (loss, grad) = loss_and_gradient(&model.weights, &xs, labels);
        if !loss.is_finite() {
            return Err(BaselineError::NonFiniteLoss(epoch));
        }
        losses.push(loss);
        if epoch == config.epochs {
            break;
        }
        for (row, g) in model.weights.iter_mut().zip(&grad) {
            for (w, gj) in row.iter_mut().zip(g) {
                *w -= config.learning_rate * gj;
            }
        }
    }
    Ok(TrainedLogReg { model, losses })
}

/// Predicted label (argmax, lowest index on ties) and class probabilities
/// for a raw feature row.
pub fn predict(model: &LogRegModel, features: &[f64]) -> Result<(usize, Vec<f64>)> {
    let x = model.standardize(features)?;
    let probs = softmax(&logits(&model.weights, &x));
    let label = probs
        .iter()
        .enumerate()
        .fold(0, |best, (c, p)| if *p > probs[best] { c } else { best });
    Ok((label, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn zero_weights_give_uniform_probabilities_and_ln_c_loss() {
        let xs = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![3.0, -2.0]];
        let labels = vec![0, 1, 2];
        let trained = train_logreg(&xs, &labels, 3, names(2), &TrainConfig { learning_rate: 0.1, epochs: 0 }).unwrap();
        assert!((trained.losses[0] - 3f64.ln()).abs() < 1e-15);
        let (_, probs) = predict(&trained.model, &[0.3, 0.7]).unwrap();
        for p in probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    fn finite_difference(weights: &[Vec<f64>], xs: &[Vec<f64>], labels: &[usize], eps: f64) -> Vec<Vec<f64>> {
        let mut grad = vec![vec![0.0; weights[0].len()]; weights.len()];
        for c in 0..weights.len() {
            for j in 0..weights[0].len() {
                let mut plus = weights.to_vec();
                plus[c][j] += eps;
                let mut minus = weights.to_vec();
                minus[c][j] -= eps;
                grad[c][j] = (loss_and_gradient(&plus, xs, labels).0 - loss_and_gradient(&minus, xs, labels).0)
                    / (2.0 * eps);
            }
        }
        grad
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<usize> = (0..5).map(|_| rng.gen_range(0..3)).collect();
        let weights: Vec<Vec<f64>> = (0..3).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let (_, analytic) = loss_and_gradient(&weights, &xs, &labels);
        let numeric = finite_difference(&weights, &xs, &labels, 1e-5);
        for (a, n) in analytic.iter().flatten().zip(numeric.iter().flatten()) {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
            assert!(rel < 1e-4, "{a} vs {n}");
        }
    }

    #[test]
    fn separable_two_class_data_is_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let y = i % 2;
            // margin of 1 around the plane x0 + x1 = 0
            let offset = if y == 1 { 1.0 } else { -1.0 };
            let a: f64 = rng.gen_range(-3.0..3.0);
            let b: f64 = rng.gen_range(0.0..3.0);
            xs.push(vec![a + offset * (1.0 + b), -a + offset]);
            labels.push(y);
        }
        let trained = train_logreg(&xs, &labels, 2, names(2), &TrainConfig { learning_rate: 0.5, epochs: 500 }).unwrap();
        let correct = xs
            .iter()
            .zip(&labels)
            .filter(|(x, &y)| predict(&trained.model, x).unwrap().0 == y)
            .count();
        assert!(correct as f64 / xs.len() as f64 >= 0.95);
    }

    #[test]
    fn loss_is_non_increasing_at_small_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<Vec<f64>> = (0..60).map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
        let labels: Vec<usize> = xs.iter().map(|x| usize::from(x[0] > 0.0) + usize::from(x[1] > 2.0)).collect();
        let trained = train_logreg(&xs, &labels, 3, names(3), &TrainConfig { learning_rate: 1e-3, epochs: 300 }).unwrap();
        for w in trained.losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn zero_variance_features_are_dropped() {
        let xs = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let trained = train_logreg(&xs, &[0, 1, 1], 2, names(2), &TrainConfig::default()).unwrap();
        assert_eq!(trained.model.kept_features, vec![0]);
        assert_eq!(trained.model.weights[0].len(), 2);
    }

    #[test]
    fn training_errors() {
        let xs = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train_logreg(&xs, &[1, 1], 2, names(1), &TrainConfig::default()),
            Err(BaselineError::SingleClass)
        ));
        assert!(matches!(
            train_logreg(&xs, &[0], 2, names(1), &TrainConfig::default()),
            Err(BaselineError::LengthMismatch { .. })
        ));
        let trained = train_logreg(&xs, &[0, 1], 2, names(1), &TrainConfig::default()).unwrap();
        assert!(matches!(predict(&trained.model, &[1.0, 2.0]), Err(BaselineError::DimensionMismatch { .. })));
    }

    #[test]
    fn model_json_round_trip() {
        let xs = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![0.0, 3.0]];
        let trained = train_logreg(&xs, &[0, 1, 1], 2, names(2), &TrainConfig::default()).unwrap();
        let back = LogRegModel::from_json(&trained.model.to_json()).unwrap();
        assert_eq!(back, trained.model);
    }

    #[test]
    fn featurize_lengths_and_values() {
        let doc = Document::new("d", "The cat sat on the mat. It was a sunny afternoon.");
        let config = FeatureConfig::default();
        let fv = featurize(&doc, &config, None).unwrap();
        assert_eq!(fv.values.len(), 7);
        let p = profile(&doc, None, SyllableProfile::En);
        assert_eq!(fv.values[1], crate::formulas::fre(&p).unwrap());
        assert_eq!(fv.values[6], crate::formulas::asl(&p).unwrap());

        let lm_config = FeatureConfig { include_rsrs: true, include_log_perplexity: true, ..FeatureConfig::default() };
        assert!(matches!(featurize(&doc, &lm_config, None), Err(BaselineError::MissingProvider)));
        assert_eq!(lm_config.feature_names().len(), 9);
        assert!(matches!(
            featurize(&Document::new("e", ""), &config, None),
            Err(BaselineError::DegenerateProfile { .. })
        ));
    }
}
