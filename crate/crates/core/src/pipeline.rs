//! The two evaluation runs: correlating measures with gold labels
//! (unsupervised) and scoring class predictions (supervised), plus their
//! deterministic renderings.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{featurize, predict, train_logreg, FeatureConfig, TrainConfig};
use crate::corpus::{stratified_kfold, stratified_split, LabeledCorpus, SplitIndices, SplitSpec};
use crate::formulas::{Measure, ScoreConfig};
use crate::langmodel::{LikelihoodProvider, LmError};
use crate::metrics::{
    classification_report, confusion, format_classification_table, format_correlation_table,
    format_ranking_table, pearson, rank_measures, ClassificationReport, ConfusionMatrix, EvalReport,
    KappaWeighting,
};
use crate::output::RunMeta;
use crate::rsrs::{document_lm_scores, RsrsError};
use crate::textseg::profile;
use crate::{Error, Result};

/// A measure the unsupervised evaluation can correlate with labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalMeasure {
    Formula(Measure),
    Rsrs,
    Perplexity,
}

impl EvalMeasure {
    pub fn all() -> Vec<EvalMeasure> {
        let mut v: Vec<_> = Measure::ALL.into_iter().map(EvalMeasure::Formula).collect();
        v.push(EvalMeasure::Rsrs);
        v.push(EvalMeasure::Perplexity);
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            EvalMeasure::Formula(m) => m.name(),
            EvalMeasure::Rsrs => "RSRS",
            EvalMeasure::Perplexity => "PPL",
        }
    }

    pub fn needs_provider(self) -> bool {
        !matches!(self, EvalMeasure::Formula(_))
    }
}

impl fmt::Display for EvalMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalMeasure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RSRS" => Ok(EvalMeasure::Rsrs),
            "PPL" | "PERPLEXITY" => Ok(EvalMeasure::Perplexity),
            _ => s.parse::<Measure>().map(EvalMeasure::Formula),
        }
    }
}

/// Options of an unsupervised run.
#[derive(Debug, Clone)]
pub struct UnsupervisedOptions {
    pub measures: Vec<EvalMeasure>,
    pub score: ScoreConfig,
}

/// Scores of one document; `None` where the measure is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScores {
    pub dataset: String,
    pub doc_id: String,
    pub label: usize,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnsupervisedOutput {
    pub measures: Vec<EvalMeasure>,
    pub documents: Vec<DocScores>,
    pub report: EvalReport,
}

fn lm_failure_is_degenerate(e: &RsrsError) -> bool {
    matches!(e, RsrsError::EmptyDocument(_) | RsrsError::Provider(LmError::EmptyDocument(_)))
}

/// Score every document of every dataset, correlate each measure with the
/// gold labels and rank the measures. Documents are scored in parallel;
/// results keep input order.
pub fn run_unsupervised_eval(
    datasets: &[(String, LabeledCorpus)],
    options: &UnsupervisedOptions,
    provider: Option<&dyn LikelihoodProvider>,
) -> Result<UnsupervisedOutput> {
    if options.measures.is_empty() {
        return Err(Error::Usage("no measures selected".into()));
    }
    let needs_lm = options.measures.iter().any(|m| m.needs_provider());
    if needs_lm && provider.is_none() {
        return Err(Error::Usage("RSRS/PPL requested but no language model or score file given".into()));
    }

    let mut documents = Vec::new();
    let mut correlations: IndexMap<String, IndexMap<String, f64>> = IndexMap::new();
    for (name, corpus) in datasets {
        let rows: Vec<DocScores> = corpus
            .documents
            .par_iter()
            .zip(corpus.labels.par_iter())
            .map(|(doc, &label)| -> Result<DocScores> {
                let p = profile(doc, options.score.wordlist.as_ref(), options.score.lang);
                let lm = match provider {
                    Some(provider) if needs_lm => match document_lm_scores(provider, doc) {
                        Ok(s) => Some(s),
                        Err(e) if lm_failure_is_degenerate(&e) => None,
                        Err(e) => return Err(Error::from(e).context(format!("document `{}`", doc.id))),
                    },
                    _ => None,
                };
                let values = options
                    .measures
                    .iter()
                    .map(|m| match m {
                        EvalMeasure::Formula(f) => f.compute(&p, options.score.gfi_variant).ok(),
                        EvalMeasure::Rsrs => lm.map(|s| s.rsrs),
                        EvalMeasure::Perplexity => lm.map(|s| s.perplexity),
                    })
                    .collect();
                Ok(DocScores { dataset: name.clone(), doc_id: doc.id.clone(), label, values })
            })
            .collect::<Result<_>>()?;

        let mut per_measure = IndexMap::new();
        for (k, m) in options.measures.iter().enumerate() {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| r.values[k].map(|v| (v, r.label as f64)))
                .unzip();
            match pearson(&xs, &ys) {
                Ok(rho) => {
                    per_measure.insert(m.name().to_string(), rho);
                }
                Err(e) => log::warn!("{name}: no correlation for {m}: {e}"),
            }
        }
        correlations.insert(name.clone(), per_measure);
        documents.extend(rows);
    }
    let ranking = rank_measures(&correlations);
    Ok(UnsupervisedOutput {
        measures: options.measures.clone(),
        documents,
        report: EvalReport { correlations, ranking, classification: None },
    })
}

fn fmt_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl UnsupervisedOutput {
    /// Per-document scores as CSV, headed by the run metadata comment.
    pub fn scores_csv(&self, meta: &RunMeta) -> String {
        let mut out = meta.comment_line();
        out.push_str("dataset,doc_id,label");
        for m in &self.measures {
            let _ = write!(out, ",{m}");
        }
        out.push('\n');
        for row in &self.documents {
            let _ = write!(out, "{},{},{}", csv_field(&row.dataset), csv_field(&row.doc_id), row.label);
            for v in &row.values {
                let _ = write!(out, ",{}", fmt_value(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn report_json(&self, meta: &RunMeta) -> Vec<u8> {
        #[derive(Serialize)]
        struct Out<'a> {
            meta: &'a RunMeta,
            #[serde(flatten)]
            report: &'a EvalReport,
        }
        crate::output::to_json_bytes(&Out { meta, report: &self.report })
    }

    pub fn report_table(&self, meta: &RunMeta) -> String {
        let mut out = meta.comment_line();
        out.push_str("Pearson correlation with gold labels\n");
        out.push_str(&format_correlation_table(&self.report.correlations));
        out.push_str("\nRanking (lower is better)\n");
        out.push_str(&format_ranking_table(&self.report.ranking));
        out
    }
}

/// Quote a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parse a `doc_id\tpredicted_class` file. A header row is optional.
pub fn parse_predictions(text: &str) -> Result<Vec<(String, usize)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, class) = line
            .split_once('\t')
            .ok_or_else(|| Error::Input(format!("prediction line {}: expected doc_id<TAB>predicted_class", i + 1)))?;
        if i == 0 && id == "doc_id" && class.trim() == "predicted_class" {
            continue;
        }
        let class: usize = class
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("prediction line {}: bad class `{class}`", i + 1)))?;
        out.push((id.to_string(), class));
    }
    Ok(out)
}

/// One evaluated round of the supervised harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub validation_size: usize,
    pub test_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation_accuracy: Option<f64>,
    pub test: ClassificationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub qwk: f64,
}

/// Result of a supervised run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedOutput {
    pub mode: String,
    pub folds: Vec<FoldReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanMetrics>,
    /// Metrics of all test predictions pooled into one confusion matrix.
    pub pooled: ClassificationReport,
}

fn mean_metrics(folds: &[FoldReport]) -> MeanMetrics {
    let n = folds.len() as f64;
    let sum = |f: &dyn Fn(&FoldReport) -> f64| folds.iter().map(f).sum::<f64>() / n;
    MeanMetrics {
        accuracy: sum(&|r| r.test.metrics.accuracy),
        weighted_precision: sum(&|r| r.test.metrics.weighted_precision),
        weighted_recall: sum(&|r| r.test.metrics.weighted_recall),
        weighted_f1: sum(&|r| r.test.metrics.weighted_f1),
        qwk: sum(&|r| r.test.qwk),
    }
}

/// Score an external prediction file against gold labels.
pub fn evaluate_predictions(
    gold: &LabeledCorpus,
    predictions: &[(String, usize)],
    weighting: KappaWeighting,
) -> Result<SupervisedOutput> {
    let index: HashMap<&str, usize> = gold.documents.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
    let mut seen = vec![false; gold.len()];
    let mut truth = Vec::with_capacity(predictions.len());
    let mut predicted = Vec::with_capacity(predictions.len());
    for (id, class) in predictions {
        let &i = index.get(id.as_str()).ok_or_else(|| Error::Input(format!("unknown doc_id `{id}` in predictions")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Input(format!("duplicate prediction for `{id}`")));
        }
        if *class >= gold.n_classes() {
            return Err(Error::Input(format!("predicted class {class} for `{id}` outside 0..{}", gold.n_classes())));
        }
        truth.push(gold.labels[i]);
        predicted.push(*class);
    }
    let missing = seen.iter().filter(|s| !**s).count();
    if missing > 0 {
        log::warn!("{missing} gold documents have no prediction and are not evaluated");
    }
    let m = confusion(&truth, &predicted, gold.n_classes())?;
    let report = classification_report(m, weighting)?;
    Ok(SupervisedOutput {
        mode: "predictions".into(),
        folds: vec![FoldReport {
            fold: 0,
            train_size: 0,
            validation_size: 0,
            test_size: truth.len(),
            validation_accuracy: None,
            test: report.clone(),
        }],
        mean: None,
        pooled: report,
    })
}

/// How the baseline is trained and tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaselineProtocol {
    /// One stratified train/validation/test split.
    Split(SplitSpec),
    /// Stratified k-fold cross-validation.
    CrossValidation { k: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct BaselineOptions {
    pub features: FeatureConfig,
    pub train: TrainConfig,
    pub protocol: BaselineProtocol,
    pub weighting: KappaWeighting,
}

/// Train and test the logistic-regression baseline under `options.protocol`.
pub fn run_baseline_eval(
    corpus: &LabeledCorpus,
    options: &BaselineOptions,
    provider: Option<&dyn LikelihoodProvider>,
) -> Result<SupervisedOutput> {
    if options.features.needs_provider() && provider.is_none() {
        return Err(Error::Usage("LM features requested but no language model or score file given".into()));
    }
    let features: Vec<Vec<f64>> = corpus
        .documents
        .par_iter()
        .map(|doc| featurize(doc, &options.features, provider).map(|f| f.values).map_err(Error::from))
        .collect::<Result<_>>()?;

    let (mode, rounds): (String, Vec<SplitIndices>) = match options.protocol {
        BaselineProtocol::Split(spec) => ("split".into(), vec![stratified_split(corpus, &spec)?.0]),
        BaselineProtocol::CrossValidation { k, seed } => (format!("cv{k}"), stratified_kfold(corpus, k, seed)?),
    };
    let n_classes = corpus.n_classes();
    let names = options.features.feature_names();
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
        (idx.iter().map(|&i| features[i].clone()).collect(), idx.iter().map(|&i| corpus.labels[i]).collect())
    };

    let mut folds = Vec::with_capacity(rounds.len());
    let mut pooled = ConfusionMatrix::zeros(n_classes)?;
    for (fold, split) in rounds.iter().enumerate() {
        let (train_x, train_y) = pick(&split.train);
        let trained = train_logreg(&train_x, &train_y, n_classes, names.clone(), &options.train)
            .map_err(|e| Error::from(e).context(format!("fold {fold}")))?;
        let predict_all = |idx: &[usize]| -> Result<Vec<usize>> {
            idx.iter().map(|&i| Ok(predict(&trained.model, &features[i])?.0)).collect()
        };
        let (_, test_y) = pick(&split.test);
        let test_pred = predict_all(&split.test)?;
        let m = confusion(&test_y, &test_pred, n_classes)?;
        for (&t, &p) in test_y.iter().zip(&test_pred) {
            pooled.record(t, p)?;
        }
        let validation_accuracy = if split.validation.is_empty() {
            None
        } else {
            let (_, val_y) = pick(&split.validation);
            let val_pred = predict_all(&split.validation)?;
            Some(val_y.iter().zip(&val_pred).filter(|(a, b)| a == b).count() as f64 / val_y.len() as f64)
        };
        folds.push(FoldReport {
            fold,
            train_size: split.train.len(),
            validation_size: split.validation.len(),
            test_size: split.test.len(),
            validation_accuracy,
            test: classification_report(m, options.weighting)?,
        });
    }
    let mean = (folds.len() > 1).then(|| mean_metrics(&folds));
    Ok(SupervisedOutput { mode, folds, mean, pooled: classification_report(pooled, options.weighting)? })
}

/// Supervised evaluation from either a prediction file or the baseline.
pub enum SupervisedInput<'a> {
    Predictions(&'a [(String, usize)]),
    Baseline(&'a BaselineOptions),
}

pub fn run_supervised_eval(
    gold: &LabeledCorpus,
    input: SupervisedInput<'_>,
    weighting: KappaWeighting,
    provider: Option<&dyn LikelihoodProvider>,
) -> Result<SupervisedOutput> {
    match input {
        SupervisedInput::Predictions(p) => evaluate_predictions(gold, p, weighting),
        SupervisedInput::Baseline(opts) => run_baseline_eval(gold, opts, provider),
    }
}

impl SupervisedOutput {
    pub fn report_json(&self, meta: &RunMeta) -> Vec<u8> {
        #[derive(Serialize)]
        struct Out<'a> {
            meta: &'a RunMeta,
            #[serde(flatten)]
            output: &'a SupervisedOutput,
        }
        crate::output::to_json_bytes(&Out { meta, output: self })
    }

    pub fn confusion_csv(&self, meta: &RunMeta) -> String {
        let mut out = meta.comment_line();
        out.push_str(&self.pooled.matrix.to_csv());
        out
    }

    pub fn report_table(&self, meta: &RunMeta) -> String {
        let mut out = meta.comment_line();
        for f in &self.folds {
            if self.folds.len() > 1 {
                let _ = writeln!(out, "Fold {} (test n={})", f.fold, f.test_size);
                out.push_str(&format_classification_table(&f.test));
                out.push('\n');
            }
        }
        if let Some(mean) = &self.mean {
            let _ = writeln!(out, "Mean over {} folds", self.folds.len());
            for (name, v) in [
                ("Accuracy", mean.accuracy),
                ("Weighted precision", mean.weighted_precision),
                ("Weighted recall", mean.weighted_recall),
                ("Weighted F1", mean.weighted_f1),
                ("QWK", mean.qwk),
            ] {
                let _ = writeln!(out, "{name:<20}{v:>8.4}");
            }
            out.push('\n');
        }
        out.push_str("Pooled test predictions\n");
        out.push_str(&format_classification_table(&self.pooled));
        out
    }
}
