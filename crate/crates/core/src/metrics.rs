//! Correlation, ranking and ordinal classification metrics.

use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulas::Direction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("correlation needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("series is constant; correlation undefined")]
    ConstantSeries,
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("confusion matrix needs at least two classes")]
    TooFewClasses,
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("expected weighted disagreement is zero but observed is not")]
    DegenerateMarginals,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Pearson correlation coefficient from sums of centered products.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ConstantSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(MetricsError::TooFewClasses);
        }
        Ok(Self { n_classes, counts: vec![vec![0; n_classes]; n_classes] })
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(MetricsError::TooFewClasses);
        }
        if let Some(row) = counts.iter().find(|r| r.len() != n) {
            return Err(MetricsError::LengthMismatch(row.len(), n));
        }
        Ok(Self { n_classes: n, counts })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|i| self.counts[i][i]).sum()
    }

    /// Per-class totals of true labels.
    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Per-class totals of predicted labels.
    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_classes).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    /// Count one (true, predicted) pair.
    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        for label in [truth, predicted] {
            if label >= self.n_classes {
                return Err(MetricsError::LabelOutOfRange { label, n_classes: self.n_classes });
            }
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    /// CSV grid with a header row of predicted classes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for j in 0..self.n_classes {
            let _ = write!(out, ",{j}");
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            let _ = write!(out, "{i}");
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Tally (true, predicted) label pairs.
pub fn confusion(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch(truth.len(), predicted.len()));
    }
    let mut m = ConfusionMatrix::zeros(n_classes)?;
    for (&t, &p) in truth.iter().zip(predicted) {
        m.record(t, p)?;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

/// Accuracy and support-weighted precision, recall and F1. Undefined
/// per-class values (zero denominators) count as 0.
pub fn classification_metrics(m: &ConfusionMatrix) -> Result<ClassificationMetrics> {
    let total = m.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let rows = m.row_sums();
    let cols = m.col_sums();
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for c in 0..m.n_classes {
        let tp = m.counts[c][c] as f64;
        let precision = if cols[c] > 0 { tp / cols[c] as f64 } else { 0.0 };
        let recall = if rows[c] > 0 { tp / rows[c] as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        let support = rows[c] as f64;
        wp += support * precision;
        wr += support * recall;
        wf += support * f1;
    }
    let n = total as f64;
    Ok(ClassificationMetrics {
        accuracy: m.trace() as f64 / n,
        weighted_precision: wp / n,
        weighted_recall: wr / n,
        weighted_f1: wf / n,
    })
}

/// Disagreement weight between classes `i` and `j` for [`qwk`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaWeighting {
    /// `|i - j|`
    #[default]
    LinearPaper,
    /// `(i - j)^2`
    Quadratic,
}

impl KappaWeighting {
    fn weight(self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j) as f64;
        match self {
            KappaWeighting::LinearPaper => d,
            KappaWeighting::Quadratic => d * d,
        }
    }
}

impl FromStr for KappaWeighting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear-paper" | "linear" => Ok(Self::LinearPaper),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(format!("unknown kappa weighting `{other}` (expected linear-paper or quadratic)")),
        }
    }
}

/// Weighted kappa `1 - sum(w x) / sum(w m)` where `m` is the outer product
/// of the true and predicted marginals scaled to the observed total.
pub fn qwk(m: &ConfusionMatrix, weighting: KappaWeighting) -> Result<f64> {
    let total = m.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let rows = m.row_sums();
    let cols = m.col_sums();
    let n = total as f64;
    let (mut observed, mut expected) = (0.0, 0.0);
    for (i, (row, &row_sum)) in m.counts.iter().zip(&rows).enumerate() {
        for (j, (&count, &col_sum)) in row.iter().zip(&cols).enumerate() {
            let w = weighting.weight(i, j);
            observed += w * count as f64;
            expected += w * row_sum as f64 * col_sum as f64 / n;
        }
    }
    if expected == 0.0 {
        return if observed == 0.0 { Ok(1.0) } else { Err(MetricsError::DegenerateMarginals) };
    }
    Ok(1.0 - observed / expected)
}

/// One row of a measure ranking table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub measure: String,
    /// Rank per dataset; `None` where the measure is unavailable.
    pub ranks: IndexMap<String, Option<usize>>,
    pub average_rank: f64,
}

/// Competition ranks ("1224") of `goodness`, descending.
fn tied_ranks(goodness: &[f64]) -> Vec<usize> {
    goodness
        .iter()
        .map(|g| 1 + goodness.iter().filter(|other| *other > g).count())
        .collect()
}

/// Rank measures on every dataset by how well they track difficulty:
/// goodness is `rho` for higher-is-harder measures and `-rho` for FRE. The
/// table is sorted by average rank over the datasets where a measure exists,
/// then by name.
pub fn rank_measures(correlations: &IndexMap<String, IndexMap<String, f64>>) -> Vec<RankRow> {
    let mut measures: Vec<String> = Vec::new();
    for per_dataset in correlations.values() {
        for m in per_dataset.keys() {
            if !measures.contains(m) {
                measures.push(m.clone());
            }
        }
    }
    let mut rows: Vec<RankRow> = measures
        .iter()
        .map(|m| RankRow { measure: m.clone(), ranks: IndexMap::new(), average_rank: 0.0 })
        .collect();

    for (dataset, per_dataset) in correlations {
        let present: Vec<(&String, f64)> = per_dataset
            .iter()
            .filter(|(_, rho)| rho.is_finite())
            .map(|(m, rho)| (m, Direction::for_measure_name(m).sign() * rho))
            .collect();
        let ranks = tied_ranks(&present.iter().map(|(_, g)| *g).collect::<Vec<_>>());
        for row in &mut rows {
            let rank = present.iter().position(|(m, _)| **m == row.measure).map(|i| ranks[i]);
            row.ranks.insert(dataset.clone(), rank);
        }
    }
    for row in &mut rows {
        let available: Vec<usize> = row.ranks.values().flatten().copied().collect();
        row.average_rank = if available.is_empty() {
            f64::INFINITY
        } else {
            available.iter().sum::<usize>() as f64 / available.len() as f64
        };
    }
    rows.sort_by(|a, b| a.average_rank.total_cmp(&b.average_rank).then_with(|| a.measure.cmp(&b.measure)));
    rows
}

/// Aligned text table: one row per measure, one rank column per dataset
/// ("/" where unavailable) and the average rank.
pub fn format_ranking_table(rows: &[RankRow]) -> String {
    let datasets: Vec<&String> = rows.first().map(|r| r.ranks.keys().collect()).unwrap_or_default();
    let name_w = rows.iter().map(|r| r.measure.len()).chain(["Measure".len()]).max().unwrap_or(7);
    let col_w: Vec<usize> = datasets.iter().map(|d| d.len().max(4)).collect();
    let mut out = format!("{:<name_w$}", "Measure");
    for (d, w) in datasets.iter().zip(&col_w) {
        let _ = write!(out, "  {d:>w$}");
    }
    out.push_str("  Avg rank\n");
    for row in rows {
        let _ = write!(out, "{:<name_w$}", row.measure);
        for (d, w) in datasets.iter().zip(&col_w) {
            let cell = match row.ranks.get(*d).copied().flatten() {
                Some(r) => r.to_string(),
                None => "/".to_string(),
            };
            let _ = write!(out, "  {cell:>w$}");
        }
        let _ = writeln!(out, "  {:>8.2}", row.average_rank);
    }
    out
}

/// Aligned text table of correlations: measures by datasets.
pub fn format_correlation_table(correlations: &IndexMap<String, IndexMap<String, f64>>) -> String {
    let mut measures: Vec<&String> = Vec::new();
    for per in correlations.values() {
        for m in per.keys() {
            if !measures.contains(&m) {
                measures.push(m);
            }
        }
    }
    let name_w = measures.iter().map(|m| m.len()).chain(["Measure".len()]).max().unwrap_or(7);
    let mut out = format!("{:<name_w$}", "Measure");
    for d in correlations.keys() {
        let w = d.len().max(7);
        let _ = write!(out, "  {d:>w$}");
    }
    out.push('\n');
    for m in measures {
        let _ = write!(out, "{m:<name_w$}");
        for (d, per) in correlations {
            let w = d.len().max(7);
            let cell = per.get(m).map(|r| format!("{r:.3}")).unwrap_or_else(|| "/".into());
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

/// Supervised evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(flatten)]
    pub metrics: ClassificationMetrics,
    pub qwk: f64,
    pub qwk_weighting: KappaWeighting,
    pub matrix: ConfusionMatrix,
}

pub fn classification_report(m: ConfusionMatrix, weighting: KappaWeighting) -> Result<ClassificationReport> {
    Ok(ClassificationReport {
        metrics: classification_metrics(&m)?,
        qwk: qwk(&m, weighting)?,
        qwk_weighting: weighting,
        matrix: m,
    })
}

/// Unsupervised and supervised results of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    /// dataset -> measure -> rho
    pub correlations: IndexMap<String, IndexMap<String, f64>>,
    pub ranking: Vec<RankRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
}

/// Text rendering of a classification report in the shape of a results
/// table: one metric per line.
pub fn format_classification_table(r: &ClassificationReport) -> String {
    let mut out = String::new();
    let rows = [
        ("Accuracy", r.metrics.accuracy),
        ("Weighted precision", r.metrics.weighted_precision),
        ("Weighted recall", r.metrics.weighted_recall),
        ("Weighted F1", r.metrics.weighted_f1),
        ("QWK", r.qwk),
    ];
    for (name, v) in rows {
        let _ = writeln!(out, "{name:<20}{v:>8.4}");
    }
    out
}
