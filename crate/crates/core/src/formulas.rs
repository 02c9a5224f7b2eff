//! Traditional readability formulas computed from a [`StatProfile`].

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textseg::{profile, Document, StatProfile, SyllableProfile, WordList};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("degenerate profile: {field} is zero")]
    DegenerateProfile { field: &'static str },
}

pub type Result<T> = std::result::Result<T, FormulaError>;

/// Whether larger scores mean harder or easier text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherIsHarder,
    HigherIsEasier,
}

impl Direction {
    /// Direction of a measure identified by its report name. Only FRE
    /// (and names ending in it, e.g. "corpus FRE") is higher-is-easier.
    pub fn for_measure_name(name: &str) -> Self {
        let upper = name.trim().to_ascii_uppercase();
        if upper == "FRE" || upper.ends_with(" FRE") {
            Self::HigherIsEasier
        } else {
            Self::HigherIsHarder
        }
    }

    /// Sign that turns a correlation with difficulty labels into "goodness".
    pub fn sign(self) -> f64 {
        match self {
            Self::HigherIsHarder => 1.0,
            Self::HigherIsEasier => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Measure {
    Gfi,
    Fre,
    Fkgl,
    Ari,
    Dcrf,
    Smog,
    Asl,
}

impl Measure {
    /// Canonical report order.
    pub const ALL: [Measure; 7] = [
        Measure::Gfi,
        Measure::Fre,
        Measure::Fkgl,
        Measure::Ari,
        Measure::Dcrf,
        Measure::Smog,
        Measure::Asl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Gfi => "GFI",
            Measure::Fre => "FRE",
            Measure::Fkgl => "FKGL",
            Measure::Ari => "ARI",
            Measure::Dcrf => "DCRF",
            Measure::Smog => "SMOG",
            Measure::Asl => "ASL",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Measure::Fre => Direction::HigherIsEasier,
            _ => Direction::HigherIsHarder,
        }
    }

    pub fn compute(self, p: &StatProfile, gfi_variant: GfiVariant) -> Result<f64> {
        match self {
            Measure::Gfi => gfi_with(p, gfi_variant),
            Measure::Fre => fre(p),
            Measure::Fkgl => fkgl(p),
            Measure::Ari => ari(p),
            Measure::Dcrf => dcrf(p),
            Measure::Smog => smog(p),
            Measure::Asl => asl(p),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

/// Denominator of the long-word term in the Gunning fog index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GfiVariant {
    /// `100 * longWords / totalSentences`.
    #[default]
    Paper,
    /// `100 * longWords / totalWords` (Gunning's original).
    Standard,
}

impl FromStr for GfiVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Self::Paper),
            "standard" => Ok(Self::Standard),
            other => Err(format!("unknown GFI variant `{other}` (expected paper or standard)")),
        }
    }
}

fn words(p: &StatProfile) -> Result<f64> {
    match p.total_words {
        0 => Err(FormulaError::DegenerateProfile { field: "total_words" }),
        w => Ok(w as f64),
    }
}

fn sentences(p: &StatProfile) -> Result<f64> {
    match p.total_sentences {
        0 => Err(FormulaError::DegenerateProfile { field: "total_sentences" }),
        s => Ok(s as f64),
    }
}

/// Gunning fog index with the long-word term over sentences.
pub fn gfi(p: &StatProfile) -> Result<f64> {
    gfi_with(p, GfiVariant::Paper)
}

pub fn gfi_with(p: &StatProfile, variant: GfiVariant) -> Result<f64> {
    let s = sentences(p)?;
    let w = words(p)?;
    let long = p.long_words as f64;
    let long_term = match variant {
        GfiVariant::Paper => 100.0 * long / s,
        GfiVariant::Standard => 100.0 * long / w,
    };
    Ok(0.4 * (w / s + long_term))
}

/// Flesch reading ease. The only measure where higher means easier.
pub fn fre(p: &StatProfile) -> Result<f64> {
    let s = sentences(p)?;
    let w = words(p)?;
    Ok(206.835 - 1.015 * (w / s) - 84.6 * (p.total_syllables as f64 / w))
}

/// Flesch-Kincaid grade level.
pub fn fkgl(p: &StatProfile) -> Result<f64> {
    let s = sentences(p)?;
    let w = words(p)?;
    Ok(0.39 * (w / s) + 11.8 * (p.total_syllables as f64 / w) - 15.59)
}

/// Automated readability index.
pub fn ari(p: &StatProfile) -> Result<f64> {
    let s = sentences(p)?;
    let w = words(p)?;
    Ok(4.71 * (p.total_characters as f64 / w) + 0.5 * (w / s) - 21.43)
}

/// Dale-Chall readability formula (raw score, no adjustment constant).
pub fn dcrf(p: &StatProfile) -> Result<f64> {
    let s = sentences(p)?;
    let w = words(p)?;
    Ok(0.1579 * (p.difficult_words as f64 / w * 100.0) + 0.0496 * (w / s))
}

/// SMOG grade.
pub fn smog(p: &StatProfile) -> Result<f64> {
    let s = sentences(p)?;
    Ok(1.0430 * (p.polysyllables as f64 * 30.0 / s).sqrt() + 3.1291)
}

/// Average sentence length in words.
pub fn asl(p: &StatProfile) -> Result<f64> {
    let s = sentences(p)?;
    Ok(p.total_words as f64 / s)
}

/// Options for [`score_all`].
#[derive(Debug, Clone)]
pub struct ScoreConfig {
    pub measures: Vec<Measure>,
    pub gfi_variant: GfiVariant,
    pub wordlist: Option<WordList>,
    pub lang: SyllableProfile,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            measures: Measure::ALL.to_vec(),
            gfi_variant: GfiVariant::Paper,
            wordlist: None,
            lang: SyllableProfile::En,
        }
    }
}

/// A measure value, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreEntry {
    Value(f64),
    Error { error: String },
}

impl ScoreEntry {
    pub fn value(&self) -> Option<f64> {
        match self {
            ScoreEntry::Value(v) => Some(*v),
            ScoreEntry::Error { .. } => None,
        }
    }
}

impl From<Result<f64>> for ScoreEntry {
    fn from(r: Result<f64>) -> Self {
        match r {
            Ok(v) => ScoreEntry::Value(v),
            Err(e) => ScoreEntry::Error { error: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub doc_id: String,
    pub scores: IndexMap<Measure, ScoreEntry>,
    pub direction: IndexMap<Measure, Direction>,
}

impl MeasureReport {
    pub fn has_errors(&self) -> bool {
        self.scores.values().any(|s| s.value().is_none())
    }
}

/// Profile a document and evaluate every configured measure on it.
/// Failing measures are recorded as error entries.
pub fn score_all(doc: &Document, config: &ScoreConfig) -> MeasureReport {
    let p = profile(doc, config.wordlist.as_ref(), config.lang);
    score_profile(&doc.id, &p, config)
}

pub fn score_profile(doc_id: &str, p: &StatProfile, config: &ScoreConfig) -> MeasureReport {
    let mut scores = IndexMap::new();
    let mut direction = IndexMap::new();
    for &m in &config.measures {
        scores.insert(m, m.compute(p, config.gfi_variant).into());
        direction.insert(m, m.direction());
    }
    MeasureReport { doc_id: doc_id.to_string(), scores, direction }
}
