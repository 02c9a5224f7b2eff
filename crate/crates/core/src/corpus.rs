//! Labeled corpora: manifest ingestion, chunking, stratified splitting and
//! a synthetic graded-corpus generator.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textseg::{Document, Sentence};

pub const MANIFEST_HEADER: [&str; 3] = ["doc_path", "class_name", "class_index"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing file {}: {source}", path.display())]
    MissingFile { path: PathBuf, source: io::Error },
    #[error("bad manifest row at line {line}: {message}")]
    BadRow { line: u64, message: String },
    #[error("class indices are not contiguous from 0: found {0:?}")]
    NonContiguousClasses(Vec<usize>),
    #[error("class {0} has no documents")]
    EmptyClass(usize),
    #[error("class {class} has {size} documents, fewer than k = {k}")]
    ClassSmallerThanK { class: usize, size: usize, k: usize },
    #[error("invalid corpus: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// Documents with ordinal class labels `0..C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub documents: Vec<Document>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    /// Manifest the corpus was loaded from, if any.
    pub source: Option<PathBuf>,
}

impl LabeledCorpus {
    pub fn new(documents: Vec<Document>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if documents.len() != labels.len() {
            return Err(CorpusError::Invalid(format!(
                "{} documents but {} labels",
                documents.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(CorpusError::Invalid(format!("label {bad} outside 0..{}", class_names.len())));
        }
        let mut ids = HashSet::new();
        if let Some(dup) = documents.iter().find(|d| !ids.insert(d.id.as_str())) {
            return Err(CorpusError::Invalid(format!("duplicate document id `{}`", dup.id)));
        }
        Ok(Self { documents, labels, class_names, source: None })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Document indices grouped by class, in corpus order.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.indices_by_class().iter().map(Vec::len).collect()
    }

    /// Sub-corpus with the given document indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledCorpus {
        LabeledCorpus {
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            source: self.source.clone(),
        }
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.documents.iter().position(|d| d.id == doc_id)
    }

    /// Directory that manifest doc paths are relative to.
    pub fn base_dir(&self) -> Option<PathBuf> {
        self.source.as_ref().map(|p| p.parent().map(Path::to_path_buf).unwrap_or_default())
    }
}

fn tsv_reader<R: io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .quoting(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(r)
}

/// Read a TSV manifest (`doc_path`, `class_name`, `class_index`). Document
/// paths are relative to the manifest's directory and double as document ids.
pub fn load_manifest(path: &Path) -> Result<LabeledCorpus> {
    let file = fs::File::open(path).map_err(|source| CorpusError::MissingFile { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = tsv_reader(file);

    let header = reader.headers().map_err(|e| CorpusError::BadRow { line: 1, message: e.to_string() })?;
    if header.iter().map(str::trim).ne(MANIFEST_HEADER) {
        return Err(CorpusError::BadRow {
            line: 1,
            message: format!("expected header `{}`", MANIFEST_HEADER.join("\\t")),
        });
    }

    let mut documents = Vec::new();
    let mut labels = Vec::new();
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut seen = HashSet::new();

    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::BadRow {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| CorpusError::BadRow { line, message };
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() != 3 {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", record.len())));
        }
        let doc_path = record[0].trim();
        let class_name = record[1].trim();
        let class_index: usize = record[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("class_index `{}` is not a non-negative integer", &record[2])))?;
        if doc_path.is_empty() {
            return Err(bad("empty doc_path".into()));
        }
        if !seen.insert(doc_path.to_string()) {
            return Err(bad(format!("duplicate document id `{doc_path}`")));
        }
        match names.get(&class_index) {
            Some(existing) if existing != class_name => {
                return Err(bad(format!(
                    "class {class_index} named `{class_name}` here but `{existing}` earlier"
                )))
            }
            Some(_) => {}
            None => {
                names.insert(class_index, class_name.to_string());
            }
        }
        let full = base.join(doc_path);
        let text = fs::read_to_string(&full).map_err(|source| CorpusError::MissingFile { path: full, source })?;
        documents.push(Document::new(doc_path, text));
        labels.push(class_index);
    }

    let indices: Vec<usize> = names.keys().copied().collect();
    if indices.iter().enumerate().any(|(i, &c)| i != c) {
        return Err(CorpusError::NonContiguousClasses(indices));
    }
    let mut corpus = LabeledCorpus::new(documents, labels, names.into_values().collect())?;
    corpus.source = Some(path.to_path_buf());
    Ok(corpus)
}

/// Path of `target` expressed relative to directory `from`. Both are made
/// absolute first.
fn relative_path(target: &Path, from: &Path) -> io::Result<PathBuf> {
    let target = fs::canonicalize(target)?;
    let from = fs::canonicalize(from)?;
    let t: Vec<Component> = target.components().collect();
    let f: Vec<Component> = from.components().collect();
    let common = t.iter().zip(&f).take_while(|(a, b)| a == b).count();
    let mut rel = PathBuf::new();
    for _ in common..f.len() {
        rel.push("..");
    }
    for c in &t[common..] {
        rel.push(c.as_os_str());
    }
    Ok(rel)
}

/// Write a manifest into `out_dir` that points at the documents of a corpus
/// loaded from disk. Paths are rewritten relative to `out_dir`.
pub fn write_manifest_for_loaded(corpus: &LabeledCorpus, out_path: &Path) -> Result<String> {
    let base = corpus
        .base_dir()
        .ok_or_else(|| CorpusError::Invalid("corpus was not loaded from a manifest".into()))?;
    let out_dir = out_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_dir = if out_dir.as_os_str().is_empty() { PathBuf::from(".") } else { out_dir };
    let mut text = MANIFEST_HEADER.join("\t");
    text.push('\n');
    for (doc, &label) in corpus.documents.iter().zip(&corpus.labels) {
        let rel = relative_path(&base.join(&doc.id), &out_dir)?;
        text.push_str(&format!("{}\t{}\t{}\n", rel.display(), corpus.class_names[label], label));
    }
    Ok(text)
}

fn file_name_for(id: &str) -> String {
    let cleaned: String = id
        .chars()
        .map(|c| if c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | '#') { c } else { '_' })
        .collect();
    if cleaned.ends_with(".txt") {
        cleaned
    } else {
        format!("{cleaned}.txt")
    }
}

/// Materialize a corpus as `docs/*.txt` plus `manifest.tsv` under `dir`.
/// Returns the manifest path.
pub fn write_corpus_dir(corpus: &LabeledCorpus, dir: &Path) -> Result<PathBuf> {
    let docs_dir = dir.join("docs");
    fs::create_dir_all(&docs_dir)?;
    let mut manifest = MANIFEST_HEADER.join("\t");
    manifest.push('\n');
    let mut used = HashSet::new();
    for (doc, &label) in corpus.documents.iter().zip(&corpus.labels) {
        let mut name = file_name_for(&doc.id);
        let mut n = 1;
        while !used.insert(name.clone()) {
            name = format!("{}-{n}.txt", file_name_for(&doc.id).trim_end_matches(".txt"));
            n += 1;
        }
        crate::output::write_atomic(&docs_dir.join(&name), doc.raw_text.as_bytes())?;
        manifest.push_str(&format!("docs/{name}\t{}\t{label}\n", corpus.class_names[label]));
    }
    let path = dir.join("manifest.tsv");
    crate::output::write_atomic(&path, manifest.as_bytes())?;
    Ok(path)
}

/// Cut a document into chunks of `n` consecutive sentences. A trailing
/// remainder shorter than `min_tail` is merged into the previous chunk.
/// Chunk ids are `{doc_id}#{k}` with `k` counting from 0.
pub fn chunk_document(doc: &Document, n: usize, min_tail: usize) -> Vec<Document> {
    assert!(n >= 1, "chunk size must be at least 1");
    let mut groups: Vec<Vec<Sentence>> = doc.sentences.chunks(n).map(<[Sentence]>::to_vec).collect();
    if groups.len() >= 2 {
        let last_len = groups.last().map_or(0, Vec::len);
        if last_len < n && last_len < min_tail {
            let tail = groups.pop().unwrap_or_default();
            if let Some(prev) = groups.last_mut() {
                prev.extend(tail);
            }
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(k, sentences)| Document::from_sentences(format!("{}#{k}", doc.id), sentences))
        .collect()
}

/// Chunk every document, carrying labels over to the chunks.
pub fn chunk_corpus(corpus: &LabeledCorpus, n: usize, min_tail: usize) -> LabeledCorpus {
    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for (doc, &label) in corpus.documents.iter().zip(&corpus.labels) {
        for chunk in chunk_document(doc, n, min_tail) {
            documents.push(chunk);
            labels.push(label);
        }
    }
    LabeledCorpus { documents, labels, class_names: corpus.class_names.clone(), source: None }
}

/// Ratios and seed for [`stratified_split`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// (train, validation, test), each >= 0, summing to 1.
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { ratios: [0.8, 0.1, 0.1], seed: 0 }
    }
}

impl SplitSpec {
    fn validate(&self) -> Result<()> {
        let sum: f64 = self.ratios.iter().sum();
        if self.ratios.iter().any(|r| r.is_nan() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::Invalid(format!("split ratios {:?} must be >= 0 and sum to 1", self.ratios)));
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` items over `ratios`. Ties in the
/// remainder go to the earlier slot.
pub fn largest_remainder(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &slot in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[slot] += 1;
    }
    counts
}

/// Document indices of a train/validation/test partition, each in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.train, &self.validation, &self.test]
    }
}

/// Per-class seat counts of a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassAllocation {
    pub class_index: usize,
    pub class_name: String,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub allocation: Vec<ClassAllocation>,
}

fn shuffled_classes(corpus: &LabeledCorpus, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = corpus.indices_by_class();
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    groups
}

/// Per-class shuffled split with largest-remainder allocation.
pub fn stratified_split(corpus: &LabeledCorpus, spec: &SplitSpec) -> Result<(SplitIndices, SplitRecord)> {
    spec.validate()?;
    if let Some(empty) = corpus.class_counts().iter().position(|&c| c == 0) {
        return Err(CorpusError::EmptyClass(empty));
    }
    let mut split = SplitIndices { train: Vec::new(), validation: Vec::new(), test: Vec::new() };
    let mut allocation = Vec::new();
    for (class, group) in shuffled_classes(corpus, spec.seed).into_iter().enumerate() {
        let counts = largest_remainder(group.len(), &spec.ratios);
        let (train, rest) = group.split_at(counts[0]);
        let (validation, test) = rest.split_at(counts[1]);
        split.train.extend_from_slice(train);
        split.validation.extend_from_slice(validation);
        split.test.extend_from_slice(test);
        allocation.push(ClassAllocation {
            class_index: class,
            class_name: corpus.class_names[class].clone(),
            train: counts[0],
            validation: counts[1],
            test: counts[2],
        });
    }
    for part in [&mut split.train, &mut split.validation, &mut split.test] {
        part.sort_unstable();
    }
    Ok((split, SplitRecord { seed: spec.seed, ratios: spec.ratios, allocation }))
}

/// Stratified k-fold rounds. Round `i` tests on fold `i`, validates on fold
/// `(i + 1) % k` and trains on the rest.
pub fn stratified_kfold(corpus: &LabeledCorpus, k: usize, seed: u64) -> Result<Vec<SplitIndices>> {
    if k < 2 {
        return Err(CorpusError::Invalid(format!("k must be at least 2, got {k}")));
    }
    for (class, &size) in corpus.class_counts().iter().enumerate() {
        if size < k {
            return Err(CorpusError::ClassSmallerThanK { class, size, k });
        }
    }
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for group in shuffled_classes(corpus, seed) {
        let (base, extra) = (group.len() / k, group.len() % k);
        let mut start = 0;
        for (f, fold) in folds.iter_mut().enumerate() {
            let size = base + usize::from(f < extra);
            fold.extend_from_slice(&group[start..start + size]);
            start += size;
        }
    }
    Ok((0..k)
        .map(|i| {
            let v = (i + 1) % k;
            let mut test = folds[i].clone();
            let mut validation = folds[v].clone();
            let mut train: Vec<usize> =
                (0..k).filter(|&f| f != i && f != v).flat_map(|f| folds[f].iter().copied()).collect();
            test.sort_unstable();
            validation.sort_unstable();
            train.sort_unstable();
            SplitIndices { train, validation, test }
        })
        .collect())
}

/// Short words: at most 7 letters and 2 syllables.
pub const COMMON_WORDS: &[&str] = &[
    "the", "a", "cat", "dog", "sun", "run", "big", "red", "home", "tree", "bird", "fish", "play", "jump",
    "good", "day", "see", "look", "book", "ball", "park", "milk", "girl", "boy", "hat", "cup", "box", "sit",
    "went", "came", "had", "was", "and", "to", "in", "on", "with", "small", "happy", "water", "mother",
    "father", "friend", "school", "garden", "rain", "walk", "sing", "song", "blue", "green", "warm", "cold",
    "food", "bread", "apple", "little", "window", "door", "hand",
];

/// Long words: more than 7 letters and at least 3 syllables.
pub const RARE_WORDS: &[&str] = &[
    "extraordinary", "administration", "infrastructure", "philosophical", "international",
    "responsibility", "communication", "determination", "environmental", "understanding",
    "organization", "consideration", "representative", "investigation", "significantly",
    "particularly", "contemporary", "interpretation", "institutional", "fundamentally",
    "comprehensive", "sophisticated", "accommodation", "characteristic", "approximately",
    "establishment", "documentation", "circumstances", "jurisdiction", "relationship",
    "opportunity", "independently", "manufacturing", "experimental", "conventional",
    "negotiation", "mathematical", "legislation", "predominantly", "technological",
];

/// Shape of the synthetic graded corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    /// Mean sentence length of class 0, in words.
    pub base_sentence_len: usize,
    /// Increase in mean sentence length per class.
    pub step: usize,
    /// Sentence length varies uniformly within mean ± jitter.
    pub jitter: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    /// Rare-word rate of class 0.
    pub base_rare_rate: f64,
    /// Rare-word rate of the hardest class.
    pub max_rare_rate: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            base_sentence_len: 8,
            step: 4,
            jitter: 2,
            min_sentences: 8,
            max_sentences: 12,
            base_rare_rate: 0.03,
            max_rare_rate: 0.30,
        }
    }
}

impl SyntheticParams {
    pub fn rare_rate(&self, class: usize, n_classes: usize) -> f64 {
        if n_classes < 2 {
            return self.base_rare_rate;
        }
        let t = class as f64 / (n_classes - 1) as f64;
        self.base_rare_rate + t * (self.max_rare_rate - self.base_rare_rate)
    }

    pub fn mean_sentence_len(&self, class: usize) -> usize {
        self.base_sentence_len + class * self.step
    }
}

fn synthetic_sentence(rng: &mut ChaCha8Rng, len: usize, rare_rate: f64) -> String {
    let mut words: Vec<String> = (0..len)
        .map(|_| {
            let pool = if rng.gen_bool(rare_rate) { RARE_WORDS } else { COMMON_WORDS };
            pool[rng.gen_range(0..pool.len())].to_string()
        })
        .collect();
    if let Some(first) = words.first_mut() {
        let mut chars = first.chars();
        if let Some(c) = chars.next() {
            *first = c.to_uppercase().chain(chars).collect();
        }
    }
    format!("{}.", words.join(" "))
}

/// Generate a graded corpus with [`SyntheticParams::default`].
pub fn generate_synthetic(n_classes: usize, docs_per_class: usize, seed: u64) -> LabeledCorpus {
    generate_synthetic_with(n_classes, docs_per_class, seed, &SyntheticParams::default())
}

/// Class `c` gets longer sentences and more rare (long, polysyllabic) words
/// as `c` grows. Fully determined by the arguments.
pub fn generate_synthetic_with(
    n_classes: usize,
    docs_per_class: usize,
    seed: u64,
    params: &SyntheticParams,
) -> LabeledCorpus {
    assert!(n_classes >= 2, "synthetic corpus needs at least two classes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::with_capacity(n_classes * docs_per_class);
    let mut labels = Vec::with_capacity(n_classes * docs_per_class);
    for class in 0..n_classes {
        let mean = params.mean_sentence_len(class);
        let rare = params.rare_rate(class, n_classes);
        for i in 0..docs_per_class {
            let n_sent = rng.gen_range(params.min_sentences..=params.max_sentences);
            let sentences: Vec<String> = (0..n_sent)
                .map(|_| {
                    let len = rng.gen_range(mean.saturating_sub(params.jitter).max(1)..=mean + params.jitter);
                    synthetic_sentence(&mut rng, len, rare)
                })
                .collect();
            documents.push(Document::new(format!("synth-c{class}-{i:04}"), sentences.join(" ")));
            labels.push(class);
        }
    }
    let class_names = (0..n_classes).map(|c| format!("level{c}")).collect();
    LabeledCorpus { documents, labels, class_names, source: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textseg::{count_syllables, SyllableProfile};

    fn doc_with_sentences(n: usize) -> Document {
        let text: Vec<String> = (0..n).map(|i| format!("Sentence number {i} ends here.")).collect();
        Document::new("doc", text.join(" "))
    }

    fn corpus(per_class: &[usize]) -> LabeledCorpus {
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for (c, &n) in per_class.iter().enumerate() {
            for i in 0..n {
                docs.push(Document::new(format!("c{c}-{i}"), "Text."));
                labels.push(c);
            }
        }
        let names = (0..per_class.len()).map(|c| format!("k{c}")).collect();
        LabeledCorpus::new(docs, labels, names).unwrap()
    }

    #[test]
    fn chunk_sizes() {
        let sizes = |n: usize, min_tail: usize| -> Vec<usize> {
            chunk_document(&doc_with_sentences(n), 25, min_tail).iter().map(|d| d.sentences.len()).collect()
        };
        assert_eq!(sizes(60, 1), vec![25, 25, 10]);
        assert_eq!(sizes(25, 1), vec![25]);
        assert_eq!(sizes(24, 1), vec![24]);
        assert_eq!(sizes(60, 11), vec![25, 35]);
        assert_eq!(sizes(3, 5), vec![3]);
        assert!(sizes(0, 1).is_empty());
        let ids: Vec<_> = chunk_document(&doc_with_sentences(60), 25, 1).into_iter().map(|d| d.id).collect();
        assert_eq!(ids, ["doc#0", "doc#1", "doc#2"]);
    }

    #[test]
    fn chunk_text_resegments_identically() {
        let chunks = chunk_document(&doc_with_sentences(7), 3, 1);
        for c in chunks {
            assert_eq!(Document::new(c.id.clone(), c.raw_text.clone()), c);
        }
    }

    #[test]
    fn largest_remainder_examples() {
        assert_eq!(largest_remainder(10, &[0.8, 0.1, 0.1]), vec![8, 1, 1]);
        assert_eq!(largest_remainder(7, &[0.8, 0.1, 0.1]), vec![5, 1, 1]);
        assert_eq!(largest_remainder(1, &[0.8, 0.1, 0.1]), vec![1, 0, 0]);
        assert_eq!(largest_remainder(0, &[0.8, 0.1, 0.1]), vec![0, 0, 0]);
    }

    #[test]
    fn split_exact_division_and_class_of_seven() {
        let (split, record) = stratified_split(&corpus(&[10, 10, 10]), &SplitSpec::default()).unwrap();
        assert_eq!((split.train.len(), split.validation.len(), split.test.len()), (24, 3, 3));
        assert!(record.allocation.iter().all(|a| (a.train, a.validation, a.test) == (8, 1, 1)));

        let (_, record) = stratified_split(&corpus(&[7, 3]), &SplitSpec::default()).unwrap();
        let a = &record.allocation[0];
        assert_eq!((a.train, a.validation, a.test), (5, 1, 1));
    }

    #[test]
    fn split_errors() {
        let mut c = corpus(&[3, 3]);
        c.class_names.push("empty".into());
        assert!(matches!(stratified_split(&c, &SplitSpec::default()), Err(CorpusError::EmptyClass(2))));
        let bad = SplitSpec { ratios: [0.5, 0.5, 0.5], seed: 0 };
        assert!(matches!(stratified_split(&corpus(&[3]), &bad), Err(CorpusError::Invalid(_))));
    }

    #[test]
    fn kfold_sizes() {
        let c = corpus(&[10, 10]);
        let folds = stratified_kfold(&c, 5, 0).unwrap();
        for f in &folds {
            assert_eq!((f.train.len(), f.validation.len(), f.test.len()), (12, 4, 4));
        }
        let c = corpus(&[11]);
        let folds = stratified_kfold(&c, 5, 3).unwrap();
        let test_sizes: Vec<_> = folds.iter().map(|f| f.test.len()).collect();
        assert_eq!(test_sizes, vec![3, 2, 2, 2, 2]);
        assert!(matches!(
            stratified_kfold(&corpus(&[4, 9]), 5, 0),
            Err(CorpusError::ClassSmallerThanK { class: 0, size: 4, k: 5 })
        ));
    }

    #[test]
    fn synthetic_vocabulary_tiers() {
        for w in COMMON_WORDS {
            assert!(w.len() <= 7 && count_syllables(w, SyllableProfile::En) <= 2, "{w}");
        }
        for w in RARE_WORDS {
            assert!(w.len() > 7 && count_syllables(w, SyllableProfile::En) >= 3, "{w}");
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_balanced() {
        let a = generate_synthetic(3, 20, 9);
        let b = generate_synthetic(3, 20, 9);
        assert_eq!(a, b);
        assert_eq!(a.class_counts(), vec![20, 20, 20]);
        assert_ne!(a, generate_synthetic(3, 20, 10));
    }
}
