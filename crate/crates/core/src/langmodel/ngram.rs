use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{LikelihoodProvider, LmError, Result, SentenceRef, TokenScore};

/// Reserved unknown-word marker. Part of the outcome vocabulary.
pub const UNK: &str = "<unk>";
/// Sentence-start padding marker. Appears only in histories.
pub const BOS: &str = "<s>";
/// End-of-sentence marker. Predicted (and counted) only when order >= 2.
pub const EOS: &str = "</s>";

const BOS_ID: u32 = u32::MAX;
const UNK_ID: u32 = 0;
const HEADER_MAGIC: &str = "readlab-ngram v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Smoothing {
    /// Additive smoothing `(c(h,w) + k) / (c(h) + k|V|)`.
    #[default]
    AddK,
    /// Interpolated Witten-Bell, recursing down to a uniform distribution.
    WittenBell,
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothing::AddK => "add-k",
            Smoothing::WittenBell => "witten-bell",
        })
    }
}

impl FromStr for Smoothing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "add-k" => Ok(Smoothing::AddK),
            "witten-bell" => Ok(Smoothing::WittenBell),
            other => Err(format!("unknown smoothing `{other}` (expected add-k or witten-bell)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub order: usize,
    pub smoothing: Smoothing,
    /// Additive constant for [`Smoothing::AddK`]; must be > 0.
    pub k: f64,
    /// Words seen fewer times are mapped to [`UNK`].
    pub min_count: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { order: 2, smoothing: Smoothing::AddK, k: 1.0, min_count: 1 }
    }
}

impl TrainOptions {
    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(LmError::InvalidOptions("order must be at least 1".into()));
        }
        if self.smoothing == Smoothing::AddK && !(self.k > 0.0 && self.k.is_finite()) {
            return Err(LmError::InvalidOptions(format!("k must be a positive finite number, got {}", self.k)));
        }
        Ok(())
    }
}

/// A smoothed n-gram model over a closed vocabulary plus [`UNK`].
///
/// Histories are padded with `order - 1` [`BOS`] markers per sentence and
/// never cross sentence boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    options: TrainOptions,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `counts[l]` holds (l+1)-grams: history ids followed by the word id.
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// `contexts[l]` maps an l-token history to (total count, distinct followers).
    contexts: Vec<HashMap<Vec<u32>, (u64, u64)>>,
}

fn is_reserved(token: &str) -> bool {
    matches!(token, UNK | BOS | EOS)
}

/// Train an n-gram model on tokenized sentences.
pub fn train_ngram<S: AsRef<[String]>>(sentences: &[S], options: TrainOptions) -> Result<NGramModel> {
    options.validate()?;
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for sentence in sentences {
        for token in sentence.as_ref() {
            *freq.entry(token.as_str()).or_default() += 1;
        }
    }
    if freq.is_empty() {
        return Err(LmError::EmptyCorpus);
    }

    let words = freq
        .into_iter()
        .filter(|(w, c)| *c >= options.min_count && !is_reserved(w))
        .map(|(w, _)| w.to_string());
    let mut model = NGramModel::with_vocab(options, words);

    let pad = options.order - 1;
    for sentence in sentences {
        let tokens = sentence.as_ref();
        if tokens.is_empty() {
            continue;
        }
        let mut seq: Vec<u32> = vec![BOS_ID; pad];
        seq.extend(tokens.iter().map(|t| model.lookup(t)));
        if options.order >= 2 {
            seq.push(model.index[EOS]);
        }
        for pos in pad..seq.len() {
            for len in 1..=options.order {
                let gram = &seq[pos + 1 - len..=pos];
                *model.counts[len - 1].entry(gram.to_vec()).or_default() += 1;
            }
        }
    }
    model.rebuild_contexts();
    Ok(model)
}

impl NGramModel {
    fn with_vocab(options: TrainOptions, words: impl Iterator<Item = String>) -> Self {
        let mut vocab = vec![UNK.to_string()];
        if options.order >= 2 {
            vocab.push(EOS.to_string());
        }
        vocab.extend(words);
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        Self {
            options,
            vocab,
            index,
            counts: vec![HashMap::new(); options.order],
            contexts: Vec::new(),
        }
    }

    fn rebuild_contexts(&mut self) {
        self.contexts = self
            .counts
            .iter()
            .map(|level| {
                let mut ctx: HashMap<Vec<u32>, (u64, u64)> = HashMap::new();
                for (gram, &c) in level {
                    let e = ctx.entry(gram[..gram.len() - 1].to_vec()).or_default();
                    e.0 += c;
                    e.1 += 1;
                }
                ctx
            })
            .collect();
    }

    fn lookup(&self, token: &str) -> u32 {
        if token == BOS {
            return BOS_ID;
        }
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn order(&self) -> usize {
        self.options.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.options.smoothing
    }

    pub fn k(&self) -> f64 {
        self.options.k
    }

    pub fn options(&self) -> TrainOptions {
        self.options
    }

    /// Outcome vocabulary: [`UNK`], [`EOS`] (order >= 2), then known words.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Whether a surface token is a known (non-reserved) word.
    pub fn contains(&self, token: &str) -> bool {
        !is_reserved(token) && self.index.contains_key(token)
    }

    /// `P(word | history)`. Only the last `order - 1` history tokens are
    /// used; shorter histories are left-padded with [`BOS`]. Unknown
    /// tokens resolve to [`UNK`].
    pub fn prob(&self, history: &[&str], word: &str) -> f64 {
        let hist = self.history_ids(history.iter().map(|h| self.lookup(h)));
        self.prob_ids(&hist, self.lookup(word))
    }

    fn history_ids(&self, ids: impl DoubleEndedIterator<Item = u32>) -> Vec<u32> {
        let pad = self.options.order - 1;
        let mut tail: Vec<u32> = ids.rev().take(pad).collect();
        tail.resize(pad, BOS_ID);
        tail.reverse();
        tail
    }

    /// `hist` has exactly `order - 1` ids.
    fn prob_ids(&self, hist: &[u32], word: u32) -> f64 {
        let v = self.vocab.len() as f64;
        let gram_count = |level: usize, h: &[u32]| -> u64 {
            let mut key = Vec::with_capacity(h.len() + 1);
            key.extend_from_slice(h);
            key.push(word);
            self.counts[level].get(&key).copied().unwrap_or(0)
        };
        match self.options.smoothing {
            Smoothing::AddK => {
                let top = self.options.order - 1;
                let (total, _) = self.contexts[top].get(hist).copied().unwrap_or((0, 0));
                let k = self.options.k;
                (gram_count(top, hist) as f64 + k) / (total as f64 + k * v)
            }
            Smoothing::WittenBell => {
                let mut p = 1.0 / v;
                for level in 0..self.options.order {
                    let h = &hist[hist.len() - level..];
                    if let Some(&(total, types)) = self.contexts[level].get(h) {
                        let (total, types) = (total as f64, types as f64);
                        p = (gram_count(level, h) as f64 + types * p) / (total + types);
                    }
                }
                p
            }
        }
    }

    /// Score a token sequence as one sentence.
    pub fn score(&self, tokens: &[String]) -> Vec<TokenScore> {
        let pad = self.options.order - 1;
        let mut window: Vec<u32> = vec![BOS_ID; pad];
        tokens
            .iter()
            .map(|t| {
                let id = self.lookup(t);
                let probability = self.prob_ids(&window, id);
                if pad > 0 {
                    window.remove(0);
                    window.push(id);
                }
                TokenScore { token: t.clone(), probability, oov: id == UNK_ID }
            })
            .collect()
    }

    fn token_name(&self, id: u32) -> &str {
        if id == BOS_ID {
            BOS
        } else {
            &self.vocab[id as usize]
        }
    }

    /// Write the model in the `readlab-ngram v1` text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "{HEADER_MAGIC} order={} smoothing={} k={}",
            self.options.order, self.options.smoothing, self.options.k
        )?;
        writeln!(out, "min_count={}", self.options.min_count)?;
        writeln!(out)?;
        writeln!(out, "\\vocab {}", self.vocab.len())?;
        for w in &self.vocab {
            writeln!(out, "{w}")?;
        }
        for (level, grams) in self.counts.iter().enumerate() {
            writeln!(out)?;
            writeln!(out, "\\{}-grams {}", level + 1, grams.len())?;
            let mut sorted: Vec<_> = grams.iter().collect();
            sorted.sort();
            for (gram, count) in sorted {
                let names: Vec<&str> = gram.iter().map(|&id| self.token_name(id)).collect();
                writeln!(out, "{count}\t{}", names.join(" "))?;
            }
        }
        writeln!(out)?;
        writeln!(out, "\\end\\")?;
        Ok(())
    }

    /// Serialized model with a `#` comment line inserted after the header.
    pub fn to_text_with_comment(&self, comment: &str) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        let text = String::from_utf8(buf).expect("model text is UTF-8");
        let (header, rest) = text.split_once('\n').unwrap_or((&text, ""));
        format!("{header}\n# {}\n{rest}", comment.trim_start_matches('#').trim())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let bad = |line: usize, message: String| LmError::MalformedModel { line, message };

        let (_, header) = lines.next().ok_or_else(|| LmError::VersionMismatch("empty model file".into()))?;
        let options = parse_header(header)?;
        let mut options = options;

        let mut vocab_words: Option<Vec<String>> = None;
        let mut counts: Vec<Vec<(usize, u64, Vec<String>)>> = Vec::new();
        let mut section: Option<(usize, usize)> = None; // (level, expected)
        let mut in_vocab: Option<usize> = None;
        let mut seen_end = false;

        for (ln, line) in lines {
            let line = line.trim_end();
            if line.is_empty() || (in_vocab.is_none() && line.starts_with('#')) {
                continue;
            }
            if let Some(rest) = line.strip_prefix("min_count=") {
                options.min_count = rest.parse().map_err(|_| bad(ln, format!("bad min_count `{rest}`")))?;
                continue;
            }
            if line == "\\end\\" {
                seen_end = true;
                break;
            }
            if let Some(rest) = line.strip_prefix("\\vocab ") {
                let n: usize = rest.parse().map_err(|_| bad(ln, format!("bad vocab size `{rest}`")))?;
                vocab_words = Some(Vec::with_capacity(n));
                in_vocab = Some(n);
                section = None;
                continue;
            }
            if let Some(rest) = line.strip_prefix('\\') {
                let (level, n) = rest
                    .split_once("-grams ")
                    .and_then(|(l, n)| Some((l.parse::<usize>().ok()?, n.parse::<usize>().ok()?)))
                    .ok_or_else(|| bad(ln, format!("unknown section `{line}`")))?;
                if level != counts.len() + 1 || level > options.order {
                    return Err(bad(ln, format!("unexpected {level}-gram section")));
                }
                counts.push(Vec::with_capacity(n));
                section = Some((level, n));
                in_vocab = None;
                continue;
            }
            if in_vocab.is_some() {
                vocab_words.get_or_insert_with(Vec::new).push(line.to_string());
                continue;
            }
            let Some((level, _)) = section else {
                return Err(bad(ln, format!("unexpected line `{line}`")));
            };
            let (count, gram) = line.split_once('\t').ok_or_else(|| bad(ln, "missing tab".into()))?;
            let count: u64 = count.parse().map_err(|_| bad(ln, format!("bad count `{count}`")))?;
            let gram: Vec<String> = gram.split(' ').map(str::to_string).collect();
            if gram.len() != level {
                return Err(bad(ln, format!("expected {level} tokens, found {}", gram.len())));
            }
            counts[level - 1].push((ln, count, gram));
        }
        if !seen_end {
            return Err(bad(text.lines().count(), "missing \\end\\ marker".into()));
        }
        let vocab_words = vocab_words.ok_or_else(|| bad(0, "missing \\vocab section".into()))?;
        if counts.len() != options.order {
            return Err(bad(0, format!("expected {} count sections, found {}", options.order, counts.len())));
        }

        let mut expected_prefix = vec![UNK.to_string()];
        if options.order >= 2 {
            expected_prefix.push(EOS.to_string());
        }
        if !vocab_words.starts_with(&expected_prefix) {
            return Err(bad(0, "vocabulary must start with the reserved markers".into()));
        }
        let words = vocab_words[expected_prefix.len()..].iter().cloned();
        let mut model = NGramModel::with_vocab(options, words);
        if model.vocab.len() != model.index.len() {
            return Err(bad(0, "duplicate vocabulary entries".into()));
        }
        for (level, grams) in counts.into_iter().enumerate() {
            for (ln, count, gram) in grams {
                let ids = gram
                    .iter()
                    .map(|t| {
                        if t == BOS {
                            Ok(BOS_ID)
                        } else {
                            model.index.get(t).copied().ok_or_else(|| bad(ln, format!("token `{t}` not in vocabulary")))
                        }
                    })
                    .collect::<Result<Vec<u32>>>()?;
                model.counts[level].insert(ids, count);
            }
        }
        model.rebuild_contexts();
        Ok(model)
    }
}

fn parse_header(header: &str) -> Result<TrainOptions> {
    let rest = header
        .strip_prefix(HEADER_MAGIC)
        .ok_or_else(|| LmError::VersionMismatch(format!("expected `{HEADER_MAGIC}` header, found `{header}`")))?;
    let mut options = TrainOptions::default();
    let mismatch = |m: String| LmError::VersionMismatch(m);
    let (mut order, mut smoothing, mut k) = (None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| mismatch(format!("bad header field `{field}`")))?;
        match key {
            "order" => order = Some(value.parse::<usize>().map_err(|_| mismatch(format!("bad order `{value}`")))?),
            "smoothing" => smoothing = Some(value.parse::<Smoothing>().map_err(mismatch)?),
            "k" => k = Some(value.parse::<f64>().map_err(|_| mismatch(format!("bad k `{value}`")))?),
            other => return Err(mismatch(format!("unknown header field `{other}`"))),
        }
    }
    options.order = order.ok_or_else(|| mismatch("header lacks order".into()))?;
    options.smoothing = smoothing.ok_or_else(|| mismatch("header lacks smoothing".into()))?;
    options.k = k.ok_or_else(|| mismatch("header lacks k".into()))?;
    options.validate().map_err(|e| mismatch(e.to_string()))?;
    Ok(options)
}

impl LikelihoodProvider for NGramModel {
    fn score_sentence(&self, sentence: SentenceRef<'_>) -> Result<Vec<TokenScore>> {
        Ok(self.score(sentence.tokens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn add1(order: usize) -> TrainOptions {
        TrainOptions { order, ..TrainOptions::default() }
    }

    #[test]
    fn unigram_add_one_hand_values() {
        let m = train_ngram(&[toks("a a b")], add1(1)).unwrap();
        assert_eq!(m.vocabulary(), &["<unk>", "a", "b"]);
        assert!((m.prob(&[], "a") - 0.5).abs() < 1e-12);
        assert!((m.prob(&[], "b") - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.prob(&[], UNK) - 1.0 / 6.0).abs() < 1e-12);

        let scores = m.score(&toks("a b"));
        assert!((scores[0].probability - 0.5).abs() < 1e-12);
        assert!((scores[1].probability - 1.0 / 3.0).abs() < 1e-12);
        assert!(scores.iter().all(|s| !s.oov));

        let z = m.score(&toks("z"));
        assert!((z[0].probability - 1.0 / 6.0).abs() < 1e-12);
        assert!(z[0].oov);
    }

    #[test]
    fn bigram_add_one_hand_value() {
        let m = train_ngram(&[toks("a b a b")], add1(2)).unwrap();
        assert_eq!(m.vocab_size(), 4);
        assert!((m.prob(&["a"], "b") - 0.5).abs() < 1e-12);
        // c(<s>, a) = 1, c(<s>) = 1
        assert!((m.prob(&[], "a") - 2.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn min_count_maps_rare_words_to_unk() {
        let opts = TrainOptions { min_count: 2, ..add1(1) };
        let m = train_ngram(&[toks("a a b")], opts).unwrap();
        assert_eq!(m.vocabulary(), &["<unk>", "a"]);
        // a: (2+1)/(3+2), unk absorbs b: (1+1)/(3+2)
        assert!((m.prob(&[], "a") - 0.6).abs() < 1e-12);
        assert!((m.prob(&[], "b") - 0.4).abs() < 1e-12);
        assert!(m.score(&toks("b"))[0].oov);
    }

    #[test]
    fn empty_corpus_and_bad_options() {
        let empty: Vec<Vec<String>> = vec![vec![]];
        assert!(matches!(train_ngram(&empty, add1(2)), Err(LmError::EmptyCorpus)));
        assert!(matches!(train_ngram(&[toks("a")], add1(0)), Err(LmError::InvalidOptions(_))));
        let zero_k = TrainOptions { k: 0.0, ..add1(1) };
        assert!(matches!(train_ngram(&[toks("a")], zero_k), Err(LmError::InvalidOptions(_))));
    }

    #[test]
    fn witten_bell_normalizes_and_prefers_seen() {
        let opts = TrainOptions { smoothing: Smoothing::WittenBell, ..add1(3) };
        let m = train_ngram(&[toks("the cat sat"), toks("the dog sat"), toks("a cat ran")], opts).unwrap();
        for hist in [vec![], vec!["the"], vec!["the", "cat"], vec!["zz", "qq"]] {
            let total: f64 = m.vocabulary().iter().map(|w| m.prob(&hist, w)).sum();
            assert!((total - 1.0).abs() < 1e-12, "{hist:?}: {total}");
        }
        assert!(m.prob(&["the"], "cat") > m.prob(&["the"], "ran"));
        assert!(m.prob(&["the"], "ran") > 0.0);
    }

    #[test]
    fn save_load_round_trip() {
        let corpus = [toks("the cat sat on the mat"), toks("the dog sat")];
        for smoothing in [Smoothing::AddK, Smoothing::WittenBell] {
            let m = train_ngram(&corpus, TrainOptions { order: 3, smoothing, k: 0.25, min_count: 1 }).unwrap();
            let mut buf = Vec::new();
            m.write_to(&mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert!(text.starts_with(&format!("readlab-ngram v1 order=3 smoothing={smoothing} k=0.25\n")));
            let back = NGramModel::parse(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.score(&toks("the cat ran")), m.score(&toks("the cat ran")));
        }
    }

    #[test]
    fn corrupted_header_is_version_mismatch() {
        let m = train_ngram(&[toks("a b")], add1(2)).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("v1", "v9", 1);
        assert!(matches!(NGramModel::parse(&text), Err(LmError::VersionMismatch(_))));
        assert!(matches!(NGramModel::parse(""), Err(LmError::VersionMismatch(_))));
    }

    #[test]
    fn truncated_file_is_malformed() {
        let m = train_ngram(&[toks("a b")], add1(2)).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut = &text[..text.len() - 7];
        assert!(matches!(NGramModel::parse(cut), Err(LmError::MalformedModel { .. })));
    }
}
