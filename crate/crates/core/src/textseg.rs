//! Sentence splitting, word tokenization, syllable counting and the surface
//! count profile consumed by the traditional readability formulas.
//!
//! Everything here is rule-based and deterministic: the same bytes always
//! produce the same sentences, tokens and counts.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Version tag of [`ABBREVIATIONS`]. Bump whenever the list changes.
pub const ABBREVIATIONS_VERSION: u32 = 1;

/// Lowercased abbreviations (without the final period) after which a period
/// never ends a sentence. English titles and Latin shorthands plus a handful
/// of common Slovenian abbreviations.
pub const ABBREVIATIONS: &[&str] = &[
    // English
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "e.g", "i.e", "cf",
    "inc", "ltd", "co", "corp", "dept", "fig", "figs", "vol", "vols", "pp", "approx",
    "gen", "gov", "sen", "rep", "rev", "sgt", "capt", "col", "lt", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "a.m", "p.m", "ph.d",
    // Slovenian
    "npr", "itd", "ipd", "oz", "tj", "t.i", "t.j", "gl", "str", "prim", "sv",
];

/// Characters that may end a sentence.
fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

/// Closing characters that stay attached to the sentence they close.
fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '”' | '’' | '»' | '«')
}

/// Split raw text into trimmed sentence strings.
///
/// A boundary is placed after a run of terminal punctuation (plus any
/// closing quotes or brackets) that is followed by whitespace or the end of
/// input. A lone period is not a boundary when the word it ends is a known
/// abbreviation or a single letter initial. Periods inside numbers never
/// qualify because they are not followed by whitespace.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (_, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let at_end = j >= chars.len();
        let followed_by_space = at_end || chars[j].1.is_whitespace();
        let abbreviated = chars[run_start].1 == '.'
            && !is_terminal_run(&chars[run_start..j])
            && precedes_abbreviation(text, chars[run_start].0);

        if followed_by_space && !abbreviated {
            let end = if at_end { text.len() } else { chars[j].0 };
            push_trimmed(&mut sentences, &text[start..end]);
            start = end;
        }
        i = j.max(i + 1);
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

/// True when the run holds more than one terminal character ("?!", "...").
fn is_terminal_run(run: &[(usize, char)]) -> bool {
    run.iter().filter(|(_, c)| is_terminal(*c)).count() > 1
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

/// Looks at the word immediately before the period at byte offset `dot`.
fn precedes_abbreviation(text: &str, dot: usize) -> bool {
    let before = &text[..dot];
    let word_start = before
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || matches!(c, '(' | '"' | '“' | '\'' | '['))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = &before[word_start..];
    if word.is_empty() {
        return false;
    }
    let mut letters = word.chars();
    if let (Some(first), None) = (letters.next(), letters.next()) {
        // Single letter initial such as "J. Smith".
        if first.is_alphabetic() && first.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Split a sentence into word tokens.
///
/// A token is a maximal run of letters and digits. Apostrophes and hyphens
/// stay inside a token when they sit between two alphanumeric characters;
/// commas and periods stay inside when they sit between two digits
/// ("3,000", "2.5"). All other punctuation separates tokens and is dropped.
pub fn tokenize_words(sentence: &str) -> Vec<String> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();

    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.push(c);
            continue;
        }
        let prev = if i > 0 { Some(chars[i - 1]) } else { None };
        let next = chars.get(i + 1).copied();
        let joins = match c {
            '\'' | '’' | '-' | '‐' => {
                !current.is_empty()
                    && prev.is_some_and(char::is_alphanumeric)
                    && next.is_some_and(char::is_alphanumeric)
            }
            ',' | '.' => {
                !current.is_empty()
                    && prev.is_some_and(|p| p.is_ascii_digit())
                    && next.is_some_and(|n| n.is_ascii_digit())
            }
            _ => false,
        };
        if joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Vowel inventory and rules used by [`count_syllables`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyllableProfile {
    /// Vowel groups over `aeiouy`, silent trailing "e" dropped, consonant+"le" kept.
    #[default]
    En,
    /// Plain vowel groups over `aeiou`.
    Sl,
}

impl FromStr for SyllableProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Self::En),
            "sl" => Ok(Self::Sl),
            other => Err(format!("unknown language profile `{other}` (expected en or sl)")),
        }
    }
}

impl SyllableProfile {
    fn is_vowel(self, c: char) -> bool {
        match self {
            Self::En => matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'),
            Self::Sl => matches!(c, 'a' | 'e' | 'i' | 'o' | 'u'),
        }
    }
}

/// Heuristic syllable count of a single token. Always at least 1.
pub fn count_syllables(word: &str, profile: SyllableProfile) -> usize {
    let lower: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &lower {
        let v = profile.is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }

    if profile == SyllableProfile::En && groups > 1 && lower.last() == Some(&'e') {
        let n = lower.len();
        let consonant_le = n >= 3 && lower[n - 2] == 'l' && !profile.is_vowel(lower[n - 3]);
        let vowel_before_e = n >= 2 && profile.is_vowel(lower[n - 2]);
        if !consonant_le && !vowel_before_e {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// One segmented sentence: its trimmed text and word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
}

/// A document with its sentence segmentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Build and segment a document from raw text.
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let sentences = split_sentences(&raw_text)
            .into_iter()
            .map(|text| {
                let tokens = tokenize_words(&text);
                Sentence { text, tokens }
            })
            .collect();
        Self { id: id.into(), raw_text, sentences }
    }

    /// Assemble a document from already segmented sentences. The raw text is
    /// the sentence texts joined by single spaces.
    pub fn from_sentences(id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        let raw_text = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
        Self { id: id.into(), raw_text, sentences }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &String> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }
}

/// Set of lowercase "easy" words for the Dale-Chall difficult-word count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList {
    words: HashSet<String>,
}

impl WordList {
    /// Parse one word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Self { words }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for WordList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self { words: iter.into_iter().map(|w| w.as_ref().to_lowercase()).collect() }
    }
}

/// Tokens strictly longer than this many characters are long words.
pub const LONG_WORD_THRESHOLD: usize = 7;

/// Per-document surface counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatProfile {
    pub total_words: u64,
    pub total_sentences: u64,
    pub total_syllables: u64,
    /// Alphanumeric characters inside word tokens.
    pub total_characters: u64,
    pub long_words: u64,
    pub polysyllables: u64,
    pub difficult_words: u64,
}

fn alnum_len(token: &str) -> usize {
    token.chars().filter(|c| c.is_alphanumeric()).count()
}

/// Compute the surface counts of a segmented document.
///
/// Difficult words are tokens missing from `wordlist`. Without a word list,
/// or with an empty one, every long word counts as difficult.
pub fn profile(doc: &Document, wordlist: Option<&WordList>, lang: SyllableProfile) -> StatProfile {
    let wordlist = wordlist.filter(|w| !w.is_empty());
    let mut p = StatProfile { total_sentences: doc.sentences.len() as u64, ..StatProfile::default() };
    for token in doc.tokens() {
        let chars = alnum_len(token);
        let syllables = count_syllables(token, lang);
        let long = chars > LONG_WORD_THRESHOLD;
        p.total_words += 1;
        p.total_syllables += syllables as u64;
        p.total_characters += chars as u64;
        p.long_words += u64::from(long);
        p.polysyllables += u64::from(syllables >= 3);
        p.difficult_words += u64::from(match wordlist {
            Some(list) => !list.contains(token),
            None => long,
        });
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_unambiguous_terminals() {
        assert_eq!(split_sentences("It rained. We left."), vec!["It rained.", "We left."]);
        assert_eq!(split_sentences("Really?! Yes… fine"), vec!["Really?!", "Yes…", "fine"]);
    }

    #[test]
    fn empty_and_blank_input() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n\t ").is_empty());
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(split_sentences("Dr. Smith left. He ran."), vec!["Dr. Smith left.", "He ran."]);
        assert_eq!(
            split_sentences("We met J. Doe, e.g. at noon. Then home."),
            vec!["We met J. Doe, e.g. at noon.", "Then home."]
        );
        assert_eq!(split_sentences("Npr. tako. Konec."), vec!["Npr. tako.", "Konec."]);
    }

    #[test]
    fn numbers_and_quotes() {
        assert_eq!(
            split_sentences("Pi is 3.14 today. \"Go!\" she said."),
            vec!["Pi is 3.14 today.", "\"Go!\"", "she said."]
        );
    }

    #[test]
    fn ellipsis_run_splits_once() {
        assert_eq!(split_sentences("Wait... Now go."), vec!["Wait...", "Now go."]);
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize_words("We left."), vec!["We", "left"]);
        assert_eq!(tokenize_words("state-of-the-art"), vec!["state-of-the-art"]);
        assert_eq!(tokenize_words("3,000 words"), vec!["3,000", "words"]);
        assert_eq!(tokenize_words("don't -- stop, 2.5!"), vec!["don't", "stop", "2.5"]);
        assert_eq!(tokenize_words("end- start"), vec!["end", "start"]);
        assert!(tokenize_words("... ,;").is_empty());
    }

    // Hand-syllabified reference words. The heuristic is exact on these.
    const HAND_SYLLABLES: &[(&str, usize)] = &[
        ("cat", 1),
        ("make", 1),
        ("television", 4),
        ("table", 2),
        ("simple", 2),
        ("the", 1),
        ("readability", 5),
        ("language", 2),
        ("beautiful", 3),
        ("computer", 3),
        ("banana", 3),
        ("free", 1),
        ("tree", 1),
        ("little", 2),
        ("information", 4),
        ("syllable", 3),
        ("education", 4),
        ("understand", 3),
        ("rhythm", 1),
        ("sky", 1),
    ];

    #[test]
    fn english_syllables_match_hand_list() {
        for &(word, expected) in HAND_SYLLABLES {
            assert_eq!(count_syllables(word, SyllableProfile::En), expected, "{word}");
        }
    }

    #[test]
    fn slovenian_plain_vowel_groups() {
        assert_eq!(count_syllables("hiša", SyllableProfile::Sl), 2);
        assert_eq!(count_syllables("berilo", SyllableProfile::Sl), 3);
        assert_eq!(count_syllables("prt", SyllableProfile::Sl), 1);
        // trailing e is voiced in Slovenian
        assert_eq!(count_syllables("rože", SyllableProfile::Sl), 2);
    }

    #[test]
    fn syllables_never_zero() {
        assert_eq!(count_syllables("3,000", SyllableProfile::En), 1);
        assert_eq!(count_syllables("brr", SyllableProfile::En), 1);
    }

    #[test]
    fn profile_hand_counts() {
        let doc = Document::new("d", "The cat sat.");
        let p = profile(&doc, None, SyllableProfile::En);
        assert_eq!(
            p,
            StatProfile {
                total_words: 3,
                total_sentences: 1,
                total_syllables: 3,
                total_characters: 9,
                long_words: 0,
                polysyllables: 0,
                difficult_words: 0,
            }
        );
    }

    #[test]
    fn empty_doc_profile_is_zero() {
        let doc = Document::new("d", "");
        assert_eq!(profile(&doc, None, SyllableProfile::En), StatProfile::default());
    }

    #[test]
    fn difficult_words_fallback_and_list() {
        let doc = Document::new("d", "Extraordinary.");
        let empty = WordList::default();
        assert_eq!(profile(&doc, Some(&empty), SyllableProfile::En).difficult_words, 1);
        assert_eq!(profile(&doc, None, SyllableProfile::En).difficult_words, 1);

        let list = WordList::parse("# easy words\nthe\ncat # pet\n\nSat\n");
        assert_eq!(list.len(), 3);
        let doc = Document::new("d", "The cat sat on it.");
        assert_eq!(profile(&doc, Some(&list), SyllableProfile::En).difficult_words, 2);
    }
}
