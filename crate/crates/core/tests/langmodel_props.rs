use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use readlab::corpus::generate_synthetic;
use readlab::langmodel::{
    perplexity, perplexity_base2, score_tokens, train_ngram, NGramModel, SentenceRef, Smoothing, TokenScore,
    TrainOptions, BOS,
};

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-f]{1,2}", 1..8), 1..12)
}

fn smoothing() -> impl Strategy<Value = (Smoothing, f64)> {
    prop_oneof![(Just(Smoothing::AddK), 0.01f64..3.0), Just((Smoothing::WittenBell, 1.0))]
}

fn history_sum(model: &NGramModel, history: &[&str]) -> f64 {
    model.vocabulary().iter().map(|w| model.prob(history, w)).sum()
}

fn corpus_tokens(corpus: &readlab::corpus::LabeledCorpus) -> Vec<Vec<String>> {
    corpus
        .documents
        .iter()
        .flat_map(|d| d.sentences.iter().map(|s| s.tokens.clone()))
        .filter(|t| !t.is_empty())
        .collect()
}

fn corpus_perplexity(model: &NGramModel, sentences: &[Vec<String>]) -> f64 {
    let all: Vec<TokenScore> = sentences.iter().flat_map(|s| model.score(s)).collect();
    perplexity(&all).unwrap()
}

proptest! {
    #[test]
    fn conditional_distributions_sum_to_one(
        sentences in corpus(),
        order in 1usize..=3,
        (smoothing, k) in smoothing(),
        history in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "zz", BOS, "ab", "</s>"]), 0..4),
    ) {
        let model = train_ngram(&sentences, TrainOptions { order, smoothing, k, min_count: 1 }).unwrap();
        let total = history_sum(&model, &history);
        prop_assert!((total - 1.0).abs() <= 1e-9, "sum {total}");
    }

    #[test]
    fn provider_contract_holds(
        sentences in corpus(),
        order in 1usize..=3,
        (smoothing, k) in smoothing(),
        query in prop::collection::vec("[a-h]{1,2}", 1..10),
    ) {
        let model = train_ngram(&sentences, TrainOptions { order, smoothing, k, min_count: 1 }).unwrap();
        let scores = score_tokens(&model, SentenceRef { doc_id: "q", index: 0, tokens: &query }).unwrap();
        prop_assert_eq!(scores.len(), query.len());
        for (s, t) in scores.iter().zip(&query) {
            prop_assert!(s.probability > 0.0 && s.probability <= 1.0);
            prop_assert_eq!(&s.token, t);
            prop_assert_eq!(s.oov, !model.contains(t));
        }
    }

    #[test]
    fn base_two_and_natural_perplexity_agree(ps in prop::collection::vec(1e-12f64..=1.0, 1..50)) {
        let scores: Vec<TokenScore> =
            ps.iter().map(|&p| TokenScore { token: "w".into(), probability: p, oov: false }).collect();
        let (e, two) = (perplexity(&scores).unwrap(), perplexity_base2(&scores).unwrap());
        prop_assert!((e - two).abs() <= 1e-9 * e, "{e} vs {two}");
    }

    #[test]
    fn saved_models_reload_identically(
        sentences in corpus(),
        order in 1usize..=3,
        (smoothing, k) in smoothing(),
        history in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "zz", BOS]), 0..3),
    ) {
        let model = train_ngram(&sentences, TrainOptions { order, smoothing, k, min_count: 1 }).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        let back = NGramModel::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        for w in model.vocabulary() {
            let (a, b) = (model.prob(&history, w), back.prob(&history, w));
            prop_assert!((a - b).abs() <= 1e-12, "{w}: {a} vs {b}");
        }
    }
}

#[test]
fn training_text_beats_its_token_permutation() {
    for seed in 0..5u64 {
        let sentences = corpus_tokens(&generate_synthetic(3, 10, seed));
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut flat: Vec<String> = sentences.iter().flatten().cloned().collect();
        flat.shuffle(&mut rng);
        let mut rest = flat.as_slice();
        let permuted: Vec<Vec<String>> = sentences
            .iter()
            .map(|s| {
                let (head, tail) = rest.split_at(s.len());
                rest = tail;
                head.to_vec()
            })
            .collect();
        for order in 2..=3 {
            for smoothing in [Smoothing::AddK, Smoothing::WittenBell] {
                let model = train_ngram(&sentences, TrainOptions { order, smoothing, k: 1.0, min_count: 1 }).unwrap();
                let seen = corpus_perplexity(&model, &sentences);
                let shuffled = corpus_perplexity(&model, &permuted);
                assert!(seen <= shuffled, "seed {seed} order {order} {smoothing}: {seen} > {shuffled}");
            }
        }
    }
}

#[test]
fn duplicated_document_keeps_its_perplexity() {
    use readlab::langmodel::document_perplexity;
    use readlab::textseg::Document;
    let model = train_ngram(&[vec!["a".to_string(), "b".into(), "a".into()]], TrainOptions::default()).unwrap();
    let text = "A b a. B b c.";
    let once = document_perplexity(&model, &Document::new("d", text)).unwrap();
    let twice = document_perplexity(&model, &Document::new("d", format!("{text} {text}"))).unwrap();
    assert!((once - twice).abs() <= 1e-12 * once);
}

#[test]
fn two_sentence_document_matches_token_product() {
    use readlab::langmodel::document_perplexity;
    use readlab::textseg::Document;
    let train = vec![vec!["a".to_string(), "a".into(), "b".into()]];
    let model = train_ngram(&train, TrainOptions { order: 1, ..TrainOptions::default() }).unwrap();
    // Unigram add-1 over {<unk>, a, b} with 3 tokens: a = 3/6, b = 2/6, unknown = 1/6.
    let doc = Document::new("d", "a b. z a.");
    let product: f64 = (3.0 / 6.0) * (2.0 / 6.0) * (1.0 / 6.0) * (3.0 / 6.0);
    let expected = product.powf(-1.0 / 4.0);
    let got = document_perplexity(&model, &doc).unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
}
