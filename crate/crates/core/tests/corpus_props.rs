use proptest::prelude::*;
use readlab::corpus::{chunk_document, stratified_kfold, stratified_split, LabeledCorpus, SplitSpec};
use readlab::textseg::Document;

fn corpus_with_sizes(sizes: &[usize]) -> LabeledCorpus {
    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for (class, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            documents.push(Document::new(format!("c{class}-{i}"), format!("Doc {i} of class {class}.")));
            labels.push(class);
        }
    }
    let names = (0..sizes.len()).map(|c| format!("class{c}")).collect();
    LabeledCorpus::new(documents, labels, names).unwrap()
}

fn ratios() -> impl Strategy<Value = [f64; 3]> {
    (0u32..=100, 0u32..=100).prop_filter_map("sum to 100", |(a, b)| {
        (a + b <= 100).then(|| [f64::from(a) / 100.0, f64::from(b) / 100.0, f64::from(100 - a - b) / 100.0])
    })
}

proptest! {
    #[test]
    fn split_conserves_documents_and_tracks_ratios(
        sizes in prop::collection::vec(1usize..40, 1..5),
        ratios in ratios(),
        seed in any::<u64>(),
    ) {
        let corpus = corpus_with_sizes(&sizes);
        let spec = SplitSpec { ratios, seed };
        let (split, record) = stratified_split(&corpus, &spec).unwrap();
        let mut all: Vec<usize> = split.parts().concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..corpus.len()).collect::<Vec<_>>());
        for (class, &n) in sizes.iter().enumerate() {
            for (part, ratio) in split.parts().iter().zip(ratios) {
                let got = part.iter().filter(|&&i| corpus.labels[i] == class).count() as f64;
                prop_assert!((got - ratio * n as f64).abs() <= 1.0, "class {class}: {got} vs {}", ratio * n as f64);
            }
            let a = &record.allocation[class];
            prop_assert_eq!(a.train + a.validation + a.test, n);
        }
        prop_assert_eq!(stratified_split(&corpus, &spec).unwrap().0, split);
    }

    #[test]
    fn kfold_covers_each_document_once_per_role(
        k in 2usize..7,
        extra in prop::collection::vec(0usize..15, 1..4),
        seed in any::<u64>(),
    ) {
        let sizes: Vec<usize> = extra.iter().map(|e| k + e).collect();
        let corpus = corpus_with_sizes(&sizes);
        let rounds = stratified_kfold(&corpus, k, seed).unwrap();
        prop_assert_eq!(rounds.len(), k);
        let mut test_hits = vec![0; corpus.len()];
        let mut val_hits = vec![0; corpus.len()];
        for r in &rounds {
            let mut all: Vec<usize> = r.parts().concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..corpus.len()).collect::<Vec<_>>());
            r.test.iter().for_each(|&i| test_hits[i] += 1);
            r.validation.iter().for_each(|&i| val_hits[i] += 1);
        }
        prop_assert!(test_hits.iter().all(|&h| h == 1));
        prop_assert!(val_hits.iter().all(|&h| h == 1));
        prop_assert_eq!(stratified_kfold(&corpus, k, seed).unwrap(), rounds);
    }

    #[test]
    fn chunking_conserves_sentences(n_sent in 0usize..120, n in 1usize..30, min_tail in 0usize..30) {
        let text = (0..n_sent).map(|i| format!("Sentence {i} ends here.")).collect::<Vec<_>>().join(" ");
        let doc = Document::new("d", text);
        let chunks = chunk_document(&doc, n, min_tail);
        let total: usize = chunks.iter().map(|c| c.sentences.len()).sum();
        prop_assert_eq!(total, doc.sentences.len());
        let rejoined: Vec<_> = chunks.iter().flat_map(|c| c.sentences.clone()).collect();
        prop_assert_eq!(rejoined, doc.sentences.clone());
        for (k, c) in chunks.iter().enumerate() {
            prop_assert_eq!(&c.id, &format!("d#{k}"));
        }
    }
}
