use proptest::prelude::*;
use readlab::baseline::{loss_and_gradient, predict, train_logreg, TrainConfig};

fn dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (6usize..30, 1usize..4).prop_flat_map(|(n, f)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, f), n),
            prop::collection::vec(0usize..3, n).prop_filter("two classes", |l| l.iter().any(|&x| x != l[0])),
        )
    })
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

proptest! {
    #[test]
    fn standardization_uses_training_statistics((xs, ys) in dataset()) {
        let dim = xs[0].len();
        let trained = train_logreg(&xs, &ys, 3, names(dim), &TrainConfig { learning_rate: 0.1, epochs: 5 }).unwrap();
        let n = xs.len() as f64;
        for j in 0..dim {
            let mean = xs.iter().map(|r| r[j]).sum::<f64>() / n;
            let std = (xs.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert_eq!(trained.model.feature_means[j], mean);
            prop_assert_eq!(trained.model.feature_stds[j], std);
        }
        let probe: Vec<f64> = (0..dim).map(|j| j as f64 + 0.5).collect();
        let expected: Vec<f64> = trained
            .model
            .kept_features
            .iter()
            .map(|&j| (probe[j] - trained.model.feature_means[j]) / trained.model.feature_stds[j])
            .collect();
        prop_assert_eq!(trained.model.standardize(&probe).unwrap(), expected);
    }

    #[test]
    fn small_steps_never_increase_the_loss((xs, ys) in dataset()) {
        let trained = train_logreg(&xs, &ys, 3, names(xs[0].len()), &TrainConfig { learning_rate: 1e-3, epochs: 200 }).unwrap();
        for pair in trained.losses.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9, "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn training_is_bit_reproducible((xs, ys) in dataset()) {
        let cfg = TrainConfig { learning_rate: 0.1, epochs: 50 };
        let a = train_logreg(&xs, &ys, 3, names(xs[0].len()), &cfg).unwrap();
        let b = train_logreg(&xs, &ys, 3, names(xs[0].len()), &cfg).unwrap();
        prop_assert_eq!(&a.model, &b.model);
        prop_assert_eq!(predict(&a.model, &xs[0]).unwrap(), predict(&b.model, &xs[0]).unwrap());
    }

    #[test]
    fn gradient_rows_sum_to_zero((xs, ys) in dataset(), w in prop::collection::vec(-1.0f64..1.0, 12)) {
        // Softmax is invariant to adding a constant to all class weights, so
        // the gradient summed over classes vanishes.
        let f = xs[0].len() + 1;
        let weights: Vec<Vec<f64>> = (0..3).map(|c| (0..f).map(|j| w[(c * f + j) % w.len()]).collect()).collect();
        let (_, grad) = loss_and_gradient(&weights, &xs, &ys);
        for j in 0..f {
            let s: f64 = grad.iter().map(|g| g[j]).sum();
            prop_assert!(s.abs() < 1e-9, "column {j}: {s}");
        }
    }
}
