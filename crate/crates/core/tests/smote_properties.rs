use optivmd_core::dataset::{balance_training, smote_balance, split, test_count, LabeledDataset, SmoteParams};
use optivmd_core::{FeatureMap, SplitTag};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset(sizes: &[usize], dim: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maps = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in sizes.iter().enumerate() {
        for _ in 0..n {
            let data = (0..dim).map(|_| rng.random::<f32>() + c as f32).collect();
            maps.push(FeatureMap::new(1, dim, vec!["x".into()], data).unwrap());
            labels.push(c);
        }
    }
    let names = (0..sizes.len()).map(|c| format!("c{c}")).collect();
    LabeledDataset::new(maps, labels, names).unwrap()
}

/// Some pair of same-class originals brackets every coordinate of `s`.
fn between_some_pair(s: &[f32], originals: &[&[f32]]) -> bool {
    originals.iter().any(|a| {
        originals
            .iter()
            .any(|b| s.iter().zip(a.iter().zip(b.iter())).all(|(v, (x, y))| x.min(*y) <= *v && *v <= x.max(*y)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn smote_balances_keeps_originals_and_interpolates(
        sizes in proptest::collection::vec(2usize..12, 2..5),
        dim in 1usize..6,
        seed in any::<u64>(),
        k in 1usize..6,
    ) {
        let ds = dataset(&sizes, dim, seed);
        let params = SmoteParams { k_neighbors: k, seed };
        let out = smote_balance(&ds, &params).unwrap();
        let majority = *sizes.iter().max().unwrap();
        prop_assert!(out.class_counts().iter().all(|&c| c == majority));
        prop_assert_eq!(&out.maps[..ds.len()], &ds.maps[..]);
        prop_assert_eq!(&out.labels[..ds.len()], &ds.labels[..]);
        for i in ds.len()..out.len() {
            let class = out.labels[i];
            let originals: Vec<&[f32]> = (0..ds.len())
                .filter(|&j| ds.labels[j] == class)
                .map(|j| ds.maps[j].data.as_slice())
                .collect();
            prop_assert!(between_some_pair(&out.maps[i].data, &originals), "item {} is outside its class hull", i);
        }
        prop_assert_eq!(smote_balance(&ds, &params).unwrap(), out);
    }

    #[test]
    fn split_is_stratified(sizes in proptest::collection::vec(2usize..30, 2..5), seed in any::<u64>()) {
        let ds = dataset(&sizes, 2, seed);
        let out = split(&ds, 0.2, seed).unwrap();
        for (c, &n) in sizes.iter().enumerate() {
            let tested = (0..out.len()).filter(|&i| out.labels[i] == c && out.split[i] == Some(SplitTag::Test)).count();
            prop_assert_eq!(tested, ((0.2 * n as f64).round() as usize).min(n - 1));
        }
        prop_assert_eq!(split(&ds, 0.2, seed).unwrap(), out);
    }
}

#[test]
fn split_sizes_example() {
    assert_eq!((test_count(7, 0.2), test_count(13, 0.2)), (1, 3));
    let out = split(&dataset(&[7, 13], 3, 0), 0.2, 0).unwrap();
    assert_eq!(out.indices(SplitTag::Test).len(), 4);
}

#[test]
fn balancing_training_leaves_test_items_alone() {
    let ds = split(&dataset(&[10, 30, 20], 4, 2), 0.2, 2).unwrap();
    let out = balance_training(&ds, &SmoteParams { k_neighbors: 3, seed: 5 }).unwrap();
    let test_before: Vec<_> = ds.indices(SplitTag::Test).into_iter().map(|i| (&ds.maps[i], ds.labels[i])).collect();
    let test_after: Vec<_> = out.indices(SplitTag::Test).into_iter().map(|i| (&out.maps[i], out.labels[i])).collect();
    assert_eq!(test_before, test_after);
    let train = out.partition(SplitTag::Train);
    let counts = train.class_counts();
    assert!(counts.iter().all(|&c| c == counts[0]), "{counts:?}");
}
