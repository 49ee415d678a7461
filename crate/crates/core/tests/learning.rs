//! Update-rule and training-loop properties of the class-hypervector model.

use hdwear_core::encoding::{EncoderConfig, Seeds};
use hdwear_core::hv::{cosine, random_hv, AccumHv};
use hdwear_core::learning::{
    retrain_epoch, train_accumulate, train_iterative, train_online, IterativeOptions, LearnError, Model,
};
use proptest::prelude::*;

const DIM: usize = 2048;

fn model(k: usize, eta: f64) -> Model {
    let encoder = EncoderConfig {
        dim: DIM,
        q_levels: 4,
        n: 1,
        seeds: Seeds::from_master(0),
        feature_bounds: vec![(0.0, 1.0)],
    };
    Model::new((0..k).map(|i| format!("c{i}")).collect(), eta, encoder).unwrap()
}

fn hv(seed: u64, stream: u64) -> AccumHv {
    AccumHv::from_bipolar(&random_hv(seed, stream, DIM).unwrap())
}

/// `base` with each component negated with probability about `p`.
fn noisy(base: &AccumHv, seed: u64, p: f64) -> AccumHv {
    let mask = random_hv(seed, 99, DIM).unwrap();
    let coin = random_hv(seed, 98, DIM).unwrap();
    let comps = base
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let flip = if p >= 0.5 {
                coin.get(i) < 0
            } else {
                mask.get(i) < 0 && coin.get(i) < 0
            };
            if flip {
                -x
            } else {
                x
            }
        })
        .collect();
    AccumHv::from_vec(comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn online_update_touches_only_its_class(seed in any::<u64>(), eta in 0.05f64..2.0) {
        let mut m = model(3, eta);
        m.online_update(&hv(seed, 0), 0).unwrap();
        m.online_update(&hv(seed, 1), 1).unwrap();
        let before = m.class_hvs().to_vec();
        let h = hv(seed, 2);
        let delta = m.similarities(&h).unwrap()[2];
        let weight = m.online_update(&h, 2).unwrap();
        prop_assert_eq!(weight, eta * (1.0 - delta));
        prop_assert_eq!(&m.class_hvs()[..2], &before[..2]);
    }

    #[test]
    fn retrain_increments_are_opposite(seed in any::<u64>(), eta in 0.05f64..2.0) {
        let mut m = model(2, eta);
        let h = hv(seed, 0);
        // the wrong class holds the query plus another vector, the right one holds noise
        m.online_update(&h, 1).unwrap();
        m.online_update(&hv(seed, 2), 1).unwrap();
        m.online_update(&hv(seed, 1), 0).unwrap();
        let before = m.class_hvs().to_vec();
        let sims = m.similarities(&h).unwrap();
        let fix = m.retrain_step(&h, 0).unwrap().expect("misprediction");
        prop_assert_eq!((fix.true_class, fix.predicted), (0, 1));
        prop_assert_eq!(fix.weight, eta * (sims[1] - sims[0]));
        let after = m.class_hvs();
        for i in 0..DIM {
            let up = f64::from(after[0].as_slice()[i]) - f64::from(before[0].as_slice()[i]);
            let down = f64::from(after[1].as_slice()[i]) - f64::from(before[1].as_slice()[i]);
            prop_assert!((up + down).abs() <= 1e-5 * (1.0 + up.abs()), "component {}: {} vs {}", i, up, down);
        }
        let new = m.similarities(&h).unwrap();
        prop_assert!(new[1] - new[0] < sims[1] - sims[0]);
        prop_assert!(new[0] > sims[0] && new[1] < sims[1]);
    }

    #[test]
    fn prediction_ignores_positive_rescaling(seed in any::<u64>(), factor in 0.001f32..1000.0) {
        let mut m = model(4, 0.5);
        for c in 0..4 {
            for s in 0..3 {
                m.online_update(&hv(seed, (c * 3 + s) as u64), c).unwrap();
            }
        }
        let queries: Vec<AccumHv> = (0..12).map(|s| noisy(&hv(seed, s), seed ^ s, 0.3)).collect();
        let before: Vec<usize> = queries.iter().map(|q| m.predict_index(q).unwrap()).collect();
        m.scale_classes(factor);
        let after: Vec<usize> = queries.iter().map(|q| m.predict_index(q).unwrap()).collect();
        prop_assert_eq!(before, after);
    }
}

#[test]
fn repeated_query_shrinks_update() {
    let mut m = model(1, 0.5);
    let h = hv(1, 0);
    m.online_update(&hv(1, 1), 0).unwrap();
    let mut last = f64::INFINITY;
    for _ in 0..10 {
        let w = m.online_update(&h, 0).unwrap();
        assert!(w < last, "{w} !< {last}");
        last = w;
    }
}

#[test]
fn correct_prediction_leaves_model_bit_identical() {
    let mut m = model(2, 0.5);
    let data: Vec<(AccumHv, usize)> = (0..2).map(|c| (hv(5, c as u64), c)).collect();
    train_online(&mut m, data.iter().map(|(h, c)| (h, *c))).unwrap();
    let before = m.clone();
    assert_eq!(retrain_epoch(&mut m, &data).unwrap(), 0);
    assert_eq!(m, before);
    assert_eq!(m.retrain_step(&data[0].0, 0).unwrap(), None);
}

#[test]
fn empty_stream_is_a_no_op_and_one_per_class_recovers_labels() {
    let mut m = model(3, 0.5);
    let before = m.clone();
    train_online(&mut m, std::iter::empty()).unwrap();
    assert_eq!(m, before);
    let data: Vec<(AccumHv, usize)> = (0..3).map(|c| (hv(9, c as u64), c)).collect();
    train_online(&mut m, data.iter().map(|(h, c)| (h, *c))).unwrap();
    for (h, c) in &data {
        assert_eq!(m.predict_index(h).unwrap(), *c);
    }
    assert!(matches!(
        m.online_update(&data[0].0, 7),
        Err(LearnError::UnknownClass(_))
    ));
}

#[test]
fn stream_order_may_change_class_vectors() {
    let data: Vec<(AccumHv, usize)> = (0..6).map(|s| (hv(3, s), 0)).collect();
    let mut forward = model(1, 0.5);
    train_online(&mut forward, data.iter().map(|(h, c)| (h, *c))).unwrap();
    let mut backward = model(1, 0.5);
    train_online(&mut backward, data.iter().rev().map(|(h, c)| (h, *c))).unwrap();
    assert_ne!(forward.class_hvs(), backward.class_hvs());
    assert_eq!(forward.predict_index(&data[0].0).unwrap(), 0);
}

/// Two noisy prototype families, labelled by family.
fn separable(seed: u64, per_class: usize, noise: f64) -> Vec<(AccumHv, usize)> {
    let protos = [hv(seed, 1000), hv(seed, 1001)];
    (0..2 * per_class)
        .map(|i| {
            let c = i % 2;
            (noisy(&protos[c], seed.wrapping_add(i as u64), noise), c)
        })
        .collect()
}

#[test]
fn separable_data_reaches_zero_misses() {
    let data = separable(4, 100, 0.3);
    let mut m = model(2, 0.5);
    train_online(&mut m, data.iter().map(|(h, c)| (h, *c))).unwrap();
    let opts = IterativeOptions::default();
    let summary = train_iterative(&mut m, &data, &opts).unwrap();
    assert!(summary.epochs_run <= 20);
    assert_eq!(summary.mispredictions.last(), Some(&0));
    assert_eq!(retrain_epoch(&mut m.clone(), &data).unwrap(), 0);
}

#[test]
fn epoch_budget_and_patience() {
    // nearly random labels keep mispredictions above zero
    let data: Vec<(AccumHv, usize)> = (0..60).map(|i| (hv(8, i), (i as usize * 7 / 3) % 3)).collect();
    let fresh = || {
        let mut m = model(3, 0.5);
        train_online(&mut m, data.iter().map(|(h, c)| (h, *c))).unwrap();
        m
    };
    let mut one = fresh();
    let opts = IterativeOptions {
        max_epochs: 1,
        ..IterativeOptions::default()
    };
    let s = train_iterative(&mut one, &data, &opts).unwrap();
    assert_eq!(s.epochs_run, 1);
    assert_eq!(one.trained_epochs(), 1);

    let mut patient = fresh();
    let opts = IterativeOptions {
        max_epochs: 50,
        patience: 0,
        shuffle_seed: None,
    };
    let s = train_iterative(&mut patient, &data, &opts).unwrap();
    let curve = &s.mispredictions;
    // the run ends at the first epoch that fails to beat every earlier one, or at zero misses
    let last = *curve.last().unwrap();
    let best_before = curve[..curve.len() - 1].iter().min().copied();
    assert!(last == 0 || best_before.is_some_and(|b| last >= b));
    for i in 1..curve.len() - 1 {
        assert!(curve[i] < *curve[..i].iter().min().unwrap());
    }
    assert_eq!(curve[s.best_epoch as usize - 1], *curve.iter().min().unwrap());

    assert!(train_iterative(&mut fresh(), &data, &IterativeOptions { max_epochs: 0, ..opts }).is_err());
}

#[test]
fn shuffled_retraining_is_reproducible() {
    let data = separable(6, 40, 0.45);
    let run = |seed| {
        let mut m = model(2, 0.5);
        train_online(&mut m, data.iter().map(|(h, c)| (h, *c))).unwrap();
        let opts = IterativeOptions {
            shuffle_seed: Some(seed),
            ..IterativeOptions::default()
        };
        train_iterative(&mut m, &data, &opts).unwrap();
        m
    };
    assert_eq!(run(3), run(3));
}

#[test]
fn naive_accumulation_is_unit_weight_bundling() {
    let data: Vec<(AccumHv, usize)> = (0..4).map(|s| (hv(2, s), 0)).collect();
    let mut m = model(1, 0.5);
    train_accumulate(&mut m, data.iter().map(|(h, c)| (h, *c))).unwrap();
    let mut expected = vec![0f32; DIM];
    for (h, _) in &data {
        for (e, x) in expected.iter_mut().zip(h.as_slice()) {
            *e += x;
        }
    }
    assert_eq!(m.class_hvs()[0].as_slice(), expected.as_slice());
    assert!((cosine(&m.class_hvs()[0], &data[0].0).unwrap() - 0.5).abs() < 0.05);
}
