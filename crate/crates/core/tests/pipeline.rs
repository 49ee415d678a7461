//! Synthetic data through encoding, training, the model file and the 1-bit model.

use hdwear_core::datapipe::{build_dataset, fit_stats, load_csv_reader, LabelPolicy, PipelineConfig, WindowedDataset};
use hdwear_core::encoding::{EncoderConfig, FeatureEncoder, Seeds};
use hdwear_core::learning::{evaluate, load_model, save_model, train_iterative, train_online, IterativeOptions, Model};
use hdwear_core::robustness::{evaluate_binary, quantize_model, robustness_sweep, TABLE_RATES};
use hdwear_core::synthetic::{gaussian_clusters, write_signal_csv, ClusterSpec, SignalSpec};
use hdwear_core::AccumHv;

fn encode(enc: &FeatureEncoder, ds: &WindowedDataset, classes: &[String]) -> Vec<(AccumHv, usize)> {
    let features: Vec<&[f64]> = ds.samples.iter().map(|s| s.features.as_slice()).collect();
    enc.encode_batch(&features)
        .unwrap()
        .into_iter()
        .zip(&ds.samples)
        .map(|(h, s)| (h, classes.iter().position(|c| *c == s.label).unwrap()))
        .collect()
}

fn trained(train: &WindowedDataset, seed: u64) -> (Model, FeatureEncoder) {
    let config = EncoderConfig {
        dim: 4096,
        q_levels: 16,
        n: 3,
        seeds: Seeds::from_master(seed),
        feature_bounds: fit_stats(&train.samples).unwrap().bounds,
    };
    let enc = FeatureEncoder::new(config.clone()).unwrap();
    let classes = train.classes();
    let data = encode(&enc, train, &classes);
    let mut model = Model::new(classes, 0.5, config).unwrap();
    train_online(&mut model, data.iter().map(|(h, c)| (h, *c))).unwrap();
    train_iterative(&mut model, &data, &IterativeOptions::default()).unwrap();
    (model, enc)
}

#[test]
fn binary_model_tracks_real_valued_model() {
    let bench = gaussian_clusters(&ClusterSpec::default()).unwrap();
    let (model, enc) = trained(&bench.train, 1);
    let test = encode(&enc, &bench.test, model.classes());
    let real = evaluate(&model, &test).unwrap().accuracy;
    let binary = evaluate_binary(&quantize_model(&model, model.encoder().seeds.tie).unwrap(), &test)
        .unwrap()
        .accuracy;
    assert!((real - binary).abs() <= 0.03, "real {real} binary {binary}");

    let report = robustness_sweep(&model, &test, &TABLE_RATES, 4, 9).unwrap();
    for p in &report.points {
        assert!(p.mean_loss < 0.10, "rate {} loss {}", p.rate, p.mean_loss);
    }
}

#[test]
fn saved_model_predicts_identically() {
    let spec = SignalSpec {
        subjects: 2,
        bout_samples: 100,
        ..SignalSpec::default()
    };
    let mut csv = Vec::new();
    write_signal_csv(&spec, &mut csv).unwrap();
    let recordings = load_csv_reader(csv.as_slice(), &spec.schema(), "synthetic").unwrap();
    let cfg = PipelineConfig {
        smooth: 3,
        window: 50,
        stride: 25,
        policy: LabelPolicy::Majority,
    };
    let ds = build_dataset(&recordings, &cfg).unwrap();
    assert_eq!(ds.arity(), 7 * spec.channels);
    let (model, enc) = trained(&ds, 4);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.hdwm");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded, model);
    let reloaded_enc = FeatureEncoder::new(loaded.encoder().clone()).unwrap();
    for s in &ds.samples {
        let h = enc.encode(&s.features).unwrap();
        assert_eq!(reloaded_enc.encode(&s.features).unwrap(), h);
        assert_eq!(loaded.predict(&h).unwrap(), model.predict(&h).unwrap());
    }
    let again = std::fs::read(&path).unwrap();
    save_model(&loaded, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), again);
}
