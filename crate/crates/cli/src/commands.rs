use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use hdwear_core::datapipe::{
    build_dataset, fit_stats, load_csv, split, PipelineConfig, Schema, SplitStrategy, WindowedDataset,
};
use hdwear_core::encoding::{EncoderConfig, FeatureEncoder};
use hdwear_core::learning::{
    evaluate, load_model, save_model, train_iterative, train_online, EvalReport, IterativeOptions, LearnError, Model,
};
use hdwear_core::robustness::{robustness_sweep, RobustnessReport};
use hdwear_core::synthetic::{write_signal_csv, SignalSpec};
use hdwear_core::AccumHv;

use crate::config::{EvalSplit, Mode, RunConfig, SplitKind};
use crate::error::CliError;

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let out = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(out)?;
    tmp.write_all(contents).map_err(out)?;
    tmp.as_file().sync_all().map_err(out)?;
    tmp.persist(path).map_err(|e| out(e.error))?;
    Ok(())
}

fn report_path(cfg: &RunConfig, suffix: &str) -> Option<PathBuf> {
    cfg.report
        .clone()
        .or_else(|| cfg.model.as_ref().map(|m| m.with_extension(format!("{suffix}.csv"))))
}

fn write_report(cfg: &RunConfig, suffix: &str, body: &str) -> Result<Option<PathBuf>, CliError> {
    let Some(path) = report_path(cfg, suffix) else {
        return Ok(None);
    };
    write_atomic(&path, format!("{}{body}", cfg.header()).as_bytes())?;
    Ok(Some(path))
}

/// Loads the CSV named by `--data` and turns it into feature windows.
pub fn load_dataset(cfg: &RunConfig) -> Result<WindowedDataset, CliError> {
    let schema = Schema::from_file(required(&cfg.schema, "schema")?)?;
    let recordings = load_csv(required(&cfg.data, "data")?, &schema)?;
    let window = cfg
        .window
        .unwrap_or_else(|| (schema.sample_rate_hz.round() as usize).max(1));
    let stride = cfg.stride.unwrap_or((window / 2).max(1));
    let dataset = build_dataset(
        &recordings,
        &PipelineConfig {
            smooth: cfg.smooth,
            window,
            stride,
            policy: cfg.label_policy.into(),
        },
    )?;
    if dataset.is_empty() {
        return Err(CliError::Data(hdwear_core::datapipe::DataError::InvalidArgument(
            format!("no recording is long enough for a {window}-sample window"),
        )));
    }
    Ok(dataset)
}

pub fn split_dataset(cfg: &RunConfig, ds: &WindowedDataset) -> Result<(WindowedDataset, WindowedDataset), CliError> {
    let strategy = match cfg.split {
        SplitKind::Random => SplitStrategy::Random {
            seed: cfg.split_seed(),
            train_fraction: cfg.train_fraction,
        },
        SplitKind::SubjectHalf => SplitStrategy::SubjectHalf,
        SplitKind::Loso => SplitStrategy::LeaveOneSubjectOut {
            subject: cfg
                .subject
                .clone()
                .ok_or_else(|| CliError::Usage("the loso split needs --subject".into()))?,
            seed: cfg.split_seed(),
        },
    };
    Ok(split(ds, &strategy)?)
}

fn select_split(cfg: &RunConfig, ds: WindowedDataset) -> Result<WindowedDataset, CliError> {
    if cfg.eval_split == EvalSplit::All {
        return Ok(ds);
    }
    let (train, test) = split_dataset(cfg, &ds)?;
    Ok(if cfg.eval_split == EvalSplit::Train {
        train
    } else {
        test
    })
}

/// Encodes every sample and resolves its label against `classes`.
pub fn encode_labelled(
    encoder: &FeatureEncoder,
    ds: &WindowedDataset,
    classes: &[String],
) -> Result<Vec<(AccumHv, usize)>, CliError> {
    let labels = ds
        .samples
        .iter()
        .map(|s| {
            classes
                .iter()
                .position(|c| *c == s.label)
                .ok_or_else(|| LearnError::UnknownClass(s.label.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let features: Vec<&[f64]> = ds.samples.iter().map(|s| s.features.as_slice()).collect();
    Ok(encoder.encode_batch(&features)?.into_iter().zip(labels).collect())
}

fn check_model_fit(cfg: &RunConfig, model: &Model, ds: &WindowedDataset) -> Result<(), CliError> {
    if ds.arity() != model.encoder().arity() {
        return Err(CliError::ConfigMismatch(format!(
            "data yields {} features per window, model expects {}",
            ds.arity(),
            model.encoder().arity()
        )));
    }
    for (key, asked, stored) in [
        ("dim", cfg.dim, model.dim()),
        ("levels", cfg.levels, model.encoder().q_levels),
        ("ngram", cfg.ngram, model.encoder().n),
    ] {
        if cfg.is_explicit(key) && asked != stored {
            return Err(CliError::ConfigMismatch(format!(
                "--{key} {asked} but the model has {stored}"
            )));
        }
    }
    Ok(())
}

/// Online pass, then retraining unless the mode is online.
fn fit(
    cfg: &RunConfig,
    classes: Vec<String>,
    encoder: &FeatureEncoder,
    train: &[(AccumHv, usize)],
    mode: Mode,
) -> Result<(Model, Vec<usize>), CliError> {
    let mut model = Model::new(classes, cfg.eta, encoder.config().clone())?;
    train_online(&mut model, train.iter().map(|(h, c)| (h, *c)))?;
    let mut curve = Vec::new();
    if mode == Mode::Iterative {
        let opts = IterativeOptions {
            max_epochs: cfg.max_epochs,
            patience: cfg.patience,
            shuffle_seed: cfg.shuffle_seed(),
        };
        curve = train_iterative(&mut model, train, &opts)?.mispredictions;
    }
    Ok((model, curve))
}

fn encoder_for(cfg: &RunConfig, train: &WindowedDataset) -> Result<FeatureEncoder, CliError> {
    let bounds = fit_stats(&train.samples)?.bounds;
    Ok(FeatureEncoder::new(EncoderConfig {
        dim: cfg.dim,
        q_levels: cfg.levels,
        n: cfg.ngram,
        seeds: cfg.encoder_seeds(),
        feature_bounds: bounds,
    })?)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub config: RunConfig,
    pub classes: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    /// Training mispredictions per retrain epoch.
    pub mispredictions: Vec<usize>,
    pub trained_epochs: u32,
    pub model_path: PathBuf,
    pub report_path: Option<PathBuf>,
}

impl TrainReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        out.push_str(&format!("n_train,{}\nn_test,{}\n", self.n_train, self.n_test));
        out.push_str(&format!("train_accuracy,{:.6}\n", self.train_accuracy));
        if let Some(a) = self.test_accuracy {
            out.push_str(&format!("test_accuracy,{a:.6}\n"));
        }
        out.push_str(&format!(
            "epochs_run,{}\ntrained_epochs,{}\n",
            self.mispredictions.len(),
            self.trained_epochs
        ));
        for (i, m) in self.mispredictions.iter().enumerate() {
            out.push_str(&format!("mispredictions_epoch_{},{m}\n", i + 1));
        }
        out
    }
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "classes         {}", self.classes.join(", "))?;
        writeln!(f, "train windows   {}", self.n_train)?;
        writeln!(f, "test windows    {}", self.n_test)?;
        writeln!(f, "train accuracy  {:.4}", self.train_accuracy)?;
        if let Some(a) = self.test_accuracy {
            writeln!(f, "test accuracy   {a:.4}")?;
        }
        writeln!(
            f,
            "retrain epochs  {} (kept {})",
            self.mispredictions.len(),
            self.trained_epochs
        )?;
        if !self.mispredictions.is_empty() {
            let curve: Vec<String> = self.mispredictions.iter().map(|m| m.to_string()).collect();
            writeln!(f, "mispredictions  {}", curve.join(" "))?;
        }
        write!(f, "model           {}", self.model_path.display())
    }
}

pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport, CliError> {
    let model_path = required(&cfg.model, "model")?.to_path_buf();
    let ds = load_dataset(cfg)?;
    let (train, test) = split_dataset(cfg, &ds)?;
    if train.is_empty() {
        return Err(LearnError::EmptyDataset.into());
    }
    let encoder = encoder_for(cfg, &train)?;
    let classes = train.classes();
    let train_hvs = encode_labelled(&encoder, &train, &classes)?;
    let (model, curve) = fit(cfg, classes.clone(), &encoder, &train_hvs, cfg.mode)?;
    let train_accuracy = evaluate(&model, &train_hvs)?.accuracy;
    // test windows with labels unseen in training count as errors through UnknownClass
    let test_accuracy = if test.is_empty() {
        None
    } else {
        Some(evaluate(&model, &encode_labelled(&encoder, &test, &classes)?)?.accuracy)
    };
    save_model(&model, &model_path)?;
    let mut report = TrainReport {
        config: cfg.clone(),
        classes,
        n_train: train.len(),
        n_test: test.len(),
        train_accuracy,
        test_accuracy,
        mispredictions: curve,
        trained_epochs: model.trained_epochs(),
        model_path,
        report_path: None,
    };
    report.report_path = write_report(cfg, "train", &report.to_csv())?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: EvalReport,
    pub report_path: Option<PathBuf>,
}

fn eval_csv(r: &EvalReport) -> String {
    let mut out = format!(
        "# accuracy={:.6}\n# n_samples={}\ntrue,predicted,count\n",
        r.accuracy, r.n_samples
    );
    for (i, row) in r.confusion.iter().enumerate() {
        for (j, count) in row.iter().enumerate() {
            out.push_str(&format!("{},{},{count}\n", r.classes[i], r.classes[j]));
        }
    }
    out
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalOutcome, CliError> {
    let model = load_model(required(&cfg.model, "model")?)?;
    let ds = load_dataset(cfg)?;
    check_model_fit(cfg, &model, &ds)?;
    let ds = select_split(cfg, ds)?;
    let encoder = FeatureEncoder::new(model.encoder().clone())?;
    let data = encode_labelled(&encoder, &ds, model.classes())?;
    let report = evaluate(&model, &data)?;
    let report_path = write_report(cfg, "eval", &eval_csv(&report))?;
    Ok(EvalOutcome { report, report_path })
}

/// Writes one predicted label per window to `out`; returns the window count.
pub fn cmd_predict(cfg: &RunConfig, out: &mut dyn Write) -> Result<usize, CliError> {
    let model = load_model(required(&cfg.model, "model")?)?;
    let ds = load_dataset(cfg)?;
    check_model_fit(cfg, &model, &ds)?;
    let encoder = FeatureEncoder::new(model.encoder().clone())?;
    for s in &ds.samples {
        let label = model.predict(&encoder.encode(&s.features)?)?;
        writeln!(out, "{label}").map_err(|source| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    }
    Ok(ds.len())
}

#[derive(Debug, Clone)]
pub struct RobustnessOutcome {
    pub report: RobustnessReport,
    pub report_path: Option<PathBuf>,
}

pub fn cmd_robustness(cfg: &RunConfig) -> Result<RobustnessOutcome, CliError> {
    let model = load_model(required(&cfg.model, "model")?)?;
    let ds = load_dataset(cfg)?;
    check_model_fit(cfg, &model, &ds)?;
    let ds = select_split(cfg, ds)?;
    let encoder = FeatureEncoder::new(model.encoder().clone())?;
    let data = encode_labelled(&encoder, &ds, model.classes())?;
    if data.is_empty() {
        return Err(LearnError::EmptyDataset.into());
    }
    let report = robustness_sweep(&model, &data, &cfg.rates, cfg.trials, cfg.robustness_seed())?;
    let report_path = write_report(cfg, "robustness", &report.to_csv())?;
    Ok(RobustnessOutcome { report, report_path })
}

/// Test accuracies of one subject, indexed `[online, iterative]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonalizeRow {
    pub subject: String,
    pub general: [f64; 2],
    pub personalized: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct PersonalizeReport {
    pub rows: Vec<PersonalizeRow>,
    pub report_path: Option<PathBuf>,
}

const MODES: [Mode; 2] = [Mode::Online, Mode::Iterative];

fn mode_index(mode: Mode) -> usize {
    MODES.iter().position(|m| *m == mode).unwrap_or(0)
}

impl PersonalizeReport {
    fn mean(&self, f: impl Fn(&PersonalizeRow) -> f64) -> f64 {
        self.rows.iter().map(f).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn mean_general(&self, mode: Mode) -> f64 {
        self.mean(|r| r.general[mode_index(mode)])
    }

    pub fn mean_personalized(&self, mode: Mode) -> f64 {
        self.mean(|r| r.personalized[mode_index(mode)])
    }

    /// Mean personalized minus mean general accuracy, in percentage points.
    pub fn improvement(&self, mode: Mode) -> f64 {
        100.0 * (self.mean_personalized(mode) - self.mean_general(mode))
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("subject,general_online,personalized_online,general_iterative,personalized_iterative\n");
        let mut line = |name: &str, g: [f64; 2], p: [f64; 2]| {
            out.push_str(&format!("{name},{:.6},{:.6},{:.6},{:.6}\n", g[0], p[0], g[1], p[1]));
        };
        for r in &self.rows {
            line(&r.subject, r.general, r.personalized);
        }
        line(
            "mean",
            MODES.map(|m| self.mean_general(m)),
            MODES.map(|m| self.mean_personalized(m)),
        );
        out
    }
}

impl fmt::Display for PersonalizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.subject.len()).max().unwrap_or(0).max(7);
        writeln!(f, "{:width$}  {:>21}  {:>21}", "", "online", "iterative")?;
        writeln!(
            f,
            "{:width$}  {:>10} {:>10}  {:>10} {:>10}",
            "subject", "general", "personal", "general", "personal"
        )?;
        let pct = |x: f64| format!("{:.2}%", 100.0 * x);
        for r in &self.rows {
            writeln!(
                f,
                "{:width$}  {:>10} {:>10}  {:>10} {:>10}",
                r.subject,
                pct(r.general[0]),
                pct(r.personalized[0]),
                pct(r.general[1]),
                pct(r.personalized[1])
            )?;
        }
        writeln!(
            f,
            "{:width$}  {:>10} {:>10}  {:>10} {:>10}",
            "mean",
            pct(self.mean_general(Mode::Online)),
            pct(self.mean_personalized(Mode::Online)),
            pct(self.mean_general(Mode::Iterative)),
            pct(self.mean_personalized(Mode::Iterative))
        )?;
        write!(
            f,
            "improvement: online {:+.2} points, iterative {:+.2} points",
            self.improvement(Mode::Online),
            self.improvement(Mode::Iterative)
        )
    }
}

/// Accuracy on `test` of a model fit on `train`, for both modes.
fn score_both_modes(
    cfg: &RunConfig,
    classes: &[String],
    train: &WindowedDataset,
    test: &WindowedDataset,
) -> Result<[f64; 2], CliError> {
    if train.is_empty() || test.is_empty() {
        return Err(LearnError::EmptyDataset.into());
    }
    let encoder = encoder_for(cfg, train)?;
    let train_hvs = encode_labelled(&encoder, train, classes)?;
    let test_hvs = encode_labelled(&encoder, test, classes)?;
    let mut out = [0.0; 2];
    for mode in MODES {
        let (model, _) = fit(cfg, classes.to_vec(), &encoder, &train_hvs, mode)?;
        out[mode_index(mode)] = evaluate(&model, &test_hvs)?.accuracy;
    }
    Ok(out)
}

/// General model: all other subjects, scored on a seeded random half of the
/// subject. Personalized: the subject's first half, scored on its second half.
pub fn personalize_dataset(cfg: &RunConfig, ds: &WindowedDataset) -> Result<PersonalizeReport, CliError> {
    let subjects = ds.subjects();
    if subjects.len() < 2 {
        return Err(CliError::Data(hdwear_core::datapipe::DataError::InvalidArgument(
            format!("personalization needs at least two subjects, found {}", subjects.len()),
        )));
    }
    let classes = ds.classes();
    let mut rows = Vec::with_capacity(subjects.len());
    for (i, subject) in subjects.iter().enumerate() {
        let (others, held) = split(
            ds,
            &SplitStrategy::LeaveOneSubjectOut {
                subject: subject.clone(),
                seed: hdwear_core::hv::rng::derive_seed(cfg.personalize_seed(), i as u64),
            },
        )?;
        let general = score_both_modes(cfg, &classes, &others, &held)?;
        let own = WindowedDataset {
            samples: ds.samples.iter().filter(|s| s.subject == *subject).cloned().collect(),
            feature_names: ds.feature_names.clone(),
        };
        let (first, second) = split(&own, &SplitStrategy::SubjectHalf)?;
        let personalized = score_both_modes(cfg, &classes, &first, &second)?;
        rows.push(PersonalizeRow {
            subject: subject.clone(),
            general,
            personalized,
        });
    }
    Ok(PersonalizeReport {
        rows,
        report_path: None,
    })
}

pub fn cmd_personalize(cfg: &RunConfig) -> Result<PersonalizeReport, CliError> {
    let ds = load_dataset(cfg)?;
    let mut report = personalize_dataset(cfg, &ds)?;
    let path = cfg.report.clone().or_else(|| {
        cfg.model
            .as_ref()
            .or(cfg.data.as_ref())
            .map(|p| p.with_extension("personalize.csv"))
    });
    if let Some(path) = path {
        write_atomic(&path, format!("{}{}", cfg.header(), report.to_csv()).as_bytes())?;
        report.report_path = Some(path);
    }
    Ok(report)
}

/// Writes a synthetic recording CSV and its schema; returns the row count.
pub fn cmd_synth(spec: &SignalSpec, out: &Path, schema_out: &Path) -> Result<usize, CliError> {
    let mut buf = Vec::new();
    let rows = write_signal_csv(spec, &mut buf)?;
    write_atomic(out, &buf)?;
    write_atomic(schema_out, spec.schema().to_text().as_bytes())?;
    Ok(rows)
}
