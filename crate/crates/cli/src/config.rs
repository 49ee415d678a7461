use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use hdwear_core::datapipe::{parse_key_values, LabelPolicy};
use hdwear_core::encoding::Seeds;
use hdwear_core::hv::rng::derive_seed;
use hdwear_core::robustness::{DEFAULT_TRIALS, TABLE_RATES};

use crate::error::CliError;

pub const SEED_ENV: &str = "HDWEAR_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Online,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    Random,
    SubjectHalf,
    Loso,
}

/// Which side of the split `eval` and `robustness` score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalSplit {
    Train,
    Test,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelPolicyArg {
    Majority,
    Last,
}

impl From<LabelPolicyArg> for LabelPolicy {
    fn from(p: LabelPolicyArg) -> Self {
        match p {
            LabelPolicyArg::Majority => LabelPolicy::Majority,
            LabelPolicyArg::Last => LabelPolicy::LastSample,
        }
    }
}

macro_rules! from_str_via_value_enum {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}
from_str_via_value_enum!(Mode, SplitKind, EvalSplit, LabelPolicyArg);

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

/// Flags shared by the pipeline commands. Every flag is also a key of the
/// `--config` file; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// key=value file with defaults for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// CSV report path; defaults to a file beside the model
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// hypervector dimension [default: 4096]
    #[arg(long)]
    pub dim: Option<usize>,
    /// quantization levels [default: 16]
    #[arg(long)]
    pub levels: Option<usize>,
    /// n-gram size for sequence encoders [default: 3]
    #[arg(long)]
    pub ngram: Option<usize>,
    /// learning rate [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// [default: 20]
    #[arg(long)]
    pub max_epochs: Option<u32>,
    /// [default: 3]
    #[arg(long)]
    pub patience: Option<u32>,
    /// shuffle samples between retrain epochs
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub shuffle: Option<bool>,
    /// master seed; falls back to HDWEAR_SEED, then 42
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub split: Option<SplitKind>,
    /// training share for the random split [default: 0.8]
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// held-out subject for the loso split
    #[arg(long)]
    pub subject: Option<String>,
    #[arg(long, value_enum)]
    pub eval_split: Option<EvalSplit>,
    /// window length in samples [default: one second]
    #[arg(long)]
    pub window: Option<usize>,
    /// window stride in samples [default: half a window]
    #[arg(long)]
    pub stride: Option<usize>,
    /// moving-average length, 1 disables [default: 1]
    #[arg(long)]
    pub smooth: Option<usize>,
    #[arg(long, value_enum)]
    pub label_policy: Option<LabelPolicyArg>,
    /// comma-separated flip rates [default: 0.01,0.02,0.04,0.06,0.10,0.12]
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    /// [default: 10]
    #[arg(long)]
    pub trials: Option<usize>,
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub data: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub mode: Mode,
    pub dim: usize,
    pub levels: usize,
    pub ngram: usize,
    pub eta: f64,
    pub max_epochs: u32,
    pub patience: u32,
    pub shuffle: bool,
    pub seed: u64,
    pub split: SplitKind,
    pub train_fraction: f64,
    pub subject: Option<String>,
    pub eval_split: EvalSplit,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub smooth: usize,
    pub label_policy: LabelPolicyArg,
    pub rates: Vec<f64>,
    pub trials: usize,
    /// Keys given by flag or file rather than defaulted.
    pub explicit: BTreeSet<String>,
}

struct Resolver {
    file: BTreeMap<String, String>,
    explicit: BTreeSet<String>,
}

impl Resolver {
    fn pick<T>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.file.remove(key);
        let value = match (flag, from_file) {
            (Some(v), _) => Some(v),
            (None, Some(raw)) => Some(
                raw.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key {key}: cannot parse {raw:?}: {e}")))?,
            ),
            (None, None) => None,
        };
        if value.is_some() {
            self.explicit.insert(key.to_string());
        }
        Ok(value)
    }

    fn pick_rates(&mut self, flag: Option<Vec<f64>>) -> Result<Option<Vec<f64>>, CliError> {
        let parsed = match self.file.remove("rates") {
            Some(raw) if flag.is_none() => Some(
                raw.split(',')
                    .map(|r| r.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("config key rates: {e}")))?,
            ),
            _ => flag,
        };
        if parsed.is_some() {
            self.explicit.insert("rates".into());
        }
        Ok(parsed)
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg()))
    }
}

impl RunConfig {
    /// Merges flags, the optional config file, `env_seed` and defaults, then
    /// validates every numeric parameter.
    pub fn resolve(command: &str, flags: Overrides, env_seed: Option<&str>) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_key_values(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
                    .into_iter()
                    .collect()
            }
            None => BTreeMap::new(),
        };
        let mut r = Resolver {
            file,
            explicit: BTreeSet::new(),
        };
        let env_seed = env_seed
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| CliError::Usage(format!("{SEED_ENV}={s:?}: {e}")))
            })
            .transpose()?;

        let cfg = RunConfig {
            command: command.to_string(),
            data: r.pick(flags.data, "data")?,
            schema: r.pick(flags.schema, "schema")?,
            model: r.pick(flags.model, "model")?,
            report: r.pick(flags.report, "report")?,
            mode: r.pick(flags.mode, "mode")?.unwrap_or(Mode::Iterative),
            dim: r.pick(flags.dim, "dim")?.unwrap_or(4096),
            levels: r.pick(flags.levels, "levels")?.unwrap_or(16),
            ngram: r.pick(flags.ngram, "ngram")?.unwrap_or(3),
            eta: r.pick(flags.eta, "eta")?.unwrap_or(0.5),
            max_epochs: r.pick(flags.max_epochs, "max-epochs")?.unwrap_or(20),
            patience: r.pick(flags.patience, "patience")?.unwrap_or(3),
            shuffle: r.pick(flags.shuffle, "shuffle")?.unwrap_or(false),
            seed: r.pick(flags.seed, "seed")?.or(env_seed).unwrap_or(DEFAULT_SEED),
            split: r.pick(flags.split, "split")?.unwrap_or(SplitKind::Random),
            train_fraction: r.pick(flags.train_fraction, "train-fraction")?.unwrap_or(0.8),
            subject: r.pick(flags.subject, "subject")?,
            eval_split: r.pick(flags.eval_split, "eval-split")?.unwrap_or(EvalSplit::Test),
            window: r.pick(flags.window, "window")?,
            stride: r.pick(flags.stride, "stride")?,
            smooth: r.pick(flags.smooth, "smooth")?.unwrap_or(1),
            label_policy: r
                .pick(flags.label_policy, "label-policy")?
                .unwrap_or(LabelPolicyArg::Majority),
            rates: r.pick_rates(flags.rates)?.unwrap_or_else(|| TABLE_RATES.to_vec()),
            trials: r.pick(flags.trials, "trials")?.unwrap_or(DEFAULT_TRIALS),
            explicit: BTreeSet::new(),
        };
        if let Some(key) = r.file.keys().next() {
            return Err(CliError::Usage(format!("unknown config key {key:?}")));
        }
        let cfg = RunConfig {
            explicit: r.explicit,
            ..cfg
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check(self.dim >= 2, || format!("dim must be at least 2, got {}", self.dim))?;
        check(self.levels >= 2, || {
            format!("levels must be at least 2, got {}", self.levels)
        })?;
        check(self.ngram >= 1, || "ngram must be at least 1".into())?;
        check(self.eta.is_finite() && self.eta > 0.0, || {
            format!("eta must be positive, got {}", self.eta)
        })?;
        check(self.max_epochs >= 1, || "max-epochs must be at least 1".into())?;
        check(self.train_fraction > 0.0 && self.train_fraction <= 1.0, || {
            format!("train-fraction must lie in (0, 1], got {}", self.train_fraction)
        })?;
        check(self.window != Some(0), || "window must be at least 1".into())?;
        check(self.stride != Some(0), || "stride must be at least 1".into())?;
        check(self.smooth >= 1, || "smooth must be at least 1".into())?;
        check(self.trials >= 1, || "trials must be at least 1".into())?;
        check(!self.rates.is_empty(), || "rates must not be empty".into())?;
        if let Some(r) = self.rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(CliError::Usage(format!("flip rate {r} outside [0, 1]")));
        }
        check(self.split != SplitKind::Loso || self.subject.is_some(), || {
            "the loso split needs --subject".into()
        })
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Codebook seeds derived from the master seed.
    pub fn encoder_seeds(&self) -> Seeds {
        Seeds::from_master(self.seed)
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, 10)
    }

    pub fn shuffle_seed(&self) -> Option<u64> {
        self.shuffle.then(|| derive_seed(self.seed, 11))
    }

    pub fn robustness_seed(&self) -> u64 {
        derive_seed(self.seed, 12)
    }

    pub fn personalize_seed(&self) -> u64 {
        derive_seed(self.seed, 13)
    }

    /// Every resolved parameter and derived seed as `(key, value)`.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        let auto = |v: Option<usize>| v.map_or("auto".to_string(), |v| v.to_string());
        let seeds = self.encoder_seeds();
        let mut out = vec![
            ("command", self.command.clone()),
            ("data", path(&self.data)),
            ("schema", path(&self.schema)),
            ("model", path(&self.model)),
            ("mode", value_name(&self.mode)),
            ("dim", self.dim.to_string()),
            ("levels", self.levels.to_string()),
            ("ngram", self.ngram.to_string()),
            ("eta", self.eta.to_string()),
            ("max-epochs", self.max_epochs.to_string()),
            ("patience", self.patience.to_string()),
            ("shuffle", self.shuffle.to_string()),
            ("seed", self.seed.to_string()),
            ("split", value_name(&self.split)),
            ("train-fraction", self.train_fraction.to_string()),
            ("subject", self.subject.clone().unwrap_or_else(|| "-".into())),
            ("eval-split", value_name(&self.eval_split)),
            ("window", auto(self.window)),
            ("stride", auto(self.stride)),
            ("smooth", self.smooth.to_string()),
            ("label-policy", value_name(&self.label_policy)),
            (
                "rates",
                self.rates.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("trials", self.trials.to_string()),
            ("seed.item", seeds.item.to_string()),
            ("seed.level", seeds.level.to_string()),
            ("seed.sensor", seeds.sensor.to_string()),
            ("seed.tie", seeds.tie.to_string()),
            ("seed.split", self.split_seed().to_string()),
            ("seed.robustness", self.robustness_seed().to_string()),
            ("seed.personalize", self.personalize_seed().to_string()),
        ];
        if let Some(s) = self.shuffle_seed() {
            out.push(("seed.shuffle", s.to_string()));
        }
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// `# key=value` lines for report headers.
    pub fn header(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }
}
