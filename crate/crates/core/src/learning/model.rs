use super::LearnError;
use crate::encoding::EncoderConfig;
use crate::hv::{cosine, AccumHv, HvError};

/// Per-class accumulators plus the encoder settings that produced their inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    dim: usize,
    classes: Vec<String>,
    class_hvs: Vec<AccumHv>,
    eta: f64,
    encoder: EncoderConfig,
    trained_epochs: u32,
}

/// A retraining update applied for one misprediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub true_class: usize,
    pub predicted: usize,
    /// `η(δ_l' - δ_l)`, added to the true class and subtracted from the predicted one.
    pub weight: f64,
}

impl Model {
    /// An untrained model with all-zero class vectors.
    pub fn new(classes: Vec<String>, eta: f64, encoder: EncoderConfig) -> Result<Self, LearnError> {
        let dim = encoder.dim;
        let class_hvs = classes
            .iter()
            .map(|_| AccumHv::zeros(dim))
            .collect::<Result<Vec<_>, _>>()?;
        Model::from_parts(classes, class_hvs, eta, encoder, 0)
    }

    pub fn from_parts(
        classes: Vec<String>,
        class_hvs: Vec<AccumHv>,
        eta: f64,
        encoder: EncoderConfig,
        trained_epochs: u32,
    ) -> Result<Self, LearnError> {
        if classes.is_empty() {
            return Err(LearnError::InvalidArgument("model needs at least one class".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].contains(c) {
                return Err(LearnError::InvalidArgument(format!("duplicate class label {c:?}")));
            }
        }
        if class_hvs.len() != classes.len() {
            return Err(LearnError::InvalidArgument(format!(
                "{} class vectors for {} classes",
                class_hvs.len(),
                classes.len()
            )));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(LearnError::InvalidArgument(format!(
                "learning rate must be positive, got {eta}"
            )));
        }
        encoder.validate()?;
        let dim = encoder.dim;
        for hv in &class_hvs {
            if hv.dim() != dim {
                return Err(HvError::DimensionMismatch {
                    left: dim,
                    right: hv.dim(),
                }
                .into());
            }
        }
        Ok(Model {
            dim,
            classes,
            class_hvs,
            eta,
            encoder,
            trained_epochs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_hvs(&self) -> &[AccumHv] {
        &self.class_hvs
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn encoder(&self) -> &EncoderConfig {
        &self.encoder
    }

    pub fn trained_epochs(&self) -> u32 {
        self.trained_epochs
    }

    pub(crate) fn set_trained_epochs(&mut self, epochs: u32) {
        self.trained_epochs = epochs;
    }

    pub fn class_index(&self, label: &str) -> Result<usize, LearnError> {
        self.classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| LearnError::UnknownClass(label.to_string()))
    }

    pub(crate) fn check_class(&self, class: usize) -> Result<(), LearnError> {
        if class < self.classes.len() {
            Ok(())
        } else {
            Err(LearnError::UnknownClass(format!("#{class}")))
        }
    }

    /// A model counts as trained once any class vector is non-zero.
    pub fn is_trained(&self) -> bool {
        self.class_hvs.iter().any(|c| !c.is_zero())
    }

    /// Multiplies every class vector by `factor`.
    pub fn scale_classes(&mut self, factor: f32) {
        for c in &mut self.class_hvs {
            c.scale(factor);
        }
    }

    fn similarity(&self, h: &AccumHv, class: usize) -> Result<f64, LearnError> {
        match cosine(h, &self.class_hvs[class]) {
            Ok(d) => Ok(d),
            Err(HvError::ZeroNorm) => Ok(0.0),
            Err(e) => Err(e.into()),
        }
    }

    /// `δ_l = cosine(H, C_l)` for every class; zero vectors give `δ = 0`.
    pub fn similarities(&self, h: &AccumHv) -> Result<Vec<f64>, LearnError> {
        if h.dim() != self.dim {
            return Err(HvError::DimensionMismatch {
                left: self.dim,
                right: h.dim(),
            }
            .into());
        }
        (0..self.classes.len()).map(|l| self.similarity(h, l)).collect()
    }

    /// Index of the most similar class, ties to the lowest index.
    pub fn predict_index(&self, h: &AccumHv) -> Result<usize, LearnError> {
        if !self.is_trained() {
            return Err(LearnError::NotTrained);
        }
        Ok(argmax(&self.similarities(h)?))
    }

    pub fn predict(&self, h: &AccumHv) -> Result<&str, LearnError> {
        let idx = self.predict_index(h)?;
        Ok(&self.classes[idx])
    }

    /// `C_l <- C_l + η(1 - δ_l) H`; returns the weight that was applied.
    pub fn online_update(&mut self, h: &AccumHv, class: usize) -> Result<f64, LearnError> {
        self.check_class(class)?;
        if h.dim() != self.dim {
            return Err(HvError::DimensionMismatch {
                left: self.dim,
                right: h.dim(),
            }
            .into());
        }
        let delta = self.similarity(h, class)?;
        let weight = self.eta * (1.0 - delta);
        if weight != 0.0 {
            self.class_hvs[class].add_scaled(h, weight)?;
        }
        Ok(weight)
    }

    /// Unweighted accumulation `C_l <- C_l + H`, the baseline single-pass rule.
    pub fn accumulate(&mut self, h: &AccumHv, class: usize) -> Result<(), LearnError> {
        self.check_class(class)?;
        self.class_hvs[class].add_scaled(h, 1.0)?;
        Ok(())
    }

    /// One retraining step for a labelled sample.
    ///
    /// Correct predictions leave the model untouched and return `None`.
    pub fn retrain_step(&mut self, h: &AccumHv, class: usize) -> Result<Option<Correction>, LearnError> {
        self.check_class(class)?;
        let sims = self.similarities(h)?;
        let predicted = argmax(&sims);
        if predicted == class {
            return Ok(None);
        }
        let weight = self.eta * (sims[predicted] - sims[class]);
        if weight != 0.0 {
            self.class_hvs[class].add_scaled(h, weight)?;
            self.class_hvs[predicted].add_scaled(h, -weight)?;
        }
        Ok(Some(Correction {
            true_class: class,
            predicted,
            weight,
        }))
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Seeds;
    use crate::hv::random_hv;

    pub(crate) fn encoder(dim: usize) -> EncoderConfig {
        EncoderConfig {
            dim,
            q_levels: 4,
            n: 3,
            seeds: Seeds::from_master(0),
            feature_bounds: vec![(0.0, 1.0)],
        }
    }

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    fn hv(seed: u64, dim: usize) -> AccumHv {
        AccumHv::from_bipolar(&random_hv(seed, 0, dim).unwrap())
    }

    #[test]
    fn construction_validates() {
        assert!(Model::new(vec![], 0.5, encoder(64)).is_err());
        assert!(Model::new(vec!["a".into(), "a".into()], 0.5, encoder(64)).is_err());
        assert!(Model::new(labels(2), 0.0, encoder(64)).is_err());
        assert!(Model::new(labels(2), 0.5, encoder(64)).is_ok());
    }

    #[test]
    fn untrained_model_refuses_to_predict() {
        let m = Model::new(labels(2), 0.5, encoder(64)).unwrap();
        assert_eq!(m.predict(&hv(1, 64)), Err(LearnError::NotTrained));
        assert_eq!(m.similarities(&hv(1, 64)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn first_update_copies_query_with_unit_rate() {
        let mut m = Model::new(labels(2), 1.0, encoder(128)).unwrap();
        let h = hv(3, 128);
        assert_eq!(m.online_update(&h, 1).unwrap(), 1.0);
        assert_eq!(m.class_hvs()[1], h);
        assert!(m.class_hvs()[0].is_zero());
        assert_eq!(m.similarities(&h).unwrap()[1], 1.0);
    }

    #[test]
    fn saturated_class_is_unchanged() {
        let mut m = Model::new(labels(1), 0.5, encoder(128)).unwrap();
        let h = hv(3, 128);
        m.online_update(&h, 0).unwrap();
        let before = m.clone();
        assert_eq!(m.online_update(&h, 0).unwrap(), 0.0);
        assert_eq!(m, before);
    }

    #[test]
    fn unknown_class_is_rejected() {
        let mut m = Model::new(labels(2), 0.5, encoder(64)).unwrap();
        assert!(matches!(
            m.online_update(&hv(1, 64), 2),
            Err(LearnError::UnknownClass(_))
        ));
        assert!(matches!(
            m.retrain_step(&hv(1, 64), 5),
            Err(LearnError::UnknownClass(_))
        ));
        assert!(m.class_index("nope").is_err());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn single_class_model_always_predicts_it() {
        let mut m = Model::new(labels(1), 0.5, encoder(64)).unwrap();
        m.online_update(&hv(1, 64), 0).unwrap();
        for s in 2..10 {
            assert_eq!(m.predict(&hv(s, 64)).unwrap(), "c0");
        }
    }

    #[test]
    fn marginal_miss_gives_zero_weight() {
        // both classes hold the same vector: δ_0 == δ_1, prediction goes to class 0
        let mut m = Model::new(labels(2), 0.5, encoder(64)).unwrap();
        let h = hv(1, 64);
        m.accumulate(&h, 0).unwrap();
        m.accumulate(&h, 1).unwrap();
        let before = m.clone();
        let c = m.retrain_step(&h, 1).unwrap().unwrap();
        assert_eq!(c.predicted, 0);
        assert_eq!(c.weight, 0.0);
        assert_eq!(m, before);
    }
}
