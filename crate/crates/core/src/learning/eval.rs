use std::fmt;

use rayon::prelude::*;

use super::{LearnError, Model};
use crate::hv::AccumHv;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    /// `None` for classes with no samples.
    pub per_class_recall: Vec<Option<f64>>,
    pub n_samples: usize,
}

pub fn evaluate(model: &Model, data: &[(AccumHv, usize)]) -> Result<EvalReport, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    for (_, class) in data {
        model.check_class(*class)?;
    }
    let predictions = data
        .par_iter()
        .map(|(h, _)| model.predict_index(h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::from_predictions(
        model.classes().to_vec(),
        data.iter().map(|(_, c)| *c).zip(predictions),
    ))
}

impl EvalReport {
    /// Builds the report from `(true, predicted)` class-index pairs.
    pub fn from_predictions<I>(classes: Vec<String>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let k = classes.len();
        let mut confusion = vec![vec![0u64; k]; k];
        let mut n = 0;
        for (t, p) in pairs {
            confusion[t][p] += 1;
            n += 1;
        }
        let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let per_class_recall = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: u64 = row.iter().sum();
                (total > 0).then(|| row[i] as f64 / total as f64)
            })
            .collect();
        EvalReport {
            classes,
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            confusion,
            per_class_recall,
            n_samples: n,
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "accuracy: {:.2}% ({} samples)",
            100.0 * self.accuracy,
            self.n_samples
        )?;
        let width = self.classes.iter().map(|c| c.len()).max().unwrap_or(4).max(6);
        write!(f, "{:>width$}", "true\\pred")?;
        for c in &self.classes {
            write!(f, " {c:>width$}")?;
        }
        writeln!(f, " {:>width$}", "recall")?;
        for (i, row) in self.confusion.iter().enumerate() {
            write!(f, "{:>width$}", self.classes[i])?;
            for v in row {
                write!(f, " {v:>width$}")?;
            }
            match self.per_class_recall[i] {
                Some(r) => writeln!(f, " {:>width$.3}", r)?,
                None => writeln!(f, " {:>width$}", "-")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accounting_identities() {
        let r = EvalReport::from_predictions(
            vec!["a".into(), "b".into(), "c".into()],
            [(0, 0), (0, 1), (1, 1), (1, 1), (0, 0)],
        );
        assert_eq!(r.n_samples, 5);
        assert_eq!(r.confusion.iter().flatten().sum::<u64>(), 5);
        assert_eq!(r.confusion[0].iter().sum::<u64>(), 3);
        assert!((r.accuracy - 0.8).abs() < 1e-12);
        assert_eq!(r.per_class_recall, vec![Some(2.0 / 3.0), Some(1.0), None]);
        let text = r.to_string();
        assert!(text.contains("80.00%"));
    }
}
