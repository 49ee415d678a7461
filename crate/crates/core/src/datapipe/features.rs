use super::{DataError, Sample};

/// Statistics per channel: mean, standard deviation, minimum, maximum,
/// root-mean-square, mean absolute first difference and zero crossings of the
/// mean-removed window.
pub const FEATURES_PER_CHANNEL: usize = 7;

const STAT_NAMES: [&str; FEATURES_PER_CHANNEL] = ["mean", "std", "min", "max", "rms", "mad1", "zc"];

pub fn feature_names(channels: &[String]) -> Vec<String> {
    channels
        .iter()
        .flat_map(|c| STAT_NAMES.iter().map(move |s| format!("{c}.{s}")))
        .collect()
}

fn channel_stats(x: &[f64]) -> [f64; FEATURES_PER_CHANNEL] {
    let n = x.len() as f64;
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return [min, 0.0, min, max, min.abs(), 0.0, 0.0];
    }
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let mad1 = if x.len() > 1 {
        x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    // sign changes of x - mean, skipping exact zeros
    let mut crossings = 0usize;
    let mut last_sign = 0i8;
    for v in x {
        let d = v - mean;
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                crossings += 1;
            }
            last_sign = sign;
        }
    }
    [mean, var.sqrt(), min, max, rms, mad1, crossings as f64]
}

/// Concatenated per-channel statistics, `7 * channels` values.
pub fn extract_features<C: AsRef<[f64]>>(window: &[C]) -> Result<Vec<f64>, DataError> {
    if window.is_empty() || window.iter().any(|c| c.as_ref().is_empty()) {
        return Err(DataError::InvalidArgument(
            "cannot extract features from an empty window".into(),
        ));
    }
    Ok(window.iter().flat_map(|c| channel_stats(c.as_ref())).collect())
}

/// Per-feature `(min, max)` over the training samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub bounds: Vec<(f64, f64)>,
}

pub fn fit_stats(train: &[Sample]) -> Result<FeatureStats, DataError> {
    let first = train.first().ok_or(DataError::EmptyInput)?;
    let mut bounds: Vec<(f64, f64)> = first.features.iter().map(|&f| (f, f)).collect();
    for s in &train[1..] {
        if s.features.len() != bounds.len() {
            return Err(DataError::InvalidArgument(format!(
                "sample has {} features, expected {}",
                s.features.len(),
                bounds.len()
            )));
        }
        for (b, &f) in bounds.iter_mut().zip(&s.features) {
            b.0 = b.0.min(f);
            b.1 = b.1.max(f);
        }
    }
    Ok(FeatureStats { bounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_window_closed_form() {
        for c in [0.1, -2.5, 0.0, 7.0] {
            let f = extract_features(&[vec![c; 9]]).unwrap();
            assert_eq!(f, vec![c, 0.0, c, c, c.abs(), 0.0, 0.0]);
        }
    }

    #[test]
    fn alternating_window() {
        let f = extract_features(&[vec![1.0, -1.0, 1.0, -1.0]]).unwrap();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 1.0);
        assert_eq!(f[4], 1.0);
        assert_eq!(f[5], 2.0);
        assert_eq!(f[6], 3.0);
    }

    #[test]
    fn arity_and_names() {
        let w = vec![vec![1.0, 2.0], vec![3.0, 5.0], vec![0.0, 0.5]];
        assert_eq!(extract_features(&w).unwrap().len(), 21);
        let names = feature_names(&["x".into(), "y".into()]);
        assert_eq!(names.len(), 14);
        assert_eq!(names[7], "y.mean");
        assert!(extract_features::<Vec<f64>>(&[]).is_err());
        assert!(extract_features(&[Vec::<f64>::new()]).is_err());
    }

    fn sample(f: Vec<f64>) -> Sample {
        Sample {
            features: f,
            label: "a".into(),
            subject: "s".into(),
        }
    }

    #[test]
    fn stats_are_elementwise_extremes() {
        let one = fit_stats(&[sample(vec![1.0, 2.0])]).unwrap();
        assert_eq!(one.bounds, vec![(1.0, 1.0), (2.0, 2.0)]);
        let two = fit_stats(&[sample(vec![1.0, 5.0]), sample(vec![3.0, -1.0])]).unwrap();
        assert_eq!(two.bounds, vec![(1.0, 3.0), (-1.0, 5.0)]);
        assert!(matches!(fit_stats(&[]), Err(DataError::EmptyInput)));
    }
}
