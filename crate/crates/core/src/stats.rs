//! Sample statistics for replicate aggregation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-component mean and standard error (`sd / √count`, unbiased variance)
/// using the two-pass algorithm. Samples are consumed in slice order, so the
/// result is bit-reproducible for a fixed ordering.
pub fn aggregate_statistics<S: Scalar, V: AsRef<[S]>>(samples: &[V]) -> Result<(Vec<S>, Vec<S>)> {
    let first = samples.first().ok_or(Error::EmptySample)?.as_ref();
    let n = first.len();
    let count = S::of_usize(samples.len());
    let mut mean = vec![S::zero(); n];
    for sample in samples {
        let sample = sample.as_ref();
        if sample.len() != n {
            return Err(Error::Shape {
                what: "replicate",
                expected: n,
                got: sample.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(sample) {
            *m += *v;
        }
    }
    for m in mean.iter_mut() {
        *m /= count;
    }
    if samples.len() == 1 {
        return Ok((mean, vec![S::zero(); n]));
    }
    let mut sq = vec![S::zero(); n];
    for sample in samples {
        for ((acc, v), m) in sq.iter_mut().zip(sample.as_ref()).zip(&mean) {
            let c = *v - *m;
            *acc += c * c;
        }
    }
    let denom = S::of_usize(samples.len() - 1);
    let stderr = sq.into_iter().map(|s| (s / denom / count).sqrt()).collect();
    Ok((mean, stderr))
}

/// Unbiased sample variance of each component.
pub fn sample_variance<S: Scalar, V: AsRef<[S]>>(samples: &[V]) -> Result<Vec<S>> {
    let (_, stderr) = aggregate_statistics(samples)?;
    let count = S::of_usize(samples.len());
    Ok(stderr.into_iter().map(|se| se * se * count).collect())
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 { 0.5 * (v[mid - 1] + v[mid]) } else { v[mid] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_samples_have_zero_stderr() {
        let samples = vec![vec![3.25_f64, -1.0]; 17];
        let (mean, se) = aggregate_statistics(&samples).unwrap();
        assert_eq!(mean, vec![3.25, -1.0]);
        assert_eq!(se, vec![0.0, 0.0]);
    }

    #[test]
    fn one_two_three() {
        let (mean, se) = aggregate_statistics(&[[1.0_f64], [2.0], [3.0]]).unwrap();
        assert_eq!(mean[0], 2.0);
        assert!((se[0] - 1.0 / 3.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_sample_has_zero_stderr() {
        let (_, se) = aggregate_statistics(&[[4.0_f64]]).unwrap();
        assert_eq!(se, vec![0.0]);
    }

    #[test]
    fn empty_is_an_error() {
        let empty: Vec<Vec<f64>> = Vec::new();
        assert!(matches!(aggregate_statistics(&empty), Err(Error::EmptySample)));
    }

    #[test]
    fn gaussian_stderr() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<[f64; 1]> = (0..10_000).map(|_| [StandardNormal.sample(&mut rng)]).collect();
        let (_, se) = aggregate_statistics(&samples).unwrap();
        assert!((se[0] - 0.01).abs() < 0.001, "stderr {}", se[0]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    fn naive(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let n = samples[0].len();
        let c = samples.len() as f64;
        (0..n)
            .map(|j| {
                let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
                let m = col.iter().sum::<f64>() / c;
                let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (c - 1.0);
                (m, (var / c).sqrt())
            })
            .unzip()
    }

    proptest! {
        #[test]
        fn matches_naive_reference(samples in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..60)) {
            let (mean, se) = aggregate_statistics(&samples).unwrap();
            let (m_ref, se_ref) = naive(&samples);
            for j in 0..3 {
                prop_assert!((mean[j] - m_ref[j]).abs() <= 1e-12 * (1.0 + m_ref[j].abs()));
                prop_assert!((se[j] - se_ref[j]).abs() <= 1e-12 * (1.0 + se_ref[j].abs()));
            }
        }
    }
}
