use crate::dist::{IndexedSampleSet, OccurrenceVector};
use crate::error::{invalid, Result};

/// Two norm estimates agree when neither exceeds this multiple of the other.
/// Each estimate is a factor-2 approximation of a squared norm, hence 4.
pub const NORM_AGREEMENT_FACTOR: f64 = 4.0;

/// Unbiased collision estimate Σ_i C(X_i, 2) / C(t, 2) of ‖p‖₂².
pub fn collision_norm_estimate(samples: &IndexedSampleSet) -> Result<f64> {
    collision_norm_estimate_occ(&crate::dist::occurrence_vector(samples, samples.n())?)
}

pub fn collision_norm_estimate_occ(x: &OccurrenceVector) -> Result<f64> {
    let t = u128::from(x.total());
    if t < 2 {
        return Err(invalid(format!("collision estimate needs t ≥ 2 samples, got {t}")));
    }
    Ok(x.colliding_pairs() as f64 / (t * (t - 1) / 2) as f64)
}

/// Factor-[`NORM_AGREEMENT_FACTOR`] comparison; two zero estimates agree.
pub fn norms_agree(a: f64, b: f64) -> bool {
    a <= NORM_AGREEMENT_FACTOR * b && b <= NORM_AGREEMENT_FACTOR * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{sample, Distribution};
    use crate::rng::stream;

    #[test]
    fn extremes() {
        let same = IndexedSampleSet::new(vec![2; 9], 4).unwrap();
        assert_eq!(collision_norm_estimate(&same).unwrap(), 1.0);
        let distinct = IndexedSampleSet::new(vec![0, 3], 4).unwrap();
        assert_eq!(collision_norm_estimate(&distinct).unwrap(), 0.0);
        assert!(collision_norm_estimate(&IndexedSampleSet::new(vec![1], 4).unwrap()).is_err());
    }

    #[test]
    fn unbiased_on_uniform() {
        let u = Distribution::uniform(100).unwrap();
        let mut rng = stream(12);
        let trials = 500;
        let xs: Vec<f64> = (0..trials).map(|_| collision_norm_estimate(&sample(&u, 1000, &mut rng)).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / trials as f64;
        assert!((mean - 0.01).abs() < 0.002);
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
        assert!((mean - 0.01).abs() <= 3.0 * sd / (trials as f64).sqrt());
    }

    #[test]
    fn unbiased_on_skewed() {
        let p = Distribution::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let truth: f64 = p.probs().iter().map(|x| x * x).sum();
        let mut rng = stream(13);
        let trials = 800;
        let xs: Vec<f64> = (0..trials).map(|_| collision_norm_estimate(&sample(&p, 30, &mut rng)).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / trials as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
        assert!((mean - truth).abs() <= 3.0 * sd / (trials as f64).sqrt());
    }

    #[test]
    fn agreement_rule() {
        assert!(norms_agree(0.0, 0.0));
        assert!(norms_agree(1.0, 4.0));
        assert!(!norms_agree(1.0, 4.01));
        assert!(!norms_agree(0.0, 0.1));
    }
}
