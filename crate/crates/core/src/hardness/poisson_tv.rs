use crate::dist::poisson_sample;
use crate::error::{invalid, Result};
use crate::rng::RandomStream;
use crate::stats::empirical_tv;
use rand_distr::{Binomial, Distribution as _};
use std::collections::BTreeMap;

/// Empirical total variation between `Mult(n; p)` (first cell dropped)
/// and independent `Poi(n·p_i)` over `trials` draws of each.
pub fn poisson_multinomial_tv_check(n: u64, p: &[f64], trials: usize, rng: &mut RandomStream) -> Result<f64> {
    let total: f64 = p.iter().sum();
    if p.iter().any(|&x| !(x >= 0.0)) || total > 1.0 + 1e-12 {
        return Err(invalid("cell probabilities must be nonnegative with sum at most 1"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let mut hist: BTreeMap<Vec<u64>, [u64; 2]> = BTreeMap::new();
    for _ in 0..trials {
        let mut left = n;
        let mut mass = 1.0;
        let mult: Vec<u64> = p
            .iter()
            .map(|&pi| {
                let q = if mass > 0.0 { (pi / mass).min(1.0) } else { 0.0 };
                let c = Binomial::new(left, q).expect("q in [0, 1]").sample(rng);
                left -= c;
                mass -= pi;
                c
            })
            .collect();
        hist.entry(mult).or_default()[0] += 1;
        let pois = p.iter().map(|&pi| poisson_sample(n as f64 * pi, rng)).collect::<Result<Vec<_>>>()?;
        hist.entry(pois).or_default()[1] += 1;
    }
    let (a, b): (Vec<u64>, Vec<u64>) = hist.values().map(|c| (c[0], c[1])).unzip();
    Ok(empirical_tv(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn degenerate_cell_has_zero_distance() {
        assert_eq!(poisson_multinomial_tv_check(100, &[0.0], 1000, &mut stream(1)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(poisson_multinomial_tv_check(10, &[0.7, 0.6], 10, &mut stream(1)).is_err());
        assert!(poisson_multinomial_tv_check(10, &[-0.1], 10, &mut stream(1)).is_err());
    }
}
