use crate::dist::IndexedSampleSet;
use crate::error::{invalid, Result};
use crate::rng::RandomStream;
use rand::Rng;

/// One draw from μ(n, α, β) = |S₁ ∩ S₂|, with `|S₁| = α` fixed and `S₂`
/// a uniform `β`-subset of an `n`-set.
///
/// Exact: the `β` elements of `S₂` are drawn one at a time without
/// replacement.
pub fn usi_sample(n: u64, alpha: u64, beta: u64, rng: &mut RandomStream) -> Result<u64> {
    if alpha > n || beta > n {
        return Err(invalid(format!("μ({n}, {alpha}, {beta}) needs α, β ≤ n")));
    }
    let (alpha, beta) = if beta > alpha { (beta, alpha) } else { (alpha, beta) };
    let mut hits = 0u64;
    for k in 0..beta {
        if rng.random_range(0..n - k) < alpha - hits {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Probability mass function of μ(n, α, β).
pub fn usi_pmf(n: u64, alpha: u64, beta: u64) -> Vec<f64> {
    use statrs::function::factorial::ln_binomial;
    (0..=alpha.min(beta))
        .map(|k| {
            if beta - k > n - alpha {
                0.0
            } else {
                (ln_binomial(alpha, k) + ln_binomial(n - alpha, beta - k) - ln_binomial(n, beta)).exp()
            }
        })
        .collect()
}

/// For each letter, the sorted indices of the samples carrying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicesSetVector {
    sets: Vec<Vec<usize>>,
    total: usize,
}

impl IndicesSetVector {
    pub fn set(&self, letter: usize) -> &[usize] {
        &self.sets[letter]
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Letters with a nonempty index set, ascending.
    pub fn nonempty(&self) -> Vec<usize> {
        (0..self.sets.len()).filter(|&l| !self.sets[l].is_empty()).collect()
    }
}

pub fn indices_set_vector(samples: &IndexedSampleSet, n: usize) -> Result<IndicesSetVector> {
    let mut sets = vec![Vec::new(); n];
    for (j, &l) in samples.letters().iter().enumerate() {
        sets.get_mut(l).ok_or_else(|| invalid(format!("letter {l} outside alphabet of size {n}")))?.push(j);
    }
    Ok(IndicesSetVector { sets, total: samples.len() })
}
