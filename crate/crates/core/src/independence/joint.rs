use crate::dist::{Distribution, IndexedSampleSet};
use crate::error::{invalid, Result};
use crate::rng::RandomStream;
use std::ops::{Add, Div, Mul};

/// `p_{|U}`: `p` restricted to `u` and renormalized, in the order of `u`.
pub fn conditioned(p: &Distribution, u: &[usize]) -> Result<Distribution> {
    if let Some(&i) = u.iter().find(|&&i| i >= p.n()) {
        return Err(invalid(format!("letter {i} outside alphabet of size {}", p.n())));
    }
    let mass: f64 = u.iter().map(|&i| p.prob(i)).sum();
    if mass <= 0.0 {
        return Err(invalid("conditioning set has zero mass"));
    }
    Distribution::new(u.iter().map(|&i| p.prob(i) / mass).collect())
}

/// A distribution over `[n] × [m]`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    n: usize,
    m: usize,
    flat: Distribution,
}

/// Index-aligned draws: sample `j` is the pair `(alice[j], bob[j])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointSampleSet {
    pub alice: IndexedSampleSet,
    pub bob: IndexedSampleSet,
}

impl JointDistribution {
    pub fn new(n: usize, m: usize, probs: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 || probs.len() != n * m {
            return Err(invalid(format!("joint table needs {n}·{m} entries, got {}", probs.len())));
        }
        Ok(Self { n, m, flat: Distribution::new(probs)? })
    }

    pub fn product(p1: &Distribution, p2: &Distribution) -> Self {
        let probs: Vec<f64> = p1.probs().iter().flat_map(|a| p2.probs().iter().map(move |b| a * b)).collect();
        Self { n: p1.n(), m: p2.n(), flat: Distribution::from_weights(&probs).expect("product of distributions") }
    }

    pub fn uniform_product(n: usize, m: usize) -> Result<Self> {
        Ok(Self::product(&Distribution::uniform(n)?, &Distribution::uniform(m)?))
    }

    /// `p(i, i) = 1/n` on `[n] × [n]`.
    pub fn diagonal(n: usize) -> Result<Self> {
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0 / n as f64;
        }
        Self::new(n, n, probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.flat.prob(i * self.m + j)
    }

    pub fn probs(&self) -> &[f64] {
        self.flat.probs()
    }

    pub fn marginals(&self) -> (Distribution, Distribution) {
        let mut a = vec![0.0; self.n];
        let mut b = vec![0.0; self.m];
        for i in 0..self.n {
            for j in 0..self.m {
                let p = self.prob(i, j);
                a[i] += p;
                b[j] += p;
            }
        }
        (Distribution::from_weights(&a).expect("nonempty"), Distribution::from_weights(&b).expect("nonempty"))
    }

    /// ‖p − p₁ × p₂‖₁.
    pub fn distance_to_marginal_product(&self) -> f64 {
        let (a, b) = self.marginals();
        (0..self.n)
            .flat_map(|i| (0..self.m).map(move |j| (i, j)))
            .map(|(i, j)| (self.prob(i, j) - a.prob(i) * b.prob(j)).abs())
            .sum()
    }

    pub fn sample(&self, t: usize, rng: &mut RandomStream) -> JointSampleSet {
        let s = self.flat.sampler();
        let draws: Vec<usize> = (0..t).map(|_| s.draw(rng)).collect();
        JointSampleSet {
            alice: IndexedSampleSet::new(draws.iter().map(|d| d / self.m).collect(), self.n).expect("in range"),
            bob: IndexedSampleSet::new(draws.iter().map(|d| d % self.m).collect(), self.m).expect("in range"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndependenceFamily {
    Product,
    Diagonal,
}

impl IndependenceFamily {
    pub fn label(self) -> &'static str {
        match self {
            IndependenceFamily::Product => "product",
            IndependenceFamily::Diagonal => "diagonal",
        }
    }

    pub fn expected(self) -> crate::harness::Decision {
        match self {
            IndependenceFamily::Product => crate::harness::Decision::Product,
            IndependenceFamily::Diagonal => crate::harness::Decision::Far,
        }
    }

    pub fn instance(self, n: usize, m: usize) -> Result<JointDistribution> {
        match self {
            IndependenceFamily::Product => JointDistribution::uniform_product(n, m),
            IndependenceFamily::Diagonal if n == m => JointDistribution::diagonal(n),
            IndependenceFamily::Diagonal => Err(invalid("diagonal instance needs n = m")),
        }
    }
}

/// `(p̂, q̂)` for a row-major table `probs` over `[n] × [m]` and rows `u`:
/// `p̂ = p_{|U×[m]}` and `q̂ = p_{1|U} × p₂`, both over `u × [m]` row-major.
///
/// Generic so that it can run over exact rationals as well as `f64`.
pub fn conditioned_rectangle<T>(probs: &[T], n: usize, m: usize, u: &[usize]) -> (Vec<T>, Vec<T>)
where
    T: Clone + Add<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    assert!(!u.is_empty() && m > 0 && probs.len() == n * m);
    let sum = |it: &mut dyn Iterator<Item = T>| {
        let first = it.next().expect("nonempty");
        it.fold(first, |a, b| a + b)
    };
    let row = |i: usize| sum(&mut (0..m).map(|j| probs[i * m + j].clone()));
    let col = |j: usize| sum(&mut (0..n).map(|i| probs[i * m + j].clone()));
    let mass = sum(&mut u.iter().map(|&i| row(i)));
    let total = sum(&mut (0..n).map(row));
    let mut p_hat = Vec::with_capacity(u.len() * m);
    let mut q_hat = Vec::with_capacity(u.len() * m);
    for &i in u {
        let ri = row(i);
        for j in 0..m {
            p_hat.push(probs[i * m + j].clone() / mass.clone());
            q_hat.push(ri.clone() / mass.clone() * (col(j) / total.clone()));
        }
    }
    (p_hat, q_hat)
}

pub fn reduced_distributions(p: &JointDistribution, u: &[usize]) -> Result<(Distribution, Distribution)> {
    if u.is_empty() || u.iter().any(|&i| i >= p.n) {
        return Err(invalid("conditioning rows must be a nonempty subset of the alphabet"));
    }
    if u.iter().map(|&i| (0..p.m).map(|j| p.prob(i, j)).sum::<f64>()).sum::<f64>() <= 0.0 {
        return Err(invalid("conditioning rows have zero mass"));
    }
    let (a, b) = conditioned_rectangle(p.probs(), p.n, p.m, u);
    Ok((Distribution::from_weights(&a)?, Distribution::from_weights(&b)?))
}
