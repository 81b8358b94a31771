use crate::error::{invalid, Result};
use crate::rng::stream;
use rand_distr::{Distribution as _, StandardNormal};

pub const DEFAULT_FLATNESS_K: u32 = 40;

/// A seeded near-orthonormal matrix with entries rounded to multiples of
/// `2^{-K/2}`.
///
/// Rows are Gaussian vectors orthonormalized by Gram–Schmidt in order, so
/// row `i` depends on every earlier row; the whole matrix is built at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundedRotation {
    n: usize,
    seed: u64,
    k: u32,
    rows: Vec<Vec<f64>>,
}

impl RoundedRotation {
    pub fn new(n: usize, seed: u64, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("rotation dimension must be positive"));
        }
        if k == 0 || k > 104 {
            return Err(invalid(format!("rounding exponent {k} outside 1..=104")));
        }
        let mut rng = stream(seed);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        while rows.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            // Two passes keep the basis orthogonal to working precision.
            for _ in 0..2 {
                for r in &rows {
                    let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(r).for_each(|(x, y)| *x -= dot * y);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            rows.push(v);
        }
        let grid = (f64::from(k) / 2.0).exp2();
        for r in &mut rows {
            r.iter_mut().for_each(|x| *x = (*x * grid).round() / grid);
        }
        Ok(Self { n, seed, k, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn apply(&self, v: &[i64]) -> Vec<f64> {
        (0..self.n).map(|i| apply_rotation_coord(self, v, i)).collect()
    }
}

/// `(Rv)_i`.
pub fn apply_rotation_coord(rot: &RoundedRotation, v: &[i64], i: usize) -> f64 {
    assert_eq!(v.len(), rot.n, "vector length differs from rotation dimension");
    rot.rows[i].iter().zip(v).map(|(r, &x)| r * x as f64).sum()
}
