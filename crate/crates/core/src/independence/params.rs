use crate::error::{config, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItConstants {
    pub c_precondition: f64,
    /// t′ ≤ c₁·n·√m/ε.
    pub c1: f64,
    /// Multiplier of l.
    pub c2: f64,
    /// Target subset size c₃·t′·l/n.
    pub c3: f64,
    /// ε′ = c_eps·ε in the reduced threshold.
    pub c_eps: f64,
}

impl Default for ItConstants {
    fn default() -> Self {
        Self { c_precondition: 8.0, c1: 16.0, c2: 64.0, c3: 2.0, c_eps: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ITParams {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub eps: f64,
    pub k: usize,
    pub repetitions: usize,
    pub constants: ItConstants,
}

impl ITParams {
    pub fn new(n: usize, m: usize, t: usize, eps: f64, k: usize, constants: ItConstants) -> Result<Self> {
        if m < 1 || n < m {
            return Err(config(format!("need n ≥ m ≥ 1, got n = {n}, m = {m}")));
        }
        if n < 2 {
            return Err(config("alphabet size n must be at least 2"));
        }
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(config(format!("eps {eps} must lie in (0, 2]")));
        }
        if k < 1 {
            return Err(config("security parameter k must be at least 1"));
        }
        let p = Self { n, m, t, eps, k, repetitions: k, constants };
        p.validate()?;
        Ok(p)
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Result<Self> {
        self.repetitions = repetitions;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(config("at least one repetition is required"));
        }
        let need = self.min_t();
        if (self.t as f64) < need {
            return Err(config(format!("t = {} is below the sample precondition {need:.1}", self.t)));
        }
        if self.t_prime() < 2 {
            return Err(config("sample sets are too small"));
        }
        Ok(())
    }

    /// C·k·(n^{2/3} m^{1/3} ε^{-4/3} + √(nm)/ε²).
    pub fn min_t(&self) -> f64 {
        let (n, m, e) = (self.n as f64, self.m as f64, self.eps);
        self.constants.c_precondition
            * self.k as f64
            * (n.powf(2.0 / 3.0) * m.powf(1.0 / 3.0) * e.powf(-4.0 / 3.0) + (n * m).sqrt() / (e * e))
    }

    /// t′ = ⌊min(t/(3K), c₁·n·√m/ε)⌋.
    pub fn t_prime(&self) -> usize {
        let cap = self.constants.c1 * self.n as f64 * (self.m as f64).sqrt() / self.eps;
        (self.t / (3 * self.repetitions)).min(cap.floor() as usize)
    }

    /// |S_a| = min(t′, n).
    pub fn split_a_size(&self) -> usize {
        self.t_prime().min(self.n)
    }

    /// |S_b| = m, or t′ if a sample set is smaller.
    pub fn split_b_size(&self) -> usize {
        self.m.min(self.t_prime())
    }

    /// l = ⌈c₂·max(n³m/(t′³ε⁴), n²m/(t′²ε⁴), 1/ε²)⌉, at most n + |S_a|.
    pub fn subset_size(&self) -> usize {
        let (n, m, tp, e4) = (self.n as f64, self.m as f64, self.t_prime() as f64, self.eps.powi(4));
        let raw = self.constants.c2
            * (n.powi(3) * m / (tp.powi(3) * e4)).max(n * n * m / (tp * tp * e4)).max(1.0 / (self.eps * self.eps));
        (raw.ceil() as usize).clamp(1, self.n + self.split_a_size())
    }

    /// Cap 100·t′·l/n on λ.
    pub fn lambda_cap(&self) -> usize {
        (100.0 * self.t_prime() as f64 * self.subset_size() as f64 / self.n as f64).floor() as usize
    }

    /// ⌈c₃·t′·l/n⌉, before the ⌊|I|/4⌋ cap.
    pub fn target_pairs(&self) -> usize {
        (self.constants.c3 * self.t_prime() as f64 * self.subset_size() as f64 / self.n as f64).ceil() as usize
    }

    pub fn eps_prime(&self) -> f64 {
        self.constants.c_eps * self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precondition_and_derived() {
        let c = ItConstants::default();
        assert!(ITParams::new(20, 20, 639, 1.0, 2, c).is_err());
        let p = ITParams::new(20, 20, 640, 1.0, 2, c).unwrap();
        assert_eq!(p.t_prime(), 106);
        assert_eq!(p.split_a_size(), 20);
        // 64 · max(160000/106³, 8000/106², 1) = 64, clamped to n + |S_a| = 40.
        assert_eq!(p.subset_size(), 40);
        let small = ITParams::new(20, 20, 640, 1.0, 2, ItConstants { c2: 8.0, ..c }).unwrap();
        assert_eq!(small.subset_size(), 8);
        assert!(ITParams::new(10, 20, 10_000, 1.0, 2, c).is_err());
    }

    #[test]
    fn t_prime_cap() {
        let p = ITParams::new(20, 20, 100_000, 1.0, 2, ItConstants::default()).unwrap();
        assert_eq!(p.t_prime(), (16.0 * 20.0 * 20f64.sqrt()).floor() as usize);
    }
}
