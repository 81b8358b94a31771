use crate::error::{config, Result};
use serde::{Deserialize, Serialize};

/// Sketch error is kept strictly inside (0, 1).
pub const ALPHA_MAX: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CtConstants {
    /// Sample-count precondition multiplier.
    pub c_precondition: f64,
    pub c_split: f64,
    pub c_alpha: f64,
    /// Failure probability of each ℓ2 sketch.
    pub sketch_delta: f64,
}

impl Default for CtConstants {
    fn default() -> Self {
        Self { c_precondition: 8.0, c_split: 1.0, c_alpha: 0.125, sketch_delta: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CTParams {
    pub n: usize,
    pub t: usize,
    pub eps: f64,
    pub constants: CtConstants,
}

pub(crate) fn min_samples(n: usize, eps: f64) -> f64 {
    let n = n as f64;
    (n.powf(2.0 / 3.0) * eps.powf(-4.0 / 3.0)).max(n.sqrt() / (eps * eps))
}

fn check_common(n: usize, eps: f64) -> Result<()> {
    if n < 2 {
        return Err(config(format!("alphabet size {n} must be at least 2")));
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(config(format!("eps {eps} must lie in (0, 2]")));
    }
    Ok(())
}

impl CTParams {
    pub fn new(n: usize, t: usize, eps: f64, constants: CtConstants) -> Result<Self> {
        check_common(n, eps)?;
        let p = Self { n, t, eps, constants };
        let need = p.min_t();
        if (t as f64) < need {
            return Err(config(format!("t = {t} is below the sample precondition {need:.1}")));
        }
        Ok(p)
    }

    /// C · max(n^{2/3} ε^{-4/3}, √n ε^{-2}).
    pub fn min_t(&self) -> f64 {
        self.constants.c_precondition * min_samples(self.n, self.eps)
    }

    /// Rate of the Poisson size of S.
    pub fn split_rate(&self) -> f64 {
        let (n, t) = (self.n as f64, self.t as f64);
        self.constants.c_split * n * n / (t * t * self.eps.powi(4))
    }

    pub fn alpha(&self) -> f64 {
        (self.constants.c_alpha * self.t as f64 * self.eps * self.eps / self.n as f64).min(ALPHA_MAX)
    }

    /// Norm scale tε²/n the split is meant to reach.
    pub fn norm_bound(&self) -> f64 {
        self.t as f64 * self.eps * self.eps / self.n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecureConstants {
    pub c_precondition: f64,
    /// Divisor in L = t′³ε⁴/(c·n²).
    pub c: f64,
    pub c_a: f64,
    pub c_l: f64,
}

impl Default for SecureConstants {
    fn default() -> Self {
        Self { c_precondition: 8.0, c: 64.0, c_a: 0.25, c_l: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecureCTParams {
    pub n: usize,
    pub t: usize,
    pub eps: f64,
    pub k: usize,
    /// Number of sample sets K.
    pub repetitions: usize,
    /// Flatness exponent of the rounded rotation.
    pub rotation_k: u32,
    pub constants: SecureConstants,
}

impl SecureCTParams {
    pub fn new(n: usize, t: usize, eps: f64, k: usize, constants: SecureConstants) -> Result<Self> {
        check_common(n, eps)?;
        if k < 1 {
            return Err(config("security parameter k must be at least 1"));
        }
        let p = Self { n, t, eps, k, repetitions: k, rotation_k: crate::sketch::DEFAULT_FLATNESS_K, constants };
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
            return Err(config("at least one sample set is required"));
        }
        let need = self.min_t();
        if (self.t as f64) < need {
            return Err(config(format!("t = {} is below the sample precondition {need:.1}", self.t)));
        }
        if self.a_size() < 2 {
            return Err(config("each sample set is too small to hold out any samples"));
        }
        Ok(())
    }

    /// C · k · max(n^{2/3} ε^{-4/3}, √n ε^{-2}).
    pub fn min_t(&self) -> f64 {
        self.constants.c_precondition * self.k as f64 * min_samples(self.n, self.eps)
    }

    /// t′ = ⌊t / K⌋.
    pub fn t_prime(&self) -> usize {
        self.t / self.repetitions
    }

    /// L = ⌈max(1, t′³ε⁴/(c·n²))⌉.
    pub fn cap(&self) -> u64 {
        let tp = self.t_prime() as f64;
        let n = self.n as f64;
        (tp.powi(3) * self.eps.powi(4) / (self.constants.c * n * n)).max(1.0).ceil() as u64
    }

    pub fn alpha(&self) -> f64 {
        (self.constants.c_a * (self.cap() as f64 / self.t_prime() as f64).sqrt()).min(super::ALPHA_MAX)
    }

    /// l = ⌈c_l·k²·ln²(n)/α²⌉.
    pub fn trials(&self) -> u64 {
        let ln = (self.n as f64).ln();
        let a = self.alpha();
        (self.constants.c_l * (self.k * self.k) as f64 * ln * ln / (a * a)).ceil().max(1.0) as u64
    }

    /// |S_a| = |S_b| = ⌊t′/(2L)⌋.
    pub fn split_size(&self) -> usize {
        self.t_prime() / (2 * self.cap() as usize)
    }

    /// Held-out samples per party per set, ⌊t′/2⌋.
    pub fn a_size(&self) -> usize {
        self.t_prime() / 2
    }
}
