use crate::dist::{l1_distance, Distribution};
use crate::error::{invalid, Result};
use crate::harness::Decision;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosenessFamily {
    Same,
    Far,
}

impl ClosenessFamily {
    pub fn label(self) -> &'static str {
        match self {
            ClosenessFamily::Same => "same",
            ClosenessFamily::Far => "far",
        }
    }

    pub fn expected(self) -> Decision {
        match self {
            ClosenessFamily::Same => Decision::Same,
            ClosenessFamily::Far => Decision::Far,
        }
    }

    pub fn instance(self, n: usize, eps: f64) -> Result<ClosenessInstance> {
        match self {
            ClosenessFamily::Same => {
                let u = Distribution::uniform(n)?;
                Ok(ClosenessInstance { a: u.clone(), b: u, expected: Decision::Same })
            }
            ClosenessFamily::Far => paired_bias(n, eps),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosenessInstance {
    pub a: Distribution,
    pub b: Distribution,
    pub expected: Decision,
}

/// Letters paired up; `a` puts `(1 ± ε/2)/n` on the two letters of a pair
/// and `b` the swapped masses, so `‖a − b‖₁ = ε` exactly.
pub fn paired_bias(n: usize, eps: f64) -> Result<ClosenessInstance> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(invalid(format!("paired instance needs an even alphabet, got {n}")));
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(invalid(format!("eps {eps} must lie in (0, 2]")));
    }
    let hi = (1.0 + eps / 2.0) / n as f64;
    let lo = (1.0 - eps / 2.0) / n as f64;
    let a: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { hi } else { lo }).collect();
    let b: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { lo } else { hi }).collect();
    Ok(ClosenessInstance { a: Distribution::new(a)?, b: Distribution::new(b)?, expected: Decision::Far })
}

impl ClosenessInstance {
    pub fn l1(&self) -> f64 {
        l1_distance(&self.a, &self.b).expect("same alphabet")
    }
}
