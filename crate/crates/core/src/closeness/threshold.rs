use crate::harness::Decision;

/// τ = ε²t²/(2n) + 2t.
pub fn threshold_tau(n: f64, t: f64, eps: f64) -> f64 {
    eps * eps * t * t / (2.0 * n) + 2.0 * t
}

/// SAME iff `delta_est ≤ tau`.
pub fn distinguish(delta_est: f64, tau: f64) -> Decision {
    if delta_est <= tau {
        Decision::Same
    } else {
        Decision::Far
    }
}
