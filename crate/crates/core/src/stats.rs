//! Goodness-of-fit helpers used by the validators and tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn finish(statistic: f64, cells: usize) -> ChiSquare {
    let dof = cells.saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).expect("positive dof").sf(statistic) };
    ChiSquare { statistic, dof, p_value }
}

/// Pearson goodness of fit of `observed` against `probs`.
///
/// `probs` need not sum to one; any missing mass is treated as its own
/// cell with zero observations. Cells whose expected count falls below
/// `min_expected` are pooled into a single cell.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> ChiSquare {
    assert_eq!(observed.len(), probs.len(), "histogram and model lengths differ");
    let total: u64 = observed.iter().sum();
    let t = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * t;
        if e >= min_expected {
            cells.push((o as f64, e));
        } else {
            pool_o += o as f64;
            pool_e += e;
        }
    }
    let missing = (1.0 - probs.iter().sum::<f64>()).max(0.0) * t;
    pool_e += missing;
    if pool_e > 0.0 {
        cells.push((pool_o, pool_e));
    }
    let stat = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    finish(stat, cells.len())
}

/// Pearson test that two histograms come from the same distribution.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquare {
    assert_eq!(a.len(), b.len(), "histogram lengths differ");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pa, mut pb) = (0.0, 0.0);
    let add = |oa: f64, ob: f64, stat: &mut f64| {
        let row = oa + ob;
        let (ea, eb) = (row * na / n, row * nb / n);
        *stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    };
    for (&x, &y) in a.iter().zip(b) {
        let row = (x + y) as f64;
        if row * na.min(nb) / n >= min_expected {
            add(x as f64, y as f64, &mut stat);
            cells += 1;
        } else {
            pa += x as f64;
            pb += y as f64;
        }
    }
    if pa + pb > 0.0 {
        add(pa, pb, &mut stat);
        cells += 1;
    }
    finish(stat, cells)
}

/// Total variation between two normalized histograms.
pub fn empirical_tv(a: &[u64], b: &[u64]) -> f64 {
    let len = a.len().max(b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    0.5 * (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0) as f64 / na;
            let y = b.get(i).copied().unwrap_or(0) as f64 / nb;
            (x - y).abs()
        })
        .sum::<f64>()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    0.5 * (0..len).map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_exact_fit() {
        let r = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4], 5.0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 3);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gof_rejects_gross_misfit() {
        let r = chi_square_gof(&[100, 0, 0, 0], &[0.25; 4], 5.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn homogeneity_same_histograms() {
        let r = chi_square_homogeneity(&[10, 20, 30], &[20, 40, 60], 1.0);
        assert!(r.statistic.abs() < 1e-12);
    }

    #[test]
    fn tv_values() {
        assert_eq!(empirical_tv(&[1, 0], &[0, 1]), 1.0);
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
    }
}
