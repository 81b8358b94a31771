use crate::dist::IndexedSampleSet;
use crate::error::{invalid, Result};
use crate::independence::JointSampleSet;
use crate::rng::RandomStream;
use rand::seq::SliceRandom;
use rand::Rng;

/// Boolean Hidden Hypermatching instance with pairs: x_i ⊕ x_{M(i)} = b
/// for every matched pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BhhInstance {
    pub x: Vec<bool>,
    /// `partner[i]` is M(i).
    pub partner: Vec<usize>,
    pub b: bool,
}

impl BhhInstance {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn is_valid(&self) -> bool {
        let n = self.n();
        self.partner.len() == n
            && (0..n).all(|i| {
                let j = self.partner[i];
                j < n && j != i && self.partner[j] == i && (self.x[i] ^ self.x[j]) == self.b
            })
    }
}

/// Uniform perfect matching with pair parities `b`. For `b = 0` half the
/// pairs are set to 1 so that x stays balanced, which needs 4 | n.
pub fn bhh_generate(n: usize, b: bool, rng: &mut RandomStream) -> Result<BhhInstance> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(invalid(format!("BHH needs a positive even n, got {n}")));
    }
    if !b && !n.is_multiple_of(4) {
        return Err(invalid(format!("a balanced b = 0 instance needs 4 | n, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut partner = vec![0; n];
    let mut x = vec![false; n];
    let pairs = n / 2;
    let mut ones: Vec<bool> = (0..pairs).map(|p| p < pairs / 2).collect();
    ones.shuffle(rng);
    for (p, pair) in order.chunks(2).enumerate() {
        let (i, j) = (pair[0], pair[1]);
        partner[i] = j;
        partner[j] = i;
        if b {
            let xi: bool = rng.random();
            x[i] = xi;
            x[j] = !xi;
        } else {
            x[i] = ones[p];
            x[j] = ones[p];
        }
    }
    Ok(BhhInstance { x, partner, b })
}

/// Joint samples: for a shared uniform r, Alice draws uniformly from
/// {j : x_j = x_r} and Bob uniformly from {r, M(r)}.
pub fn bhh_reduce(inst: &BhhInstance, t: usize, rng: &mut RandomStream) -> Result<JointSampleSet> {
    if !inst.is_valid() {
        return Err(invalid("BHH instance violates the matching or parity constraint"));
    }
    let n = inst.n();
    let classes: [Vec<usize>; 2] = [(0..n).filter(|&j| !inst.x[j]).collect(), (0..n).filter(|&j| inst.x[j]).collect()];
    let mut alice = Vec::with_capacity(t);
    let mut bob = Vec::with_capacity(t);
    for _ in 0..t {
        let r = rng.random_range(0..n);
        let class = &classes[inst.x[r] as usize];
        alice.push(class[rng.random_range(0..class.len())]);
        bob.push(if rng.random() { r } else { inst.partner[r] });
    }
    Ok(JointSampleSet { alice: IndexedSampleSet::new(alice, n)?, bob: IndexedSampleSet::new(bob, n)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn generated_instances_are_valid_and_balanced() {
        let mut rng = stream(2);
        for b in [false, true] {
            for _ in 0..20 {
                let inst = bhh_generate(20, b, &mut rng).unwrap();
                assert!(inst.is_valid());
                assert_eq!(inst.x.iter().filter(|&&v| v).count(), 10);
            }
        }
        assert!(bhh_generate(6, false, &mut rng).is_err());
        assert!(bhh_generate(6, true, &mut rng).is_ok());
        assert!(bhh_generate(5, true, &mut rng).is_err());
    }
}
