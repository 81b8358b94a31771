//! Seed derivation and random streams.
//!
//! Every random choice in the crate is drawn from a [`RandomStream`] that is
//! a pure function of a 64-bit seed. Seeds for sub-tasks are derived from a
//! root with [`mix64`], a SplitMix64 finalizer, so that the same derivation can
//! be reproduced in any language:
//!
//! ```text
//! derive(root, [p1, p2, ...]) = mix64(... mix64(mix64(root) ^ p1) ^ p2 ...)
//! ```
//!
//! String labels enter the chain through their 64-bit FNV-1a hash.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every trial. Owned by exactly one trial or party.
pub type RandomStream = ChaCha8Rng;

pub fn stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(root), |acc, &p| mix64(acc ^ p))
}

/// FNV-1a, 64-bit.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Randomness both parties can regenerate from a common root seed.
///
/// Identical `(root, path)` pairs always yield identical streams, so the
/// only thing that ever needs to cross the channel is the root seed itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedRandomness {
    root: u64,
    path: Vec<String>,
}

impl SharedRandomness {
    pub fn new(root: u64) -> Self {
        Self { root, path: Vec::new() }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    pub fn child(&self, label: &str) -> Self {
        let mut path = self.path.clone();
        path.push(label.to_owned());
        Self { root: self.root, path }
    }

    pub fn seed(&self) -> u64 {
        let parts: Vec<u64> = self.path.iter().map(|l| label_hash(l)).collect();
        derive_seed(self.root, &parts)
    }

    pub fn stream(&self, label: &str) -> RandomStream {
        stream(self.child(label).seed())
    }

    pub fn indexed_stream(&self, label: &str, index: u64) -> RandomStream {
        stream(derive_seed(self.child(label).seed(), &[index]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_label_same_stream() {
        let a = SharedRandomness::new(7);
        let b = SharedRandomness::new(7);
        let xa: Vec<u64> = a.stream("sketch").random_iter().take(4).collect();
        let xb: Vec<u64> = b.stream("sketch").random_iter().take(4).collect();
        assert_eq!(xa, xb);
        let xc: Vec<u64> = a.stream("split").random_iter().take(4).collect();
        assert_ne!(xa, xc);
    }

    #[test]
    fn mix_is_reference_splitmix() {
        // First output of the reference SplitMix64 generator seeded with 0.
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
