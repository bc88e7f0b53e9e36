use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tetra::ConformalTetra;

const LOG_LOW: f64 = -std::f64::consts::LN_10;
const LOG_HIGH: f64 = std::f64::consts::LN_10;

/// Reproducible stream of nondegenerate tetrahedra with weights
/// log-uniform on `[0.1, 10]`.
pub struct TetraSampler {
    rng: ChaCha8Rng,
    seed: u64,
    rejected: usize,
}

impl TetraSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            rejected: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Degenerate draws discarded so far.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn next_tetra(&mut self) -> ConformalTetra {
        loop {
            let r: [f64; 4] = std::array::from_fn(|_| self.rng.gen_range(LOG_LOW..LOG_HIGH).exp());
            let t = ConformalTetra::new(r).expect("positive weights");
            if !t.is_degenerate() {
                return t;
            }
            self.rejected += 1;
        }
    }
}

impl Iterator for TetraSampler {
    type Item = ConformalTetra;

    fn next(&mut self) -> Option<ConformalTetra> {
        Some(self.next_tetra())
    }
}

pub fn random_tetrahedra(n: usize, seed: u64) -> Vec<ConformalTetra> {
    TetraSampler::new(seed).take(n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_in_range() {
        let a = random_tetrahedra(200, 7);
        assert_eq!(a, random_tetrahedra(200, 7));
        assert_ne!(a, random_tetrahedra(200, 8));
        for t in &a {
            assert!(t.weights().iter().all(|&w| (0.1..=10.0).contains(&w)));
            assert!(!t.is_degenerate());
        }
    }

    #[test]
    fn degenerate_draws_are_rejected() {
        let mut s = TetraSampler::new(1);
        for _ in 0..2000 {
            s.next_tetra();
        }
        assert!(s.rejected() > 0);
    }
}
