//! Sampling-based checkers.
//!
//! "Almost everywhere" statements cannot be decided, so each checker draws
//! points from a continuous distribution, counts agreement, and keeps the
//! disagreeing points for inspection.

mod checks;
mod corpus;
mod gradcheck;

pub use checks::{
    chain_rule_check, mode_consistency, repr_equivalence, ChainRuleReport, ModeReport, ReprEquivalenceReport,
    CHAIN_RULE_TOL, MODE_TOL, REPR_DERIV_TOL,
};
pub use corpus::{generate_corpus, CORPUS_PROBE_BOUND, MAX_CORPUS_PIECES};
pub use gradcheck::{gradcheck, Failure, GradCheckReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reproducible uniform sampler over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    bounds: Vec<(f64, f64)>,
    seed: u64,
}

impl Sampler {
    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        for (lo, hi) in &bounds {
            assert!(lo <= hi, "sampler bounds must satisfy lo <= hi");
        }
        Sampler { bounds, seed }
    }

    /// Same interval on every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64, seed: u64) -> Self {
        Sampler::new(vec![(lo, hi); dim], seed)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Sampler {
            bounds: self.bounds.clone(),
            seed,
        }
    }

    /// An independent generator derived from the seed and a stream id.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..hi) })
            .collect()
    }

    /// `count` points from stream 0.
    pub fn points(&self, count: usize) -> Vec<Vec<f64>> {
        let mut rng = self.rng(0);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_reproducible_and_in_bounds() {
        let s = Sampler::new(vec![(-1.0, 1.0), (2.0, 3.0)], 9);
        let a = s.points(100);
        assert_eq!(a, s.points(100));
        assert_ne!(a, s.with_seed(10).points(100));
        for p in &a {
            assert!((-1.0..1.0).contains(&p[0]));
            assert!((2.0..3.0).contains(&p[1]));
        }
    }

    #[test]
    fn degenerate_interval() {
        let s = Sampler::new(vec![(0.5, 0.5)], 1);
        assert!(s.points(5).iter().all(|p| p[0] == 0.5));
    }
}
