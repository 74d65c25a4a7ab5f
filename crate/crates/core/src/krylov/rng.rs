use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Seedable 64-bit generator used for random initial guesses and probes.
pub type Rng64 = SplitMix64;

/// Uniform entries in `[-1, 1)`.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng64::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
