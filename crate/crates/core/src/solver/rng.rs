use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian increments `dW^k_n ~ N(0, dt)` keyed by `(seed, step, mode)`.
///
/// Each step owns its own ChaCha stream and each mode reads a fixed window
/// of four 32-bit words from it, so any increment can be regenerated in
/// isolation and the values never depend on evaluation order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseIncrements {
    seed: u64,
    dt: f64,
    modes: usize,
}

const WORDS_PER_MODE: u128 = 4;

impl NoiseIncrements {
    pub fn new(seed: u64, dt: f64, modes: usize) -> Self {
        Self { seed, dt, modes }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn stream(&self, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(step);
        rng
    }

    /// `dW^mode_step` for a 1-based `mode`.
    pub fn increment(&self, step: u64, mode: usize) -> f64 {
        assert!(mode >= 1, "modes are 1-based");
        let mut rng = self.stream(step);
        rng.set_word_pos((mode as u128 - 1) * WORDS_PER_MODE);
        gaussian(&mut rng) * self.dt.sqrt()
    }

    /// All increments of one step, modes `1..=out.len()`.
    pub fn fill(&self, step: u64, out: &mut [f64]) {
        let mut rng = self.stream(step);
        let scale = self.dt.sqrt();
        for v in out.iter_mut() {
            *v = gaussian(&mut rng) * scale;
        }
    }

    pub fn step(&self, step: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.modes];
        self.fill(step, &mut out);
        out
    }
}

/// Box-Muller from two 53-bit uniforms; consumes exactly four words.
#[inline]
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
