//! Deterministic, splittable pseudo-random numbers (SplitMix64).
//!
//! Every mechanism invocation owns its own stream, derived from a parent
//! stream with [`Rng::split`]. The derivation is a pure function of the
//! parent seed and the split tag, so a fixed top-level seed reproduces the
//! whole tree of streams bit-for-bit, regardless of how many streams are
//! drawn from in between or on which thread they run.
//!
//! SplitMix64 is not cryptographically secure; the privacy guarantee of the
//! mechanisms rests on the parameter ε, not on unpredictability of the noise
//! source. Swap in a CSPRNG before deploying against adversarial users.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splittable deterministic RNG.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Derive an independent child stream. `tag` distinguishes siblings:
    /// `rng.split(i)` and `rng.split(j)` are decorrelated for `i != j`, and
    /// splitting does not disturb the parent's own stream.
    pub fn split(&self, tag: u64) -> Rng {
        Rng {
            state: mix(self.state.wrapping_add(GOLDEN_GAMMA).wrapping_mul(2).wrapping_add(1))
                ^ mix(tag.wrapping_add(GOLDEN_GAMMA)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform f64 in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u = (self.next_u64() >> 11) as f64 / ((1u64 << 53) as f64);
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }

    /// Uniform integer in `[0, bound)` by rejection, unbiased.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    /// One draw from the Laplace distribution with the given scale,
    /// density (1/2s)·exp(−|x|/s), via inverse CDF.
    pub fn laplace(&mut self, scale: f64) -> f64 {
        let u = self.uniform() - 0.5;
        -scale * u.signum() * 2.0f64.mul_add(-u.abs(), 1.0).ln()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
