use num_bigint::{BigInt, BigUint, Sign};

use crate::syntax::Rational;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { state: seed }
    }

    /// Stream for trial `index`: seeded with the `index`-th output of the
    /// master stream, so trials do not depend on evaluation order.
    pub fn for_trial(master_seed: u64, index: u64) -> Self {
        RngStream::new(trial_seed(master_seed, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform integer in `[0, b)` by rejection, `b >= 1`.
    #[inline]
    pub fn below(&mut self, b: u64) -> u64 {
        Uniform::new(b).sample(self)
    }

    fn below_big(&mut self, b: &BigUint) -> BigUint {
        let bits = b.bits();
        let words = bits.div_ceil(64) as usize;
        let top_bits = bits - 64 * (words as u64 - 1);
        loop {
            let mut digits: Vec<u64> = (0..words).map(|_| self.next_u64()).collect();
            if top_bits < 64 {
                digits[words - 1] &= (1u64 << top_bits) - 1;
            }
            let k =
                BigUint::from_slice(&digits.iter().flat_map(|d| [*d as u32, (*d >> 32) as u32]).collect::<Vec<_>>());
            if &k < b {
                return k;
            }
        }
    }
}

/// The `index`-th output of the splitmix64 stream seeded with `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    mix(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Sampler for integers uniform in `[0, b)`: accept a 64-bit output `r` if
/// it lies below the largest multiple of `b` not exceeding `2^64`, then
/// return `r mod b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Uniform {
    b: u64,
    /// `2^64 mod b`; zero means every output is accepted.
    rem: u64,
}

impl Uniform {
    pub(crate) fn new(b: u64) -> Self {
        assert!(b > 0, "empty range");
        Uniform { b, rem: (u64::MAX % b + 1) % b }
    }

    #[inline]
    pub(crate) fn sample(&self, rng: &mut RngStream) -> u64 {
        loop {
            let r = rng.next_u64();
            if self.rem == 0 {
                // b divides 2^64, so it is a power of two.
                return r & (self.b - 1);
            }
            if r < self.rem.wrapping_neg() {
                return r % self.b;
            }
        }
    }
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exact Bernoulli draw: with `p = a/b` in lowest terms, draws `k` uniform in
/// `[0, b)` and returns `k < a`. `p = 0` and `p = 1` consume no randomness.
/// Values outside `[0, 1]` are clamped.
pub fn rng_bernoulli(p: &Rational, rng: &mut RngStream) -> bool {
    if !p.is_positive() {
        return false;
    }
    if *p >= Rational::one() {
        return true;
    }
    if let Some((a, b)) = p.as_small() {
        return rng.below(b as u64) < a as u64;
    }
    let to_uint = |n: BigInt| n.to_biguint().filter(|_| n.sign() != Sign::Minus).expect("positive");
    let (a, b) = (to_uint(p.numer()), to_uint(p.denom()));
    if let Ok(b64) = u64::try_from(&b) {
        let a64 = u64::try_from(&a).expect("a < b");
        return rng.below(b64) < a64;
    }
    rng.below_big(&b) < a
}
