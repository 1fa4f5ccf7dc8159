//! Reproducible random streams for seeded Monte Carlo.
//!
//! Every replica owns a [`RngStream`] derived from `(master_seed,
//! replica_index)`. The derivation is a fixed avalanche mix so that
//! independent implementations can agree on the exact draw sequence:
//!
//! ```text
//! mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^= z >> 31
//! state0   = mix64(master_seed ^ mix64(replica_index * 0x9E3779B97F4A7C15
//!                                      + 0xD1B54A32D192ED03))
//! next_u64 = splitmix64 step: state += 0x9E3779B97F4A7C15; return mix64'(state)
//! ```
//!
//! where `mix64'` is the standard splitmix64 output function (same constants
//! as `mix64`). Uniform doubles take the top 53 bits: `u_half_open =
//! (z >> 11) * 2^-53` in `[0, 1)` and `u_open_closed = ((z >> 11) + 1) *
//! 2^-53` in `(0, 1]`. Exponential waiting times use the inverse CDF
//! `-ln(u_open_closed) / rate`, which can never hit `ln(0)`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const REPLICA_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic 64-bit generator bound to one `(master_seed, replica_index)`
/// origin. Identical origins replay identical draw sequences; distinct
/// replica indices yield distinct streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
    master_seed: u64,
    replica_index: u64,
    derived_seed: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        let derived = mix64(
            master_seed ^ mix64(replica_index.wrapping_mul(GOLDEN).wrapping_add(REPLICA_SALT)),
        );
        RngStream {
            state: derived,
            master_seed,
            replica_index,
            derived_seed: derived,
        }
    }

    /// `(master_seed, replica_index)` this stream was derived from.
    pub fn origin(&self) -> (u64, u64) {
        (self.master_seed, self.replica_index)
    }

    /// Initial internal state after derivation; recorded in trajectories so a
    /// run can be replayed without knowing the replica numbering scheme.
    pub fn derived_seed(&self) -> u64 {
        self.derived_seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`; used for event selection.
    #[inline]
    pub fn u01_half_open(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`; used for exponential waiting times.
    #[inline]
    pub fn u01_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential variate with the given rate via inverse CDF.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -self.u01_open_closed().ln() / rate
    }

    /// Uniform integer in `[0, bound)` by rejection-free scaling (128-bit
    /// multiply); `bound` must be nonzero.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        (((self.next_u64() as u128) * (bound as u128)) >> 64) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_origin_replays() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn adjacent_replicas_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let equal = (0..10_000).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(equal, 0, "adjacent replica streams collided");
    }

    #[test]
    fn uniform_ranges() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..10_000 {
            let h = rng.u01_half_open();
            assert!((0.0..1.0).contains(&h));
            let oc = rng.u01_open_closed();
            assert!(oc > 0.0 && oc <= 1.0);
        }
    }

    #[test]
    fn exponential_positive_and_mean_plausible() {
        let mut rng = RngStream::new(9, 0);
        let mut sum = 0.0;
        let k = 100_000;
        for _ in 0..k {
            let x = rng.exponential(2.0);
            assert!(x > 0.0 && x.is_finite());
            sum += x;
        }
        let mean = sum / k as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean} far from 1/rate");
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = RngStream::new(3, 5);
        for _ in 0..10_000 {
            assert!(rng.below(13) < 13);
        }
    }
}
