//! The subcritical envelope chain.
//!
//! Once the infected fraction drops below `theta / ((theta + 3) lambda)`,
//! the promotion rate of the true chain is at most `theta B / (theta + 3)`,
//! so `B` is dominated by the birth-death chain
//!
//! ```text
//! Btilde -> Btilde - 1 at rate Btilde
//! Btilde -> Btilde + 1 at rate theta Btilde / (theta + 3)
//! ```
//!
//! whose mean decays as `h(t) = n exp(-3t / (theta + 3))` and which is
//! extinct by `(1 + theta/2) ln n` with probability at least
//! `1 - n^{-theta/(2 theta + 6)}`.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use num_traits::Float;

fn t<T: Float>(x: f64) -> T {
    T::from(x).unwrap()
}

/// Envelope-chain parameters. The bound assembly assumes `theta < 1`;
/// `theta = 1` is accepted for diagnostics since the chain and its mean
/// formula are valid there too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeParams<T> {
    theta: T,
    n0: u64,
}

impl<T: Float> TildeParams<T> {
    pub fn new(theta: T, n0: u64) -> Result<Self> {
        if !(theta > T::zero() && theta <= T::one()) || !theta.is_finite() {
            return Err(Error::InvalidParams("theta must lie in (0, 1]".into()));
        }
        Ok(TildeParams { theta, n0 })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }
}

/// `(death, birth)` rates at the given value.
pub fn tilde_rates<T: Float>(value: u64, theta: T) -> (T, T) {
    assert!(
        theta > T::zero() && theta <= T::one(),
        "theta must lie in (0, 1]"
    );
    let v = T::from(value).unwrap();
    (v, theta * v / (theta + t(3.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeTrajectory<T> {
    pub times: Vec<T>,
    pub values: Vec<u64>,
    /// Absorption time at 0, if reached before the horizon.
    pub extinction: Option<T>,
}

impl<T: Float> TildeTrajectory<T> {
    pub fn final_value(&self) -> u64 {
        *self.values.last().expect("trajectory is never empty")
    }

    /// Value at an arbitrary time (left-continuous step lookup, clamped to
    /// the recorded range).
    pub fn value_at(&self, time: T) -> u64 {
        match self.times.iter().rposition(|&s| s <= time) {
            Some(i) => self.values[i],
            None => self.values[0],
        }
    }
}

/// Event-driven simulation from `n0` until absorption at 0 or the horizon.
/// Selection order: death, then birth.
pub fn simulate_tilde<T: Float>(
    params: &TildeParams<T>,
    horizon: T,
    rng: &mut RngStream,
) -> TildeTrajectory<T> {
    let mut value = params.n0;
    let mut times = vec![T::zero()];
    let mut values = vec![value];
    if value == 0 {
        return TildeTrajectory {
            times,
            values,
            extinction: Some(T::zero()),
        };
    }
    let mut time = T::zero();
    let mut extinction = None;
    loop {
        let (death, birth) = tilde_rates(value, params.theta);
        let total = death + birth;
        let dt = -T::from(rng.u01_open_closed()).unwrap().ln() / total;
        let next = time + dt;
        if next > horizon {
            break;
        }
        time = next;
        let target = T::from(rng.u01_half_open()).unwrap() * total;
        if target < death {
            value -= 1;
        } else {
            value += 1;
        }
        times.push(time);
        values.push(value);
        if value == 0 {
            extinction = Some(time);
            break;
        }
    }
    TildeTrajectory {
        times,
        values,
        extinction,
    }
}

/// Closed-form mean `h(t) = n exp(-3t / (theta + 3))` of the chain started
/// at `n`.
pub fn tilde_mean<T: Float>(time: T, n: u64, theta: T) -> T {
    assert!(theta > T::zero(), "theta must be positive");
    assert!(time >= T::zero(), "time must be nonnegative");
    T::from(n).unwrap() * (-t::<T>(3.0) * time / (theta + t(3.0))).exp()
}

/// Guaranteed extinction probability by time `(1 + theta/2) ln n`:
/// `1 - n^{-theta/(2 theta + 6)}`, valid for every `n >= 1`.
pub fn tilde_extinction_bound<T: Float>(n: u64, theta: T) -> T {
    assert!(n >= 1, "n must be at least 1");
    assert!(theta > T::zero(), "theta must be positive");
    let exponent = -theta / (t::<T>(2.0) * theta + t(6.0));
    T::one() - (T::from(n).unwrap().ln() * exponent).exp()
}

/// The deadline of the extinction bound, `(1 + theta/2) ln n`.
pub fn tilde_deadline<T: Float>(n: u64, theta: T) -> T {
    (T::one() + theta / t(2.0)) * T::from(n).unwrap().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_examples() {
        assert_eq!(tilde_rates::<f64>(0, 1.0), (0.0, 0.0));
        let (death, birth) = tilde_rates::<f64>(4, 1.0);
        assert_eq!(death, 4.0);
        assert_eq!(birth, 1.0);
        for value in [1u64, 7, 100] {
            for theta in [0.1, 0.5, 1.0] {
                let (death, birth) = tilde_rates::<f64>(value, theta);
                assert!(birth < death, "chain must be subcritical");
                assert!((birth / death - theta / (theta + 3.0)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_start_is_immediately_extinct() {
        let params = TildeParams::new(0.5, 0).unwrap();
        let traj = simulate_tilde(&params, 10.0, &mut RngStream::new(0, 0));
        assert_eq!(traj.extinction, Some(0.0));
        assert_eq!(traj.values, vec![0]);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let params = TildeParams::new(1.0, 50).unwrap();
        let a = simulate_tilde(&params, 30.0, &mut RngStream::new(77, 8));
        let b = simulate_tilde(&params, 30.0, &mut RngStream::new(77, 8));
        assert_eq!(a, b);
    }

    #[test]
    fn theta_validation() {
        assert!(TildeParams::new(0.0, 5).is_err());
        assert!(TildeParams::new(1.5, 5).is_err());
        assert!(TildeParams::new(1.0, 5).is_ok());
    }

    #[test]
    fn mean_formula_values() {
        assert_eq!(tilde_mean(0.0, 1000, 1.0), 1000.0);
        // At the deadline the mean equals n^{-theta/(2 theta + 6)}.
        let n = 1000u64;
        let deadline = tilde_deadline(n, 1.0);
        let mean = tilde_mean(deadline, n, 1.0);
        let expected = (n as f64).powf(-1.0 / 8.0);
        assert!((mean - expected).abs() < 1e-12);
        assert!((expected - 0.4217).abs() < 1e-4);
    }

    #[test]
    fn extinction_bound_values() {
        assert_eq!(tilde_extinction_bound(1, 1.0), 0.0);
        let b = tilde_extinction_bound(1000, 1.0);
        assert!((b - 0.5783).abs() < 1e-4);
        assert!(tilde_extinction_bound(2000, 1.0) > b);
    }

    #[test]
    fn empirical_mean_tracks_h() {
        let params = TildeParams::new(1.0, 100).unwrap();
        let probe = 1.0;
        let replicas = 20_000u64;
        let mut sum = 0.0;
        for rep in 0..replicas {
            let mut rng = RngStream::new(0x711DE, rep);
            let traj = simulate_tilde(&params, probe, &mut rng);
            sum += traj.value_at(probe) as f64;
        }
        let mean = sum / replicas as f64;
        let expected = tilde_mean(probe, 100, 1.0);
        assert!(
            (mean - expected).abs() / expected < 0.01,
            "mean {mean} vs h {expected}"
        );
    }
}
