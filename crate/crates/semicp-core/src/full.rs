//! Per-vertex simulation of the full `{0,1,2}^n` configuration process.
//!
//! This is the lumping oracle: it drives each spin directly from the
//! per-vertex flip rates
//!
//! ```text
//! spin != 0 -> 0 at rate 1
//! spin == 0 -> 1 at rate (lambda/n) * #{j : spin_j = 2}
//! spin == 1 -> 2 at rate (lambda/n) * #{j : spin_j = 2}
//! ```
//!
//! and never consults the lumped rate table, so agreement of the lumped
//! `Counts` law with [`crate::chain::simulate`] is evidence, not assumption.
//! The per-event cost is `O(n)`; [`MAX_FULL_N`] caps the population.

use crate::chain::{Counts, ModelParams, Trajectory};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use num_traits::Float;

/// Capacity bound for per-vertex simulation.
pub const MAX_FULL_N: u64 = 1 << 16;

/// One spin per vertex: 0 healthy, 1 semi-infected, 2 wholly-infected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullConfiguration {
    spins: Vec<u8>,
}

impl FullConfiguration {
    pub fn new(spins: Vec<u8>) -> Result<Self> {
        if spins.iter().any(|&s| s > 2) {
            return Err(Error::InvalidParams("spins must be in {0, 1, 2}".into()));
        }
        Ok(FullConfiguration { spins })
    }

    /// Deterministic representative with the given counts: the first `b`
    /// vertices wholly infected, the next `g` semi-infected. Exchangeability
    /// makes the choice irrelevant in law.
    pub fn from_counts(counts: Counts, n: u64) -> Result<Self> {
        if counts.b + counts.g > n {
            return Err(Error::InvalidCounts {
                b: counts.b,
                g: counts.g,
                n,
            });
        }
        let mut spins = vec![0u8; n as usize];
        for s in spins.iter_mut().take(counts.b as usize) {
            *s = 2;
        }
        for s in spins
            .iter_mut()
            .skip(counts.b as usize)
            .take(counts.g as usize)
        {
            *s = 1;
        }
        Ok(FullConfiguration { spins })
    }

    pub fn spins(&self) -> &[u8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn counts(&self) -> Counts {
        let b = self.spins.iter().filter(|&&s| s == 2).count() as u64;
        let g = self.spins.iter().filter(|&&s| s == 1).count() as u64;
        Counts::new(b, g)
    }
}

/// Total flip rate of one vertex given the current number of 2-spins.
#[inline]
fn vertex_rate<T: Float>(spin: u8, infective_pressure: T) -> T {
    match spin {
        0 => infective_pressure,
        1 => T::one() + infective_pressure,
        _ => T::one(),
    }
}

/// Simulate the configuration process and return the lumped trajectory.
///
/// Stops at `tau` (no 2-spins left) or at the horizon. Same stopping rule as
/// [`crate::chain::simulate`], so the two lumped laws are directly
/// comparable.
pub fn simulate_full<T: Float>(
    params: &ModelParams<T>,
    init: &FullConfiguration,
    horizon: T,
    rng: &mut RngStream,
) -> Result<Trajectory<T>> {
    let n = params.n();
    if n > MAX_FULL_N {
        return Err(Error::Capacity { n, max: MAX_FULL_N });
    }
    if init.len() as u64 != n {
        return Err(Error::InvalidParams(format!(
            "configuration has {} vertices, params expect {n}",
            init.len()
        )));
    }
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParams("horizon must be positive".into()));
    }

    let seed_used = rng.derived_seed();
    let mut spins = init.spins.clone();
    let mut counts = init.counts();
    counts.validate(params)?;

    let mut times = vec![T::zero()];
    let mut states = vec![counts];
    if counts.b == 0 {
        return Ok(Trajectory {
            times,
            states,
            tau: Some(T::zero()),
            censored: false,
            seed_used,
        });
    }

    let pair_rate = params.pair_rate();
    let mut t = T::zero();
    let mut tau = None;
    let mut censored = false;
    loop {
        debug_assert_eq!(counts, recount(&spins));
        let pressure = pair_rate * T::from(counts.b).unwrap();
        let mut total = T::zero();
        for &s in &spins {
            total = total + vertex_rate(s, pressure);
        }
        debug_assert!(total > T::zero());

        let dt = -T::from(rng.u01_open_closed()).unwrap().ln() / total;
        let t_next = t + dt;
        if t_next > horizon {
            censored = true;
            break;
        }
        t = t_next;

        // Pick (vertex, target level) proportionally to H, scanning vertices
        // in index order and levels in the order 0, 1, 2 within a vertex.
        let target = T::from(rng.u01_half_open()).unwrap() * total;
        let mut acc = T::zero();
        let mut flip: Option<(usize, u8)> = None;
        'scan: for (i, &s) in spins.iter().enumerate() {
            match s {
                0 => {
                    if pressure > T::zero() {
                        acc = acc + pressure;
                        flip = Some((i, 1));
                        if target < acc {
                            break 'scan;
                        }
                    }
                }
                1 => {
                    acc = acc + T::one();
                    flip = Some((i, 0));
                    if target < acc {
                        break 'scan;
                    }
                    if pressure > T::zero() {
                        acc = acc + pressure;
                        flip = Some((i, 2));
                        if target < acc {
                            break 'scan;
                        }
                    }
                }
                _ => {
                    acc = acc + T::one();
                    flip = Some((i, 0));
                    if target < acc {
                        break 'scan;
                    }
                }
            }
        }
        let (vertex, level) = flip.expect("positive total rate yields a flip");

        match (spins[vertex], level) {
            (2, 0) => {
                counts.b -= 1;
            }
            (1, 0) => {
                counts.g -= 1;
            }
            (1, 2) => {
                counts.g -= 1;
                counts.b += 1;
            }
            (0, 1) => {
                counts.g += 1;
            }
            other => unreachable!("impossible flip {other:?}"),
        }
        spins[vertex] = level;

        times.push(t);
        states.push(counts);
        if counts.b == 0 {
            tau = Some(t);
            break;
        }
    }

    Ok(Trajectory {
        times,
        states,
        tau,
        censored,
        seed_used,
    })
}

fn recount(spins: &[u8]) -> Counts {
    Counts::new(
        spins.iter().filter(|&&s| s == 2).count() as u64,
        spins.iter().filter(|&&s| s == 1).count() as u64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_healthy_is_a_single_state() {
        let params = ModelParams::new(4, 1.0).unwrap();
        let init = FullConfiguration::new(vec![0, 0, 0, 0]).unwrap();
        let mut rng = RngStream::new(1, 0);
        let traj = simulate_full(&params, &init, 5.0, &mut rng).unwrap();
        assert_eq!(traj.tau, Some(0.0));
        assert_eq!(traj.states.len(), 1);
    }

    #[test]
    fn single_infective_total_rate() {
        // One 2-spin among three vertices at lambda=1: total rate 1 + 2/3.
        let params = ModelParams::new(3, 1.0).unwrap();
        let spins = vec![2u8, 0, 0];
        let pressure = params.pair_rate() * 1.0;
        let total: f64 = spins.iter().map(|&s| vertex_rate(s, pressure)).sum();
        assert!((total - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_is_enforced() {
        let params = ModelParams::new(MAX_FULL_N + 1, 1.0).unwrap();
        let init = FullConfiguration::from_counts(Counts::new(1, 0), MAX_FULL_N + 1).unwrap();
        let mut rng = RngStream::new(1, 0);
        let err = simulate_full(&params, &init, 1.0, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn lumped_trajectory_is_valid() {
        let params = ModelParams::new(8, 1.5).unwrap();
        for seed in 0..20 {
            let init = FullConfiguration::from_counts(Counts::new(3, 2), 8).unwrap();
            let mut rng = RngStream::new(404, seed);
            let traj = simulate_full(&params, &init, 10.0, &mut rng).unwrap();
            traj.validate(&params).unwrap();
        }
    }

    #[test]
    fn from_counts_is_consistent() {
        let cfg = FullConfiguration::from_counts(Counts::new(2, 3), 7).unwrap();
        assert_eq!(cfg.counts(), Counts::new(2, 3));
        assert_eq!(cfg.spins(), &[2, 2, 1, 1, 1, 0, 0]);
        assert!(FullConfiguration::from_counts(Counts::new(5, 5), 7).is_err());
    }
}
