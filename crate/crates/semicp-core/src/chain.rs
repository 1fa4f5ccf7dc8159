//! Exact event-driven simulation of the lumped `(B, G)` chain.
//!
//! `B` counts wholly-infected vertices, `G` semi-infected ones, on a complete
//! graph with `n` vertices and infection rate `lambda`. The chain jumps
//!
//! ```text
//! (B-1, G)   at rate B                    recovery of a wholly-infected vertex
//! (B, G-1)   at rate G                    recovery of a semi-infected vertex
//! (B+1, G-1) at rate (lambda/n) B G       promotion semi -> wholly
//! (B, G+1)   at rate (lambda/n) B (n-B-G) seeding healthy -> semi
//! ```
//!
//! and the extinction time is `tau = inf{t : B_t = 0}`. Simulation stops at
//! `tau`: once `B = 0` the promotion and seeding rates vanish, so the
//! remaining semi-infected population decays without ever changing `tau`.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use num_traits::Float;

/// Largest `n` accepted by [`ModelParams::new`]. Keeps every integer rate
/// prefactor (`b*g`, `b*(n-b-g)`) below 2^53 so `lambda/n * count` rounds
/// exactly once in `f64`.
pub const MAX_N: u64 = 1 << 26;

/// Population size and infection rate of one chain instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    n: u64,
    lambda: T,
}

impl<T: Float> ModelParams<T> {
    pub fn new(n: u64, lambda: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if n > MAX_N {
            return Err(Error::InvalidParams(format!(
                "n={n} exceeds the supported maximum {MAX_N}"
            )));
        }
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParams(
                "lambda must be positive and finite".into(),
            ));
        }
        Ok(ModelParams { n, lambda })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `lambda / n`: the rate at which one wholly-infected vertex acts on one
    /// given vertex. All infection rates are single multiples of this unit.
    #[inline]
    pub fn pair_rate(&self) -> T {
        self.lambda / T::from(self.n).unwrap()
    }
}

/// Lumped state: `b` wholly-infected, `g` semi-infected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Counts {
    pub b: u64,
    pub g: u64,
}

impl Counts {
    pub fn new(b: u64, g: u64) -> Self {
        Counts { b, g }
    }

    pub fn validate<T: Float>(&self, params: &ModelParams<T>) -> Result<()> {
        if self.b + self.g > params.n() {
            return Err(Error::InvalidCounts {
                b: self.b,
                g: self.g,
                n: params.n(),
            });
        }
        Ok(())
    }

    /// Healthy vertices remaining.
    pub fn susceptible(&self, n: u64) -> u64 {
        n - self.b - self.g
    }
}

/// The four transitions of the lumped chain, in the fixed selection order
/// used by [`step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    RecoverWhole,
    RecoverSemi,
    Promote,
    Seed,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::RecoverWhole,
        EventKind::RecoverSemi,
        EventKind::Promote,
        EventKind::Seed,
    ];

    /// State change `(db, dg)` of this event.
    pub fn delta(&self) -> (i64, i64) {
        match self {
            EventKind::RecoverWhole => (-1, 0),
            EventKind::RecoverSemi => (0, -1),
            EventKind::Promote => (1, -1),
            EventKind::Seed => (0, 1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::RecoverWhole => "RecoverWhole",
            EventKind::RecoverSemi => "RecoverSemi",
            EventKind::Promote => "Promote",
            EventKind::Seed => "Seed",
        }
    }
}

/// The four transition rates at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateVector<T> {
    pub recover_whole: T,
    pub recover_semi: T,
    pub promote: T,
    pub seed: T,
}

impl<T: Float> RateVector<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.recover_whole, self.recover_semi, self.promote, self.seed]
    }

    /// Sum in the fixed event order.
    pub fn total(&self) -> T {
        self.recover_whole + self.recover_semi + self.promote + self.seed
    }

    pub fn rate_of(&self, kind: EventKind) -> T {
        match kind {
            EventKind::RecoverWhole => self.recover_whole,
            EventKind::RecoverSemi => self.recover_semi,
            EventKind::Promote => self.promote,
            EventKind::Seed => self.seed,
        }
    }
}

#[inline]
fn rates_unchecked<T: Float>(counts: Counts, params: &ModelParams<T>) -> RateVector<T> {
    let r = params.pair_rate();
    // Integer products first, one multiplication by lambda/n after: each rate
    // is then a single rounding of the exact closed form.
    RateVector {
        recover_whole: T::from(counts.b).unwrap(),
        recover_semi: T::from(counts.g).unwrap(),
        promote: r * T::from(counts.b * counts.g).unwrap(),
        seed: r * T::from(counts.b * counts.susceptible(params.n())).unwrap(),
    }
}

/// Transition rates of the lumped chain at `counts`.
pub fn transition_rates<T: Float>(counts: Counts, params: &ModelParams<T>) -> Result<RateVector<T>> {
    counts.validate(params)?;
    Ok(rates_unchecked(counts, params))
}

/// Apply one event to a state.
///
/// Errors if the event is not applicable (its rate would be zero or the
/// resulting counts would go negative). The `b + g <= n` bound is the
/// caller's obligation; events drawn with positive rate always satisfy it.
pub fn apply_event(counts: Counts, event: EventKind) -> Result<Counts> {
    let fail = || Error::InvalidEvent {
        event: event.name(),
        b: counts.b,
        g: counts.g,
    };
    match event {
        EventKind::RecoverWhole if counts.b >= 1 => Ok(Counts::new(counts.b - 1, counts.g)),
        EventKind::RecoverSemi if counts.g >= 1 => Ok(Counts::new(counts.b, counts.g - 1)),
        EventKind::Promote if counts.b >= 1 && counts.g >= 1 => {
            Ok(Counts::new(counts.b + 1, counts.g - 1))
        }
        // Seeding requires an infective; the susceptible bound is enforced by
        // the rate being positive.
        EventKind::Seed if counts.b >= 1 => Ok(Counts::new(counts.b, counts.g + 1)),
        _ => Err(fail()),
    }
}

/// Outcome of one exact stochastic step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome<T> {
    /// All four rates are zero; this happens only at `(0, 0)`.
    Absorbed,
    Event { dt: T, kind: EventKind, next: Counts },
}

/// One competing-exponentials step: waiting time `Exp(total rate)` from a
/// single uniform draw, then the event chosen proportionally to its rate by a
/// second draw scanning `RecoverWhole, RecoverSemi, Promote, Seed` in order.
pub fn step<T: Float>(
    counts: Counts,
    params: &ModelParams<T>,
    rng: &mut RngStream,
) -> Result<StepOutcome<T>> {
    counts.validate(params)?;
    Ok(step_unchecked(counts, params, rng))
}

#[inline]
pub(crate) fn step_unchecked<T: Float>(
    counts: Counts,
    params: &ModelParams<T>,
    rng: &mut RngStream,
) -> StepOutcome<T> {
    let rates = rates_unchecked(counts, params);
    let total = rates.total();
    if !(total > T::zero()) {
        debug_assert_eq!(counts, Counts::new(0, 0));
        return StepOutcome::Absorbed;
    }
    let dt = -T::from(rng.u01_open_closed()).unwrap().ln() / total;
    let target = T::from(rng.u01_half_open()).unwrap() * total;
    let kind = select_event(&rates.as_array(), target, &EventKind::ALL);
    let next = apply_event(counts, kind).expect("positive-rate event is applicable");
    StepOutcome::Event { dt, kind, next }
}

/// Scan cumulative rates in fixed order; fall back to the last positive-rate
/// entry if rounding pushes the target past the end.
pub(crate) fn select_event<T: Float, K: Copy>(rates: &[T], target: T, kinds: &[K]) -> K {
    let mut acc = T::zero();
    let mut last_positive = None;
    for (rate, kind) in rates.iter().zip(kinds) {
        if *rate > T::zero() {
            acc = acc + *rate;
            last_positive = Some(*kind);
            if target < acc {
                return *kind;
            }
        }
    }
    last_positive.expect("select_event called with all-zero rates")
}

/// An event-time-stamped sample path of the lumped chain.
///
/// `tau` is set iff the path reached a state with `b = 0`, and then equals
/// the time of the first such state; otherwise the run was censored at the
/// horizon with `b > 0`. Exactly one of the two holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Counts>,
    pub tau: Option<T>,
    pub censored: bool,
    pub seed_used: u64,
}

impl<T: Float> Trajectory<T> {
    pub fn final_state(&self) -> Counts {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Check every recorded invariant: strictly increasing times from 0,
    /// valid states, consecutive states one event apart, and the
    /// tau-xor-censored contract. Only full (non-subsampled) trajectories
    /// satisfy the one-event-apart property.
    pub fn validate(&self, params: &ModelParams<T>) -> Result<()> {
        if self.times.len() != self.states.len() || self.times.is_empty() {
            return Err(Error::InvalidParams("malformed trajectory".into()));
        }
        if self.times[0] != T::zero() {
            return Err(Error::InvalidParams("trajectory must start at t=0".into()));
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParams("times not strictly increasing".into()));
            }
        }
        for state in &self.states {
            state.validate(params)?;
        }
        for w in self.states.windows(2) {
            let db = w[1].b as i64 - w[0].b as i64;
            let dg = w[1].g as i64 - w[0].g as i64;
            if !EventKind::ALL.iter().any(|k| k.delta() == (db, dg)) {
                return Err(Error::InvalidParams(format!(
                    "states {:?} -> {:?} differ by no single event",
                    w[0], w[1]
                )));
            }
        }
        if self.censored == self.tau.is_some() {
            return Err(Error::InvalidParams(
                "exactly one of tau/censored must hold".into(),
            ));
        }
        if let Some(tau) = self.tau {
            let first_dead = self
                .times
                .iter()
                .zip(&self.states)
                .find(|(_, s)| s.b == 0)
                .map(|(t, _)| *t);
            if first_dead != Some(tau) {
                return Err(Error::InvalidParams(
                    "tau does not match the first b=0 state".into(),
                ));
            }
        } else if self.states.iter().any(|s| s.b == 0) {
            return Err(Error::InvalidParams("censored path contains b=0".into()));
        }
        Ok(())
    }
}

/// Simulate until extinction (`b = 0`) or the horizon, recording every event.
pub fn simulate<T: Float>(
    params: &ModelParams<T>,
    init: Counts,
    horizon: T,
    rng: &mut RngStream,
) -> Result<Trajectory<T>> {
    simulate_subsampled(params, init, horizon, rng, 1)
}

/// Like [`simulate`], but record only every `record_every`-th event plus the
/// initial state, the extinction event and (on censored runs) the state the
/// chain holds at the horizon, to bound memory on long runs. `tau` and
/// `censored` are exact regardless of subsampling.
pub fn simulate_subsampled<T: Float>(
    params: &ModelParams<T>,
    init: Counts,
    horizon: T,
    rng: &mut RngStream,
    record_every: u64,
) -> Result<Trajectory<T>> {
    init.validate(params)?;
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParams("horizon must be positive".into()));
    }
    if record_every == 0 {
        return Err(Error::InvalidParams("record_every must be at least 1".into()));
    }

    let seed_used = rng.derived_seed();
    let mut times = vec![T::zero()];
    let mut states = vec![init];
    if init.b == 0 {
        return Ok(Trajectory {
            times,
            states,
            tau: Some(T::zero()),
            censored: false,
            seed_used,
        });
    }

    let mut t = T::zero();
    let mut state = init;
    let mut tau = None;
    let mut censored = false;
    let mut event_index: u64 = 0;
    loop {
        match step_unchecked(state, params, rng) {
            StepOutcome::Absorbed => unreachable!("b >= 1 keeps the total rate positive"),
            StepOutcome::Event { dt, next, .. } => {
                let t_next = t + dt;
                if t_next > horizon {
                    censored = true;
                    // Keep the state held at the horizon visible to callers.
                    if *states.last().expect("nonempty") != state {
                        times.push(t);
                        states.push(state);
                    }
                    break;
                }
                t = t_next;
                state = next;
                event_index += 1;
                debug_assert!(state.b + state.g <= params.n());
                let extinct = state.b == 0;
                if extinct || event_index % record_every == 0 {
                    times.push(t);
                    states.push(state);
                }
                if extinct {
                    tau = Some(t);
                    break;
                }
            }
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
