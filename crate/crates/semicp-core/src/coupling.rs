//! Monotone couplings of the lumped chain.
//!
//! Two chains are compared in the partial order `(B1, G1) >= (B2, G2)` iff
//! `B1 >= B2` and `B1 + G1 >= B2 + G2`. Two coupled constructions live here:
//!
//! * [`coupling_rates`] — the eleven-row joint table pairing two copies of
//!   the chain (`Verbatim`), plus a `Repaired` variant that reroutes part of
//!   the lone-B1-death mass onto lone G2-deaths. The verbatim table admits an
//!   order-breaking step from states with `B1 > B2` and equal sums (take
//!   `((2,0),(1,1))` and kill the extra B1); the repair closes exactly that
//!   gap while leaving both marginal laws untouched.
//! * [`domination_rates`] — the eight-row table coupling `(B, B+G)` with the
//!   constant-rate minorant walk `(Bhat, Shat)` of [`crate::survival`],
//!   valid while the chain stays inside the scaled survival box.
//!
//! Couplings are diagnostic objects: simulations log order violations with
//! timestamps instead of aborting.

use crate::chain::{select_event, Counts, EventKind, ModelParams, RateVector};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::survival::{hat_rates, SurvivalDesign};
use num_traits::Float;

/// `s1 >= s2` in the survival order: more wholly-infected, and more infected
/// in total.
pub fn dominates(s1: Counts, s2: Counts) -> bool {
    s1.b >= s2.b && s1.b + s1.g >= s2.b + s2.g
}

/// Which joint table to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingVariant {
    /// The eleven-row table exactly as written.
    Verbatim,
    /// Lone-B1-death mass `min(B1-B2, (G2-G1)+)` rerouted to pair with lone
    /// G2-deaths; marginals unchanged, order provably preserved.
    Repaired,
}

impl CouplingVariant {
    pub const ALL: [CouplingVariant; 2] = [CouplingVariant::Verbatim, CouplingVariant::Repaired];

    pub fn name(&self) -> &'static str {
        match self {
            CouplingVariant::Verbatim => "verbatim",
            CouplingVariant::Repaired => "repaired",
        }
    }
}

/// Two chains on a common parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairState {
    pub s1: Counts,
    pub s2: Counts,
}

impl PairState {
    pub fn new(s1: Counts, s2: Counts) -> Self {
        PairState { s1, s2 }
    }

    pub fn ordered(&self) -> bool {
        dominates(self.s1, self.s2)
    }
}

/// One row of a joint rate table: simultaneous state changes of the two
/// coordinates at the given rate.
///
/// For the pair coupling the deltas are `(db, dg)` atoms of the four chain
/// events (or `(0, 0)`); for the domination coupling they are `(dB, dS)`
/// moves of `(B, B+G)`. Rates are algebraic values of the table: the
/// verbatim lone-B1-death row is negative on pairs with `B1 < B2`, and
/// simulation clamps negatives to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointRateRow<T> {
    pub delta1: (i64, i64),
    pub delta2: (i64, i64),
    pub rate: T,
}

fn int<T: Float>(k: i64) -> T {
    T::from(k).unwrap()
}

/// Joint rate table of the two-chain coupling. Row order is fixed: joint
/// B-death, lone B1-death (split in two for `Repaired`), joint G-death, lone
/// G1-death, lone G2-death, joint promote, lone promotes, joint seed, lone
/// seeds.
pub fn coupling_rates<T: Float>(
    pair: PairState,
    params: &ModelParams<T>,
    variant: CouplingVariant,
) -> Vec<JointRateRow<T>> {
    let n = params.n();
    let r = params.pair_rate();
    let (b1, g1) = (pair.s1.b as i64, pair.s1.g as i64);
    let (b2, g2) = (pair.s2.b as i64, pair.s2.g as i64);

    // Integer parts are exact; each scaled rate is one multiplication by
    // lambda/n, so marginal sums can be audited in integer arithmetic.
    let g_min = g1.min(g2);
    let p1 = b1 * g1;
    let p2 = b2 * g2;
    let p_min = p1.min(p2);
    let x1 = b1 * (n as i64 - b1 - g1);
    let x2 = b2 * (n as i64 - b2 - g2);
    let x_min = x1.min(x2);

    let dead = (0, 0);
    let b_death = (-1, 0);
    let g_death = (0, -1);
    let promote = (1, -1);
    let seed = (0, 1);
    let row = |delta1, delta2, rate| JointRateRow { delta1, delta2, rate };

    let mut rows = Vec::with_capacity(12);
    rows.push(row(b_death, b_death, int(b2)));
    match variant {
        CouplingVariant::Verbatim => {
            rows.push(row(b_death, dead, int(b1 - b2)));
        }
        CouplingVariant::Repaired => {
            let m = (b1 - b2).max(0).min((g2 - g1).max(0));
            rows.push(row(b_death, g_death, int(m)));
            rows.push(row(b_death, dead, int(b1 - b2 - m)));
        }
    }
    rows.push(row(g_death, g_death, int(g_min)));
    rows.push(row(g_death, dead, int(g1 - g_min)));
    let lone_g2 = match variant {
        CouplingVariant::Verbatim => g2 - g_min,
        CouplingVariant::Repaired => g2 - g_min - (b1 - b2).max(0).min((g2 - g1).max(0)),
    };
    rows.push(row(dead, g_death, int(lone_g2)));
    rows.push(row(promote, promote, r * int(p_min)));
    rows.push(row(promote, dead, r * int(p1 - p_min)));
    rows.push(row(dead, promote, r * int(p2 - p_min)));
    rows.push(row(seed, seed, r * int(x_min)));
    rows.push(row(seed, dead, r * int(x1 - x_min)));
    rows.push(row(dead, seed, r * int(x2 - x_min)));
    rows
}

fn kind_of_delta(delta: (i64, i64)) -> Option<EventKind> {
    match delta {
        (-1, 0) => Some(EventKind::RecoverWhole),
        (0, -1) => Some(EventKind::RecoverSemi),
        (1, -1) => Some(EventKind::Promote),
        (0, 1) => Some(EventKind::Seed),
        _ => None,
    }
}

/// One marginal transition whose joint-row mass does not add up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarginalMismatch {
    /// 1 or 2.
    pub chain: u8,
    pub event: EventKind,
}

/// Result of auditing a joint table against the single-chain rates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReport<T> {
    pub marginal1: RateVector<T>,
    pub marginal2: RateVector<T>,
    pub expected1: RateVector<T>,
    pub expected2: RateVector<T>,
    pub mismatches: Vec<MarginalMismatch>,
}

impl<T> MarginalReport<T> {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Verify, exactly, that the joint table projects onto the two single-chain
/// rate vectors.
///
/// Every row rate is `unit * k` with `k` an exact integer and `unit` either
/// `1` or `lambda/n`; the audit decodes `k = round(rate / unit)`, checks the
/// reconstruction bit-for-bit, and compares integer sums, so the result is
/// free of float-summation artifacts. Valid for unordered pairs too (the
/// verbatim lone-B1-death row then decodes to a negative integer, and the
/// algebraic sums still telescope).
pub fn marginal_consistency<T: Float>(
    pair: PairState,
    params: &ModelParams<T>,
    variant: CouplingVariant,
) -> MarginalReport<T> {
    let rows = coupling_rates(pair, params, variant);
    let n = params.n();
    let r = params.pair_rate();
    let mut mismatches = Vec::new();

    let mut marginal = |chain: u8, counts: Counts| -> RateVector<T> {
        let mut sums = [0i64; 4];
        for row in &rows {
            let delta = if chain == 1 { row.delta1 } else { row.delta2 };
            let Some(kind) = kind_of_delta(delta) else {
                continue;
            };
            let idx = EventKind::ALL.iter().position(|k| *k == kind).unwrap();
            let unit = match kind {
                EventKind::RecoverWhole | EventKind::RecoverSemi => T::one(),
                EventKind::Promote | EventKind::Seed => r,
            };
            let k = (row.rate / unit).round();
            let decoded = k.to_i64().unwrap_or(i64::MAX);
            if unit * k != row.rate {
                // Row rate is not an exact integer multiple of its unit.
                mismatches.push(MarginalMismatch { chain, event: kind });
            }
            sums[idx] += decoded;
        }
        let expected = [
            counts.b as i64,
            counts.g as i64,
            (counts.b * counts.g) as i64,
            (counts.b * counts.susceptible(n)) as i64,
        ];
        for (idx, kind) in EventKind::ALL.iter().enumerate() {
            if sums[idx] != expected[idx] {
                mismatches.push(MarginalMismatch {
                    chain,
                    event: *kind,
                });
            }
        }
        RateVector {
            recover_whole: T::one() * int(sums[0]),
            recover_semi: T::one() * int(sums[1]),
            promote: r * int(sums[2]),
            seed: r * int(sums[3]),
        }
    };

    let marginal1 = marginal(1, pair.s1);
    let marginal2 = marginal(2, pair.s2);
    let expect = |c: Counts| RateVector {
        recover_whole: int(c.b as i64),
        recover_semi: int(c.g as i64),
        promote: r * int((c.b * c.g) as i64),
        seed: r * int((c.b * c.susceptible(n)) as i64),
    };
    MarginalReport {
        marginal1,
        marginal2,
        expected1: expect(pair.s1),
        expected2: expect(pair.s2),
        mismatches,
    }
}

fn apply_delta(c: Counts, delta: (i64, i64)) -> Counts {
    let b = c.b as i64 + delta.0;
    let g = c.g as i64 + delta.1;
    debug_assert!(b >= 0 && g >= 0, "delta {delta:?} undershoots {c:?}");
    Counts::new(b as u64, g as u64)
}

fn delta_applicable(c: Counts, delta: (i64, i64)) -> bool {
    c.b as i64 + delta.0 >= 0 && c.g as i64 + delta.1 >= 0
}

/// A coupled sample path with its order-violation log.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun<T> {
    pub times: Vec<T>,
    pub states: Vec<PairState>,
    pub violations: Vec<(T, PairState)>,
    pub seed_used: u64,
}

/// Event-driven simulation of the joint chain from an ordered pair. After
/// every event the order is re-checked and failures are logged; the run
/// continues. On pairs that have already lost the order, the verbatim table
/// stops being a valid generator (the lone-B1-death rate goes negative and a
/// joint death can hit an empty coordinate); sampling then clamps negative
/// rates to zero and skips rows whose move some coordinate cannot take.
pub fn simulate_coupled<T: Float>(
    pair: PairState,
    params: &ModelParams<T>,
    horizon: T,
    variant: CouplingVariant,
    rng: &mut RngStream,
) -> Result<CoupledRun<T>> {
    pair.s1.validate(params)?;
    pair.s2.validate(params)?;
    if !pair.ordered() {
        return Err(Error::InvalidParams(
            "initial pair must satisfy the partial order".into(),
        ));
    }
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParams("horizon must be positive".into()));
    }

    let seed_used = rng.derived_seed();
    let mut state = pair;
    let mut time = T::zero();
    let mut times = vec![time];
    let mut states = vec![state];
    let mut violations = Vec::new();
    loop {
        let rows = coupling_rates(state, params, variant);
        let clamped: Vec<T> = rows
            .iter()
            .map(|r| {
                if delta_applicable(state.s1, r.delta1) && delta_applicable(state.s2, r.delta2) {
                    r.rate.max(T::zero())
                } else {
                    T::zero()
                }
            })
            .collect();
        let total = clamped.iter().fold(T::zero(), |a, &x| a + x);
        if !(total > T::zero()) {
            break;
        }
        let dt = -T::from(rng.u01_open_closed()).unwrap().ln() / total;
        let next = time + dt;
        if next > horizon {
            break;
        }
        time = next;
        let target = T::from(rng.u01_half_open()).unwrap() * total;
        let indices: Vec<usize> = (0..rows.len()).collect();
        let chosen = select_event(&clamped, target, &indices);
        state = PairState::new(
            apply_delta(state.s1, rows[chosen].delta1),
            apply_delta(state.s2, rows[chosen].delta2),
        );
        times.push(time);
        states.push(state);
        if !state.ordered() {
            violations.push((time, state));
        }
    }

    Ok(CoupledRun {
        times,
        states,
        violations,
        seed_used,
    })
}

/// Joint state of the chain `(B, B+G)` and the minorant `(Bhat, Shat)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominationState {
    /// `(B, B+G)` of the true chain.
    pub chain: (i64, i64),
    /// `(Bhat, Shat)` of the minorant walk.
    pub minorant: (i64, i64),
}

impl DominationState {
    pub fn dominated(&self) -> bool {
        self.chain.0 >= self.minorant.0 && self.chain.1 >= self.minorant.1
    }
}

/// The eight-row joint table coupling `(B, B+G)` with `(Bhat, Shat)`.
///
/// Valid only while `(B, S)` lies in the scaled box (the residual rows are
/// nonnegative exactly there); outside, the region-exit error is returned.
/// The minorant rates are state-independent, so its current value does not
/// enter. Row order: joint B-death, minorant-only death pair, joint G-death,
/// minorant-only S-death, joint B-birth, chain-only B-birth, joint S-birth,
/// chain-only S-birth.
pub fn domination_rates<T: Float>(
    chain: (i64, i64),
    design: &SurvivalDesign<T>,
    n: u64,
) -> Result<Vec<JointRateRow<T>>> {
    let (b, s) = chain;
    if !design.bounds.contains_scaled(n, b, s) {
        return Err(Error::OutsideBox { b, s, n });
    }
    let g = s - b;
    let r = design.lambda / T::from(n).unwrap();
    let hat = hat_rates(design, n);
    let f1 = int::<T>(b);
    let f2 = int::<T>(g);
    let f3 = r * int(b * g);
    let f4 = r * int(b * (n as i64 - s));

    // Inside the box the residuals are nonnegative up to rounding dust.
    let residual = |x: T| {
        debug_assert!(x > -T::from(1e-9).unwrap() * T::from(n).unwrap());
        x.max(T::zero())
    };
    let stay = (0, 0);
    Ok(vec![
        JointRateRow { delta1: (-1, -1), delta2: (-1, -1), rate: f1 },
        JointRateRow { delta1: stay, delta2: (-1, -1), rate: residual(hat.d_joint - f1) },
        JointRateRow { delta1: (0, -1), delta2: (0, -1), rate: f2 },
        JointRateRow { delta1: stay, delta2: (0, -1), rate: residual(hat.d_s - f2) },
        JointRateRow { delta1: (1, 0), delta2: (1, 0), rate: hat.b_birth },
        JointRateRow { delta1: (1, 0), delta2: stay, rate: residual(f3 - hat.b_birth) },
        JointRateRow { delta1: (0, 1), delta2: (0, 1), rate: hat.s_birth },
        JointRateRow { delta1: (0, 1), delta2: stay, rate: residual(f4 - hat.s_birth) },
    ])
}

/// A domination run: `gamma` is the first time the chain left the scaled
/// box (`None` if the horizon came first); `violations` lists any failures
/// of `B >= Bhat, S >= Shat`, which the construction rules out up to gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationRun<T> {
    pub times: Vec<T>,
    pub states: Vec<DominationState>,
    pub gamma: Option<T>,
    pub violations: Vec<(T, DominationState)>,
    pub seed_used: u64,
}

/// Run the domination coupling from equal chain and minorant states until
/// the box is left (gamma) or the horizon is reached.
pub fn simulate_domination<T: Float>(
    init_chain: (i64, i64),
    init_minorant: (i64, i64),
    design: &SurvivalDesign<T>,
    n: u64,
    horizon: T,
    rng: &mut RngStream,
) -> Result<DominationRun<T>> {
    if init_chain != init_minorant {
        return Err(Error::InvalidParams(
            "domination coupling starts from equal chain and minorant states".into(),
        ));
    }
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParams("horizon must be positive".into()));
    }
    let seed_used = rng.derived_seed();
    let mut state = DominationState {
        chain: init_chain,
        minorant: init_minorant,
    };
    let mut time = T::zero();
    let mut times = vec![time];
    let mut states = vec![state];
    let mut violations = Vec::new();
    let mut gamma = None;
    loop {
        // Errors only on the initial state; afterwards exits are caught below.
        let rows = domination_rates(state.chain, design, n)?;
        let rates: Vec<T> = rows.iter().map(|r| r.rate).collect();
        let total = rates.iter().fold(T::zero(), |a, &x| a + x);
        debug_assert!(total > T::zero());
        let dt = -T::from(rng.u01_open_closed()).unwrap().ln() / total;
        let next = time + dt;
        if next > horizon {
            break;
        }
        time = next;
        let target = T::from(rng.u01_half_open()).unwrap() * total;
        let indices: Vec<usize> = (0..rows.len()).collect();
        let chosen = select_event(&rates, target, &indices);
        state.chain.0 += rows[chosen].delta1.0;
        state.chain.1 += rows[chosen].delta1.1;
        state.minorant.0 += rows[chosen].delta2.0;
        state.minorant.1 += rows[chosen].delta2.1;
        times.push(time);
        states.push(state);
        if !state.dominated() {
            violations.push((time, state));
        }
        if !design.bounds.contains_scaled(n, state.chain.0, state.chain.1) {
            gamma = Some(time);
            break;
        }
    }
    Ok(DominationRun {
        times,
        states,
        gamma,
        violations,
        seed_used,
    })
}
