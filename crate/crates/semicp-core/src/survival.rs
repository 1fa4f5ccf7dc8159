//! Supercritical design constants and the minorant birth-death chain.
//!
//! For `lambda > 4` the vector field is strictly positive in both
//! coordinates at the pivot `(b0, g0) = ((lambda-2)/(2 lambda), 1/lambda +
//! beta)` for small `beta > 0`. Around the pivot sits the box
//!
//! ```text
//! L2 = { (b, g) : (1-a) b0 <= b <= (1+a) b0,
//!        (1-a)(b0+g0) <= b+g <= (1+a)(b0+g0) }
//! ```
//!
//! with `a` small enough that the infection rates dominate the recovery
//! rates uniformly on the box. Inside `n * L2` the chain `(B, B+G)` then
//! stochastically dominates an unconstrained birth-death walk `(Bhat, Shat)`
//! with the four constant rates of [`hat_rates`], whose positive drift makes
//! survival persist. All derived constants (`g_lo`, `g_hi`, `D`, `T4`, `q1`,
//! `q2`, `rho`, `C6`) live in [`SurvivalDesign`].

use crate::error::{Error, Result};
use crate::ode::{maximize_unimodal, vector_field, OdeState};
use crate::rng::RngStream;
use num_traits::Float;

fn t<T: Float>(x: f64) -> T {
    T::from(x).unwrap()
}

/// Floor of `x` with a 1e-9 cushion, matching the `(B, G) = (nb, ng)`
/// convention while absorbing round-off in products like `n * 0.3`.
pub(crate) fn floor_scaled<T: Float>(x: T) -> u64 {
    (x + t(1e-9)).floor().to_u64().expect("nonnegative scaled count")
}

/// `L2` in `(b, b+g)` coordinates (fractions of `n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalBox<T> {
    pub b_min: T,
    pub b_max: T,
    pub s_min: T,
    pub s_max: T,
}

impl<T: Float> SurvivalBox<T> {
    /// Membership of integer `(B, S)` in `n * L2`.
    pub fn contains_scaled(&self, n: u64, b: i64, s: i64) -> bool {
        let n = T::from(n).unwrap();
        let b = T::from(b).unwrap();
        let s = T::from(s).unwrap();
        b >= n * self.b_min && b <= n * self.b_max && s >= n * self.s_min && s <= n * self.s_max
    }
}

/// All supercritical constants derived from `(lambda, beta, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalDesign<T> {
    pub lambda: T,
    pub beta: T,
    pub alpha: T,
    pub b0: T,
    pub g0: T,
    /// Smallest `g` over the box.
    pub g_lo: T,
    /// Largest `g` over the box.
    pub g_hi: T,
    pub bounds: SurvivalBox<T>,
    /// l1 distance from the pivot to the complement of the box.
    pub d: T,
    /// `D / (4 (1 + lambda))`: time the chain needs, with overwhelming
    /// probability, to leave the scaled box.
    pub t4: T,
    /// Birth rate per capita of `Shat`.
    pub q1: T,
    /// Death rate per capita of `Shat` (`q1 > q2`).
    pub q2: T,
    /// Chosen point of `(q2/q1, 1)` for the exponential bound.
    pub rho: T,
    /// `q1 + q2 - q1 rho - q2 / rho > 0`.
    pub c6: T,
}

/// Default margin above `1/lambda`, scaled by the supercriticality gap.
pub fn default_beta<T: Float>(lambda: T) -> T {
    t::<T>(0.02) * (lambda - t(4.0)) / lambda
}

/// The pivot `(b0, g0)` with both vector-field components strictly positive.
pub fn pivot_point<T: Float>(lambda: T, beta: T) -> Result<(T, T)> {
    let lambda_f = lambda.to_f64().unwrap_or(f64::NAN);
    let beta_f = beta.to_f64().unwrap_or(f64::NAN);
    if !(lambda > t(4.0)) || !lambda.is_finite() {
        return Err(Error::InfeasibleDesign {
            lambda: lambda_f,
            beta: beta_f,
        });
    }
    let reject = |reason: &str| Error::InfeasibleBeta {
        lambda: lambda_f,
        beta: beta_f,
        reason: reason.into(),
    };
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(reject("beta must be strictly positive"));
    }
    let two = t::<T>(2.0);
    let b0 = (lambda - two) / (two * lambda);
    let g0 = T::one() / lambda + beta;
    if !(b0 + g0 < T::one()) {
        return Err(reject("pivot leaves the interior of the triangle"));
    }
    let (f1, f2) = vector_field(OdeState::new(b0, g0), lambda);
    if !(f1 > T::zero()) {
        return Err(reject("F1 not strictly positive at the pivot"));
    }
    if !(f2 > T::zero()) {
        return Err(reject("F2 not strictly positive at the pivot"));
    }
    Ok((b0, g0))
}

/// Check one `alpha` against every box constraint; returns `(g_lo, g_hi)`.
fn check_alpha<T: Float>(lambda: T, b0: T, g0: T, alpha: T) -> std::result::Result<(T, T), String> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err("alpha must lie in (0, 1)".into());
    }
    let lo = T::one() - alpha;
    let hi = T::one() + alpha;
    let s0 = b0 + g0;
    if !(hi * s0 < T::one()) {
        return Err("inflated pivot leaves the interior of the triangle".into());
    }
    let g_lo = lo * s0 - hi * b0;
    let g_hi = hi * s0 - lo * b0;
    if !(g_lo > T::zero()) {
        return Err("g_lo not strictly positive".into());
    }
    // Infection must outrun recovery uniformly over the box.
    if !(lambda * lo * b0 * g_lo > hi * b0) {
        return Err("promotion rate bound fails (first box inequality)".into());
    }
    if !(lambda * lo * b0 * (T::one() - hi * s0) > g_hi + lambda * hi * b0 * g_hi) {
        return Err("seeding rate bound fails (second box inequality)".into());
    }
    Ok((g_lo, g_hi))
}

/// l1 distance (in `(b, g)` coordinates) from the pivot to the boundary of
/// the box: per-face grid scan plus golden-section refinement. The closed
/// form `alpha * b0` is kept out of the implementation as a test oracle.
fn min_l1_to_box_boundary<T: Float>(b0: T, g0: T, bounds: &SurvivalBox<T>) -> T {
    let dist = |b: T, s: T| (b - b0).abs() + (s - b - g0).abs();
    let mut best = T::infinity();
    for bf in [bounds.b_min, bounds.b_max] {
        let (_, neg) = maximize_unimodal(bounds.s_min, bounds.s_max, |s| -dist(bf, s));
        best = best.min(-neg);
    }
    for sf in [bounds.s_min, bounds.s_max] {
        let (_, neg) = maximize_unimodal(bounds.b_min, bounds.b_max, |b| -dist(b, sf));
        best = best.min(-neg);
    }
    best
}

/// Build the full design. When `alpha` is absent, the largest feasible value
/// on the halving grid `{0.5 * 2^-k : k = 0..20}` is selected.
pub fn design_survival<T: Float>(lambda: T, beta: T, alpha: Option<T>) -> Result<SurvivalDesign<T>> {
    let (b0, g0) = pivot_point(lambda, beta)?;
    let (alpha, g_lo, g_hi) = match alpha {
        Some(a) => {
            let (g_lo, g_hi) = check_alpha(lambda, b0, g0, a).map_err(|reason| {
                Error::InfeasibleAlpha {
                    alpha: a.to_f64().unwrap_or(f64::NAN),
                    reason,
                }
            })?;
            (a, g_lo, g_hi)
        }
        None => {
            let mut found = None;
            for k in 0..=20u32 {
                let a = t::<T>(0.5) / T::from(1u64 << k).unwrap();
                if let Ok((g_lo, g_hi)) = check_alpha(lambda, b0, g0, a) {
                    found = Some((a, g_lo, g_hi));
                    break;
                }
            }
            found.ok_or(Error::InfeasibleDesign {
                lambda: lambda.to_f64().unwrap_or(f64::NAN),
                beta: beta.to_f64().unwrap_or(f64::NAN),
            })?
        }
    };

    let lo = T::one() - alpha;
    let hi = T::one() + alpha;
    let s0 = b0 + g0;
    let bounds = SurvivalBox {
        b_min: lo * b0,
        b_max: hi * b0,
        s_min: lo * s0,
        s_max: hi * s0,
    };
    let d = min_l1_to_box_boundary(b0, g0, &bounds);
    let t4 = d / (t::<T>(4.0) * (T::one() + lambda));
    let q1 = lambda * bounds.b_min * (T::one() - bounds.s_max);
    let q2 = bounds.b_max + g_hi;
    debug_assert!(q1 > q2, "q1 > q2 is implied by the box inequalities");
    let rho = (q2 / q1).sqrt();
    let c6 = q1 + q2 - q1 * rho - q2 / rho;
    debug_assert!(c6 > T::zero());

    Ok(SurvivalDesign {
        lambda,
        beta,
        alpha,
        b0,
        g0,
        g_lo,
        g_hi,
        bounds,
        d,
        t4,
        q1,
        q2,
        rho,
        c6,
    })
}

/// The four constant rates of the minorant walk at population `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatRates<T> {
    /// `(Bhat, Shat) -> (Bhat-1, Shat-1)`: `n (1+a) b0`.
    pub d_joint: T,
    /// `(Bhat, Shat) -> (Bhat, Shat-1)`: `n g_hi`.
    pub d_s: T,
    /// `(Bhat, Shat) -> (Bhat+1, Shat)`: `lambda n (1-a) b0 g_lo`.
    pub b_birth: T,
    /// `(Bhat, Shat) -> (Bhat, Shat+1)`: `lambda n (1-a) b0 (1 - (1+a)(b0+g0))`.
    pub s_birth: T,
}

impl<T: Float> HatRates<T> {
    pub fn total(&self) -> T {
        self.d_joint + self.d_s + self.b_birth + self.s_birth
    }
}

pub fn hat_rates<T: Float>(design: &SurvivalDesign<T>, n: u64) -> HatRates<T> {
    let n = T::from(n).unwrap();
    HatRates {
        d_joint: n * design.bounds.b_max,
        d_s: n * design.g_hi,
        b_birth: n * (design.lambda * design.bounds.b_min * design.g_lo),
        s_birth: n * design.q1,
    }
}

/// Integer state of the minorant walk. The rates are state-independent, so
/// the walk is unconstrained and the values may go negative; it is only used
/// as a lower bound while the true chain stays in the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HatState {
    pub bhat: i64,
    pub shat: i64,
}

/// Starting point `(floor(n b0), floor(n (b0 + g0)))` of the minorant.
pub fn hat_initial<T: Float>(design: &SurvivalDesign<T>, n: u64) -> HatState {
    let n = T::from(n).unwrap();
    HatState {
        bhat: floor_scaled(n * design.b0) as i64,
        shat: floor_scaled(n * (design.b0 + design.g0)) as i64,
    }
}

/// The same floored pivot as `(B, B+G)` chain coordinates.
pub fn pivot_counts<T: Float>(design: &SurvivalDesign<T>, n: u64) -> (i64, i64) {
    let init = hat_initial(design, n);
    (init.bhat, init.shat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HatTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<HatState>,
}

impl<T: Float> HatTrajectory<T> {
    pub fn final_state(&self) -> HatState {
        *self.states.last().expect("trajectory is never empty")
    }
}

/// Event-driven simulation of the minorant walk from [`hat_initial`] until
/// the horizon. Event selection scans `d_joint, d_s, b_birth, s_birth` in
/// that fixed order.
pub fn simulate_hat<T: Float>(
    design: &SurvivalDesign<T>,
    n: u64,
    horizon: T,
    rng: &mut RngStream,
) -> HatTrajectory<T> {
    let rates = hat_rates(design, n);
    let rate_arr = [rates.d_joint, rates.d_s, rates.b_birth, rates.s_birth];
    const DELTAS: [(i64, i64); 4] = [(-1, -1), (0, -1), (1, 0), (0, 1)];
    let total = rates.total();

    let mut state = hat_initial(design, n);
    let mut times = vec![T::zero()];
    let mut states = vec![state];
    let mut time = T::zero();
    loop {
        let dt = -T::from(rng.u01_open_closed()).unwrap().ln() / total;
        let next = time + dt;
        if next > horizon {
            break;
        }
        time = next;
        let target = T::from(rng.u01_half_open()).unwrap() * total;
        let (db, ds) = crate::chain::select_event(&rate_arr, target, &DELTAS);
        state.bhat += db;
        state.shat += ds;
        times.push(time);
        states.push(state);
    }
    HatTrajectory { times, states }
}
