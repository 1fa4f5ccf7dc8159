//! The mean-field ODE of the infected fractions `(b, g) = (B/n, G/n)`:
//!
//! ```text
//! db/dt = -b + lambda b g
//! dg/dt = -g - lambda b g + lambda b (1 - b - g)
//! ```
//!
//! The triangle `L = {b >= 0, g >= 0, b + g <= 1}` is invariant. Equilibria
//! with `b > 0` exist exactly for `lambda >= 4` (a double root at 4), which
//! is the phase-transition threshold of the stochastic chain. For
//! `lambda < 4` the solution from `(1, 0)` decays to the origin underneath
//! explicit exponential envelopes.

use crate::error::{Error, Result};
use num_traits::Float;

/// Tolerance for membership in the invariant triangle, absorbing integration
/// round-off. Exceeding it is reported as an error, never clamped.
pub const REGION_TOL: f64 = 1e-9;

/// The region tolerance in the working scalar: the contract value 1e-9,
/// widened to a few machine epsilons for scalars coarser than `f64`.
pub fn region_tol<T: Float>() -> T {
    T::from(REGION_TOL).unwrap().max(T::epsilon() * T::from(32.0).unwrap())
}

/// Discriminant threshold below which the equilibrium quadratic is treated
/// as a double root (criticality).
pub const CRITICAL_TOL: f64 = 1e-12;

fn t<T: Float>(x: f64) -> T {
    T::from(x).unwrap()
}

/// Mean-field fractions of wholly- and semi-infected vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState<T> {
    pub b: T,
    pub g: T,
}

impl<T: Float> OdeState<T> {
    pub fn new(b: T, g: T) -> Self {
        OdeState { b, g }
    }

    pub fn l1_norm(&self) -> T {
        self.b.abs() + self.g.abs()
    }

    /// Membership in the invariant triangle up to `tol`.
    pub fn in_region(&self, tol: T) -> bool {
        self.b >= -tol && self.g >= -tol && self.b + self.g <= T::one() + tol
    }
}

/// Right-hand side of the ODE at one state.
pub fn vector_field<T: Float>(state: OdeState<T>, lambda: T) -> (T, T) {
    let OdeState { b, g } = state;
    let db = -b + lambda * b * g;
    let dg = -g - lambda * b * g + lambda * b * (T::one() - b - g);
    (db, dg)
}

/// A fixed-step integrated trajectory. States sit on the uniform grid
/// `t_i = i * step`; when `t_end` is not a multiple of `step` a single
/// shortened final step lands exactly on `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdePath<T> {
    step: T,
    states: Vec<OdeState<T>>,
    t_end: T,
}

impl<T: Float> OdePath<T> {
    pub fn step(&self) -> T {
        self.step
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn states(&self) -> &[OdeState<T>] {
        &self.states
    }

    /// Time of the `i`-th state.
    pub fn time_of(&self, i: usize) -> T {
        let ti = T::from(i).unwrap() * self.step;
        if ti > self.t_end {
            self.t_end
        } else {
            ti
        }
    }

    pub fn final_state(&self) -> OdeState<T> {
        *self.states.last().expect("path is never empty")
    }

    /// Piecewise-linear interpolation at `0 <= t <= t_end` (clamped).
    pub fn eval(&self, time: T) -> OdeState<T> {
        if time <= T::zero() {
            return self.states[0];
        }
        if time >= self.t_end {
            return self.final_state();
        }
        let x = time / self.step;
        let mut i = x.floor().to_usize().unwrap_or(0);
        if i + 1 >= self.states.len() {
            i = self.states.len() - 2;
        }
        let t0 = T::from(i).unwrap() * self.step;
        let t1 = self.time_of(i + 1);
        let w = (time - t0) / (t1 - t0);
        let a = self.states[i];
        let b = self.states[i + 1];
        OdeState::new(a.b + (b.b - a.b) * w, a.g + (b.g - a.g) * w)
    }
}

#[inline]
fn rk4_step<T: Float>(state: OdeState<T>, lambda: T, h: T) -> OdeState<T> {
    let half = t::<T>(0.5);
    let sixth = T::one() / t::<T>(6.0);
    let two = t::<T>(2.0);
    let (k1b, k1g) = vector_field(state, lambda);
    let s2 = OdeState::new(state.b + half * h * k1b, state.g + half * h * k1g);
    let (k2b, k2g) = vector_field(s2, lambda);
    let s3 = OdeState::new(state.b + half * h * k2b, state.g + half * h * k2g);
    let (k3b, k3g) = vector_field(s3, lambda);
    let s4 = OdeState::new(state.b + h * k3b, state.g + h * k3g);
    let (k4b, k4g) = vector_field(s4, lambda);
    OdeState::new(
        state.b + h * sixth * (k1b + two * k2b + two * k3b + k4b),
        state.g + h * sixth * (k1g + two * k2g + two * k3g + k4g),
    )
}

/// Integrate with the classical 4th-order scheme at a fixed step.
///
/// Errors if the initial state is outside the triangle, the step exceeds
/// 1e-2, or any integrated state leaves the triangle by more than
/// [`REGION_TOL`] (the signal that the step is too large).
pub fn integrate<T: Float>(
    init: OdeState<T>,
    lambda: T,
    t_end: T,
    step: T,
) -> Result<OdePath<T>> {
    let tol = region_tol::<T>();
    if !init.in_region(tol) {
        return Err(Error::InvalidParams(
            "initial state outside the invariant region".into(),
        ));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidParams("lambda must be positive".into()));
    }
    if !(t_end > T::zero()) {
        return Err(Error::InvalidParams("t_end must be positive".into()));
    }
    if !(step > T::zero()) || step > t::<T>(1e-2) {
        return Err(Error::InvalidParams("step must be in (0, 1e-2]".into()));
    }

    // Full steps; division noise of up to 1e-9 steps is absorbed so that a
    // t_end that is a multiple of step in exact arithmetic takes exactly
    // t_end/step steps.
    let ratio = t_end / step;
    let full = (ratio + t::<T>(1e-9)).floor();
    let full_steps = full.to_usize().ok_or_else(|| {
        Error::InvalidParams("t_end/step does not fit in a step count".into())
    })?;
    let remainder = t_end - full * step;

    let mut states = Vec::with_capacity(full_steps + 2);
    states.push(init);
    let mut state = init;
    for i in 1..=full_steps {
        state = rk4_step(state, lambda, step);
        if !state.in_region(tol) {
            return Err(Error::RegionExit {
                t: (T::from(i).unwrap() * step).to_f64().unwrap_or(f64::NAN),
                b: state.b.to_f64().unwrap_or(f64::NAN),
                g: state.g.to_f64().unwrap_or(f64::NAN),
            });
        }
        states.push(state);
    }
    if remainder > t::<T>(1e-9) * step.max(T::one()) {
        state = rk4_step(state, lambda, remainder);
        if !state.in_region(tol) {
            return Err(Error::RegionExit {
                t: t_end.to_f64().unwrap_or(f64::NAN),
                b: state.b.to_f64().unwrap_or(f64::NAN),
                g: state.g.to_f64().unwrap_or(f64::NAN),
            });
        }
        states.push(state);
    }

    Ok(OdePath {
        step,
        states,
        t_end,
    })
}

/// Equilibria of the vector field, sorted by `b` ascending. `critical` is
/// set when the equilibrium quadratic has a double root (`lambda = 4` within
/// [`CRITICAL_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet<T> {
    pub points: Vec<OdeState<T>>,
    pub critical: bool,
}

/// Closed-form equilibria. `F1 = 0` forces `b = 0` or `g = 1/lambda`; the
/// latter reduces `F2 = 0` to `lambda b^2 - (lambda - 2) b + 1/lambda = 0`,
/// whose discriminant `(lambda - 2)^2 - 4` vanishes exactly at the critical
/// rate.
pub fn equilibria<T: Float>(lambda: T) -> EquilibriumSet<T> {
    assert!(
        lambda > T::zero() && lambda.is_finite(),
        "lambda must be positive"
    );
    let two = t::<T>(2.0);
    let mut points = vec![OdeState::new(T::zero(), T::zero())];
    let disc = (lambda - two) * (lambda - two) - t::<T>(4.0);
    let critical = disc.abs() <= t::<T>(CRITICAL_TOL) && lambda > two;
    if critical {
        points.push(OdeState::new(
            (lambda - two) / (two * lambda),
            T::one() / lambda,
        ));
    } else if disc > T::zero() && lambda > two {
        let g = T::one() / lambda;
        let root = disc.sqrt();
        points.push(OdeState::new((lambda - two - root) / (two * lambda), g));
        points.push(OdeState::new((lambda - two + root) / (two * lambda), g));
    }
    EquilibriumSet { points, critical }
}

/// Subcritical decay constants: `g_star` is the maximum of
/// `lambda b (1-b) / (2 lambda b + 1)` over `b` in `[0, 1]` (the curve under
/// which `dg/dt >= 0`), and `g_tilde = (1/lambda + g_star) / 2` sits strictly
/// between `g_star` and `1/lambda` whenever `lambda < 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope<T> {
    pub g_star: T,
    pub g_tilde: T,
}

fn g_curve<T: Float>(b: T, lambda: T) -> T {
    lambda * b * (T::one() - b) / (t::<T>(2.0) * lambda * b + T::one())
}

/// Maximize a unimodal function on `[lo, hi]`: coarse grid scan to bracket,
/// then golden-section refinement.
pub(crate) fn maximize_unimodal<T: Float>(lo: T, hi: T, f: impl Fn(T) -> T) -> (T, T) {
    let grid: usize = 10_000;
    let width = hi - lo;
    let mut best_i = 0usize;
    let mut best_v = f(lo);
    for i in 1..=grid {
        let x = lo + width * T::from(i).unwrap() / T::from(grid).unwrap();
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let cell = width / T::from(grid).unwrap();
    let mut a = lo + cell * T::from(best_i.saturating_sub(1)).unwrap();
    let mut b = (lo + cell * T::from(best_i + 1).unwrap()).min(hi);
    let inv_phi = t::<T>(0.618_033_988_749_894_9);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = (a + b) / t::<T>(2.0);
    (x, f(x))
}

/// Compute `(g_star, g_tilde)` for the given rate by numeric maximization
/// (absolute accuracy well below 1e-10; the stationary point also has a
/// closed form, kept out of the implementation so tests can use it as an
/// independent oracle).
pub fn decay_envelope_params<T: Float>(lambda: T) -> DecayEnvelope<T> {
    assert!(
        lambda > T::zero() && lambda.is_finite(),
        "lambda must be positive"
    );
    let (_, g_star) = maximize_unimodal(T::zero(), T::one(), |b| g_curve(b, lambda));
    let g_tilde = (T::one() / lambda + g_star) / t::<T>(2.0);
    DecayEnvelope { g_star, g_tilde }
}

/// Pointwise decay envelopes for the solution from `(1, 0)` when
/// `lambda < 4`:
///
/// ```text
/// b_t <= exp((lambda g_tilde - 1) t)
/// g_t <= (exp((lambda g_tilde - 1) t) - exp(-t)) / g_tilde
/// ```
pub fn decay_envelope<T: Float>(lambda: T, time: T) -> Result<(T, T)> {
    if !(lambda < t::<T>(4.0)) {
        return Err(Error::InvalidParams(
            "decay envelopes are defined only for lambda < 4".into(),
        ));
    }
    if time < T::zero() {
        return Err(Error::InvalidParams("time must be nonnegative".into()));
    }
    let env = decay_envelope_params(lambda);
    let lead = ((lambda * env.g_tilde - T::one()) * time).exp();
    let g_bound = (lead - (-time).exp()) / env.g_tilde;
    Ok((lead, g_bound))
}
