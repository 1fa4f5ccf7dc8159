//! The experiment runners behind the CLI subcommands.
//!
//! Every replica owns a stream derived from `(master_seed, global replica
//! index)`, with index blocks assigned to parameter cells in iteration order
//! (sorted lists), so results are independent of scheduling and of the
//! parallelism degree. Aggregation happens on replica-ordered vectors with
//! integer counters and pairwise float sums.

use crate::config::{ExperimentConfig, DEFAULT_EPSILON};
use crate::error::HarnessError;
use crate::rows::{AuditRow, AuxRow, LumpingRow, MeanFieldRow, OdeRow, SweepRow};
use crate::stats;
use rayon::prelude::*;
use semicp_core::chain::{self, Counts, ModelParams, StepOutcome};
use semicp_core::coupling::{self, CouplingVariant, PairState};
use semicp_core::full::{self, FullConfiguration};
use semicp_core::ode::{self, OdeState};
use semicp_core::rng::RngStream;
use semicp_core::survival::{self, hat_rates, pivot_counts};
use semicp_core::tilde::{self, TildeParams};
use std::collections::HashMap;

/// Fixed integration step of every harness ODE evaluation.
pub const ODE_STEP: f64 = 1e-3;

/// Sigma level of the minorant growth check; the check time is chosen so
/// each coordinate's drift exceeds this many standard deviations.
pub const HAT_GROWTH_SIGMAS: f64 = 4.2;

/// Time at which the aux runner checks minorant growth. The walk needs
/// `drift * t >= z * sqrt(variance * t)` in both coordinates, so the time
/// scales with the squared inverse drift of the design (tight designs with
/// small alpha or beta need proportionally longer runs).
pub fn hat_growth_time(design: &semicp_core::survival::SurvivalDesign<f64>, n: u64) -> f64 {
    let rates = hat_rates(design, n);
    let ratio = |birth: f64, death: f64| {
        let drift = birth - death;
        debug_assert!(drift > 0.0);
        (birth + death) / (drift * drift)
    };
    let worst = ratio(rates.b_birth, rates.d_joint)
        .max(ratio(rates.s_birth, rates.d_joint + rates.d_s));
    HAT_GROWTH_SIGMAS * HAT_GROWTH_SIGMAS * worst
}

/// Probe times of the envelope-chain mean check.
pub const TILDE_MEAN_PROBES: [f64; 3] = [1.0, 3.0, 5.0];

/// Relative tolerance of the envelope-chain mean check.
pub const TILDE_MEAN_RTOL: f64 = 0.05;

/// Required frequency of the minorant growth event.
pub const HAT_GROWTH_THRESHOLD: f64 = 0.99;

/// Stream for one replica of one experiment.
pub fn rng_stream(master_seed: u64, replica_index: u64) -> RngStream {
    RngStream::new(master_seed, replica_index)
}

fn sorted_u64(list: &[u64]) -> Vec<u64> {
    let mut v = list.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn sorted_f64(list: &[f64]) -> Vec<f64> {
    let mut v = list.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite lambdas"));
    v.dedup();
    v
}

fn params(n: u64, lambda: f64) -> Result<ModelParams<f64>, HarnessError> {
    Ok(ModelParams::new(n, lambda)?)
}

/// Extinction-time sweep from the all-wholly-infected state.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut next_index: u64 = 0;
    for &lambda in &sorted_f64(&config.lambda_list) {
        for &n in &sorted_u64(&config.n_list) {
            let p = params(n, lambda)?;
            let base = next_index;
            next_index += config.replicas;
            let taus: Vec<Option<f64>> = (0..config.replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + r);
                    let traj = chain::simulate_subsampled(
                        &p,
                        Counts::new(n, 0),
                        config.horizon,
                        &mut rng,
                        u64::MAX,
                    )
                    .expect("valid sweep replica");
                    traj.tau
                })
                .collect();

            let mut finite: Vec<f64> = taus.iter().filter_map(|t| *t).collect();
            finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let extinct_count = finite.len() as u64;
            let (tau_median, tau_mean, tau_p95) = if finite.is_empty() {
                (None, None, None)
            } else {
                (
                    Some(stats::median_sorted(&finite)),
                    Some(stats::mean(&finite)),
                    Some(stats::percentile_sorted(&finite, 95.0)),
                )
            };
            rows.push(SweepRow {
                n,
                lambda,
                replicas: config.replicas,
                extinct_count,
                survived_count: config.replicas - extinct_count,
                tau_median,
                tau_mean,
                tau_p95,
                horizon: config.horizon,
            });
        }
    }
    Ok(rows)
}

/// Sup over event times in `[0, T]` of the l1 deviation between the scaled
/// chain from `(n, 0)` and the ODE solution from `(1, 0)`.
fn sup_deviation(
    p: &ModelParams<f64>,
    path: &ode::OdePath<f64>,
    horizon: f64,
    rng: &mut RngStream,
) -> f64 {
    let n = p.n() as f64;
    let mut state = Counts::new(p.n(), 0);
    let mut t = 0.0;
    let mut sup = 0.0f64;
    loop {
        let reference = path.eval(t);
        let dev =
            (state.b as f64 / n - reference.b).abs() + (state.g as f64 / n - reference.g).abs();
        sup = sup.max(dev);
        if state.b == 0 {
            break;
        }
        match chain::step(state, p, rng).expect("valid deviation state") {
            StepOutcome::Absorbed => break,
            StepOutcome::Event { dt, next, .. } => {
                if t + dt > horizon {
                    break;
                }
                t += dt;
                state = next;
            }
        }
    }
    sup
}

/// Mean-field deviation experiment (chain vs ODE, both from full infection).
pub fn run_meanfield(config: &ExperimentConfig) -> Result<Vec<MeanFieldRow>, HarnessError> {
    config.validate()?;
    let epsilon = DEFAULT_EPSILON;
    let mut rows = Vec::new();
    let mut next_index: u64 = 0;
    for &lambda in &sorted_f64(&config.lambda_list) {
        let path = ode::integrate(OdeState::new(1.0, 0.0), lambda, config.horizon, ODE_STEP)?;
        for &n in &sorted_u64(&config.n_list) {
            let p = params(n, lambda)?;
            let base = next_index;
            next_index += config.replicas;
            let mut sups: Vec<f64> = (0..config.replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + r);
                    sup_deviation(&p, &path, config.horizon, &mut rng)
                })
                .collect();
            let exceed_count = sups.iter().filter(|&&s| s > epsilon).count() as u64;
            sups.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.push(MeanFieldRow {
                n,
                lambda,
                t: config.horizon,
                replicas: config.replicas,
                epsilon,
                exceed_count,
                sup_dev_median: stats::median_sorted(&sups),
            });
        }
    }
    Ok(rows)
}

/// Draw `s2` uniform over all valid states, then `s1` uniform over the
/// states dominating `s2`, by exact index enumeration (no rejection).
pub fn sample_ordered_pair(n: u64, rng: &mut RngStream) -> PairState {
    let total_states = (n + 1) * (n + 2) / 2;
    let mut k = rng.below(total_states);
    let mut b2 = 0u64;
    while k >= n - b2 + 1 {
        k -= n - b2 + 1;
        b2 += 1;
    }
    let g2 = k;

    let dominating: u64 = (b2..=n).map(|b1| n - (b2 + g2).max(b1) + 1).sum();
    let mut idx = rng.below(dominating);
    for b1 in b2..=n {
        let s1_min = (b2 + g2).max(b1);
        let choices = n - s1_min + 1;
        if idx < choices {
            return PairState::new(Counts::new(b1, s1_min + idx - b1), Counts::new(b2, g2));
        }
        idx -= choices;
    }
    unreachable!("index within the enumerated dominating set")
}

/// Coupling audit over both variants: count replicas with at least one order
/// violation and keep the earliest example.
pub fn run_coupling_audit(config: &ExperimentConfig) -> Result<Vec<AuditRow>, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut next_index: u64 = 0;
    for variant in CouplingVariant::ALL {
        for &lambda in &sorted_f64(&config.lambda_list) {
            for &n in &sorted_u64(&config.n_list) {
                let p = params(n, lambda)?;
                let base = next_index;
                next_index += config.replicas;
                let firsts: Vec<Option<(f64, PairState)>> = (0..config.replicas)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = rng_stream(config.master_seed, base + r);
                        let pair = sample_ordered_pair(n, &mut rng);
                        let run = coupling::simulate_coupled(
                            pair,
                            &p,
                            config.horizon,
                            variant,
                            &mut rng,
                        )
                        .expect("ordered initial pair");
                        run.violations.first().copied()
                    })
                    .collect();
                let violation_replicas = firsts.iter().flatten().count() as u64;
                let first = firsts.iter().flatten().next();
                rows.push(AuditRow {
                    variant: variant.name().to_string(),
                    n,
                    lambda,
                    replicas: config.replicas,
                    violation_replicas,
                    first_violation_time: first.map(|(t, _)| *t),
                    first_violation_b1: first.map(|(_, s)| s.s1.b),
                    first_violation_g1: first.map(|(_, s)| s.s1.g),
                    first_violation_b2: first.map(|(_, s)| s.s2.b),
                    first_violation_g2: first.map(|(_, s)| s.s2.g),
                });
            }
        }
    }
    Ok(rows)
}

/// Initial counts of the lumping check: roughly a third each wholly and
/// semi-infected, at least one infective.
pub fn lumping_init(n: u64) -> Counts {
    let b = (n / 3).max(1);
    let g = (n / 3).min(n - b);
    Counts::new(b, g)
}

fn tv_distance(a: &HashMap<Counts, u64>, b: &HashMap<Counts, u64>, replicas: u64) -> f64 {
    let mut keys: Vec<Counts> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let r = replicas as f64;
    let mut sum = 0.0;
    for key in keys {
        let pa = *a.get(&key).unwrap_or(&0) as f64 / r;
        let pb = *b.get(&key).unwrap_or(&0) as f64 / r;
        sum += (pa - pb).abs();
    }
    0.5 * sum
}

/// Lumping check: empirical law of the stopped chain at `T` under the
/// reduced simulator vs the per-vertex simulator.
pub fn run_lumping_check(config: &ExperimentConfig) -> Result<Vec<LumpingRow>, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut next_index: u64 = 0;
    for &lambda in &sorted_f64(&config.lambda_list) {
        for &n in &sorted_u64(&config.n_list) {
            if n > 8 {
                return Err(HarnessError::Core(semicp_core::Error::Capacity { n, max: 8 }));
            }
            let p = params(n, lambda)?;
            let init = lumping_init(n);
            let base = next_index;
            next_index += 2 * config.replicas;

            let reduced: Vec<Counts> = (0..config.replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + r);
                    chain::simulate_subsampled(&p, init, config.horizon, &mut rng, u64::MAX)
                        .expect("valid lumping replica")
                        .final_state()
                })
                .collect();
            let per_vertex: Vec<Counts> = (0..config.replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + config.replicas + r);
                    let cfg = FullConfiguration::from_counts(init, n).expect("valid init");
                    full::simulate_full(&p, &cfg, config.horizon, &mut rng)
                        .expect("valid full replica")
                        .final_state()
                })
                .collect();

            let mut law_reduced = HashMap::new();
            for s in reduced {
                *law_reduced.entry(s).or_insert(0u64) += 1;
            }
            let mut law_full = HashMap::new();
            for s in per_vertex {
                *law_full.entry(s).or_insert(0u64) += 1;
            }
            rows.push(LumpingRow {
                n,
                lambda,
                t: config.horizon,
                replicas: config.replicas,
                init_b: init.b,
                init_g: init.g,
                tv_distance: tv_distance(&law_reduced, &law_full, config.replicas),
            });
        }
    }
    Ok(rows)
}

/// Auxiliary-chain checks: minorant growth, domination audit, envelope-chain
/// extinction and mean decay. Designs are built per lambda with the default
/// beta and the largest feasible alpha.
pub fn run_aux_checks(config: &ExperimentConfig) -> Result<Vec<AuxRow>, HarnessError> {
    config.validate()?;
    let theta = config.theta.unwrap_or(1.0);
    let replicas = config.replicas;
    let mut rows = Vec::new();
    let mut next_index: u64 = 0;
    for &lambda in &sorted_f64(&config.lambda_list) {
        let design = survival::design_survival(lambda, survival::default_beta(lambda), None)?;
        for &n in &sorted_u64(&config.n_list) {
            // Minorant growth: both coordinates at or above their start.
            let rates = hat_rates(&design, n);
            let rate_arr = [rates.d_joint, rates.d_s, rates.b_birth, rates.s_birth];
            let total: f64 = rate_arr.iter().sum();
            let growth_time = hat_growth_time(&design, n);
            let base = next_index;
            next_index += replicas;
            let grew: Vec<bool> = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + r);
                    let mut bhat = 0i64;
                    let mut shat = 0i64;
                    let mut t = 0.0;
                    loop {
                        let dt = rng.exponential(total);
                        if t + dt > growth_time {
                            break;
                        }
                        t += dt;
                        let target = rng.u01_half_open() * total;
                        let mut acc = 0.0;
                        let mut pick = 3;
                        for (i, rate) in rate_arr.iter().enumerate() {
                            acc += rate;
                            if target < acc {
                                pick = i;
                                break;
                            }
                        }
                        match pick {
                            0 => {
                                bhat -= 1;
                                shat -= 1;
                            }
                            1 => shat -= 1,
                            2 => bhat += 1,
                            _ => shat += 1,
                        }
                    }
                    bhat >= 0 && shat >= 0
                })
                .collect();
            let observed = grew.iter().filter(|&&g| g).count() as f64 / replicas as f64;
            rows.push(AuxRow {
                check: "hat_growth".into(),
                lambda,
                n,
                theta: None,
                replicas,
                observed,
                threshold: HAT_GROWTH_THRESHOLD,
                pass: observed >= HAT_GROWTH_THRESHOLD,
            });

            // Domination audit: no order violation before the box exit.
            let init = pivot_counts(&design, n);
            if !design.bounds.contains_scaled(n, init.0, init.1) {
                return Err(HarnessError::Usage(format!(
                    "n={n} is too small for the survival box at lambda={lambda} \
                     (alpha={}): the floored pivot {init:?} falls outside; \
                     the box spans only ~{:.2} states in B",
                    design.alpha,
                    2.0 * design.alpha * design.b0 * n as f64,
                )));
            }
            let base = next_index;
            next_index += replicas;
            let violated: Vec<bool> = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + r);
                    let run = coupling::simulate_domination(
                        init,
                        init,
                        &design,
                        n,
                        config.horizon,
                        &mut rng,
                    )
                    .expect("pivot is inside the box");
                    !run.violations.is_empty()
                })
                .collect();
            let bad = violated.iter().filter(|&&v| v).count() as f64;
            rows.push(AuxRow {
                check: "domination".into(),
                lambda,
                n,
                theta: None,
                replicas,
                observed: 1.0 - bad / replicas as f64,
                threshold: 1.0,
                pass: bad == 0.0,
            });

            // Envelope chain: extinction frequency by the deadline vs the
            // guaranteed bound, and the empirical mean against h(t).
            let tp = TildeParams::new(theta, n)?;
            let deadline = tilde::tilde_deadline(n, theta);
            let bound = tilde::tilde_extinction_bound(n, theta);
            let base = next_index;
            next_index += replicas;
            let horizon = deadline.max(TILDE_MEAN_PROBES[2]);
            let outcomes: Vec<(bool, [u64; 3])> = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng_stream(config.master_seed, base + r);
                    let traj = tilde::simulate_tilde(&tp, horizon, &mut rng);
                    let extinct = traj.extinction.map(|t| t <= deadline).unwrap_or(false);
                    let probes =
                        TILDE_MEAN_PROBES.map(|probe_t| traj.value_at(probe_t));
                    (extinct, probes)
                })
                .collect();
            let extinct_frac =
                outcomes.iter().filter(|(e, _)| *e).count() as f64 / replicas as f64;
            rows.push(AuxRow {
                check: "tilde_extinction".into(),
                lambda,
                n,
                theta: Some(theta),
                replicas,
                observed: extinct_frac,
                threshold: bound,
                pass: extinct_frac >= bound,
            });
            for (probe_idx, probe_t) in TILDE_MEAN_PROBES.iter().enumerate() {
                let values: Vec<f64> = outcomes
                    .iter()
                    .map(|(_, probes)| probes[probe_idx] as f64)
                    .collect();
                let empirical = stats::mean(&values);
                let expected = tilde::tilde_mean(*probe_t, n, theta);
                let rel_err = (empirical - expected).abs() / expected;
                rows.push(AuxRow {
                    check: format!("tilde_mean_rel_err_t{probe_t}"),
                    lambda,
                    n,
                    theta: Some(theta),
                    replicas,
                    observed: rel_err,
                    threshold: TILDE_MEAN_RTOL,
                    pass: rel_err <= TILDE_MEAN_RTOL,
                });
            }
        }
    }
    Ok(rows)
}

/// Integrated mean-field path from full infection, subsampled to at most
/// ~2000 rows per lambda.
pub fn run_ode(config: &ExperimentConfig) -> Result<Vec<OdeRow>, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &lambda in &sorted_f64(&config.lambda_list) {
        let path = ode::integrate(OdeState::new(1.0, 0.0), lambda, config.horizon, ODE_STEP)?;
        let states = path.states();
        let stride = (states.len() / 2000).max(1);
        for (i, s) in states.iter().enumerate() {
            if i % stride == 0 || i == states.len() - 1 {
                rows.push(OdeRow {
                    lambda,
                    t: path.time_of(i),
                    b: s.b,
                    g: s.g,
                });
            }
        }
    }
    Ok(rows)
}
