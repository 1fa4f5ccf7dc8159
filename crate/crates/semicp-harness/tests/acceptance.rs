//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).
//! Every tolerance is pinned here in code.

use rayon::prelude::*;
use semicp_harness::config::{ExperimentConfig, ExperimentKind};
use semicp_harness::experiments::{
    run_coupling_audit, run_lumping_check, run_meanfield, run_sweep,
};
use semicp_harness::stats;
use semicp_core::chain::Counts;
use semicp_core::coupling::{
    self, dominates, marginal_consistency, CouplingVariant, PairState,
};
use semicp_core::ode::{self, OdeState};
use semicp_core::rng::RngStream;
use semicp_core::survival::{self, hat_rates, pivot_counts};
use semicp_core::tilde::{self, TildeParams};

const MASTER_SEED: u64 = 0xACCE_97;

fn config(kind: ExperimentKind) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(kind);
    config.master_seed = MASTER_SEED;
    config
}

/// Criterion 1: one equilibrium for lambda < 4, the double root
/// (0.25, 0.25) at 4, three equilibria above; residuals <= 1e-10.
#[test]
fn criterion_01_ode_criticality() {
    for lambda in [1.0f64, 2.0, 3.0, 3.9] {
        let set = ode::equilibria(lambda);
        assert_eq!(set.points.len(), 1, "lambda={lambda}");
        assert!(!set.critical);
    }
    let critical = ode::equilibria(4.0f64);
    assert!(critical.critical);
    assert_eq!(critical.points.len(), 2);
    assert!((critical.points[1].b - 0.25).abs() <= 1e-12);
    assert!((critical.points[1].g - 0.25).abs() <= 1e-12);
    for lambda in [4.1f64, 5.0, 8.0] {
        let set = ode::equilibria(lambda);
        assert_eq!(set.points.len(), 3, "lambda={lambda}");
        assert!(!set.critical);
    }
    let mut worst: f64 = 0.0;
    for lambda in [1.0f64, 2.0, 3.0, 3.9, 4.0, 4.1, 5.0, 8.0] {
        for p in ode::equilibria(lambda).points {
            let (db, dg) = ode::vector_field(p, lambda);
            let residual = db.abs() + dg.abs();
            assert!(residual <= 1e-10, "residual {residual} at lambda={lambda}");
            worst = worst.max(residual);
        }
    }
    println!("criterion 01 PASS: equilibrium counts 1/2/3 across the threshold, max residual {worst:.2e}");
}

/// Criterion 2: subcritical extinction at lambda=2 — censored fraction
/// <= 1% and tau_median grows against ln n with slope <= 3, R^2 >= 0.9.
#[test]
fn criterion_02_subcritical_extinction_scaling() {
    let sizes = [100u64, 200, 400, 800];
    let mut log_n = Vec::new();
    let mut medians = Vec::new();
    for &n in &sizes {
        let mut cfg = config(ExperimentKind::Sweep);
        cfg.n_list = vec![n];
        cfg.lambda_list = vec![2.0];
        cfg.replicas = 1_000;
        cfg.horizon = 10.0 * (n as f64).ln();
        let row = run_sweep(&cfg).unwrap().pop().unwrap();
        let censored_fraction = row.survived_count as f64 / row.replicas as f64;
        assert!(
            censored_fraction <= 0.01,
            "n={n}: censored fraction {censored_fraction}"
        );
        log_n.push((n as f64).ln());
        medians.push(row.tau_median.expect("extinctions observed"));
    }
    let (slope, _, r2) = stats::linear_fit(&log_n, &medians);
    assert!(slope <= 3.0, "slope {slope}");
    assert!(r2 >= 0.9, "R^2 {r2}");
    println!(
        "criterion 02 PASS: tau_median vs ln n slope {slope:.3}, R^2 {r2:.4}, medians {medians:?}"
    );
}

/// Criterion 3: supercritical survival at lambda=6, n=200 — survived
/// fraction >= 0.99 at horizon 1e3.
#[test]
fn criterion_03_supercritical_survival() {
    let mut cfg = config(ExperimentKind::Sweep);
    cfg.n_list = vec![200];
    cfg.lambda_list = vec![6.0];
    cfg.replicas = 100;
    cfg.horizon = 1e3;
    let row = run_sweep(&cfg).unwrap().pop().unwrap();
    let survived = row.survived_count as f64 / row.replicas as f64;
    assert!(survived >= 0.99, "survived fraction {survived}");
    println!(
        "criterion 03 PASS: survived fraction {survived} over horizon 1e3 ({} extinct)",
        row.extinct_count
    );
}

/// Criterion 4: mean-field deviation at lambda=3, T=5, epsilon=0.05 —
/// exceedance fraction <= 0.05 at n=1e4 and non-increasing (within
/// two-sided binomial error at z=2.576) as n doubles from 1e3 to 8e3.
#[test]
fn criterion_04_meanfield_convergence() {
    let mut cfg = config(ExperimentKind::MeanField);
    cfg.n_list = vec![1_000, 2_000, 4_000, 8_000, 10_000];
    cfg.lambda_list = vec![3.0];
    cfg.replicas = 100;
    cfg.horizon = 5.0;
    let rows = run_meanfield(&cfg).unwrap();
    let fractions: Vec<f64> = rows
        .iter()
        .map(|r| r.exceed_count as f64 / r.replicas as f64)
        .collect();

    let at_10k = rows.iter().find(|r| r.n == 10_000).unwrap();
    let frac_10k = at_10k.exceed_count as f64 / at_10k.replicas as f64;
    assert!(frac_10k <= 0.05, "exceed fraction {frac_10k} at n=1e4");

    let replicas = cfg.replicas as f64;
    for w in fractions[..4].windows(2) {
        let (p1, p2) = (w[0], w[1]);
        let se = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / replicas).sqrt();
        assert!(
            p2 <= p1 + 2.576 * se,
            "exceed fraction increased beyond binomial error: {p1} -> {p2}"
        );
    }
    println!(
        "criterion 04 PASS: exceed fractions {fractions:?} for n = 1e3..8e3, 1e4 (epsilon 0.05)"
    );
}

/// Criterion 5: lumping oracle at n=6, lambda=1.5, T=2 — total-variation
/// distance of the two empirical laws <= 0.02 at 1e5 replicas each.
#[test]
fn criterion_05_lumping_oracle() {
    let mut cfg = config(ExperimentKind::Lumping);
    cfg.n_list = vec![6];
    cfg.lambda_list = vec![1.5];
    cfg.replicas = 100_000;
    cfg.horizon = 2.0;
    let row = run_lumping_check(&cfg).unwrap().pop().unwrap();
    assert!(row.tv_distance <= 0.02, "TV distance {}", row.tv_distance);
    println!(
        "criterion 05 PASS: TV distance {:.5} between reduced and per-vertex laws (init ({}, {}))",
        row.tv_distance, row.init_b, row.init_g
    );
}

/// Criterion 6: coupling audit — repaired variant violation-free over 1e4
/// replicas x {n=20,100} x {lambda=1,3,6}; marginal consistency exact on
/// 1e3 random instances; the verbatim one-step counterexample reproduces.
#[test]
fn criterion_06_coupling_audit() {
    let mut cfg = config(ExperimentKind::CouplingAudit);
    cfg.n_list = vec![20, 100];
    cfg.lambda_list = vec![1.0, 3.0, 6.0];
    cfg.replicas = 10_000;
    cfg.horizon = 5.0;
    let rows = run_coupling_audit(&cfg).unwrap();
    let mut verbatim_violations = 0u64;
    for row in &rows {
        if row.variant == "repaired" {
            assert_eq!(
                row.violation_replicas, 0,
                "repaired violations at n={}, lambda={}",
                row.n, row.lambda
            );
        } else {
            verbatim_violations += row.violation_replicas;
        }
    }

    let mut rng = RngStream::new(MASTER_SEED, 424_242);
    for _ in 0..1_000 {
        let n = 1 + rng.below(200);
        let lambda = 0.05 + rng.u01_half_open() * 8.0;
        let params = semicp_core::chain::ModelParams::new(n, lambda).unwrap();
        let b1 = rng.below(n + 1);
        let g1 = rng.below(n - b1 + 1);
        let b2 = rng.below(n + 1);
        let g2 = rng.below(n - b2 + 1);
        let pair = PairState::new(Counts::new(b1, g1), Counts::new(b2, g2));
        for variant in CouplingVariant::ALL {
            let report = marginal_consistency(pair, &params, variant);
            assert!(report.is_exact(), "marginal mismatch at {pair:?}");
        }
    }

    // Deterministic verbatim counterexample from ((2,0),(1,1)).
    let start = PairState::new(Counts::new(2, 0), Counts::new(1, 1));
    assert!(start.ordered());
    let params = semicp_core::chain::ModelParams::new(10, 1.0).unwrap();
    let rows_v = coupling::coupling_rates(start, &params, CouplingVariant::Verbatim);
    let lone = rows_v
        .iter()
        .find(|r| r.delta1 == (-1, 0) && r.delta2 == (0, 0))
        .expect("lone B1-death row");
    assert_eq!(lone.rate, 1.0);
    let after = PairState::new(Counts::new(1, 0), Counts::new(1, 1));
    assert!(!dominates(after.s1, after.s2));
    println!(
        "criterion 06 PASS: repaired violation-free, verbatim counterexample reproduced \
         (rate {} step to ((1,0),(1,1))), {} verbatim violation replicas observed, \
         1e3 marginal audits exact",
        lone.rate, verbatim_violations
    );
}

/// Criterion 7: domination coupling at the lambda=5 reference design,
/// n=2000 — zero violations of (B >= Bhat, B+G >= Shat) before gamma
/// across 1e3 seeds.
#[test]
fn criterion_07_domination_coupling() {
    let design = survival::design_survival(5.0f64, 0.02, Some(0.01)).unwrap();
    let n = 2_000u64;
    let init = pivot_counts(&design, n);
    let results: Vec<(usize, Option<f64>)> = (0..1_000u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(MASTER_SEED, 700_000 + rep);
            let run = coupling::simulate_domination(init, init, &design, n, 10.0, &mut rng)
                .expect("pivot inside the box");
            (run.violations.len(), run.gamma)
        })
        .collect();
    let total_violations: usize = results.iter().map(|(v, _)| v).sum();
    let exits = results.iter().filter(|(_, g)| g.is_some()).count();
    assert_eq!(total_violations, 0, "domination violations observed");
    println!(
        "criterion 07 PASS: 0 violations across 1000 seeds ({exits} box exits recorded, init {init:?})"
    );
}

/// Criterion 8: envelope chain closed forms at n=1000, theta=1 — empirical
/// mean within 5% of h(t) at t in {1,3,5} (1e5 replicas) and extinction
/// fraction by (1+theta/2) ln n at least 1 - n^{-theta/(2 theta+6)}.
#[test]
fn criterion_08_envelope_chain_closed_forms() {
    let n = 1_000u64;
    let theta = 1.0;
    let params = TildeParams::new(theta, n).unwrap();

    let probes = [1.0, 3.0, 5.0];
    let replicas = 100_000u64;
    let sums: Vec<[u64; 3]> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(MASTER_SEED, 800_000 + rep);
            let traj = tilde::simulate_tilde(&params, 5.0, &mut rng);
            probes.map(|t| traj.value_at(t))
        })
        .collect();
    let mut rel_errors = [0.0f64; 3];
    for (i, &probe) in probes.iter().enumerate() {
        let values: Vec<f64> = sums.iter().map(|s| s[i] as f64).collect();
        let empirical = stats::mean(&values);
        let expected = tilde::tilde_mean(probe, n, theta);
        rel_errors[i] = (empirical - expected).abs() / expected;
        assert!(
            rel_errors[i] <= 0.05,
            "mean at t={probe}: {empirical} vs h {expected}"
        );
    }

    let deadline = tilde::tilde_deadline(n, theta);
    let bound = tilde::tilde_extinction_bound(n, theta);
    let ext_replicas = 10_000u64;
    let extinct: u64 = (0..ext_replicas)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(MASTER_SEED, 900_000 + rep);
            let traj = tilde::simulate_tilde(&params, deadline, &mut rng);
            traj.extinction.is_some() as u64
        })
        .sum();
    let fraction = extinct as f64 / ext_replicas as f64;
    assert!(
        fraction >= bound,
        "extinction fraction {fraction} below bound {bound}"
    );
    assert!((bound - 0.5783).abs() < 1e-4);
    println!(
        "criterion 08 PASS: mean rel errors {rel_errors:?} at t=1,3,5; extinction {fraction:.4} >= bound {bound:.4}"
    );
}

/// Criterion 9: envelope domination — the solution from (1,0) obeys both
/// subcritical decay bounds pointwise on [0,20] with 1e-6 slack.
#[test]
fn criterion_09_envelope_domination() {
    for lambda in [1.0f64, 2.0, 3.0, 3.9] {
        let path = ode::integrate(OdeState::new(1.0, 0.0), lambda, 20.0, 1e-3).unwrap();
        for (i, s) in path.states().iter().enumerate() {
            let t = path.time_of(i);
            let (b_bound, g_bound) = ode::decay_envelope(lambda, t).unwrap();
            assert!(s.b <= b_bound + 1e-6, "b bound at t={t}, lambda={lambda}");
            assert!(s.g <= g_bound + 1e-6, "g bound at t={t}, lambda={lambda}");
        }
    }
    println!("criterion 09 PASS: both decay envelopes hold pointwise on [0,20] for lambda in {{1,2,3,3.9}}");
}

/// Criterion 10: design feasibility and arithmetic — designs exist for
/// lambda in {4.5,5,6,8}; the (5, 0.02, 0.01) constants match hand values
/// to 1e-9; the domination rate bounds hold exhaustively on the scaled box
/// at n=500.
#[test]
fn criterion_10_design_feasibility_and_arithmetic() {
    for lambda in [4.5f64, 5.0, 6.0, 8.0] {
        let beta = survival::default_beta(lambda);
        survival::design_survival(lambda, beta, None)
            .unwrap_or_else(|e| panic!("no design at lambda={lambda}: {e}"));
    }

    let d = survival::design_survival(5.0f64, 0.02, Some(0.01)).unwrap();
    let hand = [
        (d.b0, 0.3),
        (d.g0, 0.22),
        (d.g_lo, 0.2118),
        (d.g_hi, 0.2282),
        (d.lambda * (1.0 - d.alpha) * d.g_lo, 1.048410),
        (d.g_hi + d.lambda * (1.0 + d.alpha) * d.b0 * d.g_hi, 0.5739230),
        (d.q1, 0.7050780),
        (d.q2, 0.5312),
        (d.d, 0.003),
        (d.t4, 1.25e-4),
    ];
    for (got, want) in hand {
        assert!((got - want).abs() <= 1e-9, "{got} vs hand value {want}");
    }
    let rates = hat_rates(&d, 1000);
    for (got, want) in [
        (rates.d_joint, 303.0),
        (rates.d_s, 228.2),
        (rates.b_birth, 314.523),
        (rates.s_birth, 705.078),
    ] {
        assert!((got - want).abs() <= 1e-9, "hat rate {got} vs {want}");
    }

    // Exhaustive rate bounds on the scaled box at n=500.
    let n = 500u64;
    let hat = hat_rates(&d, n);
    let r = d.lambda / n as f64;
    let mut states_checked = 0u64;
    for b in 0..=n as i64 {
        for s in b..=n as i64 {
            if !d.bounds.contains_scaled(n, b, s) {
                continue;
            }
            states_checked += 1;
            let g = s - b;
            assert!(b as f64 <= hat.d_joint, "F1 bound fails at ({b},{g})");
            assert!(g as f64 <= hat.d_s, "F2 bound fails at ({b},{g})");
            assert!(r * (b * g) as f64 >= hat.b_birth, "F3 bound fails at ({b},{g})");
            assert!(
                r * (b * (n as i64 - s)) as f64 >= hat.s_birth,
                "F4 bound fails at ({b},{g})"
            );
        }
    }
    assert!(states_checked > 0);
    println!(
        "criterion 10 PASS: designs feasible for lambda in {{4.5,5,6,8}}; reference constants match to 1e-9; \
         rate bounds exhaustive over {states_checked} box states at n=500"
    );
}
