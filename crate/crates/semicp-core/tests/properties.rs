//! Cross-module invariants: order axioms, rate bounds, region invariance,
//! and randomized path validity.

use proptest::prelude::*;
use semicp_core::chain::{self, Counts, EventKind, ModelParams};
use semicp_core::coupling::{dominates, marginal_consistency, CouplingVariant, PairState};
use semicp_core::ode::{self, OdeState};
use semicp_core::rng::RngStream;
use semicp_core::tilde;

fn all_states(n: u64) -> Vec<Counts> {
    let mut out = Vec::new();
    for b in 0..=n {
        for g in 0..=(n - b) {
            out.push(Counts::new(b, g));
        }
    }
    out
}

#[test]
fn partial_order_axioms_exhaustive_n10() {
    let states = all_states(10);
    for &a in &states {
        assert!(dominates(a, a), "reflexivity fails at {a:?}");
    }
    for &a in &states {
        for &b in &states {
            if dominates(a, b) && dominates(b, a) {
                assert!(
                    a.b == b.b && a.b + a.g == b.b + b.g,
                    "antisymmetry fails: {a:?} vs {b:?}"
                );
            }
            for &c in &states {
                if dominates(a, b) && dominates(b, c) {
                    assert!(dominates(a, c), "transitivity fails: {a:?} {b:?} {c:?}");
                }
            }
        }
    }
}

#[test]
fn total_jump_rate_is_bounded_and_jumps_are_small() {
    // Rate bound (1 + lambda) n on every state; every event moves the l1
    // norm by at most 2.
    let mut rng = RngStream::new(0xB0B, 0);
    for _ in 0..2000 {
        let n = 1 + rng.below(500);
        let lambda = 0.1 + rng.u01_half_open() * 8.0;
        let params = ModelParams::new(n, lambda).unwrap();
        let b = rng.below(n + 1);
        let g = rng.below(n - b + 1);
        let rates = chain::transition_rates(Counts::new(b, g), &params).unwrap();
        assert!(
            rates.total() <= (1.0 + lambda) * n as f64 * (1.0 + 1e-12),
            "rate bound fails at ({b},{g}), n={n}, lambda={lambda}"
        );
    }
    for kind in EventKind::ALL {
        let (db, dg) = kind.delta();
        assert!(db.abs() + dg.abs() <= 2);
    }
}

#[test]
fn subcritical_envelope_rate_identity() {
    // Whenever G <= n theta / ((theta + 3) lambda), the promotion rate is
    // at most the envelope-chain birth rate theta B / (theta + 3).
    for n in [1u64, 7, 50, 200] {
        for (lambda, theta) in [(1.5, 1.0), (3.9, 0.5), (2.0, 0.25)] {
            let params = ModelParams::new(n, lambda).unwrap();
            let cutoff = n as f64 * theta / ((theta + 3.0) * lambda);
            for b in 0..=n {
                for g in 0..=(n - b) {
                    if (g as f64) <= cutoff {
                        let promote = chain::transition_rates(Counts::new(b, g), &params)
                            .unwrap()
                            .promote;
                        let envelope_birth = theta * b as f64 / (theta + 3.0);
                        assert!(
                            promote <= envelope_birth * (1.0 + 1e-12) + 1e-15,
                            "envelope fails at n={n}, b={b}, g={g}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn tilde_dominates_promotion_under_threshold_in_law() {
    // Sanity link of the two rate functions at the threshold itself.
    let n = 120u64;
    let theta = 1.0;
    let lambda = 2.0;
    let g_cut = (n as f64 * theta / ((theta + 3.0) * lambda)).floor() as u64;
    let params = ModelParams::new(n, lambda).unwrap();
    for b in 1..=(n - g_cut) {
        let promote = chain::transition_rates(Counts::new(b, g_cut), &params)
            .unwrap()
            .promote;
        let (_, birth) = tilde::tilde_rates(b, theta);
        assert!(promote <= birth * (1.0 + 1e-12));
    }
}

#[test]
fn invariant_region_holds_from_random_interior_points() {
    let mut rng = RngStream::new(0x1A1A, 0);
    for lambda in [1.0, 2.0, 4.0, 6.0] {
        for _ in 0..100 {
            let b = rng.u01_half_open();
            let g = rng.u01_half_open() * (1.0 - b);
            let path = ode::integrate(OdeState::new(b, g), lambda, 10.0, 1e-3)
                .expect("interior start never exits");
            for s in path.states() {
                assert!(s.in_region(1e-9));
            }
        }
    }
}

#[test]
fn equilibrium_count_scans_the_threshold() {
    let expected = [
        (3.0, 0usize),
        (3.5, 0),
        (3.9, 0),
        (4.0, 1),
        (4.1, 2),
        (5.0, 2),
        (8.0, 2),
    ];
    for (lambda, positive) in expected {
        let set = ode::equilibria(lambda);
        let found = set.points.iter().filter(|p| p.b > 0.0).count();
        assert_eq!(found, positive, "lambda={lambda}");
        assert_eq!(set.critical, lambda == 4.0, "lambda={lambda}");
    }
}

#[test]
fn kernels_instantiate_at_f32() {
    // The numeric kernels are scalar-generic; exercise the f32 instantiation
    // end to end at f32-appropriate tolerances.
    let set = ode::equilibria(5.0f32);
    assert_eq!(set.points.len(), 3);
    assert!((set.points[2].b - 0.523_606_8f32).abs() < 1e-5);
    assert!(ode::equilibria(4.0f32).critical);

    let path = ode::integrate(ode::OdeState::new(1.0f32, 0.0), 2.0, 10.0, 1e-3).unwrap();
    assert!(path.final_state().l1_norm() < 0.05);

    let env = ode::decay_envelope_params(2.0f32);
    assert!((env.g_star - 0.190_983f32).abs() < 1e-5);

    let design = semicp_core::survival::design_survival(5.0f32, 0.02, Some(0.01)).unwrap();
    assert!((design.q1 - 0.705_078f32).abs() < 1e-5);

    let params = ModelParams::new(50, 2.0f32).unwrap();
    let mut rng = RngStream::new(12, 0);
    let traj = chain::simulate(&params, Counts::new(50, 0), 100.0f32, &mut rng).unwrap();
    traj.validate(&params).unwrap();
}

#[test]
fn single_vertex_chain_agrees_with_per_vertex_simulation() {
    // n = 1 from (1, 0): the only transition is death at rate 1, so
    // P(alive at T) = exp(-T) under both simulators.
    let params = ModelParams::new(1, 3.0).unwrap();
    let horizon = 0.7;
    let replicas = 40_000u64;
    let mut alive_reduced = 0u64;
    let mut alive_full = 0u64;
    for rep in 0..replicas {
        let mut rng = RngStream::new(0x0E11, rep);
        let traj = chain::simulate(&params, Counts::new(1, 0), horizon, &mut rng).unwrap();
        alive_reduced += traj.censored as u64;
        let cfg = semicp_core::full::FullConfiguration::from_counts(Counts::new(1, 0), 1).unwrap();
        let mut rng = RngStream::new(0x0E12, rep);
        let traj = semicp_core::full::simulate_full(&params, &cfg, horizon, &mut rng).unwrap();
        alive_full += traj.censored as u64;
    }
    let expected = (-horizon as f64).exp();
    let tol = 3.0 * (expected * (1.0 - expected) / replicas as f64).sqrt();
    for alive in [alive_reduced, alive_full] {
        let frac = alive as f64 / replicas as f64;
        assert!(
            (frac - expected).abs() <= tol + 1e-3,
            "survival fraction {frac} vs exp(-T) {expected}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_trajectories_are_valid(
        n in 1u64..80,
        lambda in 0.2f64..7.0,
        seed in 0u64..u64::MAX,
        horizon in 0.5f64..40.0,
    ) {
        let params = ModelParams::new(n, lambda).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let init = Counts::new(n, 0);
        let traj = chain::simulate(&params, init, horizon, &mut rng).unwrap();
        traj.validate(&params).unwrap();
        // Absorption: nothing recorded past the first b = 0 state.
        if let Some(pos) = traj.states.iter().position(|s| s.b == 0) {
            prop_assert_eq!(pos, traj.states.len() - 1);
        }
    }

    #[test]
    fn marginals_stay_exact_on_random_pairs(
        n in 1u64..120,
        lambda in 0.1f64..8.0,
        seed in 0u64..u64::MAX,
    ) {
        let params = ModelParams::new(n, lambda).unwrap();
        let mut rng = RngStream::new(seed, 1);
        let b1 = rng.below(n + 1);
        let g1 = rng.below(n - b1 + 1);
        let b2 = rng.below(n + 1);
        let g2 = rng.below(n - b2 + 1);
        let pair = PairState::new(Counts::new(b1, g1), Counts::new(b2, g2));
        for variant in CouplingVariant::ALL {
            prop_assert!(marginal_consistency(pair, &params, variant).is_exact());
        }
    }

    #[test]
    fn order_is_decided_by_coordinates(a_b in 0u64..12, a_g in 0u64..12, b_b in 0u64..12, b_g in 0u64..12) {
        let a = Counts::new(a_b, a_g);
        let b = Counts::new(b_b, b_g);
        prop_assert_eq!(dominates(a, b), a_b >= b_b && a_b + a_g >= b_b + b_g);
    }
}
