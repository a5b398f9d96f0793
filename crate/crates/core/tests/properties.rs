//! Invariants of the imputation, estimators and closed forms over random
//! inputs.

use proptest::prelude::*;

use imputed_extremes::montecarlo::{table1, Table1Config};
use imputed_extremes::theory::{g_j, marginal_cdf_fj, tau_at_level, theta_y_closed_form, ClosedFormRequest};
use imputed_extremes::{
    impute, runs_extremal_index, ControlMask, ModelConfig, ProcessConfig, ProcessKind, ProcessPath,
};

fn brute_force_y(x: &[f64], u: &[bool], period: usize, n: usize) -> f64 {
    if u[n] {
        return x[n];
    }
    let start = (n - 1) / period * period;
    (start..n)
        .filter(|&i| u[i])
        .map(|i| x[i])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn path_and_mask() -> impl Strategy<Value = (Vec<f64>, Vec<bool>, usize)> {
    (2usize..6, 1usize..60).prop_flat_map(|(period, n)| {
        (
            prop::collection::vec(0.01f64..100.0, n + 1),
            prop::collection::vec(any::<bool>(), n + 1),
            Just(period),
        )
    })
}

fn build(x: Vec<f64>, mut u: Vec<bool>, period: usize) -> (ProcessPath, ControlMask) {
    for (i, a) in u.iter_mut().enumerate() {
        *a |= i % period == 0;
    }
    let path = ProcessPath {
        values: x,
        config: ProcessConfig::unit_iid(),
        seed: 0,
    };
    let mask = ControlMask { u, period, p: 0.5, seed: 0 };
    (path, mask)
}

proptest! {
    #[test]
    fn imputation_matches_its_definition((x, u, period) in path_and_mask()) {
        let (path, mask) = build(x, u, period);
        let series = impute(&path, &mask).unwrap();
        for k in 1..=series.n() {
            let want = brute_force_y(&path.values, &mask.u, period, k);
            prop_assert_eq!(series.y(k).to_bits(), want.to_bits());
            prop_assert_eq!(series.imputed(k), !mask.u[k]);
        }
    }

    #[test]
    fn controls_are_observed_and_imputations_never_decrease((x, u, period) in path_and_mask()) {
        let (path, mask) = build(x, u, period);
        let series = impute(&path, &mask).unwrap();
        for k in 1..=series.n() {
            if k % period == 0 {
                prop_assert!(!series.imputed(k));
                prop_assert_eq!(series.y(k), path.values[k]);
            }
            if series.imputed(k) && k >= 2 {
                prop_assert!(series.y(k) >= series.y(k - 1));
            }
            // an imputed value is always one of the block's earlier observations
            if series.imputed(k) {
                let start = (k - 1) / period * period;
                prop_assert!((start..k).any(|i| mask.u[i] && path.values[i] == series.y(k)));
            }
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), p in 0.05f64..1.0, period in 2usize..5) {
        let model = ModelConfig::new(ProcessConfig::armax(0.6, 1.0).unwrap(), period, p).unwrap();
        prop_assert_eq!(model.simulate(200, seed).unwrap(), model.simulate(200, seed).unwrap());
    }

    #[test]
    fn runs_estimate_is_scale_invariant(
        y in prop::collection::vec(0.0f64..10.0, 1..300),
        u in 1.0f64..8.0,
        r in 1usize..5,
        e in -4i32..5,
    ) {
        // powers of two scale exactly, so the counts must agree
        let c = 2f64.powi(e);
        let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
        match (runs_extremal_index(&y, u, r), runs_extremal_index(&scaled, u * c, r)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.exceedance_count, b.exceedance_count);
                prop_assert_eq!(a.cluster_count, b.cluster_count);
                prop_assert!(a.value > 0.0 && a.value <= 1.0);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn runs_clusters_never_exceed_exceedances(
        y in prop::collection::vec(0.0f64..10.0, 1..300),
        u in 0.5f64..9.0,
        r in 1usize..6,
    ) {
        if let Ok(e) = runs_extremal_index(&y, u, r) {
            prop_assert!(e.cluster_count >= 1 && e.cluster_count <= e.exceedance_count);
            let longer = runs_extremal_index(&y, u, r + 1).unwrap();
            prop_assert!(longer.cluster_count <= e.cluster_count);
        }
    }

    #[test]
    fn g_j_is_a_distribution_function(j in 1usize..7, p in 0.0f64..1.0, t in 0.05f64..0.95) {
        for process in [ProcessConfig::unit_iid(), ProcessConfig::moving_maxima(), ProcessConfig::armax(t, 1.0).unwrap()] {
            let far = g_j(1e12, j, &process, p).unwrap();
            prop_assert!((far - 1.0).abs() < 1e-9);
            let mut last = 0.0;
            for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
                let g = g_j(x, j, &process, p).unwrap();
                prop_assert!(g >= last - 1e-15 && g <= 1.0 + 1e-15);
                // the block maximum includes X at the control index
                prop_assert!(g <= process.marginal().cdf(x) + 1e-12);
                last = g;
            }
        }
    }

    #[test]
    fn tau_matches_the_averaged_marginals(p in 0.05f64..1.0, period in 2usize..6, t in 0.1f64..0.9) {
        let model = ModelConfig::new(ProcessConfig::armax(t, 1.0).unwrap(), period, p).unwrap();
        let (n, tau_x) = (50_000, 20.0);
        let dec = tau_at_level(&model, n, tau_x).unwrap();
        let u = imputed_extremes::normalized_level(&model.process, n, tau_x).unwrap();
        let mean_f = (0..period).map(|j| marginal_cdf_fj(u, j, &model).unwrap()).sum::<f64>() / period as f64;
        let want = n as f64 * (1.0 - mean_f);
        prop_assert!((dec.tau - want).abs() < 1e-6 * want, "{} vs {}", dec.tau, want);
        prop_assert!(dec.tau >= tau_x - 1e-9);
    }

    #[test]
    fn closed_forms_lie_in_the_unit_interval(p in 0.001f64..1.0, theta_x in 0.0f64..=1.0) {
        for (kind, period) in [(ProcessKind::Armax, 2), (ProcessKind::Armax, 3), (ProcessKind::Iid, 3)] {
            let theta_x = if kind == ProcessKind::Iid { 1.0 } else { theta_x };
            let v = theta_y_closed_form(&ClosedFormRequest { kind, p, period, theta_x }).unwrap();
            prop_assert!((0.0..=theta_x + 1e-12).contains(&v), "{kind:?} T={period}: {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn table1_is_reproducible(seed in any::<u64>()) {
        let config = Table1Config {
            p_values: vec![0.3],
            n_values: vec![50, 200],
            reps: 20,
            master_seed: seed,
            ..Table1Config::default()
        };
        prop_assert_eq!(table1(&config).unwrap(), table1(&config).unwrap());
    }
}
