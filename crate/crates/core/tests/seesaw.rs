use std::f64::consts::FRAC_1_SQRT_2;

use bellforge::embezzlement::StructuredEngine;
use bellforge::games::{build_tchsh, shipped_emb, strategy_value, NonlocalGame};
use bellforge::numerics::principal_eigvec;
use bellforge::seesaw::{bell_operator, optimize, optimize_ladder, SeesawConfig, SeesawReport};
use bellforge::strategies::{ideal_tchsh, validate_strategy};

fn run_with_threads(threads: usize, g: &NonlocalGame, cfg: &SeesawConfig) -> SeesawReport {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| optimize(g, cfg).unwrap())
}

fn check_report(g: &NonlocalGame, report: &SeesawReport) {
    let direct = strategy_value(g, &report.best_strategy).unwrap();
    assert!((direct - report.best_value).abs() < 1e-10);
    assert!(validate_strategy(&report.best_strategy).max_defect() < 1e-8);
    for r in &report.restarts {
        assert!(r.trajectory.len() <= 1000);
        for w in r.trajectory.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9, "restart {}: {:?}", r.restart, w);
        }
    }
}

#[test]
fn chsh_bell_operator_top_eigenvalue() {
    let g = build_tchsh(1.0, false).unwrap();
    let b = bell_operator(&g, &ideal_tchsh(1.0, false).unwrap()).unwrap();
    assert!(b.is_hermitian());
    let (top, _) = principal_eigvec(&b).unwrap();
    assert!((top - FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn zero_scores_give_zero_operator() {
    let g = NonlocalGame::constant("zero", (2, 2, 2, 2), 0.0).unwrap();
    let b = bell_operator(&g, &ideal_tchsh(1.0, false).unwrap()).unwrap();
    assert_eq!(b.max_abs(), 0.0);
}

#[test]
fn reaches_known_optima_at_qubit_dimension() {
    let mut cfg = SeesawConfig::new(2, 2);
    cfg.seed = 3;
    let chsh = build_tchsh(1.0, false).unwrap();
    let report = optimize(&chsh, &cfg).unwrap();
    check_report(&chsh, &report);
    assert!(report.best_value >= FRAC_1_SQRT_2 - 1e-4);
    assert!(report.best_value <= FRAC_1_SQRT_2 + 1e-9);

    let tilted = build_tchsh(FRAC_1_SQRT_2, true).unwrap();
    let report = optimize(&tilted, &cfg).unwrap();
    check_report(&tilted, &report);
    assert!(report.best_value >= 3.0 / 17f64.sqrt() - 1e-4);
    assert!(report.best_value <= 3.0 / 17f64.sqrt() + 1e-9);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let (g, _) = shipped_emb();
    let mut cfg = SeesawConfig::new(3, 3);
    cfg.restarts = 3;
    cfg.max_iters = 60;
    cfg.seed = 11;
    let one = run_with_threads(1, &g, &cfg);
    let three = run_with_threads(3, &g, &cfg);
    assert_eq!(one.best_value.to_bits(), three.best_value.to_bits());
    assert_eq!(one.best_restart, three.best_restart);
    assert_eq!(one.summary_json(), three.summary_json());
    check_report(&g, &one);
}

#[test]
fn emb_ladder_stays_below_ideal() {
    let (g, _) = shipped_emb();
    let ideal = StructuredEngine::shipped().ideal_value();
    let mut cfg = SeesawConfig::new(3, 3);
    cfg.restarts = 3;
    cfg.max_iters = 200;
    let ladder = optimize_ladder(&g, &[(3, 3), (6, 6)], &cfg).unwrap();
    for w in ladder.windows(2) {
        assert!(w[1].best_value >= w[0].best_value - 1e-12);
    }
    for r in &ladder {
        check_report(&g, r);
        assert!(r.best_value <= ideal - 10.0 * cfg.tol);
    }
}

#[test]
fn oversized_search_is_refused() {
    let (g, _) = shipped_emb();
    let err = optimize(&g, &SeesawConfig::new(120, 120)).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let mut cfg = SeesawConfig::new(2, 2);
    cfg.restarts = 0;
    assert_eq!(optimize(&g, &cfg).unwrap_err().exit_code(), 2);
}
