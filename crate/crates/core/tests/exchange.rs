use bellforge::exchange::{
    build_exchange_strategy, exchange_row, flag_probability, ltw_bound, success_probability, ExchangeInstance,
};
use bellforge::numerics::Operator;

#[test]
fn d1_success_fixture() {
    // dense run, pinned
    let p = success_probability(&build_exchange_strategy(1).unwrap(), &ExchangeInstance::default()).unwrap();
    assert!((p - 0.853_553_390_593_273_8).abs() < 1e-12, "{p}");
    assert!(p < 1.0);
}

#[test]
fn register_bookkeeping_and_unitarity() {
    let s = build_exchange_strategy(1).unwrap();
    assert_eq!(s.local_dim(), 12);
    for d in 1..=4 {
        let s = build_exchange_strategy(d).unwrap();
        assert!(s.unitary_a().unitarity_defect() < 1e-10);
        assert!(s.unitary_b().unitarity_defect() < 1e-10);
    }
}

#[test]
fn no_flag_excitation() {
    let inst = ExchangeInstance::default();
    for d in 1..=6 {
        assert!(flag_probability(&build_exchange_strategy(d).unwrap(), &inst) < 1e-10);
    }
}

#[test]
fn swapping_embezzler_halves_is_harmless() {
    let inst = ExchangeInstance::default();
    for d in 1..=4 {
        let s = build_exchange_strategy(d).unwrap();
        let p = success_probability(&s, &inst).unwrap();
        let q = success_probability(&s.swapped(), &inst).unwrap();
        assert!((p - q).abs() < 1e-14);
    }
}

#[test]
fn referee_projectors_complete() {
    let (p0, p1) = ExchangeInstance::projectors();
    let sum = Operator::from_matrix(p0.matrix() + p1.matrix()).unwrap();
    assert_eq!(sum.max_abs_diff(&Operator::identity(8)), 0.0);
    let inst = ExchangeInstance::default();
    assert!((inst.referee_state.norm() - 1.0).abs() < 1e-15);
    assert_eq!(inst.branch_overlap(), 0.0);
}

#[test]
fn success_grows_and_stays_under_bound() {
    let inst = ExchangeInstance::default();
    let rows: Vec<_> = (1..=6).map(|d| exchange_row(d, &inst).unwrap()).collect();
    for w in rows.windows(2) {
        assert!(w[1].success_prob > w[0].success_prob);
    }
    for d in 1..=3 {
        let ratio = (1.0 - rows[2 * d - 1].success_prob) / (1.0 - rows[d - 1].success_prob);
        assert!((0.3..=0.7).contains(&ratio), "d = {d}: {ratio}");
    }
    for r in &rows {
        assert!(r.success_prob <= r.ltw_bound);
    }
}

#[test]
fn bound_formula() {
    let l = 3f64.log2();
    assert!((ltw_bound(1).unwrap() - (1.0 - 1.0 / (32.0 * l * l))).abs() < 1e-15);
    assert!((ltw_bound(1).unwrap() - 0.98756).abs() < 1e-5);
    let mut last = 0.0;
    for n in 1..200 {
        let b = ltw_bound(n).unwrap();
        assert!(b > last);
        last = b;
    }
    assert!(ltw_bound(0).is_err());
}

#[test]
fn large_index_is_refused() {
    let err = build_exchange_strategy(9).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
