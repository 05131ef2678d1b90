mod common;

use cilp::chains::*;
use cilp::model::{checks, validate_assumptions, CheckStatus, CilpModel, Weight};
use cilp::objective::{tail_sup_ratio, Objective, TailRatio};
use cilp::truncation::build_truncation;
use common::s;
use proptest::prelude::*;
use std::collections::BTreeSet;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sublevel_sets_are_nested_and_exact(r in 1u64..5000, extra in 1u64..5000) {
        for model in [common::mm1_model(), common::walk_exit_model()] {
            let small: BTreeSet<_> = model.enumerate(r).into_iter().collect();
            let big: BTreeSet<_> = model.enumerate(r + extra).into_iter().collect();
            prop_assert!(small.is_subset(&big));
            for x in &big {
                prop_assert!(model.w(x) < (r + extra) as f64);
                prop_assert_eq!(small.contains(x), model.w(x) < r as f64);
            }
            // Direct integer-range enumeration of the monotone families.
            let direct: BTreeSet<_> = (0..200)
                .map(s)
                .filter(|x| model.w(x) < r as f64 && (model.domain().is_none_or(|d| d.contains(x))))
                .collect();
            prop_assert_eq!(&small, &direct);
        }
    }

    #[test]
    fn monomial_envelope_matches_boundary_point(r in 2u64..1_000_000) {
        let model = common::mm1_model();
        let f = Objective::monomial(1, 3).unwrap();
        let n = (1u64..).find(|n| n * n * n >= r).unwrap();
        let TailRatio::Value(v) = tail_sup_ratio(&model, &f, r) else {
            panic!("monomials carry an envelope");
        };
        prop_assert!((v - 1.0 / (n * n) as f64).abs() <= 1e-15);
        let TailRatio::Value(next) = tail_sup_ratio(&model, &f, r + 1) else { unreachable!() };
        prop_assert!(next <= v);
    }

    #[test]
    fn interior_rows_have_all_predecessors_inside(r in 2u64..20_000) {
        let model = common::mm1_model();
        let trunc = build_truncation(&model, r).unwrap();
        for x in trunc.equality_states() {
            for (p, _) in model.predecessors(x) {
                prop_assert!(trunc.contains(&p));
            }
        }
        prop_assert!(trunc.states().windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn mm1_builder_validates_with_certified_tail() {
    let report = validate_assumptions(&common::mm1_model(), 1000).unwrap();
    assert!(report.passed(), "{report:?}");
    assert!(matches!(report.status_of(checks::TAIL), Some(CheckStatus::Certified { .. })));
}

#[test]
fn finite_tail_coefficient_is_exact_and_vanishes_at_saturation() {
    let chain = family_mm1_capped(1.0, 2.0, 5).unwrap();
    let model = ct_stationary(&chain, Weight::Monomial(1), 3.0).unwrap();
    // Stationary g = 1 everywhere; outside X_3 the largest 1/w is at x = 3.
    assert!((model.tail_coefficient(3) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(model.tail_coefficient(6), 0.0);
    assert_eq!(model.state_count(), Some(6));
}

#[test]
fn ct_exit_weight_uses_exit_rate() {
    let chain = family_linear_birth_death(1.0, 2.0).unwrap();
    let model = ct_exit(&chain, Domain::interval(1, None).unwrap(), 2.0, 10.0).unwrap();
    // Total rate out of x is 3x, so w = 9 x^2 and a_r = r^{-1/2}.
    assert_eq!(model.w(&s(2)), 36.0);
    assert!((model.tail_coefficient(400) - 0.05).abs() < 1e-15);
    let ids: Vec<i64> = model.enumerate(100).iter().map(|x| x.first()).collect();
    assert_eq!(ids, vec![1, 2, 3]);
}

#[test]
fn exit_start_outside_domain_is_rejected() {
    let chain = family_random_walk(0.3).unwrap();
    assert!(dt_exit(&chain, Domain::interval(1, None).unwrap(), Weight::Monomial(2), 10.0).is_err());
}

#[test]
fn closed_form_moments() {
    assert_eq!(mm1_stationary_moment(1.0, 2.0, 3).unwrap(), 13.0);
    assert!((random_walk_occupation_moment(0.25, 2, &[(3, 1.0)]).unwrap() - 46.0).abs() < 1e-9);
    assert!(mm1_stationary_moment(2.0, 1.0, 1).is_err());
}
