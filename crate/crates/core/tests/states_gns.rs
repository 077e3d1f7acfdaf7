mod common;

use std::sync::Arc;

use common::*;
use fermi_klein::fixtures::{self, pauli_x};
use fermi_klein::graded::{GradedAlgebra, GradingSpec, DEFAULT_TOLERANCE};
use fermi_klein::hilbert::{fermi_op_product, GradedHilbert};
use fermi_klein::linalg::{c, diag, trace, CMatrix};
use fermi_klein::product::{product_state_n, ProductKind};
use fermi_klein::states::{check_product_gns_equivalence, product_state_fermi, StateFunctional};
use fermi_klein::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arc(a: GradedAlgebra) -> Arc<GradedAlgebra> {
    Arc::new(a)
}

fn pure_m2() -> StateFunctional {
    StateFunctional::new(arc(fixtures::m2()), diag(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap()
}

fn faithful_m2() -> StateFunctional {
    StateFunctional::new(arc(fixtures::m2()), diag(&[c(0.7, 0.0), c(0.3, 0.0)])).unwrap()
}

fn scalars() -> Arc<GradedAlgebra> {
    arc(GradedAlgebra::new(vec![eye(1)], GradingSpec::trivial(1), DEFAULT_TOLERANCE).unwrap())
}

#[test]
fn trace_on_m2_is_even() {
    assert!(StateFunctional::normalized_trace(arc(fixtures::m2())).unwrap().is_even());
}

#[test]
fn half_half_state_on_swap_algebra_is_even() {
    let a = arc(fixtures::abelian_swap());
    let phi = StateFunctional::normalized_trace(a).unwrap();
    let p = half_projection(&pauli_x(), 1.0);
    let q = half_projection(&pauli_x(), -1.0);
    assert!((phi.evaluate(&p) - c(0.5, 0.0)).norm() < 1e-12);
    assert!((phi.evaluate(&q) - c(0.5, 0.0)).norm() < 1e-12);
    assert!(phi.is_even());
}

#[test]
fn point_state_on_swap_algebra_is_not_even() {
    let a = arc(fixtures::abelian_swap());
    let p = half_projection(&pauli_x(), 1.0);
    let delta = StateFunctional::new(a, p.clone()).unwrap();
    assert!((delta.evaluate(&p) - c(1.0, 0.0)).norm() < 1e-12);
    assert!(!delta.is_even());
    assert!(delta.even_residual() > 0.5);
}

#[test]
fn negative_density_is_rejected() {
    let err = StateFunctional::new(arc(fixtures::m2()), diag(&[c(1.5, 0.0), c(-0.5, 0.0)])).unwrap_err();
    assert!(matches!(err, Error::StateInvalid(_)));
}

#[test]
fn faithful_state_on_m2() {
    let phi = faithful_m2();
    let gns = phi.gns().unwrap();
    assert_eq!(gns.gns_dim, 4);
    assert!(gns.validate().passed());
    assert!(phi.has_central_support().unwrap());
}

#[test]
fn pure_corner_state_on_m2() {
    let phi = pure_m2();
    let gns = phi.gns().unwrap();
    assert_eq!(gns.gns_dim, 2);
    assert!(gns.validate().passed());
    assert!(!phi.has_central_support().unwrap());
}

#[test]
fn scalar_algebra_has_one_dimensional_gns() {
    let phi = StateFunctional::normalized_trace(scalars()).unwrap();
    let gns = phi.gns().unwrap();
    assert_eq!(gns.gns_dim, 1);
    assert!((gns.rep[0][[0, 0]] - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn abelian_states_have_central_support() {
    let a = arc(fixtures::abelian_swap());
    let p = half_projection(&pauli_x(), 1.0);
    let mixed = (&p.mapv(|z| z * 0.8) + &half_projection(&pauli_x(), -1.0).mapv(|z| z * 0.2)).to_owned();
    for density in [p, mixed] {
        let phi = StateFunctional::new(a.clone(), density).unwrap();
        assert!(phi.has_central_support().unwrap());
    }
}

#[test]
fn product_of_half_states_is_normalized_trace() {
    let a = arc(fixtures::abelian_swap());
    let phi = StateFunctional::normalized_trace(a).unwrap();
    let omega = product_state_fermi(&phi, &phi).unwrap();
    assert!(omega.is_even());
    for b in omega.algebra().basis() {
        let expected = trace(b) / 4.0;
        assert!((omega.evaluate(b) - expected).norm() < 1e-12);
    }
}

#[test]
fn product_state_marginal_and_odd_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m2 = arc(fixtures::m2());
    let omega = StateFunctional::random_even(m2.clone(), &mut rng).unwrap();
    let phi = StateFunctional::random_even(m2.clone(), &mut rng).unwrap();
    let prod = product_state_fermi(&omega, &phi).unwrap();
    let h = GradedHilbert::of_algebra(&m2).unwrap();
    let hb = m2.homogeneous_basis();
    for (a, pa) in hb.elements() {
        let marginal = prod.evaluate(&fermi_op_product(a, &eye(2), &h, &h).unwrap());
        assert!((marginal - omega.evaluate(a)).norm() < 1e-12);
        for (b, pb) in hb.elements() {
            let value = prod.evaluate(&fermi_op_product(a, b, &h, &h).unwrap());
            if pa.is_odd() && pb.is_odd() {
                assert!(value.norm() < 1e-12);
            }
            if !pb.is_odd() {
                assert!((value - omega.evaluate(a) * phi.evaluate(b)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn product_state_requires_even_legs() {
    let a = arc(fixtures::abelian_swap());
    let delta = StateFunctional::new(a.clone(), half_projection(&pauli_x(), 1.0)).unwrap();
    let phi = StateFunctional::normalized_trace(a).unwrap();
    assert!(matches!(product_state_fermi(&delta, &phi), Err(Error::NotEven { .. })));
    assert!(matches!(product_state_fermi(&phi, &delta), Err(Error::NotEven { .. })));
}

#[test]
fn equivalence_for_traces_on_m2() {
    let tr = StateFunctional::normalized_trace(arc(fixtures::m2())).unwrap();
    let report = check_product_gns_equivalence(&tr, &tr).unwrap();
    assert!(report.passed(), "{report:?}");
    assert_eq!(product_state_fermi(&tr, &tr).unwrap().gns().unwrap().gns_dim, 16);
}

#[test]
fn equivalence_for_half_states() {
    let phi = StateFunctional::normalized_trace(arc(fixtures::abelian_swap())).unwrap();
    let report = check_product_gns_equivalence(&phi, &phi).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn equivalence_for_scalar_legs() {
    let phi = StateFunctional::normalized_trace(scalars()).unwrap();
    let report = check_product_gns_equivalence(&phi, &phi).unwrap();
    assert!(report.passed(), "{report:?}");
    assert_eq!(product_state_fermi(&phi, &phi).unwrap().gns().unwrap().gns_dim, 1);
}

#[test]
fn central_support_survives_finite_products() {
    for n in [2, 3] {
        let (_, faithful) = product_state_n(&faithful_m2(), n, ProductKind::Fermi).unwrap();
        assert!(faithful.has_central_support().unwrap(), "faithful n={n}");
        let (_, pure) = product_state_n(&pure_m2(), n, ProductKind::Fermi).unwrap();
        assert!(!pure.has_central_support().unwrap(), "pure n={n}");
    }
}

#[test]
fn separating_criterion_matches_explicit_commutant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut states = vec![faithful_m2(), pure_m2()];
    states.push(StateFunctional::random_even(arc(fixtures::m3()), &mut rng).unwrap());
    states.push(StateFunctional::random_even(arc(fixtures::m2_plus_m2()), &mut rng).unwrap());
    for base in [faithful_m2(), pure_m2()] {
        states.push(product_state_n(&base, 2, ProductKind::Fermi).unwrap().1);
    }
    states.push(StateFunctional::new(arc(fixtures::m3()), diag(&[c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)])).unwrap());
    for phi in states {
        let gns = phi.gns().unwrap();
        assert_eq!(gns.has_central_support(), gns.has_central_support_via_commutant());
    }
}

#[test]
fn convex_combination_is_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m3 = arc(fixtures::m3());
    let a = StateFunctional::random_even(m3.clone(), &mut rng).unwrap();
    let b = StateFunctional::random_even(m3.clone(), &mut rng).unwrap();
    let mix = StateFunctional::convex_combination(&[a.clone(), b.clone()], &[0.25, 0.75]).unwrap();
    let expected: Vec<_> = a.values().iter().zip(b.values()).map(|(x, y)| x * 0.25 + y * 0.75).collect();
    assert!(value_diff(&mix.values(), &expected) < 1e-12);
}

fn algebra(which: usize) -> Arc<GradedAlgebra> {
    arc(match which {
        0 => fixtures::m2(),
        1 => fixtures::m2_plus_m2(),
        2 => fixtures::m3(),
        3 => fixtures::car2(),
        _ => fixtures::m2_standard_form(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gns_reconstructs_and_is_covariant(seed in any::<u64>(), which in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = StateFunctional::random_even(algebra(which), &mut rng).unwrap();
        let gns = phi.gns().unwrap();
        prop_assert!(gns.reconstruction_residual() < 1e-9);
        let cov = gns.covariance_residuals().expect("even state has an implementer");
        for r in cov {
            prop_assert!(r < 1e-9, "covariance residuals {cov:?}");
        }
        prop_assert!(gns.validate().passed());
    }

    #[test]
    fn random_even_states_are_even_and_normalized(seed in any::<u64>(), which in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alg = algebra(which);
        let phi = StateFunctional::random_even(alg.clone(), &mut rng).unwrap();
        prop_assert!(phi.is_even());
        prop_assert!((phi.evaluate(alg.unit()) - c(1.0, 0.0)).norm() < 1e-12);
        let rho: &CMatrix = phi.density();
        prop_assert!(fermi_klein::linalg::hermitian_residual(rho) < 1e-12);
    }
}
