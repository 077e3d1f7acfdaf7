mod common;

use std::sync::Arc;
use std::time::Instant;

use common::*;
use fermi_klein::fixtures;
use fermi_klein::graded::{center, GradedAlgebra, GradingSpec, DEFAULT_TOLERANCE};
use fermi_klein::linalg::{c, diag, CMatrix};
use fermi_klein::product::{product_state_n, ProductKind};
use fermi_klein::states::StateFunctional;
use fermi_klein::structure::{decompose, decompose_basis, run_counterexample, CounterexampleFixture};
use proptest::prelude::*;

fn diagonal_algebra(d: usize) -> GradedAlgebra {
    let basis = (0..d)
        .map(|i| diag(&(0..d).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>()))
        .collect();
    GradedAlgebra::new(basis, GradingSpec::trivial(d), DEFAULT_TOLERANCE).unwrap()
}

fn car2_pair_algebra() -> Vec<CMatrix> {
    let (s, big_s) = car2_positions();
    vec![eye(4), s.clone(), big_s.clone(), s.dot(&big_s)]
}

#[test]
fn full_m2_is_one_block() {
    let dec = decompose(&fixtures::m2()).unwrap();
    assert!(dec.is_factor());
    assert_eq!((dec.blocks[0].size, dec.blocks[0].multiplicity), (2, 1));
}

#[test]
fn diagonal_c2_is_two_blocks() {
    let dec = decompose(&diagonal_algebra(2)).unwrap();
    assert_eq!(dec.blocks.len(), 2);
    assert!(dec.blocks.iter().all(|b| b.size == 1));
}

#[test]
fn position_pair_algebra_is_m2_with_multiplicity_two() {
    let basis = car2_pair_algebra();
    let dec = decompose_basis(&basis, &eye(4), DEFAULT_TOLERANCE).unwrap();
    assert!(dec.is_factor());
    assert_eq!((dec.blocks[0].size, dec.blocks[0].multiplicity), (2, 2));
    assert!(dec.validate(&basis, &eye(4), DEFAULT_TOLERANCE).passed());
}

#[test]
fn decomposition_is_idempotent_on_a_block() {
    let alg = fixtures::m2_plus_m2();
    let dec = decompose(&alg).unwrap();
    for p in &dec.central_projections {
        let block: Vec<CMatrix> = alg.basis().iter().map(|b| p.dot(b).dot(p)).collect();
        let again = decompose_basis(&block, p, DEFAULT_TOLERANCE).unwrap();
        assert!(again.is_factor());
        assert_eq!(again.blocks[0].size, 2);
        assert!(max_abs_diff(&again.central_projections[0], p) < 1e-9);
    }
}

#[test]
fn center_dimension_counts_blocks() {
    let algebras = [
        fixtures::m2(),
        fixtures::m2_plus_m2(),
        fixtures::m3(),
        fixtures::abelian_swap(),
        diagonal_algebra(3),
        fixtures::car2().even_subalgebra().unwrap(),
    ];
    for alg in algebras {
        let dec = decompose(&alg).unwrap();
        assert_eq!(center(alg.basis(), alg.tolerance()).len(), dec.blocks.len());
        assert!(dec.validate(alg.basis(), alg.unit(), alg.tolerance()).passed());
        assert_eq!(dec.algebra_dim(), alg.dim());
    }
}

#[test]
fn counterexample_runs_clean_and_fast() {
    let start = Instant::now();
    let report = run_counterexample(CounterexampleFixture::JordanWigner).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(report.len(), 7);
    assert!(report.passed(), "{report:?}");
    for check in &report.checks {
        assert!(check.residual < 1e-12, "{}: {}", check.check, check.residual);
    }
}

#[test]
fn noisy_ambient_breaks_the_commutator_identity() {
    let report = run_counterexample(CounterexampleFixture::Perturbed { noise: 1e-6, seed: 0 }).unwrap();
    let check = report.get("commutator_identity").unwrap();
    assert!(!check.pass);
    assert!(check.residual > 1e-8 && check.residual < 1e-4, "residual {}", check.residual);
}

#[test]
fn ordinary_embedding_makes_the_pair_abelian() {
    let report = run_counterexample(CounterexampleFixture::Ordinary).unwrap();
    assert!(!report.get("fermi_product_factor").unwrap().pass);
}

#[test]
fn product_factor_states_follow_the_leg() {
    let m2 = Arc::new(fixtures::m2());
    let legs = [
        StateFunctional::new(m2.clone(), diag(&[c(0.7, 0.0), c(0.3, 0.0)])).unwrap(),
        StateFunctional::new(m2, diag(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap(),
        StateFunctional::normalized_trace(Arc::new(fixtures::m2_plus_m2())).unwrap(),
    ];
    for phi in legs {
        let leg_gns = phi.gns().unwrap();
        let leg_factor = decompose_basis(&leg_gns.image(), &eye(leg_gns.gns_dim), DEFAULT_TOLERANCE).unwrap().is_factor();
        let (_, omega) = product_state_n(&phi, 2, ProductKind::Fermi).unwrap();
        let gns = omega.gns().unwrap();
        let dec = decompose_basis(&gns.image(), &eye(gns.gns_dim), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(dec.is_factor(), leg_factor);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn direct_sums_of_full_blocks(sizes in proptest::collection::vec(1usize..=3, 1..=3)) {
        let d: usize = sizes.iter().sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        for &n in &sizes {
            for i in 0..n {
                for j in 0..n {
                    let mut e = CMatrix::zeros((d, d));
                    e[[offset + i, offset + j]] = c(1.0, 0.0);
                    basis.push(e);
                }
            }
            offset += n;
        }
        let alg = GradedAlgebra::new(basis, GradingSpec::trivial(d), DEFAULT_TOLERANCE).unwrap();
        let dec = decompose(&alg).unwrap();
        let mut got: Vec<usize> = dec.blocks.iter().map(|b| b.size).collect();
        let mut want = sizes.clone();
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
        prop_assert_eq!(center(alg.basis(), DEFAULT_TOLERANCE).len(), sizes.len());
    }
}
