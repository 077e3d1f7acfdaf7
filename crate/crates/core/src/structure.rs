//! Block decomposition of finite-dimensional *-algebras and the scripted
//! counterexample comparing Fermi and ordinary products of an outer-graded
//! abelian algebra.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::graded::{center, generated_algebra, span_distance, GradedAlgebra, DEFAULT_TOLERANCE};
use crate::linalg::{self, c, commutator, dagger, distance, eigh, frobenius, identity, kron, CMatrix};
use crate::product::{build_product, ProductKind};
use crate::report::{Check, Report};
use crate::states::StateFunctional;

/// Threshold for the counterexample identities.
pub const COUNTEREXAMPLE_TOLERANCE: f64 = 1e-12;

const DECOMPOSE_SEED: u64 = 0x5e_c7_10_4e;
const DECOMPOSE_ATTEMPTS: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub multiplicity: usize,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub central_projections: Vec<CMatrix>,
}

impl BlockDecomposition {
    pub fn is_factor(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size * b.size).sum()
    }

    /// Projections sum to `unit`, are central, and the block sizes account
    /// for the dimension of the algebra spanned by `basis`.
    pub fn validate(&self, basis: &[CMatrix], unit: &CMatrix, tol: f64) -> Report {
        let mut report = Report::new();
        let d = unit.nrows();
        let mut total = linalg::zeros(d, d);
        for p in &self.central_projections {
            total = total + p;
        }
        let sum = distance(&total, unit);
        report.push(Check::with_verdict("projections_sum_to_unit", sum, sum <= tol * frobenius(unit).max(1.0)));
        let mut central: f64 = 0.0;
        for p in &self.central_projections {
            for b in basis {
                central = central.max(frobenius(&commutator(p, b)) / frobenius(b).max(1.0));
            }
        }
        report.push(Check::with_verdict("projections_central", central, central <= tol));
        let scale = basis.iter().map(frobenius).fold(1.0, f64::max);
        let dim = linalg::orthonormal_span(basis, tol, scale).len();
        let gap = (dim as f64 - self.algebra_dim() as f64).abs();
        report.push(Check::with_verdict("block_dimensions", gap, dim == self.algebra_dim()));
        report
    }
}

/// Decomposes the algebra into full matrix blocks.
pub fn decompose(algebra: &GradedAlgebra) -> Result<BlockDecomposition> {
    decompose_basis(algebra.basis(), algebra.unit(), algebra.tolerance())
}

/// As [`decompose`], for the algebra spanned by `basis` with unit `unit`.
pub fn decompose_basis(basis: &[CMatrix], unit: &CMatrix, tol: f64) -> Result<BlockDecomposition> {
    if basis.is_empty() {
        return Err(Error::InvalidInput("empty algebra basis".into()));
    }
    let z = center(basis, tol);
    let (evals, evecs) = eigh(unit);
    let support: Vec<usize> = (0..evals.len()).filter(|&i| evals[i] > 0.5).collect();
    let d = unit.nrows();
    let w = ndarray::Array2::from_shape_fn((d, support.len()), |(i, j)| evecs[[i, support[j]]]);
    let scale = basis.iter().map(frobenius).fold(1.0, f64::max);

    for attempt in 0..DECOMPOSE_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(DECOMPOSE_SEED + attempt);
        let mut h = linalg::zeros(d, d);
        for zj in &z {
            let r: f64 = rng.sample(StandardNormal);
            h = h + (zj + &dagger(zj)).mapv(|v| v * r);
        }
        let hc = dagger(&w).dot(&h).dot(&w);
        let (vals, vecs) = eigh(&hc);
        let spread = vals.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            match clusters.last_mut() {
                Some(last) if (v - vals[*last.last().unwrap()]).abs() <= 1e-7 * spread => last.push(i),
                _ => clusters.push(vec![i]),
            }
        }
        if clusters.len() != z.len() {
            continue;
        }
        let mut blocks = Vec::with_capacity(clusters.len());
        let mut projections = Vec::with_capacity(clusters.len());
        for cl in &clusters {
            let v = ndarray::Array2::from_shape_fn((vecs.nrows(), cl.len()), |(i, j)| vecs[[i, cl[j]]]);
            let wv = w.dot(&v);
            let p = wv.dot(&dagger(&wv));
            let compressed: Vec<CMatrix> = basis.iter().map(|b| p.dot(b).dot(&p)).collect();
            let block_dim = linalg::orthonormal_span(&compressed, tol, scale).len();
            let size = (block_dim as f64).sqrt().round() as usize;
            if size == 0 || size * size != block_dim || cl.len() % size != 0 {
                return Err(Error::Verification(format!(
                    "central block of dimension {block_dim} and rank {} is not a full matrix block",
                    cl.len()
                )));
            }
            blocks.push(Block { multiplicity: cl.len() / size, size });
            projections.push(p);
        }
        return Ok(BlockDecomposition { blocks, central_projections: projections });
    }
    Err(Error::Verification(format!(
        "could not separate the {} central blocks after {DECOMPOSE_ATTEMPTS} attempts",
        z.len()
    )))
}

/// Inputs for the counterexample battery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CounterexampleFixture {
    /// Jordan-Wigner annihilators `σ⁻ ⊗ 1` and `Z ⊗ σ⁻`.
    JordanWigner,
    /// Commuting legs `σ⁻ ⊗ 1` and `1 ⊗ σ⁻`.
    Ordinary,
    /// Jordan-Wigner annihilators plus seeded Gaussian noise of the given norm.
    Perturbed { noise: f64, seed: u64 },
}

fn noise_matrix(rng: &mut ChaCha8Rng, d: usize, size: f64) -> CMatrix {
    let m = ndarray::Array2::from_shape_fn((d, d), |_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = frobenius(&m);
    m.mapv(|z| z * (size / n))
}

fn annihilators(fixture: CounterexampleFixture) -> (CMatrix, CMatrix) {
    match fixture {
        CounterexampleFixture::JordanWigner => fixtures::car2_annihilators(),
        CounterexampleFixture::Ordinary => {
            let id = identity(2);
            (kron(&fixtures::lowering(), &id), kron(&id, &fixtures::lowering()))
        }
        CounterexampleFixture::Perturbed { noise, seed } => {
            let (a, b) = fixtures::car2_annihilators();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let na = noise_matrix(&mut rng, 4, noise);
            let nb = noise_matrix(&mut rng, 4, noise);
            (a + na, b + nb)
        }
    }
}

/// The seven identities of the counterexample, each against
/// [`COUNTEREXAMPLE_TOLERANCE`].
pub fn run_counterexample(fixture: CounterexampleFixture) -> Result<Report> {
    let tol = COUNTEREXAMPLE_TOLERANCE;
    let (a, b) = annihilators(fixture);
    let id = identity(4);
    let half = |m: CMatrix| m.mapv(|z| z * 0.5);
    let s = &a + &dagger(&a);
    let big_s = &b + &dagger(&b);
    let p = half(&id + &s);
    let q = half(&id - &s);
    let big_p = half(&id + &big_s);
    let s_s = s.dot(&big_s);
    let mut report = Report::new();

    // [p, P] = sS / 2
    let r1 = distance(&commutator(&p, &big_p), &half(s_s.clone()));
    report.push(Check::below("commutator_identity", r1, tol));

    // e11 = p, e22 = q, e12 = pS, e21 = qS
    let units = [[p.clone(), p.dot(&big_s)], [q.dot(&big_s), q.clone()]];
    let mut r2 = distance(&(&units[0][0] + &units[1][1]), &id);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let lhs = units[i][j].dot(&units[k][l]);
                    let rhs = if j == k { units[i][l].clone() } else { linalg::zeros(4, 4) };
                    r2 = r2.max(distance(&lhs, &rhs));
                }
            }
        }
    }
    report.push(Check::below("matrix_units", r2, tol));

    // the algebra generated by p and P is M_2 in disguise
    let m = generated_algebra(&[p.clone(), big_p.clone()], 4, DEFAULT_TOLERANCE)?;
    let expected_span = vec![id.clone(), s.clone(), big_s.clone(), s_s.clone()];
    let r3 = span_distance(&m, &expected_span, DEFAULT_TOLERANCE);
    let noncommutative = m
        .iter()
        .flat_map(|x| m.iter().map(move |y| frobenius(&commutator(x, y))))
        .fold(0.0, f64::max)
        > 0.1;
    let z_m = center(&m, DEFAULT_TOLERANCE);
    report.push(Check::with_verdict(
        "fermi_product_factor",
        r3,
        r3 < tol && m.len() == 4 && noncommutative && z_m.len() == 1,
    ));

    let leg = Arc::new(fixtures::abelian_swap());
    let fermi = build_product(vec![leg.clone(), leg.clone()], ProductKind::Fermi)?;
    let ordinary = build_product(vec![leg.clone(), leg.clone()], ProductKind::Ordinary)?;
    let r4 = ordinary.realized().max_commutator();
    report.push(Check::with_verdict(
        "ordinary_product_abelian",
        r4,
        r4 < tol && ordinary.realized().dim() == 4,
    ));

    // φ(p) = φ(q) = 1/2 is the only even state on the leg
    let phi = StateFunctional::normalized_trace(leg.clone())?;
    let omega = fermi.product_state(&[phi.clone(), phi.clone()])?;
    let mut r5 = phi.even_residual();
    for (i, row) in units.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let target = if i == j { 0.5 } else { 0.0 };
            r5 = r5.max((omega.evaluate(e) - c(target, 0.0)).norm());
        }
    }
    r5 = r5.max(span_distance(fermi.realized().basis(), &m, DEFAULT_TOLERANCE));
    report.push(Check::below("product_state_half_trace", r5, tol));

    // Z(A ⊛ A) is trivial while the products of central elements fill the algebra;
    // the ordinary product factorises
    let z_leg = center(leg.basis(), DEFAULT_TOLERANCE);
    let images = |prod: &crate::product::ProductAlgebra| -> Result<Vec<CMatrix>> {
        let mut out = Vec::new();
        for x in &z_leg {
            for y in &z_leg {
                out.push(prod.embed(0, x)?.dot(&prod.embed(1, y)?));
            }
        }
        Ok(out)
    };
    let fermi_images = images(&fermi)?;
    let ordinary_images = images(&ordinary)?;
    let z_fermi = center(fermi.realized().basis(), DEFAULT_TOLERANCE);
    let z_ordinary = center(ordinary.realized().basis(), DEFAULT_TOLERANCE);
    let image_dim = linalg::orthonormal_span(&fermi_images, DEFAULT_TOLERANCE, 1.0).len();
    let mut r6 = span_distance(&z_ordinary, &ordinary_images, DEFAULT_TOLERANCE);
    for (zs, alg) in [(&z_fermi, fermi.realized()), (&z_ordinary, ordinary.realized())] {
        for zv in zs.iter() {
            for bv in alg.basis() {
                r6 = r6.max(frobenius(&commutator(zv, bv)));
            }
        }
    }
    report.push(Check::with_verdict(
        "center_mismatch",
        r6,
        r6 < tol && z_fermi.len() == 1 && image_dim == 4 && z_ordinary.len() == 4,
    ));

    // π_{φ×φ} is a factor representation, π_φ is not
    let g_product = omega.gns()?;
    let g_leg = phi.gns()?;
    let r7 = g_product.reconstruction_residual().max(g_leg.reconstruction_residual());
    let blocks_product = decompose_basis(&g_product.image(), &identity(g_product.gns_dim), DEFAULT_TOLERANCE)?;
    let blocks_leg = decompose_basis(&g_leg.image(), &identity(g_leg.gns_dim), DEFAULT_TOLERANCE)?;
    report.push(Check::with_verdict(
        "gns_factor_blocks",
        r7,
        r7 < tol && blocks_product.blocks.len() == 1 && blocks_leg.blocks.len() == 2,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_diagonal_blocks() {
        let m2 = fixtures::m2();
        let dec = decompose(&m2).unwrap();
        assert_eq!(dec.blocks, vec![Block { multiplicity: 1, size: 2 }]);
        let diag = vec![identity(2), fixtures::pauli_z()];
        let dec = decompose_basis(&diag, &identity(2), 1e-9).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        assert!(dec.blocks.iter().all(|b| b.size == 1));
    }

    #[test]
    fn counterexample_passes() {
        let report = run_counterexample(CounterexampleFixture::JordanWigner).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.len(), 7);
    }
}
