//! Linear maps between realised algebras, stored as matrices over their bases.

use std::sync::Arc;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graded::GradedAlgebra;
use crate::linalg::{self, c, dagger, distance, frobenius, matmul, CMatrix, CVector, C64};

/// Up to this dimension multiplicativity is checked on every basis pair.
pub const FULL_PAIR_LIMIT: usize = 81;

/// Random probes used above [`FULL_PAIR_LIMIT`].
pub const PROBES: usize = 6;

#[derive(Clone, Debug)]
pub struct AlgebraMap {
    source: Arc<GradedAlgebra>,
    target: Arc<GradedAlgebra>,
    /// Column `j` holds the target coordinates of the image of source basis `j`.
    matrix: CMatrix,
}

impl AlgebraMap {
    pub fn new(source: Arc<GradedAlgebra>, target: Arc<GradedAlgebra>, matrix: CMatrix) -> Result<Self> {
        if matrix.dim() != (target.dim(), source.dim()) {
            return Err(Error::Shape(format!(
                "map matrix {:?} between algebras of dimension {} and {}",
                matrix.dim(),
                source.dim(),
                target.dim()
            )));
        }
        Ok(AlgebraMap { source, target, matrix })
    }

    /// The map sending source basis element `j` to `images[j]`.
    pub fn from_images(source: Arc<GradedAlgebra>, target: Arc<GradedAlgebra>, images: &[CMatrix]) -> Result<Self> {
        if images.len() != source.dim() {
            return Err(Error::Shape(format!("{} images for {} basis elements", images.len(), source.dim())));
        }
        let matrix = target.frame().coords_many(images);
        AlgebraMap::new(source, target, matrix)
    }

    pub fn identity(algebra: Arc<GradedAlgebra>) -> Self {
        let k = algebra.dim();
        AlgebraMap { source: algebra.clone(), target: algebra, matrix: linalg::identity(k) }
    }

    pub fn source(&self) -> &Arc<GradedAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GradedAlgebra> {
        &self.target
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn with_matrix(&self, matrix: CMatrix) -> Result<Self> {
        AlgebraMap::new(self.source.clone(), self.target.clone(), matrix)
    }

    pub fn apply_coords(&self, coords: &CVector) -> CVector {
        self.matrix.dot(coords)
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        self.target.combine(&self.apply_coords(&self.source.coords(x)))
    }

    /// Images of all source basis elements.
    pub fn images(&self) -> Vec<CMatrix> {
        self.target.frame().combine_many(&self.matrix)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AlgebraMap) -> Result<AlgebraMap> {
        if other.target.dim() != self.source.dim() {
            return Err(Error::Shape("maps cannot be composed".into()));
        }
        AlgebraMap::new(other.source.clone(), self.target.clone(), matmul(&self.matrix, &other.matrix))
    }

    /// Values of `ψ ∘ self` on the source basis, from values of `ψ` on the target basis.
    pub fn transpose_values(&self, target_values: &[C64]) -> Vec<C64> {
        let v = Array1::from_vec(target_values.to_vec());
        self.matrix.t().dot(&v).to_vec()
    }

    /// Worst relative defect of `θ(xy) = θ(x)θ(y)`.
    ///
    /// Small algebras are checked on every basis pair. Larger ones are checked
    /// on `generators × probes` and `probes × probes` for seeded Gaussian
    /// probes; since the defect is linear in the probe, a nonzero defect
    /// survives a random probe with probability one.
    pub fn multiplicativity_residual(&self, generators: &[CMatrix], seed: u64) -> f64 {
        let basis = self.source.basis();
        let k = basis.len();
        let images = self.images();
        let mut worst: f64 = 0.0;
        if k <= FULL_PAIR_LIMIT {
            for (i, bi) in basis.iter().enumerate() {
                let products: Vec<CMatrix> = basis.iter().map(|bj| bi.dot(bj)).collect();
                let coords = self.source.frame().coords_many(&products);
                let mapped = self.target.frame().combine_many(&matmul(&self.matrix, &coords));
                for (j, lhs) in mapped.iter().enumerate() {
                    let rhs = images[i].dot(&images[j]);
                    worst = worst.max(distance(lhs, &rhs) / frobenius(&rhs).max(1.0));
                }
            }
            return worst;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probes: Vec<CVector> = (0..PROBES)
            .map(|_| {
                let v: CVector = (0..k).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
                let n = linalg::vector_norm(&v);
                v.mapv(|z| z / n)
            })
            .collect();
        let probe_mats: Vec<CMatrix> = probes.iter().map(|p| self.source.combine(p)).collect();
        let probe_images: Vec<CMatrix> = probes.iter().map(|p| self.target.combine(&self.apply_coords(p))).collect();
        let gen_images: Vec<CMatrix> = generators.iter().map(|g| self.apply(g)).collect();
        let mut pairs: Vec<(CMatrix, CMatrix)> = Vec::new();
        for (g, gi) in generators.iter().zip(gen_images.iter()) {
            for (p, pi) in probe_mats.iter().zip(probe_images.iter()) {
                pairs.push((g.dot(p), gi.dot(pi)));
                pairs.push((p.dot(g), pi.dot(gi)));
            }
        }
        for (p, pi) in probe_mats.iter().zip(probe_images.iter()) {
            for (q, qi) in probe_mats.iter().zip(probe_images.iter()) {
                pairs.push((p.dot(q), pi.dot(qi)));
            }
        }
        let products: Vec<CMatrix> = pairs.iter().map(|(x, _)| x.clone()).collect();
        let coords = self.source.frame().coords_many(&products);
        let mapped = self.target.frame().combine_many(&matmul(&self.matrix, &coords));
        for (lhs, (_, rhs)) in mapped.iter().zip(pairs.iter()) {
            worst = worst.max(distance(lhs, rhs) / frobenius(rhs).max(1.0));
        }
        worst
    }

    /// Worst relative defect of `θ(x*) = θ(x)*` over the source basis.
    pub fn star_residual(&self) -> f64 {
        let adjoints: Vec<CMatrix> = self.source.basis().iter().map(dagger).collect();
        let coords = self.source.frame().coords_many(&adjoints);
        let mapped = self.target.frame().combine_many(&matmul(&self.matrix, &coords));
        self.images()
            .iter()
            .zip(mapped.iter())
            .map(|(img, m)| distance(&dagger(img), m) / frobenius(img).max(1.0))
            .fold(0.0, f64::max)
    }

    /// Relative defect of `θ ∘ α_source = α_target ∘ θ`.
    pub fn grading_residual(&self) -> f64 {
        let lhs = matmul(&self.matrix, self.source.grading_map());
        let rhs = matmul(self.target.grading_map(), &self.matrix);
        distance(&lhs, &rhs) / frobenius(&self.matrix).max(1.0)
    }

    /// Singular values of the matrix, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.matrix)
    }
}
