//! States given by density matrices, evenness, and the covariant GNS
//! construction.

use std::sync::Arc;

use ndarray::{s, Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graded::{commutant, GradedAlgebra, GradingSpec};
use crate::hilbert::{fermi_op_product, fermi_product_algebra, GradedHilbert};
use crate::linalg::{
    self, c, dagger, distance, eigh, frobenius, identity, kron, stack_columns, trace_of_product, vector_norm,
    within, CMatrix, CVector, Frame, C64,
};
use crate::report::{Check, Report};

/// A linear functional `a -> Tr(ρ a)` on a graded algebra.
#[derive(Clone, Debug)]
pub struct StateFunctional {
    algebra: Arc<GradedAlgebra>,
    density: CMatrix,
}

impl StateFunctional {
    /// Checks shape, positivity of `ρ` on the algebra and normalisation.
    pub fn new(algebra: Arc<GradedAlgebra>, density: CMatrix) -> Result<Self> {
        let d = algebra.ambient_dim();
        if density.dim() != (d, d) {
            return Err(Error::Shape(format!("density {:?} for a {d}x{d} algebra", density.dim())));
        }
        let tol = algebra.tolerance();
        let scale = frobenius(&density);
        let herm = linalg::hermitian_residual(&density);
        if !within(herm, scale, tol) {
            return Err(Error::StateInvalid(format!("density is not self-adjoint (residual {herm:.3e})")));
        }
        let state = StateFunctional { algebra, density };
        let total = state.evaluate(state.algebra.unit());
        if (total - c(1.0, 0.0)).norm() > tol.max(1e-12) * 10.0 {
            return Err(Error::StateInvalid(format!("state is not normalised: value on the unit is {total}")));
        }
        // positivity is tested on the compression to the algebra's unit
        let e = state.algebra.unit();
        let compressed = e.dot(&state.density).dot(e);
        let lowest = linalg::eigvalsh(&compressed).first().copied().unwrap_or(0.0);
        if lowest < -tol * scale.max(1.0) {
            return Err(Error::StateInvalid(format!("density has negative eigenvalue {lowest:.3e}")));
        }
        Ok(state)
    }

    /// The state with the given values on the algebra basis, represented by a
    /// density inside the algebra.
    pub fn from_values(algebra: Arc<GradedAlgebra>, values: &[C64]) -> Result<Self> {
        let k = algebra.dim();
        if values.len() != k {
            return Err(Error::Shape(format!("{} values for a {k}-dimensional algebra", values.len())));
        }
        let basis = algebra.basis();
        let d = algebra.ambient_dim();
        // M[i][j] = Tr(b_j b_i), solve M c = f for ρ = Σ c_j b_j
        let stacked = stack_columns(basis, d, d);
        let transposed: Vec<CMatrix> = basis.iter().map(|b| b.t().to_owned()).collect();
        let tstack = stack_columns(&transposed, d, d);
        let m = linalg::matmul(&tstack.t().to_owned(), &stacked);
        let f = Array1::from_vec(values.to_vec());
        let inv = linalg::inverse(&m)?;
        let coeffs = inv.dot(&f);
        let density = algebra.combine(&coeffs);
        let density = (&density + &dagger(&density)).mapv(|z| z * 0.5);
        StateFunctional::new(algebra, density)
    }

    /// The normalised trace of the ambient space compressed to the unit.
    pub fn normalized_trace(algebra: Arc<GradedAlgebra>) -> Result<Self> {
        let e = algebra.unit().clone();
        let t = linalg::trace(&e);
        StateFunctional::new(algebra, e.mapv(|z| z / t))
    }

    /// A random faithful even state: the even symmetrisation of `x* x / Tr`
    /// for a Gaussian element `x` of the algebra.
    pub fn random_even<R: Rng + ?Sized>(algebra: Arc<GradedAlgebra>, rng: &mut R) -> Result<Self> {
        let k = algebra.dim();
        let coeffs: CVector = (0..k)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let x = algebra.combine(&coeffs);
        let rho = dagger(&x).dot(&x);
        let t = trace_of_product(&rho, algebra.unit());
        let base = StateFunctional { algebra: algebra.clone(), density: rho.mapv(|z| z / t) };
        let values = base.values();
        let mapped = base.values_after_grading();
        let even: Vec<C64> = values.iter().zip(mapped.iter()).map(|(a, b)| (a + b) * 0.5).collect();
        StateFunctional::from_values(algebra, &even)
    }

    /// `Σ λ_i φ_i` over states on the same algebra.
    pub fn convex_combination(states: &[StateFunctional], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::InvalidInput("convex combination needs one weight per state".into()));
        }
        if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("weights must be nonnegative and sum to one".into()));
        }
        let algebra = states[0].algebra.clone();
        let d = algebra.ambient_dim();
        let mut rho = linalg::zeros(d, d);
        for (s, &w) in states.iter().zip(weights) {
            if s.algebra.ambient_dim() != d || s.algebra.dim() != algebra.dim() {
                return Err(Error::Shape("states live on different algebras".into()));
            }
            rho = rho + s.density.mapv(|z| z * w);
        }
        StateFunctional::new(algebra, rho)
    }

    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    pub fn density(&self) -> &CMatrix {
        &self.density
    }

    pub fn evaluate(&self, x: &CMatrix) -> C64 {
        trace_of_product(&self.density, x)
    }

    /// Values on the algebra basis.
    pub fn values(&self) -> Vec<C64> {
        let d = self.algebra.ambient_dim();
        let stacked = stack_columns(self.algebra.basis(), d, d);
        // Tr(ρ b) = Σ ρ_ij b_ji = vec(ρ^T) . vec(b)
        let rho_t = linalg::vectorize(&self.density.t().to_owned());
        stacked.t().dot(&rho_t).to_vec()
    }

    /// Values of `φ ∘ α` on the basis.
    pub fn values_after_grading(&self) -> Vec<C64> {
        let v = Array1::from_vec(self.values());
        self.algebra.grading_map().t().dot(&v).to_vec()
    }

    /// Largest `|φ(α(b)) - φ(b)|` over basis elements.
    pub fn even_residual(&self) -> f64 {
        self.values()
            .iter()
            .zip(self.values_after_grading().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_even(&self) -> bool {
        self.even_residual() < self.algebra.tolerance()
    }

    /// Largest difference of values on the basis of the common algebra.
    pub fn distance_to(&self, other: &StateFunctional) -> Result<f64> {
        if self.algebra.dim() != other.algebra.dim() || self.algebra.ambient_dim() != other.algebra.ambient_dim() {
            return Err(Error::Shape("states live on different algebras".into()));
        }
        Ok(self
            .values()
            .iter()
            .zip(other.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn gns(&self) -> Result<GnsData> {
        GnsData::build(self)
    }

    /// Whether the GNS vector is cyclic for the commutant of the GNS image.
    pub fn has_central_support(&self) -> Result<bool> {
        Ok(self.gns()?.has_central_support())
    }
}

/// A covariant GNS triple. The Hilbert space is `C^gns_dim`; basis element
/// `b_j` is sent to the vector `η_j = Λ^{1/2} W* e_j` where `G = W Λ W*` is
/// the Gram matrix of the state.
#[derive(Clone, Debug)]
pub struct GnsData {
    algebra: Arc<GradedAlgebra>,
    pub gns_dim: usize,
    pub rep: Vec<CMatrix>,
    pub cyclic_vector: CVector,
    pub implementing_unitary: Option<CMatrix>,
    /// `gns_dim x k`, column `j` is `π(b_j) ξ`.
    orbit: CMatrix,
    values: Vec<C64>,
    tolerance: f64,
}

impl GnsData {
    fn build(state: &StateFunctional) -> Result<Self> {
        let algebra = state.algebra.clone();
        let tol = algebra.tolerance();
        let basis = algebra.basis();
        let k = basis.len();
        let d = algebra.ambient_dim();
        let rho = &state.density;
        // G_ij = φ(b_i* b_j) = <b_i, b_j ρ>_HS
        let b = stack_columns(basis, d, d);
        let right: Vec<CMatrix> = basis.iter().map(|x| x.dot(rho)).collect();
        let br = stack_columns(&right, d, d);
        let gram = linalg::matmul(&dagger(&b), &br);
        let (vals, vecs) = eigh(&gram);
        let top = vals.iter().copied().fold(0.0_f64, f64::max);
        if vals.first().copied().unwrap_or(0.0) < -tol.max(1e-12) * top.max(1.0) * 10.0 {
            return Err(Error::StateInvalid(format!(
                "Gram matrix has negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        let keep: Vec<usize> = (0..k).filter(|&i| vals[i] > tol * top).collect();
        let r = keep.len();
        if r == 0 {
            return Err(Error::StateInvalid("state vanishes on the algebra".into()));
        }
        let w = Array2::from_shape_fn((k, r), |(i, j)| vecs[[i, keep[j]]]);
        let sqrt: Vec<f64> = keep.iter().map(|&i| vals[i].sqrt()).collect();
        // iso = Λ^{1/2} W*, lift = W Λ^{-1/2}
        let mut iso = dagger(&w);
        for (j, mut row) in iso.rows_mut().into_iter().enumerate() {
            row.mapv_inplace(|z| z * sqrt[j]);
        }
        let mut lift = w;
        for (j, mut col) in lift.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z / sqrt[j]);
        }
        let frame = algebra.frame();
        let mut rep = Vec::with_capacity(k);
        for a in basis {
            let products: Vec<CMatrix> = basis.iter().map(|bj| a.dot(bj)).collect();
            let left = frame.coords_many(&products);
            rep.push(iso.dot(&left).dot(&lift));
        }
        let orbit = iso.clone();
        let cyclic_vector = orbit.column(0).to_owned();
        let implementing_unitary = if state.is_even() {
            Some(iso.dot(algebra.grading_map()).dot(&lift))
        } else {
            None
        };
        Ok(GnsData {
            algebra,
            gns_dim: r,
            rep,
            cyclic_vector,
            implementing_unitary,
            orbit,
            values: state.values(),
            tolerance: tol,
        })
    }

    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    /// `π(x)` for an element of the algebra.
    pub fn represent(&self, x: &CMatrix) -> CMatrix {
        self.represent_coords(&self.algebra.coords(x))
    }

    pub fn represent_coords(&self, coords: &CVector) -> CMatrix {
        let r = self.gns_dim;
        let mut out = linalg::zeros(r, r);
        for (cj, pj) in coords.iter().zip(self.rep.iter()) {
            if *cj != linalg::ZERO {
                out.zip_mut_with(pj, |o, &p| *o += cj * p);
            }
        }
        out
    }

    /// `π(x) ξ` computed from the coordinates of `x`.
    pub fn orbit_vector(&self, coords: &CVector) -> CVector {
        self.orbit.dot(coords)
    }

    /// Largest `|φ(b) - <π(b) ξ, ξ>|`.
    pub fn reconstruction_residual(&self) -> f64 {
        let xi = &self.cyclic_vector;
        self.rep
            .iter()
            .zip(self.values.iter())
            .map(|(p, v)| (xi.mapv(|z| z.conj()).dot(&p.dot(xi)) - v).norm())
            .fold(0.0, f64::max)
    }

    /// Rank of `{π(b) ξ}` relative to the GNS dimension.
    pub fn is_cyclic(&self) -> bool {
        let s = linalg::singular_values(&self.orbit);
        linalg::numerical_rank(&s, self.tolerance) == self.gns_dim
    }

    pub fn validate(&self) -> Report {
        let tol = self.tolerance;
        let mut report = Report::new();
        let rec = self.reconstruction_residual();
        report.push(Check::with_verdict("reconstruction", rec, rec < tol));
        let norm = (vector_norm(&self.cyclic_vector) - 1.0).abs();
        report.push(Check::with_verdict("cyclic_vector_norm", norm, norm < tol));
        report.push(Check::with_verdict("cyclic", 0.0, self.is_cyclic()));

        let basis = self.algebra.basis();
        let frame = self.algebra.frame();
        let k = basis.len();
        let mut mult: f64 = 0.0;
        let mut adj: f64 = 0.0;
        let adjoints: Vec<CMatrix> = basis.iter().map(dagger).collect();
        let adj_coords = frame.coords_many(&adjoints);
        for i in 0..k {
            let pa = self.represent_coords(&adj_coords.column(i).to_owned());
            adj = adj.max(distance(&pa, &dagger(&self.rep[i])) / frobenius(&self.rep[i]).max(1.0));
            let products: Vec<CMatrix> = basis.iter().map(|bj| basis[i].dot(bj)).collect();
            let coords = frame.coords_many(&products);
            for j in 0..k {
                let lhs = self.represent_coords(&coords.column(j).to_owned());
                let rhs = self.rep[i].dot(&self.rep[j]);
                mult = mult.max(distance(&lhs, &rhs) / frobenius(&rhs).max(1.0));
            }
        }
        report.push(Check::with_verdict("multiplicative", mult, mult < tol));
        report.push(Check::with_verdict("adjoint", adj, adj < tol));
        if let Some(res) = self.covariance_residuals() {
            report.push(Check::with_verdict("implementer_involution", res[0], res[0] < tol));
            report.push(Check::with_verdict("implementer_unitary", res[1], res[1] < tol));
            report.push(Check::with_verdict("implementer_fixes_vector", res[2], res[2] < tol));
            report.push(Check::with_verdict("implementer_covariance", res[3], res[3] < tol));
        }
        report
    }

    /// `[V² - I, V V* - I, Vξ - ξ, V π(b) V - π(α(b))]`, when `V` exists.
    pub fn covariance_residuals(&self) -> Option<[f64; 4]> {
        let v = self.implementing_unitary.as_ref()?;
        let r = self.gns_dim;
        let scale = (r as f64).sqrt();
        let id = identity(r);
        let inv = distance(&v.dot(v), &id) / scale;
        let unit = distance(&v.dot(&dagger(v)), &id) / scale;
        let fix = vector_norm(&(v.dot(&self.cyclic_vector) - &self.cyclic_vector));
        let amap = self.algebra.grading_map();
        let mut cov: f64 = 0.0;
        for (j, p) in self.rep.iter().enumerate() {
            let alpha = self.represent_coords(&amap.column(j).to_owned());
            cov = cov.max(distance(&v.dot(p).dot(v), &alpha) / frobenius(p).max(1.0));
        }
        Some([inv, unit, fix, cov])
    }

    /// Basis of the image `π(A)`.
    pub fn image(&self) -> Vec<CMatrix> {
        let scale = self.rep.iter().map(frobenius).fold(1.0, f64::max);
        linalg::orthonormal_span(&self.rep, self.tolerance, scale)
    }

    /// Whether `ξ` is cyclic for `π(A)'`. In finite dimension `π(A)'' = π(A)`,
    /// so this is the same as `ξ` separating `π(A)`, and since `x ↦ xξ` maps
    /// `π(A)` onto the GNS space it holds exactly when `dim π(A) = gns_dim`.
    pub fn has_central_support(&self) -> bool {
        self.image().len() == self.gns_dim
    }

    /// [`Self::has_central_support`] decided through an explicit basis of the
    /// commutant. Costly once the GNS space grows past a few dozen dimensions.
    pub fn has_central_support_via_commutant(&self) -> bool {
        let image = self.image();
        let Ok(comm) = commutant(&image, self.gns_dim, self.tolerance) else {
            return false;
        };
        let vectors: Vec<CVector> = comm.iter().map(|x| x.dot(&self.cyclic_vector)).collect();
        let r = self.gns_dim;
        let m = Array2::from_shape_fn((r, vectors.len()), |(i, j)| vectors[j][i]);
        let s = linalg::singular_values(&m);
        linalg::numerical_rank(&s, self.tolerance) == r
    }
}

/// The product state `ω × φ` on the Fermi product of the two algebras.
pub fn product_state_fermi(omega: &StateFunctional, phi: &StateFunctional) -> Result<StateFunctional> {
    let product = Arc::new(fermi_product_algebra(omega.algebra(), phi.algebra())?);
    product_state_fermi_on(omega, phi, product)
}

/// As [`product_state_fermi`], on an already built product algebra living on
/// the tensor product of the two ambient spaces.
pub fn product_state_fermi_on(
    omega: &StateFunctional,
    phi: &StateFunctional,
    product: Arc<GradedAlgebra>,
) -> Result<StateFunctional> {
    for s in [omega, phi] {
        if !s.is_even() {
            return Err(Error::NotEven { residual: s.even_residual() });
        }
    }
    let d = omega.algebra.ambient_dim() * phi.algebra.ambient_dim();
    if product.ambient_dim() != d {
        return Err(Error::Shape(format!(
            "product algebra acts on dimension {}, expected {d}",
            product.ambient_dim()
        )));
    }
    // odd parts of the second leg are killed by the even φ, so the Kronecker
    // product of the densities reproduces ω(a) φ(b) on every a ⊛ b
    StateFunctional::new(product, kron(omega.density(), phi.density()))
}

/// Compares the GNS data of `ω × φ` with `(H_ω ⊗ H_φ, π_ω ⊛ π_φ, ξ_ω ⊗ ξ_φ)`.
pub fn check_product_gns_equivalence(omega: &StateFunctional, phi: &StateFunctional) -> Result<Report> {
    let product = product_state_fermi(omega, phi)?;
    let tol = product.algebra().tolerance();
    let direct = product.gns()?;
    let g_omega = omega.gns()?;
    let g_phi = phi.gns()?;
    let (v_omega, v_phi) = match (&g_omega.implementing_unitary, &g_phi.implementing_unitary) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::NotEven { residual: omega.even_residual().max(phi.even_residual()) }),
    };
    let h = GradedHilbert::new(v_omega, tol)?;
    let k = GradedHilbert::new(v_phi, tol)?;
    let xi = kron_vector(&g_omega.cyclic_vector, &g_phi.cyclic_vector);

    let a_basis = omega.algebra().basis();
    let b_basis = phi.algebra().basis();
    let ha = GradedHilbert::of_algebra(omega.algebra())?;
    let hb = GradedHilbert::of_algebra(phi.algebra())?;
    let mut words = Vec::with_capacity(a_basis.len() * b_basis.len());
    let mut tensor_reps = Vec::with_capacity(words.capacity());
    for (i, a) in a_basis.iter().enumerate() {
        for (j, b) in b_basis.iter().enumerate() {
            words.push(fermi_op_product(a, b, &ha, &hb)?);
            tensor_reps.push(fermi_op_product(&g_omega.rep[i], &g_phi.rep[j], &h, &k)?);
        }
    }
    let xi_conj = xi.mapv(|z| z.conj());
    let tensor_values: Vec<C64> = tensor_reps.iter().map(|p| xi_conj.dot(&p.dot(&xi))).collect();

    // express every realised basis element through the words a_i ⊛ b_j
    let word_frame = Frame::new(words.clone(), tol)?;
    let coords = word_frame.coords_many(product.algebra().basis());
    let tv = Array1::from_vec(tensor_values.clone());
    let independent = coords.t().dot(&tv);
    let direct_values = product.values();
    let mut value_res: f64 = 0.0;
    for (a, b) in independent.iter().zip(direct_values.iter()) {
        value_res = value_res.max((a - b).norm());
    }
    let word_res = words
        .iter()
        .zip(tensor_values.iter())
        .map(|(w, v)| (product.evaluate(w) - v).norm())
        .fold(0.0, f64::max);

    let orbit_cols: Vec<CVector> = tensor_reps.iter().map(|p| p.dot(&xi)).collect();
    let dim = xi.len();
    let orbit = Array2::from_shape_fn((dim, orbit_cols.len()), |(i, j)| orbit_cols[j][i]);
    let s = linalg::singular_values(&orbit);
    let cyclic_dim = linalg::numerical_rank(&s, tol);

    // intertwiner built by matching orbits word by word
    let direct_orbit = {
        let wc = product.algebra().frame().coords_many(&words);
        direct.orbit.dot(&wc)
    };
    let pinv = pseudo_inverse(&direct_orbit, tol);
    let intertwiner = orbit.dot(&pinv);
    let iso = distance(&dagger(&intertwiner).dot(&intertwiner), &identity(direct.gns_dim))
        / (direct.gns_dim as f64).sqrt();
    let matched = distance(&intertwiner.dot(&direct_orbit), &orbit) / frobenius(&orbit).max(1.0);

    let mut report = Report::new();
    report.push(Check::with_verdict(
        "gns_dimension",
        (direct.gns_dim as f64 - cyclic_dim as f64).abs(),
        direct.gns_dim == cyclic_dim,
    ));
    report.push(Check::with_verdict("state_values", value_res, value_res < tol));
    report.push(Check::with_verdict("word_values", word_res, word_res < tol));
    report.push(Check::with_verdict("intertwiner_isometry", iso, iso < tol * 10.0));
    report.push(Check::with_verdict("intertwiner_orbit", matched, matched < tol * 10.0));
    Ok(report)
}

pub(crate) fn kron_vector(a: &CVector, b: &CVector) -> CVector {
    let mut out = Array1::from_elem(a.len() * b.len(), linalg::ZERO);
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

fn pseudo_inverse(a: &CMatrix, tol: f64) -> CMatrix {
    let svd = linalg::thin_svd(a);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let r = svd.s.iter().take_while(|&&x| x > tol * top).count();
    let mut v = svd.v.slice(s![.., ..r]).to_owned();
    for (j, mut col) in v.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|z| z / svd.s[j]);
    }
    v.dot(&dagger(&svd.u.slice(s![.., ..r]).to_owned()))
}

/// A trivially graded copy of `algebra`, for states whose evenness is moot.
pub fn trivially_graded(algebra: &GradedAlgebra) -> Result<GradedAlgebra> {
    GradedAlgebra::new(
        algebra.basis().to_vec(),
        GradingSpec::trivial(algebra.ambient_dim()),
        algebra.tolerance(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::DEFAULT_TOLERANCE;
    use crate::linalg::real_matrix;

    fn m2() -> Arc<GradedAlgebra> {
        let z = real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let x = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let basis = crate::graded::generated_algebra(&[z.clone(), x], 2, DEFAULT_TOLERANCE).unwrap();
        Arc::new(GradedAlgebra::new(basis, GradingSpec::inner(z), DEFAULT_TOLERANCE).unwrap())
    }

    #[test]
    fn trace_is_even_and_faithful() {
        let phi = StateFunctional::normalized_trace(m2()).unwrap();
        assert!(phi.is_even());
        let g = phi.gns().unwrap();
        assert_eq!(g.gns_dim, 4);
        assert!(g.validate().passed(), "{:?}", g.validate());
        assert!(g.has_central_support());
    }

    #[test]
    fn pure_state_lacks_central_support() {
        let rho = real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let phi = StateFunctional::new(m2(), rho).unwrap();
        let g = phi.gns().unwrap();
        assert_eq!(g.gns_dim, 2);
        assert!(!g.has_central_support());
    }

    #[test]
    fn negative_density_rejected() {
        let rho = real_matrix(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(matches!(StateFunctional::new(m2(), rho), Err(Error::StateInvalid(_))));
    }

    #[test]
    fn from_values_round_trips() {
        let phi = StateFunctional::random_even(m2(), &mut rand::thread_rng()).unwrap();
        let again = StateFunctional::from_values(m2(), &phi.values()).unwrap();
        assert!(phi.distance_to(&again).unwrap() < 1e-12);
    }

    #[test]
    fn gns_equivalence_for_traces() {
        let phi = StateFunctional::normalized_trace(m2()).unwrap();
        let report = check_product_gns_equivalence(&phi, &phi).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
