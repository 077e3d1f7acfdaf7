//! Graded Hilbert spaces and the Fermi product of operators.

use crate::error::{Error, Result};
use crate::graded::{generated_algebra, GradedAlgebra, GradingSpec, Parity};
use crate::linalg::{self, distance, frobenius, hermitian_residual, identity, kron, within, CMatrix, CVector};
use crate::report::{Check, Report};

#[derive(Clone, Debug)]
pub struct GradedHilbert {
    grading_unitary: CMatrix,
    even_projection: CMatrix,
    odd_projection: CMatrix,
}

/// Grade of an operator with respect to a graded Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorGrade {
    Even,
    Odd,
    Mixed,
}

impl From<Parity> for OperatorGrade {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Even => OperatorGrade::Even,
            Parity::Odd => OperatorGrade::Odd,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradedOperator {
    pub matrix: CMatrix,
    pub grade: OperatorGrade,
}

impl GradedHilbert {
    /// `u` must be a self-adjoint unitary.
    pub fn new(u: CMatrix, tolerance: f64) -> Result<Self> {
        let (n, m) = u.dim();
        if n != m || n == 0 {
            return Err(Error::Shape(format!("grading unitary must be square and nonempty, got {n}x{m}")));
        }
        let scale = (n as f64).sqrt();
        let bad = hermitian_residual(&u).max(linalg::unitary_residual(&u));
        if !within(bad, scale, tolerance) {
            return Err(Error::InvalidInput(format!(
                "grading unitary is not a self-adjoint unitary (residual {bad:.3e})"
            )));
        }
        let id = identity(n);
        let even_projection = (&id + &u).mapv(|z| z * 0.5);
        let odd_projection = (&id - &u).mapv(|z| z * 0.5);
        Ok(GradedHilbert { grading_unitary: u, even_projection, odd_projection })
    }

    pub fn trivial(dim: usize) -> Self {
        GradedHilbert {
            grading_unitary: identity(dim),
            even_projection: identity(dim),
            odd_projection: linalg::zeros(dim, dim),
        }
    }

    /// The space carrying `algebra`, graded by its ambient implementing unitary.
    pub fn of_algebra(algebra: &GradedAlgebra) -> Result<Self> {
        GradedHilbert::new(algebra.hilbert_grading()?, algebra.tolerance())
    }

    pub fn dim(&self) -> usize {
        self.grading_unitary.nrows()
    }

    pub fn grading_unitary(&self) -> &CMatrix {
        &self.grading_unitary
    }

    pub fn even_projection(&self) -> &CMatrix {
        &self.even_projection
    }

    pub fn odd_projection(&self) -> &CMatrix {
        &self.odd_projection
    }

    pub fn validate(&self, tolerance: f64) -> Report {
        let u = &self.grading_unitary;
        let n = self.dim();
        let scale = (n as f64).sqrt();
        let (ep, em) = (&self.even_projection, &self.odd_projection);
        let mut report = Report::new();
        let sa = hermitian_residual(u) / scale;
        report.push(Check::with_verdict("grading_selfadjoint", sa, sa <= tolerance));
        let un = linalg::unitary_residual(u) / scale;
        report.push(Check::with_verdict("grading_unitary", un, un <= tolerance));
        let sum = distance(&(ep + em), &identity(n)) / scale;
        report.push(Check::with_verdict("projections_sum", sum, sum <= tolerance));
        let orth = frobenius(&ep.dot(em)) / scale;
        report.push(Check::with_verdict("projections_orthogonal", orth, orth <= tolerance));
        let idem = (distance(&ep.dot(ep), ep).max(distance(&em.dot(em), em))) / scale;
        report.push(Check::with_verdict("projections_idempotent", idem, idem <= tolerance));
        report
    }

    /// Homogeneous parts `(T+, T-)` of an operator under conjugation by `U`.
    pub fn split_operator(&self, t: &CMatrix) -> (CMatrix, CMatrix) {
        let u = &self.grading_unitary;
        let utu = u.dot(t).dot(u);
        ((t + &utu).mapv(|z| z * 0.5), (t - &utu).mapv(|z| z * 0.5))
    }

    pub fn operator_grade(&self, t: &CMatrix, tolerance: f64) -> OperatorGrade {
        let (plus, minus) = self.split_operator(t);
        let s = frobenius(t);
        if within(frobenius(&minus), s, tolerance) {
            OperatorGrade::Even
        } else if within(frobenius(&plus), s, tolerance) {
            OperatorGrade::Odd
        } else {
            OperatorGrade::Mixed
        }
    }

    pub fn graded_operator(&self, t: CMatrix, tolerance: f64) -> GradedOperator {
        let grade = self.operator_grade(&t, tolerance);
        GradedOperator { matrix: t, grade }
    }

    pub fn vector_grade(&self, xi: &CVector, tolerance: f64) -> Option<Parity> {
        let uxi = self.grading_unitary.dot(xi);
        let s = linalg::vector_norm(xi);
        if within(linalg::vector_norm(&(&uxi - xi)), s, tolerance) {
            Some(Parity::Even)
        } else if within(linalg::vector_norm(&(&uxi + xi)), s, tolerance) {
            Some(Parity::Odd)
        } else {
            None
        }
    }

    /// `H (x) K` graded by `U_H (x) U_K`.
    pub fn tensor(&self, other: &GradedHilbert) -> GradedHilbert {
        GradedHilbert {
            grading_unitary: kron(&self.grading_unitary, &other.grading_unitary),
            even_projection: linalg::zeros(0, 0),
            odd_projection: linalg::zeros(0, 0),
        }
        .rebuild()
    }

    fn rebuild(mut self) -> Self {
        let id = identity(self.dim());
        self.even_projection = (&id + &self.grading_unitary).mapv(|z| z * 0.5);
        self.odd_projection = (&id - &self.grading_unitary).mapv(|z| z * 0.5);
        self
    }
}

/// `-1` exactly when both the operator and the vector are odd.
pub fn combined_grade(op: Parity, vector: Parity) -> Parity {
    if op.is_odd() && vector.is_odd() {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// The operator `S ⊛ T` on `H (x) K`.
///
/// Uses the closed form `S (x) T+ + (S U_H) (x) T-`, which agrees with the
/// vector-wise sign rule `(S ⊛ T)(ξ (x) η) = ε(T, ξ) Sξ (x) Tη`.
pub fn fermi_op_product(s: &CMatrix, t: &CMatrix, h: &GradedHilbert, k: &GradedHilbert) -> Result<CMatrix> {
    if s.dim() != (h.dim(), h.dim()) {
        return Err(Error::Shape(format!("left operator {:?} on a space of dimension {}", s.dim(), h.dim())));
    }
    if t.dim() != (k.dim(), k.dim()) {
        return Err(Error::Shape(format!("right operator {:?} on a space of dimension {}", t.dim(), k.dim())));
    }
    let (plus, minus) = k.split_operator(t);
    let mut out = kron(s, &plus);
    if frobenius(&minus) > 0.0 {
        out = out + kron(&s.dot(h.grading_unitary()), &minus);
    }
    Ok(out)
}

/// Basis of the algebra generated by all `S ⊛ T` with `S`, `T` running over the
/// two bases. The product space is graded by `U_H (x) U_K`.
pub fn fermi_vn_product(
    alg_a: &[CMatrix],
    alg_b: &[CMatrix],
    h: &GradedHilbert,
    k: &GradedHilbert,
    tolerance: f64,
) -> Result<Vec<CMatrix>> {
    if alg_a.is_empty() || alg_b.is_empty() {
        return Err(Error::InvalidInput("empty algebra basis".into()));
    }
    let mut generators = Vec::with_capacity(alg_a.len() * alg_b.len());
    for s in alg_a {
        for t in alg_b {
            generators.push(fermi_op_product(s, t, h, k)?);
        }
    }
    generated_algebra(&generators, h.dim() * k.dim(), tolerance)
}

/// The Fermi product of two graded algebras as a graded algebra on the
/// tensor product of their ambient spaces.
pub fn fermi_product_algebra(a: &GradedAlgebra, b: &GradedAlgebra) -> Result<GradedAlgebra> {
    let h = GradedHilbert::of_algebra(a)?;
    let k = GradedHilbert::of_algebra(b)?;
    let tol = a.tolerance().max(b.tolerance());
    let basis = fermi_vn_product(a.basis(), b.basis(), &h, &k, tol)?;
    let v = h.tensor(&k).grading_unitary().clone();
    GradedAlgebra::new(basis, GradingSpec::Ambient(v), tol)
}
