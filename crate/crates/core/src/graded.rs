//! Z2-graded *-algebras realised as concrete subalgebras of `M_d(C)`.
//!
//! An algebra is a linear span of `d x d` matrices together with a grading
//! automorphism. Its unit need not be a basis element. The grading can be given by a
//! self-adjoint unitary inside the algebra, by a self-adjoint unitary on the
//! ambient space, or directly as a matrix over the basis; all three are
//! canonicalised to a basis map at construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, dagger, distance, eigh, frobenius, hermitian_residual, identity, orthonormal_span,
    project_out, within, CMatrix, CVector, Frame,
};
use ndarray::Array2;
use crate::report::{Check, ValidationReport};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Eigenvalues closer than this (relative) are treated as one cluster when
/// seeding commutant computations. Merging too much is harmless, splitting a
/// genuine eigenspace is not.
const CLUSTER_GAP: f64 = 1e-7;

const GENERIC_SEED: u64 = 0x6b6c_6569_6e00;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Parity> {
        match sign {
            1 => Some(Parity::Even),
            -1 => Some(Parity::Odd),
            _ => None,
        }
    }

    /// Grade of a product of homogeneous elements.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

#[derive(Clone, Debug)]
pub enum GradingSpec {
    /// `alpha = ad(u)` with `u` a self-adjoint unitary of the algebra.
    /// `implementer` optionally fixes a different ambient unitary used to grade
    /// the underlying Hilbert space (it must implement the same automorphism).
    Inner { unit: CMatrix, implementer: Option<CMatrix> },
    /// `alpha = ad(V)` with `V` a self-adjoint unitary of the ambient space.
    Ambient(CMatrix),
    /// Column `j` holds the coordinates of `alpha(b_j)` over the basis.
    BasisMap(CMatrix),
}

impl GradingSpec {
    pub fn inner(unit: CMatrix) -> Self {
        GradingSpec::Inner { unit, implementer: None }
    }

    pub fn trivial(ambient_dim: usize) -> Self {
        GradingSpec::Ambient(identity(ambient_dim))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GradingSpec::Inner { .. } => "inner",
            GradingSpec::Ambient(_) => "ambient",
            GradingSpec::BasisMap(_) => "basis_map",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradedAlgebra {
    frame: Frame,
    unit: CMatrix,
    grading: GradingSpec,
    grading_map: CMatrix,
    tolerance: f64,
    inner: std::sync::OnceLock<InnerSearch>,
}

/// Outcome of looking for a self-adjoint unitary in the algebra implementing
/// the grading. `residual` is the worst relative defect of the best candidate,
/// so it stays meaningful when the search fails.
#[derive(Clone, Debug)]
pub struct InnerSearch {
    pub unit: Option<CMatrix>,
    pub residual: f64,
}

/// Basis of homogeneous elements: the unit first, then the rest of the even
/// part, then the odd part.
#[derive(Clone, Debug)]
pub struct HomogeneousBasis {
    pub even: Vec<CMatrix>,
    pub odd: Vec<CMatrix>,
}

impl HomogeneousBasis {
    pub fn len(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = (&CMatrix, Parity)> {
        self.even
            .iter()
            .map(|m| (m, Parity::Even))
            .chain(self.odd.iter().map(|m| (m, Parity::Odd)))
    }

    pub fn matrices(&self) -> Vec<CMatrix> {
        self.even.iter().chain(self.odd.iter()).cloned().collect()
    }

    pub fn parities(&self) -> Vec<Parity> {
        self.elements().map(|(_, p)| p).collect()
    }
}

/// An algebra element of definite grade.
#[derive(Clone, Debug)]
pub struct HomogeneousElement {
    pub matrix: CMatrix,
    pub parity: Parity,
}

impl HomogeneousElement {
    pub fn new(matrix: CMatrix, parity: Parity, algebra: &GradedAlgebra) -> Result<Self> {
        algebra.ensure_member(&matrix)?;
        let expected = matrix.mapv(|z| z * f64::from(parity.sign()));
        let residual = distance(&algebra.alpha(&matrix), &expected);
        if !within(residual, frobenius(&matrix), algebra.tolerance) {
            return Err(Error::InvalidInput(format!(
                "element is not homogeneous of grade {} (residual {residual:.3e})",
                parity.sign()
            )));
        }
        Ok(HomogeneousElement { matrix, parity })
    }
}

impl GradedAlgebra {
    pub fn new(basis: Vec<CMatrix>, grading: GradingSpec, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tolerance}")));
        }
        let frame = Frame::new(basis, tolerance)?;
        let (d, cols) = frame.shape();
        if d != cols {
            return Err(Error::Shape(format!("basis matrices must be square, got {d}x{cols}")));
        }
        let k = frame.len();
        let square = |m: &CMatrix, what: &str| -> Result<()> {
            if m.dim() != (d, d) {
                return Err(Error::Shape(format!("{what} has shape {:?}, expected {d}x{d}", m.dim())));
            }
            Ok(())
        };
        let grading_map = match &grading {
            GradingSpec::Inner { unit, implementer } => {
                square(unit, "inner grading unit")?;
                if let Some(v) = implementer {
                    square(v, "grading implementer")?;
                }
                let images: Vec<CMatrix> = frame.vectors().iter().map(|b| unit.dot(b).dot(unit)).collect();
                frame.coords_many(&images)
            }
            GradingSpec::Ambient(v) => {
                square(v, "ambient grading unitary")?;
                let images: Vec<CMatrix> = frame.vectors().iter().map(|b| v.dot(b).dot(v)).collect();
                frame.coords_many(&images)
            }
            GradingSpec::BasisMap(m) => {
                if m.dim() != (k, k) {
                    return Err(Error::Shape(format!(
                        "basis map has shape {:?}, expected {k}x{k}",
                        m.dim()
                    )));
                }
                m.clone()
            }
        };
        let unit = support_unit(frame.vectors(), tolerance);
        Ok(GradedAlgebra { frame, unit, grading, grading_map, tolerance, inner: Default::default() })
    }

    /// The unital *-algebra generated by `generators`, graded by `grading`.
    pub fn from_generators(generators: &[CMatrix], grading: GradingSpec, tolerance: f64) -> Result<Self> {
        let d = generators
            .first()
            .map(|g| g.nrows())
            .ok_or_else(|| Error::InvalidInput("no generators".into()))?;
        let basis = generated_algebra(generators, d, tolerance)?;
        GradedAlgebra::new(basis, grading, tolerance)
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.shape().0
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        self.frame.vectors()
    }

    /// The unit of the algebra: the projection onto the joint range of the
    /// basis. Validation checks that it lies in the algebra and acts as a unit.
    pub fn unit(&self) -> &CMatrix {
        &self.unit
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn grading(&self) -> &GradingSpec {
        &self.grading
    }

    /// Matrix of the grading automorphism over the basis.
    pub fn grading_map(&self) -> &CMatrix {
        &self.grading_map
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn coords(&self, x: &CMatrix) -> CVector {
        self.frame.coords(x)
    }

    pub fn combine(&self, coefficients: &CVector) -> CMatrix {
        self.frame.combine(coefficients)
    }

    pub fn residual(&self, x: &CMatrix) -> f64 {
        self.frame.residual(x)
    }

    pub fn contains(&self, x: &CMatrix) -> bool {
        x.dim() == (self.ambient_dim(), self.ambient_dim()) && self.frame.contains(x, self.tolerance)
    }

    pub fn ensure_member(&self, x: &CMatrix) -> Result<()> {
        let d = self.ambient_dim();
        if x.dim() != (d, d) {
            return Err(Error::Shape(format!("element of shape {:?} in a {d}x{d} algebra", x.dim())));
        }
        let residual = self.frame.residual(x);
        if within(residual, frobenius(x), self.tolerance) {
            Ok(())
        } else {
            Err(Error::Membership { residual })
        }
    }

    /// Applies the grading automorphism. For a basis-map grading the argument
    /// is first expanded over the basis, so it must lie in the algebra.
    pub fn alpha(&self, x: &CMatrix) -> CMatrix {
        match &self.grading {
            GradingSpec::Inner { unit, .. } => unit.dot(x).dot(unit),
            GradingSpec::Ambient(v) => v.dot(x).dot(v),
            GradingSpec::BasisMap(m) => self.frame.combine(&m.dot(&self.frame.coords(x))),
        }
    }

    pub fn alpha_coords(&self, coefficients: &CVector) -> CVector {
        self.grading_map.dot(coefficients)
    }

    /// `Some(parity)` for homogeneous elements, `None` for mixed ones.
    pub fn parity_of(&self, x: &CMatrix) -> Option<Parity> {
        let ax = self.alpha(x);
        let scale = frobenius(x);
        if within(distance(&ax, x), scale, self.tolerance) {
            Some(Parity::Even)
        } else if within(frobenius(&(&ax + x)), scale, self.tolerance) {
            Some(Parity::Odd)
        } else {
            None
        }
    }

    /// `((a + alpha(a)) / 2, (a - alpha(a)) / 2)`.
    pub fn split(&self, a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
        self.ensure_member(a)?;
        let aa = self.alpha(a);
        let even = (a + &aa).mapv(|z| z * 0.5);
        let odd = (a - &aa).mapv(|z| z * 0.5);
        Ok((even, odd))
    }

    pub fn even_part(&self, a: &CMatrix) -> Result<CMatrix> {
        Ok(self.split(a)?.0)
    }

    pub fn odd_part(&self, a: &CMatrix) -> Result<CMatrix> {
        Ok(self.split(a)?.1)
    }

    /// The conditional expectation `(id + alpha) / 2` onto the even part.
    pub fn conditional_expectation_even(&self, a: &CMatrix) -> Result<CMatrix> {
        self.even_part(a)
    }

    pub fn homogeneous_basis(&self) -> HomogeneousBasis {
        let mut evens = Vec::with_capacity(self.dim());
        let mut odds = Vec::with_capacity(self.dim());
        let mut scale: f64 = 1.0;
        for b in self.basis() {
            let ab = self.alpha(b);
            evens.push((b + &ab).mapv(|z| z * 0.5));
            odds.push((b - &ab).mapv(|z| z * 0.5));
            scale = scale.max(frobenius(b));
        }
        let unit = self.unit().clone();
        let unit_hat = unit.mapv(|z| z / frobenius(self.unit()));
        let rest = orthonormal_span(&project_out(&evens, &[unit_hat]), self.tolerance, scale);
        let mut even = vec![unit];
        even.extend(rest);
        let odd = orthonormal_span(&odds, self.tolerance, scale);
        HomogeneousBasis { even, odd }
    }

    /// A self-adjoint unitary of the algebra implementing the grading, if one
    /// is known.
    pub fn inner_unit(&self) -> Option<CMatrix> {
        self.inner_search().unit.clone()
    }

    /// Looks for `u = u* `, `u² = 1` in the algebra with `α = Ad u`.
    ///
    /// Solutions of `x b = α(b) x` form `u·Z(A)` when the grading is inner,
    /// a *-closed space whose generic self-adjoint element is invertible; its
    /// sign is then such a `u`.
    pub fn inner_search(&self) -> &InnerSearch {
        self.inner.get_or_init(|| match &self.grading {
            GradingSpec::Inner { unit, .. } => InnerSearch { unit: Some(unit.clone()), residual: 0.0 },
            _ => self.search_inner_unit(),
        })
    }

    fn search_inner_unit(&self) -> InnerSearch {
        let basis = self.basis();
        let (d, k) = (self.ambient_dim(), basis.len());
        let normed: Vec<CMatrix> = basis.iter().map(|b| b.mapv(|z| z / frobenius(b))).collect();
        let images: Vec<CMatrix> = self.frame.combine_many(&self.grading_map);
        let images: Vec<CMatrix> = images.iter().zip(basis).map(|(a, b)| a.mapv(|z| z / frobenius(b))).collect();
        let mut system = linalg::zeros(d * d * k, k);
        for (i, bi) in normed.iter().enumerate() {
            for (j, (bj, aj)) in normed.iter().zip(images.iter()).enumerate() {
                let block = bi.dot(bj) - aj.dot(bi);
                for (r, z) in block.iter().enumerate() {
                    system[[j * d * d + r, i]] = *z;
                }
            }
        }
        let svd = linalg::thin_svd(&system);
        let top = svd.s.first().copied().unwrap_or(0.0).max(1.0);
        let solutions: Vec<CMatrix> = (0..svd.s.len())
            .filter(|&j| svd.s[j] <= self.tolerance * top)
            .map(|j| {
                let coefs: CVector = svd.v.column(j).to_owned();
                let mut acc = linalg::zeros(d, d);
                for (c, b) in coefs.iter().zip(normed.iter()) {
                    acc.zip_mut_with(b, |a, &bv| *a += c * bv);
                }
                acc
            })
            .collect();
        let e = self.unit();
        let rank = linalg::trace(e).re.round() as usize;
        let mut best = InnerSearch { unit: None, residual: 1.0 };
        if solutions.is_empty() {
            return best;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_SEED ^ 2);
        for _ in 0..3 {
            let h = generic_hermitian(&solutions, &mut rng);
            let (vals, vecs) = eigh(&h);
            let big = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mut u = linalg::zeros(d, d);
            let mut kept = 0;
            for (i, &v) in vals.iter().enumerate() {
                if v.abs() > CLUSTER_GAP * big {
                    kept += 1;
                    let col = vecs.column(i);
                    let sign = v.signum();
                    for r in 0..d {
                        for c in 0..d {
                            u[[r, c]] += col[r] * col[c].conj() * sign;
                        }
                    }
                }
            }
            let residual = self.inner_defect(&u);
            if residual < best.residual {
                best.residual = residual;
            }
            if kept == rank && within(residual, 1.0, self.tolerance) {
                return InnerSearch { unit: Some(u), residual };
            }
        }
        best
    }

    /// Worst relative defect of `u` as an inner grading unit.
    fn inner_defect(&self, u: &CMatrix) -> f64 {
        let e = self.unit();
        let scale = frobenius(e).max(1.0);
        let mut worst = distance(&u.dot(u), e) / scale;
        worst = worst.max(self.residual(u) / scale);
        worst = worst.max(hermitian_residual(u) / scale);
        for (b, a) in self.basis().iter().zip(self.frame.combine_many(&self.grading_map)) {
            worst = worst.max(distance(&u.dot(b).dot(u), &a) / frobenius(b).max(1.0));
        }
        worst
    }

    /// Self-adjoint unitary on the ambient space whose conjugation restricts to
    /// the grading; this is what grades the Hilbert space in Fermi products.
    pub fn hilbert_grading(&self) -> Result<CMatrix> {
        let d = self.ambient_dim();
        match &self.grading {
            GradingSpec::Inner { implementer: Some(v), .. } => Ok(v.clone()),
            GradingSpec::Inner { unit, implementer: None } => Ok(unit + &(identity(d) - self.unit())),
            GradingSpec::Ambient(v) => Ok(v.clone()),
            GradingSpec::BasisMap(_) => match self.inner_unit() {
                Some(u) => Ok(&u + &(identity(d) - self.unit())),
                None => Err(Error::GradingNotImplemented(
                    "an outer basis-map grading carries no ambient unitary".into(),
                )),
            },
        }
    }

    /// The even subalgebra, trivially graded.
    pub fn even_subalgebra(&self) -> Result<GradedAlgebra> {
        let basis = self.homogeneous_basis().even;
        let grading = match self.hilbert_grading() {
            Ok(v) => GradingSpec::Ambient(v),
            Err(_) => GradingSpec::BasisMap(identity(basis.len())),
        };
        GradedAlgebra::new(basis, grading, self.tolerance)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.unit = support_unit(self.frame.vectors(), tolerance);
        self.inner = Default::default();
        self
    }

    /// Largest commutator norm over basis pairs.
    pub fn max_commutator(&self) -> f64 {
        let b = self.basis();
        let mut worst: f64 = 0.0;
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                worst = worst.max(frobenius(&linalg::commutator(&b[i], &b[j])));
            }
        }
        worst
    }

    pub fn is_commutative(&self) -> bool {
        let scale = self.basis().iter().map(frobenius).fold(1.0, f64::max);
        self.max_commutator() <= self.tolerance * scale * scale
    }

    /// Checks every structural invariant and reports the worst relative
    /// residual of each. Cost is quadratic in the dimension.
    pub fn validate(&self) -> ValidationReport {
        let tol = self.tolerance;
        let basis = self.basis();
        let k = basis.len();
        let rel = |r: f64, scale: f64| r / scale.max(1.0);
        let mut report = ValidationReport::new();

        report.push(Check::with_verdict(
            "linear_independence",
            self.frame.conditioning(),
            self.frame.rank() == k,
        ));

        let e = self.unit();
        let mut unit_res = rel(distance(&e.dot(e), e), frobenius(e))
            .max(rel(hermitian_residual(e), frobenius(e)))
            .max(rel(self.frame.residual(e), frobenius(e)));
        for b in basis {
            let s = frobenius(b);
            unit_res = unit_res.max(rel(distance(&e.dot(b), b), s)).max(rel(distance(&b.dot(e), b), s));
        }
        report.push(Check::with_verdict("unit", unit_res, unit_res <= tol));

        let mut product_res: f64 = 0.0;
        let mut grading_mult: f64 = 0.0;
        let images: Vec<CMatrix> = basis.iter().map(|b| self.alpha(b)).collect();
        for (i, bi) in basis.iter().enumerate() {
            let products: Vec<CMatrix> = basis.iter().map(|bj| bi.dot(bj)).collect();
            let coords = self.frame.coords_many(&products);
            let back = self.frame.combine_many(&coords);
            for (j, (p, q)) in products.iter().zip(back.iter()).enumerate() {
                product_res = product_res.max(rel(distance(p, q), frobenius(p)));
                let lhs = self.alpha(p);
                let rhs = images[i].dot(&images[j]);
                grading_mult = grading_mult.max(rel(distance(&lhs, &rhs), frobenius(p)));
            }
        }
        report.push(Check::with_verdict("product_closure", product_res, product_res <= tol));

        let adjoint_res = basis
            .iter()
            .map(|b| rel(self.frame.residual(&dagger(b)), frobenius(b)))
            .fold(0.0, f64::max);
        report.push(Check::with_verdict("adjoint_closure", adjoint_res, adjoint_res <= tol));

        let mut involution: f64 = 0.0;
        let mut star: f64 = 0.0;
        let mut into: f64 = 0.0;
        for (b, ab) in basis.iter().zip(images.iter()) {
            let s = frobenius(b);
            involution = involution.max(rel(distance(&self.alpha(ab), b), s));
            star = star.max(rel(distance(&self.alpha(&dagger(b)), &dagger(ab)), s));
            into = into.max(rel(self.frame.residual(ab), s));
        }
        report.push(Check::with_verdict("grading_involution", involution, involution <= tol));
        report.push(Check::with_verdict("grading_multiplicative", grading_mult, grading_mult <= tol));
        report.push(Check::with_verdict("grading_star", star, star <= tol));
        report.push(Check::with_verdict("grading_into_algebra", into, into <= tol));

        let d = self.ambient_dim();
        match &self.grading {
            GradingSpec::Inner { unit, implementer } => {
                let s = frobenius(unit);
                let member = rel(self.frame.residual(unit), s);
                report.push(Check::with_verdict("inner_unit_in_algebra", member, member <= tol));
                let sa = rel(hermitian_residual(unit), s);
                report.push(Check::with_verdict("inner_unit_selfadjoint", sa, sa <= tol));
                let sq = rel(distance(&unit.dot(unit), e), s);
                report.push(Check::with_verdict("inner_unit_involution", sq, sq <= tol));
                if let Some(v) = implementer {
                    let vs = frobenius(v);
                    let unitary = rel(hermitian_residual(v), vs).max(rel(linalg::unitary_residual(v), vs));
                    report.push(Check::with_verdict("implementer_selfadjoint_unitary", unitary, unitary <= tol));
                    let implements = basis
                        .iter()
                        .zip(images.iter())
                        .map(|(b, ab)| rel(distance(&v.dot(b).dot(v), ab), frobenius(b)))
                        .fold(0.0, f64::max);
                    report.push(Check::with_verdict("implementer_implements_grading", implements, implements <= tol));
                }
            }
            GradingSpec::Ambient(v) => {
                let vs = frobenius(v).max((d as f64).sqrt());
                let unitary = rel(hermitian_residual(v), vs).max(rel(linalg::unitary_residual(v), vs));
                report.push(Check::with_verdict("ambient_selfadjoint_unitary", unitary, unitary <= tol));
            }
            GradingSpec::BasisMap(_) => {}
        }
        report
    }
}

/// A random real combination of the self-adjoint parts of `elements`,
/// normalised; generic in the sense that its spectral projections are as fine
/// as those of the whole family with probability one.
fn generic_hermitian(elements: &[CMatrix], rng: &mut ChaCha8Rng) -> CMatrix {
    let d = elements[0].nrows();
    let mut h = linalg::zeros(d, d);
    for e in elements {
        let s = frobenius(e);
        if s == 0.0 {
            continue;
        }
        let herm = (e + &dagger(e)).mapv(|z| z / s);
        let anti = (e - &dagger(e)).mapv(|z| z * linalg::I / s);
        let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        h = h + herm.mapv(|z| z * x) + anti.mapv(|z| z * y);
    }
    let n = frobenius(&h);
    if n > 0.0 {
        h.mapv_inplace(|z| z / n);
    }
    h
}

/// Groups ascending eigenvalues into clusters of indices.
fn clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if (v - values[*last.last().unwrap()]).abs() <= CLUSTER_GAP * scale => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Keeps the part of the orthonormal family `candidates` that commutes with `g`.
fn restrict_commuting(candidates: Vec<CMatrix>, g: &CMatrix, tol: f64) -> Vec<CMatrix> {
    let gn = frobenius(g);
    if candidates.is_empty() || gn == 0.0 {
        return candidates;
    }
    let g = g.mapv(|z| z / gn);
    let (d, _) = g.dim();
    let images: Vec<CMatrix> = candidates.iter().map(|y| linalg::commutator(y, &g)).collect();
    let stacked = linalg::stack_columns(&images, d, d);
    let svd = linalg::thin_svd(&stacked);
    let m = candidates.len();
    let null: Vec<usize> = (0..svd.s.len()).filter(|&j| svd.s[j] <= tol).collect();
    // thin SVD of a d^2 x m matrix with m <= d^2 returns all m right vectors
    debug_assert_eq!(svd.v.nrows(), m);
    null.into_iter()
        .map(|j| {
            let mut acc = linalg::zeros(d, d);
            for (i, y) in candidates.iter().enumerate() {
                let coef = svd.v[[i, j]];
                acc.zip_mut_with(y, |a, &yv| *a += coef * yv);
            }
            acc
        })
        .collect()
}

fn commuting_part(mut candidates: Vec<CMatrix>, elements: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_SEED ^ 1);
    for _ in 0..2 {
        let h = generic_hermitian(elements, &mut rng);
        candidates = restrict_commuting(candidates, &h, tol);
    }
    for e in elements {
        if candidates.is_empty() {
            break;
        }
        candidates = restrict_commuting(candidates, e, tol);
    }
    candidates
}

/// Support projection of `Σ b b*`. The first basis element is returned
/// verbatim when it already is that projection, which keeps the usual
/// identity-first bases exact.
fn support_unit(basis: &[CMatrix], tol: f64) -> CMatrix {
    let d = basis[0].nrows();
    let mut m = linalg::zeros(d, d);
    for b in basis {
        m = m + b.dot(&dagger(b));
    }
    let (vals, vecs) = eigh(&m);
    let top = vals.iter().copied().fold(0.0, f64::max);
    let cut = tol.max(1e-12) * top;
    let mut p = linalg::zeros(d, d);
    for (j, &v) in vals.iter().enumerate() {
        if v > cut {
            let col = vecs.column(j);
            p = p + Array2::from_shape_fn((d, d), |(r, s)| col[r] * col[s].conj());
        }
    }
    if distance(&basis[0], &p) <= 1e-12 * frobenius(&p).max(1.0) {
        basis[0].clone()
    } else {
        p
    }
}

fn check_square(elements: &[CMatrix], d: usize) -> Result<()> {
    match elements.iter().find(|e| e.dim() != (d, d)) {
        Some(bad) => Err(Error::Shape(format!("matrix of shape {:?}, expected {d}x{d}", bad.dim()))),
        None => Ok(()),
    }
}

/// Basis of the smallest unital *-algebra containing `generators`: the
/// identity first, followed by an orthonormal basis of its complement.
pub fn generated_algebra(generators: &[CMatrix], ambient_dim: usize, tol: f64) -> Result<Vec<CMatrix>> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    check_square(generators, ambient_dim)?;
    let d = ambient_dim;
    let unit = identity(d);
    let mut gens: Vec<CMatrix> = Vec::with_capacity(2 * generators.len());
    for g in generators {
        if frobenius(g) > 0.0 {
            gens.push(g.clone());
            if hermitian_residual(g) > tol * frobenius(g) {
                gens.push(dagger(g));
            }
        }
    }
    let scale = gens.iter().map(frobenius).fold(1.0, f64::max);
    let mut orthonormal = vec![unit.mapv(|z| z / (d as f64).sqrt())];
    let mut frontier = orthonormal_span(&project_out(&gens, &orthonormal), tol, scale);
    orthonormal.extend(frontier.iter().cloned());
    let max_rounds = d * d;
    let mut rounds = 0;
    while !frontier.is_empty() && orthonormal.len() < d * d {
        rounds += 1;
        if rounds > max_rounds {
            return Err(Error::ClosureDiverged { rounds: max_rounds });
        }
        let candidates: Vec<CMatrix> = gens.iter().flat_map(|g| frontier.iter().map(move |f| g.dot(f))).collect();
        let cand_scale = candidates.iter().map(frobenius).fold(1.0, f64::max);
        frontier = orthonormal_span(&project_out(&candidates, &orthonormal), tol, cand_scale);
        orthonormal.extend(frontier.iter().cloned());
    }
    let mut basis = vec![unit];
    basis.extend(orthonormal.into_iter().skip(1));
    Ok(basis)
}

/// Orthonormal basis of `{X : X b = b X for every b in elements}`.
///
/// The search space starts as the commutant of a generic self-adjoint element
/// (block-diagonal in its eigenbasis) and is cut down by one linear null-space
/// computation per element.
pub fn commutant(elements: &[CMatrix], ambient_dim: usize, tol: f64) -> Result<Vec<CMatrix>> {
    check_square(elements, ambient_dim)?;
    let d = ambient_dim;
    if elements.is_empty() {
        return Ok(linalg::orthonormal_span(&matrix_units(d), tol, 1.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_SEED);
    let h = generic_hermitian(elements, &mut rng);
    let (values, vectors) = eigh(&h);
    let mut candidates = Vec::new();
    for cluster in clusters(&values) {
        for &i in &cluster {
            for &j in &cluster {
                let vi = vectors.column(i);
                let vj = vectors.column(j);
                candidates.push(ndarray::Array2::from_shape_fn((d, d), |(r, s)| vi[r] * vj[s].conj()));
            }
        }
    }
    Ok(commuting_part(candidates, elements, tol))
}

/// Orthonormal basis of the centre `A ∩ A'` of the algebra spanned by `basis`.
pub fn center(basis: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    if basis.is_empty() {
        return Vec::new();
    }
    let scale = basis.iter().map(frobenius).fold(1.0, f64::max);
    let span = orthonormal_span(basis, tol, scale);
    commuting_part(span, basis, tol)
}

fn matrix_units(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut m = linalg::zeros(d, d);
            m[[i, j]] = linalg::ONE;
            out.push(m);
        }
    }
    out
}

/// Worst relative residual of `b` against `span(a)`, and vice versa.
pub fn span_distance(a: &[CMatrix], b: &[CMatrix], tol: f64) -> f64 {
    fn one_way(from: &[CMatrix], into: &[CMatrix], tol: f64) -> f64 {
        if from.is_empty() {
            return 0.0;
        }
        let scale = into.iter().map(frobenius).fold(1.0, f64::max);
        let q = orthonormal_span(into, tol, scale);
        let residuals = project_out(from, &q);
        from.iter()
            .zip(residuals.iter())
            .map(|(x, r)| frobenius(r) / frobenius(x).max(1.0))
            .fold(0.0, f64::max)
    }
    one_way(a, b, tol).max(one_way(b, a, tol))
}
