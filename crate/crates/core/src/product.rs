//! Finite Fermi and ordinary tensor products of graded algebras.
//!
//! The realised algebra of an `n`-leg product lives on the Kronecker product
//! of the leg ambient spaces (leg 0 is the slowest index). Its basis consists
//! of the normal-ordered words `embed(0, h_0) ... embed(n-1, h_{n-1})` over
//! homogeneous leg bases, with the identity first.

use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{GradedAlgebra, GradingSpec, HomogeneousBasis, Parity};
use crate::hilbert::{fermi_op_product, GradedHilbert};
use crate::linalg::{self, distance, identity, kron, kron_all, CMatrix, CVector};
use crate::map::AlgebraMap;
use crate::report::{Check, Report};
use crate::states::StateFunctional;

/// Soft cap on the number of legs.
pub const MAX_LEGS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Fermi,
    Ordinary,
}

impl std::str::FromStr for ProductKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fermi" => Ok(ProductKind::Fermi),
            "ordinary" => Ok(ProductKind::Ordinary),
            other => Err(Error::InvalidInput(format!("unknown product kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProductAlgebra {
    kind: ProductKind,
    factors: Vec<Arc<GradedAlgebra>>,
    spaces: Vec<GradedHilbert>,
    leg_bases: Vec<HomogeneousBasis>,
    words: Vec<Vec<usize>>,
    realized: Arc<GradedAlgebra>,
    embedding: Vec<Vec<CMatrix>>,
}

/// Builds the product of `factors`. Each factor is validated first.
pub fn build_product(factors: Vec<Arc<GradedAlgebra>>, kind: ProductKind) -> Result<ProductAlgebra> {
    if factors.is_empty() {
        return Err(Error::InvalidInput("a product needs at least one factor".into()));
    }
    if factors.len() > MAX_LEGS {
        return Err(Error::InvalidInput(format!(
            "{} legs requested, at most {MAX_LEGS} are supported",
            factors.len()
        )));
    }
    for f in &factors {
        f.validate().ensure_pass()?;
    }
    let spaces = factors.iter().map(|f| GradedHilbert::of_algebra(f)).collect::<Result<Vec<_>>>()?;
    let leg_bases: Vec<HomogeneousBasis> = factors.iter().map(|f| f.homogeneous_basis()).collect();
    let tol = factors.iter().map(|f| f.tolerance()).fold(0.0, f64::max);

    let words: Vec<Vec<usize>> = leg_bases.iter().map(|b| 0..b.len()).multi_cartesian_product().collect();
    let parities: Vec<Vec<Parity>> = leg_bases.iter().map(|b| b.parities()).collect();
    let mats: Vec<Vec<CMatrix>> = leg_bases.iter().map(|b| b.matrices()).collect();
    let mut basis = Vec::with_capacity(words.len());
    for w in &words {
        basis.push(word_matrix(kind, &spaces, &mats, &parities, w));
    }
    let grading = kron_all(spaces.iter().map(|s| s.grading_unitary()));
    let realized = Arc::new(GradedAlgebra::new(basis, GradingSpec::Ambient(grading), tol)?);

    let mut product = ProductAlgebra { kind, factors, spaces, leg_bases, words, realized, embedding: Vec::new() };
    let mut embedding = Vec::with_capacity(product.legs());
    for (k, f) in product.factors.iter().enumerate() {
        let legs = f.basis().iter().map(|b| product.embed_unchecked(k, b)).collect::<Result<Vec<_>>>()?;
        embedding.push(legs);
    }
    product.embedding = embedding;
    Ok(product)
}

/// `⊗_j h_j U_j^{m_j}` with `m_j` the number of odd letters after leg `j`;
/// this is the ordered product of the embedded letters.
fn word_matrix(
    kind: ProductKind,
    spaces: &[GradedHilbert],
    mats: &[Vec<CMatrix>],
    parities: &[Vec<Parity>],
    word: &[usize],
) -> CMatrix {
    let n = word.len();
    let mut odd_after = 0usize;
    let mut legs: Vec<CMatrix> = Vec::with_capacity(n);
    for j in (0..n).rev() {
        let h = &mats[j][word[j]];
        let leg = if kind == ProductKind::Fermi && odd_after % 2 == 1 {
            h.dot(spaces[j].grading_unitary())
        } else {
            h.clone()
        };
        legs.push(leg);
        if parities[j][word[j]].is_odd() {
            odd_after += 1;
        }
    }
    legs.reverse();
    kron_all(legs.iter())
}

impl ProductAlgebra {
    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn legs(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Arc<GradedAlgebra>] {
        &self.factors
    }

    pub fn factor(&self, k: usize) -> Result<&Arc<GradedAlgebra>> {
        self.factors.get(k).ok_or(Error::Index { index: k, legs: self.legs() })
    }

    pub fn spaces(&self) -> &[GradedHilbert] {
        &self.spaces
    }

    pub fn leg_basis(&self, k: usize) -> &HomogeneousBasis {
        &self.leg_bases[k]
    }

    /// Multi-index of each realised basis word over the homogeneous leg bases.
    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn realized(&self) -> &Arc<GradedAlgebra> {
        &self.realized
    }

    pub fn ambient_dim(&self) -> usize {
        self.realized.ambient_dim()
    }

    /// `embed(k, b_i)` for every basis element `b_i` of factor `k`.
    pub fn embedding(&self) -> &[Vec<CMatrix>] {
        &self.embedding
    }

    /// Parity of realised basis word `j`.
    pub fn word_parity(&self, j: usize) -> Parity {
        self.words[j]
            .iter()
            .enumerate()
            .map(|(k, &i)| if i < self.leg_bases[k].even.len() { Parity::Even } else { Parity::Odd })
            .fold(Parity::Even, Parity::combine)
    }

    /// The product of the first `m` legs.
    pub fn prefix(&self, m: usize) -> Result<ProductAlgebra> {
        if m == 0 || m > self.legs() {
            return Err(Error::Index { index: m, legs: self.legs() });
        }
        build_product(self.factors[..m].to_vec(), self.kind)
    }

    /// `1 ⊛ ... ⊛ b ⊛ ... ⊛ 1` with `b` in leg `k`.
    pub fn embed(&self, k: usize, b: &CMatrix) -> Result<CMatrix> {
        self.factor(k)?.ensure_member(b)?;
        self.embed_unchecked(k, b)
    }

    fn embed_unchecked(&self, k: usize, b: &CMatrix) -> Result<CMatrix> {
        let n = self.legs();
        if k >= n {
            return Err(Error::Index { index: k, legs: n });
        }
        let letter = |j: usize| if j == k { b.clone() } else { identity(self.spaces[j].dim()) };
        match self.kind {
            ProductKind::Ordinary => {
                let legs: Vec<CMatrix> = (0..n).map(letter).collect();
                Ok(kron_all(legs.iter()))
            }
            ProductKind::Fermi => {
                // left-associative: ((x_0 ⊛ x_1) ⊛ x_2) ⊛ ...
                let mut acc = letter(0);
                let mut space = self.spaces[0].clone();
                for j in 1..n {
                    acc = fermi_op_product(&acc, &letter(j), &space, &self.spaces[j])?;
                    space = space.tensor(&self.spaces[j]);
                }
                Ok(acc)
            }
        }
    }

    /// Residuals of the cross-leg relations of the embedded homogeneous
    /// generators: commutators for the ordinary kind or when one letter is
    /// even, anticommutators for two odd letters of a Fermi product.
    pub fn relation_residuals(&self) -> Report {
        let tol = self.realized.tolerance();
        let n = self.legs();
        let mut embedded: Vec<Vec<(CMatrix, Parity)>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut legs = Vec::new();
            for (h, p) in self.leg_bases[k].elements() {
                legs.push((self.embed_unchecked(k, h).expect("leg index in range"), p));
            }
            embedded.push(legs);
        }
        let mut commute: f64 = 0.0;
        let mut anti: f64 = 0.0;
        for k in 0..n {
            for l in (k + 1)..n {
                for (x, px) in &embedded[k] {
                    for (y, py) in &embedded[l] {
                        let scale = linalg::frobenius(x).max(1.0) * linalg::frobenius(y).max(1.0);
                        if self.kind == ProductKind::Fermi && px.is_odd() && py.is_odd() {
                            anti = anti.max(linalg::frobenius(&linalg::anticommutator(x, y)) / scale);
                        } else {
                            commute = commute.max(linalg::frobenius(&linalg::commutator(x, y)) / scale);
                        }
                    }
                }
            }
        }
        let mut report = Report::new();
        report.push(Check::with_verdict("cross_leg_commutation", commute, commute <= tol));
        if self.kind == ProductKind::Fermi {
            report.push(Check::with_verdict("cross_leg_anticommutation", anti, anti <= tol));
        }
        report
    }

    /// Embedded homogeneous leg generators; they generate the realised algebra.
    pub fn generators(&self) -> Vec<CMatrix> {
        let mut out = Vec::new();
        for k in 0..self.legs() {
            for (h, _) in self.leg_bases[k].elements().skip(1) {
                out.push(self.embed_unchecked(k, h).expect("leg index in range"));
            }
        }
        if out.is_empty() {
            out.push(identity(self.ambient_dim()));
        }
        out
    }

    /// The product of the given leg states, via the Kronecker product of their
    /// densities. Fermi products need even legs.
    pub fn product_state(&self, legs: &[StateFunctional]) -> Result<StateFunctional> {
        if legs.len() != self.legs() {
            return Err(Error::Shape(format!("{} states for {} legs", legs.len(), self.legs())));
        }
        for (k, s) in legs.iter().enumerate() {
            if s.algebra().ambient_dim() != self.spaces[k].dim() {
                return Err(Error::Shape(format!("state {k} lives on a different ambient space")));
            }
            if self.kind == ProductKind::Fermi && !s.is_even() {
                return Err(Error::NotEven { residual: s.even_residual() });
            }
        }
        let rho = kron_all(legs.iter().map(|s| s.density()));
        StateFunctional::new(self.realized.clone(), rho)
    }

    fn same_factors(&self, k: usize, l: usize) -> bool {
        let (a, b) = (&self.factors[k], &self.factors[l]);
        Arc::ptr_eq(a, b)
            || (a.dim() == b.dim()
                && a.ambient_dim() == b.ambient_dim()
                && a.basis().iter().zip(b.basis()).all(|(x, y)| distance(x, y) <= a.tolerance()))
    }
}

/// `×ⁿ φ` on the `n`-fold product of the algebra of `phi`.
pub fn product_state_n(phi: &StateFunctional, n: usize, kind: ProductKind) -> Result<(ProductAlgebra, StateFunctional)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !phi.is_even() {
        return Err(Error::NotEven { residual: phi.even_residual() });
    }
    let product = build_product(vec![phi.algebra().clone(); n], kind)?;
    let state = product.product_state(&vec![phi.clone(); n])?;
    Ok((product, state))
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!("{} entries for {n} legs", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// The automorphism sending `embed(k, b)` to `embed(perm[k], b)`. On a Fermi
/// product this reorders odd letters, which produces the graded flip signs.
pub fn permutation_action(product: &ProductAlgebra, perm: &[usize]) -> Result<AlgebraMap> {
    let n = product.legs();
    check_permutation(perm, n)?;
    for k in 0..n {
        if !product.same_factors(k, perm[k]) {
            return Err(Error::InvalidPermutation(format!(
                "legs {k} and {} carry different algebras",
                perm[k]
            )));
        }
    }
    let mut letters: Vec<Vec<CMatrix>> = Vec::with_capacity(n);
    for k in 0..n {
        let target = perm[k];
        let mut row = Vec::new();
        for (h, _) in product.leg_bases[k].elements() {
            row.push(product.embed_unchecked(target, h)?);
        }
        letters.push(row);
    }
    let images: Vec<CMatrix> = product
        .words
        .iter()
        .map(|w| {
            let mut acc = letters[0][w[0]].clone();
            for k in 1..n {
                acc = acc.dot(&letters[k][w[k]]);
            }
            acc
        })
        .collect();
    AlgebraMap::from_images(product.realized.clone(), product.realized.clone(), &images)
}

/// All permutations for `n <= 4`, adjacent transpositions beyond.
pub fn test_permutations(n: usize) -> Vec<Vec<usize>> {
    if n <= 4 {
        (0..n).permutations(n).collect()
    } else {
        (0..n - 1)
            .map(|i| {
                let mut p: Vec<usize> = (0..n).collect();
                p.swap(i, i + 1);
                p
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PermutationResidual {
    pub permutation: Vec<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub permutations: Vec<PermutationResidual>,
}

/// Whether `state ∘ θ_perm = state` for the permutations of [`test_permutations`].
pub fn is_symmetric(product: &ProductAlgebra, state: &StateFunctional) -> Result<SymmetryReport> {
    if state.algebra().dim() != product.realized.dim() {
        return Err(Error::Shape("state does not live on the realised product".into()));
    }
    let tol = product.realized.tolerance();
    let values = state.values();
    let mut permutations = Vec::new();
    for perm in test_permutations(product.legs()) {
        let theta = permutation_action(product, &perm)?;
        let moved = theta.transpose_values(&values);
        let residual = moved.iter().zip(values.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        permutations.push(PermutationResidual { permutation: perm, residual });
    }
    let symmetric = permutations.iter().all(|p| p.residual < tol);
    Ok(SymmetryReport { symmetric, permutations })
}

/// Legwise `(id + α)/2`: keeps a basis word iff every letter is even.
pub fn expectation_even_product(product: &ProductAlgebra) -> Result<AlgebraMap> {
    if product.kind != ProductKind::Fermi {
        return Err(Error::InvalidInput("the even product expectation is defined on Fermi products".into()));
    }
    let k = product.realized.dim();
    let mut m = linalg::zeros(k, k);
    for (j, w) in product.words.iter().enumerate() {
        let all_even = w.iter().enumerate().all(|(leg, &i)| i < product.leg_bases[leg].even.len());
        if all_even {
            m[[j, j]] = linalg::ONE;
        }
    }
    AlgebraMap::new(product.realized.clone(), product.realized.clone(), m)
}

/// Coordinates of `x` over the realised word basis.
pub fn word_coords(product: &ProductAlgebra, x: &CMatrix) -> CVector {
    product.realized.coords(x)
}

/// The ordinary Kronecker embedding, independent of any product object.
pub fn kron_embed(dims: &[usize], k: usize, b: &CMatrix) -> CMatrix {
    let legs: Vec<CMatrix> = dims.iter().enumerate().map(|(j, &d)| if j == k { b.clone() } else { identity(d) }).collect();
    kron_all(legs.iter())
}

/// Compatibility of the `n`- and `n+1`-leg embeddings: `embed_{n+1}(k, b) = embed_n(k, b) ⊗ 1`.
pub fn compatibility_residual(small: &ProductAlgebra, large: &ProductAlgebra) -> Result<f64> {
    if large.legs() != small.legs() + 1 {
        return Err(Error::InvalidInput("products must differ by exactly one leg".into()));
    }
    let last = large.spaces[small.legs()].dim();
    let mut worst: f64 = 0.0;
    for k in 0..small.legs() {
        for b in small.factors[k].basis() {
            let lhs = large.embed_unchecked(k, b)?;
            let rhs = kron(&small.embed_unchecked(k, b)?, &identity(last));
            worst = worst.max(distance(&lhs, &rhs) / linalg::frobenius(&rhs).max(1.0));
        }
    }
    Ok(worst)
}
