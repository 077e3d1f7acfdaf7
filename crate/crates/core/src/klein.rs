//! The Klein transformation between Fermi and ordinary products of algebras
//! whose gradings are inner.
//!
//! For legs `0..n-1` with inner units `u_0, ..., u_{n-2}` the generators
//!
//! ```text
//! G_k(h) = embed(k, h)                       h even
//! G_k(h) = (u_0 ⊛ ... ⊛ u_{k-1}) embed(k, h)  h odd
//! ```
//!
//! of the Fermi product commute across legs, and `κ` sends
//! `G_0(h_0) ... G_{n-1}(h_{n-1})` to `h_0 ⊗ ... ⊗ h_{n-1}`. For two legs this
//! is `κ((a ⊛ 1) σ(1 ⊛ b)) = a ⊗ b` with `σ(a ⊛ b) = a ⊛ b₊ + au ⊛ b₋`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graded::{span_distance, GradedAlgebra, Parity};
use crate::linalg::{self, distance, frobenius, identity, kron, CMatrix};
use crate::map::AlgebraMap;
use crate::product::{build_product, ProductAlgebra, ProductKind};
use crate::report::{Check, Report};
use crate::states::StateFunctional;

#[derive(Clone, Debug)]
pub struct KleinMap {
    map: AlgebraMap,
    source: Arc<ProductAlgebra>,
    target: Arc<ProductAlgebra>,
    inner_units: Vec<CMatrix>,
    /// Matrix of `κ⁻¹`, read off the generator words.
    inverse: CMatrix,
}

/// Inner units of legs `0..n-1`; the last leg may be outer.
pub fn inner_units(product: &ProductAlgebra) -> Result<Vec<CMatrix>> {
    let n = product.legs();
    (0..n.saturating_sub(1))
        .map(|k| product.factors()[k].inner_unit().ok_or(Error::GradingNotInner { leg: k }))
        .collect()
}

fn level_units(product: &ProductAlgebra, units: &[CMatrix]) -> Result<Vec<CMatrix>> {
    // level_units[k] = u_0 ⊛ ... ⊛ u_{k-1} ⊛ 1 ⊛ ... (even, so a plain product)
    let mut out = vec![identity(product.ambient_dim())];
    for (k, u) in units.iter().enumerate() {
        let next = out[k].dot(&product.embed(k, u)?);
        out.push(next);
    }
    Ok(out)
}

/// `G_k(h)` for homogeneous `h` of the given parity.
fn generator(product: &ProductAlgebra, levels: &[CMatrix], k: usize, h: &CMatrix, parity: Parity) -> Result<CMatrix> {
    let e = product.embed(k, h)?;
    Ok(match parity {
        Parity::Even => e,
        Parity::Odd => levels[k].dot(&e),
    })
}

/// The commuting generators `G_k(h)` over the homogeneous leg bases.
pub fn klein_generators(product: &ProductAlgebra) -> Result<Vec<CMatrix>> {
    let units = inner_units(product)?;
    let levels = level_units(product, &units)?;
    let mut out = Vec::new();
    for k in 0..product.legs() {
        for (h, p) in product.leg_basis(k).elements() {
            out.push(generator(product, &levels, k, h, p)?);
        }
    }
    Ok(out)
}

/// `σ(a ⊛ b) = a ⊛ b₊ + (a u) ⊛ b₋` on a two-leg Fermi product whose first
/// leg has inner unit `u`.
pub fn klein_sigma(product: &ProductAlgebra) -> Result<AlgebraMap> {
    if product.kind() != ProductKind::Fermi || product.legs() != 2 {
        return Err(Error::InvalidInput("σ is defined on two-leg Fermi products".into()));
    }
    let u = product.factors()[0].inner_unit().ok_or(Error::GradingNotInner { leg: 0 })?;
    let (b0, b1) = (product.leg_basis(0), product.leg_basis(1));
    let m0 = b0.matrices();
    let m1 = b1.matrices();
    let p1 = b1.parities();
    let mut images = Vec::with_capacity(product.words().len());
    for w in product.words() {
        let (a, b) = (&m0[w[0]], &m1[w[1]]);
        let left = match p1[w[1]] {
            Parity::Even => a.clone(),
            Parity::Odd => a.dot(&u),
        };
        images.push(product.embed(0, &left)?.dot(&product.embed(1, b)?));
    }
    AlgebraMap::from_images(product.realized().clone(), product.realized().clone(), &images)
}

fn same_legs(a: &ProductAlgebra, b: &ProductAlgebra) -> bool {
    a.legs() == b.legs()
        && a.factors().iter().zip(b.factors()).all(|(x, y)| {
            x.dim() == y.dim()
                && x.ambient_dim() == y.ambient_dim()
                && span_distance(x.basis(), y.basis(), x.tolerance()) <= x.tolerance()
        })
}

/// Builds `κ` from a Fermi product onto the ordinary product of the same legs.
pub fn build_klein(source: Arc<ProductAlgebra>, target: Arc<ProductAlgebra>) -> Result<KleinMap> {
    if source.kind() != ProductKind::Fermi || target.kind() != ProductKind::Ordinary {
        return Err(Error::InvalidInput("κ maps a Fermi product onto an ordinary one".into()));
    }
    if source.legs() < 2 {
        return Err(Error::InvalidInput(format!(
            "the Klein transformation needs at least two legs, got {}",
            source.legs()
        )));
    }
    if !same_legs(&source, &target) {
        return Err(Error::InvalidInput("the two products have different legs".into()));
    }
    let units = inner_units(&source)?;
    let levels = level_units(&source, &units)?;
    let n = source.legs();
    let letters: Vec<Vec<CMatrix>> = (0..n)
        .map(|k| {
            source
                .leg_basis(k)
                .elements()
                .map(|(h, p)| generator(&source, &levels, k, h, p))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let words: Vec<CMatrix> = source
        .words()
        .iter()
        .map(|w| {
            let mut acc = letters[0][w[0]].clone();
            for k in 1..n {
                acc = acc.dot(&letters[k][w[k]]);
            }
            acc
        })
        .collect();
    let plain: Vec<CMatrix> = source
        .words()
        .iter()
        .map(|w| {
            let legs: Vec<CMatrix> = (0..n).map(|k| source.leg_basis(k).matrices()[w[k]].clone()).collect();
            linalg::kron_all(legs.iter())
        })
        .collect();
    // κ P = Q with P, Q the coordinates of the generator words and of the plain tensors
    let p = source.realized().frame().coords_many(&words);
    let q = target.realized().frame().coords_many(&plain);
    let inverse = p.dot(&linalg::inverse(&q)?);
    let s = linalg::singular_values(&p);
    let tol = source.realized().tolerance();
    let (top, bottom) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    if top == 0.0 || bottom <= tol * top {
        return Err(Error::RankDeficient(format!(
            "generator words span a space of conditioning {:.3e}",
            if top > 0.0 { bottom / top } else { 0.0 }
        )));
    }
    let matrix = q.dot(&linalg::inverse(&p)?);
    let map = AlgebraMap::new(source.realized().clone(), target.realized().clone(), matrix)?;
    Ok(KleinMap { map, source, target, inner_units: units, inverse })
}

/// `κ_n` for `n` copies of `b`.
pub fn klein_iterated(b: Arc<GradedAlgebra>, n: usize) -> Result<KleinMap> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("the Klein transformation needs at least two legs, got {n}")));
    }
    if b.inner_unit().is_none() {
        return Err(Error::GradingNotInner { leg: 0 });
    }
    let source = Arc::new(build_product(vec![b.clone(); n], ProductKind::Fermi)?);
    let target = Arc::new(build_product(vec![b; n], ProductKind::Ordinary)?);
    build_klein(source, target)
}

/// `κᵗ(ψ) = ψ ∘ κ`.
pub fn klein_transpose(kmap: &KleinMap, psi: &StateFunctional) -> Result<StateFunctional> {
    let target = kmap.target.realized();
    if psi.algebra().dim() != target.dim() || psi.algebra().ambient_dim() != target.ambient_dim() {
        return Err(Error::Shape("state does not live on the target of κ".into()));
    }
    let values = kmap.map.transpose_values(&psi.values());
    StateFunctional::from_values(kmap.source.realized().clone(), &values)
}

impl KleinMap {
    pub fn map(&self) -> &AlgebraMap {
        &self.map
    }

    pub fn source(&self) -> &Arc<ProductAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ProductAlgebra> {
        &self.target
    }

    pub fn inner_units(&self) -> &[CMatrix] {
        &self.inner_units
    }

    pub fn legs(&self) -> usize {
        self.source.legs()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        self.map.apply(x)
    }

    /// The same map with its matrix replaced; used to probe the verifier.
    pub fn with_matrix(&self, matrix: CMatrix) -> Result<KleinMap> {
        Ok(KleinMap { map: self.map.with_matrix(matrix)?, ..self.clone() })
    }

    /// `max(|κ κ⁻¹ - 1|, |κ⁻¹ κ - 1|)` with `κ⁻¹` read off the generator words.
    pub fn inverse_residual(&self) -> f64 {
        let k = self.inverse.nrows();
        let id = identity(k);
        let m = self.map.matrix();
        let scale = (k as f64).sqrt();
        (distance(&m.dot(&self.inverse), &id) / scale).max(distance(&self.inverse.dot(m), &id) / scale)
    }

    /// Smallest over largest singular value of the matrix of `κ`.
    pub fn conditioning(&self) -> f64 {
        let s = self.map.singular_values();
        match (s.first(), s.last()) {
            (Some(&t), Some(&b)) if t > 0.0 => b / t,
            _ => 0.0,
        }
    }
}

/// `κ_{n+1}(x ⊛ 1) = κ_n(x) ⊗ 1` over the basis of the smaller source.
pub fn klein_compatibility(small: &KleinMap, large: &KleinMap) -> Result<f64> {
    if large.legs() != small.legs() + 1 {
        return Err(Error::InvalidInput("Klein maps must differ by exactly one leg".into()));
    }
    let extra = large.source.spaces()[small.legs()].dim();
    let one = identity(extra);
    let mut worst: f64 = 0.0;
    for x in small.source.realized().basis() {
        let lhs = large.apply(&kron(x, &one));
        let rhs = kron(&small.apply(x), &one);
        worst = worst.max(distance(&lhs, &rhs) / frobenius(&rhs).max(1.0));
    }
    Ok(worst)
}

/// Full battery: bijectivity, multiplicativity, *-preservation, grading
/// equivariance, preservation of product states built from `leg_states` (one
/// state per leg in each entry) and affinity of `κᵗ`.
pub fn verify_klein(kmap: &KleinMap, leg_states: &[Vec<StateFunctional>], seed: u64) -> Result<Report> {
    let tol = kmap.source.realized().tolerance();
    let mut report = Report::new();

    let inv = kmap.inverse_residual();
    let cond = kmap.conditioning();
    report.push(Check::with_verdict("bijectivity", inv, inv < tol && cond > tol));

    let gens = kmap.source.generators();
    let mult = kmap.map.multiplicativity_residual(&gens, seed);
    report.push(Check::with_verdict("multiplicativity", mult, mult < tol));

    let star = kmap.map.star_residual();
    report.push(Check::with_verdict("star_preservation", star, star < tol));

    let grading = kmap.map.grading_residual();
    report.push(Check::with_verdict("grading_equivariance", grading, grading < tol));

    let mut pulled = Vec::with_capacity(leg_states.len());
    let mut preserve: f64 = 0.0;
    let mut even: f64 = 0.0;
    for legs in leg_states {
        let psi = kmap.target.product_state(legs)?;
        let expected = kmap.source.product_state(legs)?;
        let back = klein_transpose(kmap, &psi)?;
        preserve = preserve.max(back.distance_to(&expected)?);
        if psi.is_even() {
            even = even.max(back.even_residual());
        }
        pulled.push((psi, back));
    }
    if !leg_states.is_empty() {
        report.push(Check::with_verdict("product_state_preservation", preserve, preserve < tol));
        report.push(Check::with_verdict("transpose_preserves_even", even, even < tol));
    }
    if pulled.len() >= 2 {
        let lambda = 0.3;
        let (psi_a, back_a) = &pulled[0];
        let (psi_b, back_b) = &pulled[1];
        let mix = StateFunctional::convex_combination(&[psi_a.clone(), psi_b.clone()], &[lambda, 1.0 - lambda])?;
        let back_mix = klein_transpose(kmap, &mix)?;
        let expected = StateFunctional::convex_combination(&[back_a.clone(), back_b.clone()], &[lambda, 1.0 - lambda])?;
        let affine = back_mix.distance_to(&expected)?;
        report.push(Check::with_verdict("transpose_affinity", affine, affine < tol));
    }
    Ok(report)
}

/// Even states drawn on the factor by [`klein_battery`].
pub const BATTERY_STATES: usize = 3;

/// Builds `κ_n` for `n` copies of `b` and runs [`verify_klein`] on seeded
/// random even states: each state repeated on every leg, plus one mixed
/// assignment. For `n ≥ 3` compatibility with `κ_{n-1}` is checked too.
pub fn klein_battery(b: Arc<GradedAlgebra>, n: usize, seed: u64) -> Result<(KleinMap, Report)> {
    let kmap = klein_iterated(b.clone(), n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..BATTERY_STATES)
        .map(|_| StateFunctional::random_even(b.clone(), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut leg_states: Vec<Vec<StateFunctional>> = states.iter().map(|s| vec![s.clone(); n]).collect();
    leg_states.push((0..n).map(|k| states[k % states.len()].clone()).collect());
    let mut report = verify_klein(&kmap, &leg_states, seed)?;
    if n >= 3 {
        let smaller = klein_iterated(b.clone(), n - 1)?;
        let r = klein_compatibility(&smaller, &kmap)?;
        report.push(Check::with_verdict("compatibility", r, r < b.tolerance()));
    }
    Ok((kmap, report))
}
