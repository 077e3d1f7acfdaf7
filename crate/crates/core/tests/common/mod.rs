//! Test oracles written without the library's closed forms.
#![allow(dead_code)]

use fermi_klein::linalg::{c, CMatrix, C64};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CMatrix {
    Array2::from_shape_fn((n, m), |_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

pub fn eye(n: usize) -> CMatrix {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// Entry-by-entry Kronecker product, left factor slow.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn fro(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unitary by modified Gram-Schmidt on the columns of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut q = gaussian(rng, n, n);
    for j in 0..n {
        for i in 0..j {
            let proj: C64 = (0..n).map(|r| q[[r, i]].conj() * q[[r, j]]).sum();
            for r in 0..n {
                let v = q[[r, i]];
                q[[r, j]] -= proj * v;
            }
        }
        let norm = (0..n).map(|r| q[[r, j]].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            q[[r, j]] /= norm;
        }
    }
    q
}

/// A random grading `W diag(±1) W*` together with its eigenbasis and signs.
pub struct RandomGrading {
    pub unitary: CMatrix,
    pub basis: CMatrix,
    pub signs: Vec<f64>,
}

pub fn random_grading(rng: &mut ChaCha8Rng, n: usize) -> RandomGrading {
    let w = random_unitary(rng, n);
    let signs: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let d = Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(signs[i], 0.0) } else { c(0.0, 0.0) });
    let unitary = w.dot(&d).dot(&adjoint(&w));
    RandomGrading { unitary, basis: w, signs }
}

/// Homogeneous part of a random operator: `(X ± U X U)/2`.
pub fn random_homogeneous(rng: &mut ChaCha8Rng, u: &CMatrix, odd: bool) -> CMatrix {
    let x = gaussian(rng, u.nrows(), u.nrows());
    let uxu = u.dot(&x).dot(u);
    if odd {
        (&x - &uxu).mapv(|z| z * 0.5)
    } else {
        (&x + &uxu).mapv(|z| z * 0.5)
    }
}

/// `S ⊛ T` assembled column by column from
/// `(S ⊛ T)(ξ ⊗ η) = Sξ ⊗ T₊η + ε Sξ ⊗ T₋η`, with `ε = -1` exactly when `ξ`
/// is odd, over homogeneous eigenbases of both gradings.
pub fn sign_rule_product(s: &CMatrix, t: &CMatrix, h: &RandomGrading, k: &RandomGrading) -> CMatrix {
    let (n, m) = (s.nrows(), t.nrows());
    let utu = k.unitary.dot(t).dot(&k.unitary);
    let t_plus = (t + &utu).mapv(|z| z * 0.5);
    let t_minus = (t - &utu).mapv(|z| z * 0.5);
    let mut images = Array2::zeros((n * m, n * m));
    let mut inputs = Array2::zeros((n * m, n * m));
    for i in 0..n {
        let xi = h.basis.column(i).to_owned();
        let s_xi = s.dot(&xi);
        let eps = if h.signs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            let eta = k.basis.column(j).to_owned();
            let plus = t_plus.dot(&eta);
            let minus = t_minus.dot(&eta);
            let col = i * m + j;
            for a in 0..n {
                for b in 0..m {
                    images[[a * m + b, col]] = s_xi[a] * (plus[b] + minus[b] * eps);
                    inputs[[a * m + b, col]] = xi[a] * eta[b];
                }
            }
        }
    }
    // inputs is unitary
    images.dot(&adjoint(&inputs))
}

pub fn value_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Position operators `s = a + a*` and `S = A + A*` of the two CAR(2) modes.
pub fn car2_positions() -> (CMatrix, CMatrix) {
    let (a, b) = fermi_klein::fixtures::car2_annihilators();
    (&a + &adjoint(&a), &b + &adjoint(&b))
}

/// `(I ± x)/2`.
pub fn half_projection(x: &CMatrix, sign: f64) -> CMatrix {
    let n = x.nrows();
    (&eye(n) + &x.mapv(|z| z * sign)).mapv(|z| z * 0.5)
}

pub fn parity_car2() -> CMatrix {
    let z = fermi_klein::fixtures::pauli_z();
    kron(&z, &z)
}
