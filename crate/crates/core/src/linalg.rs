//! Dense complex matrix helpers.
//!
//! Matrices are `ndarray` arrays of `Complex64` in row-major order. The heavy
//! factorisations (SVD, Hermitian eigendecomposition, LU) are delegated to
//! `faer`; everything else is plain `ndarray` arithmetic.

use faer::c64;
use faer::Mat;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    Array2::eye(n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Array2::zeros((rows, cols))
}

/// Builds a matrix from real entries, row by row.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Array2::from_shape_fn((n, m), |(i, j)| c(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMatrix {
    let mut out = zeros(entries.len(), entries.len());
    for (i, &e) in entries.iter().enumerate() {
        out[[i, i]] = e;
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

/// Kronecker product, left factor is the slow index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &bv| *o = aij * bv);
        }
    }
    out
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut acc: Option<CMatrix> = None;
    for f in factors {
        acc = Some(match acc {
            None => f.clone(),
            Some(a) => kron(&a, f),
        });
    }
    acc.unwrap_or_else(|| identity(1))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product `Tr(a* b)`, antilinear in `a`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diag().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[[i, k]] * b[[k, i]];
        }
    }
    acc
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b) + b.dot(a)
}

pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_residual(a: &CMatrix) -> f64 {
    distance(a, &dagger(a))
}

pub fn unitary_residual(a: &CMatrix) -> f64 {
    distance(&a.dot(&dagger(a)), &identity(a.nrows()))
}

/// Residual test relative to the operand size, with unit floor.
#[inline]
pub fn within(residual: f64, scale: f64, tol: f64) -> bool {
    residual <= tol * scale.max(1.0)
}

pub fn vectorize(a: &CMatrix) -> CVector {
    Array1::from_iter(a.iter().copied())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    Array2::from_shape_vec((rows, cols), v.to_vec()).expect("length matches shape")
}

/// Stacks the row-major vectorisations of `mats` as columns.
pub fn stack_columns(mats: &[CMatrix], rows: usize, cols: usize) -> CMatrix {
    let mut out = zeros(rows * cols, mats.len());
    for (j, m) in mats.iter().enumerate() {
        for (dst, src) in out.column_mut(j).iter_mut().zip(m.iter()) {
            *dst = *src;
        }
    }
    out
}

fn to_faer(a: ArrayView2<C64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[[i, j]];
        c64::new(z.re, z.im)
    })
}

fn from_faer(m: faer::MatRef<'_, c64>) -> CMatrix {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| {
        let z = m[(i, j)];
        c(z.re, z.im)
    })
}

/// Matrix product; large products go through faer's blocked kernels.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    if a.nrows() * a.ncols() * b.ncols() < 1 << 18 {
        return a.dot(b);
    }
    let out = to_faer(a.view()) * to_faer(b.view());
    from_faer(out.as_ref())
}

/// Thin singular value decomposition `a = u diag(s) v*`, singular values descending.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn thin_svd(a: &CMatrix) -> Svd {
    if a.is_empty() {
        return Svd { u: zeros(a.nrows(), 0), s: Vec::new(), v: zeros(a.ncols(), 0) };
    }
    let svd = to_faer(a.view()).thin_svd().expect("singular value decomposition did not converge");
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Svd { u: from_faer(svd.U()), s, v: from_faer(svd.V()) }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(a.view()).singular_values().expect("singular values did not converge");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank(s: &[f64], tol: f64) -> usize {
    let top = s.iter().copied().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * top).count()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (a + &dagger(a)).mapv(|z| z * 0.5);
    let dec = to_faer(sym.view())
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigendecomposition did not converge");
    let vals = dec.S().column_vector().iter().map(|z| z.re).collect();
    (vals, from_faer(dec.U()))
}

pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    eigh(a).0
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Shape(format!("cannot invert a {}x{} matrix", n, a.ncols())));
    }
    use faer::linalg::solvers::DenseSolveCore;
    let lu = to_faer(a.view()).partial_piv_lu();
    Ok(from_faer(lu.inverse().as_ref()))
}

/// Orthonormal (Hilbert-Schmidt) basis of the span of `mats`.
///
/// A direction is kept when its singular value exceeds
/// `tol * max(sigma_max, scale)`; `scale` is the size of the operands the
/// family was derived from, so that pure round-off families collapse to
/// nothing.
pub fn orthonormal_span(mats: &[CMatrix], tol: f64, scale: f64) -> Vec<CMatrix> {
    let Some(first) = mats.first() else { return Vec::new() };
    let (r, c) = first.dim();
    let stacked = stack_columns(mats, r, c);
    let svd = thin_svd(&stacked);
    let top = svd.s.first().copied().unwrap_or(0.0);
    let threshold = tol * top.max(scale);
    svd.s
        .iter()
        .take_while(|&&s| s > threshold)
        .enumerate()
        .map(|(j, _)| unvectorize(&svd.u.column(j).to_owned(), r, c))
        .collect()
}

/// Removes from `mats` the components along the orthonormal set `against`.
pub fn project_out(mats: &[CMatrix], against: &[CMatrix]) -> Vec<CMatrix> {
    if mats.is_empty() || against.is_empty() {
        return mats.to_vec();
    }
    let (r, c) = mats[0].dim();
    let q = stack_columns(against, r, c);
    let qh = dagger(&q);
    let mut x = stack_columns(mats, r, c);
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        let coef = qh.dot(&x);
        x = x - q.dot(&coef);
    }
    x.axis_iter(Axis(1)).map(|col| unvectorize(&col.to_owned(), r, c)).collect()
}

/// A finite family of matrices with a least-squares coordinate map onto it.
///
/// Coordinates are computed with the Moore-Penrose pseudo-inverse of the
/// stacked family, so linearly dependent families are tolerated and reported
/// through [`Frame::rank`].
#[derive(Clone, Debug)]
pub struct Frame {
    rows: usize,
    cols: usize,
    vectors: Vec<CMatrix>,
    stacked: CMatrix,
    dual: CMatrix,
    singular_values: Vec<f64>,
    rank: usize,
}

impl Frame {
    pub fn new(vectors: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::InvalidInput("empty family of matrices".into()));
        };
        let (rows, cols) = first.dim();
        if let Some(bad) = vectors.iter().find(|v| v.dim() != (rows, cols)) {
            return Err(Error::Shape(format!(
                "matrix of shape {:?} in a family of {}x{} matrices",
                bad.dim(),
                rows,
                cols
            )));
        }
        let stacked = stack_columns(&vectors, rows, cols);
        if let Some(frame) = Self::orthogonal(&vectors, &stacked, tol) {
            return Ok(frame);
        }
        let svd = thin_svd(&stacked);
        let rank = numerical_rank(&svd.s, tol);
        // pinv = V diag(1/s) U* over the retained directions
        let k = vectors.len();
        let mut scaled_v = zeros(k, rank);
        for j in 0..rank {
            let inv = 1.0 / svd.s[j];
            for i in 0..k {
                scaled_v[[i, j]] = svd.v[[i, j]] * inv;
            }
        }
        let u_r = svd.u.slice(ndarray::s![.., ..rank]).to_owned();
        let dual = matmul(&scaled_v, &dagger(&u_r));
        Ok(Frame { rows, cols, vectors, stacked, dual, singular_values: svd.s, rank })
    }

    /// Shortcut for pairwise orthogonal families (word bases of products),
    /// where the pseudo-inverse is a rescaled adjoint and no SVD is needed.
    fn orthogonal(vectors: &[CMatrix], stacked: &CMatrix, tol: f64) -> Option<Self> {
        let adj = dagger(stacked);
        let gram = matmul(&adj, stacked);
        let k = vectors.len();
        let norms: Vec<f64> = (0..k).map(|i| gram[[i, i]].re).collect();
        if norms.iter().any(|&n| n <= 0.0) {
            return None;
        }
        for i in 0..k {
            for j in 0..k {
                if i != j && gram[[i, j]].norm() > 1e-13 * (norms[i] * norms[j]).sqrt() {
                    return None;
                }
            }
        }
        let mut singular_values: Vec<f64> = norms.iter().map(|n| n.sqrt()).collect();
        singular_values.sort_by(|x, y| y.total_cmp(x));
        let rank = numerical_rank(&singular_values, tol);
        let mut dual = adj;
        for (i, mut row) in dual.rows_mut().into_iter().enumerate() {
            let inv = 1.0 / norms[i];
            row.mapv_inplace(|z| z * inv);
        }
        let (rows, cols) = vectors[0].dim();
        Some(Frame {
            rows,
            cols,
            vectors: vectors.to_vec(),
            stacked: stacked.clone(),
            dual,
            singular_values,
            rank,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn vectors(&self) -> &[CMatrix] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Smallest over largest singular value of the stacked family.
    pub fn conditioning(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&top), Some(&bottom)) if top > 0.0 => bottom / top,
            _ => 0.0,
        }
    }

    pub fn coords(&self, x: &CMatrix) -> CVector {
        self.dual.dot(&vectorize(x))
    }

    /// Coordinates of many matrices at once, one column per matrix.
    pub fn coords_many(&self, xs: &[CMatrix]) -> CMatrix {
        if xs.is_empty() {
            return zeros(self.len(), 0);
        }
        matmul(&self.dual, &stack_columns(xs, self.rows, self.cols))
    }

    pub fn combine(&self, coefficients: &CVector) -> CMatrix {
        unvectorize(&self.stacked.dot(coefficients), self.rows, self.cols)
    }

    /// Reconstructs one matrix per column of `coefficients`.
    pub fn combine_many(&self, coefficients: &CMatrix) -> Vec<CMatrix> {
        let flat = matmul(&self.stacked, coefficients);
        flat.axis_iter(Axis(1))
            .map(|col| unvectorize(&col.to_owned(), self.rows, self.cols))
            .collect()
    }

    pub fn residual(&self, x: &CMatrix) -> f64 {
        distance(x, &self.combine(&self.coords(x)))
    }

    pub fn contains(&self, x: &CMatrix, tol: f64) -> bool {
        within(self.residual(x), frobenius(x), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn svd_of_structured_rank_deficient_input() {
        // duplicated and sign-flipped columns with exact zeros in between
        let mut cols = vec![vec![0.0; 16]; 16];
        let mut v1 = vec![0.0; 16];
        v1[0] = 0.5;
        v1[5] = 0.5;
        v1[10] = -0.5;
        v1[15] = -0.5;
        let mut v2 = vec![0.0; 16];
        v2[1] = -0.5;
        v2[4] = 0.5;
        let mut v3 = vec![0.0; 16];
        v3[11] = -0.5;
        v3[14] = 0.5;
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<f64>>();
        cols[0] = v1.clone();
        cols[3] = v2.clone();
        cols[4] = neg(&v2);
        cols[7] = v1.clone();
        cols[9] = neg(&v1);
        cols[10] = v3.clone();
        cols[13] = neg(&v3);
        cols[14] = neg(&v1);
        let a = Array2::from_shape_fn((16, 16), |(i, j)| c(cols[j][i], 0.0));
        let svd = thin_svd(&a);
        let s = Array2::from_diag(&Array1::from_iter(svd.s.iter().map(|&x| c(x, 0.0))));
        let rec = svd.u.dot(&s).dot(&dagger(&svd.v));
        assert!(distance(&rec, &a) < 1e-12);
        assert_eq!(numerical_rank(&svd.s, 1e-9), 3);
    }

    #[test]
    fn thin_svd_is_descending() {
        let a = real_matrix(&[&[1.0, 0.0, 0.0], &[0.0, 5.0, 0.0], &[0.0, 0.0, 3.0], &[1.0, 1.0, 1.0]]);
        let s = thin_svd(&a).s;
        assert!(s.windows(2).all(|w| w[0] >= w[1]), "{s:?}");
    }

    #[test]
    fn orthogonal_frame_matches_general_coords() {
        let ortho = vec![identity(2), pauli_x(), real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]])];
        let skew = vec![identity(2), pauli_x() + identity(2), real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]])];
        let x = real_matrix(&[&[2.0, 1.0], &[1.0, 0.0]]);
        let f = Frame::new(ortho, 1e-12).unwrap();
        let g = Frame::new(skew, 1e-12).unwrap();
        assert!(f.residual(&x) < 1e-14);
        assert!(g.residual(&x) < 1e-14);
        assert_eq!(f.rank(), 3);
    }

    #[test]
    fn kron_is_row_major_left_slow() {
        let a = real_matrix(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = identity(2);
        let k = kron(&a, &b);
        assert_eq!(k[[0, 2]], c(2.0, 0.0));
        assert_eq!(k[[1, 3]], c(2.0, 0.0));
        assert_eq!(k[[2, 0]], c(3.0, 0.0));
        assert_eq!(k[[0, 1]], ZERO);
    }

    #[test]
    fn svd_reconstructs() {
        let a = Array2::from_shape_fn((5, 3), |(i, j)| c((i * 3 + j) as f64, (i as f64) - (j as f64)));
        let svd = thin_svd(&a);
        let mut s = zeros(svd.s.len(), svd.s.len());
        for (i, &v) in svd.s.iter().enumerate() {
            s[[i, i]] = c(v, 0.0);
        }
        let back = svd.u.dot(&s).dot(&dagger(&svd.v));
        assert!(distance(&a, &back) < 1e-10);
    }

    #[test]
    fn eigh_of_pauli_x() {
        let (vals, vecs) = eigh(&pauli_x());
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        assert!(unitary_residual(&vecs) < 1e-12);
    }

    #[test]
    fn frame_detects_duplicates() {
        let f = Frame::new(vec![identity(2), pauli_x(), pauli_x()], 1e-9).unwrap();
        assert_eq!(f.rank(), 2);
        let x = pauli_x().mapv(|z| z * 3.0) + identity(2);
        assert!(f.residual(&x) < 1e-12);
        assert!(!f.contains(&real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]]), 1e-9));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = real_matrix(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let inv = inverse(&a).unwrap();
        assert!(distance(&a.dot(&inv), &identity(2)) < 1e-14);
    }

    #[test]
    fn orthonormal_span_drops_dependent_directions() {
        let z = real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let span = orthonormal_span(&[identity(2), z.clone(), identity(2) + &z], 1e-9, 1.0);
        assert_eq!(span.len(), 2);
        assert!((hs_inner(&span[0], &span[1])).norm() < 1e-14);
    }
}
