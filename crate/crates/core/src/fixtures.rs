//! Small graded algebras used by the CLI, the counterexample and the tests.

use ndarray::array;

use crate::graded::{generated_algebra, GradedAlgebra, GradingSpec, DEFAULT_TOLERANCE};
use crate::linalg::{c, diag, kron, real_matrix, CMatrix};

pub fn pauli_x() -> CMatrix {
    real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
}

pub fn pauli_z() -> CMatrix {
    real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// The annihilator `[[0, 1], [0, 0]]`.
pub fn lowering() -> CMatrix {
    real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]])
}

fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = crate::linalg::zeros(n + m, n + m);
    out.slice_mut(ndarray::s![..n, ..n]).assign(a);
    out.slice_mut(ndarray::s![n.., n..]).assign(b);
    out
}

/// `M_2` graded by conjugation with Pauli Z.
pub fn m2() -> GradedAlgebra {
    let basis = vec![crate::linalg::identity(2), pauli_z(), pauli_x(), pauli_y()];
    GradedAlgebra::new(basis, GradingSpec::inner(pauli_z()), DEFAULT_TOLERANCE).expect("M2 fixture")
}

/// `M_2 ⊕ M_2` on `C^4`, graded by `diag(Z, Z)`.
pub fn m2_plus_m2() -> GradedAlgebra {
    let zero = crate::linalg::zeros(2, 2);
    let gens = vec![
        direct_sum(&pauli_x(), &zero),
        direct_sum(&pauli_z(), &zero),
        direct_sum(&zero, &pauli_x()),
        direct_sum(&zero, &pauli_z()),
    ];
    let basis = generated_algebra(&gens, 4, DEFAULT_TOLERANCE).expect("M2+M2 closure");
    let u = direct_sum(&pauli_z(), &pauli_z());
    GradedAlgebra::new(basis, GradingSpec::inner(u), DEFAULT_TOLERANCE).expect("M2+M2 fixture")
}

/// `M_3` graded by `diag(1, 1, -1)`.
pub fn m3() -> GradedAlgebra {
    let mut gens = Vec::new();
    for (i, j) in [(0, 1), (1, 2)] {
        let mut e = crate::linalg::zeros(3, 3);
        e[[i, j]] = c(1.0, 0.0);
        gens.push(e);
    }
    let basis = generated_algebra(&gens, 3, DEFAULT_TOLERANCE).expect("M3 closure");
    let u = diag(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
    GradedAlgebra::new(basis, GradingSpec::inner(u), DEFAULT_TOLERANCE).expect("M3 fixture")
}

/// `M_2` acting as `b ⊗ 1` on `C^2 ⊗ C^2`, with inner unit `Z ⊗ 1` but the
/// Hilbert space graded by `Z ⊗ Z`. Here the Klein map is not the identity
/// matrix map.
pub fn m2_standard_form() -> GradedAlgebra {
    let id = crate::linalg::identity(2);
    let basis: Vec<CMatrix> = [id.clone(), pauli_z(), pauli_x(), pauli_y()].iter().map(|b| kron(b, &id)).collect();
    let grading = GradingSpec::Inner {
        unit: kron(&pauli_z(), &id),
        implementer: Some(kron(&pauli_z(), &pauli_z())),
    };
    GradedAlgebra::new(basis, grading, DEFAULT_TOLERANCE).expect("standard form fixture")
}

/// The abelian algebra `span{1, X}` on `C^2` graded by conjugation with Z,
/// which swaps the projections `(1 ± X)/2`. The grading is not inner.
pub fn abelian_swap() -> GradedAlgebra {
    let basis = vec![crate::linalg::identity(2), pauli_x()];
    GradedAlgebra::new(basis, GradingSpec::Ambient(pauli_z()), DEFAULT_TOLERANCE).expect("abelian fixture")
}

/// The two Jordan-Wigner annihilators `a = σ⁻ ⊗ 1`, `A = Z ⊗ σ⁻` on `C^4`.
pub fn car2_annihilators() -> (CMatrix, CMatrix) {
    let id = crate::linalg::identity(2);
    (kron(&lowering(), &id), kron(&pauli_z(), &lowering()))
}

/// `CAR(2) = M_4` graded by the parity `Z ⊗ Z`.
pub fn car2() -> GradedAlgebra {
    let (a, b) = car2_annihilators();
    let basis = generated_algebra(&[a, b], 4, DEFAULT_TOLERANCE).expect("CAR(2) closure");
    GradedAlgebra::new(basis, GradingSpec::inner(kron(&pauli_z(), &pauli_z())), DEFAULT_TOLERANCE)
        .expect("CAR(2) fixture")
}

/// Fixture names accepted by the CLI.
pub const NAMES: [&str; 7] = ["m2", "m2+m2", "m3", "m2-standard", "abelian-swap", "car2", "trivial"];

pub fn by_name(name: &str) -> Option<GradedAlgebra> {
    Some(match name {
        "m2" => m2(),
        "m2+m2" => m2_plus_m2(),
        "m3" => m3(),
        "m2-standard" => m2_standard_form(),
        "abelian-swap" => abelian_swap(),
        "car2" => car2(),
        "trivial" => GradedAlgebra::new(vec![crate::linalg::identity(1)], GradingSpec::trivial(1), DEFAULT_TOLERANCE)
            .expect("scalar fixture"),
        _ => return None,
    })
}
