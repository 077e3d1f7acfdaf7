//! JSON descriptions of algebras, states and products, plus a deterministic writer.
//!
//! Matrices are row-major arrays of `[re, im]` pairs. A reference to an
//! algebra (inside a state or product file) is either a path, resolved
//! relative to the referring file, or `builtin:<name>` for one of the
//! [`fixtures`](crate::fixtures).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::graded::{GradedAlgebra, GradingSpec};
use crate::linalg::{c, CMatrix};
use crate::product::ProductKind;
use crate::states::StateFunctional;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub const BUILTIN_PREFIX: &str = "builtin:";

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    m.rows().into_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(m: &MatrixJson) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some(bad) = m.iter().find(|r| r.len() != cols) {
        return Err(Error::Shape(format!("ragged matrix: row of length {} among rows of length {cols}", bad.len())));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    Ok(CMatrix::from_shape_fn((rows, cols), |(i, j)| c(m[i][j][0], m[i][j][1])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradingKind {
    Inner,
    Ambient,
    BasisMap,
}

#[derive(Clone, Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingJson {
    pub kind: GradingKind,
    pub data: MatrixJson,
    /// Optional ambient unitary grading the Hilbert space for inner gradings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implementer: Option<MatrixJson>,
}

#[derive(Clone, Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub ambient_dim: usize,
    pub basis: Vec<MatrixJson>,
    pub grading: GradingJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl AlgebraSpec {
    pub fn from_algebra(alg: &GradedAlgebra) -> Self {
        let grading = match alg.grading() {
            GradingSpec::Inner { unit, implementer } => GradingJson {
                kind: GradingKind::Inner,
                data: matrix_to_json(unit),
                implementer: implementer.as_ref().map(matrix_to_json),
            },
            GradingSpec::Ambient(v) => GradingJson { kind: GradingKind::Ambient, data: matrix_to_json(v), implementer: None },
            GradingSpec::BasisMap(m) => GradingJson { kind: GradingKind::BasisMap, data: matrix_to_json(m), implementer: None },
        };
        AlgebraSpec {
            ambient_dim: alg.ambient_dim(),
            basis: alg.basis().iter().map(matrix_to_json).collect(),
            grading,
            tolerance: Some(alg.tolerance()),
        }
    }

    /// `tolerance` wins over the tolerance stored in the file.
    pub fn to_algebra(&self, tolerance: Option<f64>, fallback: f64) -> Result<GradedAlgebra> {
        let d = self.ambient_dim;
        if d == 0 {
            return Err(Error::InvalidInput("ambient_dim must be positive".into()));
        }
        if self.basis.is_empty() {
            return Err(Error::InvalidInput("basis is empty".into()));
        }
        let basis = self.basis.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        if let Some(bad) = basis.iter().find(|b| b.dim() != (d, d)) {
            return Err(Error::Shape(format!("basis matrix of shape {:?}, ambient_dim is {d}", bad.dim())));
        }
        let data = matrix_from_json(&self.grading.data)?;
        let grading = match self.grading.kind {
            GradingKind::Inner => GradingSpec::Inner {
                unit: data,
                implementer: self.grading.implementer.as_ref().map(matrix_from_json).transpose()?,
            },
            GradingKind::Ambient => GradingSpec::Ambient(data),
            GradingKind::BasisMap => GradingSpec::BasisMap(data),
        };
        if self.grading.implementer.is_some() && self.grading.kind != GradingKind::Inner {
            return Err(Error::InvalidInput("only inner gradings take an implementer".into()));
        }
        GradedAlgebra::new(basis, grading, tolerance.or(self.tolerance).unwrap_or(fallback))
    }
}

#[derive(Clone, Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub algebra: String,
    pub density: MatrixJson,
}

#[derive(Clone, Debug, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSpec {
    pub factor: String,
    pub n: usize,
    pub kind: ProductKind,
}

/// Tolerance resolution shared by every loader: an explicit override first,
/// then whatever the algebra file says, then `fallback`.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub explicit: Option<f64>,
    pub fallback: f64,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn resolve(reference: &str, base: &Path) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or_else(|| Path::new(".")).join(p)
    }
}

pub fn builtin(name: &str, tol: Tolerance) -> Result<GradedAlgebra> {
    let alg = fixtures::by_name(name).ok_or_else(|| {
        Error::InvalidInput(format!("unknown builtin algebra {name:?}; known: {}", fixtures::NAMES.join(", ")))
    })?;
    Ok(alg.with_tolerance(tol.explicit.unwrap_or(tol.fallback)))
}

pub fn load_algebra(path: &Path, tol: Tolerance) -> Result<GradedAlgebra> {
    let spec: AlgebraSpec = read_json(path)?;
    spec.to_algebra(tol.explicit, tol.fallback)
}

/// An algebra from JSON text.
pub fn parse_algebra(text: &str, tol: Tolerance) -> Result<GradedAlgebra> {
    let spec: AlgebraSpec = serde_json::from_str(text)?;
    spec.to_algebra(tol.explicit, tol.fallback)
}

/// Loads an algebra named from within the file at `base`.
pub fn load_algebra_ref(reference: &str, base: &Path, tol: Tolerance) -> Result<GradedAlgebra> {
    match reference.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => builtin(name, tol),
        None => load_algebra(&resolve(reference, base), tol),
    }
}

pub fn load_state(path: &Path, tol: Tolerance) -> Result<StateFunctional> {
    let spec: StateSpec = read_json(path)?;
    let algebra = load_algebra_ref(&spec.algebra, path, tol)?;
    let density = matrix_from_json(&spec.density)?;
    StateFunctional::new(Arc::new(algebra), density)
}

pub fn load_product(path: &Path, tol: Tolerance) -> Result<(GradedAlgebra, ProductSpec)> {
    let spec: ProductSpec = read_json(path)?;
    let algebra = load_algebra_ref(&spec.factor, path, tol)?;
    Ok((algebra, spec))
}

/// Pretty JSON whose floats carry 17 significant digits, so values survive a
/// round trip bit for bit and output is independent of float printing
/// heuristics.
pub struct ExactFloats(PrettyFormatter<'static>);

impl Default for ExactFloats {
    fn default() -> Self {
        ExactFloats(PrettyFormatter::with_indent(b"  "))
    }
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with [`ExactFloats`]; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats::default());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE] {
            let s = to_json(&x).unwrap();
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(to_json(&f64::NAN).unwrap().trim(), "null");
    }

    #[test]
    fn algebra_file_round_trip() {
        let alg = fixtures::m2_standard_form();
        let spec = AlgebraSpec::from_algebra(&alg);
        let text = to_json(&spec).unwrap();
        let back: AlgebraSpec = serde_json::from_str(&text).unwrap();
        let rebuilt = back.to_algebra(None, 1.0).unwrap();
        assert_eq!(rebuilt.basis(), alg.basis());
        assert_eq!(rebuilt.grading_map(), alg.grading_map());
        assert_eq!(rebuilt.tolerance(), alg.tolerance());
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let m: MatrixJson = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[1.0, 0.0]]];
        assert!(matches!(matrix_from_json(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"ambient_dim": 1, "basis": [[[[1,0]]]], "grading": {"kind": "inner", "data": [[[1,0]]]}, "extra": 1}"#;
        assert!(serde_json::from_str::<AlgebraSpec>(text).is_err());
    }
}
