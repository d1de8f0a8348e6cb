//! JSON encodings of matrices, subalgebras, expectations and module operators.

use cstar_core::basic::LocalizedModule;
use cstar_core::{CMatrix, CondExpectation, ModuleOperator, QuasiBasis, Subalgebra, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, PartialEq)]
pub struct ShapeError(pub String);

impl std::fmt::Display for ShapeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ShapeError {}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let n = m.dim();
        let rows = |f: fn(&C64) -> f64| (0..n).map(|i| m.row(i).iter().map(f).collect()).collect();
        Self { dim: n, re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = ShapeError;

    fn try_from(j: &MatrixJson) -> Result<Self, ShapeError> {
        let n = j.dim;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&j.re) || !square(&j.im) {
            return Err(ShapeError(format!("matrix rows do not form a {n}x{n} array")));
        }
        Ok(CMatrix::from_fn(n, |r, c| C64::new(j.re[r][c], j.im[r][c])))
    }
}

/// `{"ambient_dim": n, "basis": [matrix, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubalgebraJson {
    pub ambient_dim: usize,
    pub basis: Vec<MatrixJson>,
}

impl From<&Subalgebra> for SubalgebraJson {
    fn from(s: &Subalgebra) -> Self {
        Self { ambient_dim: s.ambient_dim(), basis: s.basis().iter().map(MatrixJson::from).collect() }
    }
}

impl SubalgebraJson {
    pub fn to_subalgebra(&self) -> Result<Subalgebra, Box<dyn std::error::Error>> {
        let basis = self.basis.iter().map(CMatrix::try_from).collect::<Result<Vec<_>, _>>()?;
        Ok(Subalgebra::from_orthonormal_basis(self.ambient_dim, basis)?)
    }
}

/// `{"source", "target", "matrix"}` with the map in HS coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationJson {
    pub source: SubalgebraJson,
    pub target: SubalgebraJson,
    pub matrix: MatrixJson,
}

impl From<&CondExpectation> for ExpectationJson {
    fn from(e: &CondExpectation) -> Self {
        Self { source: e.source().into(), target: e.target().into(), matrix: (&e.coordinate_matrix()).into() }
    }
}

impl ExpectationJson {
    pub fn to_expectation(&self) -> Result<CondExpectation, Box<dyn std::error::Error>> {
        let source = self.source.to_subalgebra()?;
        let target = self.target.to_subalgebra()?;
        Ok(CondExpectation::from_coordinate_matrix(&source, &target, &CMatrix::try_from(&self.matrix)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiBasisJson {
    pub elements: Vec<MatrixJson>,
    pub index: MatrixJson,
    pub unit_ball: bool,
}

impl From<&QuasiBasis> for QuasiBasisJson {
    fn from(q: &QuasiBasis) -> Self {
        Self {
            elements: q.elements().iter().map(MatrixJson::from).collect(),
            index: q.index().into(),
            unit_ball: q.in_unit_ball(),
        }
    }
}

/// SHA-256 over the bases of the base expectation and the Gram matrix of a
/// module, as lowercase hex.
pub fn module_hash(module: &LocalizedModule) -> String {
    let mut h = Sha256::new();
    let e = module.base_expectation();
    for m in e.source().basis().iter().chain(e.target().basis()).chain(std::iter::once(module.gram())) {
        h.update((m.dim() as u64).to_le_bytes());
        for z in m.as_slice() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// An operator in the module's orthonormal basis plus the hash of the module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleOperatorJson {
    pub matrix: MatrixJson,
    pub module_sha256: String,
}

impl ModuleOperatorJson {
    /// Panics if `op` belongs to a different module.
    pub fn new(module: &LocalizedModule, op: &ModuleOperator) -> Self {
        assert_eq!(op.module_fingerprint(), module.fingerprint(), "operator belongs to another module");
        Self { matrix: op.matrix().into(), module_sha256: module_hash(module) }
    }
}
