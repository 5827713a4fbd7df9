//! JSON matrix documents: `{"dim": n, "re": [[...]], "im": [[...]]}` with `im` optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::hermitian::{matrix_from_parts, CMatrix, HermitianMatrix, HERMITIAN_INPUT_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    /// Number of rows. Columns are taken from the row length, so `K` may be rectangular.
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            m.row_iter()
                .map(|r| r.iter().map(f).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        let im = if m.iter().any(|z| z.im != 0.0) {
            Some(rows(|z| z.im))
        } else {
            None
        };
        MatrixDocument {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im,
        }
    }

    pub fn matrix(&self) -> Result<CMatrix> {
        if self.re.len() != self.dim {
            return Err(Error::dims(self.dim, self.re.len()));
        }
        matrix_from_parts(&self.re, self.im.as_deref())
    }

    pub fn hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::from_matrix(self.matrix()?, HERMITIAN_INPUT_TOL)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    MatrixDocument::from_json(&std::fs::read_to_string(path)?)?.matrix()
}

pub fn read_hermitian(path: impl AsRef<Path>) -> Result<HermitianMatrix> {
    MatrixDocument::from_json(&std::fs::read_to_string(path)?)?.hermitian()
}

pub fn write_matrix(path: impl AsRef<Path>, m: &CMatrix) -> Result<()> {
    std::fs::write(path, MatrixDocument::from_matrix(m).to_json())?;
    Ok(())
}
