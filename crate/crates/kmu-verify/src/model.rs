//! Model file format: one JSON document holding the ambient structure,
//! the submanifold point, and a small metadata block. Matrices are
//! row-major nested arrays; frames are arrays of basis vectors; sigma
//! is indexed [normal][i][j]. serde_json emits shortest round-trip
//! floats, so re-reading a written file reproduces every value bit for
//! bit.

use std::fs;
use std::path::Path;

use kmu_geometry::{complete_basis, Frame, KMuStructure, KmuError, SigmaMode, SubmanifoldPoint};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub ambient: AmbientModel,
    pub submanifold: SubmanifoldModel,
    pub meta: Meta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbientModel {
    pub m: usize,
    pub kappa: f64,
    pub mu: f64,
    pub c: f64,
    pub phi: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmanifoldModel {
    /// Tangent basis vectors, each of ambient length.
    pub tangent_frame: Vec<Vec<f64>>,
    /// Normal basis vectors; omitted frames are completed
    /// deterministically from the metadata seed.
    #[serde(default)]
    pub normal_frame: Option<Vec<Vec<f64>>>,
    /// Second fundamental form components, indexed [normal][i][j].
    pub sigma: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub seed: u64,
    /// "contact" or "raw": which sigma discipline the model claims.
    pub mode: String,
}

impl Meta {
    pub fn sigma_mode(&self) -> Result<SigmaMode, String> {
        match self.mode.as_str() {
            "contact" => Ok(SigmaMode::Contact),
            "raw" => Ok(SigmaMode::Raw),
            other => Err(format!("meta.mode must be \"contact\" or \"raw\", got {other:?}")),
        }
    }
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, String> {
    if rows.is_empty() {
        return Err(format!("{what}: empty matrix"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(format!("{what}: ragged rows"));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        cols,
        rows.iter().flat_map(|r| r.iter().copied()),
    ))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn vectors_to_frame(vecs: &[Vec<f64>], what: &str) -> Result<Frame, String> {
    if vecs.is_empty() {
        return Err(format!("{what}: empty frame"));
    }
    let d = vecs[0].len();
    if vecs.iter().any(|v| v.len() != d) {
        return Err(format!("{what}: vectors of mixed length"));
    }
    let cols: Vec<DVector<f64>> = vecs
        .iter()
        .map(|v| DVector::from_column_slice(v))
        .collect();
    Frame::from_columns_unchecked(&cols).map_err(|e| format!("{what}: {e}"))
}

fn frame_to_vectors(f: &Frame) -> Vec<Vec<f64>> {
    let m = f.matrix();
    (0..m.ncols())
        .map(|j| m.column(j).iter().copied().collect())
        .collect()
}

impl ModelFile {
    pub fn from_submanifold(sub: &SubmanifoldPoint, name: &str, seed: u64, mode: &str) -> Self {
        let s = sub.structure();
        ModelFile {
            ambient: AmbientModel {
                m: s.m(),
                kappa: s.kappa(),
                mu: s.mu(),
                c: s.c(),
                phi: matrix_to_rows(s.phi()),
                xi: s.xi().iter().copied().collect(),
                h: matrix_to_rows(s.h()),
            },
            submanifold: SubmanifoldModel {
                tangent_frame: frame_to_vectors(sub.tangent_frame()),
                normal_frame: Some(frame_to_vectors(sub.normal_frame())),
                sigma: sub
                    .sigma_slices()
                    .iter()
                    .map(|slice| matrix_to_rows(slice))
                    .collect(),
            },
            meta: Meta {
                name: name.to_string(),
                seed,
                mode: mode.to_string(),
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<(), String> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| format!("serialization failed: {e}"))?;
        fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    /// Rebuild the library objects. Shape problems surface here as
    /// messages; numerical validity is the caller's job (validation
    /// runs separately so its residuals can be reported).
    pub fn instantiate(&self) -> Result<SubmanifoldPoint, String> {
        let a = &self.ambient;
        let phi = rows_to_matrix(&a.phi, "ambient.phi")?;
        let h = rows_to_matrix(&a.h, "ambient.h")?;
        let xi = DVector::from_column_slice(&a.xi);
        let structure = KMuStructure::from_parts(a.m, a.kappa, a.mu, a.c, phi, xi, h)
            .map_err(|e| format!("ambient: {e}"))?;
        let tangent = vectors_to_frame(&self.submanifold.tangent_frame, "tangent_frame")?;
        let normal = match &self.submanifold.normal_frame {
            Some(vecs) => vectors_to_frame(vecs, "normal_frame")?,
            None => {
                let cols = complete_basis(&tangent, structure.dim(), self.meta.seed)
                    .map_err(|e: KmuError| format!("normal frame completion: {e}"))?;
                Frame::from_columns_unchecked(&cols)
                    .map_err(|e| format!("normal frame completion: {e}"))?
            }
        };
        let sigma: Vec<DMatrix<f64>> = self
            .submanifold
            .sigma
            .iter()
            .enumerate()
            .map(|(r, slice)| rows_to_matrix(slice, &format!("sigma[{r}]")))
            .collect::<Result<_, _>>()?;
        SubmanifoldPoint::new(structure, tangent, normal, sigma)
            .map_err(|e| format!("submanifold: {e}"))
    }
}
