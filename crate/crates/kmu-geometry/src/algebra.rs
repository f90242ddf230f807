//! Orthonormal frames, plane sections, and operator restrictions.
//!
//! Everything downstream works in g-orthonormal coordinates, so inner
//! products are plain dot products and frames are column matrices with
//! Gram matrix equal to the identity. This module owns the numerical
//! routines that establish and preserve that normalization.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{KmuError, Result};

/// Residual-norm threshold below which an input vector counts as lying
/// in the span of its predecessors.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormality tolerance for plane sections.
pub const PLANE_TOL: f64 = 1e-10;

/// Ordered list of orthonormal vectors in a common ambient space,
/// stored as the columns of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    mat: DMatrix<f64>,
}

impl Frame {
    /// Builds a frame from columns without orthonormalizing. The Gram
    /// residual is checked against `RANK_TOL`; use [`orthonormalize`]
    /// for raw input vectors.
    pub fn from_columns(cols: &[DVector<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Err(KmuError::Dimension {
                context: "frame needs at least one vector",
                expected: 1,
                actual: 0,
            });
        }
        let dim = cols[0].len();
        for (i, c) in cols.iter().enumerate() {
            if c.len() != dim {
                return Err(KmuError::Dimension {
                    context: "frame vectors must share one ambient dimension",
                    expected: dim,
                    actual: c.len(),
                });
            }
            let _ = i;
        }
        if cols.len() > dim {
            return Err(KmuError::Dimension {
                context: "more frame vectors than ambient dimensions",
                expected: dim,
                actual: cols.len(),
            });
        }
        let mat = DMatrix::from_columns(cols);
        let frame = Frame { mat };
        let residual = frame.gram_residual();
        if residual > RANK_TOL {
            return Err(KmuError::InvalidPlane {
                reason: "frame columns are not orthonormal",
                residual,
            });
        }
        Ok(frame)
    }

    /// Builds a frame from columns without the orthonormality gate.
    /// For data read from external sources, where validation must be
    /// able to measure and report the deviation instead of refusing to
    /// construct. Shape coherence is still enforced.
    pub fn from_columns_unchecked(cols: &[DVector<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Err(KmuError::Dimension {
                context: "frame needs at least one vector",
                expected: 1,
                actual: 0,
            });
        }
        let dim = cols[0].len();
        for c in cols.iter() {
            if c.len() != dim {
                return Err(KmuError::Dimension {
                    context: "frame vectors must share one ambient dimension",
                    expected: dim,
                    actual: c.len(),
                });
            }
        }
        if cols.len() > dim {
            return Err(KmuError::Dimension {
                context: "more frame vectors than ambient dimensions",
                expected: dim,
                actual: cols.len(),
            });
        }
        Ok(Frame {
            mat: DMatrix::from_columns(cols),
        })
    }

    /// Ambient dimension (rows of the column matrix).
    pub fn ambient_dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of vectors in the frame.
    pub fn len(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.mat.ncols() == 0
    }

    /// The i-th frame vector (owned copy).
    pub fn col(&self, i: usize) -> Result<DVector<f64>> {
        if i >= self.len() {
            return Err(KmuError::IndexOutOfRange {
                context: "frame vector",
                index: i,
                len: self.len(),
            });
        }
        Ok(self.mat.column(i).into_owned())
    }

    /// Column matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Max-abs entry of (Gram matrix - identity).
    pub fn gram_residual(&self) -> f64 {
        let gram = self.mat.transpose() * &self.mat;
        let k = gram.nrows();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Coordinates of `v` with respect to the frame (orthogonal
    /// projection coefficients).
    pub fn coords(&self, v: &DVector<f64>) -> DVector<f64> {
        self.mat.transpose() * v
    }

    /// Reassembles an ambient vector from frame coordinates.
    pub fn from_coords(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.mat * coords
    }

    /// Max-abs entry of the component of `v` outside the frame's span.
    pub fn out_of_span_residual(&self, v: &DVector<f64>) -> f64 {
        let projected = self.from_coords(&self.coords(v));
        max_abs_vec(&(v - projected))
    }
}

/// Ordered orthonormal pair spanning a 2-plane.
#[derive(Debug, Clone)]
pub struct PlaneSection {
    e1: DVector<f64>,
    e2: DVector<f64>,
}

impl PlaneSection {
    /// Validates orthonormality within `PLANE_TOL`.
    pub fn new(e1: DVector<f64>, e2: DVector<f64>) -> Result<Self> {
        if e1.len() != e2.len() {
            return Err(KmuError::Dimension {
                context: "plane vectors must share one ambient dimension",
                expected: e1.len(),
                actual: e2.len(),
            });
        }
        let r11 = (e1.dot(&e1) - 1.0).abs();
        let r22 = (e2.dot(&e2) - 1.0).abs();
        let r12 = e1.dot(&e2).abs();
        let residual = r11.max(r22).max(r12);
        if residual > PLANE_TOL {
            return Err(KmuError::InvalidPlane {
                reason: "spanning pair is not orthonormal",
                residual,
            });
        }
        Ok(PlaneSection { e1, e2 })
    }

    pub fn e1(&self) -> &DVector<f64> {
        &self.e1
    }

    pub fn e2(&self) -> &DVector<f64> {
        &self.e2
    }

    pub fn ambient_dim(&self) -> usize {
        self.e1.len()
    }

    /// Same plane with the spanning pair rotated by `theta` in-plane.
    pub fn rotated(&self, theta: f64) -> PlaneSection {
        let (s, c) = theta.sin_cos();
        PlaneSection {
            e1: c * &self.e1 + s * &self.e2,
            e2: -s * &self.e1 + c * &self.e2,
        }
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// The first output vector is parallel to the first input vector. A
/// vector whose residual after projection drops below `RANK_TOL` makes
/// the input degenerate; the error names its index.
pub fn orthonormalize(vectors: &[DVector<f64>]) -> Result<Frame> {
    if vectors.is_empty() {
        return Err(KmuError::Dimension {
            context: "orthonormalize needs at least one vector",
            expected: 1,
            actual: 0,
        });
    }
    let dim = vectors[0].len();
    if vectors.len() > dim {
        return Err(KmuError::Dimension {
            context: "more vectors than ambient dimensions",
            expected: dim,
            actual: vectors.len(),
        });
    }
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(KmuError::Dimension {
                context: "input vectors must share one ambient dimension",
                expected: dim,
                actual: v.len(),
            });
        }
        let mut w = v.clone();
        // Two projection sweeps: classic fix for the precision loss of
        // single-pass Gram-Schmidt on nearly dependent input.
        for _ in 0..2 {
            for u in &accepted {
                let coeff = u.dot(&w);
                w -= coeff * u;
            }
        }
        let norm = w.norm();
        if norm <= RANK_TOL {
            return Err(KmuError::DegenerateInput {
                index,
                residual: norm,
            });
        }
        accepted.push(w / norm);
    }
    Ok(Frame {
        mat: DMatrix::from_columns(&accepted),
    })
}

/// Extends `partial` to an orthonormal basis of the full `d`-dimensional
/// space, returning only the `d - k` new vectors. Candidates are seeded
/// draws, so the completion is a pure function of (partial, d, seed).
pub fn complete_basis(partial: &Frame, d: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    if partial.ambient_dim() != d {
        return Err(KmuError::Dimension {
            context: "completion target must match the ambient dimension",
            expected: partial.ambient_dim(),
            actual: d,
        });
    }
    let k = partial.len();
    if k > d {
        return Err(KmuError::Dimension {
            context: "partial frame larger than completion target",
            expected: d,
            actual: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<DVector<f64>> = (0..k)
        .map(|i| partial.col(i).expect("index in range"))
        .collect();
    let mut new_vectors = Vec::with_capacity(d - k);
    while basis.len() < d {
        // A fresh Gaussian draw is almost surely outside the current
        // span; retry on the measure-zero failure rather than erroring.
        let mut candidate_ok = false;
        for _ in 0..64 {
            let cand = gaussian_vector(&mut rng, d);
            let mut w = cand;
            for _ in 0..2 {
                for u in &basis {
                    let coeff = u.dot(&w);
                    w -= coeff * u;
                }
            }
            let norm = w.norm();
            if norm > RANK_TOL {
                let unit = w / norm;
                basis.push(unit.clone());
                new_vectors.push(unit);
                candidate_ok = true;
                break;
            }
        }
        if !candidate_ok {
            return Err(KmuError::DegenerateInput {
                index: basis.len(),
                residual: 0.0,
            });
        }
    }
    Ok(new_vectors)
}

/// Restriction of a linear operator to a plane: the 2x2 matrix with
/// entries `M[a][b] = <A e_a, e_b>`.
pub fn restrict_to_plane(op: &DMatrix<f64>, plane: &PlaneSection) -> Result<Matrix2<f64>> {
    let d = plane.ambient_dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(KmuError::Dimension {
            context: "operator must act on the plane's ambient space",
            expected: d,
            actual: op.nrows().max(op.ncols()),
        });
    }
    let ae1 = op * plane.e1();
    let ae2 = op * plane.e2();
    Ok(Matrix2::new(
        ae1.dot(plane.e1()),
        ae1.dot(plane.e2()),
        ae2.dot(plane.e1()),
        ae2.dot(plane.e2()),
    ))
}

/// Max-abs entry of a matrix.
pub fn max_abs_mat(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Max-abs entry of a vector.
pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Standard-normal vector of length `d` from the given RNG.
pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(rand_distr::StandardNormal))
}
