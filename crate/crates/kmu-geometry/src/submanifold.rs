//! Tangent subspaces with second fundamental form data, their
//! tangential operators, plane invariants, and the induced curvature
//! through the Gauss equation.
//!
//! A submanifold point is an adapted orthonormal basis (n tangent
//! vectors whose span contains xi, d-n normal vectors) together with
//! the coefficients sigma^r_ij of the second fundamental form in that
//! basis. Two validation modes exist: `Raw` checks the frame and the
//! symmetry of sigma; `Contact` additionally pins the xi-slices of
//! sigma to the values the ambient contact geometry forces.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::algebra::{max_abs_mat, max_abs_vec, Frame, PlaneSection};
use crate::contact::{KMuStructure, ResidualEntry, ValidationReport};
use crate::curvature::CurvatureEngine;
use crate::error::{KmuError, Result};

/// Tangency tolerance for plane sections used with a submanifold.
pub const TANGENCY_TOL: f64 = 1e-10;

/// Validation flavor for submanifold data.
///
/// `Contact` enforces sigma(xi, xi) = 0 and sigma(X, xi) = the normal
/// part of -phi X - phi h X on top of the `Raw` checks. `Raw` accepts
/// any symmetric sigma; inequality checkers that need no xi-slice
/// hypothesis run in this mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    Contact,
    Raw,
}

/// One point of a submanifold: ambient structure, adapted frames, and
/// second fundamental form coefficients sigma[r][(i, j)].
#[derive(Debug, Clone)]
pub struct SubmanifoldPoint {
    structure: KMuStructure,
    tangent: Frame,
    normal: Frame,
    sigma: Vec<DMatrix<f64>>,
}

/// Mean curvature data: nH = trace(sigma).
#[derive(Debug, Clone)]
pub struct MeanCurvature {
    /// H in normal-frame coordinates (length = codimension).
    pub normal_coords: DVector<f64>,
    /// H as an ambient vector.
    pub ambient: DVector<f64>,
    /// ||H||^2.
    pub norm_sq: f64,
    /// ||sigma||^2 = sum of all squared coefficients.
    pub sigma_norm_sq: f64,
}

/// Tangential parts of phi, h, and phi h, as n x n matrices in the
/// tangent frame: entry (i, j) is <e_i, Q e_j>.
#[derive(Debug, Clone)]
pub struct TangentialOperators {
    pub p: DMatrix<f64>,
    pub h_t: DMatrix<f64>,
    pub phih_t: DMatrix<f64>,
}

impl TangentialOperators {
    pub fn p_norm_sq(&self) -> f64 {
        self.p.iter().map(|x| x * x).sum()
    }

    pub fn ht_norm_sq(&self) -> f64 {
        self.h_t.iter().map(|x| x * x).sum()
    }

    pub fn phiht_norm_sq(&self) -> f64 {
        self.phih_t.iter().map(|x| x * x).sum()
    }

    pub fn ht_trace(&self) -> f64 {
        self.h_t.trace()
    }

    pub fn phiht_trace(&self) -> f64 {
        self.phih_t.trace()
    }
}

/// The three scalar invariants of a tangent plane section.
#[derive(Debug, Clone, Copy)]
pub struct PlaneInvariants {
    /// Squared tangential-phi pairing of the spanning basis; in [0, 1].
    pub alpha: f64,
    /// eta(e1)^2 + eta(e2)^2; in [0, 1].
    pub beta: f64,
    /// The eta-weighted tangential-h quadratic form.
    pub gamma: f64,
}

impl SubmanifoldPoint {
    /// Assembles a submanifold point, checking only shape coherence.
    /// Orthonormality, tangency of xi, and sigma symmetry are measured
    /// by [`SubmanifoldPoint::validate`].
    pub fn new(
        structure: KMuStructure,
        tangent: Frame,
        normal: Frame,
        sigma: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let d = structure.dim();
        if tangent.ambient_dim() != d || normal.ambient_dim() != d {
            return Err(KmuError::Dimension {
                context: "frames must live in the structure's ambient space",
                expected: d,
                actual: if tangent.ambient_dim() != d {
                    tangent.ambient_dim()
                } else {
                    normal.ambient_dim()
                },
            });
        }
        let n = tangent.len();
        if n < 2 {
            return Err(KmuError::Dimension {
                context: "submanifold dimension must be at least 2",
                expected: 2,
                actual: n,
            });
        }
        if normal.len() != d - n {
            return Err(KmuError::Dimension {
                context: "normal frame must complete the tangent frame",
                expected: d - n,
                actual: normal.len(),
            });
        }
        if sigma.len() != d - n {
            return Err(KmuError::ParameterCount {
                context: "one sigma slice per normal direction",
                expected: d - n,
                actual: sigma.len(),
            });
        }
        for s in &sigma {
            if s.nrows() != n || s.ncols() != n {
                return Err(KmuError::Dimension {
                    context: "sigma slices must be n x n",
                    expected: n,
                    actual: if s.nrows() != n { s.nrows() } else { s.ncols() },
                });
            }
        }
        Ok(SubmanifoldPoint {
            structure,
            tangent,
            normal,
            sigma,
        })
    }

    pub fn structure(&self) -> &KMuStructure {
        &self.structure
    }

    pub fn tangent_frame(&self) -> &Frame {
        &self.tangent
    }

    pub fn normal_frame(&self) -> &Frame {
        &self.normal
    }

    /// Submanifold dimension n.
    pub fn n(&self) -> usize {
        self.tangent.len()
    }

    /// Codimension d - n.
    pub fn codim(&self) -> usize {
        self.normal.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.structure.dim()
    }

    /// Coefficient matrix of sigma against the r-th normal direction
    /// (equivalently the shape operator A_{n+1+r} in the tangent frame).
    pub fn sigma_slice(&self, r: usize) -> Result<&DMatrix<f64>> {
        self.sigma.get(r).ok_or(KmuError::IndexOutOfRange {
            context: "sigma slice",
            index: r,
            len: self.sigma.len(),
        })
    }

    pub fn sigma_slices(&self) -> &[DMatrix<f64>] {
        &self.sigma
    }

    /// sigma(e_i, e_j) in normal-frame coordinates.
    pub fn sigma_vector(&self, i: usize, j: usize) -> Result<DVector<f64>> {
        let n = self.n();
        for idx in [i, j] {
            if idx >= n {
                return Err(KmuError::IndexOutOfRange {
                    context: "sigma coefficient",
                    index: idx,
                    len: n,
                });
            }
        }
        Ok(DVector::from_fn(self.codim(), |r, _| self.sigma[r][(i, j)]))
    }

    /// Coordinates of xi in the tangent frame.
    pub fn xi_coords(&self) -> DVector<f64> {
        self.tangent.coords(self.structure.xi())
    }

    /// Max-abs entry of the part of `v` outside the tangent span.
    pub fn tangency_residual(&self, v: &DVector<f64>) -> f64 {
        self.tangent.out_of_span_residual(v)
    }

    /// Errors unless both spanning vectors of the plane are tangent
    /// within [`TANGENCY_TOL`].
    pub fn require_tangent_plane(&self, plane: &PlaneSection) -> Result<()> {
        let r1 = self.tangency_residual(plane.e1());
        let r2 = self.tangency_residual(plane.e2());
        let worst = r1.max(r2);
        if worst > TANGENCY_TOL {
            return Err(KmuError::InvalidPlane {
                reason: "plane is not tangent to the submanifold",
                residual: worst,
            });
        }
        Ok(())
    }

    /// The xi-slice the contact geometry forces: sigma(X, xi) must be
    /// the normal part of -phi X - phi h X. Returned in normal-frame
    /// coordinates for the i-th tangent vector.
    fn forced_xi_slice(&self, i: usize) -> DVector<f64> {
        let e_i = self.tangent.col(i).expect("index in range");
        let phi = self.structure.phi();
        let target = -(phi * &e_i) - phi * (self.structure.h() * &e_i);
        self.normal.coords(&target)
    }

    /// Measures every submanifold invariant as a named residual.
    pub fn validate(&self, tol: f64, mode: SigmaMode) -> ValidationReport {
        let mut entries = Vec::new();
        entries.push(ResidualEntry {
            name: "tangent_gram",
            residual: self.tangent.gram_residual(),
        });
        entries.push(ResidualEntry {
            name: "normal_gram",
            residual: self.normal.gram_residual(),
        });
        let cross = self.tangent.matrix().transpose() * self.normal.matrix();
        entries.push(ResidualEntry {
            name: "cross_orthogonality",
            residual: max_abs_mat(&cross),
        });
        entries.push(ResidualEntry {
            name: "xi_tangency",
            residual: self.tangency_residual(self.structure.xi()),
        });
        let sym = self
            .sigma
            .iter()
            .map(|s| max_abs_mat(&(s - s.transpose())))
            .fold(0.0f64, f64::max);
        entries.push(ResidualEntry {
            name: "sigma_symmetry",
            residual: sym,
        });

        if mode == SigmaMode::Contact {
            let xi_c = self.xi_coords();
            // sigma(xi, xi) in normal coordinates; its Euclidean norm is
            // the reported residual, so a totally umbilical sigma with
            // mean curvature H reports exactly ||H||.
            let sigma_xi_xi = DVector::from_fn(self.codim(), |r, _| {
                (xi_c.transpose() * &self.sigma[r] * &xi_c)[(0, 0)]
            });
            entries.push(ResidualEntry {
                name: "sigma_xi_xi",
                residual: sigma_xi_xi.norm(),
            });

            let mut worst = 0.0f64;
            for i in 0..self.n() {
                let got = DVector::from_fn(self.codim(), |r, _| {
                    let row = self.sigma[r].row(i);
                    let mut acc = 0.0;
                    for (j, x) in xi_c.iter().enumerate() {
                        acc += row[j] * x;
                    }
                    acc
                });
                let forced = self.forced_xi_slice(i);
                worst = worst.max(max_abs_vec(&(got - forced)));
            }
            entries.push(ResidualEntry {
                name: "sigma_xi_consistency",
                residual: worst,
            });
        }

        ValidationReport::new(entries, tol)
    }

    /// Mean curvature H = (1/n) trace(sigma) plus the squared norms the
    /// identities need.
    pub fn mean_curvature(&self) -> MeanCurvature {
        let n = self.n() as f64;
        let normal_coords = DVector::from_fn(self.codim(), |r, _| self.sigma[r].trace() / n);
        let ambient = self.normal.from_coords(&normal_coords);
        let norm_sq = normal_coords.dot(&normal_coords);
        let sigma_norm_sq = self
            .sigma
            .iter()
            .map(|s| s.iter().map(|x| x * x).sum::<f64>())
            .sum();
        MeanCurvature {
            normal_coords,
            ambient,
            norm_sq,
            sigma_norm_sq,
        }
    }

    /// Tangential parts of phi, h, phi h in the tangent frame.
    pub fn tangential_operators(&self) -> TangentialOperators {
        let t = self.tangent.matrix();
        let phi = self.structure.phi();
        let h = self.structure.h();
        let p = t.transpose() * (phi * t);
        let h_t = t.transpose() * (h * t);
        let phih_t = t.transpose() * (phi * h * t);
        TangentialOperators { p, h_t, phih_t }
    }

    /// alpha, beta, gamma of a tangent plane, computed from the
    /// tangential operators exactly as the invariants are defined (the
    /// gamma form uses tangential h, not ambient h).
    pub fn plane_invariants(&self, plane: &PlaneSection) -> Result<PlaneInvariants> {
        self.require_tangent_plane(plane)?;
        let ops = self.tangential_operators();
        let c1 = self.tangent.coords(plane.e1());
        let c2 = self.tangent.coords(plane.e2());
        let eta1 = self.structure.eta(plane.e1());
        let eta2 = self.structure.eta(plane.e2());

        let pairing = (c1.transpose() * &ops.p * &c2)[(0, 0)];
        let alpha = pairing * pairing;
        let beta = eta1 * eta1 + eta2 * eta2;
        let ht = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &ops.h_t * b)[(0, 0)];
        let gamma = eta1 * eta1 * ht(&c2, &c2) + eta2 * eta2 * ht(&c1, &c1)
            - 2.0 * eta1 * eta2 * ht(&c1, &c2);
        Ok(PlaneInvariants { alpha, beta, gamma })
    }

    /// Restrictions of the tangential h and phi h to a plane, as 2x2
    /// matrices in the plane's own basis (used by the trace/det
    /// correction terms).
    pub fn plane_restrictions(&self, plane: &PlaneSection) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
        self.require_tangent_plane(plane)?;
        let phi = self.structure.phi();
        let h = self.structure.h();
        let h_res = crate::algebra::restrict_to_plane(h, plane)?;
        let phih = phi * h;
        let phih_res = crate::algebra::restrict_to_plane(&phih, plane)?;
        Ok((h_res, phih_res))
    }

    /// One induced curvature component through the Gauss equation:
    /// R(i,j,k,l) = ambient(i,j,k,l) + <sigma_il, sigma_jk>
    ///            - <sigma_ik, sigma_jl>.
    pub fn induced_curvature(&self, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
        let n = self.n();
        for idx in [i, j, k, l] {
            if idx >= n {
                return Err(KmuError::IndexOutOfRange {
                    context: "tangent frame index",
                    index: idx,
                    len: n,
                });
            }
        }
        let engine = CurvatureEngine::new_unchecked(&self.structure);
        let ti = self.tangent.col(i)?;
        let tj = self.tangent.col(j)?;
        let tk = self.tangent.col(k)?;
        let tl = self.tangent.col(l)?;
        let ambient = engine.quad(&ti, &tj, &tk, &tl)?;
        Ok(ambient + self.sigma_dot(i, l, j, k) - self.sigma_dot(i, k, j, l))
    }

    /// <sigma(e_a, e_b), sigma(e_c, e_e)> summed over the normal frame.
    fn sigma_dot(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        self.sigma
            .iter()
            .map(|s| s[(a, b)] * s[(c, e)])
            .sum()
    }

    /// Precomputes the full induced curvature tensor over the tangent
    /// frame. The ambient engine is built unchecked; callers that need
    /// the validity gate apply it before coming here.
    pub fn induced_tensor(&self) -> Result<InducedTensor> {
        let n = self.n();
        let engine = CurvatureEngine::new_unchecked(&self.structure);
        let cols: Vec<DVector<f64>> = (0..n).map(|i| self.tangent.col(i).unwrap()).collect();
        let mut vals = vec![0.0f64; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let rv = engine.curvature_vector(&cols[i], &cols[j], &cols[k])?;
                    for l in 0..n {
                        let ambient = rv.dot(&cols[l]);
                        let gauss =
                            self.sigma_dot(i, l, j, k) - self.sigma_dot(i, k, j, l);
                        vals[((i * n + j) * n + k) * n + l] = ambient + gauss;
                    }
                }
            }
        }
        Ok(InducedTensor { n, vals })
    }
}

/// Dense induced curvature tensor R[i][j][k][l] over the tangent frame.
#[derive(Debug, Clone)]
pub struct InducedTensor {
    n: usize,
    vals: Vec<f64>,
}

impl InducedTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n && k < self.n && l < self.n);
        self.vals[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Sectional curvature of the coordinate plane (i, j), i != j.
    pub fn sectional_pair(&self, i: usize, j: usize) -> f64 {
        self.get(i, j, j, i)
    }

    /// Scalar curvature: sum of sectional curvatures over coordinate
    /// planes i < j.
    pub fn scalar_curvature(&self) -> f64 {
        let mut tau = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                tau += self.sectional_pair(i, j);
            }
        }
        tau
    }

    /// Full contraction R(x, y, z, w) for coordinate vectors.
    pub fn quad_coords(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        debug_assert!(x.len() == n && y.len() == n && z.len() == n && w.len() == n);
        let mut acc = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        acc += self.get(i, j, k, l) * x[i] * y[j] * z[k] * w[l];
                    }
                }
            }
        }
        acc
    }

    /// Sectional curvature of the plane spanned by orthonormal
    /// coordinate vectors (x, y).
    pub fn sectional_coords(&self, x: &[f64], y: &[f64]) -> f64 {
        self.quad_coords(x, y, y, x)
    }

    /// Contracts the tensor onto the span of `basis` (n x q, orthonormal
    /// columns), yielding a q-dimensional tensor in the column basis.
    pub fn restricted(&self, basis: &DMatrix<f64>) -> Result<InducedTensor> {
        let n = self.n;
        if basis.nrows() != n {
            return Err(KmuError::Dimension {
                context: "restriction basis must have n rows",
                expected: n,
                actual: basis.nrows(),
            });
        }
        let q = basis.ncols();
        if q > n {
            return Err(KmuError::Dimension {
                context: "restriction basis has too many columns",
                expected: n,
                actual: q,
            });
        }
        // Contract one index at a time.
        let mut t1 = vec![0.0f64; q * n * n * n];
        for a in 0..q {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = 0.0;
                        for i in 0..n {
                            acc += basis[(i, a)] * self.get(i, j, k, l);
                        }
                        t1[((a * n + j) * n + k) * n + l] = acc;
                    }
                }
            }
        }
        let mut t2 = vec![0.0f64; q * q * n * n];
        for a in 0..q {
            for b in 0..q {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = 0.0;
                        for j in 0..n {
                            acc += basis[(j, b)] * t1[((a * n + j) * n + k) * n + l];
                        }
                        t2[((a * q + b) * n + k) * n + l] = acc;
                    }
                }
            }
        }
        let mut t3 = vec![0.0f64; q * q * q * n];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    for l in 0..n {
                        let mut acc = 0.0;
                        for k in 0..n {
                            acc += basis[(k, c)] * t2[((a * q + b) * n + k) * n + l];
                        }
                        t3[((a * q + b) * q + c) * n + l] = acc;
                    }
                }
            }
        }
        let mut vals = vec![0.0f64; q * q * q * q];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    for e in 0..q {
                        let mut acc = 0.0;
                        for l in 0..n {
                            acc += basis[(l, e)] * t3[((a * q + b) * q + c) * n + l];
                        }
                        vals[((a * q + b) * q + c) * q + e] = acc;
                    }
                }
            }
        }
        Ok(InducedTensor { n: q, vals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::orthonormalize;
    use crate::curvature::reference;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis_vec(d: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v
    }

    /// Tangent space span{u_1, phi u_1, xi} of the canonical structure:
    /// phi- and h-invariant by construction.
    fn invariant_sub(kappa: f64, c: Option<f64>, sigma: Vec<DMatrix<f64>>) -> SubmanifoldPoint {
        let s = KMuStructure::canonical(2, kappa, c).unwrap();
        let d = s.dim();
        let tangent = Frame::from_columns(&[basis_vec(d, 0), basis_vec(d, 2), basis_vec(d, 4)])
            .unwrap();
        let normal = Frame::from_columns(&[basis_vec(d, 1), basis_vec(d, 3)]).unwrap();
        SubmanifoldPoint::new(s, tangent, normal, sigma).unwrap()
    }

    /// Tangent space span{u_1, u_2, xi}: NOT phi-invariant.
    fn non_invariant_sub(kappa: f64, sigma: Vec<DMatrix<f64>>) -> SubmanifoldPoint {
        let s = KMuStructure::canonical(2, kappa, None).unwrap();
        let d = s.dim();
        let tangent = Frame::from_columns(&[basis_vec(d, 0), basis_vec(d, 1), basis_vec(d, 4)])
            .unwrap();
        let normal = Frame::from_columns(&[basis_vec(d, 2), basis_vec(d, 3)]).unwrap();
        SubmanifoldPoint::new(s, tangent, normal, sigma).unwrap()
    }

    fn zero_sigma(codim: usize, n: usize) -> Vec<DMatrix<f64>> {
        (0..codim).map(|_| DMatrix::zeros(n, n)).collect()
    }

    fn random_symmetric_sigma(
        codim: usize,
        n: usize,
        scale: f64,
        seed: u64,
    ) -> Vec<DMatrix<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..codim)
            .map(|_| {
                let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
                (&raw + raw.transpose()) * 0.5
            })
            .collect()
    }

    #[test]
    fn invariant_frame_with_zero_sigma_passes_contact_mode() {
        let sub = invariant_sub(0.5, None, zero_sigma(2, 3));
        let report = sub.validate(1e-12, SigmaMode::Contact);
        assert!(report.passed(), "worst {}", report.max_residual());
    }

    #[test]
    fn non_invariant_frame_with_zero_sigma_fails_contact_passes_raw() {
        let sub = non_invariant_sub(0.5, zero_sigma(2, 3));
        assert!(sub.validate(1e-10, SigmaMode::Raw).passed());
        let contact = sub.validate(1e-10, SigmaMode::Contact);
        assert!(!contact.passed());
        // -phi u_1 - phi h u_1 = -(1 + lambda) phi u_1 is purely normal
        // here, so the slice residual is 1 + lambda.
        let expect = 1.0 + sub.structure().lambda();
        let got = contact.residual("sigma_xi_consistency").unwrap();
        assert!((got - expect).abs() < 1e-12, "residual {got}");
    }

    #[test]
    fn sigma_xi_xi_reports_the_norm() {
        let mut sigma = zero_sigma(2, 3);
        sigma[0][(2, 2)] = 0.7;
        let sub = invariant_sub(0.5, None, sigma);
        let report = sub.validate(1e-10, SigmaMode::Contact);
        assert!((report.residual("sigma_xi_xi").unwrap() - 0.7).abs() < 1e-14);
        assert!(sub.validate(1e-10, SigmaMode::Raw).passed());
    }

    #[test]
    fn asymmetric_sigma_is_flagged() {
        let mut sigma = zero_sigma(2, 3);
        sigma[1][(0, 1)] = 0.3;
        let sub = invariant_sub(1.0, Some(-3.0), sigma);
        let report = sub.validate(1e-10, SigmaMode::Raw);
        assert_eq!(report.residual("sigma_symmetry"), Some(0.3));
        assert!(!report.passed());
    }

    #[test]
    fn mean_curvature_single_entry_example() {
        let mut sigma = zero_sigma(2, 3);
        sigma[0][(0, 0)] = 3.0;
        let sub = invariant_sub(0.5, None, sigma);
        let mc = sub.mean_curvature();
        assert!((mc.norm_sq - 1.0).abs() < 1e-15);
        assert!((mc.sigma_norm_sq - 9.0).abs() < 1e-15);
        assert!((mc.ambient.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_sigma_means_zero_mean_curvature() {
        let sub = invariant_sub(1.0, Some(2.0), zero_sigma(2, 3));
        let mc = sub.mean_curvature();
        assert_eq!(mc.norm_sq, 0.0);
        assert_eq!(mc.sigma_norm_sq, 0.0);
    }

    #[test]
    fn invariant_frame_tangential_operators() {
        let sub = invariant_sub(0.5, None, zero_sigma(2, 3));
        let ops = sub.tangential_operators();
        let lambda = sub.structure().lambda();
        assert!((ops.p_norm_sq() - 2.0).abs() < 1e-14, "||P||^2 = n-1");
        assert!(ops.ht_trace().abs() < 1e-14);
        assert!(ops.phiht_trace().abs() < 1e-14);
        assert!((ops.ht_norm_sq() - 2.0 * lambda * lambda).abs() < 1e-14);
        assert!((ops.phiht_norm_sq() - ops.ht_norm_sq()).abs() < 1e-14);
        // P is antisymmetric, hT symmetric.
        assert!(max_abs_mat(&(&ops.p + ops.p.transpose())) < 1e-14);
        assert!(max_abs_mat(&(&ops.h_t - ops.h_t.transpose())) < 1e-14);
    }

    #[test]
    fn phi_free_tangent_space_has_zero_p() {
        // span{u_1, xi}: phi u_1 is normal, phi xi = 0.
        let s = KMuStructure::canonical(2, 0.5, None).unwrap();
        let d = s.dim();
        let tangent = Frame::from_columns(&[basis_vec(d, 0), basis_vec(d, 4)]).unwrap();
        let normal =
            Frame::from_columns(&[basis_vec(d, 1), basis_vec(d, 2), basis_vec(d, 3)]).unwrap();
        let sub = SubmanifoldPoint::new(s, tangent, normal, zero_sigma(3, 2)).unwrap();
        let ops = sub.tangential_operators();
        assert_eq!(max_abs_mat(&ops.p), 0.0);
    }

    #[test]
    fn tangential_entries_match_direct_dots() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let s = KMuStructure::canonical(3, 0.25, None).unwrap();
        let d = s.dim();
        let mut vectors = vec![s.xi().clone()];
        for _ in 0..3 {
            vectors.push(crate::algebra::gaussian_vector(&mut rng, d));
        }
        let tangent = orthonormalize(&vectors).unwrap();
        let completion = crate::algebra::complete_basis(&tangent, d, 5).unwrap();
        let normal = Frame::from_columns(&completion).unwrap();
        let sub = SubmanifoldPoint::new(s, tangent, normal, zero_sigma(3, 4)).unwrap();
        let ops = sub.tangential_operators();
        for i in 0..4 {
            for j in 0..4 {
                let ei = sub.tangent_frame().col(i).unwrap();
                let ej = sub.tangent_frame().col(j).unwrap();
                let p_expect = ei.dot(&(sub.structure().phi() * &ej));
                let h_expect = ei.dot(&(sub.structure().h() * &ej));
                assert!((ops.p[(i, j)] - p_expect).abs() < 1e-14);
                assert!((ops.h_t[(i, j)] - h_expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn plane_invariants_pinned_values() {
        let sub = invariant_sub(0.5, None, zero_sigma(2, 3));
        let d = sub.ambient_dim();
        let lambda = sub.structure().lambda();

        // span{u_1, xi}: beta = 1, gamma = <hT u_1, u_1> = lambda.
        let p1 = PlaneSection::new(basis_vec(d, 0), basis_vec(d, 4)).unwrap();
        let inv1 = sub.plane_invariants(&p1).unwrap();
        assert!((inv1.beta - 1.0).abs() < 1e-14);
        assert!((inv1.gamma - lambda).abs() < 1e-14);
        assert!(inv1.alpha.abs() < 1e-14);

        // span{u_1, phi u_1}: alpha = 1, beta = gamma = 0.
        let p2 = PlaneSection::new(basis_vec(d, 0), basis_vec(d, 2)).unwrap();
        let inv2 = sub.plane_invariants(&p2).unwrap();
        assert!((inv2.alpha - 1.0).abs() < 1e-14);
        assert!(inv2.beta.abs() < 1e-14);
        assert!(inv2.gamma.abs() < 1e-14);
    }

    #[test]
    fn plane_invariants_rotation_invariance() {
        let sub = invariant_sub(0.25, None, zero_sigma(2, 3));
        let d = sub.ambient_dim();
        let e1 = (basis_vec(d, 0) + basis_vec(d, 4)) / 2.0f64.sqrt();
        let e2 = basis_vec(d, 2);
        let plane = PlaneSection::new(e1, e2).unwrap();
        let base = sub.plane_invariants(&plane).unwrap();
        assert!(base.alpha >= 0.0 && base.alpha <= 1.0);
        assert!(base.beta >= 0.0 && base.beta <= 1.0);
        for k in 1..9 {
            let rot = plane.rotated(0.7 * k as f64);
            let got = sub.plane_invariants(&rot).unwrap();
            assert!((got.alpha - base.alpha).abs() < 1e-10);
            assert!((got.beta - base.beta).abs() < 1e-10);
            assert!((got.gamma - base.gamma).abs() < 1e-10);
        }
    }

    #[test]
    fn non_tangent_plane_is_rejected() {
        let sub = invariant_sub(0.5, None, zero_sigma(2, 3));
        let d = sub.ambient_dim();
        let plane = PlaneSection::new(basis_vec(d, 0), basis_vec(d, 1)).unwrap();
        assert!(matches!(
            sub.plane_invariants(&plane),
            Err(KmuError::InvalidPlane { .. })
        ));
    }

    #[test]
    fn zero_sigma_induced_equals_ambient() {
        let sub = non_invariant_sub(0.5, zero_sigma(2, 3));
        let engine = CurvatureEngine::new(sub.structure(), 1e-10).unwrap();
        for (i, j, k, l) in [(0, 1, 1, 0), (0, 2, 2, 0), (1, 2, 0, 1), (0, 1, 2, 0)] {
            let got = sub.induced_curvature(i, j, k, l).unwrap();
            let ti = sub.tangent_frame().col(i).unwrap();
            let tj = sub.tangent_frame().col(j).unwrap();
            let tk = sub.tangent_frame().col(k).unwrap();
            let tl = sub.tangent_frame().col(l).unwrap();
            let expect = engine.quad(&ti, &tj, &tk, &tl).unwrap();
            assert!((got - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_curvature_totally_geodesic_sections_are_one() {
        let s = KMuStructure::canonical(2, 1.0, Some(1.0)).unwrap();
        let d = s.dim();
        let tangent = Frame::from_columns(&[basis_vec(d, 0), basis_vec(d, 1), basis_vec(d, 4)])
            .unwrap();
        let normal = Frame::from_columns(&[basis_vec(d, 2), basis_vec(d, 3)]).unwrap();
        let sub = SubmanifoldPoint::new(s, tangent, normal, zero_sigma(2, 3)).unwrap();
        let tensor = sub.induced_tensor().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((tensor.sectional_pair(i, j) - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!((tensor.scalar_curvature() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_equation_matches_independent_transcription() {
        let sigma = random_symmetric_sigma(2, 3, 0.8, 901);
        let sub = non_invariant_sub(0.25, sigma);
        let tensor = sub.induced_tensor().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let ti = sub.tangent_frame().col(i).unwrap();
                        let tj = sub.tangent_frame().col(j).unwrap();
                        let tk = sub.tangent_frame().col(k).unwrap();
                        let tl = sub.tangent_frame().col(l).unwrap();
                        let ambient = reference::quad(sub.structure(), &ti, &tj, &tk, &tl);
                        let mut corr = 0.0;
                        for r in 0..sub.codim() {
                            let s_r = sub.sigma_slice(r).unwrap();
                            corr += s_r[(i, l)] * s_r[(j, k)] - s_r[(i, k)] * s_r[(j, l)];
                        }
                        let expect = ambient + corr;
                        let got = tensor.get(i, j, k, l);
                        assert!(
                            (got - expect).abs() < 1e-12,
                            "Gauss mismatch at ({i},{j},{k},{l})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn induced_tensor_keeps_pair_symmetry_and_bianchi() {
        let sigma = random_symmetric_sigma(2, 3, 1.2, 333);
        let sub = invariant_sub(0.0, None, sigma);
        let t = sub.induced_tensor().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let pair = t.get(i, j, k, l) - t.get(k, l, i, j);
                        assert!(pair.abs() < 1e-9);
                        let cyc =
                            t.get(i, j, k, l) + t.get(j, k, i, l) + t.get(k, i, j, l);
                        assert!(cyc.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_curvature_matches_ordered_pair_contraction() {
        let sigma = random_symmetric_sigma(2, 3, 0.5, 1234);
        let sub = non_invariant_sub(0.5, sigma);
        let t = sub.induced_tensor().unwrap();
        let mut double = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    double += t.get(i, j, j, i);
                }
            }
        }
        assert!((t.scalar_curvature() - double / 2.0).abs() < 1e-12);
    }

    #[test]
    fn restriction_to_full_basis_is_identity() {
        let sigma = random_symmetric_sigma(2, 3, 0.5, 55);
        let sub = non_invariant_sub(0.5, sigma);
        let t = sub.induced_tensor().unwrap();
        let id = DMatrix::identity(3, 3);
        let r = t.restricted(&id).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert_eq!(t.get(i, j, k, l), r.get(i, j, k, l));
                    }
                }
            }
        }
    }

    #[test]
    fn quad_coords_agrees_with_frame_vectors() {
        let sigma = random_symmetric_sigma(2, 3, 0.9, 4321);
        let sub = non_invariant_sub(0.0, sigma);
        let t = sub.induced_tensor().unwrap();
        let x = [0.6, 0.8, 0.0];
        let y = [-0.8, 0.6, 0.0];
        let mut expect = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        expect += t.get(i, j, k, l) * x[i] * y[j] * y[k] * x[l];
                    }
                }
            }
        }
        assert!((t.sectional_coords(&x, &y) - expect).abs() < 1e-13);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let s = KMuStructure::canonical(2, 0.5, None).unwrap();
        let d = s.dim();
        let tangent = Frame::from_columns(&[basis_vec(d, 0), basis_vec(d, 2), basis_vec(d, 4)])
            .unwrap();
        let normal = Frame::from_columns(&[basis_vec(d, 1), basis_vec(d, 3)]).unwrap();
        // Wrong sigma slice count.
        assert!(matches!(
            SubmanifoldPoint::new(s.clone(), tangent.clone(), normal.clone(), zero_sigma(1, 3)),
            Err(KmuError::ParameterCount { .. })
        ));
        // Wrong sigma slice size.
        assert!(matches!(
            SubmanifoldPoint::new(s.clone(), tangent.clone(), normal.clone(), zero_sigma(2, 2)),
            Err(KmuError::Dimension { .. })
        ));
        // Normal frame not completing.
        let short_normal = Frame::from_columns(&[basis_vec(d, 1)]).unwrap();
        assert!(matches!(
            SubmanifoldPoint::new(s, tangent, short_normal, zero_sigma(1, 3)),
            Err(KmuError::Dimension { .. })
        ));
    }
}
