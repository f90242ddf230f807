//! Scalar curvature, sectional curvature, and the delta invariant
//! tau - inf K over tangent 2-planes.
//!
//! The infimum is computed two independent ways: a multi-start
//! projected-gradient descent on the Stiefel manifold of orthonormal
//! 2-frames (fast, used by default), and a brute-force grid over an
//! explicit chart of the Grassmannian of 2-planes (exact up to grid
//! resolution, available for cross-checking in low dimensions).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{gaussian_vector, PlaneSection};
use crate::curvature::CurvatureEngine;
use crate::error::{KmuError, Result};
use crate::submanifold::{InducedTensor, SubmanifoldPoint};

/// Which tangent planes the minimization ranges over: all of them, or
/// only those orthogonal to xi (the contact distribution).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    All,
    D,
}

/// Knobs for the minimization. `oracle_resolution: Some(res)` makes
/// `delta` also run the brute-force grid at that resolution and record
/// its result for comparison.
#[derive(Debug, Clone)]
pub struct DeltaOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
    pub oracle_resolution: Option<usize>,
    pub sample_cap: u64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            restarts: 64,
            max_iters: 500,
            grad_tol: 1e-10,
            seed: 0,
            oracle_resolution: None,
            sample_cap: 20_000_000,
        }
    }
}

/// Output of the descent-based minimization.
#[derive(Debug, Clone)]
pub struct MinSectional {
    pub min_k: f64,
    pub plane: PlaneSection,
    pub converged: bool,
    pub restarts_used: usize,
    pub grad_norm: f64,
}

/// Output of the brute-force grid search (after one refinement
/// descent from the best sample).
#[derive(Debug, Clone)]
pub struct BruteForceOutcome {
    pub min_k: f64,
    pub plane: PlaneSection,
    pub samples: u64,
}

/// The delta invariant together with everything needed to audit it.
#[derive(Debug, Clone)]
pub struct DeltaResult {
    pub value: f64,
    pub min_k: f64,
    pub minimizing_plane: PlaneSection,
    pub oracle_min_k: Option<f64>,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Scalar curvature tau = sum over index pairs i < j of K(e_i, e_j).
pub fn scalar_curvature(sub: &SubmanifoldPoint) -> Result<f64> {
    Ok(sub.induced_tensor()?.scalar_curvature())
}

/// Sectional curvature of a tangent plane, computed directly from the
/// ambient curvature and the second fundamental form (no full tensor
/// assembly).
pub fn sectional_curvature(sub: &SubmanifoldPoint, plane: &PlaneSection) -> Result<f64> {
    sub.require_tangent_plane(plane)?;
    let engine = CurvatureEngine::new_unchecked(sub.structure());
    let ambient = engine.quad(plane.e1(), plane.e2(), plane.e2(), plane.e1())?;
    let cx = sub.tangent_frame().coords(plane.e1());
    let cy = sub.tangent_frame().coords(plane.e2());
    let mut correction = 0.0;
    for slice in sub.sigma_slices() {
        let sxx = (cx.transpose() * slice * &cx)[(0, 0)];
        let syy = (cy.transpose() * slice * &cy)[(0, 0)];
        let sxy = (cx.transpose() * slice * &cy)[(0, 0)];
        correction += sxx * syy - sxy * sxy;
    }
    Ok(ambient + correction)
}

/// Tensor to minimize over, plus the coordinate basis that maps the
/// reduced coordinates back into tangent-frame coordinates.
struct Arena {
    tensor: InducedTensor,
    basis: DMatrix<f64>,
}

fn arena(sub: &SubmanifoldPoint, domain: Domain) -> Result<Arena> {
    let full = sub.induced_tensor()?;
    let n = sub.n();
    match domain {
        Domain::All => Ok(Arena {
            tensor: full,
            basis: DMatrix::identity(n, n),
        }),
        Domain::D => {
            if n < 3 {
                return Err(KmuError::Dimension {
                    context: "xi-orthogonal planes need dimension >= 3",
                    expected: 3,
                    actual: n,
                });
            }
            let xi = sub.structure().xi().clone();
            let residual = sub.tangency_residual(&xi);
            if residual > 1e-8 {
                return Err(KmuError::Hypothesis(format!(
                    "the distribution domain requires xi tangent to the submanifold \
                     (tangency residual {residual:.3e})"
                )));
            }
            let xc = sub.xi_coords().normalize();
            // Householder reflection sending a coordinate axis to xc;
            // its remaining columns are an orthonormal basis of the
            // complement of xc, with no randomness involved.
            let sign = if xc[0] >= 0.0 { 1.0 } else { -1.0 };
            let mut w = xc.clone();
            w[0] += sign;
            let wn = w.norm();
            let house = DMatrix::identity(n, n) - (&w * w.transpose()) * (2.0 / (wn * wn));
            let basis = house.columns(1, n - 1).into_owned();
            let tensor = full.restricted(&basis)?;
            Ok(Arena { tensor, basis })
        }
    }
}

/// K(x, y) = T(x, y, y, x) as a multilinear function of coordinate
/// vectors, together with its gradient in x and y. Valid for
/// arbitrary (not necessarily orthonormal) inputs; the optimizer's
/// objective and exactly what a finite-difference probe should match.
pub fn plane_curvature_gradient(
    t: &InducedTensor,
    x: &[f64],
    y: &[f64],
) -> (f64, Vec<f64>, Vec<f64>) {
    let q = t.n();
    let mut k = 0.0;
    let mut gx = vec![0.0; q];
    let mut gy = vec![0.0; q];
    for i in 0..q {
        for j in 0..q {
            for kk in 0..q {
                for l in 0..q {
                    let v = t.get(i, j, kk, l);
                    if v == 0.0 {
                        continue;
                    }
                    k += v * x[i] * y[j] * y[kk] * x[l];
                    gx[i] += v * y[j] * y[kk] * x[l];
                    gx[l] += v * x[i] * y[j] * y[kk];
                    gy[j] += v * x[i] * y[kk] * x[l];
                    gy[kk] += v * x[i] * y[j] * x[l];
                }
            }
        }
    }
    (k, gx, gy)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Gram-Schmidt retraction back onto orthonormal 2-frames. Returns
/// None when the pair has collapsed to rank < 2.
fn retract(x: &[f64], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let nx = dot(x, x).sqrt();
    if nx < 1e-14 {
        return None;
    }
    let xs: Vec<f64> = x.iter().map(|v| v / nx).collect();
    let c = dot(&xs, y);
    let mut ys: Vec<f64> = y.iter().zip(&xs).map(|(v, u)| v - c * u).collect();
    let ny = dot(&ys, &ys).sqrt();
    if ny < 1e-14 {
        return None;
    }
    for v in &mut ys {
        *v /= ny;
    }
    Some((xs, ys))
}

struct DescentRun {
    k: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    grad_norm: f64,
    converged: bool,
}

/// Projected-gradient descent with Armijo backtracking from one
/// starting 2-frame. Plain steepest descent crawls along the flat
/// valleys these curvature landscapes have, so the backtracking is
/// seeded with a Barzilai-Borwein spectral step and judged against a
/// short non-monotone reference window; the best visited point is
/// returned, which keeps the run's result no worse than its start.
fn descend(
    t: &InducedTensor,
    x0: Vec<f64>,
    y0: Vec<f64>,
    max_iters: usize,
    grad_tol: f64,
) -> DescentRun {
    let mut x = x0;
    let mut y = y0;
    let (mut k, mut gx, mut gy) = plane_curvature_gradient(t, &x, &y);
    let mut best_k = k;
    let mut best_x = x.clone();
    let mut best_y = y.clone();
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    let mut prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    let mut window = [k; 10];
    let mut filled = 1usize;
    for iter in 0..max_iters {
        // Project the gradient to the tangent space of the Stiefel
        // manifold: PG = G - X sym(X^T G).
        let s00 = dot(&x, &gx);
        let s11 = dot(&y, &gy);
        let s01 = 0.5 * (dot(&x, &gy) + dot(&y, &gx));
        let pgx: Vec<f64> = (0..x.len())
            .map(|p| gx[p] - s00 * x[p] - s01 * y[p])
            .collect();
        let pgy: Vec<f64> = (0..y.len())
            .map(|p| gy[p] - s01 * x[p] - s11 * y[p])
            .collect();
        let pg_sq = dot(&pgx, &pgx) + dot(&pgy, &pgy);
        grad_norm = pg_sq.sqrt();
        if grad_norm <= grad_tol {
            converged = true;
            break;
        }
        let mut step = match &prev {
            Some((px, py, ppgx, ppgy)) => {
                let mut ss = 0.0;
                let mut sg = 0.0;
                for i in 0..x.len() {
                    let s = x[i] - px[i];
                    ss += s * s;
                    sg += s * (pgx[i] - ppgx[i]);
                }
                for i in 0..y.len() {
                    let s = y[i] - py[i];
                    ss += s * s;
                    sg += s * (pgy[i] - ppgy[i]);
                }
                if sg > 1e-300 {
                    (ss / sg).clamp(1e-12, 1e4)
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let reference = window[..filled.min(10)]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        while step > 1e-16 {
            let cx: Vec<f64> = (0..x.len()).map(|p| x[p] - step * pgx[p]).collect();
            let cy: Vec<f64> = (0..y.len()).map(|p| y[p] - step * pgy[p]).collect();
            if let Some((nx, ny)) = retract(&cx, &cy) {
                let (nk, ngx, ngy) = plane_curvature_gradient(t, &nx, &ny);
                if nk <= reference - 1e-4 * step * pg_sq {
                    prev = Some((
                        std::mem::replace(&mut x, nx),
                        std::mem::replace(&mut y, ny),
                        pgx,
                        pgy,
                    ));
                    k = nk;
                    gx = ngx;
                    gy = ngy;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // Line search stalled: the point is numerically critical.
            converged = grad_norm <= 1e-6;
            break;
        }
        window[iter % 10] = k;
        filled += 1;
        if k < best_k {
            best_k = k;
            best_x = x.clone();
            best_y = y.clone();
        }
    }
    if k > best_k {
        // The non-monotone search ended above its best visit; report
        // the best point with the gradient norm measured there.
        let (_, bgx, bgy) = plane_curvature_gradient(t, &best_x, &best_y);
        let s00 = dot(&best_x, &bgx);
        let s11 = dot(&best_y, &bgy);
        let s01 = 0.5 * (dot(&best_x, &bgy) + dot(&best_y, &bgx));
        let mut pg_sq = 0.0;
        for p in 0..best_x.len() {
            let vx = bgx[p] - s00 * best_x[p] - s01 * best_y[p];
            let vy = bgy[p] - s01 * best_x[p] - s11 * best_y[p];
            pg_sq += vx * vx + vy * vy;
        }
        let best_norm = pg_sq.sqrt();
        return DescentRun {
            k: best_k,
            x: best_x,
            y: best_y,
            grad_norm: best_norm,
            converged: best_norm <= grad_tol.max(1e-6),
        };
    }
    DescentRun {
        k,
        x,
        y,
        grad_norm,
        converged,
    }
}

fn coords_to_plane(sub: &SubmanifoldPoint, arena: &Arena, x: &[f64], y: &[f64]) -> Result<PlaneSection> {
    let q = arena.tensor.n();
    let xv = nalgebra::DVector::from_column_slice(&x[..q]);
    let yv = nalgebra::DVector::from_column_slice(&y[..q]);
    let tx = &arena.basis * xv;
    let ty = &arena.basis * yv;
    let ax = sub.tangent_frame().from_coords(&tx);
    let ay = sub.tangent_frame().from_coords(&ty);
    PlaneSection::new(ax, ay)
}

/// Minimum sectional curvature over the requested plane domain, by
/// multi-start projected-gradient descent. Deterministic in
/// `opts.seed`; ties between restarts keep the first minimum found.
pub fn min_sectional(
    sub: &SubmanifoldPoint,
    domain: Domain,
    opts: &DeltaOptions,
) -> Result<MinSectional> {
    let ar = arena(sub, domain)?;
    let q = ar.tensor.n();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<DescentRun> = None;
    let restarts = opts.restarts.max(1);
    for _ in 0..restarts {
        let (x0, y0) = loop {
            let a = gaussian_vector(&mut rng, q);
            let b = gaussian_vector(&mut rng, q);
            if let Some(pair) = retract(a.as_slice(), b.as_slice()) {
                break pair;
            }
        };
        let run = descend(&ar.tensor, x0, y0, opts.max_iters, opts.grad_tol);
        let better = match &best {
            None => true,
            Some(b) => run.k < b.k,
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    let plane = coords_to_plane(sub, &ar, &run.x, &run.y)?;
    Ok(MinSectional {
        min_k: run.k,
        plane,
        converged: run.converged,
        restarts_used: restarts,
        grad_norm: run.grad_norm,
    })
}

/// Minimum sectional curvature by explicit grid over the plane
/// Grassmannian, then one refinement descent from the best sample.
///
/// Charts: a 2-dimensional domain has a single plane; dimension 3 uses
/// the hemisphere of unit plane-normals; dimension 4 uses the
/// two-sphere pair chart of decomposable unit bivectors. Higher
/// dimensions (and grids whose sample count exceeds `cap`) are
/// refused with a budget error estimating res^(2(q-2)) samples.
pub fn brute_force_min_sectional(
    sub: &SubmanifoldPoint,
    domain: Domain,
    resolution: usize,
    cap: u64,
) -> Result<BruteForceOutcome> {
    let ar = arena(sub, domain)?;
    let q = ar.tensor.n();
    let res = resolution.max(1);
    let estimated: u64 = (res as u64).saturating_pow(2 * (q.max(2) as u32 - 2));
    if q > 4 || estimated > cap {
        return Err(KmuError::Budget {
            estimated: if q > 4 { u64::MAX } else { estimated },
            cap,
        });
    }

    let mut best_k = f64::INFINITY;
    let mut best_xy: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut samples: u64 = 0;
    let mut consider = |k: f64, x: Vec<f64>, y: Vec<f64>, samples: &mut u64| {
        *samples += 1;
        if k < best_k {
            best_k = k;
            best_xy = Some((x, y));
        }
    };

    match q {
        2 => {
            let x = vec![1.0, 0.0];
            let y = vec![0.0, 1.0];
            let (k, _, _) = plane_curvature_gradient(&ar.tensor, &x, &y);
            consider(k, x, y, &mut samples);
        }
        3 => {
            // Planes in R^3 are graded by their unit normal, up to
            // sign: a hemisphere of normals covers everything.
            for i in 0..res {
                let z = (i as f64 + 0.5) / res as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                for j in 0..res {
                    let az = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / res as f64;
                    let nrm = [rho * az.cos(), rho * az.sin(), z];
                    // Orthonormal basis of the normal's complement.
                    let seed = if nrm[0].abs() <= nrm[1].abs().min(nrm[2].abs()) {
                        [1.0, 0.0, 0.0]
                    } else if nrm[1].abs() <= nrm[2].abs() {
                        [0.0, 1.0, 0.0]
                    } else {
                        [0.0, 0.0, 1.0]
                    };
                    let x = cross3(&nrm, &seed);
                    let xn = dot(&x, &x).sqrt();
                    let x: Vec<f64> = x.iter().map(|v| v / xn).collect();
                    let y = cross3(&nrm, &[x[0], x[1], x[2]]);
                    let (k, _, _) = plane_curvature_gradient(&ar.tensor, &x, &y);
                    consider(k, x, y, &mut samples);
                }
            }
        }
        4 => {
            // Decomposable unit bivectors in R^4 are pairs of unit
            // vectors (u, v) on two 2-spheres, up to a joint sign.
            let sphere: Vec<[f64; 3]> = {
                let mut pts = Vec::with_capacity(res * res);
                for i in 0..res {
                    let z = -1.0 + (2.0 * i as f64 + 1.0) / res as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    for j in 0..res {
                        let az = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / res as f64;
                        pts.push([rho * az.cos(), rho * az.sin(), z]);
                    }
                }
                pts
            };
            for u in &sphere {
                for v in &sphere {
                    if let Some((x, y)) = bivector_plane(u, v) {
                        let (k, _, _) = plane_curvature_gradient(&ar.tensor, &x, &y);
                        consider(k, x, y, &mut samples);
                    }
                }
            }
        }
        _ => unreachable!("budget check rejects q outside 2..=4"),
    }

    let (bx, by) = best_xy.ok_or(KmuError::Domain(
        "grid search produced no valid sample".to_string(),
    ))?;
    // One descent pass from the best grid point tightens the estimate
    // to optimizer accuracy. Armijo only ever accepts decreases, so
    // the refined value cannot be worse than the sample it started at.
    let refined = descend(&ar.tensor, bx, by, 500, 1e-10);
    let plane = coords_to_plane(sub, &ar, &refined.x, &refined.y)?;
    Ok(BruteForceOutcome {
        min_k: refined.k.min(best_k),
        plane,
        samples,
    })
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Plane spanned by the rank-2 image of the antisymmetric matrix with
/// the bivector coordinates of (u, v).
fn bivector_plane(u: &[f64; 3], v: &[f64; 3]) -> Option<(Vec<f64>, Vec<f64>)> {
    let c01 = 0.5 * (u[0] + v[0]);
    let c23 = 0.5 * (u[0] - v[0]);
    let c02 = 0.5 * (u[1] + v[1]);
    let c13 = -0.5 * (u[1] - v[1]);
    let c03 = 0.5 * (u[2] + v[2]);
    let c12 = 0.5 * (u[2] - v[2]);
    let omega = [
        [0.0, c01, c02, c03],
        [-c01, 0.0, c12, c13],
        [-c02, -c12, 0.0, c23],
        [-c03, -c13, -c23, 0.0],
    ];
    // Strongest column first.
    let norms: Vec<f64> = (0..4)
        .map(|c| (0..4).map(|r| omega[r][c] * omega[r][c]).sum::<f64>())
        .collect();
    let c0 = (0..4).max_by(|&a, &b| norms[a].total_cmp(&norms[b]))?;
    if norms[c0] < 1e-16 {
        return None;
    }
    let n0 = norms[c0].sqrt();
    let x: Vec<f64> = (0..4).map(|r| omega[r][c0] / n0).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for c in 0..4 {
        if c == c0 {
            continue;
        }
        let col: Vec<f64> = (0..4).map(|r| omega[r][c]).collect();
        let proj = dot(&col, &x);
        let resid: Vec<f64> = col.iter().zip(&x).map(|(v, u)| v - proj * u).collect();
        let rn = dot(&resid, &resid);
        if best.as_ref().map_or(true, |(b, _)| rn > *b) {
            best = Some((rn, resid));
        }
    }
    let (rn, resid) = best?;
    if rn < 1e-16 {
        return None;
    }
    let rs = rn.sqrt();
    let y: Vec<f64> = resid.iter().map(|v| v / rs).collect();
    Some((x, y))
}

/// The delta invariant tau - min K over the requested domain.
pub fn delta(sub: &SubmanifoldPoint, domain: Domain, opts: &DeltaOptions) -> Result<DeltaResult> {
    let tau = scalar_curvature(sub)?;
    let min = min_sectional(sub, domain, opts)?;
    let oracle_min_k = match opts.oracle_resolution {
        None => None,
        Some(res) => {
            Some(brute_force_min_sectional(sub, domain, res, opts.sample_cap)?.min_k)
        }
    };
    Ok(DeltaResult {
        value: tau - min.min_k,
        min_k: min.min_k,
        minimizing_plane: min.plane,
        oracle_min_k,
        restarts_used: min.restarts_used,
        converged: min.converged,
    })
}
