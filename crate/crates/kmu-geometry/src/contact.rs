//! Pointwise contact metric structures with (kappa, mu)-nullity data.
//!
//! A structure is the tensor tuple (phi, xi, h) in g-orthonormal
//! coordinates plus the scalars (kappa, mu, c). The dual eta is the
//! covector `<., xi>`, so it never needs separate storage. Validation
//! is axiomatic: each algebraic identity becomes one named max-abs
//! residual, and a structure is valid when every residual clears the
//! caller's tolerance.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{max_abs_mat, max_abs_vec};
use crate::error::{KmuError, Result};

/// Ambient structure tensors and scalars at a point.
///
/// Fields are private so that a constructed value always has coherent
/// shapes (`phi`, `h` are d x d, `xi` has length d, d = 2m+1). Validity
/// of the algebraic axioms is a separate, tolerance-based question
/// answered by [`validate_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct KMuStructure {
    m: usize,
    kappa: f64,
    mu: f64,
    c: f64,
    phi: DMatrix<f64>,
    xi: DVector<f64>,
    h: DMatrix<f64>,
}

impl KMuStructure {
    /// Assembles a structure from explicit tensors. Only shapes are
    /// checked here; algebraic validity is the job of
    /// [`validate_structure`].
    pub fn from_parts(
        m: usize,
        kappa: f64,
        mu: f64,
        c: f64,
        phi: DMatrix<f64>,
        xi: DVector<f64>,
        h: DMatrix<f64>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(KmuError::Domain(
                "ambient dimension 2m+1 requires m >= 1".into(),
            ));
        }
        let d = 2 * m + 1;
        for (name, rows, cols) in [
            ("phi", phi.nrows(), phi.ncols()),
            ("h", h.nrows(), h.ncols()),
        ] {
            if rows != d || cols != d {
                let _ = name;
                return Err(KmuError::Dimension {
                    context: "structure tensor must be d x d with d = 2m+1",
                    expected: d,
                    actual: if rows != d { rows } else { cols },
                });
            }
        }
        if xi.len() != d {
            return Err(KmuError::Dimension {
                context: "xi must be an ambient vector of length 2m+1",
                expected: d,
                actual: xi.len(),
            });
        }
        Ok(KMuStructure {
            m,
            kappa,
            mu,
            c,
            phi,
            xi,
            h,
        })
    }

    /// Block-diagonal model structure on the basis
    /// {u_1..u_m, phi u_1..phi u_m, xi}: phi sends u_i to phi u_i and
    /// phi u_i to -u_i, h is +lambda on the first block and -lambda on
    /// the second with lambda = sqrt(1-kappa).
    ///
    /// For kappa < 1 the scalars are forced: c = -2 kappa - 1 and
    /// mu = kappa + 1. For kappa = 1 the operator h vanishes, c is the
    /// free parameter `c_sasakian`, and mu is stored as 0 (it never
    /// enters any formula once h = 0).
    pub fn canonical(m: usize, kappa: f64, c_sasakian: Option<f64>) -> Result<Self> {
        if m == 0 {
            return Err(KmuError::Domain(
                "ambient dimension 2m+1 requires m >= 1".into(),
            ));
        }
        if kappa > 1.0 {
            return Err(KmuError::Domain(format!(
                "kappa must satisfy kappa <= 1, got {kappa}"
            )));
        }
        let d = 2 * m + 1;
        let mut phi = DMatrix::zeros(d, d);
        for i in 0..m {
            phi[(m + i, i)] = 1.0;
            phi[(i, m + i)] = -1.0;
        }
        let mut xi = DVector::zeros(d);
        xi[2 * m] = 1.0;

        let (mu, c, h) = if kappa == 1.0 {
            let c = c_sasakian.ok_or(KmuError::MissingParameter(
                "c_sasakian is required when kappa = 1",
            ))?;
            (0.0, c, DMatrix::zeros(d, d))
        } else {
            if c_sasakian.is_some() {
                return Err(KmuError::Domain(
                    "c_sasakian only applies when kappa = 1; it is forced to -2*kappa - 1 otherwise"
                        .into(),
                ));
            }
            let lambda = (1.0 - kappa).sqrt();
            let mut h = DMatrix::zeros(d, d);
            for i in 0..m {
                h[(i, i)] = lambda;
                h[(m + i, m + i)] = -lambda;
            }
            (kappa + 1.0, -2.0 * kappa - 1.0, h)
        };

        Ok(KMuStructure {
            m,
            kappa,
            mu,
            c,
            phi,
            xi,
            h,
        })
    }

    /// Ambient dimension d = 2m + 1.
    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The phi-sectional curvature scalar.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn xi(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// eta(x) = <x, xi>.
    pub fn eta(&self, x: &DVector<f64>) -> f64 {
        self.xi.dot(x)
    }

    /// sqrt(1 - kappa), clamped to 0 in the kappa = 1 case.
    pub fn lambda(&self) -> f64 {
        (1.0 - self.kappa).max(0.0).sqrt()
    }

    /// Whether this is the kappa = 1 regime (h = 0, free c). The flag
    /// is exact on purpose: kappa values merely near 1 describe a
    /// genuinely different structure and must not be rounded.
    pub fn is_sasakian(&self) -> bool {
        self.kappa == 1.0
    }
}

/// One named axiom deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub name: &'static str,
    pub residual: f64,
}

impl ResidualEntry {
    pub fn new(name: &'static str, residual: f64) -> Self {
        ResidualEntry { name, residual }
    }
}

/// Outcome of a validation sweep: every residual, plus the tolerance
/// it was judged against.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    entries: Vec<ResidualEntry>,
    tol: f64,
}

impl ValidationReport {
    pub(crate) fn new(entries: Vec<ResidualEntry>, tol: f64) -> Self {
        ValidationReport { entries, tol }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.residual <= self.tol)
    }

    pub fn entries(&self) -> &[ResidualEntry] {
        &self.entries
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.residual))
    }

    /// Residual looked up by name; None when the entry does not apply
    /// to this structure (for instance the kappa-mu constraint of a
    /// Sasakian input).
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.residual)
    }

    pub fn failing(&self) -> Vec<&ResidualEntry> {
        self.entries
            .iter()
            .filter(|e| e.residual > self.tol)
            .collect()
    }
}

/// Evaluates every structure axiom as a named max-abs residual.
///
/// Entries, in order: the almost contact identities (phi_squared,
/// xi_unit, phi_xi, eta_phi), metric compatibility, antisymmetry of
/// phi, the h identities (symmetry, h xi = 0, anticommutation with
/// phi, both trace conditions, h^2 = (kappa-1) phi^2), the kappa <= 1
/// bound, and the regime-specific scalar constraints: h = 0 when
/// kappa = 1, or c = -2 kappa - 1 and mu = kappa + 1 when kappa < 1.
pub fn validate_structure(s: &KMuStructure, tol: f64) -> ValidationReport {
    let d = s.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let xi_eta = s.xi() * s.xi().transpose();
    let phi = s.phi();
    let h = s.h();

    let mut entries = Vec::with_capacity(16);
    let mut push = |name: &'static str, residual: f64| {
        entries.push(ResidualEntry { name, residual });
    };

    push("phi_squared", max_abs_mat(&(phi * phi - (-&id + &xi_eta))));
    push("xi_unit", (s.xi().dot(s.xi()) - 1.0).abs());
    push("phi_xi", max_abs_vec(&(phi * s.xi())));
    push("eta_phi", max_abs_vec(&(phi.transpose() * s.xi())));
    push(
        "compatibility",
        max_abs_mat(&(phi.transpose() * phi - (&id - &xi_eta))),
    );
    push("phi_antisymmetry", max_abs_mat(&(phi.transpose() + phi)));
    push("h_symmetry", max_abs_mat(&(h.transpose() - h)));
    push("h_xi", max_abs_vec(&(h * s.xi())));
    push("h_phi_anticommute", max_abs_mat(&(h * phi + phi * h)));
    push("h_trace", h.trace().abs());
    push("phi_h_trace", (phi * h).trace().abs());
    push(
        "h_squared",
        max_abs_mat(&(h * h - (s.kappa() - 1.0) * (phi * phi))),
    );
    push("kappa_bound", (s.kappa() - 1.0).max(0.0));
    if s.is_sasakian() {
        push("sasakian_h", max_abs_mat(h));
    } else {
        push("c_constraint", (s.c() + 2.0 * s.kappa() + 1.0).abs());
        push("kappa_mu_constraint", (s.kappa() - s.mu() + 1.0).abs());
    }

    ValidationReport::new(entries, tol)
}
