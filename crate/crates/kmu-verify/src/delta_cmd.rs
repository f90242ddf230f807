//! `delta` subcommand: runs the plane-minimum optimizer, optionally
//! against the grid oracle, and prints the result.

use kmu_geometry::{delta, DeltaOptions, Domain, KmuError, SubmanifoldPoint};
use serde::Serialize;

use crate::checks::{EXIT_PASS, EXIT_VIOLATION};

pub struct DeltaConfig {
    pub seed: u64,
    pub restarts: usize,
    pub grid_resolution: usize,
    pub domain: Domain,
}

#[derive(Serialize)]
pub struct DeltaReport {
    pub value: f64,
    pub min_k: f64,
    pub converged: bool,
    pub restarts: usize,
    pub minimizing_plane: [Vec<f64>; 2],
    pub oracle_min_k: Option<f64>,
    pub oracle_agrees: Option<bool>,
}

/// On failure carries the exit code to use: budget exhaustion is a
/// violation (1), anything else is invalid input (2).
pub fn run_delta(
    sub: &SubmanifoldPoint,
    cfg: &DeltaConfig,
) -> Result<(DeltaReport, i32), (i32, String)> {
    let opts = DeltaOptions {
        restarts: cfg.restarts.max(1),
        seed: cfg.seed,
        oracle_resolution: (cfg.grid_resolution > 0).then_some(cfg.grid_resolution),
        ..DeltaOptions::default()
    };
    match delta(sub, cfg.domain, &opts) {
        Ok(d) => {
            let oracle_agrees = d.oracle_min_k.map(|o| (o - d.min_k).abs() < 1e-4);
            let exit = if oracle_agrees == Some(false) {
                EXIT_VIOLATION
            } else {
                EXIT_PASS
            };
            let report = DeltaReport {
                value: d.value,
                min_k: d.min_k,
                converged: d.converged,
                restarts: d.restarts_used,
                minimizing_plane: [
                    d.minimizing_plane.e1().iter().copied().collect(),
                    d.minimizing_plane.e2().iter().copied().collect(),
                ],
                oracle_min_k: d.oracle_min_k,
                oracle_agrees,
            };
            Ok((report, exit))
        }
        Err(KmuError::Budget { estimated, cap }) => Err((
            EXIT_VIOLATION,
            format!(
                "grid budget exceeded: estimated {estimated} samples against cap {cap}; \
                 lower --grid-resolution"
            ),
        )),
        Err(e) => Err((2, format!("delta computation failed: {e}"))),
    }
}

pub fn render_text(r: &DeltaReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("delta      {:.12}\n", r.value));
    out.push_str(&format!("min_K      {:.12}\n", r.min_k));
    out.push_str(&format!(
        "optimizer  converged={} restarts={}\n",
        r.converged, r.restarts
    ));
    out.push_str(&format!("plane e1   {:?}\n", r.minimizing_plane[0]));
    out.push_str(&format!("plane e2   {:?}\n", r.minimizing_plane[1]));
    if let Some(o) = r.oracle_min_k {
        out.push_str(&format!(
            "oracle     min_K={:.12} agrees={}\n",
            o,
            r.oracle_agrees.unwrap_or(false)
        ));
    }
    out
}
