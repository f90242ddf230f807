//! Check-report schema: a stable top-level array of uniform items so
//! runs can be diffed by automation, plus a text renderer for humans.

use std::collections::BTreeMap;

use kmu_geometry::{InequalityReport, ValidationReport};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub status: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub gap: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
}

impl CheckItem {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn scalar(name: &str, pass: bool, residuals: BTreeMap<String, f64>) -> Self {
        CheckItem {
            name: name.to_string(),
            status: if pass { "pass" } else { "fail" }.to_string(),
            lhs: None,
            rhs: None,
            gap: None,
            residuals,
        }
    }

    pub fn from_validation(name: &str, report: &ValidationReport) -> Self {
        let residuals = report
            .entries()
            .iter()
            .map(|e| (e.name.to_string(), e.residual))
            .collect();
        CheckItem::scalar(name, report.passed(), residuals)
    }

    pub fn from_inequality(name: &str, report: &InequalityReport, pass: bool) -> Self {
        let mut residuals = report.diagnostics.clone();
        residuals.insert("equality".to_string(), if report.equality { 1.0 } else { 0.0 });
        if let Some(shape) = &report.shape_classification {
            residuals.insert(
                "shape_matched".to_string(),
                if shape.matched { 1.0 } else { 0.0 },
            );
            residuals.insert("shape_residual_a_n1".to_string(), shape.residual_a_n1);
            residuals.insert("shape_residual_a_r".to_string(), shape.residual_a_r);
        }
        CheckItem {
            name: name.to_string(),
            status: if pass { "pass" } else { "fail" }.to_string(),
            lhs: Some(report.lhs),
            rhs: Some(report.rhs),
            gap: Some(report.gap),
            residuals,
        }
    }
}

pub fn render_text(items: &[CheckItem]) -> String {
    let mut out = String::new();
    for item in items {
        let flag = if item.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{flag} {}", item.name));
        if let (Some(lhs), Some(rhs), Some(gap)) = (item.lhs, item.rhs, item.gap) {
            out.push_str(&format!("  lhs={lhs:.12}  rhs={rhs:.12}  gap={gap:.3e}"));
        }
        out.push('\n');
        if !item.passed() || item.lhs.is_none() {
            for (name, value) in &item.residuals {
                out.push_str(&format!("       {name} = {value:.6e}\n"));
            }
        }
    }
    out
}

pub fn render_json(items: &[CheckItem]) -> String {
    serde_json::to_string_pretty(items).expect("report serialization cannot fail")
}
