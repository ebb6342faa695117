//! Parameter sets and their validation.
//!
//! All frequencies and rates share one angular-frequency unit picked by the
//! caller. The conventional choice, used by every preset, is `g_a = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Carrier separation (in units of `g_a`) above which the two mode spectra
/// are treated as independent.
pub const SEPARABILITY_RATIO: f64 = 10.0;

/// Physical rates and frequencies of one two-mode simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Coupling of the electronic transition to mode `a`.
    pub g_a: f64,
    /// Coupling of the Raman-assisted transition to mode `b`.
    #[serde(default)]
    pub g_b: f64,
    /// Signed detuning from exact Raman resonance.
    #[serde(default)]
    pub delta_omega: f64,
    /// Atomic decay rate.
    #[serde(default)]
    pub gamma: f64,
    /// Cavity damping rate, shared by both modes.
    #[serde(default)]
    pub kappa: f64,
    /// Carrier of mode `a`; only used as a spectral origin.
    #[serde(default)]
    pub omega_a: f64,
    /// Carrier of mode `b`; only used as a spectral origin.
    #[serde(default)]
    pub omega_b: f64,
}

impl SystemParams {
    /// Parameters with both carriers at zero, i.e. spectra on a detuning axis.
    pub fn new(g_a: f64, g_b: f64, delta_omega: f64, gamma: f64, kappa: f64) -> Self {
        Self {
            g_a,
            g_b,
            delta_omega,
            gamma,
            kappa,
            omega_a: 0.0,
            omega_b: 0.0,
        }
    }

    pub fn with_carriers(self, omega_a: f64, omega_b: f64) -> Self {
        Self {
            omega_a,
            omega_b,
            ..self
        }
    }

    pub fn with_delta_omega(self, delta_omega: f64) -> Self {
        Self {
            delta_omega,
            ..self
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma == 0.0 && self.kappa == 0.0
    }

    pub fn is_spectrally_separable(&self) -> bool {
        self.omega_a - self.omega_b > SEPARABILITY_RATIO * self.g_a
    }

    /// Flat `key = value` document with one line per field.
    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat struct of floats always serializes")
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParams(e.message().to_string()))
    }
}

/// Parameters of the one-mode reference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleModeParams {
    pub g_a: f64,
    /// Cavity-atom detuning `omega_a - omega_21`.
    #[serde(default)]
    pub delta_omega_a: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub kappa: f64,
}

impl SingleModeParams {
    pub fn new(g_a: f64, delta_omega_a: f64, gamma: f64, kappa: f64) -> Self {
        Self {
            g_a,
            delta_omega_a,
            gamma,
            kappa,
        }
    }

    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat struct of floats always serializes")
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParams(e.message().to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

/// Itemized outcome of a validation pass. Errors make a parameter set
/// unusable; warnings flag violated modelling assumptions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    /// `None` for single-mode parameter sets, which carry no carriers.
    pub separable: Option<bool>,
}

impl ValidationReport {
    fn error(&mut self, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Error,
            message: message.into(),
        });
    }

    fn warn(&mut self, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            message: message.into(),
        });
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &str> {
        self.by_severity(Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.by_severity(Severity::Warning)
    }

    fn by_severity(&self, severity: Severity) -> impl Iterator<Item = &str> {
        self.issues
            .iter()
            .filter(move |i| i.severity == severity)
            .map(|i| i.message.as_str())
    }

    /// Collapses the report into an error carrying every rejection reason.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                self.errors().collect::<Vec<_>>().join("; "),
            ))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            let tag = match issue.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            write!(f, "{tag}: {}", issue.message)?;
        }
        Ok(())
    }
}

fn check_finite(report: &mut ValidationReport, fields: &[(&str, f64)]) {
    for (name, value) in fields {
        if !value.is_finite() {
            report.error(format!("{name} must be finite"));
        }
    }
}

fn check_rates(report: &mut ValidationReport, g_a: f64, gamma: f64, kappa: f64) {
    if !(g_a > 0.0) {
        report.error("g_a must be positive");
    }
    if gamma < 0.0 {
        report.error("gamma must be non-negative");
    }
    if kappa < 0.0 {
        report.error("kappa must be non-negative");
    }
}

pub fn validate(params: &SystemParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let p = params;
    check_finite(
        &mut report,
        &[
            ("g_a", p.g_a),
            ("g_b", p.g_b),
            ("delta_omega", p.delta_omega),
            ("gamma", p.gamma),
            ("kappa", p.kappa),
            ("omega_a", p.omega_a),
            ("omega_b", p.omega_b),
        ],
    );
    check_rates(&mut report, p.g_a, p.gamma, p.kappa);
    if p.g_b < 0.0 {
        report.error("g_b must be non-negative");
    }
    if p.g_b >= p.g_a && p.g_a > 0.0 {
        report.warn("weak-coupling assumption g_b<<g_a not satisfied");
    }
    let separable = p.is_spectrally_separable();
    if !separable {
        report.warn(format!(
            "mode spectra overlap: omega_a - omega_b = {} is not above {}*g_a",
            p.omega_a - p.omega_b,
            SEPARABILITY_RATIO
        ));
    }
    report.separable = Some(separable);
    report
}

pub fn validate_single_mode(params: &SingleModeParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let p = params;
    check_finite(
        &mut report,
        &[
            ("g_a", p.g_a),
            ("delta_omega_a", p.delta_omega_a),
            ("gamma", p.gamma),
            ("kappa", p.kappa),
        ],
    );
    check_rates(&mut report, p.g_a, p.gamma, p.kappa);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4() -> SystemParams {
        SystemParams::new(1.0, 0.1, 1.0, 0.05, 0.07).with_carriers(100.0, 50.0)
    }

    #[test]
    fn fig4_parameters_are_valid_and_separable() {
        let report = validate(&fig4());
        assert!(report.is_valid());
        assert_eq!(report.separable, Some(true));
        assert_eq!(report.warnings().count(), 0, "{report}");
    }

    #[test]
    fn zero_g_a_is_rejected() {
        let report = validate(&SystemParams { g_a: 0.0, ..fig4() });
        assert!(!report.is_valid());
        assert!(report.errors().any(|m| m == "g_a must be positive"));
    }

    #[test]
    fn negative_rates_are_rejected() {
        for p in [
            SystemParams {
                gamma: -0.1,
                ..fig4()
            },
            SystemParams {
                kappa: -0.1,
                ..fig4()
            },
            SystemParams {
                g_b: -0.1,
                ..fig4()
            },
        ] {
            assert!(!validate(&p).is_valid());
        }
        assert!(!validate_single_mode(&SingleModeParams::new(1.0, 0.0, -1.0, 0.0)).is_valid());
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let report = validate(&SystemParams {
            delta_omega: f64::NAN,
            ..fig4()
        });
        assert!(report.errors().any(|m| m.contains("delta_omega")));
    }

    #[test]
    fn strong_raman_coupling_only_warns() {
        let report = validate(&SystemParams { g_b: 0.5, ..fig4() }.with_delta_omega(0.0));
        assert!(report.is_valid());
        let report = validate(&SystemParams { g_b: 1.0, ..fig4() });
        assert!(report.is_valid());
        assert!(report
            .warnings()
            .any(|m| m == "weak-coupling assumption g_b<<g_a not satisfied"));
    }

    #[test]
    fn overlapping_carriers_only_warn() {
        let report = validate(&SystemParams::new(1.0, 0.1, 0.0, 0.05, 0.07));
        assert!(report.is_valid());
        assert_eq!(report.separable, Some(false));
        assert_eq!(report.warnings().count(), 1);
    }

    #[test]
    fn validate_is_idempotent() {
        let p = SystemParams { g_b: 2.0, ..fig4() };
        assert_eq!(validate(&p), validate(&p));
    }

    #[test]
    fn kv_document_round_trips() {
        let p = fig4();
        let text = p.to_kv_string();
        assert!(text.contains("g_a = 1.0"));
        assert_eq!(SystemParams::from_kv_str(&text).unwrap(), p);
    }

    #[test]
    fn kv_document_requires_g_a() {
        let err = SystemParams::from_kv_str("g_b = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("g_a"), "{err}");
    }

    #[test]
    fn kv_document_rejects_unknown_fields() {
        assert!(SystemParams::from_kv_str("g_a = 1.0\ng_c = 2.0\n").is_err());
    }
}
