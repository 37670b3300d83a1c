//! Structured pass/fail reports for data-compatibility checks.
//!
//! Every checker in this crate returns a [`ConditionReport`]: one entry per
//! checked condition, each carrying a human-readable anchor describing *what*
//! was checked, the measured residual, the threshold it was compared against,
//! and the verdict. Solvers refuse incompatible data by returning the report
//! alongside the error, so callers (and the CLI) can print exactly which
//! condition failed and by how much.

/// Outcome of a single checked condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    /// Short stable identifier, e.g. `"interface-velocity-jump"`.
    pub name: String,
    /// Human-readable description of the condition that was checked; never
    /// empty.
    pub anchor: String,
    /// Measured residual magnitude (discrete norm of the defect).
    pub residual: f64,
    /// Threshold the residual was compared against.
    pub threshold: f64,
    /// `residual <= threshold`.
    pub passed: bool,
}

impl ConditionEntry {
    pub fn new(name: &str, anchor: &str, residual: f64, threshold: f64) -> Self {
        assert!(!anchor.is_empty(), "condition anchors must be non-empty");
        ConditionEntry {
            name: name.to_string(),
            anchor: anchor.to_string(),
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }
}

/// A full compatibility report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    /// The data-magnitude scale the default thresholds were derived from.
    pub data_scale: f64,
}

impl ConditionReport {
    pub fn new(data_scale: f64) -> Self {
        ConditionReport {
            entries: Vec::new(),
            data_scale,
        }
    }

    /// Records a condition.
    pub fn push(&mut self, name: &str, anchor: &str, residual: f64, threshold: f64) {
        self.entries
            .push(ConditionEntry::new(name, anchor, residual, threshold));
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| !e.passed)
    }

    /// Failed entry names, for compact error messages.
    pub fn failed_names(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.passed)
            .map(|e| e.name.as_str())
            .collect()
    }

    /// Entry by name.
    pub fn entry(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Deterministic CSV rendering (`name,anchor,residual,threshold,passed`),
    /// one row per entry, in insertion order. Floats use the shortest
    /// round-trip formatting, which is platform-independent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,anchor,residual,threshold,passed\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_quote(&e.name),
                csv_quote(&e.anchor),
                e.residual,
                e.threshold,
                e.passed
            ));
        }
        out
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Default compatibility threshold: `10 (dx + dt)` scaled by the data
/// magnitude (floored at one so homogeneous data keep a usable threshold).
///
/// Discrete traces of smooth compatible data miss their continuum identities
/// by discretization error; the prefactor 10 gives smooth data comfortable
/// headroom at the resolutions this crate targets while still rejecting O(1)
/// violations.
pub fn default_threshold(dx: f64, dt: f64, data_scale: f64) -> f64 {
    10.0 * (dx + dt) * data_scale.max(1.0)
}
