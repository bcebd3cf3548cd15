//! Verification reports.

use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Whether a check bounds its residual from above or from below.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    #[default]
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The identity being checked, in words.
    pub anchor: String,
    /// `null` in JSON when no residual could be computed.
    #[serde(with = "nan_as_null")]
    pub residual: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub bound: Bound,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// A residual check; NaN never passes.
    pub fn new(name: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            bound: Bound::Upper,
            pass: residual <= tolerance,
            note: None,
        }
    }

    /// A lower-bound check: passes when `residual` exceeds `threshold`.
    pub fn at_least(name: &str, anchor: &str, residual: f64, threshold: f64) -> Self {
        Self { pass: residual > threshold, bound: Bound::Lower, ..Self::new(name, anchor, residual, threshold) }
    }

    /// A check that could not produce a residual.
    pub fn failed(name: &str, anchor: &str, tolerance: f64, why: String) -> Self {
        Self { residual: f64::NAN, pass: false, note: Some(why), ..Self::new(name, anchor, f64::NAN, tolerance) }
    }

    /// Combines two results of the same check, keeping the worse one.
    pub fn worse(self, other: Check) -> Check {
        if self.pass != other.pass {
            return if self.pass { other } else { self };
        }
        if self.residual.is_nan() {
            return self;
        }
        if other.residual.is_nan() {
            return other;
        }
        let other_worse = match self.bound {
            Bound::Upper => other.residual > self.residual,
            Bound::Lower => other.residual < self.residual,
        };
        if other_worse {
            other
        } else {
            self
        }
    }

    /// Re-judges the residual against `tol`. A missing residual keeps its
    /// verdict.
    pub fn with_tolerance(mut self, tol: f64) -> Check {
        if !self.residual.is_nan() {
            self.pass = match self.bound {
                Bound::Upper => self.residual <= tol,
                Bound::Lower => self.residual > tol,
            };
        }
        self.tolerance = tol;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config_digest: String,
    pub seed: u64,
    pub level: String,
    pub tol_scale: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub timing: Vec<Phase>,
}

impl RunReport {
    pub fn new(config_digest: String, seed: u64, level: &str, tol_scale: f64) -> Self {
        Self {
            tool: "tau2".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_digest,
            seed,
            level: level.into(),
            tol_scale,
            passed: true,
            checks: Vec::new(),
            timing: Vec::new(),
        }
    }

    /// Runs `f`, records its wall time under `name` and appends its checks.
    pub fn phase(&mut self, name: &str, f: impl FnOnce() -> Vec<Check>) {
        let t = Instant::now();
        let checks = f();
        self.timing.push(Phase { name: name.into(), seconds: t.elapsed().as_secs_f64() });
        self.checks.extend(checks);
    }

    /// Sorts checks by name and sets the overall flag.
    pub fn finish(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.passed = self.checks.iter().all(|c| c.pass);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report with timing removed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self { timing: Vec::new(), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_and_order_is_by_name() {
        let mut r = RunReport::new("x".into(), 1, "all", 1.0);
        r.phase("a", || vec![Check::new("z.one", "", 0.0, 1.0), Check::new("a.two", "", f64::NAN, 1.0)]);
        r.finish();
        assert_eq!(r.checks[0].name, "a.two");
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        assert!(Check::at_least("b", "", 0.5, 1e-2).pass);
        assert!(!Check::at_least("b", "", 1e-3, 1e-2).pass);
        let w = Check::new("c", "", 1e-3, 1.0).worse(Check::new("c", "", 1e-5, 1.0));
        assert_eq!(w.residual, 1e-3);
        let w = Check::at_least("c", "", 0.3, 1e-2).worse(Check::at_least("c", "", 0.9, 1e-2));
        assert_eq!(w.residual, 0.3);
        let w = Check::new("c", "", 1e-3, 1.0).worse(Check::new("c", "", 2.0, 1.0));
        assert!(!w.pass);
    }

    #[test]
    fn json_round_trip() {
        let mut r = RunReport::new("x".into(), 1, "all", 1.0);
        r.phase("a", || vec![Check::new("a", "b", 1e-13, 1e-12).with_note("n")]);
        r.finish();
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let f = Check::failed("x", "y", 1.0, "why".into());
        let back: Check = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert!(back.residual.is_nan() && !back.pass);
    }
}
