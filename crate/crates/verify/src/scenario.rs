//! Scenario files.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use oriented_geodesics::tangent::{MAX_STEP, MIN_STEP};
use oriented_geodesics::{Epsilon, SampleGrid, SurfaceSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VerifyError};

/// Verification checks a scenario may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckName {
    #[serde(rename = "hopf_J")]
    HopfJ,
    #[serde(rename = "hopf_Jprime")]
    HopfJprime,
    #[serde(rename = "oracle_agreement")]
    OracleAgreement,
    #[serde(rename = "gbar_null")]
    GbarNull,
    #[serde(rename = "alpha_plane")]
    AlphaPlane,
    #[serde(rename = "h_matrix")]
    HMatrix,
    #[serde(rename = "lemma_roundtrip")]
    LemmaRoundtrip,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::HopfJ => "hopf_J",
            CheckName::HopfJprime => "hopf_Jprime",
            CheckName::OracleAgreement => "oracle_agreement",
            CheckName::GbarNull => "gbar_null",
            CheckName::AlphaPlane => "alpha_plane",
            CheckName::HMatrix => "h_matrix",
            CheckName::LemmaRoundtrip => "lemma_roundtrip",
        }
    }

    pub fn is_hopf(self) -> bool {
        matches!(self, CheckName::HopfJ | CheckName::HopfJprime)
    }

    fn needs_plane(self) -> bool {
        matches!(
            self,
            CheckName::HopfJprime
                | CheckName::GbarNull
                | CheckName::AlphaPlane
                | CheckName::HMatrix
        )
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declared outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Hopf,
    NotHopf,
    Degenerate,
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: CheckName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

impl CheckSpec {
    /// `hopf` for Hopf checks and `pass` for the rest unless declared.
    pub fn expectation(&self) -> Expectation {
        self.expect.unwrap_or(if self.name.is_hopf() {
            Expectation::Hopf
        } else {
            Expectation::Pass
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Hopf residual bound for closed-form samples.
    pub hopf_tol: f64,
    /// Hopf residual bound for finite-difference samples.
    pub hopf_tol_fd: f64,
    pub reject_floor: f64,
    /// Entrywise bound on |A_fd − A_analytic|.
    pub oracle_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hopf_tol: 1e-8,
            hopf_tol_fd: 1e-6,
            reject_floor: 0.01,
            oracle_tol: 1e-6,
        }
    }
}

fn default_step() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub epsilon: Epsilon,
    pub n: usize,
    pub surface: SurfaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SampleGrid>,
    #[serde(default = "default_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub checks: Vec<CheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Reject the run (exit 3) unless Σ is convex on the sample grid.
    #[serde(default)]
    pub require_convex: bool,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| VerifyError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| VerifyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn grid(&self) -> SampleGrid {
        self.grid
            .clone()
            .unwrap_or_else(|| SampleGrid::default_for(self.n))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VerifyError::Scenario(m));
        if self.n < 2 {
            return bad(format!("n = {} is below 2", self.n));
        }
        if self.checks.is_empty() {
            return bad("no checks requested".into());
        }
        let mut seen = BTreeSet::new();
        for c in &self.checks {
            if !seen.insert(c.name) {
                return bad(format!("check {} listed twice", c.name));
            }
            if c.name.needs_plane() && self.n != 2 {
                return bad(format!("check {} requires n = 2", c.name));
            }
            let e = c.expectation();
            let hopf_like = matches!(e, Expectation::Hopf | Expectation::NotHopf);
            if c.name.is_hopf() && matches!(e, Expectation::Pass | Expectation::Fail) {
                return bad(format!(
                    "check {} expects hopf, not_hopf or degenerate",
                    c.name
                ));
            }
            if !c.name.is_hopf() && hopf_like {
                return bad(format!("check {} expects pass, fail or degenerate", c.name));
            }
        }
        let g = self.grid();
        if g.u.len() != self.n || g.theta.len() != self.n - 1 {
            return bad(format!(
                "grid needs {} u counts and {} theta counts",
                self.n,
                self.n - 1
            ));
        }
        if g.u.iter().chain(&g.theta).any(|&k| k < 2) {
            return bad("grid counts must be at least 2".into());
        }
        if !(self.fd_step > MIN_STEP && self.fd_step < MAX_STEP) {
            return bad(format!(
                "fd_step {} outside ({MIN_STEP:e}, {MAX_STEP:e})",
                self.fd_step
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("hopf_tol", t.hopf_tol),
            ("hopf_tol_fd", t.hopf_tol_fd),
            ("reject_floor", t.reject_floor),
            ("oracle_tol", t.oracle_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {name} must be positive"));
            }
        }
        if t.hopf_tol >= t.reject_floor || t.hopf_tol_fd >= t.reject_floor {
            return bad("hopf tolerances must lie below reject_floor".into());
        }
        Ok(())
    }
}
