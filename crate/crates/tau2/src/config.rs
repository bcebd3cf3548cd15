//! JSON model configurations. Complex numbers are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tau2_core::{BoundaryParams, ModelConfig, SiteParams, C64};

use crate::error::CliError;
use crate::suites::CHECK_NAMES;

pub type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn cplx(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteJson {
    pub d_plus: Pair,
    pub d_minus: Pair,
    pub f_plus: Pair,
    pub f_minus: Pair,
    pub g_plus: Pair,
    pub g_minus: Pair,
    pub h_plus: Pair,
    pub h_minus: Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryJson {
    pub alpha_minus: Pair,
    pub beta_minus: Pair,
    pub theta_minus: Pair,
    pub alpha_plus: Pair,
    pub beta_plus: Pair,
    pub theta_plus: Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub sites: Vec<SiteJson>,
    pub boundary: BoundaryJson,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Check name to tolerance, replacing the default for that check.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

impl ConfigFile {
    pub fn from_model(cfg: &ModelConfig, seed: Option<u64>) -> Self {
        let sites = cfg
            .sites()
            .iter()
            .map(|s| SiteJson {
                d_plus: pair(s.d_plus),
                d_minus: pair(s.d_minus),
                f_plus: pair(s.f_plus),
                f_minus: pair(s.f_minus),
                g_plus: pair(s.g_plus),
                g_minus: pair(s.g_minus),
                h_plus: pair(s.h_plus),
                h_minus: pair(s.h_minus),
            })
            .collect();
        let b = cfg.boundary();
        Self {
            p: cfg.p(),
            n: cfg.n_sites(),
            sites,
            boundary: BoundaryJson {
                alpha_minus: pair(b.alpha_minus),
                beta_minus: pair(b.beta_minus),
                theta_minus: pair(b.theta_minus),
                alpha_plus: pair(b.alpha_plus),
                beta_plus: pair(b.beta_plus),
                theta_plus: pair(b.theta_plus),
            },
            seed,
            tolerances: BTreeMap::new(),
        }
    }

    /// Seeded random instance.
    pub fn generate(seed: u64, p: usize, n: usize) -> Result<Self, CliError> {
        Ok(Self::from_model(&ModelConfig::generate(p, n, seed)?, Some(seed)))
    }

    pub fn to_model(&self) -> Result<ModelConfig, CliError> {
        for (name, t) in &self.tolerances {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(CliError::Input(format!("unknown check {name:?} in tolerances")));
            }
            if !(t.is_finite() && *t > 0.0) {
                return Err(CliError::Input(format!("tolerance for {name} must be positive, got {t}")));
            }
        }
        if self.sites.len() != self.n {
            return Err(CliError::Input(format!("N = {} but {} site blocks given", self.n, self.sites.len())));
        }
        let sites = self
            .sites
            .iter()
            .map(|s| SiteParams {
                d_plus: cplx(s.d_plus),
                d_minus: cplx(s.d_minus),
                f_plus: cplx(s.f_plus),
                f_minus: cplx(s.f_minus),
                g_plus: cplx(s.g_plus),
                g_minus: cplx(s.g_minus),
                h_plus: cplx(s.h_plus),
                h_minus: cplx(s.h_minus),
            })
            .collect();
        let b = &self.boundary;
        let boundary = BoundaryParams {
            alpha_minus: cplx(b.alpha_minus),
            beta_minus: cplx(b.beta_minus),
            theta_minus: cplx(b.theta_minus),
            alpha_plus: cplx(b.alpha_plus),
            beta_plus: cplx(b.beta_plus),
            theta_plus: cplx(b.theta_plus),
        };
        Ok(ModelConfig::new(self.p, sites, boundary)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the canonical compact JSON, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let f = ConfigFile::generate(4, 3, 2).unwrap();
        let back = ConfigFile::parse(&f.to_json()).unwrap();
        assert_eq!(f, back);
        let m = back.to_model().unwrap();
        assert_eq!(m, ModelConfig::generate(3, 2, 4).unwrap());
    }

    #[test]
    fn rejects_site_count_mismatch() {
        let mut f = ConfigFile::generate(4, 3, 2).unwrap();
        f.n = 3;
        assert!(matches!(f.to_model(), Err(CliError::Input(_))));
    }

    #[test]
    fn rejects_broken_constraint() {
        let mut f = ConfigFile::generate(4, 3, 1).unwrap();
        f.sites[0].h_plus[0] += 0.1;
        assert!(matches!(f.to_model(), Err(CliError::Model(_))));
    }
}
