//! Sweep configuration, read from TOML.
//!
//! ```toml
//! m = [50, 100]
//! ell = 3
//! model = "binomial"
//! trials = 100
//! seed = 7
//! epsilon = 0.01
//! threads = 4
//!
//! [grid]
//! scaled = [{ c = 0.05, a = 0.0 }, { c = 20.0, a = 1.0 }]
//!
//! [analyses]
//! fa = false
//!
//! [budgets]
//! fa_max_m = 22
//! search_nodes = 10000000
//! ```
//!
//! The grid holds exactly one of `p` (probabilities), `scaled`
//! (`p = c (ln m)^a m^(1 - ell)`) or `density` (`p = m^(ell (d - 1))`; the
//! uniform-count model takes the density directly).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fa::DEFAULT_EPSILON;
use crate::model::Parameter;
use crate::presentation::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledPoint {
    pub c: f64,
    #[serde(default)]
    pub a: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled: Option<Vec<ScaledPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f64>>,
}

impl GridSpec {
    /// `(grid coordinate, model parameter)` pairs for generator count `m`.
    pub fn values(&self, m: u32, ell: u32) -> Result<Vec<(f64, Parameter)>> {
        match (&self.p, &self.scaled, &self.density) {
            (Some(ps), None, None) => Ok(ps.iter().map(|&p| (p, Parameter::Probability(p))).collect()),
            (None, Some(cs), None) => {
                let mf = f64::from(m);
                Ok(cs
                    .iter()
                    .map(|s| {
                        let p = s.c * mf.ln().powf(s.a) * mf.powf(1.0 - f64::from(ell));
                        (s.c, Parameter::Probability(p))
                    })
                    .collect())
            }
            (None, None, Some(ds)) => Ok(ds.iter().map(|&d| (d, Parameter::Density(d))).collect()),
            _ => Err(Error::Config(
                "grid must set exactly one of p, scaled, density".into(),
            )),
        }
    }

    fn len(&self) -> usize {
        self.p.as_ref().map_or(0, Vec::len)
            + self.scaled.as_ref().map_or(0, Vec::len)
            + self.density.as_ref().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub diagnostics: bool,
    pub freeness: bool,
    pub surjection: bool,
    /// The exact (L) and (SL) searches.
    pub fa: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses {
            diagnostics: true,
            freeness: true,
            surjection: true,
            fa: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// (L) and (SL) are skipped above this many generators.
    pub fa_max_m: u32,
    pub search_nodes: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            fa_max_m: 22,
            search_nodes: 10_000_000,
        }
    }
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub m: Vec<u32>,
    pub ell: u32,
    pub model: ModelKind,
    pub grid: GridSpec,
    pub trials: u32,
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub budgets: Budgets,
    /// Worker count; all cores when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.m.is_empty() {
            return Err(Error::Config("m list is empty".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon {} is not in (0, 1)", self.epsilon)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.model == ModelKind::Given {
            return Err(Error::Config("the given model cannot be sampled".into()));
        }
        if self.grid.len() > 0 && self.model == ModelKind::UniformCount && self.grid.density.is_none() {
            return Err(Error::Config("uniform_count sweeps need a density grid".into()));
        }
        for &m in &self.m {
            for (_, param) in self.grid.values(m, self.ell)? {
                let ok = match param {
                    Parameter::Probability(p) => (0.0..=1.0).contains(&p),
                    Parameter::Density(d) => d > 0.0 && d < 1.0,
                };
                if !ok {
                    return Err(Error::Config(format!("grid value {param:?} out of range for m = {m}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
m = [100]
ell = 3
model = "binomial"
trials = 10
seed = 1

[grid]
scaled = [{ c = 0.05 }, { c = 20.0, a = 1.0 }]
"#;

    #[test]
    fn parse_and_defaults() {
        let cfg = SweepConfig::from_toml(BASIC).unwrap();
        assert_eq!(cfg.epsilon, 0.01);
        assert_eq!(cfg.analyses, Analyses::default());
        assert_eq!(cfg.budgets.fa_max_m, 22);
        let v = cfg.grid.values(100, 3).unwrap();
        match v[1].1 {
            Parameter::Probability(p) => assert!((p - 20.0 * 100f64.ln() / 1e4).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let back = SweepConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = BASIC.replace("trials = 10", "trials = 0");
        assert!(SweepConfig::from_toml(&bad).is_err());
        let bad = BASIC.replace("scaled = [{ c = 0.05 }, { c = 20.0, a = 1.0 }]", "p = [1.5]");
        assert!(SweepConfig::from_toml(&bad).is_err());
        let bad = format!("{BASIC}\np = [0.1]\n");
        assert!(SweepConfig::from_toml(&bad).is_err());
        let bad = BASIC.replace("seed = 1", "seed = 1\nbogus = 2");
        assert!(SweepConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn empty_grid_is_allowed() {
        let cfg = SweepConfig::from_toml(&BASIC.replace(
            "scaled = [{ c = 0.05 }, { c = 20.0, a = 1.0 }]",
            "p = []",
        ))
        .unwrap();
        assert!(cfg.grid.values(100, 3).unwrap().is_empty());
    }
}
