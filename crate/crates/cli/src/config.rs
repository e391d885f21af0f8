use crate::Usage;
use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;
use ultraflat::extension::SectorSpec;
use ultraflat::indices::{RESOLUTION, R_MAX, R_MIN};
use ultraflat::quadrature::QuadratureConfig;

pub const SCHEMA: &str = "v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl From<&QuadratureConfig<f64>> for Tolerances {
    fn from(q: &QuadratureConfig<f64>) -> Self {
        Self { rel_tol: q.rel_tol, abs_tol: q.abs_tol, max_subdivisions: q.max_subdivisions }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorGrid {
    pub gamma: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub radii: usize,
    pub args: usize,
}

impl SectorGrid {
    pub fn spec(&self) -> ultraflat::Result<SectorSpec> {
        SectorSpec::new(self.gamma, self.r_lo, self.r_hi, self.radii, self.args)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    /// Bisection range and resolution of the index estimators.
    pub index_r: [f64; 3],
    /// Named sample grids on sectors or rays.
    pub sectors: BTreeMap<String, SectorGrid>,
    pub rays: BTreeMap<String, Vec<f64>>,
}

impl Default for Grids {
    fn default() -> Self {
        Self { index_r: [R_MIN, R_MAX, RESOLUTION], sectors: BTreeMap::new(), rays: BTreeMap::new() }
    }
}

/// Everything that determines a run's output. Two runs with equal configs
/// write byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub horizon: usize,
    pub quadrature: Tolerances,
    pub grids: Grids,
    pub inputs: BTreeMap<String, Value>,
    /// Where reports go; not part of the hash.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn new(command: &str, horizon: usize, out_dir: PathBuf) -> Self {
        Self {
            command: command.into(),
            horizon,
            quadrature: Tolerances::from(&QuadratureConfig::default()),
            grids: Grids::default(),
            inputs: BTreeMap::new(),
            out_dir,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.inputs.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.quadrature;
        if !(q.rel_tol > 0.0 && q.abs_tol > 0.0 && q.max_subdivisions > 0) {
            return Err(Usage("tolerances must be positive".into()).into());
        }
        if self.horizon < 4 {
            return Err(Usage("the horizon must be at least 4".into()).into());
        }
        for (name, g) in &self.grids.sectors {
            if g.radii == 0 || g.args == 0 || !(g.r_lo > 0.0 && g.r_hi >= g.r_lo) {
                return Err(Usage(format!("sector grid {name} is empty")).into());
            }
        }
        for (name, ray) in &self.grids.rays {
            if ray.is_empty() {
                return Err(Usage(format!("ray {name} is empty")).into());
            }
        }
        Ok(())
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("run config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
