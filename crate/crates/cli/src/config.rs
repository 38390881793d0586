use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::Vector6;
use relmodes::analytic::SingularityPolicy;
use relmodes::chief::{ChiefOrbit, OrbitConfig};
use relmodes::coords::{g_map, Domain};
use relmodes::dynamics::QnsDiff;
use serde::Deserialize;

/// Input file: the chief orbit at top level plus command-specific sections.
/// Angles are in degrees.
#[derive(Debug, Clone, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub representation: Option<String>,
    #[serde(default)]
    pub policy: PolicyName,
    /// Initial relative state in the chosen representation.
    #[serde(default)]
    pub state: Option<[f64; 6]>,
    /// Initial classical element differences.
    #[serde(default)]
    pub elements: Option<ElementDiffs>,
    /// Modal constants for `reconstruct`.
    #[serde(default)]
    pub constants: Option<[f64; 6]>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub numeric: Option<NumericSection>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    #[default]
    Regularize,
    Reject,
}

impl From<PolicyName> for SingularityPolicy {
    fn from(p: PolicyName) -> Self {
        match p {
            PolicyName::Regularize => SingularityPolicy::Regularize,
            PolicyName::Reject => SingularityPolicy::Reject,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default)]
pub struct ElementDiffs {
    pub da_km: f64,
    pub de: f64,
    pub di_deg: f64,
    pub draan_deg: f64,
    pub dargp_deg: f64,
    pub df_deg: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub x0_km: f64,
    pub y0_km: f64,
    pub xdot0_km_s: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            x0_km: 0.08,
            y0_km: 0.09,
            xdot0_km_s: vec![-2e-5, -1e-5, 0.0, 1e-5, 2e-5],
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    Cw,
    CartesianKeplerian,
    Qns,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct NumericSection {
    pub plant: PlantKind,
    pub samples: usize,
    pub harmonics: usize,
    pub lf_samples: usize,
    pub aperiodicity_threshold: f64,
}

impl Default for NumericSection {
    fn default() -> Self {
        Self {
            plant: PlantKind::CartesianKeplerian,
            samples: 1024,
            harmonics: 32,
            lf_samples: 129,
            aperiodicity_threshold: 1e-8,
        }
    }
}

impl RunConfig {
    pub fn molniya() -> Self {
        Self {
            orbit: OrbitConfig::molniya(),
            representation: None,
            policy: PolicyName::default(),
            state: None,
            elements: None,
            constants: None,
            steps: None,
            sweep: None,
            numeric: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn chief(&self) -> Result<ChiefOrbit> {
        Ok(self.orbit.to_chief()?)
    }

    /// `--rep` wins over the file; Cartesian otherwise.
    pub fn domain(&self, flag: Option<Domain>) -> Result<Domain> {
        match (flag, &self.representation) {
            (Some(d), _) => Ok(d),
            (None, Some(s)) => Ok(s.parse()?),
            (None, None) => Ok(Domain::Cartesian),
        }
    }

    /// Initial state in `domain`, from `state` or `elements`.
    pub fn initial_state(&self, chief: &ChiefOrbit, domain: Domain) -> Result<Option<Vector6<f64>>> {
        match (&self.state, &self.elements) {
            (Some(_), Some(_)) => bail!("give either 'state' or 'elements', not both"),
            (Some(s), None) => {
                let mut x = Vector6::from_column_slice(s);
                for &k in angle_columns(domain) {
                    x[k] = x[k].to_radians();
                }
                Ok(Some(x))
            }
            (None, Some(e)) => {
                let d = QnsDiff::from_classical(
                    chief,
                    e.da_km,
                    e.de,
                    e.di_deg.to_radians(),
                    e.draan_deg.to_radians(),
                    e.dargp_deg.to_radians(),
                    e.df_deg.to_radians(),
                )
                .to_vector();
                Ok(Some(g_map(chief, chief.theta0, domain).entries * d))
            }
            (None, None) => Ok(None),
        }
    }
}

/// Entries of a state vector given in degrees (or deg/s) at the boundary.
pub fn angle_columns(domain: Domain) -> &'static [usize] {
    match domain {
        Domain::Qns => &[1, 2, 5],
        Domain::Cartesian => &[],
        Domain::Spherical => &[1, 2, 4, 5],
    }
}
