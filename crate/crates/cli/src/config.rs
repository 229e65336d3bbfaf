// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use rbfid::noise::{ChannelSpec, NoiseModel};
use serde::{Deserialize, Serialize};

/// Run configuration. Every section is optional; a missing `[model]` means the
/// subcommand's default model.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<NoiseModel>,
    #[serde(default)]
    pub curve: CurveSection,
    #[serde(default)]
    pub correct: CorrectSection,
    #[serde(default)]
    pub rb: RbSection,
    #[serde(default)]
    pub figures: FigureSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSection {
    pub max_depth: usize,
    /// Monte-Carlo samples per depth; exact curves only when absent.
    pub samples: Option<usize>,
}

impl Default for CurveSection {
    fn default() -> Self {
        CurveSection { max_depth: 64, samples: None }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrectSection {
    pub max_depth: usize,
}

impl Default for CorrectSection {
    fn default() -> Self {
        CorrectSection { max_depth: 128 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbSection {
    pub depths: Vec<usize>,
    pub sequences: usize,
    pub resamples: usize,
    /// Channels applied after state preparation / before measurement.
    pub prep_noise: Vec<ChannelSpec>,
    pub meas_noise: Vec<ChannelSpec>,
}

impl Default for RbSection {
    fn default() -> Self {
        RbSection {
            depths: (0..8).map(|k| 1 << k).collect(),
            sequences: 200,
            resamples: 200,
            prep_noise: Vec::new(),
            meas_noise: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureSection {
    pub delta_depth: usize,
    pub pbloch_depth: usize,
    pub fit_min: usize,
    pub fit_max: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
}

impl Default for FigureSection {
    fn default() -> Self {
        FigureSection {
            delta_depth: 64,
            pbloch_depth: 40,
            fit_min: 5,
            fit_max: 10,
            theta_min: 0.0,
            theta_max: 0.3,
            theta_steps: 31,
        }
    }
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}
