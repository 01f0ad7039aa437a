//! Experiment configuration, read from JSON.

use crate::HarnessError;
use conecount_core::expsums::CongruenceData;
use conecount_core::lattice::{WeightFunction, WeightKind};
use conecount_core::QuadraticForm;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Hlwo,
    Tamagawa,
    Bias,
    ObstructionScan,
    Identities,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hlwo => "hlwo",
            Self::Tamagawa => "tamagawa",
            Self::Bias => "bias",
            Self::ObstructionScan => "obstruction-scan",
            Self::Identities => "identities",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub kind: WeightKind,
    #[serde(default)]
    pub symmetric: bool,
    /// Real component of the cone to restrict to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Accepted |ratio − 1| at the largest B.
    pub ratio_window: f64,
    /// Accepted relative error of the bias ratio at the largest B.
    pub bias_window: f64,
    /// Requested accuracy of the singular series.
    pub series: f64,
    /// Points per axis of the surface quadrature.
    pub leray_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ratio_window: 0.15, bias_window: 0.2, series: 1e-3, leray_grid: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Gram upper triangle a00 a01 a02 a03 a11 a12 a13 a22 a23 a33.
    pub form: [i64; 10],
    #[serde(rename = "L")]
    pub l: u64,
    pub gamma: [i64; 4],
    #[serde(rename = "B_schedule")]
    pub b_schedule: Vec<f64>,
    pub weight: WeightSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_p_max")]
    pub p_max: u64,
    #[serde(default)]
    pub seed: u64,
    pub kind: ExperimentKind,
}

fn default_p_max() -> u64 {
    2000
}

fn field(name: &str, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config { field: name.to_string(), message: msg.into() }
}

/// Parsed objects built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub form: QuadraticForm,
    pub class: CongruenceData,
    pub weight: WeightFunction,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| field("<json>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| field("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Check every field and build the form, class and weight.
    pub fn validate(&self) -> Result<Setup, HarnessError> {
        let form = QuadraticForm::from_upper_triangle(self.form).map_err(|e| field("form", e.to_string()))?;
        if self.l < 1 {
            return Err(field("L", "must be at least 1"));
        }
        let class = CongruenceData::new(&form, self.l, self.gamma).map_err(|e| field("gamma", e.to_string()))?;
        if self.b_schedule.is_empty() {
            return Err(field("B_schedule", "must not be empty"));
        }
        if self.b_schedule.iter().any(|&b| !(b >= 1.0 && b.is_finite())) {
            return Err(field("B_schedule", "entries must be finite and at least 1"));
        }
        if self.b_schedule.windows(2).any(|p| p[1] <= p[0]) {
            return Err(field("B_schedule", "must be strictly increasing"));
        }
        if self.p_max < 2 {
            return Err(field("p_max", "must be at least 2"));
        }
        let t = &self.tolerances;
        if !(t.ratio_window > 0.0 && t.bias_window > 0.0 && t.series > 0.0) || t.leray_grid < 4 {
            return Err(field("tolerances", "windows must be positive and leray_grid at least 4"));
        }
        let mut weight = WeightFunction::new(self.weight.kind.clone(), self.weight.symmetric)
            .map_err(|e| field("weight", e.to_string()))?;
        if let Some(c) = self.weight.component {
            weight = weight
                .on_component(&form.real_components(), c)
                .map_err(|e| field("weight.component", e.to_string()))?;
        }
        match self.kind {
            ExperimentKind::Hlwo | ExperimentKind::Bias | ExperimentKind::ObstructionScan
                if self.weight.component.is_none() =>
            {
                return Err(field("weight.component", format!("required for {}", self.kind.name())));
            }
            ExperimentKind::Tamagawa if !self.weight.symmetric => {
                return Err(field("weight.symmetric", "tamagawa needs an x -> -x symmetric weight"));
            }
            ExperimentKind::Bias | ExperimentKind::ObstructionScan if self.l % form.conductor() != 0 => {
                return Err(field("L", format!("must be divisible by the conductor {}", form.conductor())));
            }
            _ => {}
        }
        Ok(Setup { form, class, weight })
    }
}
