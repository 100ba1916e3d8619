//! Sectioned TOML run configuration. Unknown keys and sections an experiment
//! does not use are both rejected.

use serde::{Deserialize, Serialize};

use crate::criticality::{linspace, logspace};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Omitted when the experiment sweeps N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default = "one")]
    pub epsilon: f64,
    pub jx: f64,
    pub jy: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub bx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub tau_f: f64,
    pub t_arrival: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorberSection {
    pub delta_pp: f64,
    pub gamma_fg: f64,
    pub gamma_he: f64,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Bx,
    Jx,
    NQubits,
    DeltaPp,
    Gamma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.lo, self.hi, self.points),
            Spacing::Log => logspace(self.lo, self.hi, self.points),
        }
    }

    /// Values rounded to the nearest integer, for qubit-number sweeps.
    pub fn integer_values(&self) -> Vec<usize> {
        self.values().into_iter().map(|v| v.round() as usize).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.points == 0 || !(self.lo <= self.hi) {
            return Err(Error::Config(format!("sweep over {:?} is empty", self.variable)));
        }
        if self.spacing == Spacing::Log && !(self.lo > 0.0) {
            return Err(Error::Config(format!("log sweep over {:?} needs lo > 0", self.variable)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    #[serde(default)]
    pub emit_svg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber: Option<AbsorberSection>,
    /// One table per swept variable.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Section {
    Model,
    Coupling,
    Pulse,
    Absorber,
    Integration,
}

/// Sections and sweep variables one experiment consumes.
#[derive(Clone, Copy, Debug)]
pub struct Requirements {
    pub sections: &'static [Section],
    pub sweeps: &'static [SweepVariable],
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sweep(&self, variable: SweepVariable) -> Result<&SweepSection> {
        self.sweep
            .iter()
            .find(|s| s.variable == variable)
            .ok_or_else(|| Error::Config(format!("missing sweep over {variable:?}")))
    }

    pub fn model(&self) -> Result<&ModelSection> {
        self.model.as_ref().ok_or_else(|| missing("model"))
    }

    pub fn coupling(&self) -> Result<&CouplingSection> {
        self.coupling.as_ref().ok_or_else(|| missing("coupling"))
    }

    pub fn pulse(&self) -> Result<&PulseSection> {
        self.pulse.as_ref().ok_or_else(|| missing("pulse"))
    }

    pub fn absorber(&self) -> Result<&AbsorberSection> {
        self.absorber.as_ref().ok_or_else(|| missing("absorber"))
    }

    pub fn integration(&self) -> Result<&IntegrationSection> {
        self.integration.as_ref().ok_or_else(|| missing("integration"))
    }

    /// Every required section present, nothing extra, sweeps exactly as
    /// listed and each well-formed.
    pub fn check_against(&self, req: &Requirements) -> Result<()> {
        let present = [
            (Section::Model, self.model.is_some(), "model"),
            (Section::Coupling, self.coupling.is_some(), "coupling"),
            (Section::Pulse, self.pulse.is_some(), "pulse"),
            (Section::Absorber, self.absorber.is_some(), "absorber"),
            (Section::Integration, self.integration.is_some(), "integration"),
        ];
        for (section, is_present, name) in present {
            let wanted = req.sections.contains(&section);
            if wanted && !is_present {
                return Err(missing(name));
            }
            if !wanted && is_present {
                return Err(Error::Config(format!(
                    "section [{name}] is not used by {}",
                    self.experiment
                )));
            }
        }
        for s in &self.sweep {
            if !req.sweeps.contains(&s.variable) {
                return Err(Error::Config(format!(
                    "sweep over {:?} is not used by {}",
                    s.variable, self.experiment
                )));
            }
            if self.sweep.iter().filter(|o| o.variable == s.variable).count() > 1 {
                return Err(Error::Config(format!("duplicate sweep over {:?}", s.variable)));
            }
            s.validate()?;
        }
        for v in req.sweeps {
            self.sweep(*v)?;
        }
        if let Some(i) = &self.integration {
            if !(i.dt > 0.0 && i.t_end > i.t_start && i.sample_every >= 1) {
                return Err(Error::Config(format!("invalid [integration] {i:?}")));
            }
        }
        Ok(())
    }
}

fn missing(name: &str) -> Error {
    Error::Config(format!("missing section [{name}]"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
experiment = "fig5_correlation_gap"

[model]
n_qubits = 1000
jx = 0.7
jy = 0.7

[[sweep]]
variable = "bx"
lo = 1e-6
hi = 1e-2
points = 5
spacing = "log"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(TEXT).unwrap();
        assert_eq!(cfg.model().unwrap().epsilon, 1.0);
        assert_eq!(cfg.sweep(SweepVariable::Bx).unwrap().values().len(), 5);
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = TEXT.replace("jy = 0.7", "jy = 0.7\njz = 0.1");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad = format!("{TEXT}\n[extras]\nfoo = 1\n");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn requirement_checks() {
        let cfg = ExperimentConfig::from_toml(TEXT).unwrap();
        let ok = Requirements {
            sections: &[Section::Model],
            sweeps: &[SweepVariable::Bx],
        };
        cfg.check_against(&ok).unwrap();
        let needs_pulse = Requirements {
            sections: &[Section::Model, Section::Pulse],
            sweeps: &[SweepVariable::Bx],
        };
        assert!(cfg.check_against(&needs_pulse).is_err());
        let no_model = Requirements {
            sections: &[],
            sweeps: &[SweepVariable::Bx],
        };
        assert!(cfg.check_against(&no_model).is_err());
        let other_sweep = Requirements {
            sections: &[Section::Model],
            sweeps: &[SweepVariable::Bx, SweepVariable::NQubits],
        };
        assert!(cfg.check_against(&other_sweep).is_err());
    }

    #[test]
    fn integer_sweep_values() {
        let s = SweepSection {
            variable: SweepVariable::NQubits,
            lo: 100.0,
            hi: 400.0,
            points: 3,
            spacing: Spacing::Log,
        };
        assert_eq!(s.integer_values(), vec![100, 200, 400]);
    }
}
