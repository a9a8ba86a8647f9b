//! Experiment configuration: TOML with units in the key names, validated
//! before any computation.

use std::path::PathBuf;

use serde::Deserialize;

use crate::domain::DomainKind;
use crate::error::{LabError, Result};
use crate::minimax::KlConvention;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub domain: DomainSection,
    pub operator: OperatorSection,
    pub family: Option<FamilySection>,
    pub frame: Option<FrameSection>,
    pub simulation: Option<SimulationSection>,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: String,
    pub extents_length: Vec<f64>,
    pub resolution_cells: usize,
    pub margin_length: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    /// Number of eigenpairs `J`; `0` requests the complete system.
    pub modes_count: usize,
    #[serde(rename = "D_time")]
    pub d_time: f64,
    pub f_min: f64,
    pub kappa_count: usize,
    pub s_smoothness: f64,
}

/// Seeded bump families for the perturbation and stability audits.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    /// Members of the eigenfunction lower-bound and transport-bound audits.
    pub members_count: usize,
    /// Members of the stability probe (per amplitude).
    pub probe_members_count: usize,
    pub amplitude: f64,
    /// Perturbation-identity cases.
    pub cases_count: usize,
    /// Chain-rule audit pairs.
    pub pairs_count: usize,
}

/// Hypothesis families for the minimax audits.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub j_scales: Vec<u32>,
    pub eta: f64,
    pub anisotropy_c: f64,
    pub multiplier: usize,
    pub center_length: [f64; 2],
    pub radius_length: f64,
    pub pairs_count: usize,
    #[serde(rename = "N_samples")]
    pub n_samples: usize,
    pub kl_convention: String,
    #[serde(rename = "pipeline_N_list", default)]
    pub pipeline_n_list: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub diffusivity_constant: f64,
    #[serde(rename = "N_samples")]
    pub n_samples: usize,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub dt_time: f64,
    pub seeds_count: usize,
    pub truncation_count: usize,
    pub histogram_bins: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub golden_path: Option<PathBuf>,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("field `{field}`: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field_error(
            field,
            format!("must be positive and finite (got {v})"),
        ))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn domain_kind(&self) -> Result<DomainKind> {
        self.domain.kind.parse().map_err(|_| {
            field_error(
                "domain.kind",
                format!("unknown domain `{}`", self.domain.kind),
            )
        })
    }

    pub fn kl_convention(&self) -> Result<KlConvention> {
        match self.frame.as_ref().map(|f| f.kl_convention.as_str()) {
            None | Some("display") => Ok(KlConvention::Display),
            Some("definition") => Ok(KlConvention::Definition),
            Some(other) => Err(field_error(
                "frame.kl_convention",
                format!("expected `display` or `definition`, got `{other}`"),
            )),
        }
    }

    /// Checks every field that has a constraint, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let kind = self.domain_kind()?;
        let want = match kind {
            DomainKind::Interval => 2,
            DomainKind::Rectangle => 4,
            DomainKind::Disk => 1,
        };
        if self.domain.extents_length.len() != want {
            return Err(field_error(
                "domain.extents_length",
                format!(
                    "{kind} needs {want} numbers, got {}",
                    self.domain.extents_length.len()
                ),
            ));
        }
        if self.domain.resolution_cells < 16 {
            return Err(field_error(
                "domain.resolution_cells",
                "must be at least 16",
            ));
        }
        positive("domain.margin_length", self.domain.margin_length)?;
        let op = &self.operator;
        positive("operator.D_time", op.d_time)?;
        positive("operator.f_min", op.f_min)?;
        if op.kappa_count == 0 {
            return Err(field_error("operator.kappa_count", "must be at least 1"));
        }
        if op.modes_count == 1 {
            return Err(field_error(
                "operator.modes_count",
                "must be 0 (complete) or at least 2",
            ));
        }
        let d = kind.dim() as f64;
        let s_min = (2.0 * d - 1.0).max(2.0 + d / 2.0);
        if !(op.s_smoothness >= s_min) {
            return Err(field_error(
                "operator.s_smoothness",
                format!(
                    "must satisfy s ≥ max(2d − 1, 2 + d/2) = {s_min} (got {})",
                    op.s_smoothness
                ),
            ));
        }
        if let Some(f) = &self.family {
            for (name, v) in [
                ("family.members_count", f.members_count),
                ("family.probe_members_count", f.probe_members_count),
                ("family.cases_count", f.cases_count),
                ("family.pairs_count", f.pairs_count),
            ] {
                if v == 0 {
                    return Err(field_error(name, "must be positive"));
                }
            }
            positive("family.amplitude", f.amplitude)?;
        }
        if let Some(fr) = &self.frame {
            if fr.j_scales.is_empty() {
                return Err(field_error(
                    "frame.j_scales",
                    "must list at least one scale",
                ));
            }
            positive("frame.eta", fr.eta)?;
            positive("frame.anisotropy_c", fr.anisotropy_c)?;
            positive("frame.radius_length", fr.radius_length)?;
            if fr.multiplier == 0 {
                return Err(field_error("frame.multiplier", "must be positive"));
            }
            if fr.n_samples == 0 {
                return Err(field_error("frame.N_samples", "must be positive"));
            }
            self.kl_convention()?;
        }
        if let Some(sim) = &self.simulation {
            positive("simulation.diffusivity_constant", sim.diffusivity_constant)?;
            positive("simulation.dt_time", sim.dt_time)?;
            if sim.dt_time > op.d_time / 50.0 {
                return Err(field_error(
                    "simulation.dt_time",
                    format!("must not exceed D_time/50 = {}", op.d_time / 50.0),
                ));
            }
            if sim.n_samples < 100 {
                return Err(field_error("simulation.N_samples", "must be at least 100"));
            }
            if sim.n_list.iter().any(|&n| n < 100) {
                return Err(field_error(
                    "simulation.N_list",
                    "every entry must be at least 100",
                ));
            }
            if sim.truncation_count == 0 {
                return Err(field_error(
                    "simulation.truncation_count",
                    "must be at least 1",
                ));
            }
            if sim.histogram_bins < 2 {
                return Err(field_error(
                    "simulation.histogram_bins",
                    "must be at least 2",
                ));
            }
        }
        Ok(())
    }

    pub fn section<'a, T>(
        &self,
        value: &'a Option<T>,
        name: &str,
        subcommand: &str,
    ) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| {
            LabError::Config(format!("section [{name}] is required by `{subcommand}`"))
        })
    }
}
