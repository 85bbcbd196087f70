use anyhow::Context;
use hopc::descriptor::{DescriptorGeometry, FeatureParams};
use hopc::eval::{DEFAULT_CMR_THRESHOLD, DEFAULT_TEMPLATE_SIZES};
use hopc::phasecong::{FilterBankParams, PCParams};
use hopc::pipeline::{InterestPointConfig, RefineConfig, RegisterConfig};
use hopc::similarity::{MatchConfig, MetricKind};
use hopc::synth::SyntheticParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSection {
    pub metric: MetricKind,
    pub template: usize,
    pub search_radius: usize,
    pub mi_bins: usize,
}

impl Default for MatchingSection {
    fn default() -> Self {
        let m = MatchConfig::default();
        Self {
            metric: m.metric,
            template: m.template,
            search_radius: m.search_radius,
            mi_bins: m.mi_bins,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegisterSection {
    pub bidirectional_tolerance: f64,
    /// Overrides `interest.points_per_block` for registration runs.
    pub points_per_block: usize,
}

impl Default for RegisterSection {
    fn default() -> Self {
        let r = RegisterConfig::default();
        Self {
            bidirectional_tolerance: r.bidirectional_tolerance,
            points_per_block: r.interest.points_per_block,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub threshold: f64,
    pub sizes: Vec<usize>,
    pub metrics: Vec<MetricKind>,
    pub bench_points: usize,
    pub bench_templates: Vec<usize>,
    pub bench_radii: Vec<usize>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_CMR_THRESHOLD,
            sizes: DEFAULT_TEMPLATE_SIZES.to_vec(),
            metrics: MetricKind::ALL.to_vec(),
            bench_points: 200,
            bench_templates: vec![36, 68, 100],
            bench_radii: vec![10],
        }
    }
}

/// Every tunable of the tool, one section per module.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bank: FilterBankParams,
    pub pc: PCParams,
    pub descriptor: DescriptorGeometry,
    pub matching: MatchingSection,
    pub interest: InterestPointConfig,
    pub refine: RefineConfig,
    pub register: RegisterSection,
    pub synth: SyntheticParams,
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> hopc::Result<()> {
        self.match_config().validate()?;
        self.register_config().validate()?;
        self.synth.validate()?;
        Ok(())
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            metric: self.matching.metric,
            template: self.matching.template,
            search_radius: self.matching.search_radius,
            mi_bins: self.matching.mi_bins,
            geometry: self.descriptor,
            features: FeatureParams {
                bank: self.bank,
                pc: self.pc,
            },
        }
    }

    pub fn register_config(&self) -> RegisterConfig {
        RegisterConfig {
            interest: InterestPointConfig {
                points_per_block: self.register.points_per_block,
                ..self.interest
            },
            matching: self.match_config(),
            refine: self.refine,
            bidirectional_tolerance: self.register.bidirectional_tolerance,
        }
    }
}
