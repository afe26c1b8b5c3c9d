//! The experiment configuration document read by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, TermEntry, WeightDescriptor};
use crate::cocycles::{Cocycle, CocycleDescriptor, DEFAULT_SEED};
use crate::codec::ElementFile;
use crate::error::{Error, Result};
use crate::groups::{enumerate, GroupDescriptor, GroupElement, LengthKind, Region};
use crate::multipliers::{DefinitenessOptions, MultiplierDescriptor};
use crate::operators::{ContentOptions, SolverOptions};
use crate::summation::FolnerNet;

/// One JSON document. Only `group` is always required; each subcommand
/// checks for the fields it uses.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<CocycleDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSource>,
    /// Ball or compression radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Radius schedule for `norm`, ball radii for `growth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub content: ContentSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<MultiplierDescriptor>,
    #[serde(default)]
    pub definiteness: DefinitenessOptions,
    /// Schoenberg parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<f64>>,
    /// Net schedule: `n` for Fejér, `r` for Abel and Gauss, `t` for Poly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<LengthKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folner: Option<FolnerNet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightDescriptor>,
    #[serde(default)]
    pub sampler: SamplerConfig,
    /// Worker threads; `TWF_THREADS` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: OutputPaths,
}

/// Inline terms or an element file. Relative paths are resolved against
/// the directory of the configuration file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Certified ℓ¹ norm of whatever was truncated away.
    #[serde(default)]
    pub tail_l1: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSource {
    Words(Vec<String>),
    Region(Region),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentSettings {
    pub restarts: usize,
    pub stagnation: f64,
    pub max_rounds: usize,
}

impl Default for ContentSettings {
    fn default() -> Self {
        let d = ContentOptions::default();
        ContentSettings {
            restarts: d.restarts,
            stagnation: d.stagnation,
            max_rounds: d.max_rounds,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub count: usize,
    /// Samples are supported in `Ball(radius)`.
    pub radius: u64,
    pub max_terms: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            count: 100,
            radius: 3,
            max_terms: 8,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

/// A loaded configuration and the directory it came from.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn missing(field: &str) -> Error {
        Error::InvalidArgument(format!("configuration needs `{field}`"))
    }

    pub fn radius(&self) -> Result<f64> {
        self.config.radius.ok_or_else(|| Self::missing("radius"))
    }

    /// A radius used as a whole number, e.g. for triple enumeration.
    pub fn integer_radius(&self) -> Result<u64> {
        let r = self.radius()?;
        if r >= 0.0 && r.fract() == 0.0 && r < 1e15 {
            Ok(r as u64)
        } else {
            Err(Error::InvalidArgument(format!("radius {r} must be a whole number")))
        }
    }

    /// The cocycle, reconciled with the one stored in an element file.
    pub fn cocycle(&self, from_file: Option<&CocycleDescriptor>) -> Result<Cocycle> {
        let desc = match (&self.config.cocycle, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidArgument(
                    "the configured cocycle differs from the element file's".into(),
                ))
            }
            (Some(a), _) | (None, Some(a)) => a.clone(),
            (None, None) => CocycleDescriptor::Trivial,
        };
        Cocycle::new(&self.config.group, &desc)
    }

    /// The element, its cocycle and the declared tail bound.
    pub fn element(&self) -> Result<(AlgebraElement, Cocycle, f64)> {
        let src = self.config.element.as_ref().ok_or_else(|| Self::missing("element"))?;
        let group = self.config.group;
        let (file, tail) = match (&src.terms, &src.file) {
            (Some(terms), None) => (
                ElementFile {
                    group,
                    cocycle: self.config.cocycle.clone().unwrap_or(CocycleDescriptor::Trivial),
                    terms: terms.clone(),
                },
                src.tail_l1,
            ),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(self.resolve(path))?;
                let file: ElementFile = serde_json::from_str(&text)?;
                if file.group != group {
                    return Err(Error::GroupMismatch {
                        left: group,
                        right: file.group,
                    });
                }
                (file, src.tail_l1)
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "element needs exactly one of `terms` and `file`".into(),
                ))
            }
        };
        if !(tail.is_finite() && tail >= 0.0) {
            return Err(Error::InvalidArgument(format!("tail_l1 = {tail} must be ≥ 0")));
        }
        let sigma = self.cocycle(Some(&file.cocycle))?;
        let (f, _) = file.decode()?;
        Ok((f, sigma, tail))
    }

    pub fn set(&self) -> Result<Vec<GroupElement>> {
        let group = &self.config.group;
        match self.config.set.as_ref().ok_or_else(|| Self::missing("set"))? {
            SetSource::Words(words) => words.iter().map(|w| group.parse(w)).collect(),
            SetSource::Region(region) => Ok(enumerate(group, *region)?.elements().to_vec()),
        }
    }

    pub fn multiplier(&self) -> Result<&MultiplierDescriptor> {
        self.config.multiplier.as_ref().ok_or_else(|| Self::missing("multiplier"))
    }

    pub fn weight(&self) -> Result<&WeightDescriptor> {
        self.config.weight.as_ref().ok_or_else(|| Self::missing("weight"))
    }

    pub fn radii(&self) -> Result<&[f64]> {
        self.config.radii.as_deref().ok_or_else(|| Self::missing("radii"))
    }

    pub fn content_options(&self) -> ContentOptions {
        let c = &self.config.content;
        ContentOptions {
            restarts: c.restarts,
            stagnation: c.stagnation,
            max_rounds: c.max_rounds,
            solver: self.config.solver.clone(),
        }
    }
}
