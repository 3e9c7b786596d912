use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::config::PredictConfig;
use crate::event::Section;
use crate::regress::LinearModel;

/// Meta key under which every published model carries its registry version.
pub const VERSION_KEY: &str = "registry_version";

/// Which model set serves an article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionGroup {
    News,
    Other,
}

impl SectionGroup {
    pub const ALL: [SectionGroup; 2] = [SectionGroup::News, SectionGroup::Other];

    pub fn of(section: Section, cfg: &PredictConfig) -> SectionGroup {
        if cfg.news_sections.contains(&section) {
            SectionGroup::News
        } else {
            SectionGroup::Other
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SectionGroup::News => "news",
            SectionGroup::Other => "other",
        }
    }
}

impl fmt::Display for SectionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a group's models were trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub articles: usize,
    /// FNV-1a over the sorted article ids.
    pub digest: String,
    pub trained_at: DateTime<Utc>,
}

impl TrainingSet {
    pub fn describe<'a>(ids: impl IntoIterator<Item = &'a str>, trained_at: DateTime<Utc>) -> Self {
        let mut ids: Vec<&str> = ids.into_iter().collect();
        ids.sort_unstable();
        let mut h: u64 = 0xcbf29ce484222325;
        for id in &ids {
            for b in id.bytes().chain(std::iter::once(0)) {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        TrainingSet {
            articles: ids.len(),
            digest: format!("{h:016x}"),
            trained_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModels {
    pub horizons: BTreeMap<u32, LinearModel>,
    pub training: TrainingSet,
}

/// One immutable generation of models. Readers hold an `Arc` to a whole
/// registry, so a lookup can never combine models from two generations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelRegistry {
    pub version: u64,
    pub last_retrain: Option<DateTime<Utc>>,
    pub target_minutes: u32,
    pub groups: BTreeMap<SectionGroup, GroupModels>,
}

impl ModelRegistry {
    pub fn empty(target_minutes: u32) -> Self {
        ModelRegistry {
            target_minutes,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn model(&self, group: SectionGroup, horizon: u32) -> Option<&LinearModel> {
        self.groups.get(&group)?.horizons.get(&horizon)
    }

    /// Copies this registry into generation `version`, restamping every model.
    pub fn successor(&self, groups: BTreeMap<SectionGroup, GroupModels>, last_retrain: DateTime<Utc>) -> Self {
        let version = self.version + 1;
        let mut groups = groups;
        for g in groups.values_mut() {
            for m in g.horizons.values_mut() {
                m.meta.insert(VERSION_KEY.into(), version.to_string());
            }
        }
        ModelRegistry {
            version,
            last_retrain: Some(last_retrain),
            target_minutes: self.target_minutes,
            groups,
        }
    }

    /// True when every model carries this registry's version stamp.
    pub fn is_consistent(&self) -> bool {
        let v = self.version.to_string();
        self.groups
            .values()
            .flat_map(|g| g.horizons.values())
            .all(|m| m.meta.get(VERSION_KEY) == Some(&v))
    }
}

#[derive(Serialize, Deserialize)]
struct RegistryIndex {
    version: u64,
    last_retrain: Option<DateTime<Utc>>,
    target_minutes: u32,
    groups: BTreeMap<SectionGroup, IndexedGroup>,
}

#[derive(Serialize, Deserialize)]
struct IndexedGroup {
    training: TrainingSet,
    /// Horizon in minutes to model file name.
    models: BTreeMap<u32, String>,
}

impl ModelRegistry {
    /// Writes `registry.json` plus one flat model file per group and horizon.
    pub fn save_dir(&self, dir: impl AsRef<std::path::Path>) -> crate::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut groups = BTreeMap::new();
        for (g, gm) in &self.groups {
            let mut models = BTreeMap::new();
            for (h, m) in &gm.horizons {
                let name = format!("{g}_{h}.model");
                m.save(dir.join(&name))?;
                models.insert(*h, name);
            }
            groups.insert(
                *g,
                IndexedGroup {
                    training: gm.training.clone(),
                    models,
                },
            );
        }
        let index = RegistryIndex {
            version: self.version,
            last_retrain: self.last_retrain,
            target_minutes: self.target_minutes,
            groups,
        };
        std::fs::write(dir.join("registry.json"), serde_json::to_string_pretty(&index)?)?;
        Ok(())
    }

    pub fn load_dir(dir: impl AsRef<std::path::Path>) -> crate::Result<Self> {
        let dir = dir.as_ref();
        let index: RegistryIndex = serde_json::from_str(&std::fs::read_to_string(dir.join("registry.json"))?)?;
        let mut groups = BTreeMap::new();
        for (g, ig) in index.groups {
            let mut horizons = BTreeMap::new();
            for (h, name) in ig.models {
                horizons.insert(h, LinearModel::load(dir.join(name))?);
            }
            groups.insert(
                g,
                GroupModels {
                    horizons,
                    training: ig.training,
                },
            );
        }
        Ok(ModelRegistry {
            version: index.version,
            last_retrain: index.last_retrain,
            target_minutes: index.target_minutes,
            groups,
        })
    }
}

/// Shared handle through which the current registry is published and read.
#[derive(Debug, Default)]
pub struct RegistryHandle {
    current: RwLock<Arc<ModelRegistry>>,
}

impl RegistryHandle {
    pub fn new(registry: ModelRegistry) -> Self {
        RegistryHandle {
            current: RwLock::new(Arc::new(registry)),
        }
    }

    pub fn current(&self) -> Arc<ModelRegistry> {
        self.current.read().clone()
    }

    pub fn publish(&self, registry: ModelRegistry) {
        *self.current.write() = Arc::new(registry);
    }
}
