//! Planning configuration and the shipped presets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dialog::SourceFormat;
use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::patterns::recipes::RECIPE_ORDER;
use crate::patterns::{PatternEngine, PatternId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanConfig {
    pub targets: BTreeMap<PatternId, usize>,
    pub seed: u64,
    pub max_patterns_per_dialog: usize,
    /// Assignment priority.
    pub pattern_order: Vec<PatternId>,
    /// Optional soft targets for the number of dialogs carrying at least
    /// k = 1, 2, ... patterns.
    pub histogram: Option<Vec<usize>>,
    /// Cap targets at eligibility instead of failing.
    pub allow_shortfall: bool,
}

/// On-disk form: TOML with pattern names as strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    seed: u64,
    max_patterns_per_dialog: Option<usize>,
    #[serde(default)]
    allow_shortfall: bool,
    pattern_order: Option<Vec<String>>,
    #[serde(default)]
    targets: BTreeMap<String, usize>,
    histogram: Option<HistogramFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HistogramFile {
    at_least: Vec<usize>,
}

fn default_order() -> Vec<PatternId> {
    RECIPE_ORDER
        .iter()
        .map(|n| PatternId::from_name(n).expect("recipe names are in the catalog"))
        .collect()
}

fn lookup(name: &str) -> Result<PatternId> {
    PatternId::lookup(name).ok_or_else(|| Error::UnknownPattern(name.to_string()))
}

pub const PRESETS: [&str; 2] = ["smd-table1", "babi-table1"];

/// Seeds are stored as TOML integers, which are signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

impl PlanConfig {
    pub fn new(format: SourceFormat) -> PlanConfig {
        PlanConfig {
            targets: BTreeMap::new(),
            seed: 0,
            max_patterns_per_dialog: default_cap(format),
            pattern_order: default_order(),
            histogram: None,
            allow_shortfall: false,
        }
    }

    /// Published per-pattern targets and overlap histogram for the named corpus.
    pub fn preset(name: &str) -> Result<PlanConfig> {
        let (format, counts, histogram): (_, [usize; 9], Vec<usize>) = match name {
            "smd-table1" => (
                SourceFormat::Smd,
                [64, 0, 23, 35, 24, 6, 139, 151, 100],
                vec![288, 198, 57, 7, 0],
            ),
            "babi-table1" => (
                SourceFormat::Babi,
                [54, 143, 0, 314, 522, 811, 189, 811, 0],
                vec![1000, 981, 843, 375, 4],
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset `{other}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let mut cfg = PlanConfig::new(format);
        for (id, n) in default_order().into_iter().zip(counts) {
            if n > 0 {
                cfg.targets.insert(id, n);
            }
        }
        cfg.histogram = Some(histogram);
        Ok(cfg)
    }

    pub fn preset_for(format: SourceFormat) -> PlanConfig {
        let name = match format {
            SourceFormat::Smd => "smd-table1",
            SourceFormat::Babi => "babi-table1",
        };
        PlanConfig::preset(name).expect("builtin presets parse")
    }

    pub fn from_toml(text: &str, format: SourceFormat) -> Result<PlanConfig> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = PlanConfig::new(format);
        cfg.seed = file.seed;
        cfg.allow_shortfall = file.allow_shortfall;
        if let Some(cap) = file.max_patterns_per_dialog {
            if cap == 0 {
                return Err(Error::Config(
                    "max_patterns_per_dialog must be positive".into(),
                ));
            }
            cfg.max_patterns_per_dialog = cap;
        }
        if let Some(order) = file.pattern_order {
            cfg.pattern_order = order.iter().map(|n| lookup(n)).collect::<Result<_>>()?;
        }
        for (name, n) in file.targets {
            cfg.targets.insert(lookup(&name)?, n);
        }
        cfg.histogram = file.histogram.map(|h| h.at_least);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        let file = ConfigFile {
            seed: self.seed,
            max_patterns_per_dialog: Some(self.max_patterns_per_dialog),
            allow_shortfall: self.allow_shortfall,
            pattern_order: Some(
                self.pattern_order
                    .iter()
                    .map(|p| p.name().to_string())
                    .collect(),
            ),
            targets: self
                .targets
                .iter()
                .map(|(p, n)| (p.name().to_string(), *n))
                .collect(),
            histogram: self
                .histogram
                .clone()
                .map(|at_least| HistogramFile { at_least }),
        };
        toml::to_string(&file).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }

    pub fn total_target(&self) -> usize {
        self.targets.values().sum()
    }

    /// Checks that every nonzero target names a recipe usable on `format`
    /// and that the order covers every targeted pattern.
    pub fn validate(&self, format: SourceFormat, engine: &PatternEngine) -> Result<()> {
        if self.seed > MAX_SEED {
            return Err(Error::Config(format!(
                "seed {} exceeds {MAX_SEED}",
                self.seed
            )));
        }
        for (&id, &n) in &self.targets {
            if n == 0 {
                continue;
            }
            let recipe = engine
                .recipe(id)
                .ok_or_else(|| Error::Config(format!("pattern {id} has no injection recipe")))?;
            if !recipe.applies_to(format) {
                return Err(Error::NotApplicable {
                    pattern: id.name().to_string(),
                    format: format.to_string(),
                });
            }
            if !self.pattern_order.contains(&id) {
                return Err(Error::Config(format!(
                    "pattern {id} is missing from pattern_order"
                )));
            }
        }
        if let Some(h) = &self.histogram {
            if h.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Config(
                    "histogram targets must be non-increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

pub fn default_cap(format: SourceFormat) -> usize {
    match format {
        SourceFormat::Smd => 4,
        SourceFormat::Babi => 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_table_one() {
        let smd = PlanConfig::preset("smd-table1").unwrap();
        let counts: Vec<usize> = smd
            .pattern_order
            .iter()
            .map(|p| smd.targets.get(p).copied().unwrap_or(0))
            .collect();
        assert_eq!(counts, [64, 0, 23, 35, 24, 6, 139, 151, 100]);
        assert_eq!(smd.total_target(), 542);
        assert_eq!(smd.max_patterns_per_dialog, 4);
        let babi = PlanConfig::preset("babi-table1").unwrap();
        assert_eq!(babi.total_target(), 2844);
        assert_eq!(babi.max_patterns_per_dialog, 5);
        assert!(PlanConfig::preset("nope").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = PlanConfig::preset("smd-table1").unwrap();
        let back = PlanConfig::from_toml(&cfg.to_toml(), SourceFormat::Smd).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn minimal_file() {
        let cfg = PlanConfig::from_toml("seed = 3\n[targets]\n\"C3.1\" = 2\n", SourceFormat::Babi)
            .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.max_patterns_per_dialog, 5);
        assert_eq!(
            cfg.targets[&PatternId::from_name("capability_expansion").unwrap()],
            2
        );
        assert!(PlanConfig::from_toml("[targets]\nbogus = 1\n", SourceFormat::Babi).is_err());
        assert!(PlanConfig::from_toml("colour = 1\n", SourceFormat::Babi).is_err());
    }

    #[test]
    fn validation_rejects_inapplicable_targets() {
        let engine = PatternEngine::default();
        let mut cfg = PlanConfig::new(SourceFormat::Smd);
        cfg.targets.insert(
            PatternId::from_name("open_request_user_detail_request").unwrap(),
            1,
        );
        let err = cfg.validate(SourceFormat::Smd, &engine).unwrap_err();
        assert_eq!(
            err.to_string(),
            "pattern open_request_user_detail_request not applicable to smd"
        );
        cfg.targets.insert(
            PatternId::from_name("open_request_user_detail_request").unwrap(),
            0,
        );
        cfg.validate(SourceFormat::Smd, &engine).unwrap();
        cfg.targets
            .insert(PatternId::from_name("inquiry_confirmation").unwrap(), 1);
        assert!(cfg.validate(SourceFormat::Smd, &engine).is_err());
    }
}
