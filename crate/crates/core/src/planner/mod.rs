//! Seeded selection of injection sites, execution of plans, ablation sets
//! and review sampling.

mod config;
mod review;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{default_cap, PlanConfig, MAX_SEED, PRESETS};
pub use review::{sample_review, ReviewSheet};

use crate::corpus_io::corpus_checksum;
use crate::dialog::{Dialog, DialogCorpus};
use crate::digest::{keyed_rng, sha256_hex};
use crate::error::{Error, Result, Shortfall};
use crate::patterns::{Anchor, AnchorContext, PatternEngine, PatternId, PatternRecipe};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub dialog_id: String,
    pub pattern: PatternId,
    pub anchor: Anchor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InjectionPlan {
    pub assignments: Vec<Assignment>,
    pub seed: u64,
    /// Checksum of the serialized input corpus.
    pub corpus_digest: String,
    /// Checksum of the config together with the corpus checksum.
    pub config_digest: String,
    /// Patterns whose target was capped at eligibility.
    pub shortfalls: Vec<Shortfall>,
    /// The reconciled overlap targets the planner aimed for, if any.
    pub histogram_targets: Option<Vec<usize>>,
}

impl InjectionPlan {
    pub fn counts(&self) -> BTreeMap<PatternId, usize> {
        let mut out = BTreeMap::new();
        for a in &self.assignments {
            *out.entry(a.pattern).or_insert(0) += 1;
        }
        out
    }

    /// Tab-separated `dialog_id, pattern, turn_index` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config_digest: {}", self.config_digest);
        let _ = writeln!(out, "# corpus_digest: {}", self.corpus_digest);
        for s in &self.shortfalls {
            let _ = writeln!(out, "# shortfall: {s}");
        }
        for a in &self.assignments {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                a.dialog_id, a.pattern, a.anchor.turn_index
            );
        }
        out
    }
}

/// Rescales `≥k` histogram targets so that they imply exactly `total`
/// assignments: the `≥1` bucket is kept (capped by `total` and `dialogs`),
/// buckets `k ≥ 2` are scaled proportionally with largest-remainder
/// rounding, and buckets above `cap` are dropped.
pub fn reconcile_histogram(
    at_least: &[usize],
    total: usize,
    dialogs: usize,
    cap: usize,
) -> Vec<usize> {
    let mut h: Vec<usize> = at_least.iter().copied().take(cap).collect();
    if h.is_empty() || total == 0 {
        return vec![0; h.len()];
    }
    h[0] = h[0].min(total).min(dialogs);
    let h1 = h[0];
    let rest_target = (total - h1).min(h1 * (h.len() - 1));
    let rest_sum: usize = h[1..].iter().sum();
    if rest_sum == 0 {
        // nothing to scale: fill the lowest buckets first
        let mut left = rest_target;
        for v in h[1..].iter_mut() {
            *v = left.min(h1);
            left -= *v;
        }
        return h;
    }
    let scale = rest_target as f64 / rest_sum as f64;
    let raw: Vec<f64> = h[1..].iter().map(|&v| v as f64 * scale).collect();
    let mut rounded: Vec<usize> = raw.iter().map(|v| v.floor() as usize).collect();
    let mut left = rest_target - rounded.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        fb.partial_cmp(&fa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        rounded[i] += 1;
        left -= 1;
    }
    // keep the buckets non-increasing and bounded by the ≥1 bucket
    let mut prev = h1;
    let mut carry = 0;
    for v in rounded.iter_mut() {
        *v += carry;
        carry = v.saturating_sub(prev);
        *v -= carry;
        prev = *v;
    }
    h[1..].copy_from_slice(&rounded);
    h
}

/// Exact-k dialog counts implied by `≥k` targets: `out[k-1]` dialogs get
/// exactly k patterns.
fn exact_counts(at_least: &[usize]) -> Vec<usize> {
    (0..at_least.len())
        .map(|i| at_least[i] - at_least.get(i + 1).copied().unwrap_or(0))
        .collect()
}

/// Efraimidis-Spirakis key: the `k` largest keys form a weighted sample
/// without replacement.
fn sample_key(u: f64, weight: f64) -> f64 {
    u.max(f64::MIN_POSITIVE).ln() / weight
}

fn anchors_all(
    engine: &PatternEngine,
    recipe: &PatternRecipe,
    dialogs: &[Dialog],
    ctx: &AnchorContext,
) -> Vec<Vec<Anchor>> {
    dialogs
        .par_iter()
        .map(|d| engine.find_anchors(recipe, d, ctx))
        .collect()
}

/// Chooses `(dialog, pattern, anchor)` assignments for every target in
/// `cfg.pattern_order`.
pub fn plan(
    corpus: &DialogCorpus,
    cfg: &PlanConfig,
    engine: &PatternEngine,
) -> Result<InjectionPlan> {
    cfg.validate(corpus.source_format, engine)?;
    let corpus_digest = corpus_checksum(corpus);
    let config_digest = sha256_hex(format!("{}\n{}", cfg.digest(), corpus_digest).as_bytes());
    let ctx = AnchorContext::new(corpus, cfg.seed);
    let n = corpus.dialogs.len();
    let cap = cfg.max_patterns_per_dialog;

    let active: Vec<(PatternId, usize, &PatternRecipe)> = cfg
        .pattern_order
        .iter()
        .filter_map(|&id| {
            let t = cfg.targets.get(&id).copied().unwrap_or(0);
            let r = engine.recipe(id)?;
            (t > 0).then_some((id, t, r))
        })
        .collect();

    // eligibility on the untouched corpus, used to spread overlap quotas
    let histogram_targets = cfg
        .histogram
        .as_ref()
        .map(|h| reconcile_histogram(h, active.iter().map(|a| a.1).sum(), n, cap));
    let eligible0: Vec<Vec<bool>> = if histogram_targets.is_some() {
        active
            .iter()
            .map(|(_, _, r)| {
                anchors_all(engine, r, &corpus.dialogs, &ctx)
                    .into_iter()
                    .map(|a| !a.is_empty())
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut quota: Vec<i64> = vec![0; n];
    if let Some(h) = &histogram_targets {
        let potential: Vec<usize> = (0..n)
            .map(|d| eligible0.iter().filter(|e| e[d]).count())
            .collect();
        let mut order: Vec<(usize, u64, usize)> = (0..n)
            .map(|d| {
                let tie = keyed_rng(cfg.seed, &[&corpus.dialogs[d].id, "quota"]).gen::<u64>();
                (potential[d], tie, d)
            })
            .collect();
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut slots = order.into_iter().map(|o| o.2);
        for (k, count) in exact_counts(h).into_iter().enumerate().rev() {
            for d in slots.by_ref().take(count) {
                quota[d] = (k + 1) as i64;
            }
        }
    }

    let mut working: Vec<Dialog> = corpus.dialogs.clone();
    let mut applied = vec![0usize; n];
    let mut assignments = Vec::new();
    let mut shortfalls = Vec::new();

    for (pos, &(id, target, recipe)) in active.iter().enumerate() {
        let anchors = anchors_all(engine, recipe, &working, &ctx);
        let eligible: Vec<usize> = (0..n)
            .filter(|&d| applied[d] < cap && !anchors[d].is_empty())
            .collect();
        let take = if eligible.len() < target {
            shortfalls.push(Shortfall {
                pattern: id.name().to_string(),
                target,
                eligible: eligible.len(),
            });
            eligible.len()
        } else {
            target
        };

        let mut keyed: Vec<(f64, usize)> = eligible
            .iter()
            .map(|&d| {
                let dialog = &corpus.dialogs[d];
                let u: f64 = keyed_rng(cfg.seed, &[&dialog.id, id.name(), "select"]).gen();
                let weight = if histogram_targets.is_some() {
                    let remaining = quota[d] - applied[d] as i64;
                    let opportunities =
                        eligible0[pos..].iter().filter(|e| e[d]).count().max(1) as i64;
                    if remaining <= 0 {
                        1e-3
                    } else if remaining >= opportunities {
                        1e3
                    } else {
                        remaining as f64 / opportunities as f64
                    }
                } else {
                    1.0
                };
                (sample_key(u, weight), d)
            })
            .collect();
        keyed.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let mut chosen: Vec<usize> = keyed.into_iter().take(take).map(|k| k.1).collect();
        chosen.sort_unstable();

        let picks: Vec<(usize, Anchor)> = chosen
            .iter()
            .map(|&d| {
                let list = &anchors[d];
                let i = keyed_rng(cfg.seed, &[&working[d].id, id.name(), "anchor"])
                    .gen_range(0..list.len());
                (d, list[i].clone())
            })
            .collect();
        let injected: Vec<Result<Dialog>> = picks
            .par_iter()
            .map(|(d, a)| engine.inject(&working[*d], recipe, a, cfg.seed))
            .collect();
        for ((d, anchor), result) in picks.into_iter().zip(injected) {
            working[d] = result?;
            applied[d] += 1;
            assignments.push(Assignment {
                dialog_id: corpus.dialogs[d].id.clone(),
                pattern: id,
                anchor,
            });
        }
    }

    if !shortfalls.is_empty() && !cfg.allow_shortfall {
        return Err(Error::Shortfall(shortfalls));
    }
    Ok(InjectionPlan {
        assignments,
        seed: cfg.seed,
        corpus_digest,
        config_digest,
        shortfalls,
        histogram_targets,
    })
}

/// Applies a plan to the corpus it was made for.
pub fn execute(
    corpus: &DialogCorpus,
    plan: &InjectionPlan,
    engine: &PatternEngine,
    seed: u64,
) -> Result<DialogCorpus> {
    if corpus_checksum(corpus) != plan.corpus_digest {
        return Err(Error::PlanMismatch);
    }
    let mut per_dialog: BTreeMap<usize, Vec<&Assignment>> = BTreeMap::new();
    for a in &plan.assignments {
        let d = corpus.position(&a.dialog_id).ok_or(Error::PlanMismatch)?;
        per_dialog.entry(d).or_default().push(a);
    }
    let updated: Vec<(usize, Result<Dialog>)> = per_dialog
        .into_par_iter()
        .map(|(d, list)| {
            let apply = || -> Result<Dialog> {
                let mut dialog = corpus.dialogs[d].clone();
                for a in list {
                    let recipe = engine
                        .recipe(a.pattern)
                        .ok_or_else(|| Error::UnknownPattern(a.pattern.name().to_string()))?;
                    dialog = engine.inject(&dialog, recipe, &a.anchor, seed)?;
                }
                Ok(dialog)
            };
            (d, apply())
        })
        .collect();
    let mut out = corpus.clone();
    for (d, dialog) in updated {
        out.dialogs[d] = dialog?;
    }
    Ok(out)
}

/// An ablation set: only `pattern`, at its configured target.
pub fn ablate(
    corpus: &DialogCorpus,
    cfg: &PlanConfig,
    pattern: PatternId,
    engine: &PatternEngine,
) -> Result<(InjectionPlan, DialogCorpus)> {
    let recipe = engine
        .recipe(pattern)
        .ok_or_else(|| Error::UnknownPattern(pattern.name().to_string()))?;
    if !recipe.applies_to(corpus.source_format) {
        return Err(Error::NotApplicable {
            pattern: pattern.name().to_string(),
            format: corpus.source_format.to_string(),
        });
    }
    let mut single = cfg.clone();
    single.targets = BTreeMap::from([(pattern, cfg.targets.get(&pattern).copied().unwrap_or(0))]);
    single.histogram = None;
    let p = plan(corpus, &single, engine)?;
    let updated = execute(corpus, &p, engine, single.seed)?;
    Ok((p, updated))
}

/// `k → number of dialogs carrying at least k distinct patterns`, for
/// k = 1 ..= (largest count + 1).
pub fn overlap_histogram(corpus: &DialogCorpus) -> BTreeMap<usize, usize> {
    let counts: Vec<usize> = corpus
        .dialogs
        .iter()
        .map(|d| d.applied_patterns().len())
        .collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    (1..=max + 1)
        .map(|k| (k, counts.iter().filter(|&&c| c >= k).count()))
        .collect()
}
