use std::collections::BTreeMap;

use natvar::corpus_io::{parse, RawFile};
use natvar::planner::{ablate, execute, overlap_histogram, plan, PlanConfig};
use natvar::{DialogCorpus, Error, PatternEngine, SourceFormat};
use natvar_testkit::{smd_corpus, smd_standin, SMD_FIXTURE};

fn load(format: SourceFormat, text: String) -> DialogCorpus {
    parse(
        format,
        &RawFile::from_bytes("test", text.into_bytes()),
        None,
    )
    .unwrap()
}

#[test]
fn smd_preset_hits_every_target_exactly() {
    let corpus = load(SourceFormat::Smd, smd_standin());
    let engine = PatternEngine::default();
    let cfg = PlanConfig::preset("smd-table1").unwrap();
    let p = plan(&corpus, &cfg, &engine).unwrap();
    assert!(p.shortfalls.is_empty());
    assert_eq!(p.counts(), cfg.targets);
    let updated = execute(&corpus, &p, &engine, cfg.seed).unwrap();
    let mut counts = BTreeMap::new();
    for d in &updated.dialogs {
        for id in d.applied_patterns() {
            *counts.entry(id).or_insert(0) += 1;
        }
    }
    assert_eq!(counts, cfg.targets);
    let hist = overlap_histogram(&updated);
    assert!(hist[&1] <= corpus.len());
    assert!(hist
        .values()
        .zip(hist.values().skip(1))
        .all(|(a, b)| a >= b));
}

#[test]
fn small_corpus_fails_with_a_shortfall_report() {
    let corpus = load(SourceFormat::Smd, SMD_FIXTURE.to_string());
    let engine = PatternEngine::default();
    let cfg = PlanConfig::preset("smd-table1").unwrap();
    match plan(&corpus, &cfg, &engine) {
        Err(Error::Shortfall(s)) => {
            assert!(!s.is_empty());
            assert!(s.iter().all(|x| x.eligible < x.target));
        }
        other => panic!("expected a shortfall, got {other:?}"),
    }
    let mut allowed = cfg.clone();
    allowed.allow_shortfall = true;
    let p = plan(&corpus, &allowed, &engine).unwrap();
    assert!(!p.shortfalls.is_empty());
    assert!(p.to_tsv().contains("# shortfall:"));
}

#[test]
fn ablation_touches_only_its_pattern() {
    let corpus = load(SourceFormat::Smd, smd_corpus(9, 120));
    let engine = PatternEngine::default();
    let mut cfg = PlanConfig::preset("smd-table1").unwrap();
    cfg.allow_shortfall = true;
    for r in engine.recipes_for(SourceFormat::Smd) {
        let (p, updated) = ablate(&corpus, &cfg, r.id, &engine).unwrap();
        assert!(p.assignments.iter().all(|a| a.pattern == r.id));
        let n = p.assignments.len();
        assert_eq!(
            updated.utterance_total(),
            corpus.utterance_total() + n * r.added_turn_count()
        );
        assert!(updated
            .dialogs
            .iter()
            .all(|d| d.applied_patterns().iter().all(|&q| q == r.id)));
    }
}

#[test]
fn ablating_an_inapplicable_pattern_is_an_error() {
    let corpus = load(SourceFormat::Smd, SMD_FIXTURE.to_string());
    let engine = PatternEngine::default();
    let cfg = PlanConfig::preset("smd-table1").unwrap();
    let id = natvar::PatternId::from_name(natvar::patterns::recipes::USER_DETAIL_REQUEST).unwrap();
    assert!(matches!(
        ablate(&corpus, &cfg, id, &engine),
        Err(Error::NotApplicable { .. })
    ));
}
