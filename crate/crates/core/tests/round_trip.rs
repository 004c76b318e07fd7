use natvar::corpus_io::{parse, serialize, write_origin_sidecar, RawFile};
use natvar::planner::{execute, plan, PlanConfig, MAX_SEED};
use natvar::{PatternEngine, SourceFormat};
use natvar_testkit::{
    babi_corpus, babi_test_file, smd_corpus, smd_test_file, BABI_FIXTURE, SMD_FIXTURE,
};
use proptest::prelude::*;

fn round_trip(format: SourceFormat, text: &str) {
    let raw = RawFile::from_bytes("fixture", text.as_bytes().to_vec());
    let corpus = parse(format, &raw, None).unwrap();
    assert_eq!(serialize(&corpus), text.as_bytes());
}

#[test]
fn shipped_fixtures_round_trip() {
    round_trip(SourceFormat::Smd, SMD_FIXTURE);
    round_trip(SourceFormat::Babi, BABI_FIXTURE);
}

#[test]
fn test_files_round_trip() {
    round_trip(SourceFormat::Smd, &smd_test_file().0);
    round_trip(SourceFormat::Babi, &babi_test_file().0);
}

fn reserialize(format: SourceFormat, text: &str) -> Vec<u8> {
    let raw = RawFile::from_bytes("fixture", text.as_bytes().to_vec());
    serialize(&parse(format, &raw, None).unwrap())
}

#[test]
fn crlf_input_is_written_with_lf() {
    let text = BABI_FIXTURE.replace('\n', "\r\n");
    assert_eq!(
        reserialize(SourceFormat::Babi, &text),
        BABI_FIXTURE.as_bytes()
    );
}

#[test]
fn final_newline_variants_are_kept() {
    round_trip(SourceFormat::Babi, BABI_FIXTURE.trim_end());
    round_trip(
        SourceFormat::Babi,
        &format!("{}\n", BABI_FIXTURE.trim_end()),
    );
}

/// An updated corpus, re-read with its origin sidecar, serializes to the
/// same bytes and keeps every origin tag.
fn updated_round_trip(format: SourceFormat, text: &str, seed: u64) {
    let raw = RawFile::from_bytes("fixture", text.as_bytes().to_vec());
    let corpus = parse(format, &raw, None).unwrap();
    let mut cfg = PlanConfig::new(format);
    cfg.allow_shortfall = true;
    cfg.seed = seed;
    let engine = PatternEngine::default();
    for r in engine.recipes_for(format) {
        cfg.targets.insert(r.id, 3);
    }
    let p = plan(&corpus, &cfg, &engine).unwrap();
    let updated = execute(&corpus, &p, &engine, seed).unwrap();
    let bytes = serialize(&updated);
    let sidecar = write_origin_sidecar(&updated);
    let again = parse(
        format,
        &RawFile::from_bytes("updated", bytes.clone()),
        Some(&sidecar),
    )
    .unwrap();
    assert_eq!(serialize(&again), bytes);
    for (a, b) in again.dialogs.iter().zip(&updated.dialogs) {
        let origins = |d: &natvar::Dialog| d.turns.iter().map(|t| t.origin).collect::<Vec<_>>();
        assert_eq!(origins(a), origins(b), "{}", a.id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_smd_round_trips(seed in 0..=MAX_SEED, n in 1usize..20) {
        round_trip(SourceFormat::Smd, &smd_corpus(seed, n));
    }

    #[test]
    fn generated_babi_round_trips(seed in 0..=MAX_SEED, n in 1usize..20) {
        round_trip(SourceFormat::Babi, &babi_corpus(seed, n));
    }

    #[test]
    fn updated_corpora_round_trip_with_sidecar(seed in 0..=MAX_SEED, smd in any::<bool>()) {
        if smd {
            updated_round_trip(SourceFormat::Smd, &smd_corpus(seed, 12), seed);
        } else {
            updated_round_trip(SourceFormat::Babi, &babi_corpus(seed, 12), seed);
        }
    }
}
