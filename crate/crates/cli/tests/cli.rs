use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use natvar_testkit::{smd_corpus, smd_fixture, smd_standin};

fn natvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natvar"))
        .args(args)
        .output()
        .expect("spawn natvar")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_smd(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("test.json");
    fs::write(&path, text).unwrap();
    path
}

fn inject(input: &Path, output: &Path, jobs: &str) -> Output {
    natvar(&[
        "--jobs",
        jobs,
        "inject",
        "--format",
        "smd",
        "--input",
        s(input),
        "--preset",
        "smd-table1",
        "--seed",
        "11",
        "--output",
        s(output),
    ])
}

#[test]
fn missing_arguments_are_usage_errors() {
    let o = natvar(&["inject", "--format", "smd"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = natvar(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(natvar(&["--help"]).status.code(), Some(0));
}

#[test]
fn inject_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_standin());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o = inject(&input, &a, "1");
    assert!(o.status.success(), "{}", stderr(&o));
    let o = inject(&input, &b, "4");
    assert!(o.status.success(), "{}", stderr(&o));
    for suffix in ["", ".origin", ".manifest.tsv", ".plan.tsv"] {
        let pa = PathBuf::from(format!("{}{suffix}", a.display()));
        let pb = PathBuf::from(format!("{}{suffix}", b.display()));
        assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap(), "{suffix}");
    }
    let record: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a.json.run.json")).unwrap()).unwrap();
    assert_eq!(record["seed"], 11);
    assert_eq!(record["outputs"].as_array().unwrap().len(), 4);
    assert!(record.get("jobs").is_none());
}

#[test]
fn shortfall_exits_3_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_fixture());
    let out = dir.path().join("u.json");
    let o = inject(&input, &out, "0");
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("eligible"));
    let o = natvar(&[
        "inject",
        "--format",
        "smd",
        "--input",
        s(&input),
        "--preset",
        "smd-table1",
        "--allow-shortfall",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(dir.path().join("u.json.plan.tsv"))
        .unwrap()
        .contains("# shortfall:"));
}

#[test]
fn misaligned_predictions_report_both_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_fixture());
    let manifest = dir.path().join("m.tsv");
    let o = natvar(&[
        "manifest",
        "--format",
        "smd",
        "--input",
        s(&input),
        "--output",
        s(&manifest),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let n = fs::read_to_string(&manifest)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    let preds = dir.path().join("p.txt");
    fs::write(&preds, "only one line\n").unwrap();
    let o = natvar(&[
        "eval",
        "--predictions",
        s(&preds),
        "--manifest",
        s(&manifest),
        "--corpus",
        s(&input),
        "--format",
        "smd",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains(&format!("expected {n}")) && err.contains("got 1"),
        "{err}"
    );
}

#[test]
fn ablate_all_writes_one_corpus_per_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_standin());
    let out = dir.path().join("abl");
    let o = natvar(&[
        "ablate",
        "--format",
        "smd",
        "--input",
        s(&input),
        "--preset",
        "smd-table1",
        "--all",
        "--output-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let corpora: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| {
            e.file_name().to_string_lossy().ends_with(".json")
                && !e.file_name().to_string_lossy().contains(".run")
        })
        .collect();
    assert_eq!(corpora.len(), 8);
    assert!(out.join("ablate.run.json").exists());
}

#[test]
fn ablate_rejects_patterns_without_a_recipe_for_the_format() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_fixture());
    let out = dir.path().join("abl");
    let o = natvar(&[
        "ablate",
        "--format",
        "smd",
        "--input",
        s(&input),
        "--preset",
        "smd-table1",
        "--pattern",
        "no_such_pattern",
        "--output-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("capability_expansion"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn oracle_predictions_score_perfectly_and_compare_renders() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_corpus(5, 40));
    let manifest = dir.path().join("m.tsv");
    assert!(natvar(&[
        "manifest",
        "--format",
        "smd",
        "--input",
        s(&input),
        "--output",
        s(&manifest)
    ])
    .status
    .success());
    let preds = dir.path().join("gold.txt");
    let o = natvar(&[
        "baseline",
        "--format",
        "smd",
        "--corpus",
        s(&input),
        "--candidates-from",
        s(&input),
        "--manifest",
        s(&manifest),
        "--out",
        s(&preds),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = dir.path().join("r.txt");
    let o = natvar(&[
        "eval",
        "--predictions",
        s(&preds),
        "--manifest",
        s(&manifest),
        "--corpus",
        s(&input),
        "--format",
        "smd",
        "--label",
        "run",
        "--output",
        s(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("bleu:"), "{text}");
    let o = natvar(&["compare", s(&report), s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("BLEU"));
}

#[test]
fn review_rejects_bad_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_smd(dir.path(), &smd_fixture());
    let o = natvar(&[
        "review",
        "--format",
        "smd",
        "--input",
        s(&input),
        "--fraction",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn patterns_lists_the_catalog() {
    let o = natvar(&["patterns", "--format", "babi"]);
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().count(), 1 + 7, "{out}");
}
