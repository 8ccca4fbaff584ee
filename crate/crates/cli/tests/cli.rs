use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tuplematch::testkit::fixtures;

const BIN: &str = env!("CARGO_BIN_EXE_tuplematch");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a knowledge base and configuration into a fresh directory.
fn workspace(kb: &str, config: &str) -> (TempDir, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let kb_path = dir.path().join("kb.nt");
    let cfg_path = dir.path().join("config.json");
    fs::write(&kb_path, kb).unwrap();
    fs::write(&cfg_path, config).unwrap();
    (dir, kb_path, cfg_path)
}

fn pgx_workspace() -> (TempDir, PathBuf, PathBuf) {
    workspace(fixtures::PHENOTYPE_PAIR_KB, fixtures::PHENOTYPE_PAIR_CONFIG)
}

fn match_into(kb: &Path, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["match", "--kb", s(kb), "--config", s(cfg), "--out", s(out)];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn phenotype_example_yields_one_broad_match() {
    let (dir, kb, cfg) = pgx_workspace();
    let out = dir.path().join("links.nt");
    let o = match_into(&kb, &cfg, &out, &["--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines,
        [format!(
            "<{p}pgt1> <http://www.w3.org/2004/02/skos/core#broadMatch> <{p}pgt2> .",
            p = fixtures::PGX
        )]
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["tuples"], 2);
    assert_eq!(report["pairs"], 1);
    assert_eq!(report["links"], 1);
    assert_eq!(report["workers"], 2);
    assert_eq!(report["config_sha256"].as_str().unwrap().len(), 64);
    assert!(dir.path().join("links.nt.sources.tsv").exists());
}

#[test]
fn empty_knowledge_base_gives_empty_output() {
    let (dir, kb, cfg) = workspace("", fixtures::PHENOTYPE_PAIR_CONFIG);
    let out = dir.path().join("links.nt");
    let o = match_into(&kb, &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), b"");
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["tuples"], 0);
    assert_eq!(report["pairs"], 0);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    let o = run(&["gen", "--out", s(&data), "--seed", "42", "--tuples", "120"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let kb = data.join("kb.nt");
    let cfg = data.join("config.json");
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("links{threads}.nt"));
        let stats = dir.path().join(format!("stats{threads}.tsv"));
        let o = match_into(&kb, &cfg, &out, &["--threads", threads, "--stats", s(&stats)]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((fs::read(&out).unwrap(), fs::read(&stats).unwrap()));
    }
    assert!(!outputs[0].0.is_empty());
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(run(&["gen", "--out", s(d), "--seed", "7"]).status.success());
    }
    assert_eq!(fs::read(a.join("kb.nt")).unwrap(), fs::read(b.join("kb.nt")).unwrap());
    assert_eq!(
        fs::read(a.join("config.json")).unwrap(),
        fs::read(b.join("config.json")).unwrap()
    );
}

#[test]
fn gen_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let o = run(&["gen", "--out", s(dir.path()), "--unknown-rate", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_accepts_fixture() {
    let (_dir, kb, cfg) = pgx_workspace();
    let o = run(&["validate", "--kb", s(&kb), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("ok"));
}

fn edit_config(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(fixtures::PHENOTYPE_PAIR_CONFIG).unwrap();
    f(&mut v);
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn validate_names_uncovered_index() {
    let cfg = edit_config(|v| {
        let block = v["partition"][1]["indices"].as_array_mut().unwrap();
        let removed = block.pop().unwrap();
        assert_eq!(removed, 6);
    });
    let (_dir, kb, cfg) = workspace(fixtures::PHENOTYPE_PAIR_KB, &cfg);
    let o = run(&["validate", "--kb", s(&kb), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("partition does not cover index 6"), "{}", stdout(&o));
}

#[test]
fn validate_rejects_unknown_threshold_above_arity() {
    let cfg = edit_config(|v| v["gammas"]["unknown"] = 10.into());
    let (_dir, kb, cfg) = workspace(fixtures::PHENOTYPE_PAIR_KB, &cfg);
    let o = run(&["validate", "--kb", s(&kb), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let out = match_into(&kb, &cfg, &kb.with_extension("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_two() {
    let (dir, kb, cfg) = workspace(fixtures::PHENOTYPE_PAIR_KB, "{ not json");
    let o = match_into(&kb, &cfg, &dir.path().join("o.nt"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_triples_exit_one() {
    let (dir, kb, cfg) = workspace("<http://a> <http://b> .\n", fixtures::PHENOTYPE_PAIR_CONFIG);
    let o = match_into(&kb, &cfg, &dir.path().join("o.nt"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kb.nt"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_three() {
    let (dir, _kb, cfg) = pgx_workspace();
    let missing = dir.path().join("absent.nt");
    let o = match_into(&missing, &cfg, &dir.path().join("o.nt"), &[]);
    assert_eq!(o.status.code(), Some(3));
}

fn count_cells(table: &str) -> Vec<u64> {
    table
        .lines()
        .filter(|l| l.starts_with("  http"))
        .flat_map(|l| l.split_whitespace().skip(1).map(|c| c.parse::<u64>().unwrap()).collect::<Vec<_>>())
        .collect()
}

#[test]
fn stats_on_phenotype_example() {
    let (dir, kb, cfg) = pgx_workspace();
    let out = dir.path().join("links.nt");
    assert!(match_into(&kb, &cfg, &out, &[]).status.success());
    let o = run(&["stats", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("broadMatch>: 1 links"), "{table}");
    let cells = count_cells(&table);
    assert_eq!(cells.iter().sum::<u64>(), 1);
    // Sources sort as literature, pharmgkb; the link runs literature to pharmgkb.
    let broad = table.split("Rule 3").nth(1).unwrap().split("Rule 4").next().unwrap();
    assert_eq!(count_cells(broad), [0, 1, 0, 0]);
}

#[test]
fn stats_on_empty_links_is_all_zero() {
    let (dir, kb, cfg) = pgx_workspace();
    let out = dir.path().join("links.nt");
    assert!(match_into(&kb, &cfg, &out, &["--transitive-closure", "false"]).status.success());
    // Keep the sidecar but drop every link.
    fs::write(&out, "").unwrap();
    let o = run(&["stats", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cells = count_cells(&stdout(&o));
    assert_eq!(cells.len(), 5 * 4);
    assert!(cells.iter().all(|&c| c == 0));

    let bare = dir.path().join("bare.nt");
    fs::write(&bare, "").unwrap();
    let o = run(&["stats", s(&bare)]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn stats_on_identical_tuples_fills_diagonal() {
    let fx = fixtures::three_identical();
    let (dir, kb, cfg) = workspace(&fx.ntriples(), &fx.config.to_json_pretty());
    let out = dir.path().join("links.nt");
    let o = match_into(&kb, &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&run(&["stats", s(&out)]));
    assert!(table.contains("sameAs>: 6 links"), "{table}");
    let same = table.split("Rule 2").next().unwrap();
    assert_eq!(count_cells(same), [6]);
}

#[test]
fn stats_rejects_foreign_predicate() {
    let dir = TempDir::new().unwrap();
    let links = dir.path().join("l.nt");
    fs::write(&links, "<http://a> <http://example.org/other> <http://b> .\n").unwrap();
    let o = run(&["stats", s(&links)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn closure_flag_controls_induced_links() {
    let fx = fixtures::three_identical();
    let (dir, kb, cfg) = workspace(&fx.ntriples(), &fx.config.to_json_pretty());
    for flag in [&["--transitive-closure"][..], &["--transitive-closure", "false"], &[]] {
        let out = dir.path().join("l.nt");
        let o = match_into(&kb, &cfg, &out, flag);
        assert!(o.status.success(), "{}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["transitive_closure"], flag != ["--transitive-closure", "false"]);
        assert_eq!(report["links"], 6);
    }
}
