use std::path::PathBuf;

use seqdiag_core::conflict::ScriptEntry;
use seqdiag_core::session::{
    log_from_jsonl, log_script, log_to_jsonl, run_session, EngineKind, ScriptedOracle,
    SessionConfig,
};
use seqdiag_core::{ComponentSet, Dpi, Measurement};

fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn s(ids: &[usize]) -> ComponentSet {
    ComponentSet::from_ids(ids.iter().copied())
}

fn evolution() -> Vec<Vec<ComponentSet>> {
    vec![
        vec![s(&[1, 3]), s(&[1, 4]), s(&[2, 3]), s(&[2, 5])],
        vec![s(&[1, 4]), s(&[2, 5])],
        vec![s(&[1, 4]), s(&[1, 2, 3, 5])],
        vec![s(&[1, 4])],
    ]
}

fn script() -> Vec<Measurement> {
    serde_json::from_str(&data("example.script.json")).unwrap()
}

#[test]
fn diagnoses_evolve_identically_with_either_finder() {
    let dpi = Dpi::parse(&data("example.dpi")).unwrap();
    let entries: Vec<ScriptEntry> = serde_json::from_str(&data("example.conflicts.json")).unwrap();
    for engine in [EngineKind::Dynamic, EngineKind::Hstree] {
        for pinned in [None, Some(entries.clone())] {
            let config = SessionConfig {
                ld: 5,
                engine,
                conflict_script: pinned,
                ..SessionConfig::default()
            };
            let out = run_session(&dpi, &config, &mut ScriptedOracle::new(script())).unwrap();
            let got: Vec<_> = out.log.iter().map(|r| r.diagnoses.clone()).collect();
            assert_eq!(got, evolution(), "{engine}");
            assert_eq!(out.diagnosis.to_string(), "[a1,a4]");
        }
    }
}

#[test]
fn pinned_labels_give_the_reference_tallies() {
    let dpi = Dpi::parse(&data("example.dpi")).unwrap();
    let entries: Vec<ScriptEntry> = serde_json::from_str(&data("example.conflicts.json")).unwrap();
    let tally = |engine| {
        let config = SessionConfig {
            ld: 5,
            engine,
            conflict_script: Some(entries.clone()),
            ..SessionConfig::default()
        };
        let c = run_session(&dpi, &config, &mut ScriptedOracle::new(script()))
            .unwrap()
            .counters;
        (c.fc, c.rd, c.cc_tree)
    };
    assert_eq!(tally(EngineKind::Hstree), (14, 0, 9));
    assert_eq!(tally(EngineKind::Dynamic), (6, 4, 5));
}

#[test]
fn logged_session_replays_exactly() {
    let dpi = Dpi::parse(&data("example.dpi")).unwrap();
    let config = SessionConfig::default();
    let first = run_session(&dpi, &config, &mut ScriptedOracle::new(script())).unwrap();
    let log = log_from_jsonl(&log_to_jsonl(&first.log)).unwrap();
    let again = run_session(&dpi, &config, &mut ScriptedOracle::new(log_script(&log))).unwrap();
    assert_eq!(again.log.len(), log.len());
    for (a, b) in again.log.iter().zip(&log) {
        assert!(a.same_outcome(b), "{a:?} vs {b:?}");
    }
}
