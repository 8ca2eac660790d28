use super::*;
use crate::conflict::ScriptEntry;
use crate::fixtures::{example_dpi, example_script, EXAMPLE_CONFLICTS};

fn s(ids: &[usize]) -> ComponentSet {
    ComponentSet::from_ids(ids.iter().copied())
}

fn golden_config(engine: EngineKind) -> SessionConfig {
    let entries: Vec<ScriptEntry> = serde_json::from_str(EXAMPLE_CONFLICTS).unwrap();
    SessionConfig {
        ld: 5,
        engine,
        conflict_script: Some(entries),
        audit: true,
        ..SessionConfig::default()
    }
}

fn evolution() -> Vec<Vec<ComponentSet>> {
    vec![
        vec![s(&[1, 3]), s(&[1, 4]), s(&[2, 3]), s(&[2, 5])],
        vec![s(&[1, 4]), s(&[2, 5])],
        vec![s(&[1, 4]), s(&[1, 2, 3, 5])],
        vec![s(&[1, 4])],
    ]
}

#[test]
fn scripted_example_with_both_engines() {
    for (engine, fc, rd, cc) in [
        (EngineKind::Dynamic, 6, 4, 5),
        (EngineKind::Hstree, 14, 0, 9),
    ] {
        let mut oracle = ScriptedOracle::new(example_script());
        let out = run_session(&example_dpi(), &golden_config(engine), &mut oracle).unwrap();
        assert_eq!(out.diagnosis, s(&[1, 4]));
        let diags: Vec<_> = out.log.iter().map(|r| r.diagnoses.clone()).collect();
        assert_eq!(diags, evolution(), "{engine}");
        assert_eq!(
            (out.counters.fc, out.counters.rd, out.counters.cc_tree),
            (fc, rd, cc),
            "{engine}"
        );
        // 4 + 2 + 2 diagnoses re-checked between iterations
        assert_eq!(out.counters.cc_session, 8);
        assert!(out.violations.is_empty(), "{:?}", out.violations);
    }
}

#[test]
fn per_iteration_counters_of_the_stateful_engine() {
    let mut oracle = ScriptedOracle::new(example_script());
    let out = run_session(
        &example_dpi(),
        &golden_config(EngineKind::Dynamic),
        &mut oracle,
    )
    .unwrap();
    let got: Vec<_> = out
        .log
        .iter()
        .map(|r| (r.counters.fc, r.counters.rd, r.counters.cc_tree))
        .collect();
    assert_eq!(got, vec![(4, 0, 4), (1, 2, 0), (1, 1, 1), (0, 1, 0)]);
    assert_eq!(out.log[0].check, vec![s(&[1, 4]), s(&[2, 5])]);
    assert_eq!(out.log[0].times, vec![s(&[1, 3]), s(&[2, 3])]);
    assert_eq!(out.log[1].check, vec![s(&[1, 4])]);
    assert_eq!(out.log[1].times, vec![s(&[2, 5])]);
}

#[test]
fn stepwise_session_matches_the_driven_one() {
    let config = SessionConfig {
        pinned_points: example_script().into_iter().map(|m| m.sentence).collect(),
        ..golden_config(EngineKind::Dynamic)
    };
    let mut session = Session::start(example_dpi(), config).unwrap();
    assert_eq!(session.diagnoses(), evolution()[0].as_slice());
    for m in example_script() {
        assert!(session.pending_point().unwrap().same_sentence(&m.sentence));
        // round trip through JSON at every step, as a persisted session would
        let json = serde_json::to_string(&session).unwrap();
        session = serde_json::from_str(&json).unwrap();
        session.answer(m.outcome).unwrap();
    }
    assert_eq!(
        session.status(),
        &Status::Done {
            diagnosis: s(&[1, 4])
        }
    );
    assert_eq!(session.counters().fc, 6);
    assert!(matches!(
        session.answer(true),
        Err(SessionError::NotAwaiting("done"))
    ));
}

#[test]
fn simulated_oracle_isolates_the_actual_diagnosis() {
    for engine in [EngineKind::Dynamic, EngineKind::Hstree] {
        for actual in evolution()[0].clone() {
            let config = SessionConfig {
                engine,
                ..SessionConfig::default()
            };
            let mut oracle = SimulatedOracle::new(actual);
            let out = run_session(&example_dpi(), &config, &mut oracle).unwrap();
            assert_eq!(out.diagnosis, actual);
            for r in &out.log[..out.log.len() - 1] {
                assert!(!r.times.is_empty(), "uninformative measurement");
            }
        }
    }
}

#[test]
fn single_diagnosis_stops_immediately() {
    let dpi = Dpi::parse("[O]\na1: A\na2: B\n[N]\nA\n").unwrap();
    let out = run_session(
        &dpi,
        &SessionConfig::default(),
        &mut SimulatedOracle::new(s(&[1])),
    )
    .unwrap();
    assert_eq!(out.diagnosis, s(&[1]));
    assert_eq!(out.log.len(), 1);
    assert!(out.log[0].measurement.is_none());
}

#[test]
fn contradicting_script_aborts() {
    let script: Vec<Measurement> = serde_json::from_str(
        r#"[{"sentence": "A -> C", "outcome": false}, {"sentence": "A -> !B", "outcome": false},
            {"sentence": "C", "outcome": true}]"#,
    )
    .unwrap();
    // C entails A -> C, which was observed to be false
    let mut oracle = ScriptedOracle::new(script);
    let err = run_session(&example_dpi(), &SessionConfig::default(), &mut oracle).unwrap_err();
    assert!(matches!(err.error, SessionError::Contradiction(_)), "{err}");
    assert_eq!(err.log.len(), 2);
}

#[test]
fn exhausted_script_is_an_oracle_error() {
    let mut script = example_script();
    script.truncate(1);
    let config = SessionConfig {
        pinned_points: example_script().into_iter().map(|m| m.sentence).collect(),
        ..SessionConfig::default()
    };
    let err = run_session(&example_dpi(), &config, &mut ScriptedOracle::new(script)).unwrap_err();
    assert!(matches!(
        err.error,
        SessionError::Oracle(OracleError::Exhausted(_))
    ));
}

#[test]
fn invalid_configurations_are_rejected() {
    let dpi = example_dpi();
    let bad = [
        SessionConfig {
            ld: 1,
            ..SessionConfig::default()
        },
        SessionConfig {
            pr: Some(FaultProbabilities::uniform(3, 0.1).unwrap()),
            ..SessionConfig::default()
        },
        SessionConfig {
            stop_probability: Some(1.5),
            ..SessionConfig::default()
        },
    ];
    for c in bad {
        let e = Session::start(dpi.clone(), c).unwrap_err();
        assert!(e.is_validation());
        assert_eq!(e.code(), "invalid_config");
    }
    let trivial = Dpi::parse_unchecked("[O]\na1: A\n").unwrap();
    let e = Session::start(trivial, SessionConfig::default()).unwrap_err();
    assert_eq!(e.code(), "invalid_dpi");
}

#[test]
fn stop_probability_ends_early() {
    let pr = FaultProbabilities::new(vec![0.3, 0.01, 0.01, 0.3, 0.01]).unwrap();
    let config = SessionConfig {
        order: QueueOrder::Prob,
        pr: Some(pr),
        stop_probability: Some(0.9),
        ..SessionConfig::default()
    };
    let out = run_session(
        &example_dpi(),
        &config,
        &mut SimulatedOracle::new(s(&[2, 5])),
    )
    .unwrap();
    // [1,4] dominates from the start, even though the oracle disagrees
    assert_eq!(out.log.len(), 1);
    assert_eq!(out.diagnosis, s(&[1, 4]));
}

#[test]
fn log_round_trips_and_replays() {
    let config = SessionConfig::default();
    let out = run_session(
        &example_dpi(),
        &config,
        &mut SimulatedOracle::new(s(&[2, 3])),
    )
    .unwrap();
    let text = log_to_jsonl(&out.log);
    assert_eq!(text.lines().count(), out.log.len());
    let back = log_from_jsonl(&text).unwrap();
    assert_eq!(back, out.log);
    let mut replay = ScriptedOracle::new(log_script(&back));
    let again = run_session(&example_dpi(), &config, &mut replay).unwrap();
    assert_eq!(again.log.len(), out.log.len());
    for (a, b) in again.log.iter().zip(&out.log) {
        assert!(a.same_outcome(b));
    }
}
