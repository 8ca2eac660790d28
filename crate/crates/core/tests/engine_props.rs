use proptest::prelude::*;
use seqdiag_core::bench::{compare, BenchCase, OracleSpec};
use seqdiag_core::brute;
use seqdiag_core::generate::{generate, random_minimal_diagnosis, RandomDpiSpec};
use seqdiag_core::session::candidate_pool;
use seqdiag_core::session::{run_session, SessionConfig, SimulatedOracle};
use seqdiag_core::verify::{
    best_first_violation, check_transition, engines_against_brute, Transition,
};
use seqdiag_core::{
    Acquired, Dpi, FaultProbabilities, Measurement, Problem, QueueOrder, Ranking, Reasoner,
};

fn small_dpi() -> impl Strategy<Value = Dpi> {
    (2usize..=8, 2usize..=6, any::<u64>())
        .prop_map(|(axioms, vars, seed)| generate(&RandomDpiSpec::new(axioms, vars, seed)).unwrap())
}

fn order() -> impl Strategy<Value = QueueOrder> {
    prop_oneof![Just(QueueOrder::Bfs), Just(QueueOrder::Prob)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn unbounded_engines_return_every_minimal_diagnosis(
        dpi in small_dpi(),
        order in order(),
        pr_seed in any::<u64>(),
    ) {
        let ranking = Ranking::new(order, FaultProbabilities::random(dpi.num_axioms(), pr_seed));
        let check = engines_against_brute(&dpi, &Acquired::new(), &ranking);
        prop_assert!(check.is_clean(), "{:?}\n{}", check, dpi.to_text());
    }

    #[test]
    fn diagnoses_are_hitting_sets_of_conflicts(dpi in small_dpi()) {
        let acq = Acquired::new();
        let p = Problem::new(&dpi, &acq);
        let mut r = Reasoner::new();
        let diags = brute::minimal_diagnoses(&p, &mut r, brute::DEFAULT_CAP).unwrap();
        let conflicts = brute::minimal_conflicts(&p, &mut r, brute::DEFAULT_CAP).unwrap();
        prop_assert_eq!(diags, brute::minimal_hitting_sets(&conflicts, dpi.num_axioms()));
    }

    #[test]
    fn text_form_round_trips(dpi in small_dpi()) {
        prop_assert_eq!(Dpi::parse(&dpi.to_text()).unwrap(), dpi);
    }

    #[test]
    fn measurement_transitions_obey_the_laws(
        dpi in small_dpi(),
        pick in any::<prop::sample::Index>(),
        outcome in any::<bool>(),
    ) {
        let acq = Acquired::new();
        let pool = candidate_pool(&Problem::new(&dpi, &acq), 1024, &mut Reasoner::new());
        prop_assume!(!pool.is_empty());
        let m = Measurement::new(pick.get(&pool).clone(), outcome);
        if let Transition::Violated(v) = check_transition(&dpi, &acq, m) {
            prop_assert!(false, "{:?}\n{}", v, dpi.to_text());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn both_engines_run_the_same_session(
        axioms in 6usize..=10,
        vars in 4usize..=6,
        seed in any::<u64>(),
        order in order(),
        ld in 2usize..=6,
    ) {
        let dpi = generate(&RandomDpiSpec::new(axioms, vars, seed)).unwrap();
        let actual = random_minimal_diagnosis(&dpi, seed, &mut Reasoner::new());
        let config = SessionConfig {
            ld,
            order,
            pr: Some(FaultProbabilities::random(axioms, seed)),
            audit: true,
            ..SessionConfig::default()
        };
        let case = BenchCase {
            name: format!("s{seed}"),
            dpi: dpi.clone(),
            oracle: OracleSpec::Simulated(actual),
            config: config.clone(),
        };
        let report = compare(&[case]);
        prop_assert!(report.summary.mismatches.is_empty(), "{}", dpi.to_text());
        prop_assert_eq!(report.summary.audit_violations, 0);

        // The simulated oracle never contradicts itself, so a completed
        // session ends on the planted fault.
        if let Ok(out) = run_session(&dpi, &config, &mut SimulatedOracle::new(actual)) {
            prop_assert_eq!(out.diagnosis, actual);
            let ranking = Ranking::new(order, config.pr.clone().unwrap());
            for rec in &out.log {
                prop_assert_eq!(best_first_violation(&rec.diagnoses, &ranking), None);
            }
        }
    }
}
