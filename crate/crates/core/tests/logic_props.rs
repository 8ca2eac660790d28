use proptest::prelude::*;
use seqdiag_core::{Formula, Reasoner};

const VARS: [&str; 4] = ["A", "B", "C", "D"];

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        8 => (0..VARS.len()).prop_map(|i| Formula::var(VARS[i])),
        1 => Just(Formula::True),
        1 => Just(Formula::False),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::and),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

fn assignments() -> impl Iterator<Item = impl Fn(&str) -> bool> {
    (0u32..1 << VARS.len()).map(|bits| {
        move |name: &str| {
            let i = VARS
                .iter()
                .position(|v| *v == name)
                .expect("known variable");
            bits >> i & 1 == 1
        }
    })
}

fn satisfiable_by_table(fs: &[&Formula]) -> bool {
    assignments().any(|a| fs.iter().all(|f| f.eval(&a)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn solver_agrees_with_truth_tables(fs in prop::collection::vec(formula(), 1..4)) {
        let refs: Vec<&Formula> = fs.iter().collect();
        prop_assert_eq!(Reasoner::new().is_consistent(refs.iter().copied()), satisfiable_by_table(&refs));
    }

    #[test]
    fn entailment_is_refutation(fs in prop::collection::vec(formula(), 0..3), q in formula()) {
        let mut r = Reasoner::new();
        let negated = Formula::not(q.clone());
        let with_neg: Vec<&Formula> = fs.iter().chain([&negated]).collect();
        prop_assert_eq!(r.entails(&fs, &q), !r.is_consistent(with_neg));
    }

    #[test]
    fn entailment_is_monotone(fs in prop::collection::vec(formula(), 0..3), extra in formula(), q in formula()) {
        let mut r = Reasoner::new();
        if r.entails(&fs, &q) {
            let more: Vec<&Formula> = fs.iter().chain([&extra]).collect();
            prop_assert!(r.entails(more, &q));
        }
    }

    #[test]
    fn printing_is_a_parse_fixpoint(f in formula()) {
        let printed = f.to_string();
        let parsed: Formula = printed.parse().unwrap();
        prop_assert_eq!(parsed.to_string(), printed);
        prop_assert!(assignments().all(|a| parsed.eval(&a) == f.eval(&a)));
    }
}
