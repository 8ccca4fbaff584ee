use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tuplematch::kb::KnowledgeBase;
use tuplematch::matcher::{close_transitive, match_all_with, Execution};
use tuplematch::preorder::{arg_leq, ArgumentValue, PreorderSpec};
use tuplematch::rules::{MatchLink, RelatednessLevel};
use tuplematch::testkit::{generate, law_instance, GeneratorParams};
use tuplematch::tuples::extract_tuples;

fn value(inst: &tuplematch::testkit::LawInstance, rng: &mut ChaCha8Rng, unknown: bool) -> ArgumentValue {
    if unknown {
        ArgumentValue::Unknown
    } else {
        ArgumentValue::Members(inst.random_set(rng, 5))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn preorders_are_reflexive_and_transitive(seed in any::<u64>(), unknowns in any::<[bool; 3]>()) {
        let inst = law_instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = value(&inst, &mut rng, unknowns[0]);
        let b = value(&inst, &mut rng, unknowns[1]);
        let c = value(&inst, &mut rng, unknowns[2]);
        for spec in [PreorderSpec::Subset, PreorderSpec::LinkClosure(inst.link), PreorderSpec::OntoSubsumption(inst.view)] {
            let leq = |x: &ArgumentValue, y: &ArgumentValue| arg_leq(x, y, spec, &inst.kb).unwrap();
            prop_assert!(leq(&a, &a));
            prop_assert!(leq(&a, &ArgumentValue::Unknown));
            if leq(&a, &b) && leq(&b, &c) {
                prop_assert!(leq(&a, &c));
            }
        }
    }

    #[test]
    fn closure_is_idempotent(edges in proptest::collection::vec((0u32..8, 0u32..8, 0usize..5), 0..20)) {
        let kb = tuplematch::testkit::fixtures::unrelated_individuals();
        let ids: Vec<_> = kb.individuals().collect();
        let links: Vec<MatchLink> = edges
            .into_iter()
            .filter(|(a, b, _)| a != b)
            .map(|(a, b, l)| MatchLink {
                origin: ids[a as usize % ids.len()],
                destination: ids[b as usize % ids.len()],
                level: RelatednessLevel::ALL[l],
                induced: false,
            })
            .filter(|l| l.origin != l.destination)
            .collect();
        let once = close_transitive(&links);
        prop_assert_eq!(close_transitive(&once), once.clone());
        prop_assert!(once.iter().all(|l| l.origin != l.destination));
        prop_assert!(links.iter().all(|l| once.contains(l)));
    }
}

#[test]
fn execution_modes_agree() {
    for seed in [1u64, 2, 3] {
        let inst = generate(&GeneratorParams { seed, n_tuples: 150, ..GeneratorParams::default() });
        let kb = KnowledgeBase::load(&inst.triples, &inst.config.load_options()).unwrap();
        let cfg = inst.config.resolve(&kb).unwrap();
        let tuples = extract_tuples(&kb, &cfg).unwrap();
        let seq = match_all_with(&tuples, &cfg, &kb, Execution::Sequential).unwrap();
        let par = match_all_with(&tuples, &cfg, &kb, Execution::Parallel { threads: Some(3) }).unwrap();
        assert_eq!(seq, par);
        for rule in 1..=5u8 {
            let n = seq.links.iter().filter(|l| l.rule() == rule).count() as u64;
            assert_eq!(seq.matrix.total(rule), n);
        }
    }
}
