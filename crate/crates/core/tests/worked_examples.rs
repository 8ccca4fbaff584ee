use tuplematch::matcher::{close_transitive, match_all};
use tuplematch::preorder::{link_leq, MemberSet};
use tuplematch::rules::{match_pair, ssd, MatchLink, RelatednessLevel};
use tuplematch::testkit::fixtures;

#[test]
fn single_tuple_has_no_links() {
    let (kb, cfg, tuples) = fixtures::single_tuple().load().unwrap();
    assert_eq!(tuples.len(), 1);
    assert!(match_all(&tuples, &cfg, &kb).unwrap().links.is_empty());
}

#[test]
fn copy_missing_a_gene_is_less_specific() {
    let (kb, cfg, tuples) = fixtures::partial_copy().load().unwrap();
    let m = match_pair(&tuples[0], &tuples[1], &cfg, &kb).unwrap().unwrap();
    assert_eq!(m.level, RelatednessLevel::MoreSpecific);
    assert!(m.forward, "pgt_1 is the more specific tuple");
    assert!(kb.individual_iri(tuples[0].id).ends_with("pgt_1"));
}

#[test]
fn three_identical_tuples_give_six_links() {
    let (kb, cfg, tuples) = fixtures::three_identical().load().unwrap();
    let r = match_all(&tuples, &cfg, &kb).unwrap();
    assert_eq!(r.links.len(), 6);
    assert!(r.links.iter().all(|l| l.level == RelatednessLevel::Identical && !l.induced));
    let src = format!("{}source/literature", fixtures::PGX);
    assert_eq!(r.matrix.count(1, &src, &src), 6);
}

#[test]
fn chain_of_two_gains_one_induced_link() {
    let kb = fixtures::unrelated_individuals();
    let [a, b, c] = ["a", "b", "c"].map(|n| kb.individual(&fixtures::ex(n)).unwrap());
    let link = |o, d| MatchLink { origin: o, destination: d, level: RelatednessLevel::MoreSpecific, induced: false };
    let closed = close_transitive(&[link(a, b), link(b, c)]);
    assert_eq!(closed.len(), 3);
    assert!(closed.contains(&MatchLink { induced: true, ..link(a, c) }));
}

#[test]
fn semantic_set_difference_examples() {
    let kb = fixtures::unrelated_individuals();
    let set = |n: &[&str]| fixtures::members(&kb, n);
    let spec = tuplematch::preorder::PreorderSpec::Subset;
    assert_eq!(ssd(&set(&["a", "b"]), &set(&["a", "c"]), spec, &kb).unwrap(), set(&["b"]));
    assert!(ssd(&set(&["a"]), &set(&["a", "b"]), spec, &kb).unwrap().is_empty());

    let f = fixtures::part_of_chain();
    let set = |n: &[&str]| fixtures::members(&f.kb, n);
    let link = tuplematch::preorder::PreorderSpec::LinkClosure(f.part_of);
    assert!(ssd(&set(&["e3"]), &set(&["e1"]), link, &f.kb).unwrap().is_empty());
    assert!(link_leq(set(&["e3"]).as_slice(), set(&["e1"]).as_slice(), f.part_of, &f.kb).unwrap());
    assert!(MemberSet::empty().is_empty());
}
