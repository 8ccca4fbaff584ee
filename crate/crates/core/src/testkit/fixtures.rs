//! Small hand-built knowledge bases reproducing the worked examples.

use crate::config::{ConfigDocument, MatchingConfig};
use crate::error::Result;
use crate::kb::{
    KnowledgeBase, LoadOptions, PredicateId, ViewDecl, ViewId, RDFS_SUBCLASS_OF, RDF_TYPE,
};
use crate::ntriples::{parse_str, write_triples, Triple};
use crate::preorder::MemberSet;
use crate::tuples::{extract_tuples, TupleRecord};

pub const EX: &str = "http://example.org/";
pub const PGX: &str = "http://example.org/pgx/";

/// Triples and configuration of the two-tuple phenotype example.
pub const PHENOTYPE_PAIR_KB: &str = include_str!("../../fixtures/pgx/kb.nt");
pub const PHENOTYPE_PAIR_CONFIG: &str = include_str!("../../fixtures/pgx/config.json");

pub fn ex(local: &str) -> String {
    format!("{EX}{local}")
}

fn expand(x: &str, ns: &str) -> String {
    if x.contains("://") {
        x.to_string()
    } else {
        format!("{ns}{x}")
    }
}

/// Builds triples from short names, prefixing `ns` to any term that is not
/// already an absolute IRI.
pub fn triples_in(ns: &str, list: &[(&str, &str, &str)]) -> Vec<Triple> {
    list.iter()
        .map(|(s, p, o)| Triple::from_strs(&expand(s, ns), &expand(p, ns), &expand(o, ns)))
        .collect()
}

pub fn triples(list: &[(&str, &str, &str)]) -> Vec<Triple> {
    triples_in(EX, list)
}

/// Canonical member set of the named individuals of [`EX`].
pub fn members(kb: &KnowledgeBase, names: &[&str]) -> MemberSet {
    MemberSet::new(
        kb,
        names
            .iter()
            .map(|n| kb.individual(&expand(n, EX)).expect("fixture individual")),
    )
}

/// `partOf(e3, e1)` plus an unrelated `e2`, with `partOf` designated.
pub struct LinkFixture {
    pub kb: KnowledgeBase,
    pub part_of: PredicateId,
}

pub fn part_of_chain() -> LinkFixture {
    let data = triples(&[("e3", "partOf", "e1"), ("e2", RDF_TYPE, "Thing2")]);
    let options = LoadOptions {
        reflexive_transitive: vec![ex("partOf")],
        ..LoadOptions::default()
    };
    let kb = KnowledgeBase::load(&data, &options).expect("fixture loads");
    let part_of = kb.predicate(&ex("partOf")).expect("partOf");
    LinkFixture { kb, part_of }
}

/// Expected relation between the two sides of a subsumption example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OntoVerdict {
    /// Left is below right and not the converse.
    StrictlyBelow,
    Incomparable,
    Equivalent,
}

pub struct OntoCase {
    pub label: char,
    pub kb: KnowledgeBase,
    pub view: ViewId,
    pub left: MemberSet,
    pub right: MemberSet,
    pub expected: OntoVerdict,
}

/// The class tree shared by the six subsumption examples.
pub fn class_tree() -> Vec<(&'static str, &'static str, &'static str)> {
    [
        ("oc2", "oc1"),
        ("oc4", "oc1"),
        ("oc3", "oc1"),
        ("oc5", "oc2"),
        ("oc6", "oc2"),
        ("oc10", "oc4"),
        ("oc11", "oc4"),
        ("oc7", "oc3"),
        ("oc8", "oc7"),
        ("oc9", "oc8"),
    ]
    .into_iter()
    .map(|(a, b)| (a, RDFS_SUBCLASS_OF, b))
    .collect()
}

/// Label, the classes of `e1`, `e2` and `e3`, and the expected verdict.
type CaseSpec = (char, &'static [&'static str], &'static [&'static str], &'static [&'static str], OntoVerdict);

/// Cases (a) to (f): `e1` on the left, the others on the right.
pub fn subsumption_cases() -> Vec<OntoCase> {
    use OntoVerdict::*;
    let cases: [CaseSpec; 6] = [
        ('a', &["oc8"], &["oc7"], &["oc9"], StrictlyBelow),
        ('b', &["oc8", "oc6"], &["oc8"], &["oc2"], StrictlyBelow),
        ('c', &["oc11"], &["oc4"], &["oc2"], StrictlyBelow),
        ('d', &["oc11"], &["oc4", "oc2"], &[], StrictlyBelow),
        ('e', &["oc10", "oc2"], &["oc4"], &[], Incomparable),
        ('f', &["oc8"], &["oc8"], &[], Equivalent),
    ];
    cases
        .into_iter()
        .map(|(label, e1, e2, e3, expected)| {
            let mut data = class_tree();
            data.extend(e1.iter().map(|c| ("e1", RDF_TYPE, *c)));
            data.extend(e2.iter().map(|c| ("e2", RDF_TYPE, *c)));
            data.extend(e3.iter().map(|c| ("e3", RDF_TYPE, *c)));
            let options = LoadOptions {
                views: vec![ViewDecl::new("o", [ex("oc1")])],
                ..LoadOptions::default()
            };
            let kb = KnowledgeBase::load(&triples(&data), &options).expect("fixture loads");
            let view = kb.view("o").expect("view");
            let left = members(&kb, &["e1"]);
            let right = if e3.is_empty() {
                members(&kb, &["e2"])
            } else {
                members(&kb, &["e2", "e3"])
            };
            OntoCase {
                label,
                kb,
                view,
                left,
                right,
                expected,
            }
        })
        .collect()
}

/// An untyped `headache` and a `pain` typed `Pain`, with `Headache ⊑ Pain`.
pub struct HeadacheCase {
    pub kb: KnowledgeBase,
    pub view: ViewId,
    pub headache: MemberSet,
    pub pain: MemberSet,
}

/// With `keep_top`, the top class is left in every instantiated-class set.
/// That setting is wrong and exists to show why the exclusion is needed.
pub fn headache_case(keep_top: bool) -> HeadacheCase {
    let data = triples(&[
        ("Headache", RDFS_SUBCLASS_OF, "Pain"),
        ("Pain", RDFS_SUBCLASS_OF, crate::kb::OWL_THING),
        ("pain", RDF_TYPE, "Pain"),
        ("headache", "mentionedIn", "report"),
    ]);
    let decl = ViewDecl::new("mesh", Vec::<String>::new());
    let options = LoadOptions {
        views: vec![if keep_top { decl.keeping_top() } else { decl }],
        ..LoadOptions::default()
    };
    let kb = KnowledgeBase::load(&data, &options).expect("fixture loads");
    let view = kb.view("mesh").expect("view");
    HeadacheCase {
        headache: members(&kb, &["headache"]),
        pain: members(&kb, &["pain"]),
        kb,
        view,
    }
}

/// A knowledge base and configuration ready for tuple matching.
#[derive(Debug, Clone)]
pub struct MatchFixture {
    pub triples: Vec<Triple>,
    pub config: ConfigDocument,
}

impl MatchFixture {
    pub fn load(&self) -> Result<(KnowledgeBase, MatchingConfig, Vec<TupleRecord>)> {
        let kb = KnowledgeBase::load(&self.triples, &self.config.load_options())?;
        let config = self.config.resolve(&kb)?;
        let tuples = extract_tuples(&kb, &config)?;
        Ok((kb, config, tuples))
    }

    pub fn ntriples(&self) -> String {
        let mut buf = Vec::new();
        write_triples(&mut buf, &self.triples).expect("writing to memory");
        String::from_utf8(buf).expect("IRIs are UTF-8")
    }
}

/// Nine-argument drug / genetic factor / phenotype configuration.
pub fn pgx_config() -> ConfigDocument {
    ConfigDocument::from_json(PHENOTYPE_PAIR_CONFIG).expect("fixture config parses")
}

/// `pgt1` causes `ph1` and is associated with `ph2`; `pgt2` is associated
/// with both. Both involve warfarin and CYP2C9.
pub fn phenotype_pair() -> MatchFixture {
    MatchFixture {
        triples: parse_str(PHENOTYPE_PAIR_KB).expect("fixture parses"),
        config: pgx_config(),
    }
}

fn pgx_tuple(name: &str, drug: bool, gene: bool, source: &str) -> Vec<Triple> {
    let mut list = vec![
        (name, RDF_TYPE, "PharmacogenomicRelationship"),
        (name, "source", source),
        (name, "causes", "cardiovascular_diseases"),
    ];
    if drug {
        list.push(("warfarin", "causes", name));
    }
    if gene {
        list.push(("CYP2C9", "causes", name));
    }
    triples_in(PGX, &list)
}

fn pgx_individuals() -> Vec<Triple> {
    triples_in(
        PGX,
        &[
            ("warfarin", RDF_TYPE, "Drug"),
            ("CYP2C9", RDF_TYPE, "GeneticFactor"),
            ("cardiovascular_diseases", RDF_TYPE, "Phenotype"),
            ("cardiovascular_diseases", RDF_TYPE, "mesh/C14"),
            ("causes", crate::kb::RDFS_SUBPROPERTY_OF, "influences"),
            ("influences", crate::kb::RDFS_SUBPROPERTY_OF, "isAssociatedWith"),
        ],
    )
}

/// The single tuple relating warfarin, CYP2C9 and cardiovascular diseases.
pub fn single_tuple() -> MatchFixture {
    let mut t = pgx_individuals();
    t.extend(pgx_tuple("pgt_1", true, true, "source/literature"));
    MatchFixture {
        triples: t,
        config: pgx_config(),
    }
}

/// `pgt_1` and a copy whose genetic factor is missing.
pub fn partial_copy() -> MatchFixture {
    let mut t = pgx_individuals();
    t.extend(pgx_tuple("pgt_1", true, true, "source/literature"));
    t.extend(pgx_tuple("pgt_1_copy", true, false, "source/literature"));
    MatchFixture {
        triples: t,
        config: pgx_config(),
    }
}

/// Three tuples with identical arguments from one source.
pub fn three_identical() -> MatchFixture {
    let mut t = pgx_individuals();
    for name in ["a", "b", "c"] {
        t.extend(pgx_tuple(name, true, true, "source/literature"));
    }
    MatchFixture {
        triples: t,
        config: pgx_config(),
    }
}

/// Individuals `a`, `b`, `c` with no relations between them.
pub fn unrelated_individuals() -> KnowledgeBase {
    let data = triples(&[("a", "p", "x"), ("b", "p", "x"), ("c", "p", "x")]);
    KnowledgeBase::load(&data, &LoadOptions::default()).expect("fixture loads")
}
