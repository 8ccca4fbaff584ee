//! Extraction of reified tuples and their aggregated arguments.

use std::sync::Arc;

use log::warn;

use crate::config::{Direction, MatchingConfig};
use crate::error::{Error, Result};
use crate::kb::{ClassId, IndividualId, KnowledgeBase};
use crate::preorder::{ArgumentValue, MemberSet};

/// Source label given to tuples without provenance.
pub const UNKNOWN_SOURCE: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleRecord {
    pub id: IndividualId,
    pub source: Arc<str>,
    pub args: Vec<ArgumentValue>,
}

#[cfg(feature = "parallel")]
fn map_tuples<F>(ids: &[IndividualId], f: F) -> Vec<TupleRecord>
where
    F: Fn(IndividualId) -> TupleRecord + Sync + Send,
{
    use rayon::prelude::*;
    ids.par_iter().map(|&t| f(t)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_tuples<F>(ids: &[IndividualId], f: F) -> Vec<TupleRecord>
where
    F: Fn(IndividualId) -> TupleRecord,
{
    ids.iter().map(|&t| f(t)).collect()
}

/// One record per canonical instance of the tuple class, sorted by IRI.
pub fn extract_tuples(kb: &KnowledgeBase, config: &MatchingConfig) -> Result<Vec<TupleRecord>> {
    check_ids(kb, config)?;
    let ids: Vec<IndividualId> = kb
        .individuals()
        .filter(|&e| kb.is_canonical(e) && kb.instantiates(e, config.tuple_class))
        .collect();
    Ok(map_tuples(&ids, |t| extract_one(kb, config, t)))
}

fn check_ids(kb: &KnowledgeBase, config: &MatchingConfig) -> Result<()> {
    let class_ok = |c: ClassId| c.index() < kb.class_count();
    if !class_ok(config.tuple_class) || !config.arguments.iter().all(|a| class_ok(a.role_class)) {
        return Err(Error::config("configuration names a class the knowledge base does not have"));
    }
    let preds = config
        .arguments
        .iter()
        .map(|a| a.predicate)
        .chain(config.source_predicate)
        .chain(config.closed_predicate)
        .chain(
            config
                .partition
                .blocks
                .iter()
                .flat_map(|b| b.dependency_predicates.iter().copied()),
        );
    for p in preds {
        if p.index() >= kb.predicate_count() {
            return Err(Error::config("configuration names a predicate the knowledge base does not have"));
        }
    }
    for a in &config.arguments {
        a.preorder.check(kb)?;
    }
    for b in &config.partition.blocks {
        b.preorder.check(kb)?;
    }
    Ok(())
}

fn source_label(kb: &KnowledgeBase, config: &MatchingConfig, t: IndividualId) -> Arc<str> {
    let Some(sp) = config.source_predicate else {
        return Arc::from(UNKNOWN_SOURCE);
    };
    let mut labels: Vec<&str> = kb
        .out_links(t)
        .iter()
        .filter(|(p, _)| *p == sp)
        .map(|&(_, o)| kb.individual_iri(o))
        .collect();
    labels.sort_unstable();
    if labels.len() > 1 {
        warn!(
            "tuple <{}> has {} source labels; using <{}>",
            kb.individual_iri(t),
            labels.len(),
            labels[0]
        );
    }
    Arc::from(labels.first().copied().unwrap_or(UNKNOWN_SOURCE))
}

fn extract_one(kb: &KnowledgeBase, config: &MatchingConfig, t: IndividualId) -> TupleRecord {
    let args = config
        .arguments
        .iter()
        .map(|schema| {
            let subs = kb.sub_predicates(schema.predicate);
            let links = match schema.direction {
                Direction::TupleToMember => kb.out_links(t),
                Direction::MemberToTuple => kb.in_links(t),
            };
            let members: Vec<IndividualId> = links
                .iter()
                .filter(|(p, _)| subs.binary_search(p).is_ok())
                .map(|&(_, e)| e)
                .filter(|&e| kb.instantiates(e, schema.role_class))
                .collect();
            if !members.is_empty() {
                return ArgumentValue::Members(MemberSet::from_canonical(members));
            }
            let closed = match (config.closed_predicate, schema.closed_marker) {
                (Some(cp), Some(marker)) => kb.out_links(t).contains(&(cp, marker)),
                _ => false,
            };
            if closed {
                ArgumentValue::Members(MemberSet::empty())
            } else {
                ArgumentValue::Unknown
            }
        })
        .collect();
    TupleRecord {
        id: t,
        source: source_label(kb, config, t),
        args,
    }
}

/// Aggregated arguments for every block of the partition.
///
/// A block is the union of its specified arguments, or unknown when none
/// is specified. Dependency expansion then adds, for every member of a
/// block with dependency predicates, the individuals it depends on to each
/// specified block whose role classes they instantiate.
pub fn aggregate_all(t: &TupleRecord, config: &MatchingConfig, kb: &KnowledgeBase) -> Vec<ArgumentValue> {
    let blocks = &config.partition.blocks;
    let mut acc: Vec<Option<Vec<IndividualId>>> = blocks
        .iter()
        .map(|b| {
            let mut specified = b.positions.iter().filter_map(|&i| t.args[i].members()).peekable();
            specified.peek()?;
            Some(specified.flat_map(|m| m.iter()).collect())
        })
        .collect();

    let block_roles: Vec<Vec<ClassId>> = blocks
        .iter()
        .map(|b| b.positions.iter().map(|&i| config.arguments[i].role_class).collect())
        .collect();

    let mut additions: Vec<(usize, IndividualId)> = Vec::new();
    for (k, b) in blocks.iter().enumerate() {
        if b.dependency_predicates.is_empty() {
            continue;
        }
        let Some(own) = &acc[k] else { continue };
        let deps: Vec<_> = b
            .dependency_predicates
            .iter()
            .flat_map(|&d| kb.sub_predicates(d))
            .collect();
        for &m in own {
            for &(p, x) in kb.out_links(m) {
                if !deps.contains(&p) {
                    continue;
                }
                let targets: Vec<usize> = block_roles
                    .iter()
                    .enumerate()
                    .filter(|(_, roles)| roles.iter().any(|&r| kb.instantiates(x, r)))
                    .map(|(j, _)| j)
                    .collect();
                if targets.is_empty() {
                    warn!(
                        "dependency <{}> of <{}> matches no role class; dropped",
                        kb.individual_iri(x),
                        kb.individual_iri(m)
                    );
                }
                additions.extend(targets.into_iter().map(|j| (j, x)));
            }
        }
    }
    for (j, x) in additions {
        if let Some(members) = &mut acc[j] {
            members.push(x);
        }
    }

    acc.into_iter()
        .map(|a| match a {
            Some(members) => ArgumentValue::Members(MemberSet::from_canonical(members)),
            None => ArgumentValue::Unknown,
        })
        .collect()
}

/// Aggregated argument of block `k`.
pub fn aggregate(t: &TupleRecord, k: usize, config: &MatchingConfig, kb: &KnowledgeBase) -> ArgumentValue {
    aggregate_all(t, config, kb).swap_remove(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigDocument;
    use crate::kb::{RDFS_SUBPROPERTY_OF, RDF_TYPE};
    use crate::ntriples::Triple;

    const EX: &str = "http://ex/";

    fn ex(x: &str) -> String {
        format!("{EX}{x}")
    }

    fn triples(list: &[(&str, &str, &str)]) -> Vec<Triple> {
        list.iter()
            .map(|(s, p, o)| {
                let f = |x: &str| if x.contains("://") { x.to_string() } else { ex(x) };
                Triple::from_strs(&f(s), &f(p), &f(o))
            })
            .collect()
    }

    /// Drug / phenotype schema with causes and isAssociatedWith arguments.
    fn config() -> ConfigDocument {
        ConfigDocument::from_json(&format!(
            r#"{{
              "tuple_class": "{ex}Rel",
              "source_predicate": "{ex}source",
              "closed_predicate": "{ex}closed",
              "arguments": [
                {{"index": 1, "role_class": "{ex}Drug", "predicate": "{ex}causes", "direction": "member_to_tuple", "preorder": {{"kind": "subset"}}}},
                {{"index": 2, "role_class": "{ex}Phenotype", "predicate": "{ex}causes", "direction": "tuple_to_member", "preorder": {{"kind": "subset"}}, "closed_marker": "{ex}noCausedPhenotype"}},
                {{"index": 3, "role_class": "{ex}Phenotype", "predicate": "{ex}isAssociatedWith", "direction": "tuple_to_member", "preorder": {{"kind": "subset"}}}}
              ],
              "partition": [
                {{"indices": [1], "preorder": {{"kind": "subset"}}}},
                {{"indices": [2, 3], "preorder": {{"kind": "subset"}}, "dependency_predicates": ["{ex}dependsOn"]}}
              ],
              "gammas": {{"unknown": 2, "sim": 0.8, "comp": 2}}
            }}"#,
            ex = EX
        ))
        .unwrap()
    }

    fn setup(list: &[(&str, &str, &str)]) -> (KnowledgeBase, MatchingConfig) {
        let doc = config();
        let kb = KnowledgeBase::load(&triples(list), &doc.load_options()).unwrap();
        let cfg = doc.resolve(&kb).unwrap();
        (kb, cfg)
    }

    fn members(kb: &KnowledgeBase, names: &[&str]) -> ArgumentValue {
        ArgumentValue::Members(MemberSet::new(kb, names.iter().map(|n| kb.individual(&ex(n)).unwrap())))
    }

    const HIERARCHY: [(&str, &str, &str); 2] = [
        ("causes", RDFS_SUBPROPERTY_OF, "influences"),
        ("influences", RDFS_SUBPROPERTY_OF, "isAssociatedWith"),
    ];

    #[test]
    fn predicate_hierarchy_and_unknowns() {
        let mut data = HIERARCHY.to_vec();
        data.extend([
            ("pgt1", RDF_TYPE, "Rel"),
            ("pgt2", RDF_TYPE, "Rel"),
            ("ph1", RDF_TYPE, "Phenotype"),
            ("ph2", RDF_TYPE, "Phenotype"),
            ("pgt1", "causes", "ph1"),
            ("pgt1", "isAssociatedWith", "ph2"),
            ("pgt2", "isAssociatedWith", "ph1"),
            ("pgt2", "isAssociatedWith", "ph2"),
            ("pgt1", "source", "lit"),
        ]);
        let (kb, cfg) = setup(&data);
        let tuples = extract_tuples(&kb, &cfg).unwrap();
        assert_eq!(tuples.len(), 2);
        let (t1, t2) = (&tuples[0], &tuples[1]);
        assert_eq!(kb.individual_iri(t1.id), ex("pgt1"));
        assert_eq!(&*t1.source, ex("lit").as_str());
        assert_eq!(&*t2.source, UNKNOWN_SOURCE);
        assert_eq!(t1.args[0], ArgumentValue::Unknown);
        assert_eq!(t1.args[1], members(&kb, &["ph1"]));
        assert_eq!(t1.args[2], members(&kb, &["ph1", "ph2"]));
        assert_eq!(t2.args[1], ArgumentValue::Unknown);
        assert_eq!(t2.args[2], members(&kb, &["ph1", "ph2"]));
    }

    #[test]
    fn role_class_filters_members_and_closed_marker() {
        let mut data = HIERARCHY.to_vec();
        data.extend([
            ("t", RDF_TYPE, "Rel"),
            ("w", RDF_TYPE, "Drug"),
            ("w", "causes", "t"),
            ("stranger", "causes", "t"),
            ("t", "closed", "noCausedPhenotype"),
        ]);
        let (kb, cfg) = setup(&data);
        let t = &extract_tuples(&kb, &cfg).unwrap()[0];
        assert_eq!(t.args[0], members(&kb, &["w"]));
        assert_eq!(t.args[1], ArgumentValue::Members(MemberSet::empty()));
        assert_eq!(t.args[2], ArgumentValue::Unknown);
    }

    #[test]
    fn extraction_ignores_triple_order() {
        let mut data = HIERARCHY.to_vec();
        data.extend([
            ("b", RDF_TYPE, "Rel"),
            ("a", RDF_TYPE, "Rel"),
            ("d1", RDF_TYPE, "Drug"),
            ("d2", RDF_TYPE, "Drug"),
            ("d1", "causes", "a"),
            ("d2", "influences", "b"),
            ("d2", "causes", "a"),
        ]);
        let doc = config();
        let forward = triples(&data);
        let mut backward = forward.clone();
        backward.reverse();
        let render = |ts: &[Triple]| {
            let kb = KnowledgeBase::load(ts, &doc.load_options()).unwrap();
            let cfg = doc.resolve(&kb).unwrap();
            extract_tuples(&kb, &cfg)
                .unwrap()
                .iter()
                .map(|t| {
                    let args: Vec<Option<Vec<String>>> = t
                        .args
                        .iter()
                        .map(|a| a.members().map(|m| m.iter().map(|e| kb.individual_iri(e).to_string()).collect()))
                        .collect();
                    (kb.individual_iri(t.id).to_string(), args)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(render(&forward), render(&backward));
    }

    #[test]
    fn aggregation_unions_specified_arguments() {
        let mut data = HIERARCHY.to_vec();
        data.extend([
            ("t", RDF_TYPE, "Rel"),
            ("a", RDF_TYPE, "Phenotype"),
            ("b", RDF_TYPE, "Phenotype"),
            ("t", "causes", "a"),
            ("t", "isAssociatedWith", "b"),
            ("u", RDF_TYPE, "Rel"),
        ]);
        let (kb, cfg) = setup(&data);
        let tuples = extract_tuples(&kb, &cfg).unwrap();
        let t = &tuples[0];
        assert_eq!(aggregate(t, 0, &cfg, &kb), ArgumentValue::Unknown);
        // causes ⊑ isAssociatedWith, so argument 3 is {a, b}
        assert_eq!(aggregate(t, 1, &cfg, &kb), members(&kb, &["a", "b"]));
        let u = &tuples[1];
        assert_eq!(aggregate_all(u, &cfg, &kb), vec![ArgumentValue::Unknown, ArgumentValue::Unknown]);
    }

    #[test]
    fn dependency_expansion_routes_by_role() {
        let mut data = HIERARCHY.to_vec();
        data.extend([
            ("t", RDF_TYPE, "Rel"),
            ("warfarin", RDF_TYPE, "Drug"),
            ("aspirin", RDF_TYPE, "Drug"),
            ("hemorrhage", RDF_TYPE, "Phenotype"),
            ("wch", RDF_TYPE, "Phenotype"),
            ("aspirin", "causes", "t"),
            ("t", "causes", "wch"),
            ("wch", "dependsOn", "hemorrhage"),
            ("wch", "dependsOn", "warfarin"),
            ("wch", "dependsOn", "unrelated"),
        ]);
        let (kb, cfg) = setup(&data);
        let t = &extract_tuples(&kb, &cfg).unwrap()[0];
        let agg = aggregate_all(t, &cfg, &kb);
        assert_eq!(agg[0], members(&kb, &["aspirin", "warfarin"]));
        assert_eq!(agg[1], members(&kb, &["hemorrhage", "wch"]));
    }
}
