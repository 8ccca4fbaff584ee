//! Reference matcher that evaluates every definition literally.
//!
//! It works on raw triples and strings only. Identity classes, subsumption,
//! instantiated classes and link reachability are recomputed by plain graph
//! search on every query. Slow on purpose; single-threaded.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::Ratio;

use crate::config::{ConfigDocument, Direction, PreorderDoc};
use crate::error::{Error, Result};
use crate::kb::{OWL_SAME_AS, RDFS_SUBCLASS_OF, RDFS_SUBPROPERTY_OF, RDF_TYPE};
use crate::links::LinkRecord;
use crate::ntriples::Triple;
use crate::rules::RelatednessLevel;
use crate::tuples::UNKNOWN_SOURCE;

type Set<'a> = BTreeSet<&'a str>;

/// `None` stands for an unknown argument.
type Arg<'a> = Option<Set<'a>>;

struct Naive<'a> {
    rdf_type: Vec<(&'a str, &'a str)>,
    sub_class: Vec<(&'a str, &'a str)>,
    sub_prop: Vec<(&'a str, &'a str)>,
    same_as: Vec<(&'a str, &'a str)>,
    links: Vec<(&'a str, &'a str, &'a str)>,
    top: &'a str,
}

fn search<'a>(start: &'a str, next: impl Fn(&'a str) -> Vec<&'a str>) -> Set<'a> {
    let mut seen: Set<'a> = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for y in next(x) {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

impl<'a> Naive<'a> {
    fn new(triples: &'a [Triple], doc: &'a ConfigDocument) -> Self {
        let vocab = &doc.vocabulary;
        let rdf_type = vocab.rdf_type.as_deref().unwrap_or(RDF_TYPE);
        let sub_class_of = vocab.sub_class_of.as_deref().unwrap_or(RDFS_SUBCLASS_OF);
        let sub_property_of = vocab.sub_property_of.as_deref().unwrap_or(RDFS_SUBPROPERTY_OF);
        let same_as = vocab.same_as.as_deref().unwrap_or(OWL_SAME_AS);
        let mut n = Naive {
            rdf_type: Vec::new(),
            sub_class: Vec::new(),
            sub_prop: Vec::new(),
            same_as: Vec::new(),
            links: Vec::new(),
            top: &doc.top_class,
        };
        for t in triples {
            let (s, p, o) = (t.subject.as_str(), t.predicate.as_str(), t.object.as_str());
            if p == rdf_type {
                n.rdf_type.push((s, o));
            } else if p == sub_class_of {
                n.sub_class.push((s, o));
            } else if p == sub_property_of {
                n.sub_prop.push((s, o));
            } else if p == same_as {
                n.same_as.push((s, o));
            } else {
                n.links.push((s, p, o));
            }
        }
        n
    }

    fn identity_class(&self, x: &'a str) -> Set<'a> {
        search(x, |y| {
            self.same_as
                .iter()
                .filter_map(|&(s, o)| {
                    if s == y {
                        Some(o)
                    } else if o == y {
                        Some(s)
                    } else {
                        None
                    }
                })
                .collect()
        })
    }

    fn canon(&self, x: &'a str) -> &'a str {
        self.identity_class(x).into_iter().next().expect("contains x")
    }

    fn same(&self, x: &str, y: &'a str) -> bool {
        self.identity_class(y).contains(x)
    }

    fn superclasses(&self, c: &'a str) -> Set<'a> {
        search(c, |d| {
            self.sub_class
                .iter()
                .filter(|&&(s, _)| s == d)
                .map(|&(_, o)| o)
                .collect()
        })
    }

    fn subclass(&self, c: &'a str, d: &str) -> bool {
        c == d || d == self.top || self.superclasses(c).contains(d)
    }

    fn strictly_subclass(&self, c: &'a str, d: &'a str) -> bool {
        self.subclass(c, d) && !self.subclass(d, c)
    }

    fn subproperty(&self, p: &'a str, q: &str) -> bool {
        search(p, |x| {
            self.sub_prop
                .iter()
                .filter(|&&(s, _)| s == x)
                .map(|&(_, o)| o)
                .collect()
        })
        .contains(q)
    }

    /// Types declared on any member of `e`'s identity class, closed upward,
    /// top excluded.
    fn types(&self, e: &'a str) -> Set<'a> {
        let mut out = Set::new();
        for member in self.identity_class(e) {
            for &(s, c) in &self.rdf_type {
                if s == member {
                    out.extend(self.superclasses(c));
                }
            }
        }
        out.remove(self.top);
        out
    }

    fn instantiates(&self, e: &'a str, c: &str) -> bool {
        c == self.top || self.types(e).contains(c)
    }

    fn in_view(&self, c: &'a str, roots: &[String]) -> bool {
        c != self.top && (roots.is_empty() || roots.iter().any(|r| self.subclass(c, r)))
    }

    fn msci(&self, e: &'a str, roots: &[String]) -> Set<'a> {
        let ci: Vec<&'a str> = self
            .types(e)
            .into_iter()
            .filter(|c| self.in_view(c, roots))
            .collect();
        ci.iter()
            .copied()
            .filter(|&c| !ci.iter().any(|&d| self.strictly_subclass(d, c)))
            .collect()
    }

    fn reachable(&self, from: &'a str, to: &'a str, p: &str) -> bool {
        let reached = search(self.canon(from), |x| {
            self.links
                .iter()
                .filter(|&&(s, q, _)| q == p && self.same(s, x))
                .map(|&(_, _, o)| self.canon(o))
                .collect()
        });
        reached.contains(self.canon(to))
    }

    fn element_leq(&self, e: &'a str, b: &Set<'a>, spec: &'a PreorderDoc, doc: &'a ConfigDocument) -> bool {
        match spec {
            PreorderDoc::Subset => b.contains(e),
            PreorderDoc::Link { predicate } => b.iter().any(|&f| self.reachable(e, f, predicate)),
            PreorderDoc::Onto { ontology } => {
                if b.contains(e) {
                    return true;
                }
                let roots = &doc
                    .ontologies
                    .iter()
                    .find(|o| &o.name == ontology)
                    .expect("ontology declared")
                    .roots;
                let own = self.msci(e, roots);
                !own.is_empty()
                    && own.iter().all(|&c1| {
                        b.iter()
                            .any(|&f| self.msci(f, roots).iter().any(|&c2| self.subclass(c1, c2)))
                    })
            }
        }
    }

    fn leq(&self, a: &Arg<'a>, b: &Arg<'a>, spec: &'a PreorderDoc, doc: &'a ConfigDocument) -> bool {
        match (a, b) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.iter().all(|&e| self.element_leq(e, b, spec, doc)),
        }
    }

    fn similarity(&self, a: &Set<'a>, b: &Set<'a>, spec: &'a PreorderDoc, doc: &'a ConfigDocument) -> Ratio<u64> {
        let (x, y) = (Some(a.clone()), Some(b.clone()));
        if self.leq(&x, &y, spec, doc) || self.leq(&y, &x, spec, doc) {
            return Ratio::from_integer(1);
        }
        let mut diff = Set::new();
        for &e in a {
            if !self.element_leq(e, b, spec, doc) {
                diff.insert(e);
            }
        }
        for &e in b {
            if !self.element_leq(e, a, spec, doc) {
                diff.insert(e);
            }
        }
        let union: Set = a.union(b).copied().collect();
        Ratio::from_integer(1) - Ratio::new(diff.len() as u64, union.len() as u64)
    }
}

struct OracleTuple<'a> {
    iri: &'a str,
    source: &'a str,
    args: Vec<Arg<'a>>,
    blocks: Vec<Arg<'a>>,
}

fn extract<'a>(n: &Naive<'a>, doc: &'a ConfigDocument) -> Vec<OracleTuple<'a>> {
    let mut individuals = Set::new();
    for &(s, _) in &n.rdf_type {
        individuals.insert(s);
    }
    for &(s, _, o) in &n.links {
        individuals.insert(s);
        individuals.insert(o);
    }
    for &(s, o) in &n.same_as {
        individuals.insert(s);
        individuals.insert(o);
    }
    let canonical: Set = individuals.iter().map(|&e| n.canon(e)).collect();
    let mut args_doc: Vec<_> = doc.arguments.iter().collect();
    args_doc.sort_by_key(|a| a.index);

    canonical
        .into_iter()
        .filter(|&t| n.instantiates(t, &doc.tuple_class))
        .map(|t| {
            let args: Vec<Arg> = args_doc
                .iter()
                .map(|a| {
                    let mut members = Set::new();
                    for &(s, p, o) in &n.links {
                        if !n.subproperty(p, &a.predicate) {
                            continue;
                        }
                        let (own, member) = match a.direction {
                            Direction::TupleToMember => (s, o),
                            Direction::MemberToTuple => (o, s),
                        };
                        if n.same(own, t) && n.instantiates(member, &a.role_class) {
                            members.insert(n.canon(member));
                        }
                    }
                    if !members.is_empty() {
                        return Some(members);
                    }
                    let closed = match (&doc.closed_predicate, &a.closed_marker) {
                        (Some(cp), Some(marker)) => n
                            .links
                            .iter()
                            .any(|&(s, p, o)| p == cp && n.same(s, t) && n.same(marker, o)),
                        _ => false,
                    };
                    closed.then(Set::new)
                })
                .collect();

            let mut blocks: Vec<Arg> = doc
                .partition
                .iter()
                .map(|b| {
                    let specified: Vec<&Set> = b.indices.iter().filter_map(|&i| args[i - 1].as_ref()).collect();
                    if specified.is_empty() {
                        None
                    } else {
                        Some(specified.into_iter().flatten().copied().collect())
                    }
                })
                .collect();
            let before = blocks.clone();
            for (k, b) in doc.partition.iter().enumerate() {
                let Some(own) = &before[k] else { continue };
                for &m in own {
                    for &(s, q, x) in &n.links {
                        if !n.same(s, m) || !b.dependency_predicates.iter().any(|d| n.subproperty(q, d)) {
                            continue;
                        }
                        for (j, other) in doc.partition.iter().enumerate() {
                            let fits = other
                                .indices
                                .iter()
                                .any(|&i| n.instantiates(x, &args_doc[i - 1].role_class));
                            if let (true, Some(set)) = (fits, blocks[j].as_mut()) {
                                set.insert(n.canon(x));
                            }
                        }
                    }
                }
            }

            let source = doc
                .source_predicate
                .as_deref()
                .and_then(|sp| {
                    n.links
                        .iter()
                        .filter(|&&(s, p, _)| p == sp && n.same(s, t))
                        .map(|&(_, _, o)| n.canon(o))
                        .min()
                })
                .unwrap_or(UNKNOWN_SOURCE);
            OracleTuple {
                iri: t,
                source,
                args,
                blocks,
            }
        })
        .collect()
}

/// Decides the level for (t1, t2) and whether t1 is the origin.
fn rules<'a>(
    n: &Naive<'a>,
    doc: &'a ConfigDocument,
    t1: &OracleTuple<'a>,
    t2: &OracleTuple<'a>,
    gamma_sim: Ratio<u64>,
) -> Option<(RelatednessLevel, bool)> {
    let mut args_doc: Vec<_> = doc.arguments.iter().collect();
    args_doc.sort_by_key(|a| a.index);
    let m = args_doc.len();
    let spec = |i: usize| &args_doc[i].preorder;
    let leq = |i: usize, a: &Arg<'a>, b: &Arg<'a>| n.leq(a, b, spec(i), doc);

    if (0..m).all(|i| t1.args[i] == t2.args[i]) {
        return Some((RelatednessLevel::Identical, true));
    }
    if (0..m).all(|i| leq(i, &t1.args[i], &t2.args[i]) && leq(i, &t2.args[i], &t1.args[i])) {
        return Some((RelatednessLevel::Equivalent, true));
    }
    if (0..m).all(|i| leq(i, &t1.args[i], &t2.args[i])) {
        return Some((RelatednessLevel::MoreSpecific, true));
    }
    if (0..m).all(|i| leq(i, &t2.args[i], &t1.args[i])) {
        return Some((RelatednessLevel::MoreSpecific, false));
    }
    if (0..m).all(|i| {
        t1.args[i] == t2.args[i]
            || (t2.args[i].is_some() && leq(i, &t1.args[i], &t2.args[i]))
            || (t1.args[i].is_some() && leq(i, &t2.args[i], &t1.args[i]))
    }) {
        return Some((RelatednessLevel::ArgComparable, true));
    }

    let mut specified = 0;
    let mut all_similar = true;
    let mut comparable = 0;
    for (k, b) in doc.partition.iter().enumerate() {
        let (Some(a1), Some(a2)) = (&t1.blocks[k], &t2.blocks[k]) else {
            continue;
        };
        specified += 1;
        let s = n.similarity(a1, a2, &b.preorder, doc);
        if s < gamma_sim {
            all_similar = false;
        }
        if s == Ratio::from_integer(1) {
            comparable += 1;
        }
    }
    if specified >= doc.gammas.unknown && (all_similar || comparable >= doc.gammas.comp) {
        return Some((RelatednessLevel::WeaklyRelated, true));
    }
    None
}

/// Link set computed by literal evaluation of every definition, including
/// mirrored symmetric links and, when enabled, transitivity-induced links.
pub fn oracle_match(triples: &[Triple], doc: &ConfigDocument) -> Result<Vec<LinkRecord>> {
    let gamma_sim = doc.gammas.sim.to_ratio().map_err(Error::Config)?;
    let n = Naive::new(triples, doc);
    let tuples = extract(&n, doc);

    let mut links: BTreeSet<(&str, &str, RelatednessLevel)> = BTreeSet::new();
    for i in 0..tuples.len() {
        for j in i + 1..tuples.len() {
            let (a, b) = (&tuples[i], &tuples[j]);
            if let Some((level, forward)) = rules(&n, doc, a, b, gamma_sim) {
                if level.is_symmetric() {
                    links.insert((a.iri, b.iri, level));
                    links.insert((b.iri, a.iri, level));
                } else if forward {
                    links.insert((a.iri, b.iri, level));
                } else {
                    links.insert((b.iri, a.iri, level));
                }
            }
        }
    }

    let mut induced: BTreeSet<(&str, &str, RelatednessLevel)> = BTreeSet::new();
    if doc.output.transitive_closure {
        let linked = |x: &str, y: &str| links.iter().any(|&(o, d, _)| (o == x && d == y) || (o == y && d == x));
        let mut candidates: BTreeMap<(&str, &str), RelatednessLevel> = BTreeMap::new();
        for level in RelatednessLevel::ALL.into_iter().filter(|l| l.is_transitive()) {
            let mut closed: BTreeSet<(&str, &str)> =
                links.iter().filter(|l| l.2 == level).map(|&(o, d, _)| (o, d)).collect();
            loop {
                let mut added = Vec::new();
                for &(x, y) in &closed {
                    for &(y2, z) in &closed {
                        if y == y2 && x != z && !closed.contains(&(x, z)) {
                            added.push((x, z));
                        }
                    }
                }
                if added.is_empty() {
                    break;
                }
                closed.extend(added);
            }
            for (x, z) in closed {
                if links.contains(&(x, z, level)) || linked(x, z) {
                    continue;
                }
                let key = if x < z { (x, z) } else { (z, x) };
                let best = candidates.entry(key).or_insert(level);
                *best = (*best).min(level);
                induced.insert((x, z, level));
            }
        }
        induced.retain(|&(x, z, level)| {
            let key = if x < z { (x, z) } else { (z, x) };
            candidates[&key] == level
        });
    }

    let mut out: Vec<LinkRecord> = links
        .iter()
        .map(|&(o, d, level)| (o, d, level, false))
        .chain(induced.iter().map(|&(o, d, level)| (o, d, level, true)))
        .map(|(o, d, level, induced)| LinkRecord {
            origin: o.to_string(),
            destination: d.to_string(),
            level,
            induced,
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Source label of every tuple the oracle sees, by tuple IRI.
pub fn oracle_sources(triples: &[Triple], doc: &ConfigDocument) -> BTreeMap<String, String> {
    let n = Naive::new(triples, doc);
    extract(&n, doc)
        .into_iter()
        .map(|t| (t.iri.to_string(), t.source.to_string()))
        .collect()
}
