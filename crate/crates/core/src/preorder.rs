//! Argument comparators: set inclusion, the link-closure preorder and the
//! subsumption-based preorder, together with their induced equivalences.
//!
//! Arguments are either unknown (every individual may apply) or a set of
//! canonical individuals. Unknown arguments are decided before dispatch:
//! anything is below unknown, and unknown is only below unknown.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kb::{IndividualId, KnowledgeBase, PredicateId, ViewId};

/// Sorted, deduplicated set of canonical individuals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemberSet(Arc<[IndividualId]>);

impl MemberSet {
    /// Canonicalizes every member against `kb`.
    pub fn new(kb: &KnowledgeBase, members: impl IntoIterator<Item = IndividualId>) -> Self {
        Self::from_canonical(members.into_iter().map(|e| kb.canonical(e)))
    }

    /// Builds a set from ids that are already canonical.
    pub fn from_canonical(members: impl IntoIterator<Item = IndividualId>) -> Self {
        let mut v: Vec<IndividualId> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        MemberSet(v.into())
    }

    pub fn empty() -> Self {
        MemberSet(Arc::from([]))
    }

    pub fn as_slice(&self) -> &[IndividualId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: IndividualId) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = IndividualId> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &MemberSet) -> MemberSet {
        MemberSet::from_canonical(self.iter().chain(other.iter()))
    }
}

/// Value of one tuple argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgumentValue {
    Unknown,
    Members(MemberSet),
}

impl ArgumentValue {
    pub fn is_unknown(&self) -> bool {
        matches!(self, ArgumentValue::Unknown)
    }

    pub fn members(&self) -> Option<&MemberSet> {
        match self {
            ArgumentValue::Unknown => None,
            ArgumentValue::Members(m) => Some(m),
        }
    }
}

/// Preorder attached to an argument or an aggregated argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreorderSpec {
    Subset,
    LinkClosure(PredicateId),
    OntoSubsumption(ViewId),
}

impl PreorderSpec {
    pub fn check(self, kb: &KnowledgeBase) -> Result<()> {
        match self {
            PreorderSpec::Subset => Ok(()),
            PreorderSpec::LinkClosure(p) if kb.is_reflexive_transitive(p) => Ok(()),
            PreorderSpec::LinkClosure(p) => Err(Error::config(format!(
                "predicate <{}> is not designated reflexive-transitive",
                kb.predicate_iri(p)
            ))),
            PreorderSpec::OntoSubsumption(v) if v.index() < kb.view_count() => Ok(()),
            PreorderSpec::OntoSubsumption(v) => {
                Err(Error::config(format!("unknown ontology view #{}", v.index())))
            }
        }
    }
}

pub fn subset_leq(a: &[IndividualId], b: &[IndividualId]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// `∀ e1 ∈ a ∃ e2 ∈ b` with `e2` reachable from `e1` through `p` links.
pub fn link_leq(
    a: &[IndividualId],
    b: &[IndividualId],
    p: PredicateId,
    kb: &KnowledgeBase,
) -> Result<bool> {
    PreorderSpec::LinkClosure(p).check(kb)?;
    Ok(a.iter().all(|&e| link_element_leq(e, b, p, kb)))
}

pub fn link_equiv(
    a: &[IndividualId],
    b: &[IndividualId],
    p: PredicateId,
    kb: &KnowledgeBase,
) -> Result<bool> {
    Ok(link_leq(a, b, p, kb)? && link_leq(b, a, p, kb)?)
}

fn link_element_leq(e: IndividualId, b: &[IndividualId], p: PredicateId, kb: &KnowledgeBase) -> bool {
    b.iter()
        .any(|&f| kb.p_reachable(e, f, p).expect("predicate checked by caller"))
}

/// Every element of `a` is either in `b`, or has a non-empty set of most
/// specific classes each subsumed by a most specific class of some member
/// of `b`.
pub fn onto_leq(a: &[IndividualId], b: &[IndividualId], view: ViewId, kb: &KnowledgeBase) -> bool {
    a.iter().all(|&e| onto_element_leq(e, b, view, kb))
}

pub fn onto_equiv(a: &[IndividualId], b: &[IndividualId], view: ViewId, kb: &KnowledgeBase) -> bool {
    onto_leq(a, b, view, kb) && onto_leq(b, a, view, kb)
}

fn onto_element_leq(e: IndividualId, b: &[IndividualId], view: ViewId, kb: &KnowledgeBase) -> bool {
    if b.binary_search(&e).is_ok() {
        return true;
    }
    let own = kb.msci(view, e);
    !own.is_empty()
        && own.iter().all(|&c1| {
            b.iter()
                .any(|&f| kb.msci(view, f).iter().any(|&c2| kb.subsumed_by(c1, c2)))
        })
}

/// Whether the singleton `{e}` is below `b`. Assumes `spec` was checked.
pub(crate) fn element_leq(e: IndividualId, b: &[IndividualId], spec: PreorderSpec, kb: &KnowledgeBase) -> bool {
    match spec {
        PreorderSpec::Subset => b.binary_search(&e).is_ok(),
        PreorderSpec::LinkClosure(p) => link_element_leq(e, b, p, kb),
        PreorderSpec::OntoSubsumption(v) => onto_element_leq(e, b, v, kb),
    }
}

/// Set comparison for known arguments. Assumes `spec` was checked.
pub(crate) fn members_leq(a: &[IndividualId], b: &[IndividualId], spec: PreorderSpec, kb: &KnowledgeBase) -> bool {
    match spec {
        PreorderSpec::Subset => subset_leq(a, b),
        _ => a.iter().all(|&e| element_leq(e, b, spec, kb)),
    }
}

pub(crate) fn value_leq(a: &ArgumentValue, b: &ArgumentValue, spec: PreorderSpec, kb: &KnowledgeBase) -> bool {
    match (a, b) {
        (_, ArgumentValue::Unknown) => true,
        (ArgumentValue::Unknown, ArgumentValue::Members(_)) => false,
        (ArgumentValue::Members(x), ArgumentValue::Members(y)) => {
            members_leq(x.as_slice(), y.as_slice(), spec, kb)
        }
    }
}

pub fn arg_leq(a: &ArgumentValue, b: &ArgumentValue, spec: PreorderSpec, kb: &KnowledgeBase) -> Result<bool> {
    spec.check(kb)?;
    Ok(value_leq(a, b, spec, kb))
}

pub fn arg_equiv(a: &ArgumentValue, b: &ArgumentValue, spec: PreorderSpec, kb: &KnowledgeBase) -> Result<bool> {
    spec.check(kb)?;
    Ok(value_leq(a, b, spec, kb) && value_leq(b, a, spec, kb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{LoadOptions, ViewDecl, OWL_SAME_AS};
    use crate::ntriples::Triple;

    const EX: &str = "http://example.org/";

    fn ex(x: &str) -> String {
        format!("{EX}{x}")
    }

    fn kb(triples: &[(&str, &str, &str)]) -> KnowledgeBase {
        let triples: Vec<Triple> = triples
            .iter()
            .map(|(s, p, o)| {
                let f = |x: &str| if x.contains("://") { x.to_string() } else { ex(x) };
                Triple::from_strs(&f(s), &f(p), &f(o))
            })
            .collect();
        let options = LoadOptions {
            reflexive_transitive: vec![ex("partOf")],
            views: vec![ViewDecl::new("all", Vec::<String>::new())],
            ..LoadOptions::default()
        };
        KnowledgeBase::load(&triples, &options).unwrap()
    }

    fn set(kb: &KnowledgeBase, names: &[&str]) -> MemberSet {
        MemberSet::new(kb, names.iter().map(|n| kb.individual(&ex(n)).unwrap()))
    }

    fn val(kb: &KnowledgeBase, names: &[&str]) -> ArgumentValue {
        ArgumentValue::Members(set(kb, names))
    }

    #[test]
    fn unknown_handling() {
        let kb = kb(&[("warfarin", "causes", "CYP2C9")]);
        let w = val(&kb, &["warfarin"]);
        let g = val(&kb, &["CYP2C9"]);
        let u = ArgumentValue::Unknown;
        let po = PreorderSpec::LinkClosure(kb.predicate(&ex("partOf")).unwrap());
        let on = PreorderSpec::OntoSubsumption(kb.view("all").unwrap());
        for spec in [PreorderSpec::Subset, po, on] {
            assert!(arg_leq(&w, &u, spec, &kb).unwrap());
            assert!(arg_leq(&u, &u, spec, &kb).unwrap());
            assert!(!arg_leq(&u, &g, spec, &kb).unwrap());
            assert!(arg_equiv(&u, &u, spec, &kb).unwrap());
            assert!(!arg_equiv(&w, &u, spec, &kb).unwrap());
        }
    }

    #[test]
    fn subset_with_same_as() {
        let kb = kb(&[("e1", OWL_SAME_AS, "e2"), ("e3", "p", "e1")]);
        let a = set(&kb, &["e1"]);
        let b = set(&kb, &["e2"]);
        assert!(subset_leq(a.as_slice(), b.as_slice()));
        assert!(subset_leq(b.as_slice(), a.as_slice()));
        let e13 = set(&kb, &["e1", "e3"]);
        assert!(!subset_leq(e13.as_slice(), a.as_slice()));
        assert!(subset_leq(a.as_slice(), e13.as_slice()));
    }

    #[test]
    fn link_preorder_examples() {
        let kb = kb(&[("e3", "partOf", "e1"), ("e2", "p", "e2")]);
        let p = kb.predicate(&ex("partOf")).unwrap();
        let s = |n: &[&str]| set(&kb, n);
        let leq = |a: &[&str], b: &[&str]| link_leq(s(a).as_slice(), s(b).as_slice(), p, &kb).unwrap();
        assert!(leq(&["e1"], &["e1", "e2"]));
        assert!(leq(&["e3", "e2"], &["e1", "e2"]));
        assert!(leq(&["e3"], &["e1", "e2"]));
        assert!(!leq(&["e1", "e2"], &["e3"]));
        assert!(leq(&[], &["e1"]));
        assert!(!leq(&["e1"], &[]));
        assert!(link_equiv(s(&["e3", "e1"]).as_slice(), s(&["e1"]).as_slice(), p, &kb).unwrap());
        assert!(!link_equiv(s(&["e3"]).as_slice(), s(&["e1"]).as_slice(), p, &kb).unwrap());
        let other = kb.predicate(&ex("p")).unwrap();
        assert!(link_leq(s(&["e1"]).as_slice(), s(&["e1"]).as_slice(), other, &kb).is_err());
    }

    #[test]
    fn onto_preorder_on_typed_sets() {
        let kb = kb(&[
            ("C", "http://www.w3.org/2000/01/rdf-schema#subClassOf", "B"),
            ("x", "http://www.w3.org/1999/02/22-rdf-syntax-ns#type", "C"),
            ("y", "http://www.w3.org/1999/02/22-rdf-syntax-ns#type", "B"),
            ("z", "p", "z"),
        ]);
        let v = kb.view("all").unwrap();
        let s = |n: &[&str]| set(&kb, n);
        assert!(onto_leq(s(&["x"]).as_slice(), s(&["y"]).as_slice(), v, &kb));
        assert!(!onto_leq(s(&["y"]).as_slice(), s(&["x"]).as_slice(), v, &kb));
        // untyped individuals only compare by membership
        assert!(!onto_leq(s(&["z"]).as_slice(), s(&["y"]).as_slice(), v, &kb));
        assert!(onto_leq(s(&["z", "x"]).as_slice(), s(&["z", "y"]).as_slice(), v, &kb));
        assert!(onto_equiv(s(&["x", "y"]).as_slice(), s(&["x", "y"]).as_slice(), v, &kb));
    }
}
