//! In-memory knowledge base: interned individuals, classes and predicates,
//! `owl:sameAs` canonicalization, subsumption closures and per-predicate
//! link reachability.
//!
//! The base is built once by [`KnowledgeBase::load`] and is read-only
//! afterwards, so it can be shared by any number of matching workers.

mod closure;
mod same_as;

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::ntriples::{self, Triple};
use closure::{invert, reachable_lists, ReachBits};
use same_as::MinUnionFind;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_SUBPROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
pub const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Interned individual. Ids follow lexicographic IRI order.
    IndividualId
);
id_type!(ClassId);
id_type!(PredicateId);
id_type!(
    /// Index of an ontology view declared at load time.
    ViewId
);

/// IRIs of the predicates that populate the TBox indices and identity classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub rdf_type: String,
    pub sub_class_of: String,
    pub sub_property_of: String,
    pub same_as: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            rdf_type: RDF_TYPE.into(),
            sub_class_of: RDFS_SUBCLASS_OF.into(),
            sub_property_of: RDFS_SUBPROPERTY_OF.into(),
            same_as: OWL_SAME_AS.into(),
        }
    }
}

/// Declaration of an ontology view: its roots and all their descendants.
/// An empty root list selects every class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDecl {
    pub name: String,
    pub roots: Vec<String>,
    /// Always true outside of tests; when false every individual is
    /// treated as instantiating the top class.
    pub exclude_top: bool,
}

impl ViewDecl {
    pub fn new(name: impl Into<String>, roots: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ViewDecl {
            name: name.into(),
            roots: roots.into_iter().map(Into::into).collect(),
            exclude_top: true,
        }
    }

    #[doc(hidden)]
    pub fn keeping_top(mut self) -> Self {
        self.exclude_top = false;
        self
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub vocabulary: Vocabulary,
    pub top_class: String,
    pub reflexive_transitive: Vec<String>,
    pub views: Vec<ViewDecl>,
    /// Classes registered even when no triple mentions them.
    pub declared_classes: Vec<String>,
    /// Predicates registered even when no triple mentions them.
    pub declared_predicates: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            vocabulary: Vocabulary::default(),
            top_class: OWL_THING.into(),
            reflexive_transitive: Vec::new(),
            views: Vec::new(),
            declared_classes: Vec::new(),
            declared_predicates: Vec::new(),
        }
    }
}

#[derive(Debug, Default)]
struct Names {
    iris: Vec<String>,
    index: HashMap<String, u32>,
}

impl Names {
    fn from_sorted(set: BTreeSet<String>) -> Self {
        let iris: Vec<String> = set.into_iter().collect();
        let index = iris
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        Names { iris, index }
    }

    fn get(&self, iri: &str) -> Option<u32> {
        self.index.get(iri).copied()
    }

    fn id(&self, iri: &str) -> u32 {
        self.index[iri]
    }

    fn len(&self) -> usize {
        self.iris.len()
    }
}

/// A named subset of the classes, closed under descendants of its roots,
/// never containing the top class.
#[derive(Debug)]
pub struct OntologyView {
    name: String,
    members: FixedBitSet,
    exclude_top: bool,
    msci: Vec<Vec<ClassId>>,
}

impl OntologyView {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, c: ClassId) -> bool {
        self.members.contains(c.index())
    }

    pub fn excludes_top(&self) -> bool {
        self.exclude_top
    }

    pub fn member_classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.members.ones().map(|i| ClassId(i as u32))
    }
}

struct LinkIndex {
    local: HashMap<u32, u32>,
    bits: ReachBits,
}

pub struct KnowledgeBase {
    individuals: Names,
    classes: Names,
    predicates: Names,
    top: ClassId,
    canonical: Vec<u32>,
    class_scc: Vec<u32>,
    class_ancestors: Vec<Vec<u32>>,
    pred_descendants: Vec<Vec<u32>>,
    pred_ancestors: Vec<Vec<u32>>,
    /// Entailed types (declared types closed upward), per canonical individual; top excluded.
    types: Vec<Vec<ClassId>>,
    out_links: Vec<Vec<(PredicateId, IndividualId)>>,
    in_links: Vec<Vec<(PredicateId, IndividualId)>>,
    object_link_count: usize,
    same_as_count: usize,
    link_indices: HashMap<PredicateId, LinkIndex>,
    views: Vec<OntologyView>,
    view_names: HashMap<String, ViewId>,
    warnings: Vec<String>,
}

impl std::fmt::Debug for KnowledgeBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KnowledgeBase")
            .field("individuals", &self.individuals.len())
            .field("classes", &self.classes.len())
            .field("predicates", &self.predicates.len())
            .field("object_links", &self.object_link_count)
            .finish()
    }
}

impl KnowledgeBase {
    pub fn from_ntriples<R: BufRead>(reader: R, options: &LoadOptions) -> Result<Self> {
        let triples = ntriples::read_triples(reader)?;
        Self::load(&triples, options)
    }

    pub fn load(triples: &[Triple], options: &LoadOptions) -> Result<Self> {
        let vocab = &options.vocabulary;
        // Pass 1: classify IRIs by role.
        let mut class_set: BTreeSet<String> = BTreeSet::new();
        let mut ind_set: BTreeSet<String> = BTreeSet::new();
        let mut pred_set: BTreeSet<String> = BTreeSet::new();
        class_set.insert(options.top_class.clone());
        class_set.extend(options.declared_classes.iter().cloned());
        pred_set.extend(options.declared_predicates.iter().cloned());
        pred_set.extend(options.reflexive_transitive.iter().cloned());

        for t in triples {
            let (s, p, o) = (t.subject.as_str(), t.predicate.as_str(), t.object.as_str());
            if p == vocab.rdf_type {
                ind_set.insert(s.into());
                class_set.insert(o.into());
            } else if p == vocab.sub_class_of {
                class_set.insert(s.into());
                class_set.insert(o.into());
            } else if p == vocab.sub_property_of {
                pred_set.insert(s.into());
                pred_set.insert(o.into());
            } else if p == vocab.same_as {
                // classified below
            } else {
                ind_set.insert(s.into());
                ind_set.insert(o.into());
                pred_set.insert(p.into());
            }
        }

        let mut class_equiv: Vec<(String, String)> = Vec::new();
        let mut identity: Vec<(&str, &str)> = Vec::new();
        let mut warnings = Vec::new();
        let pure_class = |x: &str| class_set.contains(x) && !ind_set.contains(x);
        for t in triples.iter().filter(|t| t.predicate.as_str() == vocab.same_as) {
            let (s, o) = (t.subject.as_str(), t.object.as_str());
            match (pure_class(s), pure_class(o)) {
                (true, true) => {
                    warnings.push(format!(
                        "sameAs between classes <{s}> and <{o}> read as class equivalence"
                    ));
                    class_equiv.push((s.into(), o.into()));
                }
                (true, false) => {
                    return Err(Error::VocabularyMixing {
                        class: s.into(),
                        individual: o.into(),
                    })
                }
                (false, true) => {
                    return Err(Error::VocabularyMixing {
                        class: o.into(),
                        individual: s.into(),
                    })
                }
                (false, false) => identity.push((s, o)),
            }
        }
        for &(s, o) in &identity {
            ind_set.insert(s.into());
            ind_set.insert(o.into());
        }

        let individuals = Names::from_sorted(ind_set);
        let classes = Names::from_sorted(class_set);
        let predicates = Names::from_sorted(pred_set);
        let top = ClassId(classes.id(&options.top_class));

        // Identity classes.
        let mut uf = MinUnionFind::new(individuals.len());
        for &(s, o) in &identity {
            uf.union(individuals.id(s), individuals.id(o));
        }
        let canonical = uf.into_roots();
        let canon = |iri: &str| canonical[individuals.id(iri) as usize];

        // Pass 2: edges.
        let mut class_edges: Vec<(u32, u32)> = Vec::new();
        let mut pred_edges: Vec<(u32, u32)> = Vec::new();
        let mut declared: Vec<Vec<u32>> = vec![Vec::new(); individuals.len()];
        let mut out_links: Vec<Vec<(PredicateId, IndividualId)>> = vec![Vec::new(); individuals.len()];
        let mut same_as_count = 0usize;
        for t in triples {
            let (s, p, o) = (t.subject.as_str(), t.predicate.as_str(), t.object.as_str());
            if p == vocab.rdf_type {
                declared[canon(s) as usize].push(classes.id(o));
            } else if p == vocab.sub_class_of {
                class_edges.push((classes.id(s), classes.id(o)));
            } else if p == vocab.sub_property_of {
                pred_edges.push((predicates.id(s), predicates.id(o)));
            } else if p == vocab.same_as {
                same_as_count += 1;
            } else {
                out_links[canon(s) as usize]
                    .push((PredicateId(predicates.id(p)), IndividualId(canon(o))));
            }
        }
        for (a, b) in &class_equiv {
            let (a, b) = (classes.id(a), classes.id(b));
            class_edges.push((a, b));
            class_edges.push((b, a));
        }

        let (class_scc, class_ancestors) = reachable_lists(classes.len(), &class_edges);
        let (_, pred_ancestors) = reachable_lists(predicates.len(), &pred_edges);
        let pred_descendants = invert(&pred_ancestors);

        let mut types: Vec<Vec<ClassId>> = vec![Vec::new(); individuals.len()];
        for (e, decl) in declared.iter().enumerate() {
            if decl.is_empty() {
                continue;
            }
            let mut acc: Vec<u32> = decl
                .iter()
                .flat_map(|&c| class_ancestors[c as usize].iter().copied())
                .filter(|&c| c != top.0)
                .collect();
            acc.sort_unstable();
            acc.dedup();
            types[e] = acc.into_iter().map(ClassId).collect();
        }

        let mut in_links: Vec<Vec<(PredicateId, IndividualId)>> = vec![Vec::new(); individuals.len()];
        let mut object_link_count = 0;
        for (s, links) in out_links.iter_mut().enumerate() {
            links.sort_unstable();
            links.dedup();
            object_link_count += links.len();
            for &(p, o) in links.iter() {
                in_links[o.index()].push((p, IndividualId(s as u32)));
            }
        }
        for links in &mut in_links {
            links.sort_unstable();
        }

        let mut kb = KnowledgeBase {
            individuals,
            classes,
            predicates,
            top,
            canonical,
            class_scc,
            class_ancestors,
            pred_descendants,
            pred_ancestors,
            types,
            out_links,
            in_links,
            object_link_count,
            same_as_count,
            link_indices: HashMap::new(),
            views: Vec::new(),
            view_names: HashMap::new(),
            warnings,
        };

        for p in &options.reflexive_transitive {
            let pid = PredicateId(kb.predicates.id(p));
            let index = kb.build_link_index(pid);
            kb.link_indices.insert(pid, index);
        }
        for decl in &options.views {
            kb.add_view(decl)?;
        }
        Ok(kb)
    }

    fn build_link_index(&self, p: PredicateId) -> LinkIndex {
        let mut local: HashMap<u32, u32> = HashMap::new();
        let mut edges = Vec::new();
        for (s, links) in self.out_links.iter().enumerate() {
            for &(q, o) in links {
                if q != p {
                    continue;
                }
                let next = local.len() as u32;
                let a = *local.entry(s as u32).or_insert(next);
                let next = local.len() as u32;
                let b = *local.entry(o.0).or_insert(next);
                edges.push((a, b));
            }
        }
        let bits = ReachBits::build(local.len(), &edges);
        LinkIndex { local, bits }
    }

    fn add_view(&mut self, decl: &ViewDecl) -> Result<()> {
        if self.view_names.contains_key(&decl.name) {
            return Err(Error::config(format!("duplicate ontology view '{}'", decl.name)));
        }
        let n = self.classes.len();
        let mut members = FixedBitSet::with_capacity(n);
        if decl.roots.is_empty() {
            members.insert_range(..);
        } else {
            let descendants = invert(&self.class_ancestors);
            for root in &decl.roots {
                let r = self.classes.get(root).ok_or_else(|| {
                    Error::config(format!("ontology view '{}': unknown root class <{root}>", decl.name))
                })?;
                for &d in &descendants[r as usize] {
                    members.insert(d as usize);
                }
            }
        }
        members.set(self.top.index(), false);
        let mut view = OntologyView {
            name: decl.name.clone(),
            members,
            exclude_top: decl.exclude_top,
            msci: Vec::new(),
        };
        view.msci = (0..self.individuals.len())
            .map(|e| {
                if self.canonical[e] as usize != e {
                    return Vec::new();
                }
                let ci = self.ci_in(&view, IndividualId(e as u32));
                self.msc(&ci)
            })
            .collect();
        let id = ViewId(self.views.len() as u32);
        self.views.push(view);
        self.view_names.insert(decl.name.clone(), id);
        Ok(())
    }

    // ----- lookups -----

    pub fn individual(&self, iri: &str) -> Result<IndividualId> {
        self.individuals
            .get(iri)
            .map(IndividualId)
            .ok_or_else(|| Error::UnknownIndividual(iri.into()))
    }

    pub fn class(&self, iri: &str) -> Result<ClassId> {
        self.classes
            .get(iri)
            .map(ClassId)
            .ok_or_else(|| Error::UnknownClass(iri.into()))
    }

    pub fn predicate(&self, iri: &str) -> Result<PredicateId> {
        self.predicates
            .get(iri)
            .map(PredicateId)
            .ok_or_else(|| Error::UnknownPredicate(iri.into()))
    }

    pub fn view(&self, name: &str) -> Result<ViewId> {
        self.view_names
            .get(name)
            .copied()
            .ok_or_else(|| Error::config(format!("unknown ontology view '{name}'")))
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    pub fn view_info(&self, v: ViewId) -> &OntologyView {
        &self.views[v.index()]
    }

    pub fn individual_iri(&self, e: IndividualId) -> &str {
        &self.individuals.iris[e.index()]
    }

    pub fn class_iri(&self, c: ClassId) -> &str {
        &self.classes.iris[c.index()]
    }

    pub fn predicate_iri(&self, p: PredicateId) -> &str {
        &self.predicates.iris[p.index()]
    }

    pub fn individual_count(&self) -> usize {
        self.individuals.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn object_link_count(&self) -> usize {
        self.object_link_count
    }

    pub fn same_as_count(&self) -> usize {
        self.same_as_count
    }

    pub fn top(&self) -> ClassId {
        self.top
    }

    pub fn individuals(&self) -> impl Iterator<Item = IndividualId> {
        (0..self.individuals.len() as u32).map(IndividualId)
    }

    /// Load-time notes that did not prevent loading.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    // ----- identity -----

    pub fn canonical(&self, e: IndividualId) -> IndividualId {
        IndividualId(self.canonical[e.index()])
    }

    pub fn is_canonical(&self, e: IndividualId) -> bool {
        self.canonical[e.index()] == e.0
    }

    /// Canonical representative looked up by IRI.
    pub fn canonical_of(&self, iri: &str) -> Result<IndividualId> {
        Ok(self.canonical(self.individual(iri)?))
    }

    // ----- subsumption -----

    /// Reflexive-transitive subsumption `sub ⊑ sup`. Every class is
    /// subsumed by the top class.
    pub fn subsumed_by(&self, sub: ClassId, sup: ClassId) -> bool {
        sub == sup
            || sup == self.top
            || self.class_ancestors[sub.index()].binary_search(&sup.0).is_ok()
    }

    /// Strict subsumption: `sub ⊑ sup` and the two are not equivalent.
    pub fn strictly_subsumed_by(&self, sub: ClassId, sup: ClassId) -> bool {
        self.subsumed_by(sub, sup) && !self.equivalent_classes(sub, sup)
    }

    pub fn equivalent_classes(&self, a: ClassId, b: ClassId) -> bool {
        a == b
            || self.class_scc[a.index()] == self.class_scc[b.index()]
            || (self.subsumed_by(a, b) && self.subsumed_by(b, a))
    }

    pub fn class_ancestors(&self, c: ClassId) -> impl Iterator<Item = ClassId> + '_ {
        self.class_ancestors[c.index()].iter().map(|&c| ClassId(c))
    }

    pub fn predicate_subsumed_by(&self, sub: PredicateId, sup: PredicateId) -> bool {
        self.pred_ancestors[sub.index()].binary_search(&sup.0).is_ok()
    }

    /// Every `q` with `q ⊑ p`, including `p`, sorted.
    pub fn sub_predicates(&self, p: PredicateId) -> Vec<PredicateId> {
        self.pred_descendants[p.index()]
            .iter()
            .map(|&q| PredicateId(q))
            .collect()
    }

    // ----- instantiation -----

    /// Entailed types of `e` (declared on any sameAs member, closed upward),
    /// without the top class.
    pub fn types(&self, e: IndividualId) -> &[ClassId] {
        &self.types[self.canonical(e).index()]
    }

    pub fn instantiates(&self, e: IndividualId, c: ClassId) -> bool {
        c == self.top || self.types(e).binary_search(&c).is_ok()
    }

    fn ci_in(&self, view: &OntologyView, e: IndividualId) -> Vec<ClassId> {
        let mut out: Vec<ClassId> = self
            .types(e)
            .iter()
            .copied()
            .filter(|&c| view.contains(c))
            .collect();
        if !view.exclude_top {
            out.push(self.top);
            out.sort_unstable();
        }
        out
    }

    /// Classes of the view instantiated by `e`, top excluded.
    pub fn ci(&self, view: ViewId, e: IndividualId) -> Vec<ClassId> {
        self.ci_in(&self.views[view.index()], e)
    }

    /// Most specific members of `classes`: those with no strictly more
    /// specific class in the same set.
    pub fn msc(&self, classes: &[ClassId]) -> Vec<ClassId> {
        classes
            .iter()
            .copied()
            .filter(|&c| !classes.iter().any(|&d| self.strictly_subsumed_by(d, c)))
            .collect()
    }

    pub fn msci(&self, view: ViewId, e: IndividualId) -> &[ClassId] {
        &self.views[view.index()].msci[self.canonical(e).index()]
    }

    // ----- links -----

    /// Outgoing object links of `e`'s identity class, on canonical ids.
    pub fn out_links(&self, e: IndividualId) -> &[(PredicateId, IndividualId)] {
        &self.out_links[self.canonical(e).index()]
    }

    pub fn in_links(&self, e: IndividualId) -> &[(PredicateId, IndividualId)] {
        &self.in_links[self.canonical(e).index()]
    }

    pub fn is_reflexive_transitive(&self, p: PredicateId) -> bool {
        self.link_indices.contains_key(&p)
    }

    /// Whether `e2` is reachable from `e1` through zero or more `p` links.
    pub fn p_reachable(&self, e1: IndividualId, e2: IndividualId, p: PredicateId) -> Result<bool> {
        let index = self.link_indices.get(&p).ok_or_else(|| {
            Error::config(format!(
                "predicate <{}> is not designated reflexive-transitive",
                self.predicate_iri(p)
            ))
        })?;
        let (a, b) = (self.canonical(e1), self.canonical(e2));
        if a == b {
            return Ok(true);
        }
        Ok(match (index.local.get(&a.0), index.local.get(&b.0)) {
            (Some(&la), Some(&lb)) => index.bits.reaches(la, lb),
            _ => false,
        })
    }
}
