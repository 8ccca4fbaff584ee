use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ArgumentDoc, BlockDoc, ConfigDocument, Direction, GammasDoc, OntologyDoc, OutputDoc, PreorderDoc};
use crate::kb::{
    IndividualId, KnowledgeBase, LoadOptions, PredicateId, ViewDecl, ViewId, OWL_SAME_AS, OWL_THING,
    RDFS_SUBCLASS_OF, RDFS_SUBPROPERTY_OF, RDF_TYPE,
};
use crate::ntriples::{write_triples, Triple};
use crate::preorder::MemberSet;

const NS: &str = "http://example.org/gen/";

fn iri(local: &str) -> String {
    format!("{NS}{local}")
}

/// Shape of a synthetic instance. Identical parameters give identical
/// output on every platform.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub n_tuples: usize,
    pub n_individuals: usize,
    pub n_classes: usize,
    pub hierarchy_depth: usize,
    pub link_density: f64,
    pub sameas_density: f64,
    pub unknown_rate: f64,
    pub n_sources: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 42,
            n_tuples: 100,
            n_individuals: 60,
            n_classes: 12,
            hierarchy_depth: 3,
            link_density: 0.1,
            sameas_density: 0.05,
            unknown_rate: 0.3,
            n_sources: 3,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("link_density", self.link_density),
            ("sameas_density", self.sameas_density),
            ("unknown_rate", self.unknown_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.n_individuals < 3 {
            return Err("n_individuals must be at least 3, one per role".into());
        }
        for (name, n) in [
            ("n_classes", self.n_classes),
            ("hierarchy_depth", self.hierarchy_depth),
            ("n_sources", self.n_sources),
        ] {
            if n == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        Ok(())
    }
}

/// Triples plus the configuration that matches their schema.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub triples: Vec<Triple>,
    pub config: ConfigDocument,
}

impl GeneratedInstance {
    pub fn ntriples(&self) -> String {
        let mut buf = Vec::new();
        write_triples(&mut buf, &self.triples).expect("writing to memory");
        String::from_utf8(buf).expect("IRIs are UTF-8")
    }

    /// Writes `kb.nt` and `config.json` into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("kb.nt"), self.ntriples())?;
        fs::write(dir.join("config.json"), self.config.to_json_pretty())
    }
}

const ROLES: [&str; 3] = ["Drug", "GeneticFactor", "Phenotype"];
const PREDICATES: [&str; 3] = ["causes", "influences", "isAssociatedWith"];
/// Ontology names; drugs use the first, phenotypes the second.
const ONTOLOGIES: [&str; 2] = ["drugs", "phenotypes"];

struct Out {
    triples: Vec<Triple>,
    seen: HashSet<(String, String, String)>,
}

impl Out {
    fn push(&mut self, s: &str, p: &str, o: &str) {
        if self.seen.insert((s.to_string(), p.to_string(), o.to_string())) {
            self.triples.push(Triple::from_strs(s, p, o));
        }
    }
}

/// Members of one tuple: (role, individual, predicate).
type Shape = Vec<(usize, usize, usize)>;

/// Generates a synthetic pharmacogenomics-like instance.
///
/// Panics if `params` fails [`GeneratorParams::validate`].
pub fn generate(params: &GeneratorParams) -> GeneratedInstance {
    if let Err(e) = params.validate() {
        panic!("invalid generator parameters: {e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = Out {
        triples: Vec::new(),
        seen: HashSet::new(),
    };

    out.push(&iri("causes"), RDFS_SUBPROPERTY_OF, &iri("influences"));
    out.push(&iri("influences"), RDFS_SUBPROPERTY_OF, &iri("isAssociatedWith"));

    // Class forests: one per ontology, depth-limited, occasionally with a
    // second parent.
    let mut forest_classes: Vec<Vec<String>> = vec![Vec::new(), Vec::new()];
    for (f, name) in ONTOLOGIES.iter().enumerate() {
        let root = iri(&format!("{name}/Root"));
        out.push(&root, RDFS_SUBCLASS_OF, OWL_THING);
        let count = params.n_classes / 2 + usize::from(f == 0 && params.n_classes % 2 == 1);
        let mut nodes: Vec<(String, usize)> = vec![(root, 0)];
        for i in 0..count {
            let class = iri(&format!("{name}/C{i}"));
            let eligible: Vec<usize> = (0..nodes.len())
                .filter(|&k| nodes[k].1 < params.hierarchy_depth)
                .collect();
            let parent = *eligible.choose(&mut rng).expect("the root is always eligible");
            let mut depth = nodes[parent].1 + 1;
            out.push(&class, RDFS_SUBCLASS_OF, &nodes[parent].0);
            if rng.gen_bool(0.15) {
                let other = *eligible.choose(&mut rng).expect("non-empty");
                if other != parent {
                    out.push(&class, RDFS_SUBCLASS_OF, &nodes[other].0);
                    depth = depth.max(nodes[other].1 + 1);
                }
            }
            nodes.push((class, depth));
        }
        forest_classes[f] = nodes.into_iter().map(|(c, _)| c).collect();
    }

    // Individuals, spread round-robin over the three roles.
    let mut pools: Vec<Vec<String>> = vec![Vec::new(); 3];
    for i in 0..params.n_individuals {
        let role = i % 3;
        let name = iri(&format!("{}{i}", ["drug", "gene", "pheno"][role]));
        out.push(&name, RDF_TYPE, &iri(ROLES[role]));
        if role != 1 {
            let f = usize::from(role == 2);
            if rng.gen_bool(0.85) {
                let c = forest_classes[f].choose(&mut rng).expect("root exists").clone();
                out.push(&name, RDF_TYPE, &c);
                if rng.gen_bool(0.3) {
                    let c = forest_classes[f].choose(&mut rng).expect("root exists").clone();
                    out.push(&name, RDF_TYPE, &c);
                }
            }
        }
        pools[role].push(name);
    }

    for a in &pools[1] {
        for b in &pools[1] {
            if a != b && rng.gen_bool(params.link_density) {
                out.push(a, &iri("partOf"), b);
            }
        }
    }
    for p in &pools[2] {
        if rng.gen_bool(params.link_density) {
            let role = if rng.gen_bool(0.5) { 0 } else { 2 };
            let target = pools[role].choose(&mut rng).expect("non-empty").clone();
            if &target != p {
                out.push(p, &iri("dependsOn"), &target);
            }
        }
    }
    for pool in &pools {
        for x in pool {
            if pool.len() > 1 && rng.gen_bool(params.sameas_density) {
                let y = pool.choose(&mut rng).expect("non-empty");
                if y != x {
                    out.push(x, OWL_SAME_AS, y);
                }
            }
        }
    }

    // Tuples: fresh ones, and perturbed copies of earlier ones so that
    // every rule has a chance to fire.
    let mut shapes: Vec<Shape> = Vec::with_capacity(params.n_tuples);
    for i in 0..params.n_tuples {
        let shape = if i > 0 && rng.gen_bool(0.35) {
            let mut s = shapes[rng.gen_range(0..i)].clone();
            match rng.gen_range(0..5) {
                0 => {}
                1 => {
                    let role = rng.gen_range(0..3);
                    s.retain(|m| m.0 != role);
                }
                2 => {
                    if let Some(m) = s.choose_mut(&mut rng) {
                        m.2 = (m.2 + 1).min(2);
                    }
                }
                3 => {
                    if let Some(m) = s.choose_mut(&mut rng) {
                        m.1 = rng.gen_range(0..pools[m.0].len());
                    }
                }
                _ => {
                    let role = rng.gen_range(0..3);
                    s.push((role, rng.gen_range(0..pools[role].len()), rng.gen_range(0..3)));
                }
            }
            s
        } else {
            let mut s = Shape::new();
            for (role, pool) in pools.iter().enumerate() {
                if rng.gen_bool(params.unknown_rate) {
                    continue;
                }
                for _ in 0..rng.gen_range(1..=2) {
                    s.push((role, rng.gen_range(0..pool.len()), rng.gen_range(0..3)));
                }
            }
            s
        };
        let name = iri(&format!("tuple/t{i:05}"));
        out.push(&name, RDF_TYPE, &iri("PharmacogenomicRelationship"));
        let source = iri(&format!("source/s{}", rng.gen_range(0..params.n_sources)));
        out.push(&name, &iri("source"), &source);
        for &(role, member, pred) in &shape {
            let (m, p) = (&pools[role][member], iri(PREDICATES[pred]));
            if role == 2 {
                out.push(&name, &p, m);
            } else {
                out.push(m, &p, &name);
            }
        }
        shapes.push(shape);
    }

    GeneratedInstance {
        triples: out.triples,
        config: generated_config(),
    }
}

fn generated_config() -> ConfigDocument {
    let preorders = [
        PreorderDoc::Onto {
            ontology: "drugs".into(),
        },
        PreorderDoc::Link {
            predicate: iri("partOf"),
        },
        PreorderDoc::Onto {
            ontology: "phenotypes".into(),
        },
    ];
    let mut arguments = Vec::new();
    let mut partition = Vec::new();
    for (r, role) in ROLES.iter().enumerate() {
        let mut indices = Vec::new();
        for p in PREDICATES {
            let index = arguments.len() + 1;
            indices.push(index);
            arguments.push(ArgumentDoc {
                index,
                role_class: iri(role),
                predicate: iri(p),
                direction: if r == 2 {
                    Direction::TupleToMember
                } else {
                    Direction::MemberToTuple
                },
                preorder: preorders[r].clone(),
                closed_marker: None,
            });
        }
        partition.push(BlockDoc {
            indices,
            preorder: preorders[r].clone(),
            dependency_predicates: if r == 2 { vec![iri("dependsOn")] } else { Vec::new() },
        });
    }
    ConfigDocument {
        tuple_class: iri("PharmacogenomicRelationship"),
        source_predicate: Some(iri("source")),
        closed_predicate: None,
        top_class: OWL_THING.into(),
        vocabulary: Default::default(),
        ontologies: ONTOLOGIES
            .iter()
            .map(|name| OntologyDoc {
                name: name.to_string(),
                roots: vec![iri(&format!("{name}/Root"))],
            })
            .collect(),
        reflexive_transitive_predicates: vec![iri("partOf")],
        arguments,
        partition,
        gammas: GammasDoc::default(),
        output: OutputDoc::default(),
    }
}

/// A random knowledge base for checking preorder laws.
pub struct LawInstance {
    pub kb: KnowledgeBase,
    pub view: ViewId,
    pub link: PredicateId,
    pub individuals: Vec<IndividualId>,
}

impl LawInstance {
    /// A random subset of the canonical individuals, possibly empty.
    pub fn random_set(&self, rng: &mut impl Rng, max_len: usize) -> MemberSet {
        let n = rng.gen_range(0..=max_len.min(self.individuals.len()));
        MemberSet::new(&self.kb, (0..n).map(|_| *self.individuals.choose(rng).expect("non-empty")))
    }
}

/// At most 30 individuals and 15 classes, with random subsumptions
/// (cycles allowed), typings, links and identities.
pub fn law_instance(seed: u64) -> LawInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_ind = rng.gen_range(1..=30);
    let n_cls = rng.gen_range(1..=15);
    let mut out = Out {
        triples: Vec::new(),
        seen: HashSet::new(),
    };
    let class = |i: usize| iri(&format!("law/C{i}"));
    let ind = |i: usize| iri(&format!("law/e{i}"));
    for i in 1..n_cls {
        let parent = rng.gen_range(0..n_cls);
        if parent != i {
            out.push(&class(i), RDFS_SUBCLASS_OF, &class(parent));
        }
    }
    if n_cls > 1 && rng.gen_bool(0.2) {
        out.push(&class(0), RDFS_SUBCLASS_OF, &class(rng.gen_range(1..n_cls)));
    }
    for i in 0..n_ind {
        out.push(&ind(i), &iri("law/exists"), &iri("law/anchor"));
        for _ in 0..rng.gen_range(0..=2) {
            out.push(&ind(i), RDF_TYPE, &class(rng.gen_range(0..n_cls)));
        }
        if rng.gen_bool(0.1) {
            out.push(&ind(i), RDF_TYPE, OWL_THING);
        }
        for _ in 0..rng.gen_range(0..=2) {
            out.push(&ind(i), &iri("law/partOf"), &ind(rng.gen_range(0..n_ind)));
        }
        if rng.gen_bool(0.1) {
            out.push(&ind(i), OWL_SAME_AS, &ind(rng.gen_range(0..n_ind)));
        }
    }
    let roots = if rng.gen_bool(0.5) {
        Vec::new()
    } else {
        vec![class(rng.gen_range(0..n_cls))]
    };
    let options = LoadOptions {
        reflexive_transitive: vec![iri("law/partOf")],
        views: vec![ViewDecl::new("law", roots)],
        declared_classes: (0..n_cls).map(class).collect(),
        ..LoadOptions::default()
    };
    let kb = KnowledgeBase::load(&out.triples, &options).expect("law instance loads");
    let individuals: BTreeSet<IndividualId> = (0..n_ind)
        .map(|i| kb.canonical_of(&ind(i)).expect("declared"))
        .collect();
    LawInstance {
        view: kb.view("law").expect("declared view"),
        link: kb.predicate(&iri("law/partOf")).expect("designated"),
        kb,
        individuals: individuals.into_iter().collect(),
    }
}
