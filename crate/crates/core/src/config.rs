//! Matching configuration: the JSON document users write, and its form
//! resolved against a loaded knowledge base.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{
    ClassId, IndividualId, KnowledgeBase, LoadOptions, PredicateId, ViewDecl, Vocabulary, OWL_THING,
};
use crate::preorder::PreorderSpec;

/// Which way the qualifying link runs between the tuple and its member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TupleToMember,
    MemberToTuple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreorderDoc {
    Subset,
    Link { predicate: String },
    Onto { ontology: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgumentDoc {
    pub index: usize,
    pub role_class: String,
    pub predicate: String,
    pub direction: Direction,
    pub preorder: PreorderDoc,
    /// Object of a `closed_predicate` triple marking this argument as
    /// explicitly empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_marker: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub indices: Vec<usize>,
    pub preorder: PreorderDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dependency_predicates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyDoc {
    pub name: String,
    #[serde(default)]
    pub roots: Vec<String>,
}

/// γ_S as written: a decimal number or a `"num/den"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fraction {
    Number(f64),
    Text(String),
}

impl Fraction {
    /// Exact value of the fraction as written. Decimals are read digit by
    /// digit, so `0.8` is exactly 4/5.
    pub fn to_ratio(&self) -> Result<Ratio<u64>, String> {
        match self {
            Fraction::Number(f) => decimal_ratio(&format!("{f}")),
            Fraction::Text(s) => match s.split_once('/') {
                Some((n, d)) => {
                    let n: u64 = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
                    let d: u64 = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
                    if d == 0 {
                        return Err(format!("zero denominator in {s:?}"));
                    }
                    Ok(Ratio::new(n, d))
                }
                None => decimal_ratio(s.trim()),
            },
        }
    }
}

impl Eq for Fraction {}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fraction::Number(x) => write!(f, "{x}"),
            Fraction::Text(s) => f.write_str(s),
        }
    }
}

fn decimal_ratio(s: &str) -> Result<Ratio<u64>, String> {
    let bad = || format!("{s:?} is not a non-negative decimal");
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int_part: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_part: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int_part
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac_part))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammasDoc {
    #[serde(default = "default_gamma_unknown")]
    pub unknown: usize,
    #[serde(default = "default_gamma_sim")]
    pub sim: Fraction,
    #[serde(default = "default_gamma_comp")]
    pub comp: usize,
}

fn default_gamma_unknown() -> usize {
    3
}
fn default_gamma_sim() -> Fraction {
    Fraction::Number(0.8)
}
fn default_gamma_comp() -> usize {
    2
}

impl Default for GammasDoc {
    fn default() -> Self {
        GammasDoc {
            unknown: default_gamma_unknown(),
            sim: default_gamma_sim(),
            comp: default_gamma_comp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    #[serde(default = "yes")]
    pub transitive_closure: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputDoc {
    fn default() -> Self {
        OutputDoc {
            transitive_closure: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rdf_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_class_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_property_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub same_as: Option<String>,
}

fn default_top() -> String {
    OWL_THING.into()
}

fn is_default_vocab(v: &VocabularyDoc) -> bool {
    *v == VocabularyDoc::default()
}

/// The configuration document as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub tuple_class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_predicate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_predicate: Option<String>,
    #[serde(default = "default_top")]
    pub top_class: String,
    #[serde(default, skip_serializing_if = "is_default_vocab")]
    pub vocabulary: VocabularyDoc,
    #[serde(default)]
    pub ontologies: Vec<OntologyDoc>,
    #[serde(default)]
    pub reflexive_transitive_predicates: Vec<String>,
    pub arguments: Vec<ArgumentDoc>,
    pub partition: Vec<BlockDoc>,
    #[serde(default)]
    pub gammas: GammasDoc,
    #[serde(default)]
    pub output: OutputDoc,
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    fn vocabulary(&self) -> Vocabulary {
        let d = Vocabulary::default();
        let v = &self.vocabulary;
        Vocabulary {
            rdf_type: v.rdf_type.clone().unwrap_or(d.rdf_type),
            sub_class_of: v.sub_class_of.clone().unwrap_or(d.sub_class_of),
            sub_property_of: v.sub_property_of.clone().unwrap_or(d.sub_property_of),
            same_as: v.same_as.clone().unwrap_or(d.same_as),
        }
    }

    /// Load options that also register every class and predicate the
    /// configuration names, so a KB lacking them still loads.
    pub fn load_options(&self) -> LoadOptions {
        let mut options = self.data_load_options();
        let mut classes = vec![self.tuple_class.clone()];
        let mut preds: Vec<String> = Vec::new();
        for a in &self.arguments {
            classes.push(a.role_class.clone());
            preds.push(a.predicate.clone());
        }
        for b in &self.partition {
            preds.extend(b.dependency_predicates.iter().cloned());
        }
        preds.extend(self.source_predicate.iter().cloned());
        preds.extend(self.closed_predicate.iter().cloned());
        for o in &self.ontologies {
            classes.extend(o.roots.iter().cloned());
        }
        options.declared_classes = classes;
        options.declared_predicates = preds;
        options
    }

    /// Load options with no declared vocabulary: only the data defines
    /// what exists. Used for consistency checks.
    pub fn data_load_options(&self) -> LoadOptions {
        LoadOptions {
            vocabulary: self.vocabulary(),
            top_class: self.top_class.clone(),
            reflexive_transitive: self.reflexive_transitive_predicates.clone(),
            views: self
                .ontologies
                .iter()
                .map(|o| ViewDecl::new(o.name.clone(), o.roots.iter().cloned()))
                .collect(),
            declared_classes: Vec::new(),
            declared_predicates: Vec::new(),
        }
    }

    /// Problems detectable without a knowledge base.
    pub fn structural_findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.arguments.len();
        if n == 0 {
            out.push("no arguments declared".to_string());
        }
        let mut seen = BTreeSet::new();
        for a in &self.arguments {
            if a.index == 0 || a.index > n {
                out.push(format!("argument index {} outside 1..={n}", a.index));
            } else if !seen.insert(a.index) {
                out.push(format!("argument index {} declared twice", a.index));
            }
        }
        let mut pairs = HashSet::new();
        for a in &self.arguments {
            if !pairs.insert((&a.role_class, &a.predicate)) {
                out.push(format!(
                    "argument {}: (role class <{}>, predicate <{}>) already used",
                    a.index, a.role_class, a.predicate
                ));
            }
            if a.closed_marker.is_some() && self.closed_predicate.is_none() {
                out.push(format!("argument {} has a closed marker but no closed_predicate is set", a.index));
            }
        }

        let mut covered: BTreeSet<usize> = BTreeSet::new();
        for (k, b) in self.partition.iter().enumerate() {
            if b.indices.is_empty() {
                out.push(format!("partition block {} is empty", k + 1));
            }
            for &i in &b.indices {
                if i == 0 || i > n {
                    out.push(format!("partition block {} names index {i} outside 1..={n}", k + 1));
                } else if !covered.insert(i) {
                    out.push(format!("index {i} appears in more than one partition block"));
                }
            }
        }
        for i in 1..=n {
            if !covered.contains(&i) {
                out.push(format!("partition does not cover index {i}"));
            }
        }

        let m = self.partition.len();
        if self.gammas.unknown > m {
            out.push(format!(
                "gammas.unknown = {} exceeds the number of partition blocks ({m})",
                self.gammas.unknown
            ));
        }
        if self.gammas.comp > m {
            out.push(format!(
                "gammas.comp = {} exceeds the number of partition blocks ({m})",
                self.gammas.comp
            ));
        }
        match self.gammas.sim.to_ratio() {
            Ok(r) if r > Ratio::from_integer(1) => {
                out.push(format!("gammas.sim = {} is greater than 1", self.gammas.sim))
            }
            Ok(_) => {}
            Err(e) => out.push(format!("gammas.sim: {e}")),
        }

        let names: HashSet<&str> = self.ontologies.iter().map(|o| o.name.as_str()).collect();
        if names.len() != self.ontologies.len() {
            out.push("duplicate ontology names".to_string());
        }
        let designated: HashSet<&str> = self
            .reflexive_transitive_predicates
            .iter()
            .map(String::as_str)
            .collect();
        let preorders = self
            .arguments
            .iter()
            .map(|a| (format!("argument {}", a.index), &a.preorder))
            .chain(
                self.partition
                    .iter()
                    .enumerate()
                    .map(|(k, b)| (format!("partition block {}", k + 1), &b.preorder)),
            );
        for (what, p) in preorders {
            match p {
                PreorderDoc::Subset => {}
                PreorderDoc::Link { predicate } if !designated.contains(predicate.as_str()) => out.push(
                    format!("{what}: link predicate <{predicate}> is not listed as reflexive-transitive"),
                ),
                PreorderDoc::Link { .. } => {}
                PreorderDoc::Onto { ontology } if !names.contains(ontology.as_str()) => {
                    out.push(format!("{what}: unknown ontology '{ontology}'"))
                }
                PreorderDoc::Onto { .. } => {}
            }
        }
        out
    }

    /// Every IRI the configuration relies on that `kb` does not know.
    pub fn missing_vocabulary(&self, kb: &KnowledgeBase) -> Vec<String> {
        let mut out = Vec::new();
        let mut class = |iri: &str, what: &str| {
            if kb.class(iri).is_err() {
                out.push(format!("{what}: unknown class <{iri}>"));
            }
        };
        class(&self.tuple_class, "tuple_class");
        for a in &self.arguments {
            class(&a.role_class, &format!("argument {}", a.index));
        }
        for o in &self.ontologies {
            for r in &o.roots {
                class(r, &format!("ontology '{}'", o.name));
            }
        }
        let mut pred = |iri: &str, what: &str| {
            if kb.predicate(iri).is_err() {
                out.push(format!("{what}: unknown predicate <{iri}>"));
            }
        };
        for a in &self.arguments {
            pred(&a.predicate, &format!("argument {}", a.index));
        }
        for (k, b) in self.partition.iter().enumerate() {
            for d in &b.dependency_predicates {
                pred(d, &format!("partition block {}", k + 1));
            }
        }
        if let Some(p) = &self.source_predicate {
            pred(p, "source_predicate");
        }
        if let Some(p) = &self.closed_predicate {
            pred(p, "closed_predicate");
        }
        for p in &self.reflexive_transitive_predicates {
            pred(p, "reflexive_transitive_predicates");
        }
        out
    }

    fn preorder(&self, doc: &PreorderDoc, kb: &KnowledgeBase) -> Result<PreorderSpec> {
        let spec = match doc {
            PreorderDoc::Subset => PreorderSpec::Subset,
            PreorderDoc::Link { predicate } => PreorderSpec::LinkClosure(kb.predicate(predicate)?),
            PreorderDoc::Onto { ontology } => PreorderSpec::OntoSubsumption(kb.view(ontology)?),
        };
        spec.check(kb)?;
        Ok(spec)
    }

    /// Resolves every IRI and name against `kb`.
    pub fn resolve(&self, kb: &KnowledgeBase) -> Result<MatchingConfig> {
        if let Some(first) = self.structural_findings().into_iter().next() {
            return Err(Error::Config(first));
        }
        let mut args: Vec<&ArgumentDoc> = self.arguments.iter().collect();
        args.sort_by_key(|a| a.index);
        let closed_predicate = self.closed_predicate.as_deref().map(|p| kb.predicate(p)).transpose()?;
        let arguments = args
            .into_iter()
            .map(|a| {
                Ok(ArgumentSchema {
                    index: a.index,
                    role_class: kb.class(&a.role_class)?,
                    predicate: kb.predicate(&a.predicate)?,
                    direction: a.direction,
                    preorder: self.preorder(&a.preorder, kb)?,
                    // a marker absent from the data can never be asserted
                    closed_marker: a
                        .closed_marker
                        .as_deref()
                        .and_then(|m| kb.canonical_of(m).ok()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let blocks = self
            .partition
            .iter()
            .map(|b| {
                Ok(Block {
                    positions: b.indices.iter().map(|i| i - 1).collect(),
                    preorder: self.preorder(&b.preorder, kb)?,
                    dependency_predicates: b
                        .dependency_predicates
                        .iter()
                        .map(|p| kb.predicate(p))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sim = self.gammas.sim.to_ratio().map_err(Error::Config)?;
        Ok(MatchingConfig {
            tuple_class: kb.class(&self.tuple_class)?,
            source_predicate: self
                .source_predicate
                .as_deref()
                .map(|p| kb.predicate(p))
                .transpose()?,
            closed_predicate,
            arguments,
            partition: PartitionSpec { blocks },
            gammas: Gammas {
                unknown: self.gammas.unknown,
                sim,
                comp: self.gammas.comp,
            },
            emit_transitive_closure: self.output.transitive_closure,
        })
    }
}

/// Resolved argument schema. `index` is 1-based, as in the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentSchema {
    pub index: usize,
    pub role_class: ClassId,
    pub predicate: PredicateId,
    pub direction: Direction,
    pub preorder: PreorderSpec,
    pub closed_marker: Option<IndividualId>,
}

/// One block of the partition. `positions` are 0-based argument positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub positions: Vec<usize>,
    pub preorder: PreorderSpec,
    pub dependency_predicates: Vec<PredicateId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gammas {
    /// Minimum number of blocks specified on both sides.
    pub unknown: usize,
    /// Minimum similarity required of every specified block.
    pub sim: Ratio<u64>,
    /// Minimum number of comparable blocks.
    pub comp: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingConfig {
    pub tuple_class: ClassId,
    pub source_predicate: Option<PredicateId>,
    pub closed_predicate: Option<PredicateId>,
    pub arguments: Vec<ArgumentSchema>,
    pub partition: PartitionSpec,
    pub gammas: Gammas,
    pub emit_transitive_closure: bool,
}

impl MatchingConfig {
    pub fn arity(&self) -> usize {
        self.arguments.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> ConfigDocument {
        ConfigDocument::from_json(
            r#"{
              "tuple_class": "http://ex/T",
              "ontologies": [{"name": "o", "roots": []}],
              "reflexive_transitive_predicates": ["http://ex/partOf"],
              "arguments": [
                {"index": 1, "role_class": "http://ex/A", "predicate": "http://ex/p", "direction": "member_to_tuple", "preorder": {"kind": "onto", "ontology": "o"}},
                {"index": 2, "role_class": "http://ex/B", "predicate": "http://ex/p", "direction": "member_to_tuple", "preorder": {"kind": "link", "predicate": "http://ex/partOf"}},
                {"index": 3, "role_class": "http://ex/C", "predicate": "http://ex/p", "direction": "tuple_to_member", "preorder": {"kind": "subset"}}
              ],
              "partition": [
                {"indices": [1], "preorder": {"kind": "subset"}},
                {"indices": [2], "preorder": {"kind": "subset"}},
                {"indices": [3], "preorder": {"kind": "subset"}}
              ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_follow_reference_values() {
        let d = doc();
        assert_eq!(d.gammas.unknown, 3);
        assert_eq!(d.gammas.comp, 2);
        assert_eq!(d.gammas.sim.to_ratio().unwrap(), Ratio::new(4, 5));
        assert!(d.output.transitive_closure);
        assert_eq!(d.top_class, OWL_THING);
        assert!(d.structural_findings().is_empty(), "{:?}", d.structural_findings());
    }

    #[test]
    fn json_roundtrip() {
        let d = doc();
        assert_eq!(ConfigDocument::from_json(&d.to_json_pretty()).unwrap(), d);
    }

    #[test]
    fn fractions_are_exact() {
        assert_eq!(Fraction::Number(0.8).to_ratio().unwrap(), Ratio::new(4, 5));
        assert_eq!(Fraction::Number(1.0).to_ratio().unwrap(), Ratio::new(1, 1));
        assert_eq!(Fraction::Text("2/3".into()).to_ratio().unwrap(), Ratio::new(2, 3));
        assert_eq!(Fraction::Text("0.25".into()).to_ratio().unwrap(), Ratio::new(1, 4));
        assert!(Fraction::Number(-0.5).to_ratio().is_err());
        assert!(Fraction::Text("1/0".into()).to_ratio().is_err());
    }

    #[test]
    fn partition_coverage_names_missing_index() {
        let mut d = doc();
        d.partition.pop();
        let f = d.structural_findings();
        assert!(f.iter().any(|m| m.contains("does not cover index 3")), "{f:?}");
    }

    #[test]
    fn gamma_bounds() {
        let mut d = doc();
        d.gammas.unknown = 4;
        d.gammas.comp = 5;
        d.gammas.sim = Fraction::Number(1.5);
        let f = d.structural_findings();
        assert_eq!(f.len(), 3, "{f:?}");
    }

    #[test]
    fn link_predicate_must_be_designated() {
        let mut d = doc();
        d.reflexive_transitive_predicates.clear();
        assert!(d
            .structural_findings()
            .iter()
            .any(|m| m.contains("not listed as reflexive-transitive")));
    }

    #[test]
    fn resolves_against_declared_vocabulary() {
        let d = doc();
        let kb = KnowledgeBase::load(&[], &d.load_options()).unwrap();
        let cfg = d.resolve(&kb).unwrap();
        assert_eq!(cfg.arity(), 3);
        assert_eq!(cfg.partition.blocks[2].positions, vec![2]);

        let bare = KnowledgeBase::load(&[], &d.data_load_options()).unwrap();
        assert!(d.resolve(&bare).is_err());
        let missing = d.missing_vocabulary(&bare);
        assert!(missing.iter().any(|m| m.contains("http://ex/T")));
        assert!(missing.iter().any(|m| m.contains("http://ex/p")));
    }
}
