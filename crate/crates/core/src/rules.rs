//! The five matching rules, semantic set difference and the similarity
//! operator used by the weakest rule.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::config::{Gammas, MatchingConfig};
use crate::error::{Error, Result};
use crate::kb::{IndividualId, KnowledgeBase};
use crate::preorder::{element_leq, value_leq, ArgumentValue, MemberSet, PreorderSpec};
use crate::tuples::{aggregate_all, TupleRecord};

/// Relatedness between two tuples, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelatednessLevel {
    Identical,
    Equivalent,
    MoreSpecific,
    ArgComparable,
    WeaklyRelated,
}

impl RelatednessLevel {
    pub const ALL: [RelatednessLevel; 5] = [
        RelatednessLevel::Identical,
        RelatednessLevel::Equivalent,
        RelatednessLevel::MoreSpecific,
        RelatednessLevel::ArgComparable,
        RelatednessLevel::WeaklyRelated,
    ];

    /// Number of the rule that produces this level, 1 to 5.
    pub fn rule(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_rule(rule: u8) -> Option<Self> {
        Self::ALL.get(usize::from(rule).checked_sub(1)?).copied()
    }

    /// Predicate used when the link is written out.
    pub fn predicate_iri(self) -> &'static str {
        match self {
            RelatednessLevel::Identical => "http://www.w3.org/2002/07/owl#sameAs",
            RelatednessLevel::Equivalent => "http://www.w3.org/2004/02/skos/core#closeMatch",
            RelatednessLevel::MoreSpecific => "http://www.w3.org/2004/02/skos/core#broadMatch",
            RelatednessLevel::ArgComparable => "http://www.w3.org/2004/02/skos/core#relatedMatch",
            RelatednessLevel::WeaklyRelated => "http://www.w3.org/2004/02/skos/core#related",
        }
    }

    pub fn from_predicate_iri(iri: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.predicate_iri() == iri)
    }

    /// Whether links of this level are emitted in both directions.
    pub fn is_symmetric(self) -> bool {
        self != RelatednessLevel::MoreSpecific
    }

    /// Whether the level takes part in transitive closure.
    pub fn is_transitive(self) -> bool {
        self <= RelatednessLevel::MoreSpecific
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelatednessLevel::Identical => "=",
            RelatednessLevel::Equivalent => "∼",
            RelatednessLevel::MoreSpecific => "≼",
            RelatednessLevel::ArgComparable => "≶",
            RelatednessLevel::WeaklyRelated => "∝",
        }
    }
}

impl fmt::Display for RelatednessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A directed alignment link. For `MoreSpecific` the origin is the more
/// specific tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchLink {
    pub origin: IndividualId,
    pub destination: IndividualId,
    pub level: RelatednessLevel,
    /// Added by transitive closure rather than by a rule.
    pub induced: bool,
}

impl MatchLink {
    pub fn rule(&self) -> u8 {
        self.level.rule()
    }
}

/// Outcome of comparing a pair. `forward` is true when the first tuple is
/// the origin; symmetric levels always report `true`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairMatch {
    pub level: RelatednessLevel,
    pub forward: bool,
}

/// Semantic set difference: members of `a` whose singleton is not below `b`.
pub fn ssd(a: &MemberSet, b: &MemberSet, spec: PreorderSpec, kb: &KnowledgeBase) -> Result<MemberSet> {
    spec.check(kb)?;
    Ok(ssd_unchecked(a, b, spec, kb))
}

fn ssd_unchecked(a: &MemberSet, b: &MemberSet, spec: PreorderSpec, kb: &KnowledgeBase) -> MemberSet {
    MemberSet::from_canonical(a.iter().filter(|&e| !element_leq(e, b.as_slice(), spec, kb)))
}

/// Similarity of two known aggregated arguments as an exact ratio in [0, 1].
pub fn similarity(a: &MemberSet, b: &MemberSet, spec: PreorderSpec, kb: &KnowledgeBase) -> Result<Ratio<u64>> {
    spec.check(kb)?;
    similarity_unchecked(a, b, spec, kb)
}

pub(crate) fn similarity_unchecked(
    a: &MemberSet,
    b: &MemberSet,
    spec: PreorderSpec,
    kb: &KnowledgeBase,
) -> Result<Ratio<u64>> {
    let (va, vb) = (ArgumentValue::Members(a.clone()), ArgumentValue::Members(b.clone()));
    if value_leq(&va, &vb, spec, kb) || value_leq(&vb, &va, spec, kb) {
        return Ok(Ratio::from_integer(1));
    }
    let union = a.union(b);
    if union.is_empty() {
        return Err(Error::UndefinedRatio);
    }
    let diff = ssd_unchecked(a, b, spec, kb).union(&ssd_unchecked(b, a, spec, kb));
    Ok(Ratio::from_integer(1) - Ratio::new(diff.len() as u64, union.len() as u64))
}

/// Answers the questions the rules ask about one ordered pair (t1, t2).
pub(crate) trait PairView {
    fn arity(&self) -> usize;
    /// Argument `i` coincides in both tuples.
    fn same(&mut self, i: usize) -> bool;
    /// Argument `i` of t1 (`first`) or t2 is unknown.
    fn unknown(&self, i: usize, first: bool) -> bool;
    /// `t1_i ≼ t2_i` when `forward`, else `t2_i ≼ t1_i`.
    fn leq(&mut self, i: usize, forward: bool) -> bool;
    fn block_count(&self) -> usize;
    /// Block `k` is known in both tuples.
    fn block_specified(&mut self, k: usize) -> bool;
    /// Similarity of block `k`; only asked when the block is specified.
    fn similarity(&mut self, k: usize) -> Ratio<u64>;
}

/// Applies Rules 1 to 5 in order and reports the first that fires.
pub(crate) fn decide<V: PairView>(view: &mut V, gammas: &Gammas) -> Option<PairMatch> {
    let n = view.arity();
    let sym = |level| Some(PairMatch { level, forward: true });

    if (0..n).all(|i| view.same(i)) {
        return sym(RelatednessLevel::Identical);
    }
    let fwd = (0..n).all(|i| view.leq(i, true));
    let bwd = (0..n).all(|i| view.leq(i, false));
    match (fwd, bwd) {
        (true, true) => return sym(RelatednessLevel::Equivalent),
        (true, false) | (false, true) => {
            return Some(PairMatch {
                level: RelatednessLevel::MoreSpecific,
                forward: fwd,
            })
        }
        (false, false) => {}
    }
    let comparable = (0..n).all(|i| {
        view.same(i)
            || (!view.unknown(i, false) && view.leq(i, true))
            || (!view.unknown(i, true) && view.leq(i, false))
    });
    if comparable {
        return sym(RelatednessLevel::ArgComparable);
    }

    let specified: Vec<usize> = (0..view.block_count()).filter(|&k| view.block_specified(k)).collect();
    if specified.len() < gammas.unknown {
        return None;
    }
    let sims: Vec<Ratio<u64>> = specified.iter().map(|&k| view.similarity(k)).collect();
    let one = Ratio::from_integer(1);
    let all_similar = sims.iter().all(|s| *s >= gammas.sim);
    let comparable_blocks = sims.iter().filter(|s| **s == one).count();
    (all_similar || comparable_blocks >= gammas.comp).then_some(PairMatch {
        level: RelatednessLevel::WeaklyRelated,
        forward: true,
    })
}

struct DirectView<'a> {
    t1: &'a TupleRecord,
    t2: &'a TupleRecord,
    config: &'a MatchingConfig,
    kb: &'a KnowledgeBase,
    aggregates: Option<(Vec<ArgumentValue>, Vec<ArgumentValue>)>,
}

impl DirectView<'_> {
    fn aggregates(&mut self) -> &(Vec<ArgumentValue>, Vec<ArgumentValue>) {
        let (t1, t2, config, kb) = (self.t1, self.t2, self.config, self.kb);
        self.aggregates
            .get_or_insert_with(|| (aggregate_all(t1, config, kb), aggregate_all(t2, config, kb)))
    }
}

impl PairView for DirectView<'_> {
    fn arity(&self) -> usize {
        self.config.arity()
    }

    fn same(&mut self, i: usize) -> bool {
        self.t1.args[i] == self.t2.args[i]
    }

    fn unknown(&self, i: usize, first: bool) -> bool {
        let t = if first { self.t1 } else { self.t2 };
        t.args[i].is_unknown()
    }

    fn leq(&mut self, i: usize, forward: bool) -> bool {
        let (a, b) = if forward {
            (&self.t1.args[i], &self.t2.args[i])
        } else {
            (&self.t2.args[i], &self.t1.args[i])
        };
        value_leq(a, b, self.config.arguments[i].preorder, self.kb)
    }

    fn block_count(&self) -> usize {
        self.config.partition.blocks.len()
    }

    fn block_specified(&mut self, k: usize) -> bool {
        let (a, b) = self.aggregates();
        !a[k].is_unknown() && !b[k].is_unknown()
    }

    fn similarity(&mut self, k: usize) -> Ratio<u64> {
        let spec = self.config.partition.blocks[k].preorder;
        let kb = self.kb;
        let (a, b) = self.aggregates();
        let (Some(a), Some(b)) = (a[k].members(), b[k].members()) else {
            unreachable!("similarity asked for an unspecified block")
        };
        similarity_unchecked(a, b, spec, kb).expect("specified blocks are never both empty and incomparable")
    }
}

pub(crate) fn check_pair_inputs(
    tuples: &[&TupleRecord],
    config: &MatchingConfig,
    kb: &KnowledgeBase,
) -> Result<()> {
    for a in &config.arguments {
        a.preorder.check(kb)?;
    }
    for b in &config.partition.blocks {
        b.preorder.check(kb)?;
        if b.positions.iter().any(|&i| i >= config.arity()) {
            return Err(Error::config("partition refers to a missing argument"));
        }
    }
    for t in tuples {
        if t.args.len() != config.arity() {
            return Err(Error::config(format!(
                "tuple <{}> has {} arguments, configuration expects {}",
                kb.individual_iri(t.id),
                t.args.len(),
                config.arity()
            )));
        }
    }
    Ok(())
}

/// Compares two tuples with Rules 1 to 5 in priority order.
pub fn match_pair(
    t1: &TupleRecord,
    t2: &TupleRecord,
    config: &MatchingConfig,
    kb: &KnowledgeBase,
) -> Result<Option<PairMatch>> {
    check_pair_inputs(&[t1, t2], config, kb)?;
    let mut view = DirectView {
        t1,
        t2,
        config,
        kb,
        aggregates: None,
    };
    Ok(decide(&mut view, &config.gammas))
}
