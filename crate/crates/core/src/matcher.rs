//! All-pairs matching, transitive closure and per-source link counts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_rational::Ratio;

use crate::config::MatchingConfig;
use crate::error::Result;
use crate::kb::{IndividualId, KnowledgeBase};
use crate::preorder::{value_leq, ArgumentValue, PreorderSpec};
use crate::rules::{
    check_pair_inputs, decide, similarity_unchecked, MatchLink, PairMatch, PairView, RelatednessLevel,
};
use crate::tuples::{aggregate_all, TupleRecord};

/// How the pair space is scheduled. Output does not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `threads: None` uses every available core. Runs sequentially when
    /// the crate is built without the `parallel` feature.
    Parallel { threads: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { threads: None }
    }
}

/// Link counts per (rule, origin source, destination source).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMatrix {
    sources: BTreeSet<Arc<str>>,
    counts: BTreeMap<(u8, Arc<str>, Arc<str>), u64>,
}

impl SourceMatrix {
    pub fn new<S: AsRef<str>>(sources: impl IntoIterator<Item = S>) -> Self {
        SourceMatrix {
            sources: sources.into_iter().map(|s| Arc::from(s.as_ref())).collect(),
            counts: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, rule: u8, origin: &str, destination: &str, n: u64) {
        let o = self.intern(origin);
        let d = self.intern(destination);
        *self.counts.entry((rule, o, d)).or_default() += n;
    }

    fn intern(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.sources.get(s) {
            return a.clone();
        }
        let a: Arc<str> = Arc::from(s);
        self.sources.insert(a.clone());
        a
    }

    pub fn count(&self, rule: u8, origin: &str, destination: &str) -> u64 {
        self.counts
            .get(&(rule, Arc::from(origin), Arc::from(destination)))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self, rule: u8) -> u64 {
        self.counts.iter().filter(|((r, _, _), _)| *r == rule).map(|(_, n)| n).sum()
    }

    /// Known source labels, sorted.
    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.sources.iter().map(|s| &**s)
    }

    /// Every cell for rules 1 to 5, zeros included, in rule then source order.
    pub fn cells(&self) -> Vec<(u8, &str, &str, u64)> {
        let mut out = Vec::with_capacity(5 * self.sources.len() * self.sources.len());
        for level in RelatednessLevel::ALL {
            let r = level.rule();
            for o in &self.sources {
                for d in &self.sources {
                    let n = self.counts.get(&(r, o.clone(), d.clone())).copied().unwrap_or(0);
                    out.push((r, &**o, &**d, n));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// Sorted by origin, destination and level.
    pub links: Vec<MatchLink>,
    pub matrix: SourceMatrix,
}

/// Matches every unordered pair of distinct tuples on all available cores.
pub fn match_all(tuples: &[TupleRecord], config: &MatchingConfig, kb: &KnowledgeBase) -> Result<MatchResult> {
    match_all_with(tuples, config, kb, Execution::default())
}

pub fn match_all_with(
    tuples: &[TupleRecord],
    config: &MatchingConfig,
    kb: &KnowledgeBase,
    execution: Execution,
) -> Result<MatchResult> {
    let refs: Vec<&TupleRecord> = tuples.iter().collect();
    check_pair_inputs(&refs, config, kb)?;
    let engine = Engine::new(tuples, config, kb);
    let matches = run_rows(tuples.len(), execution, |cache, i, out| engine.row(cache, i, out))?;

    let mut links = Vec::with_capacity(matches.len() * 2);
    for (i, j, m) in matches {
        let (a, b) = (tuples[i].id, tuples[j].id);
        let link = |origin, destination| MatchLink {
            origin,
            destination,
            level: m.level,
            induced: false,
        };
        if m.level.is_symmetric() {
            links.push(link(a, b));
            links.push(link(b, a));
        } else if m.forward {
            links.push(link(a, b));
        } else {
            links.push(link(b, a));
        }
    }
    let links = if config.emit_transitive_closure {
        close_transitive(&links)
    } else {
        links.sort_unstable();
        links
    };

    let source_of: HashMap<IndividualId, &str> = tuples.iter().map(|t| (t.id, &*t.source)).collect();
    let mut matrix = SourceMatrix::new(tuples.iter().map(|t| &*t.source));
    for l in &links {
        matrix.add(l.rule(), source_of[&l.origin], source_of[&l.destination], 1);
    }
    Ok(MatchResult { links, matrix })
}

type RowMatches = Vec<(usize, usize, PairMatch)>;

#[cfg(feature = "parallel")]
fn run_rows<F>(n: usize, execution: Execution, row: F) -> Result<RowMatches>
where
    F: Fn(&mut Cache, usize, &mut RowMatches) + Sync,
{
    use rayon::prelude::*;
    let threads = match execution {
        Execution::Sequential => return Ok(run_rows_sequential(n, row)),
        Execution::Parallel { threads } => threads,
    };
    let work = || {
        let mut rows: Vec<RowMatches> = (0..n)
            .into_par_iter()
            .map_init(Cache::default, |cache, i| {
                let mut out = Vec::new();
                row(cache, i, &mut out);
                out
            })
            .collect();
        rows.iter_mut().flat_map(std::mem::take).collect()
    };
    match threads {
        None => Ok(work()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| crate::Error::config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_rows<F>(n: usize, _execution: Execution, row: F) -> Result<RowMatches>
where
    F: Fn(&mut Cache, usize, &mut RowMatches),
{
    Ok(run_rows_sequential(n, row))
}

fn run_rows_sequential<F>(n: usize, row: F) -> RowMatches
where
    F: Fn(&mut Cache, usize, &mut RowMatches),
{
    let mut cache = Cache::default();
    let mut out = Vec::new();
    for i in 0..n {
        row(&mut cache, i, &mut out);
    }
    out
}

/// Interned argument and aggregate values. Slots `0..m` are arguments,
/// slots `m..m+k` are partition blocks.
struct Engine<'a> {
    config: &'a MatchingConfig,
    kb: &'a KnowledgeBase,
    specs: Vec<PreorderSpec>,
    values: Vec<Vec<ArgumentValue>>,
    /// `ids[t][slot]`
    ids: Vec<Vec<u32>>,
}

/// Per-worker memo of comparator and similarity results.
#[derive(Default)]
struct Cache {
    leq: HashMap<(u32, u32, u32), bool>,
    sim: HashMap<(u32, u32, u32), Ratio<u64>>,
}

const CACHE_LIMIT: usize = 1 << 22;

impl<'a> Engine<'a> {
    fn new(tuples: &[TupleRecord], config: &'a MatchingConfig, kb: &'a KnowledgeBase) -> Self {
        let m = config.arity();
        let specs: Vec<PreorderSpec> = config
            .arguments
            .iter()
            .map(|a| a.preorder)
            .chain(config.partition.blocks.iter().map(|b| b.preorder))
            .collect();
        let mut interners: Vec<HashMap<ArgumentValue, u32>> = vec![HashMap::new(); specs.len()];
        let mut values: Vec<Vec<ArgumentValue>> = vec![Vec::new(); specs.len()];
        let mut ids = Vec::with_capacity(tuples.len());
        for t in tuples {
            let agg = aggregate_all(t, config, kb);
            let row: Vec<u32> = t
                .args
                .iter()
                .chain(agg.iter())
                .enumerate()
                .map(|(slot, v)| {
                    *interners[slot].entry(v.clone()).or_insert_with(|| {
                        values[slot].push(v.clone());
                        (values[slot].len() - 1) as u32
                    })
                })
                .collect();
            debug_assert_eq!(row.len(), m + config.partition.blocks.len());
            ids.push(row);
        }
        Engine {
            config,
            kb,
            specs,
            values,
            ids,
        }
    }

    fn row(&self, cache: &mut Cache, i: usize, out: &mut RowMatches) {
        if cache.leq.len() > CACHE_LIMIT {
            cache.leq.clear();
        }
        if cache.sim.len() > CACHE_LIMIT {
            cache.sim.clear();
        }
        for j in i + 1..self.ids.len() {
            let mut view = CachedView {
                engine: self,
                cache,
                a: &self.ids[i],
                b: &self.ids[j],
            };
            if let Some(m) = decide(&mut view, &self.config.gammas) {
                out.push((i, j, m));
            }
        }
    }

    fn leq(&self, cache: &mut Cache, slot: usize, a: u32, b: u32) -> bool {
        if a == b {
            return true;
        }
        *cache.leq.entry((slot as u32, a, b)).or_insert_with(|| {
            let values = &self.values[slot];
            value_leq(&values[a as usize], &values[b as usize], self.specs[slot], self.kb)
        })
    }
}

struct CachedView<'e, 'c> {
    engine: &'e Engine<'e>,
    cache: &'c mut Cache,
    a: &'e [u32],
    b: &'e [u32],
}

impl PairView for CachedView<'_, '_> {
    fn arity(&self) -> usize {
        self.engine.config.arity()
    }

    fn same(&mut self, i: usize) -> bool {
        self.a[i] == self.b[i]
    }

    fn unknown(&self, i: usize, first: bool) -> bool {
        let id = if first { self.a[i] } else { self.b[i] };
        self.engine.values[i][id as usize].is_unknown()
    }

    fn leq(&mut self, i: usize, forward: bool) -> bool {
        let (x, y) = if forward { (self.a[i], self.b[i]) } else { (self.b[i], self.a[i]) };
        self.engine.leq(self.cache, i, x, y)
    }

    fn block_count(&self) -> usize {
        self.engine.config.partition.blocks.len()
    }

    fn block_specified(&mut self, k: usize) -> bool {
        let slot = self.engine.config.arity() + k;
        let v = &self.engine.values[slot];
        !v[self.a[slot] as usize].is_unknown() && !v[self.b[slot] as usize].is_unknown()
    }

    fn similarity(&mut self, k: usize) -> Ratio<u64> {
        let slot = self.engine.config.arity() + k;
        let (x, y) = (self.a[slot], self.b[slot]);
        let key = (slot as u32, x.min(y), x.max(y));
        let engine = self.engine;
        *self.cache.sim.entry(key).or_insert_with(|| {
            let v = &engine.values[slot];
            let (Some(p), Some(q)) = (v[key.1 as usize].members(), v[key.2 as usize].members()) else {
                unreachable!("similarity asked for an unspecified block")
            };
            similarity_unchecked(p, q, engine.specs[slot], engine.kb)
                .expect("specified blocks are never both empty and incomparable")
        })
    }
}

/// Adds, per level of Rules 1 to 3, every link implied by transitivity.
///
/// New links are marked induced. An induced link is dropped when its pair
/// is already linked at any level, or when a stronger level induces a link
/// for the same pair. Self-links are never produced. Output is sorted.
pub fn close_transitive(links: &[MatchLink]) -> Vec<MatchLink> {
    let linked_pairs: HashSet<(IndividualId, IndividualId)> =
        links.iter().map(|l| unordered(l.origin, l.destination)).collect();
    let mut induced: BTreeMap<(IndividualId, IndividualId), Vec<MatchLink>> = BTreeMap::new();

    for level in RelatednessLevel::ALL.into_iter().filter(|l| l.is_transitive()) {
        let mut adj: BTreeMap<IndividualId, Vec<IndividualId>> = BTreeMap::new();
        for l in links.iter().filter(|l| l.level == level) {
            adj.entry(l.origin).or_default().push(l.destination);
        }
        for &start in adj.keys() {
            let mut seen: HashSet<IndividualId> = HashSet::from([start]);
            let mut queue: VecDeque<IndividualId> = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &y in adj.get(&x).into_iter().flatten() {
                    if seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
            for t in seen {
                let pair = unordered(start, t);
                if t == start || linked_pairs.contains(&pair) {
                    continue;
                }
                let slot = induced.entry(pair).or_default();
                if slot.first().is_some_and(|l| l.level < level) {
                    continue;
                }
                if slot.first().is_some_and(|l| l.level > level) {
                    slot.clear();
                }
                slot.push(MatchLink {
                    origin: start,
                    destination: t,
                    level,
                    induced: true,
                });
            }
        }
    }

    let mut out: Vec<MatchLink> = links.to_vec();
    out.extend(induced.into_values().flatten());
    out.sort_unstable();
    out.dedup();
    out
}

fn unordered(a: IndividualId, b: IndividualId) -> (IndividualId, IndividualId) {
    (a.min(b), a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u32) -> IndividualId {
        IndividualId(n)
    }

    fn link(o: u32, d: u32, level: RelatednessLevel) -> MatchLink {
        MatchLink {
            origin: id(o),
            destination: id(d),
            level,
            induced: false,
        }
    }

    #[test]
    fn symmetric_chain_gains_both_directions() {
        use RelatednessLevel::Identical as I;
        let links = vec![link(0, 1, I), link(1, 0, I), link(1, 2, I), link(2, 1, I)];
        let closed = close_transitive(&links);
        let new: Vec<_> = closed.iter().filter(|l| l.induced).map(|l| (l.origin.0, l.destination.0)).collect();
        assert_eq!(new, vec![(0, 2), (2, 0)]);
        assert_eq!(close_transitive(&closed), closed);
    }

    #[test]
    fn path_closure_has_triangular_size() {
        use RelatednessLevel::MoreSpecific as M;
        for k in 1..8u32 {
            let links: Vec<_> = (0..k).map(|i| link(i, i + 1, M)).collect();
            let closed = close_transitive(&links);
            assert_eq!(closed.len() as u32, k * (k + 1) / 2);
            assert!(closed.iter().all(|l| l.origin < l.destination));
            assert_eq!(close_transitive(&closed), closed);
        }
    }

    #[test]
    fn existing_pairs_and_weaker_levels_are_not_duplicated() {
        use RelatednessLevel::*;
        let links = vec![
            link(0, 1, MoreSpecific),
            link(1, 2, MoreSpecific),
            link(0, 2, ArgComparable),
            link(2, 0, ArgComparable),
            link(3, 4, ArgComparable),
            link(4, 5, ArgComparable),
        ];
        let closed = close_transitive(&links);
        assert_eq!(closed.len(), links.len());
    }

    #[test]
    fn matrix_cells_cover_every_combination() {
        let mut m = SourceMatrix::new(["b", "a"]);
        m.add(3, "a", "b", 2);
        m.add(1, "c", "c", 1);
        assert_eq!(m.sources().collect::<Vec<_>>(), vec!["a", "b", "c"]);
        assert_eq!(m.cells().len(), 5 * 9);
        assert_eq!(m.count(3, "a", "b"), 2);
        assert_eq!(m.count(3, "b", "a"), 0);
        assert_eq!(m.total(3), 2);
        assert_eq!(m.total(1), 1);
    }
}
