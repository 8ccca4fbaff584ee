//! Reachability indices over small id graphs: strongly connected components
//! are condensed first, then ancestor lists or reachability bitsets are
//! accumulated in reverse topological order.

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

pub(crate) struct Condensed {
    /// Component index of every node.
    pub comp_of: Vec<u32>,
    /// Components in reverse topological order: every successor of a
    /// component appears before it.
    pub components: Vec<Vec<u32>>,
    /// Distinct successor components per component.
    pub succ: Vec<Vec<u32>>,
}

pub(crate) fn condense(n: usize, edges: &[(u32, u32)]) -> Condensed {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, edges.len());
    for _ in 0..n {
        g.add_node(());
    }
    for &(a, b) in edges {
        g.add_edge(NodeIndex::new(a as usize), NodeIndex::new(b as usize), ());
    }
    let sccs = tarjan_scc(&g);
    let mut comp_of = vec![0u32; n];
    let components: Vec<Vec<u32>> = sccs
        .into_iter()
        .enumerate()
        .map(|(c, members)| {
            let mut ids: Vec<u32> = members.into_iter().map(|ix| ix.index() as u32).collect();
            ids.sort_unstable();
            for &m in &ids {
                comp_of[m as usize] = c as u32;
            }
            ids
        })
        .collect();
    let mut succ = vec![Vec::new(); components.len()];
    for &(a, b) in edges {
        let (ca, cb) = (comp_of[a as usize], comp_of[b as usize]);
        if ca != cb {
            succ[ca as usize].push(cb);
        }
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    Condensed {
        comp_of,
        components,
        succ,
    }
}

/// Reflexive-transitive successor lists, sorted, per node.
pub(crate) fn reachable_lists(n: usize, edges: &[(u32, u32)]) -> (Vec<u32>, Vec<Vec<u32>>) {
    let c = condense(n, edges);
    let mut per_comp: Vec<Vec<u32>> = Vec::with_capacity(c.components.len());
    for (ci, members) in c.components.iter().enumerate() {
        let mut acc = members.clone();
        for &s in &c.succ[ci] {
            // successors precede `ci` in tarjan order
            acc.extend_from_slice(&per_comp[s as usize]);
        }
        acc.sort_unstable();
        acc.dedup();
        per_comp.push(acc);
    }
    let lists = (0..n)
        .map(|v| per_comp[c.comp_of[v] as usize].clone())
        .collect();
    (c.comp_of, lists)
}

/// Inverts per-node successor lists into predecessor lists.
pub(crate) fn invert(lists: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut inv = vec![Vec::new(); lists.len()];
    for (v, list) in lists.iter().enumerate() {
        for &u in list {
            inv[u as usize].push(v as u32);
        }
    }
    inv
}

/// Reachability bitsets over condensed components.
pub(crate) struct ReachBits {
    pub comp_of: Vec<u32>,
    pub reach: Vec<FixedBitSet>,
}

impl ReachBits {
    pub fn build(n: usize, edges: &[(u32, u32)]) -> Self {
        let c = condense(n, edges);
        let k = c.components.len();
        let mut reach: Vec<FixedBitSet> = Vec::with_capacity(k);
        for ci in 0..k {
            let mut bits = FixedBitSet::with_capacity(k);
            bits.insert(ci);
            for &s in &c.succ[ci] {
                bits.union_with(&reach[s as usize]);
            }
            reach.push(bits);
        }
        ReachBits {
            comp_of: c.comp_of,
            reach,
        }
    }

    pub fn reaches(&self, from: u32, to: u32) -> bool {
        let (a, b) = (self.comp_of[from as usize], self.comp_of[to as usize]);
        self.reach[a as usize].contains(b as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_reach(n: usize, edges: &[(u32, u32)], from: u32, to: u32) -> bool {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v as usize], true) {
                continue;
            }
            stack.extend(edges.iter().filter(|e| e.0 == v).map(|e| e.1));
        }
        false
    }

    #[test]
    fn cycle_collapses() {
        let edges = [(0, 1), (1, 0), (1, 2)];
        let (comp, lists) = reachable_lists(3, &edges);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(lists[0], vec![0, 1, 2]);
        assert_eq!(lists[2], vec![2]);
        assert_eq!(invert(&lists)[2], vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn matches_naive_search(
            n in 1usize..50,
            raw in proptest::collection::vec((0u32..50, 0u32..50), 0..120),
        ) {
            let edges: Vec<(u32, u32)> = raw
                .into_iter()
                .map(|(a, b)| (a % n as u32, b % n as u32))
                .collect();
            let (_, lists) = reachable_lists(n, &edges);
            let bits = ReachBits::build(n, &edges);
            for a in 0..n as u32 {
                for b in 0..n as u32 {
                    let expect = naive_reach(n, &edges, a, b);
                    prop_assert_eq!(lists[a as usize].binary_search(&b).is_ok(), expect);
                    prop_assert_eq!(bits.reaches(a, b), expect);
                }
            }
        }
    }
}
