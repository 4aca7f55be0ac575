//! Legality graphs: `x → y` when the owner of `x` could hold `y` instead.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::market::Allocation;
use crate::simplified::SimplifiedMarket;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalityGraph {
    pub allocation: Allocation,
    /// Owner of each item under `allocation`.
    pub owner: Vec<usize>,
    pub succ: Vec<BTreeSet<usize>>,
}

/// A simple cycle `items[0] → items[1] → … → items[0]`.
///
/// `players[j]` owns `items[j]` and induces the edge leaving it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    pub items: Vec<usize>,
    pub players: Vec<usize>,
    /// No player owns two of the items.
    pub uniquely_assigned: bool,
}

impl Cycle {
    fn new(items: Vec<usize>, owner: &[usize]) -> Self {
        let players: Vec<usize> = items.iter().map(|&x| owner[x]).collect();
        let distinct: BTreeSet<usize> = players.iter().copied().collect();
        let uniquely_assigned = distinct.len() == players.len();
        Cycle { items, players, uniquely_assigned }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Rotation starting at the smallest item.
    pub fn canonical(&self) -> Cycle {
        let Some(start) = (0..self.len()).min_by_key(|&j| self.items[j]) else {
            return self.clone();
        };
        self.rotated(start)
    }

    /// Rotation starting at position `start`.
    pub fn rotated(&self, start: usize) -> Cycle {
        let mut c = self.clone();
        c.items.rotate_left(start);
        c.players.rotate_left(start);
        c
    }

    pub fn item_set(&self) -> BTreeSet<usize> {
        self.items.iter().copied().collect()
    }
}

impl LegalityGraph {
    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.succ[x].contains(&y)
    }

    /// Builds a cycle from an item sequence, checking every edge.
    pub fn cycle(&self, items: Vec<usize>) -> Result<Cycle> {
        if items.is_empty() {
            return Err(Error::Precondition("empty cycle".into()));
        }
        let distinct: BTreeSet<usize> = items.iter().copied().collect();
        if distinct.len() != items.len() {
            return Err(Error::Precondition("cycle repeats an item".into()));
        }
        for j in 0..items.len() {
            let (x, y) = (items[j], items[(j + 1) % items.len()]);
            if x >= self.m() || y >= self.m() || !self.has_edge(x, y) {
                return Err(Error::Precondition(format!("{x} → {y} is not an edge")));
            }
        }
        Ok(Cycle::new(items, &self.owner))
    }

    /// Whether the items induce a strongly connected subgraph.
    pub fn strongly_connected_on(&self, items: &BTreeSet<usize>) -> bool {
        let Some(&start) = items.first() else { return true };
        let reach = |forward: bool| {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &y in items {
                    let edge = if forward { self.has_edge(x, y) } else { self.has_edge(y, x) };
                    if edge && seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
            seen.len() == items.len()
        };
        reach(true) && reach(false)
    }

    /// Every uniquely assigned cycle, canonical and sorted.
    pub fn uniquely_assigned_cycles(&self) -> Vec<Cycle> {
        let mut found = BTreeSet::new();
        for start in 0..self.m() {
            let mut path = vec![start];
            let mut used = BTreeSet::from([self.owner[start]]);
            self.extend_cycles(start, &mut path, &mut used, &mut found);
        }
        found.into_iter().collect()
    }

    fn extend_cycles(
        &self,
        start: usize,
        path: &mut Vec<usize>,
        used: &mut BTreeSet<usize>,
        found: &mut BTreeSet<Cycle>,
    ) {
        let last = *path.last().expect("non-empty path");
        for &y in &self.succ[last] {
            if y == start {
                found.insert(Cycle::new(path.clone(), &self.owner).canonical());
            } else if y > start && !used.contains(&self.owner[y]) {
                used.insert(self.owner[y]);
                path.push(y);
                self.extend_cycles(start, path, used, found);
                path.pop();
                used.remove(&self.owner[y]);
            }
        }
    }
}

pub fn build_legality_graph(s: &SimplifiedMarket, allocation: &Allocation) -> Result<LegalityGraph> {
    if !s.is_legal_allocation(allocation) {
        return Err(Error::Precondition("base allocation is not legal".into()));
    }
    let owner: Vec<usize> = allocation.owners(s.m()).into_iter().map(|o| o.expect("full allocation")).collect();
    let succ = (0..s.m())
        .map(|x| {
            let i = owner[x];
            s.legal[i].difference(&allocation.bundles[i]).copied().collect()
        })
        .collect();
    Ok(LegalityGraph { allocation: allocation.clone(), owner, succ })
}

/// Moves each cycle item to the owner of its predecessor.
pub fn reallocate(graph: &LegalityGraph, cycle: &Cycle) -> Result<Allocation> {
    let checked = graph.cycle(cycle.items.clone())?;
    let mut alloc = graph.allocation.clone();
    let l = checked.len();
    for j in 0..l {
        alloc.bundles[checked.players[j]].remove(&checked.items[j]);
    }
    for j in 0..l {
        alloc.bundles[checked.players[j]].insert(checked.items[(j + 1) % l]);
    }
    Ok(alloc)
}

/// A uniquely assigned cycle through `item`, starting at `item`.
///
/// Breadth-first search gives a shortest cycle; shortcuts then remove any
/// player seen twice.
pub fn find_uniquely_assigned_cycle(graph: &LegalityGraph, item: usize) -> Result<Cycle> {
    if item >= graph.m() {
        return Err(Error::InvalidReference(format!("item index {item}")));
    }
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([item]);
    let mut closing = None;
    'search: while let Some(x) = queue.pop_front() {
        for &y in &graph.succ[x] {
            if y == item {
                closing = Some(x);
                break 'search;
            }
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(y) {
                e.insert(x);
                queue.push_back(y);
            }
        }
    }
    let mut last = closing.ok_or_else(|| Error::Internal(format!("no cycle through item {item}")))?;
    let mut items = vec![];
    while last != item {
        items.push(last);
        last = parent[&last];
    }
    items.push(item);
    items.reverse();

    loop {
        let owners: Vec<usize> = items.iter().map(|&x| graph.owner[x]).collect();
        let repeat = (0..items.len())
            .flat_map(|j| (j + 1..items.len()).map(move |k| (j, k)))
            .find(|&(j, k)| owners[j] == owners[k]);
        let Some((j, k)) = repeat else { break };
        // items[j] → items[k + 1] is an edge since both targets are legal to the
        // shared owner and not held by it.
        let mut shorter = items[..=j].to_vec();
        shorter.extend_from_slice(&items[k + 1..]);
        items = shorter;
    }
    graph.cycle(items)
}

/// A submarket on an item subset together with index maps back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submarket {
    pub market: SimplifiedMarket,
    /// Parent index of each local item.
    pub items: Vec<usize>,
    /// Parent index of each local player.
    pub players: Vec<usize>,
    /// The parent allocation restricted to the subset.
    pub allocation: Allocation,
}

/// Keeps the subset, with each player's demand cut to what it holds there.
pub fn induced_submarket(s: &SimplifiedMarket, allocation: &Allocation, subset: &BTreeSet<usize>) -> Submarket {
    let items: Vec<usize> = subset.iter().copied().collect();
    let local: BTreeMap<usize, usize> = items.iter().enumerate().map(|(j, &x)| (x, j)).collect();
    let players: Vec<usize> =
        (0..s.n()).filter(|&i| allocation.bundles[i].iter().any(|x| subset.contains(x))).collect();
    let market = SimplifiedMarket {
        items: items.iter().map(|&x| s.items[x].clone()).collect(),
        players: players.iter().map(|&i| s.players[i].clone()).collect(),
        demand: players.iter().map(|&i| allocation.bundles[i].intersection(subset).count()).collect(),
        legal: players.iter().map(|&i| s.legal[i].intersection(subset).map(|x| local[x]).collect()).collect(),
    };
    let bundles = players
        .iter()
        .map(|&i| allocation.bundles[i].intersection(subset).map(|x| local[x]).collect())
        .collect();
    Submarket { market, items, players, allocation: Allocation { bundles } }
}
