//! Markets with at most four players, priced by removing a set of items
//! whose prices can be fixed at the extremes and recursing on the rest.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{build_legality_graph, find_uniquely_assigned_cycle, induced_submarket, reallocate, LegalityGraph};
use crate::market::{Allocation, PriceVector};
use crate::pricing::{high_band, normalized};
use crate::rational::{ratio, Rat};
use crate::simplified::SimplifiedMarket;
use crate::verify::brute_force_pricing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RemovableKind {
    /// A cheap central item plus one expensive item per other player who may take it.
    TypeI,
    /// One item per player, strongly connected in the legality graph.
    TypeII,
}

/// A removable set together with the legal allocation it refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovableSet {
    pub kind: RemovableKind,
    pub items: BTreeSet<usize>,
    pub central: Option<usize>,
    pub allocation: Allocation,
}

/// Checks the defining conditions of a removable set.
pub fn is_removable(s: &SimplifiedMarket, set: &RemovableSet) -> bool {
    let Ok(g) = build_legality_graph(s, &set.allocation) else { return false };
    if set.items.is_empty() || set.items.iter().any(|&x| x >= s.m()) {
        return false;
    }
    match set.kind {
        RemovableKind::TypeI => {
            let Some(c) = set.central.filter(|c| set.items.contains(c)) else { return false };
            let ic = g.owner[c];
            let others: BTreeSet<usize> = s.holders(c).into_iter().filter(|&i| i != ic).collect();
            let rest: Vec<usize> = set.items.iter().copied().filter(|&x| x != c).collect();
            let owners: BTreeSet<usize> = rest.iter().map(|&x| g.owner[x]).collect();
            owners.len() == rest.len() && owners == others && rest.iter().all(|x| s.legal[ic].contains(x))
        }
        RemovableKind::TypeII => {
            let mut count = vec![0usize; s.n()];
            for &x in &set.items {
                count[g.owner[x]] += 1;
            }
            set.central.is_none() && count.iter().all(|&k| k == 1) && g.strongly_connected_on(&set.items)
        }
    }
}

fn min_owned(g: &LegalityGraph, player: usize) -> Result<usize> {
    g.allocation.bundles[player]
        .first()
        .copied()
        .ok_or_else(|| Error::Internal(format!("player {player} holds nothing")))
}

fn set_of(items: &[usize]) -> BTreeSet<usize> {
    items.iter().copied().collect()
}

fn type_one(items: &[usize], central: usize, allocation: &Allocation) -> RemovableSet {
    RemovableSet { kind: RemovableKind::TypeI, items: set_of(items), central: Some(central), allocation: allocation.clone() }
}

fn type_two(items: &[usize], allocation: &Allocation) -> RemovableSet {
    RemovableSet { kind: RemovableKind::TypeII, items: set_of(items), central: None, allocation: allocation.clone() }
}

/// A removable set for a market with at most four players in which no item
/// is legal to every player, built from a uniquely assigned cycle.
pub fn find_removable_set(s: &SimplifiedMarket, allocation: &Allocation) -> Result<RemovableSet> {
    if s.n() > 4 {
        return Err(Error::Precondition(format!("{} players, at most 4 allowed", s.n())));
    }
    if (0..s.m()).any(|x| s.holders(x).len() == s.n()) {
        return Err(Error::Precondition("some item is legal to every player".into()));
    }
    if s.m() == 0 {
        return Err(Error::Precondition("empty market".into()));
    }
    let g = build_legality_graph(s, allocation)?;
    let cycle = find_uniquely_assigned_cycle(&g, 0)?;
    let found = if cycle.len() == s.n() {
        type_two(&cycle.items, allocation)
    } else if cycle.len() == 3 {
        from_three_cycle(s, &g, &cycle.items)?
    } else {
        from_two_cycle(s, &g, cycle.items[0], cycle.items[1])?
    };
    if !is_removable(s, &found) {
        return Err(Error::Internal(format!("constructed set {:?} is not removable", found.items)));
    }
    Ok(found)
}

fn from_three_cycle(s: &SimplifiedMarket, g: &LegalityGraph, cycle: &[usize]) -> Result<RemovableSet> {
    let on_cycle: BTreeSet<usize> = cycle.iter().map(|&x| g.owner[x]).collect();
    let p4 = (0..s.n()).find(|i| !on_cycle.contains(i)).ok_or_else(|| Error::Internal("no fourth player".into()))?;
    let x4 = min_owned(g, p4)?;
    let start = (0..3)
        .filter(|&j| s.legal[g.owner[cycle[j]]].contains(&x4))
        .min_by_key(|&j| g.owner[cycle[j]])
        .ok_or_else(|| Error::Internal(format!("item {x4} is legal only to its owner")))?;
    let (x3, x2, x1) = (cycle[start], cycle[(start + 1) % 3], cycle[(start + 2) % 3]);
    let (p1, p2, p3) = (g.owner[x1], g.owner[x2], g.owner[x3]);
    let alloc = &g.allocation;

    if [x1, x2, x3].iter().any(|x| s.legal[p4].contains(x)) {
        return Ok(type_two(&[x1, x2, x3, x4], alloc));
    }
    let x5 = *g.succ[x4].first().ok_or_else(|| Error::Internal(format!("item {x4} has no successor")))?;
    let o5 = g.owner[x5];
    if o5 == p1 {
        let moved = reallocate(g, &g.cycle(vec![x3, x4, x5])?)?;
        return Ok(type_two(&[x1, x2, x4, x5], &moved));
    }
    if o5 == p2 {
        return Ok(type_two(&[x1, x3, x4, x5], alloc));
    }
    if o5 != p3 {
        return Err(Error::Internal(format!("item {x5} held by the fourth player")));
    }
    let outside = |x: usize| s.holders(x).into_iter().any(|i| i != p3 && i != p4);
    if !outside(x4) && !outside(x5) {
        return Ok(type_one(&[x4, x5], x4, alloc));
    }
    let (g, x4, x5) = if outside(x5) {
        (g.clone(), x4, x5)
    } else {
        let moved = reallocate(g, &g.cycle(vec![x4, x5])?)?;
        (build_legality_graph(s, &moved)?, x5, x4)
    };
    if s.legal[p1].contains(&x5) {
        let moved = reallocate(&g, &g.cycle(vec![x1, x5, x2])?)?;
        return Ok(type_two(&[x1, x2, x4, x5], &moved));
    }
    Ok(type_one(&[x2, x4, x5], x5, &g.allocation))
}

fn from_two_cycle(s: &SimplifiedMarket, g: &LegalityGraph, a: usize, b: usize) -> Result<RemovableSet> {
    let (p1, p2) = (g.owner[a], g.owner[b]);
    let alloc = &g.allocation;
    let inside = |x: usize| s.holders(x).into_iter().all(|i| i == p1 || i == p2);
    if inside(a) && inside(b) {
        return Ok(type_one(&[a, b], b, alloc));
    }
    let p3 = (0..s.n())
        .filter(|&i| i != p1 && i != p2)
        .find(|&i| s.legal[i].contains(&a) || s.legal[i].contains(&b))
        .ok_or_else(|| Error::Internal("no outside player".into()))?;
    // Name the items so that x2 is legal to player 3.
    let (x1, x2, p1, p2) = if s.legal[p3].contains(&b) { (a, b, p1, p2) } else { (b, a, p2, p1) };
    let x3 = min_owned(g, p3)?;
    if s.legal[p1].contains(&x3) {
        return from_three_cycle(s, g, &g.cycle(vec![x1, x3, x2])?.items);
    }
    if s.legal[p2].contains(&x3) {
        return Ok(type_one(&[x1, x2, x3], x2, alloc));
    }
    let p4 = (0..s.n())
        .find(|&i| i != p1 && i != p2 && i != p3)
        .ok_or_else(|| Error::Internal(format!("item {x3} is legal only to its owner")))?;
    let x4 = min_owned(g, p4)?;
    if s.legal[p1].contains(&x4) || s.legal[p2].contains(&x4) {
        return Ok(type_two(&[x1, x2, x3, x4], alloc));
    }
    Ok(type_one(&[x3, x4], x4, alloc))
}

/// A dynamic pricing with prices in `(0, 1)` for at most four players.
pub fn price_four_players(s: &SimplifiedMarket) -> Result<PriceVector> {
    if s.n() > 4 {
        return Err(Error::UnsupportedRegime(format!("{} players, the four-player algorithm needs at most 4", s.n())));
    }
    normalized(s, &four_step)
}

/// Prices for the removed items and the cheaper rest, given a removable set.
fn four_step(s: &SimplifiedMarket) -> Result<PriceVector> {
    if s.m() <= 3 {
        return brute_force_pricing(s)?.ok_or_else(|| Error::Internal("no item order verifies".into()));
    }
    let allocation = s.legal_allocation().ok_or_else(|| Error::Internal("no legal allocation".into()))?;
    let mut prices = vec![Rat::default(); s.m()];

    if let Some(top) = (0..s.m()).find(|&x| s.holders(x).len() == s.n()) {
        let rest: BTreeSet<usize> = (0..s.m()).filter(|&x| x != top).collect();
        price_rest(s, &allocation, &rest, &mut prices)?;
        prices[top] = ratio(3, 4);
        return Ok(prices);
    }

    let set = find_removable_set(s, &allocation)?;
    crate::audit::emit(s, || crate::audit::Structure::Removable(set.clone()));
    let rest: BTreeSet<usize> = (0..s.m()).filter(|x| !set.items.contains(x)).collect();
    price_rest(s, &set.allocation, &rest, &mut prices)?;
    let high: Vec<usize> = set.items.iter().copied().filter(|&x| Some(x) != set.central).collect();
    for (&x, p) in high.iter().zip(high_band(high.len())) {
        prices[x] = p;
    }
    if let Some(c) = set.central {
        prices[c] = rest.iter().map(|&x| &prices[x]).min().map_or(ratio(1, 4), |p| p / ratio(2, 1));
    }
    Ok(prices)
}

/// Prices the submarket on `rest` recursively, halved into `(0, 1/2)`.
fn price_rest(s: &SimplifiedMarket, allocation: &Allocation, rest: &BTreeSet<usize>, prices: &mut [Rat]) -> Result<()> {
    if rest.is_empty() {
        return Ok(());
    }
    let sub = induced_submarket(s, allocation, rest);
    let inner = normalized(&sub.market, &four_step)?;
    for (j, &x) in sub.items.iter().enumerate() {
        prices[x] = &inner[j] / ratio(2, 1);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::graph::tests::{arb_shared, arb_simplified};
    use crate::legality::allocation_from_names;
    use crate::oracle;
    use crate::pricing::check_fine;
    use proptest::prelude::*;

    fn simp(name: &str) -> SimplifiedMarket {
        SimplifiedMarket::from_unit_values(&fixture(name).unwrap()).unwrap()
    }

    /// Every removable set for every legal allocation, by exhaustive search.
    fn all_removable(s: &SimplifiedMarket) -> Vec<RemovableSet> {
        let mut out = vec![];
        for owner in oracle::brute_legal_allocations(&s.legal, &s.demand) {
            let mut allocation = Allocation::empty(s.n());
            for (x, &i) in owner.iter().enumerate() {
                allocation.bundles[i].insert(x);
            }
            for mask in 1u32..(1 << s.m()) {
                let items: BTreeSet<usize> = (0..s.m()).filter(|x| mask >> x & 1 == 1).collect();
                let mut cands = vec![type_two(&items.iter().copied().collect::<Vec<_>>(), &allocation)];
                for &c in &items {
                    cands.push(type_one(&items.iter().copied().collect::<Vec<_>>(), c, &allocation));
                }
                out.extend(cands.into_iter().filter(|r| is_removable(s, r)));
            }
        }
        out
    }

    #[test]
    fn four_cycle_is_type_two() {
        let s = simp("C4");
        let a = s.legal_allocation().unwrap();
        let r = find_removable_set(&s, &a).unwrap();
        assert_eq!(r.kind, RemovableKind::TypeII);
        assert_eq!(r.items, BTreeSet::from([0, 1, 2, 3]));
        assert!(check_fine(&s, &price_four_players(&s).unwrap()).unwrap());
    }

    #[test]
    fn central_item_set() {
        let market = fixture("central_item").unwrap();
        let s = SimplifiedMarket::from_unit_values(&market).unwrap();
        let a = allocation_from_names(&market, &[&["x1"], &["x2"], &["x3", "x5"], &["x4"]]).unwrap();
        let r = find_removable_set(&s, &a).unwrap();
        assert_eq!(r.kind, RemovableKind::TypeI);
        assert_eq!(r.items, BTreeSet::from([1, 3, 4]));
        assert_eq!(r.central, Some(4));
        assert!(all_removable(&s).contains(&r));
        assert!(check_fine(&s, &price_four_players(&s).unwrap()).unwrap());
    }

    #[test]
    fn two_cycle_closed_pair() {
        // Two pairs of players, each swapping two items.
        let s = SimplifiedMarket::new(
            ["a", "b", "c", "d"].map(String::from).to_vec(),
            ["1", "2", "3", "4"].map(String::from).to_vec(),
            vec![1, 1, 1, 1],
            vec![set_of(&[0, 1]), set_of(&[0, 1]), set_of(&[2, 3]), set_of(&[2, 3])],
        )
        .unwrap();
        let r = find_removable_set(&s, &s.legal_allocation().unwrap()).unwrap();
        assert_eq!(r.kind, RemovableKind::TypeI);
        assert_eq!(r.items, BTreeSet::from([0, 1]));
        assert!(check_fine(&s, &price_four_players(&s).unwrap()).unwrap());
    }

    #[test]
    fn item_legal_to_everyone_goes_on_top() {
        let s = simp("M3");
        let p = price_four_players(&s).unwrap();
        assert!(check_fine(&s, &p).unwrap());
    }

    #[test]
    fn rejects_five_players() {
        let s = SimplifiedMarket::new(
            (0..5).map(|x| format!("x{x}")).collect(),
            (0..5).map(|i| format!("{i}")).collect(),
            vec![1; 5],
            (0..5).map(|i| set_of(&[i, (i + 1) % 5])).collect(),
        )
        .unwrap();
        assert!(matches!(price_four_players(&s), Err(Error::UnsupportedRegime(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn removable_sets_exist_and_price(s in arb_shared()) {
            let p = price_four_players(&s).unwrap();
            prop_assert!(check_fine(&s, &p).unwrap(), "{:?} {:?}", s, p);
            if (0..s.m()).all(|x| s.holders(x).len() < s.n()) {
                let r = find_removable_set(&s, &s.legal_allocation().unwrap()).unwrap();
                prop_assert!(is_removable(&s, &r));
                if s.m() <= 6 {
                    prop_assert!(all_removable(&s).contains(&r));
                }
            }
        }

        #[test]
        fn prices_arbitrary_legality_sets(s in arb_simplified(4, 7, 0.35)) {
            let p = price_four_players(&s).unwrap();
            prop_assert!(check_fine(&s, &p).unwrap(), "{:?} {:?}", s, p);
            let shared = (0..s.m()).all(|x| (2..s.n()).contains(&s.holders(x).len()));
            if shared && s.satisfies_p() {
                let r = find_removable_set(&s, &s.legal_allocation().unwrap()).unwrap();
                prop_assert!(is_removable(&s, &r));
            }
        }
    }
}
