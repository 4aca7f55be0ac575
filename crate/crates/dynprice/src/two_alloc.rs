//! Markets with at most two optimal allocations, priced by alternating
//! high and low prices around a uniquely assigned cycle.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{
    build_legality_graph, find_uniquely_assigned_cycle, induced_submarket, reallocate, Cycle, LegalityGraph,
    Submarket,
};
use crate::legality::{enumerate_optimal_allocations, ForcedAssignment};
use crate::market::{Allocation, PriceVector};
use crate::pricing::{high_band, normalized};
use crate::rational::{ratio, Rat};
use crate::simplified::SimplifiedMarket;
use crate::verify::brute_force_pricing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleKind {
    /// An even uniquely assigned cycle; every item is removed.
    TypeIII,
    /// An odd cycle with its first item kept in the market.
    TypeIV,
}

/// The cycle whose items get alternating prices, and the allocation it lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovableCycle {
    pub kind: CycleKind,
    pub cycle: Cycle,
    pub allocation: Allocation,
}

impl RemovableCycle {
    /// Removed items in cycle order, paired with whether they are priced high.
    pub fn removed(&self) -> Vec<(usize, bool)> {
        let skip = usize::from(self.kind == CycleKind::TypeIV);
        self.cycle.items.iter().enumerate().skip(skip).map(|(j, &x)| (x, j % 2 == 1)).collect()
    }
}

/// Two odd uniquely assigned cycles through a common item `x[0] = y[0]`
/// that also share the `r` items preceding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddCyclePair {
    pub first: Cycle,
    pub second: Cycle,
    pub shared: usize,
}

/// An odd cycle pair among the uniquely assigned cycles of `g`, if any.
pub fn find_odd_cycle_pair(g: &LegalityGraph) -> Option<OddCyclePair> {
    let odd: Vec<Cycle> = g.uniquely_assigned_cycles().into_iter().filter(|c| c.len() % 2 == 1).collect();
    for c1 in &odd {
        for c2 in &odd {
            if c1 == c2 {
                continue;
            }
            for a in 0..c1.len() {
                let Some(b) = c2.items.iter().position(|&y| y == c1.items[a]) else { continue };
                let (x, y) = (c1.rotated(a), c2.rotated(b));
                let (l1, l2) = (x.len(), y.len());
                let mut r = 0;
                while r + 1 < l1.min(l2) && x.items[l1 - r - 1] == y.items[l2 - r - 1] {
                    r += 1;
                }
                let px: BTreeSet<usize> = x.players.iter().copied().collect();
                let py: BTreeSet<usize> = y.players.iter().copied().collect();
                if px.intersection(&py).count() == r + 2 {
                    return Some(OddCyclePair { first: x, second: y, shared: r });
                }
            }
        }
    }
    None
}

/// The even cycle produced by reallocating along the second cycle of a pair.
fn even_cycle_from_pair(s: &SimplifiedMarket, g: &LegalityGraph, pair: &OddCyclePair) -> Result<(Cycle, Allocation)> {
    let moved = reallocate(g, &pair.second)?;
    let g2 = build_legality_graph(s, &moved)?;
    let (x, y, r) = (&pair.first.items, &pair.second.items, pair.shared);
    let mut items: Vec<usize> = x[1..x.len() - r].to_vec();
    items.extend(y[1..y.len() - r].iter().rev());
    let c = g2.cycle(items)?;
    if !c.uniquely_assigned || c.len() % 2 == 1 {
        return Err(Error::Internal("odd cycle pair did not yield an even cycle".into()));
    }
    Ok((c, moved))
}

/// Picks the cycle to remove from a market with at most two legal allocations.
pub fn find_removable_cycle(s: &SimplifiedMarket, allocation: &Allocation) -> Result<RemovableCycle> {
    let g = build_legality_graph(s, allocation)?;
    if let Some(c) = g.uniquely_assigned_cycles().into_iter().find(|c| c.len() % 2 == 0) {
        return Ok(RemovableCycle { kind: CycleKind::TypeIII, cycle: c, allocation: allocation.clone() });
    }
    if let Some(pair) = find_odd_cycle_pair(&g) {
        let (cycle, allocation) = even_cycle_from_pair(s, &g, &pair)?;
        return Ok(RemovableCycle { kind: CycleKind::TypeIII, cycle, allocation });
    }
    let first = (0..s.m()).next().ok_or_else(|| Error::Precondition("empty market".into()))?;
    let cycle = find_uniquely_assigned_cycle(&g, first)?;
    Ok(RemovableCycle { kind: CycleKind::TypeIV, cycle, allocation: allocation.clone() })
}

/// A dynamic pricing with prices in `(0, 1)` for a market with at most two
/// legal allocations.
pub fn price_two_allocations(s: &SimplifiedMarket) -> Result<PriceVector> {
    match enumerate_optimal_allocations(&s.to_market(), 2) {
        Ok(_) => price_two_allocations_unchecked(s),
        Err(Error::EnumerationOverflow { .. }) => {
            Err(Error::UnsupportedRegime("more than two optimal allocations".into()))
        }
        Err(e) => Err(e),
    }
}

/// The same construction without counting allocations first.
///
/// Each step still checks its own correctness conditions and reports an
/// internal error when they fail.
pub fn price_two_allocations_unchecked(s: &SimplifiedMarket) -> Result<PriceVector> {
    normalized(s, &two_step)
}

fn two_step(s: &SimplifiedMarket) -> Result<PriceVector> {
    if s.m() <= 3 {
        return brute_force_pricing(s)?.ok_or_else(|| Error::Internal("no item order verifies".into()));
    }
    let allocation = s.legal_allocation().ok_or_else(|| Error::Internal("no legal allocation".into()))?;
    let removable = find_removable_cycle(s, &allocation)?;
    crate::audit::emit(s, || crate::audit::Structure::Cycle(removable.clone()));
    let removed = removable.removed();
    let gone: BTreeSet<usize> = removed.iter().map(|&(x, _)| x).collect();
    let rest: BTreeSet<usize> = (0..s.m()).filter(|x| !gone.contains(x)).collect();

    let mut prices = vec![Rat::default(); s.m()];
    if !rest.is_empty() {
        let sub = induced_submarket(s, &removable.allocation, &rest);
        if removable.kind == CycleKind::TypeIV {
            check_kept_item(&sub, &removable)?;
        }
        let inner = normalized(&sub.market, &two_step)?;
        for (j, &x) in sub.items.iter().enumerate() {
            prices[x] = &inner[j] / ratio(2, 1);
        }
    }
    let floor = rest.iter().map(|&x| &prices[x]).min().cloned().unwrap_or_else(|| ratio(1, 2));
    let high: Vec<usize> = removed.iter().filter(|r| r.1).map(|r| r.0).collect();
    let low: Vec<usize> = removed.iter().filter(|r| !r.1).map(|r| r.0).collect();
    for (&x, p) in high.iter().zip(high_band(high.len())) {
        prices[x] = p;
    }
    let l = low.len() as i64;
    for (t, &x) in low.iter().enumerate() {
        prices[x] = &floor / ratio(2, 1) * ratio(t as i64 + 1, l + 1);
    }
    Ok(prices)
}

/// The kept item of an odd cycle must stay with its owner in the submarket.
fn check_kept_item(sub: &Submarket, removable: &RemovableCycle) -> Result<()> {
    let kept = removable.cycle.items[0];
    let local = sub.items.iter().position(|&x| x == kept).expect("kept item is in the submarket");
    let owner = sub.players.iter().position(|&i| i == removable.cycle.players[0]).expect("owner is in the submarket");
    for i in sub.market.holders(local) {
        if i != owner && sub.market.is_extendable(&ForcedAssignment::from([(local, i)])) {
            return Err(Error::Internal(format!("kept item {kept} can move in the submarket")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::graph::tests::arb_simplified;
    use crate::legality::allocation_from_names;
    use crate::pricing::check_fine;
    use proptest::prelude::*;

    fn simp(name: &str) -> SimplifiedMarket {
        SimplifiedMarket::from_unit_values(&fixture(name).unwrap()).unwrap()
    }

    fn ring(l: usize) -> SimplifiedMarket {
        SimplifiedMarket::new(
            (0..l).map(|x| format!("x{x}")).collect(),
            (0..l).map(|i| format!("p{i}")).collect(),
            vec![1; l],
            (0..l).map(|i| BTreeSet::from([i, (i + 1) % l])).collect(),
        )
        .unwrap()
    }

    #[test]
    fn even_ring_alternates() {
        let s = simp("C4");
        let r = find_removable_cycle(&s, &s.legal_allocation().unwrap()).unwrap();
        assert_eq!(r.kind, CycleKind::TypeIII);
        assert_eq!(r.cycle.len(), 4);
        let p = price_two_allocations(&s).unwrap();
        assert!(check_fine(&s, &p).unwrap());
        let highs = r.removed().iter().filter(|x| x.1).count();
        assert_eq!(highs, 2);
    }

    #[test]
    fn odd_ring_keeps_one_item() {
        let s = ring(5);
        let r = find_removable_cycle(&s, &s.legal_allocation().unwrap()).unwrap();
        assert_eq!(r.kind, CycleKind::TypeIV);
        assert_eq!(r.removed().len(), 4);
        assert!(!r.removed().iter().any(|&(x, _)| x == r.cycle.items[0]));
        let p = price_two_allocations(&s).unwrap();
        assert!(check_fine(&s, &p).unwrap());
    }

    #[test]
    fn odd_pair_fixture() {
        let market = fixture("odd_pair").unwrap();
        let s = SimplifiedMarket::from_unit_values(&market).unwrap();
        let a = allocation_from_names(&market, &[&["x0"], &["x1"], &["y1"], &["x2", "y2"]]).unwrap();
        let g = build_legality_graph(&s, &a).unwrap();
        assert!(g.uniquely_assigned_cycles().iter().all(|c| c.len() % 2 == 1));
        let pair = find_odd_cycle_pair(&g).expect("two odd cycles through x0");
        assert_eq!(pair.first.items[0], s.item_id("x0").unwrap());
        assert_eq!(pair.second.items[0], pair.first.items[0]);
        assert_eq!(pair.shared, 0);
        let r = find_removable_cycle(&s, &a).unwrap();
        assert_eq!(r.kind, CycleKind::TypeIII);
        assert_eq!(r.cycle.len() % 2, 0);
        assert!(check_fine(&s, &price_two_allocations_unchecked(&s).unwrap()).unwrap());
        assert!(matches!(price_two_allocations(&s), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn three_items_fall_back_to_search() {
        let s = simp("type4");
        assert!(check_fine(&s, &price_two_allocations(&s).unwrap()).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn prices_sparse_markets(s in arb_simplified(6, 9, 0.12)) {
            match price_two_allocations(&s) {
                Ok(p) => prop_assert!(check_fine(&s, &p).unwrap(), "{:?} {:?}", s, p),
                Err(Error::UnsupportedRegime(_)) => {
                    let count = enumerate_optimal_allocations(&s.to_market(), 3).map_or(3, |v| v.len());
                    prop_assert!(count > 2);
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
