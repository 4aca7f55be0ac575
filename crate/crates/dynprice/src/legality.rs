//! Welfare oracles on valued markets: maximum welfare, optimal allocations,
//! legality sets and extendability of forced assignments.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, Zero};

use crate::error::{Error, Result};
use crate::market::{Allocation, Bundle, Market};
use crate::matching::hungarian_max;
use crate::rational::{common_denominator, scaled_i64, Rat};

/// Items forced onto players, keyed by item.
pub type ForcedAssignment = BTreeMap<usize, usize>;

/// Largest scaled value accepted, so that sums over any market stay in `i64`.
const WEIGHT_LIMIT: i64 = 1 << 40;

/// Legal and always-assigned items per player, plus the maximum welfare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalityInfo {
    pub max_welfare: Rat,
    pub legal: Vec<BTreeSet<usize>>,
    pub exclusive: Vec<BTreeSet<usize>>,
}

/// Integer-scaled values with the optimum precomputed.
#[derive(Debug, Clone)]
pub struct WelfareOracle {
    weights: Vec<Vec<i64>>,
    demand: Vec<usize>,
    scale: BigInt,
    opt: i64,
}

impl WelfareOracle {
    pub fn new(market: &Market) -> Result<Self> {
        let scale = common_denominator(market.values.iter().flatten());
        let mut weights = Vec::with_capacity(market.n());
        for (i, row) in market.values.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (x, v) in row.iter().enumerate() {
                match scaled_i64(v, &scale) {
                    Some(w) if w <= WEIGHT_LIMIT => out.push(w),
                    _ => {
                        return Err(Error::Range(format!(
                            "value of ({}, {}) too large to scale exactly",
                            market.players[i], market.items[x]
                        )))
                    }
                }
            }
            weights.push(out);
        }
        let mut oracle = WelfareOracle { weights, demand: market.demand.clone(), scale, opt: 0 };
        oracle.opt = oracle
            .best_with(&ForcedAssignment::new())
            .ok_or_else(|| Error::InvalidMarket("market is not saturated".into()))?
            .0;
        Ok(oracle)
    }

    pub fn max_welfare(&self) -> Rat {
        Rat::new(BigInt::from(self.opt), self.scale.clone())
    }

    /// Best scaled welfare of a full allocation containing the forced pairs,
    /// with one such allocation. `None` when the pairs overfill a player.
    pub fn best_with(&self, forced: &ForcedAssignment) -> Option<(i64, Allocation)> {
        let n = self.demand.len();
        let m = self.weights.first().map_or(0, |r| r.len());
        let mut left = self.demand.clone();
        let mut alloc = Allocation::empty(n);
        let mut base = 0i64;
        for (&x, &i) in forced {
            if i >= n || x >= m || left[i] == 0 {
                return None;
            }
            left[i] -= 1;
            base += self.weights[i][x];
            alloc.bundles[i].insert(x);
        }
        let free: Vec<usize> = (0..m).filter(|x| !forced.contains_key(x)).collect();
        let clones: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, left[i])).collect();
        if clones.len() != free.len() {
            return None;
        }
        let table: Vec<Vec<i64>> = clones.iter().map(|&i| free.iter().map(|&x| self.weights[i][x]).collect()).collect();
        let (total, col) = hungarian_max(&table);
        for (c, &j) in col.iter().enumerate() {
            alloc.bundles[clones[c]].insert(free[j]);
        }
        Some((base + total, alloc))
    }

    /// True iff some optimal allocation contains the forced pairs.
    pub fn extends(&self, forced: &ForcedAssignment) -> bool {
        self.best_with(forced).is_some_and(|(w, _)| w == self.opt)
    }

    pub fn opt_scaled(&self) -> i64 {
        self.opt
    }

    pub fn weight(&self, player: usize, item: usize) -> i64 {
        self.weights[player][item]
    }
}

pub fn max_welfare(market: &Market) -> Result<Rat> {
    Ok(WelfareOracle::new(market)?.max_welfare())
}

/// All optimal full allocations, up to `limit`, in a fixed order.
///
/// Items are assigned in index order, players tried in index order, and a
/// branch is cut as soon as the forced prefix cannot reach the optimum.
pub fn enumerate_optimal_allocations(market: &Market, limit: usize) -> Result<Vec<Allocation>> {
    let oracle = WelfareOracle::new(market)?;
    let mut found = Vec::new();
    let mut forced = ForcedAssignment::new();
    let overflow = dfs(&oracle, market, 0, &mut forced, limit, &mut found);
    if overflow {
        found.truncate(limit);
        return Err(Error::EnumerationOverflow { limit, partial: found });
    }
    Ok(found)
}

fn dfs(
    oracle: &WelfareOracle,
    market: &Market,
    item: usize,
    forced: &mut ForcedAssignment,
    limit: usize,
    found: &mut Vec<Allocation>,
) -> bool {
    if item == market.m() {
        let mut a = Allocation::empty(market.n());
        for (&x, &i) in forced.iter() {
            a.bundles[i].insert(x);
        }
        found.push(a);
        return found.len() > limit;
    }
    for i in 0..market.n() {
        forced.insert(item, i);
        if oracle.extends(forced) && dfs(oracle, market, item + 1, forced, limit, found) {
            return true;
        }
        forced.remove(&item);
    }
    false
}

/// Legal and always-assigned sets, one forced query per pair.
///
/// A zero-valued legal pair means an optimal allocation may leave the item
/// unassigned, which the model excludes.
pub fn legality(market: &Market) -> Result<LegalityInfo> {
    let oracle = WelfareOracle::new(market)?;
    legality_with(market, &oracle)
}

pub fn legality_with(market: &Market, oracle: &WelfareOracle) -> Result<LegalityInfo> {
    let mut legal = vec![BTreeSet::new(); market.n()];
    for (i, set) in legal.iter_mut().enumerate() {
        for x in 0..market.m() {
            if oracle.extends(&ForcedAssignment::from([(x, i)])) {
                if market.values[i][x].is_zero() {
                    return Err(Error::AssumptionViolation(format!(
                        "item {} can be left unassigned in an optimal allocation (legal to {} at value 0)",
                        market.items[x], market.players[i]
                    )));
                }
                set.insert(x);
            }
        }
    }
    let exclusive = exclusive_sets(&legal);
    Ok(LegalityInfo { max_welfare: oracle.max_welfare(), legal, exclusive })
}

/// `R_i = K_i` minus every other player's legal items.
pub fn exclusive_sets(legal: &[BTreeSet<usize>]) -> Vec<BTreeSet<usize>> {
    (0..legal.len())
        .map(|i| {
            legal[i]
                .iter()
                .copied()
                .filter(|x| legal.iter().enumerate().all(|(j, s)| j == i || !s.contains(x)))
                .collect()
        })
        .collect()
}

/// True iff some optimal allocation extends the forced pairs.
pub fn is_extendable(market: &Market, forced: &ForcedAssignment) -> Result<bool> {
    let oracle = WelfareOracle::new(market)?;
    let info = legality_with(market, &oracle)?;
    check_forced(market.n(), &market.demand, &info.legal, forced)?;
    Ok(oracle.extends(forced))
}

pub(crate) fn check_forced(
    n: usize,
    demand: &[usize],
    legal: &[BTreeSet<usize>],
    forced: &ForcedAssignment,
) -> Result<()> {
    let mut count = vec![0usize; n];
    for (&x, &i) in forced {
        if i >= n {
            return Err(Error::InvalidReference(format!("player index {i}")));
        }
        if !legal[i].contains(&x) {
            return Err(Error::Precondition(format!("item {x} is not legal to player {i}")));
        }
        count[i] += 1;
        if count[i] > demand[i] {
            return Err(Error::Precondition(format!("player {i} forced beyond its demand")));
        }
    }
    Ok(())
}

/// Bundle of a full allocation for a player, by name lookup.
pub fn allocation_from_names(market: &Market, bundles: &[&[&str]]) -> Result<Allocation> {
    let bundles = bundles.iter().map(|b| market.bundle(b)).collect::<Result<Vec<Bundle>>>()?;
    Ok(Allocation { bundles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::oracle;
    use crate::rational::int;
    use proptest::prelude::*;

    fn set(m: &Market, names: &[&str]) -> BTreeSet<usize> {
        m.bundle(names).unwrap()
    }

    #[test]
    fn welfare_of_fixtures() {
        assert_eq!(max_welfare(&fixture("M1").unwrap()).unwrap(), int(5));
        assert_eq!(max_welfare(&fixture("single").unwrap()).unwrap(), int(5));
        assert_eq!(max_welfare(&fixture("M2").unwrap()).unwrap(), int(4));
    }

    #[test]
    fn optimal_allocations_of_fixtures() {
        let m1 = fixture("M1").unwrap();
        let all = enumerate_optimal_allocations(&m1, 10).unwrap();
        let want = vec![
            allocation_from_names(&m1, &[&["α", "β"], &["γ"], &["δ"]]).unwrap(),
            allocation_from_names(&m1, &[&["β", "γ"], &["α"], &["δ"]]).unwrap(),
        ];
        assert_eq!(all, want);
        assert_eq!(enumerate_optimal_allocations(&fixture("disjoint").unwrap(), 10).unwrap().len(), 1);
        let m2 = fixture("M2").unwrap();
        assert_eq!(enumerate_optimal_allocations(&m2, 10).unwrap().len(), 6);
        match enumerate_optimal_allocations(&m2, 4) {
            Err(Error::EnumerationOverflow { limit: 4, partial }) => assert_eq!(partial.len(), 4),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn legality_of_fixtures() {
        let m1 = fixture("M1").unwrap();
        let info = legality(&m1).unwrap();
        assert_eq!(info.legal, vec![set(&m1, &["α", "β", "γ"]), set(&m1, &["α", "γ"]), set(&m1, &["δ"])]);
        assert_eq!(info.exclusive, vec![set(&m1, &["β"]), BTreeSet::new(), set(&m1, &["δ"])]);

        let d = fixture("disjoint").unwrap();
        let info = legality(&d).unwrap();
        assert_eq!(info.legal, info.exclusive);

        let m2 = fixture("M2").unwrap();
        let info = legality(&m2).unwrap();
        let abc = set(&m2, &["a", "b", "c"]);
        assert_eq!(info.legal, vec![abc.clone(), abc, set(&m2, &["a", "b", "c", "d"])]);
        assert_eq!(info.exclusive, vec![BTreeSet::new(), BTreeSet::new(), set(&m2, &["d"])]);
    }

    #[test]
    fn extendability_of_fixtures() {
        let m1 = fixture("M1").unwrap();
        let delta = m1.item_id("δ").unwrap();
        assert!(is_extendable(&m1, &ForcedAssignment::from([(delta, 2)])).unwrap());
        let m2 = fixture("M2").unwrap();
        let (a, b) = (m2.item_id("a").unwrap(), m2.item_id("b").unwrap());
        assert!(!is_extendable(&m2, &ForcedAssignment::from([(a, 2), (b, 2)])).unwrap());
        assert!(is_extendable(&m2, &ForcedAssignment::from([(a, 0)])).unwrap());
        let d = m2.item_id("d").unwrap();
        assert!(matches!(
            is_extendable(&m2, &ForcedAssignment::from([(d, 0)])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn zero_valued_legal_pair_is_rejected() {
        let text = r#"{"version":"dynprice-market/1","items":["a","b"],
            "players":[{"id":"1","demand":1,"values":{"a":1}},{"id":"2","demand":1,"values":{"a":1}}]}"#;
        let m = crate::io::parse_market(text).unwrap();
        assert!(matches!(legality(&m), Err(Error::AssumptionViolation(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn oracle_agrees_with_exhaustive_search(market in oracle::arb_market(5, 3, 8)) {
            let exact = oracle::all_full_allocations(&market.values, &market.demand);
            let best = oracle::brute_max_welfare(&market.values, &market.demand);
            prop_assert_eq!(max_welfare(&market).unwrap(), best.clone());

            let optimal: Vec<_> = exact.iter().filter(|a| oracle::welfare(&market.values, a) == best).cloned().collect();
            let listed = enumerate_optimal_allocations(&market, 10_000).unwrap();
            let as_owner: Vec<Vec<usize>> = listed.iter().map(|a| {
                a.owners(market.m()).into_iter().map(|o| o.unwrap()).collect()
            }).collect();
            let mut want = optimal.clone();
            want.sort();
            let mut got = as_owner.clone();
            got.sort();
            prop_assert_eq!(got, want);

            match legality(&market) {
                Ok(info) => {
                    let legal = oracle::brute_legality(&market.values, &market.demand);
                    prop_assert_eq!(&info.legal, &legal);
                    for i in 0..market.n() {
                        for &x in &info.legal[i] {
                            prop_assert!(is_extendable(&market, &ForcedAssignment::from([(x, i)])).unwrap());
                        }
                        prop_assert!(info.exclusive[i].is_subset(&info.legal[i]));
                    }
                    let union: BTreeSet<usize> = info.legal.iter().flatten().copied().collect();
                    prop_assert_eq!(union.len(), market.m());
                }
                Err(Error::AssumptionViolation(_)) => {
                    prop_assert!(oracle::violates_assumption(&market.values, &market.demand));
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
