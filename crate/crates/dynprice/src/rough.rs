//! Rough prices from shortest paths in the auxiliary item graph, and the
//! residual 0/1 market they leave behind.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use crate::error::{Error, Result};
use crate::legality::{legality, LegalityInfo};
use crate::market::{Market, PriceVector};
use crate::rational::{common_denominator, Rat};
use crate::simplified::SimplifiedMarket;

/// Edge `from → to` induced by `player`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxEdge {
    pub from: usize,
    pub to: usize,
    pub player: usize,
    pub weight: Rat,
    /// Lies on a zero-weight cycle: both ends legal but not exclusive to the player.
    pub zero_cycle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxiliaryGraph {
    pub items: usize,
    pub edges: Vec<AuxEdge>,
}

/// Edges `x → y` for every player with `x` legal and `y` not exclusive.
pub fn build_auxiliary_graph(market: &Market, info: &LegalityInfo) -> AuxiliaryGraph {
    let mut edges = Vec::new();
    for i in 0..market.n() {
        let shared: BTreeSet<usize> = info.legal[i].difference(&info.exclusive[i]).copied().collect();
        for &x in &info.legal[i] {
            for y in (0..market.m()).filter(|&y| y != x && !info.exclusive[i].contains(&y)) {
                edges.push(AuxEdge {
                    from: x,
                    to: y,
                    player: i,
                    weight: &market.values[i][x] - &market.values[i][y],
                    zero_cycle: shared.contains(&x) && shared.contains(&y),
                });
            }
        }
    }
    AuxiliaryGraph { items: market.m(), edges }
}

impl AuxiliaryGraph {
    /// Whether some cycle has positive weight.
    ///
    /// Zero-cycle edges only close zero-weight cycles, so a positive cycle
    /// exists iff some other edge has both ends in one strong component.
    pub fn has_positive_cycle(&self) -> bool {
        let mut g = DiGraphMap::<usize, ()>::new();
        for x in 0..self.items {
            g.add_node(x);
        }
        for e in &self.edges {
            g.add_edge(e.from, e.to, ());
        }
        let mut comp = vec![0usize; self.items];
        for (c, scc) in tarjan_scc(&g).into_iter().enumerate() {
            for x in scc {
                comp[x] = c;
            }
        }
        self.edges.iter().any(|e| !e.zero_cycle && comp[e.from] == comp[e.to])
    }

    /// Parallel edges collapsed to their smallest perturbed weight.
    fn collapsed(&self, eps: &Rat) -> BTreeMap<(usize, usize), Rat> {
        let mut best: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for e in &self.edges {
            let w = if e.zero_cycle { e.weight.clone() } else { &e.weight - eps };
            best.entry((e.from, e.to)).and_modify(|b| if w < *b { *b = w.clone() }).or_insert(w);
        }
        best
    }
}

/// The perturbation `min(ε_c, ε_v) / (m + 1)`.
///
/// `ε_c` is bounded below by `1/D`, with `D` the common denominator of all
/// values, and ignored when no positive cycle exists. `ε_v` is the smallest
/// positive value.
pub fn compute_epsilon(market: &Market, graph: &AuxiliaryGraph) -> Result<Rat> {
    let eps_v = market
        .values
        .iter()
        .flatten()
        .filter(|v| v.is_positive())
        .min()
        .cloned()
        .ok_or_else(|| Error::Degenerate("every value is zero".into()))?;
    let mut bound = eps_v;
    if graph.has_positive_cycle() {
        let eps_c = Rat::new(BigInt::from(1), common_denominator(market.values.iter().flatten()));
        bound = bound.min(eps_c);
    }
    Ok(bound / Rat::from_integer(BigInt::from(market.m() + 1)))
}

/// Shortest distances from a source joined to every item by zero edges.
fn shortest_from_all(items: usize, edges: &BTreeMap<(usize, usize), Rat>) -> Result<Vec<Rat>> {
    let mut dist = vec![Rat::zero(); items];
    for _ in 0..items {
        let mut changed = false;
        for (&(x, y), w) in edges {
            let cand = &dist[x] + w;
            if cand < dist[y] {
                dist[y] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if edges.iter().any(|(&(x, y), w)| &dist[x] + w < dist[y]) {
        return Err(Error::Internal("negative cycle in the perturbed auxiliary graph".into()));
    }
    Ok(dist)
}

/// Rough prices for a market, computing legality first.
pub fn rough_prices(market: &Market) -> Result<PriceVector> {
    let info = legality(market)?;
    rough_prices_with(market, &info)
}

pub fn rough_prices_with(market: &Market, info: &LegalityInfo) -> Result<PriceVector> {
    let graph = build_auxiliary_graph(market, info);
    let eps = compute_epsilon(market, &graph)?;
    let dist = shortest_from_all(market.m(), &graph.collapsed(&eps))?;
    Ok(dist.into_iter().map(|d| &eps - d).collect())
}

/// Checks the three rough-price conditions and positive legal utility.
pub fn check_rough_conditions(market: &Market, info: &LegalityInfo, prices: &[Rat]) -> std::result::Result<(), String> {
    if let Some(x) = prices.iter().position(|p| !p.is_positive()) {
        return Err(format!("price of {} is not positive", market.items[x]));
    }
    for i in 0..market.n() {
        let u = |x: usize| &market.values[i][x] - &prices[x];
        let (k, r) = (&info.legal[i], &info.exclusive[i]);
        for x in 0..market.m() {
            for y in 0..market.m() {
                if r.contains(&x) && !r.contains(&y) && u(x) <= u(y) {
                    return Err(format!("player {i}: exclusive {x} not above {y}"));
                }
                if k.contains(&x) && !r.contains(&x) && k.contains(&y) && !r.contains(&y) && u(x) != u(y) {
                    return Err(format!("player {i}: shared legal {x} and {y} differ"));
                }
                if k.contains(&x) && !k.contains(&y) && u(x) <= u(y) {
                    return Err(format!("player {i}: legal {x} not above illegal {y}"));
                }
            }
            if k.contains(&x) && !u(x).is_positive() {
                return Err(format!("player {i}: legal {x} has non-positive utility"));
            }
        }
    }
    Ok(())
}

/// The leftover market of shared legal items, with the room left for fine prices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualMarket {
    pub simplified: SimplifiedMarket,
    /// `Δ`, the minimum over `per_player_headroom`.
    pub headroom: Rat,
    pub per_player_headroom: Vec<Rat>,
    pub base_utility: Vec<Rat>,
    /// Original index of each residual item.
    pub item_map: Vec<usize>,
    /// Original index of each residual player.
    pub player_map: Vec<usize>,
}

impl ResidualMarket {
    pub fn is_trivial(&self) -> bool {
        self.simplified.players.is_empty()
    }
}

pub fn residual_market(market: &Market, rough: &[Rat], info: &LegalityInfo) -> Result<ResidualMarket> {
    let exclusive: BTreeSet<usize> = info.exclusive.iter().flatten().copied().collect();
    let item_map: Vec<usize> = (0..market.m()).filter(|x| !exclusive.contains(x)).collect();
    let player_map: Vec<usize> = (0..market.n()).filter(|&i| info.exclusive[i] != info.legal[i]).collect();
    let local: BTreeMap<usize, usize> = item_map.iter().enumerate().map(|(j, &x)| (x, j)).collect();

    let mut legal = Vec::new();
    let mut demand = Vec::new();
    let mut base_utility = Vec::new();
    let mut per_player_headroom = Vec::new();
    for &i in &player_map {
        let shared: Vec<usize> = info.legal[i].difference(&info.exclusive[i]).copied().collect();
        let u = |x: usize| &market.values[i][x] - &rough[x];
        let ustar = u(shared[0]);
        if shared.iter().any(|&x| u(x) != ustar) {
            return Err(Error::Internal(format!("player {} not indifferent over shared legal items", market.players[i])));
        }
        let outside = (0..market.m())
            .filter(|x| !info.legal[i].contains(x))
            .map(u)
            .fold(Rat::zero(), |a, b| a.max(b));
        per_player_headroom.push(&ustar - outside);
        base_utility.push(ustar);
        demand.push(market.demand[i] - info.exclusive[i].len());
        legal.push(shared.iter().map(|x| local[x]).collect());
    }
    let headroom = per_player_headroom.iter().min().cloned().unwrap_or_else(Rat::zero);
    if per_player_headroom.iter().any(|d| !d.is_positive()) {
        return Err(Error::Internal("non-positive headroom".into()));
    }
    let simplified = SimplifiedMarket::new(
        item_map.iter().map(|&x| market.items[x].clone()).collect(),
        player_map.iter().map(|&i| market.players[i].clone()).collect(),
        demand,
        legal,
    )?;
    Ok(ResidualMarket { simplified, headroom, per_player_headroom, base_utility, item_map, player_map })
}

/// Adds fine prices onto the residual items; each must lie in `(0, Δ)`.
pub fn combine_prices(rough: &[Rat], fine: &[Rat], residual: &ResidualMarket) -> Result<PriceVector> {
    if fine.len() != residual.item_map.len() {
        return Err(Error::InvalidReference("fine price vector length".into()));
    }
    let mut out = rough.to_vec();
    for (j, f) in fine.iter().enumerate() {
        if !f.is_positive() || f >= &residual.headroom {
            return Err(Error::Range(format!("fine price {f} outside (0, {})", residual.headroom)));
        }
        out[residual.item_map[j]] += f;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::oracle;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn edge(g: &AuxiliaryGraph, from: usize, to: usize, player: usize) -> Option<&AuxEdge> {
        g.edges.iter().find(|e| e.from == from && e.to == to && e.player == player)
    }

    #[test]
    fn disjoint_market() {
        let m = fixture("disjoint").unwrap();
        let info = legality(&m).unwrap();
        let g = build_auxiliary_graph(&m, &info);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(edge(&g, 0, 1, 0).unwrap().weight, int(1));
        assert!(!edge(&g, 0, 1, 0).unwrap().zero_cycle);
        assert_eq!(edge(&g, 1, 0, 1).unwrap().weight, int(1));
        assert_eq!(compute_epsilon(&m, &g).unwrap(), ratio(1, 3));
        assert_eq!(rough_prices(&m).unwrap(), vec![ratio(1, 3), ratio(1, 3)]);
        assert!(residual_market(&m, &rough_prices(&m).unwrap(), &info).unwrap().is_trivial());
    }

    #[test]
    fn single_player_market() {
        let m = fixture("single").unwrap();
        let info = legality(&m).unwrap();
        let g = build_auxiliary_graph(&m, &info);
        assert!(g.edges.is_empty());
        assert_eq!(compute_epsilon(&m, &g).unwrap(), ratio(2, 3));
        assert_eq!(rough_prices(&m).unwrap(), vec![ratio(2, 3), ratio(2, 3)]);
        assert!(residual_market(&m, &rough_prices(&m).unwrap(), &info).unwrap().is_trivial());
    }

    #[test]
    fn m1_market() {
        let m = fixture("M1").unwrap();
        let info = legality(&m).unwrap();
        let g = build_auxiliary_graph(&m, &info);
        let (a, c, d) = (0, 2, 3);
        for (x, y, w) in [(a, c, 1), (c, a, -1)] {
            let e = edge(&g, x, y, 0).unwrap();
            assert_eq!(e.weight, int(w));
            assert!(e.zero_cycle);
        }
        let p = rough_prices(&m).unwrap();
        check_rough_conditions(&m, &info, &p).unwrap();
        let u = |i: usize, x: usize| &m.values[i][x] - &p[x];
        assert_eq!(u(0, a), u(0, c));
        assert!(u(0, a) > u(0, d));
        assert!(u(2, d) > int(0));

        let r = residual_market(&m, &p, &info).unwrap();
        assert_eq!(r.simplified.items, vec!["α".to_string(), "γ".to_string()]);
        assert_eq!(r.simplified.players, vec!["1".to_string(), "2".to_string()]);
        assert_eq!(r.simplified.demand, vec![1, 1]);
        assert_eq!(r.simplified.legal, vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 1])]);
        assert!(r.headroom.is_positive());
    }

    #[test]
    fn combine_checks_range() {
        let m = fixture("M1").unwrap();
        let info = legality(&m).unwrap();
        let p = rough_prices(&m).unwrap();
        let r = residual_market(&m, &p, &info).unwrap();
        let half = &r.headroom / int(2);
        let q = combine_prices(&p, &[half.clone(), half.clone()], &r).unwrap();
        assert_eq!(q[0], &p[0] + &half);
        assert_eq!(q[1], p[1]);
        assert!(matches!(combine_prices(&p, &[r.headroom.clone(), half], &r), Err(Error::Range(_))));
        let d = fixture("disjoint").unwrap();
        let dinfo = legality(&d).unwrap();
        let dp = rough_prices(&d).unwrap();
        let dr = residual_market(&d, &dp, &dinfo).unwrap();
        assert_eq!(combine_prices(&dp, &[], &dr).unwrap(), dp);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let m = Market {
            items: vec!["a".into()],
            players: vec!["p".into()],
            demand: vec![1],
            values: vec![vec![int(0)]],
        };
        let info = LegalityInfo { max_welfare: int(0), legal: vec![BTreeSet::from([0])], exclusive: vec![BTreeSet::from([0])] };
        let g = build_auxiliary_graph(&m, &info);
        assert!(matches!(compute_epsilon(&m, &g), Err(Error::Degenerate(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn rough_prices_satisfy_definition(market in oracle::arb_market(5, 3, 8)) {
            let Ok(info) = legality(&market) else { return Ok(()); };
            let p = rough_prices_with(&market, &info).unwrap();
            prop_assert_eq!(check_rough_conditions(&market, &info, &p), Ok(()));
            let g = build_auxiliary_graph(&market, &info);
            // All-pairs shortest walks with the plain weights: an edge lies on a
            // zero-weight cycle iff the way back closes it at exactly zero.
            let m = market.m();
            let mut d: Vec<Vec<Option<Rat>>> = vec![vec![None; m]; m];
            for (x, row) in d.iter_mut().enumerate() {
                row[x] = Some(Rat::zero());
            }
            for e in &g.edges {
                if d[e.from][e.to].as_ref().is_none_or(|w| &e.weight < w) {
                    d[e.from][e.to] = Some(e.weight.clone());
                }
            }
            for k in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        if let (Some(x), Some(y)) = (&d[a][k], &d[k][b]) {
                            let s = x + y;
                            if d[a][b].as_ref().is_none_or(|w| &s < w) {
                                d[a][b] = Some(s);
                            }
                        }
                    }
                }
            }
            for (x, row) in d.iter().enumerate() {
                prop_assert!(!row[x].as_ref().unwrap().is_negative());
            }
            for e in &g.edges {
                let back = d[e.to][e.from].as_ref().map(|b| b + &e.weight);
                prop_assert_eq!(e.zero_cycle, back == Some(Rat::zero()));
            }
            let r = residual_market(&market, &p, &info).unwrap();
            prop_assert_eq!(r.simplified.m(), r.simplified.demand.iter().sum::<usize>());
            for x in 0..r.simplified.m() {
                prop_assert!(r.simplified.holders(x).len() >= 2);
            }
            // Legality of the residual's own 0/1 realization matches.
            prop_assert_eq!(r.simplified.true_legality(), Some(r.simplified.legal.clone()));
            for j in 0..r.player_map.len() {
                prop_assert!(r.base_utility[j].is_positive());
                prop_assert!(r.headroom <= r.per_player_headroom[j]);
            }
        }
    }
}
