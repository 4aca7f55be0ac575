//! End-to-end pricing: rough prices, a fine pricing of the residual market,
//! and their combination.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, Signed};

use crate::error::{Error, Result};
use crate::legality::{enumerate_optimal_allocations, legality};
use crate::market::{Market, PriceVector};
use crate::rational::{common_denominator, ratio, Rat};
use crate::rough::{combine_prices, residual_market, rough_prices_with, ResidualMarket};
use crate::simplified::SimplifiedMarket;

/// Which fine-pricing algorithm to run on the residual market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Auto,
    Four,
    TwoAlloc,
    Tri,
    Brute,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Auto => "auto",
            Algo::Four => "four",
            Algo::TwoAlloc => "two-alloc",
            Algo::Tri => "tri",
            Algo::Brute => "brute",
        })
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Algo::Auto,
            "four" => Algo::Four,
            "two-alloc" => Algo::TwoAlloc,
            "tri" => Algo::Tri,
            "brute" => Algo::Brute,
            other => return Err(Error::Parse(format!("unknown algorithm {other:?}"))),
        })
    }
}

/// A priced market with its intermediate layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PricedMarket {
    pub prices: PriceVector,
    pub rough: PriceVector,
    pub residual: ResidualMarket,
    /// Fine prices of the residual market on the unit scale `(0, 1)`.
    pub fine: PriceVector,
    /// The algorithm that actually ran.
    pub algorithm: Algo,
}

/// Picks a fine-pricing regime for a simplified market.
///
/// Tri-demand first, then four players, then at most two optimal allocations.
pub fn regime_for(s: &SimplifiedMarket) -> Result<Algo> {
    if s.demand.iter().all(|&k| k <= 3) {
        return Ok(Algo::Tri);
    }
    if s.n() <= 4 {
        return Ok(Algo::Four);
    }
    match enumerate_optimal_allocations(&s.to_market(), 2) {
        Ok(_) => Ok(Algo::TwoAlloc),
        Err(Error::EnumerationOverflow { .. }) => Err(Error::UnsupportedRegime(format!(
            "{} players, demand up to {}, more than two optimal allocations",
            s.n(),
            s.demand.iter().max().unwrap_or(&0)
        ))),
        Err(e) => Err(e),
    }
}

/// A dynamic pricing of a simplified market with every price in `(0, 1)`.
pub fn price_simplified(s: &SimplifiedMarket, algo: Algo) -> Result<PriceVector> {
    let algo = if algo == Algo::Auto { regime_for(s)? } else { algo };
    let prices = match algo {
        Algo::Four => crate::four::price_four_players(s)?,
        Algo::TwoAlloc => crate::two_alloc::price_two_allocations(s)?,
        Algo::Tri => crate::tri::price_tridemand(s)?,
        Algo::Brute => crate::verify::brute_force_pricing(s)?
            .ok_or_else(|| Error::Internal("no item order verifies".into()))?,
        Algo::Auto => unreachable!("resolved above"),
    };
    Ok(perturb_distinct(&prices, &BigInt::one()))
}

/// Rough prices, then a fine pricing of the residual, combined and made distinct.
///
/// `fixed_at` names an original item that must be the cheapest residual
/// item; it requires the tri-demand algorithm.
pub fn price_market(market: &Market, algo: Algo, fixed_at: Option<usize>) -> Result<PricedMarket> {
    let (rough, residual) = rough_layer(market)?;
    let local_fixed = match fixed_at {
        None => None,
        Some(x) => Some(residual.item_map.iter().position(|&y| y == x).ok_or_else(|| {
            Error::Precondition(format!("item {} is not in the residual market", market.items.get(x).map_or("?", |s| s)))
        })?),
    };
    let s = &residual.simplified;
    let (algorithm, fine) = if residual.is_trivial() {
        (if algo == Algo::Auto { Algo::Tri } else { algo }, Vec::new())
    } else {
        let algorithm = if algo == Algo::Auto { regime_for(s)? } else { algo };
        let fine = match (algorithm, local_fixed) {
            (Algo::Tri, Some(x)) => crate::tri::price_fixed_at(s, x)?,
            (_, Some(_)) => return Err(Error::Precondition("a fixed item requires the tri-demand algorithm".into())),
            (a, None) => price_simplified(s, a)?,
        };
        (algorithm, fine)
    };
    assemble(market, rough, residual, fine, algorithm)
}

/// [`price_market`] with a caller-supplied fine pricing of the residual.
///
/// `fine` must return prices in `(0, 1)`; `algorithm` is only recorded.
pub fn price_market_with(
    market: &Market,
    algorithm: Algo,
    fine: &dyn Fn(&SimplifiedMarket) -> Result<PriceVector>,
) -> Result<PricedMarket> {
    let (rough, residual) = rough_layer(market)?;
    let fine = if residual.is_trivial() { Vec::new() } else { fine(&residual.simplified)? };
    assemble(market, rough, residual, fine, algorithm)
}

fn rough_layer(market: &Market) -> Result<(PriceVector, ResidualMarket)> {
    let info = legality(market)?;
    let rough = rough_prices_with(market, &info)?;
    let residual = residual_market(market, &rough, &info)?;
    Ok((rough, residual))
}

fn assemble(
    market: &Market,
    rough: PriceVector,
    residual: ResidualMarket,
    fine: PriceVector,
    algorithm: Algo,
) -> Result<PricedMarket> {
    let scaled: Vec<Rat> = fine.iter().map(|f| f * &residual.headroom).collect();
    let combined = combine_prices(&rough, &scaled, &residual)?;
    let denom = common_denominator(market.values.iter().flatten());
    let prices = perturb_distinct(&combined, &denom);
    Ok(PricedMarket { prices, rough, residual, fine, algorithm })
}

/// Makes prices pairwise distinct without changing any strict comparison.
///
/// Items are sorted by price and the `j`-th gets `j·η` added, with
/// `η = 1 / (4 m² D)` and `D` the common denominator of prices and values.
/// No bundle moves by `1/(4D)` or more, so strict preferences survive and
/// demand sets can only shrink.
pub fn perturb_distinct(prices: &[Rat], value_denominator: &BigInt) -> PriceVector {
    let distinct: BTreeSet<&Rat> = prices.iter().collect();
    if distinct.len() == prices.len() {
        return prices.to_vec();
    }
    let m = prices.len();
    let d = common_denominator(prices) * value_denominator;
    let eta = Rat::new(BigInt::one(), d * BigInt::from(4 * m * m));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| prices[a].cmp(&prices[b]).then(a.cmp(&b)));
    let mut out = prices.to_vec();
    for (j, &x) in order.iter().enumerate() {
        out[x] += &eta * Rat::from_integer(BigInt::from(j));
    }
    out
}

/// Distinct prices strictly inside `(1/2, 1)`, ascending.
pub(crate) fn high_band(count: usize) -> Vec<Rat> {
    let h = count as i64;
    (0..h).map(|t| ratio(1, 2) + ratio(t + 1, 2 * (h + 1))).collect()
}

/// Distinct prices `1/(m+1), …, m/(m+1)` for markets with nothing to decide.
pub(crate) fn trivial_prices(m: usize) -> PriceVector {
    (0..m).map(|j| ratio(j as i64 + 1, m as i64 + 1)).collect()
}

fn in_unit_interval(prices: &[Rat]) -> bool {
    prices.iter().all(|p| p.is_positive() && p < &Rat::one())
}

/// Runs `solver` on a market shaped the way the recursive algorithms expect.
///
/// Submarkets can carry legality sets that their own 0/1 realization does
/// not confirm, or items only one player may take. Those are priced like an
/// original market: rough prices settle the unambiguous part and the solver
/// runs on the residual, scaled into the headroom.
pub(crate) fn normalized(
    s: &SimplifiedMarket,
    solver: &dyn Fn(&SimplifiedMarket) -> Result<PriceVector>,
) -> Result<PriceVector> {
    if s.n() <= 1 || s.m() == 0 {
        return Ok(trivial_prices(s.m()));
    }
    let shared = (0..s.m()).all(|x| s.holders(x).len() >= 2);
    if shared && s.satisfies_p() {
        return solver(s);
    }
    let market = s.to_market();
    let info = legality(&market).map_err(|e| Error::Internal(format!("submarket without a legal allocation: {e}")))?;
    let rough = rough_prices_with(&market, &info)?;
    let residual = residual_market(&market, &rough, &info)?;
    let fine = if residual.is_trivial() { Vec::new() } else { normalized(&residual.simplified, solver)? };
    let scaled: Vec<Rat> = fine.iter().map(|f| f * &residual.headroom).collect();
    let prices = combine_prices(&rough, &scaled, &residual)?;
    if !in_unit_interval(&prices) {
        return Err(Error::Internal("normalized prices left (0, 1)".into()));
    }
    Ok(prices)
}

/// Checks a fine pricing: inside `(0, 1)` and accepted by the verifier.
pub fn check_fine(s: &SimplifiedMarket, prices: &[Rat]) -> Result<bool> {
    Ok(in_unit_interval(prices) && crate::verify::is_dynamic_pricing_simplified(s, prices)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::rational::{int, parse_rat};
    use crate::verify::{is_dynamic_pricing, is_dynamic_pricing_simplified};
    use proptest::prelude::*;

    #[test]
    fn algo_names_round_trip() {
        for a in [Algo::Auto, Algo::Four, Algo::TwoAlloc, Algo::Tri, Algo::Brute] {
            assert_eq!(a.to_string().parse::<Algo>().unwrap(), a);
        }
        assert!("fast".parse::<Algo>().is_err());
    }

    #[test]
    fn m1_end_to_end() {
        let m1 = fixture("M1").unwrap();
        for algo in [Algo::Auto, Algo::Four, Algo::TwoAlloc, Algo::Tri, Algo::Brute] {
            let priced = price_market(&m1, algo, None).unwrap();
            assert!(is_dynamic_pricing(&m1, &priced.prices).unwrap().accepted, "{algo}");
            let set: BTreeSet<&Rat> = priced.prices.iter().collect();
            assert_eq!(set.len(), 4);
        }
        let alpha = m1.item_id("α").unwrap();
        let fixed = price_market(&m1, Algo::Tri, Some(alpha)).unwrap();
        assert_eq!(fixed.fine, vec![ratio(1, 5), ratio(4, 5)]);
        assert!(price_market(&m1, Algo::Four, Some(alpha)).is_err());
        let beta = m1.item_id("β").unwrap();
        assert!(matches!(price_market(&m1, Algo::Tri, Some(beta)), Err(Error::Precondition(_))));
    }

    #[test]
    fn trivial_residuals() {
        for name in ["disjoint", "single"] {
            let m = fixture(name).unwrap();
            let priced = price_market(&m, Algo::Auto, None).unwrap();
            assert!(priced.residual.is_trivial());
            assert!(is_dynamic_pricing(&m, &priced.prices).unwrap().accepted);
            assert_ne!(priced.prices[0], priced.prices[1]);
        }
    }

    #[test]
    fn normalization_handles_unconfirmed_legality() {
        // Player 0 may take either item, but player 1 only wants b.
        let s = SimplifiedMarket::new(
            vec!["a".into(), "b".into()],
            vec!["0".into(), "1".into()],
            vec![1, 1],
            vec![BTreeSet::from([0, 1]), BTreeSet::from([1])],
        )
        .unwrap();
        assert!(!s.satisfies_p());
        let p = normalized(&s, &|_| panic!("solver should not run")).unwrap();
        assert!(check_fine(&s, &p).unwrap());
    }

    #[test]
    fn perturbation_examples() {
        let p = vec![ratio(1, 3), ratio(1, 3), ratio(1, 2)];
        let q = perturb_distinct(&p, &BigInt::one());
        assert_eq!(q[0], p[0]);
        assert!(q[1] > q[0] && q[1] < q[2]);
        assert_eq!(perturb_distinct(&[int(1), int(2)], &BigInt::one()), vec![int(1), int(2)]);
    }

    proptest! {
        #[test]
        fn perturbation_keeps_strict_preferences(
            vals in prop::collection::vec(prop::collection::vec(0i64..3, 5), 1..=3),
            raw in prop::collection::vec(1i64..4, 5),
            k in 1usize..=3,
        ) {
            let prices: Vec<Rat> = raw.iter().map(|&r| ratio(r, 3)).collect();
            let q = perturb_distinct(&prices, &BigInt::one());
            prop_assert_eq!(q.iter().collect::<BTreeSet<_>>().len(), q.len());
            for row in &vals {
                let market = Market {
                    items: (0..5).map(|x| format!("x{x}")).collect(),
                    players: vec!["p".into()],
                    demand: vec![5],
                    values: vec![row.iter().map(|&v| int(v)).collect()],
                };
                let _ = k;
                let before = market.demand_bundles(0, &prices).unwrap();
                let after = market.demand_bundles(0, &q).unwrap();
                prop_assert!(!after.is_empty());
                prop_assert!(after.iter().all(|b| before.contains(b)));
            }
        }
    }

    #[test]
    fn reference_prices_parse() {
        let m1 = fixture("M1").unwrap();
        let p: Vec<Rat> = ["1.5", "0.1", "0.5", "0.9"].iter().map(|s| parse_rat(s).unwrap()).collect();
        assert!(is_dynamic_pricing(&m1, &p).unwrap().accepted);
        let s = SimplifiedMarket::from_unit_values(&fixture("M2").unwrap()).unwrap();
        let fine = price_simplified(&s, Algo::Auto).unwrap();
        assert!(is_dynamic_pricing_simplified(&s, &fine).unwrap().accepted);
    }
}
