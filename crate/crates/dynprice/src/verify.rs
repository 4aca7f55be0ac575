//! Ground truth: checks whether prices are a dynamic pricing, and finds one
//! by exhaustive search on small markets.

use itertools::Itertools;
use num::Signed;

use crate::error::{Error, Result};
use crate::legality::{ForcedAssignment, WelfareOracle};
use crate::market::{Bundle, PriceVector};
use crate::rational::{ratio, Rat};
use crate::simplified::SimplifiedMarket;
use crate::Market;

/// Outcome of a check; the counterexample is a demand bundle that no
/// optimal allocation extends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub accepted: bool,
    pub counterexample: Option<(usize, Bundle)>,
}

impl VerificationReport {
    fn verdict(counterexample: Option<(usize, Bundle)>) -> Self {
        VerificationReport { accepted: counterexample.is_none(), counterexample }
    }
}

fn check_prices(m: usize, prices: &[Rat]) -> Result<()> {
    if prices.len() != m {
        return Err(Error::InvalidReference(format!("{} prices for {m} items", prices.len())));
    }
    if prices.iter().any(|p| !p.is_positive()) {
        return Err(Error::Precondition("prices must be positive".into()));
    }
    Ok(())
}

fn forced(player: usize, bundle: &Bundle) -> ForcedAssignment {
    bundle.iter().map(|&x| (x, player)).collect()
}

/// Every demand bundle of every player extends to an optimal allocation.
pub fn is_dynamic_pricing(market: &Market, prices: &[Rat]) -> Result<VerificationReport> {
    check_prices(market.m(), prices)?;
    let oracle = WelfareOracle::new(market)?;
    for i in 0..market.n() {
        for b in market.demand_bundles(i, prices)? {
            if !oracle.extends(&forced(i, &b)) {
                return Ok(VerificationReport::verdict(Some((i, b))));
            }
        }
    }
    Ok(VerificationReport::verdict(None))
}

/// The same check on a simplified market, where optimal means legal.
pub fn is_dynamic_pricing_simplified(s: &SimplifiedMarket, prices: &[Rat]) -> Result<VerificationReport> {
    check_prices(s.m(), prices)?;
    let valued = s.to_market();
    for i in 0..s.n() {
        for b in valued.demand_bundles(i, prices)? {
            if !s.is_extendable(&forced(i, &b)) {
                return Ok(VerificationReport::verdict(Some((i, b))));
            }
        }
    }
    Ok(VerificationReport::verdict(None))
}

/// Default cap on the number of items for exhaustive search.
pub const BRUTE_FORCE_BOUND: usize = 6;

/// Prices `1/(m+1), 2/(m+1), …` following an order from cheapest up.
pub fn prices_from_order(order: &[usize]) -> PriceVector {
    let m = order.len() as i64;
    let mut p = vec![Rat::default(); order.len()];
    for (rank, &x) in order.iter().enumerate() {
        p[x] = ratio(rank as i64 + 1, m + 1);
    }
    p
}

/// First item order, scanned lexicographically, whose prices verify.
pub fn brute_force_pricing(s: &SimplifiedMarket) -> Result<Option<PriceVector>> {
    brute_force_pricing_bounded(s, BRUTE_FORCE_BOUND)
}

pub fn brute_force_pricing_bounded(s: &SimplifiedMarket, bound: usize) -> Result<Option<PriceVector>> {
    if s.m() > bound {
        return Err(Error::Size(format!("{} items exceeds the search bound {bound}", s.m())));
    }
    for order in (0..s.m()).permutations(s.m()) {
        let p = prices_from_order(&order);
        if is_dynamic_pricing_simplified(s, &p)?.accepted {
            return Ok(Some(p));
        }
    }
    Ok(None)
}
