//! A legality summary of a market: optimum, legal and exclusive items, the
//! number of optimal allocations, and which pricing regimes apply.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::legality::{enumerate_optimal_allocations, legality};
use crate::market::Market;
use crate::pricing::{regime_for, Algo};
use crate::rational::fmt_rat;
use crate::rough::{residual_market, rough_prices_with};

/// Optimal allocations are counted up to this many.
pub const ALLOCATION_COUNT_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerLegality {
    pub player: String,
    pub demand: usize,
    pub legal: Vec<String>,
    pub exclusive: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Regimes {
    pub tri_demand: bool,
    pub four_player: bool,
    pub two_alloc: bool,
    /// What `auto` pricing runs on the residual, if anything.
    pub auto: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub max_welfare: String,
    pub players: Vec<PlayerLegality>,
    pub optimal_allocations: usize,
    /// True when counting stopped at the limit.
    pub allocations_truncated: bool,
    pub residual_items: Vec<String>,
    pub regimes: Regimes,
}

pub fn analyze(market: &Market) -> Result<Analysis> {
    let info = legality(market)?;
    let names = |set: &std::collections::BTreeSet<usize>| set.iter().map(|&x| market.items[x].clone()).collect();
    let players = (0..market.n())
        .map(|i| PlayerLegality {
            player: market.players[i].clone(),
            demand: market.demand[i],
            legal: names(&info.legal[i]),
            exclusive: names(&info.exclusive[i]),
        })
        .collect();
    let (optimal_allocations, allocations_truncated) = match enumerate_optimal_allocations(market, ALLOCATION_COUNT_LIMIT) {
        Ok(all) => (all.len(), false),
        Err(Error::EnumerationOverflow { limit, .. }) => (limit, true),
        Err(e) => return Err(e),
    };
    let rough = rough_prices_with(market, &info)?;
    let residual = residual_market(market, &rough, &info)?;
    let auto = if residual.is_trivial() {
        Some(Algo::Tri.to_string())
    } else {
        match regime_for(&residual.simplified) {
            Ok(a) => Some(a.to_string()),
            Err(Error::UnsupportedRegime(_)) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(Analysis {
        max_welfare: fmt_rat(&info.max_welfare),
        players,
        optimal_allocations,
        allocations_truncated,
        residual_items: residual.item_map.iter().map(|&x| market.items[x].clone()).collect(),
        regimes: Regimes {
            tri_demand: market.demand.iter().all(|&k| k <= 3),
            four_player: market.n() <= 4,
            two_alloc: !allocations_truncated && optimal_allocations <= 2,
            auto,
        },
    })
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |v: &[String]| format!("{{{}}}", v.join(", "));
        writeln!(f, "max welfare: {}", self.max_welfare)?;
        let more = if self.allocations_truncated { "+" } else { "" };
        writeln!(f, "optimal allocations: {}{more}", self.optimal_allocations)?;
        for p in &self.players {
            writeln!(f, "player {} (demand {}): K = {}, R = {}", p.player, p.demand, set(&p.legal), set(&p.exclusive))?;
        }
        writeln!(f, "residual items: {}", set(&self.residual_items))?;
        let yes = |b: bool| if b { "eligible" } else { "no" };
        writeln!(f, "regime tri: {}", yes(self.regimes.tri_demand))?;
        writeln!(f, "regime four: {}", yes(self.regimes.four_player))?;
        writeln!(f, "regime two-alloc: {}", yes(self.regimes.two_alloc))?;
        writeln!(f, "auto: {}", self.regimes.auto.as_deref().unwrap_or("unsupported"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;

    #[test]
    fn m1() {
        let a = analyze(&fixture("M1").unwrap()).unwrap();
        assert_eq!(a.max_welfare, "5");
        assert_eq!(a.optimal_allocations, 2);
        assert_eq!(a.players[0].legal, ["α", "β", "γ"]);
        assert_eq!(a.players[0].exclusive, ["β"]);
        assert_eq!(a.players[1].legal, ["α", "γ"]);
        assert!(a.players[1].exclusive.is_empty());
        assert_eq!(a.players[2].exclusive, ["δ"]);
        assert!(a.to_string().contains("player 1 (demand 2): K = {α, β, γ}, R = {β}"));
    }

    #[test]
    fn disjoint_legality() {
        let a = analyze(&fixture("disjoint").unwrap()).unwrap();
        assert_eq!(a.optimal_allocations, 1);
        assert!(a.players.iter().all(|p| p.legal == p.exclusive));
    }

    #[test]
    fn tri_demand_eligibility() {
        let a = analyze(&fixture("M2").unwrap()).unwrap();
        assert!(a.regimes.tri_demand);
        assert_eq!(a.regimes.auto.as_deref(), Some("tri"));
        assert!(a.to_string().contains("regime tri: eligible"));
    }
}
