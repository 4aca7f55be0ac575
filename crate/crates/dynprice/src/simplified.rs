//! Simplified markets: unit values, given by legality sets.

use std::collections::BTreeSet;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::legality::{check_forced, ForcedAssignment};
use crate::market::{Allocation, Market};
use crate::matching::{alternating_closure, kuhn};
use crate::rational::Rat;

/// Player clones, free items, and clone-to-item adjacency.
type ResidualGraph = (Vec<usize>, Vec<usize>, Vec<Vec<usize>>);

/// A market where player `i` values item `x` at 1 iff `x ∈ legal[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplifiedMarket {
    pub items: Vec<String>,
    pub players: Vec<String>,
    pub demand: Vec<usize>,
    pub legal: Vec<BTreeSet<usize>>,
}

/// Players whose combined neighbourhood is too small for their demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallCertificate {
    pub deficient_players: BTreeSet<usize>,
    pub reachable_items: BTreeSet<usize>,
}

impl SimplifiedMarket {
    pub fn new(
        items: Vec<String>,
        players: Vec<String>,
        demand: Vec<usize>,
        legal: Vec<BTreeSet<usize>>,
    ) -> Result<Self> {
        let s = SimplifiedMarket { items, players, demand, legal };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidMarket(msg.to_string()));
        if self.demand.len() != self.players.len() || self.legal.len() != self.players.len() {
            return bad("per-player tables do not match the player list");
        }
        if self.demand.contains(&0) {
            return bad("zero demand");
        }
        if self.demand.iter().sum::<usize>() != self.items.len() {
            return bad("total demand differs from item count");
        }
        if self.legal.iter().flatten().any(|&x| x >= self.items.len()) {
            return bad("legality set names an unknown item");
        }
        if (0..self.m()).any(|x| self.legal.iter().all(|s| !s.contains(&x))) {
            return bad("item legal to nobody");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn item_id(&self, name: &str) -> Result<usize> {
        self.items
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::InvalidReference(format!("unknown item {name:?}")))
    }

    pub fn player_id(&self, name: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::InvalidReference(format!("unknown player {name:?}")))
    }

    /// Players for whom the item is legal.
    pub fn holders(&self, item: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.legal[i].contains(&item)).collect()
    }

    /// Items legal to some player of the set, within `items`.
    pub fn neighbourhood(&self, players: &BTreeSet<usize>, items: &BTreeSet<usize>) -> BTreeSet<usize> {
        players.iter().flat_map(|&i| self.legal[i].intersection(items).copied()).collect()
    }

    /// The valued market with 0/1 values.
    pub fn to_market(&self) -> Market {
        let values = self
            .legal
            .iter()
            .map(|s| (0..self.m()).map(|x| if s.contains(&x) { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Market { items: self.items.clone(), players: self.players.clone(), demand: self.demand.clone(), values }
    }

    /// Reads legality sets off positive values.
    pub fn from_unit_values(market: &Market) -> Result<Self> {
        let legal = market
            .values
            .iter()
            .map(|row| (0..market.m()).filter(|&x| !row[x].is_zero()).collect())
            .collect();
        SimplifiedMarket::new(market.items.clone(), market.players.clone(), market.demand.clone(), legal)
    }

    /// Clone list and adjacency after removing the forced items.
    fn residual_graph(&self, forced: &ForcedAssignment) -> Option<ResidualGraph> {
        let mut left = self.demand.clone();
        for (&x, &i) in forced {
            if i >= self.n() || x >= self.m() || left[i] == 0 {
                return None;
            }
            left[i] -= 1;
        }
        let free: Vec<usize> = (0..self.m()).filter(|x| !forced.contains_key(x)).collect();
        let clones: Vec<usize> = (0..self.n()).flat_map(|i| std::iter::repeat_n(i, left[i])).collect();
        let adj = clones
            .iter()
            .map(|&i| (0..free.len()).filter(|&j| self.legal[i].contains(&free[j])).collect())
            .collect();
        Some((clones, free, adj))
    }

    /// A full allocation from legality sets extending the forced pairs.
    pub fn legal_allocation_with(&self, forced: &ForcedAssignment) -> Option<Allocation> {
        if forced.iter().any(|(x, &i)| i >= self.n() || !self.legal[i].contains(x)) {
            return None;
        }
        let (clones, free, adj) = self.residual_graph(forced)?;
        if clones.len() != free.len() {
            return None;
        }
        let (ml, _) = kuhn(&adj, free.len());
        let mut alloc = Allocation::empty(self.n());
        for (&x, &i) in forced {
            alloc.bundles[i].insert(x);
        }
        for (c, m) in ml.iter().enumerate() {
            alloc.bundles[clones[c]].insert(free[(*m)?]);
        }
        Some(alloc)
    }

    pub fn legal_allocation(&self) -> Option<Allocation> {
        self.legal_allocation_with(&ForcedAssignment::new())
    }

    /// True iff the forced pairs extend to a full allocation within legality sets.
    pub fn is_extendable(&self, forced: &ForcedAssignment) -> bool {
        self.legal_allocation_with(forced).is_some()
    }

    /// Same as `is_extendable`, rejecting illegal or over-demand pairs.
    pub fn check_extendable(&self, forced: &ForcedAssignment) -> Result<bool> {
        check_forced(self.n(), &self.demand, &self.legal, forced)?;
        Ok(self.is_extendable(forced))
    }

    /// Deficiency witness when the forced pairs cannot be extended.
    ///
    /// Taken from the alternating-path closure of an unmatched clone.
    pub fn hall_violator(&self, forced: &ForcedAssignment) -> Result<Option<HallCertificate>> {
        check_forced(self.n(), &self.demand, &self.legal, forced)?;
        let (clones, free, adj) = self.residual_graph(forced).expect("checked against demand");
        if clones.len() != free.len() {
            return Err(Error::Precondition("market is not saturated".into()));
        }
        let (ml, mr) = kuhn(&adj, free.len());
        let Some(start) = ml.iter().position(|m| m.is_none()) else {
            return Ok(None);
        };
        let (zl, zr) = alternating_closure(start, &adj, &mr);
        let deficient_players = (0..clones.len()).filter(|&c| zl[c]).map(|c| clones[c]).collect();
        let reachable_items = (0..free.len()).filter(|&j| zr[j]).map(|j| free[j]).collect();
        Ok(Some(HallCertificate { deficient_players, reachable_items }))
    }

    /// Legality of the 0/1 realization, computed by matchings.
    ///
    /// `None` when no full allocation within the legality sets exists.
    pub fn true_legality(&self) -> Option<Vec<BTreeSet<usize>>> {
        self.legal_allocation()?;
        Some(
            (0..self.n())
                .map(|i| {
                    self.legal[i]
                        .iter()
                        .copied()
                        .filter(|&x| self.is_extendable(&ForcedAssignment::from([(x, i)])))
                        .collect()
                })
                .collect(),
        )
    }

    /// Legality in the 0/1 realization coincides with the legality sets.
    pub fn satisfies_p(&self) -> bool {
        self.true_legality().as_deref() == Some(&self.legal[..])
    }

    /// Checks that a full allocation uses only legal items.
    pub fn is_legal_allocation(&self, alloc: &Allocation) -> bool {
        alloc.is_full(&self.demand, self.m())
            && alloc.bundles.iter().enumerate().all(|(i, b)| b.is_subset(&self.legal[i]))
    }
}
