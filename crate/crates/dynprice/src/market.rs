//! Valued multi-demand markets, bundles, allocations and demand sets.

use std::collections::BTreeSet;

use itertools::Itertools;
use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// A set of item indices.
pub type Bundle = BTreeSet<usize>;

/// Prices aligned with `Market::items`.
pub type PriceVector = Vec<Rat>;

/// A saturated multi-demand market.
///
/// `values[i][x]` is player `i`'s value for item `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Market {
    pub items: Vec<String>,
    pub players: Vec<String>,
    pub demand: Vec<usize>,
    pub values: Vec<Vec<Rat>>,
}

/// One bundle per player, pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(players: usize) -> Self {
        Allocation { bundles: vec![Bundle::new(); players] }
    }

    /// Owner of every item, `None` where unassigned.
    pub fn owners(&self, items: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; items];
        for (i, b) in self.bundles.iter().enumerate() {
            for &x in b {
                owner[x] = Some(i);
            }
        }
        owner
    }

    pub fn owner_of(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(&item))
    }

    pub fn is_disjoint(&self) -> bool {
        let total: usize = self.bundles.iter().map(|b| b.len()).sum();
        let union: BTreeSet<usize> = self.bundles.iter().flatten().copied().collect();
        total == union.len()
    }

    /// Every item covered and every player holding exactly its demand.
    pub fn is_full(&self, demand: &[usize], items: usize) -> bool {
        self.is_disjoint()
            && self.bundles.len() == demand.len()
            && self.bundles.iter().zip(demand).all(|(b, &k)| b.len() == k)
            && self.bundles.iter().flatten().all(|&x| x < items)
            && self.bundles.iter().map(|b| b.len()).sum::<usize>() == items
    }
}

impl Market {
    /// Builds a market and checks names, demands, values and saturation.
    pub fn new(
        items: Vec<String>,
        players: Vec<String>,
        demand: Vec<usize>,
        values: Vec<Vec<Rat>>,
    ) -> Result<Self> {
        let market = Market { items, players, demand, values };
        market.validate()?;
        Ok(market)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMarket(msg));
        if self.items.iter().collect::<BTreeSet<_>>().len() != self.items.len() {
            return bad("duplicate item id".into());
        }
        if self.players.iter().collect::<BTreeSet<_>>().len() != self.players.len() {
            return bad("duplicate player id".into());
        }
        if self.demand.len() != self.players.len() || self.values.len() != self.players.len() {
            return bad("per-player tables do not match the player list".into());
        }
        if let Some(i) = self.demand.iter().position(|&k| k == 0) {
            return bad(format!("player {} has zero demand", self.players[i]));
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != self.items.len() {
                return bad(format!("player {} has {} values for {} items", self.players[i], row.len(), self.items.len()));
            }
            if let Some(x) = row.iter().position(|v| v.is_negative()) {
                return bad(format!("negative value for ({}, {})", self.players[i], self.items[x]));
            }
        }
        let total: usize = self.demand.iter().sum();
        if total != self.items.len() {
            return bad(format!("total demand {total} differs from item count {}", self.items.len()));
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

    /// Bundle from item names.
    pub fn bundle(&self, names: &[&str]) -> Result<Bundle> {
        names.iter().map(|s| self.item_id(s)).collect()
    }

    pub fn item_names(&self, bundle: &Bundle) -> Vec<&str> {
        bundle.iter().map(|&x| self.items[x].as_str()).collect()
    }

    fn check_refs(&self, player: usize, bundle: &Bundle) -> Result<()> {
        if player >= self.n() {
            return Err(Error::InvalidReference(format!("player index {player}")));
        }
        if let Some(x) = bundle.iter().find(|&&x| x >= self.m()) {
            return Err(Error::InvalidReference(format!("item index {x}")));
        }
        Ok(())
    }

    /// Sum of the `k_i` highest values inside the bundle.
    pub fn bundle_value(&self, player: usize, bundle: &Bundle) -> Result<Rat> {
        self.check_refs(player, bundle)?;
        let row = &self.values[player];
        let mut vals: Vec<&Rat> = bundle.iter().map(|&x| &row[x]).collect();
        vals.sort_by(|a, b| b.cmp(a));
        Ok(vals.into_iter().take(self.demand[player]).sum())
    }

    pub fn utility(&self, player: usize, bundle: &Bundle, prices: &[Rat]) -> Result<Rat> {
        let value = self.bundle_value(player, bundle)?;
        if prices.len() != self.m() {
            return Err(Error::InvalidReference(format!(
                "price vector has {} entries for {} items",
                prices.len(),
                self.m()
            )));
        }
        let cost: Rat = bundle.iter().map(|&x| &prices[x]).sum();
        Ok(value - cost)
    }

    pub fn social_welfare(&self, allocation: &Allocation) -> Result<Rat> {
        if allocation.bundles.len() != self.n() {
            return Err(Error::InvalidAllocation("one bundle per player required".into()));
        }
        if !allocation.is_disjoint() {
            return Err(Error::InvalidAllocation("bundles overlap".into()));
        }
        let mut total = Rat::zero();
        for (i, b) in allocation.bundles.iter().enumerate() {
            total += self.bundle_value(i, b)?;
        }
        Ok(total)
    }

    /// Every utility-maximizing bundle of the player, in sorted order.
    ///
    /// Prices must be positive, so a maximizer never exceeds the demand.
    pub fn demand_bundles(&self, player: usize, prices: &[Rat]) -> Result<Vec<Bundle>> {
        self.check_refs(player, &Bundle::new())?;
        if prices.len() != self.m() {
            return Err(Error::InvalidReference("price vector length".into()));
        }
        if prices.iter().any(|p| !p.is_positive()) {
            return Err(Error::Precondition("prices must be positive".into()));
        }
        let k = self.demand[player];
        let margins: Vec<Rat> = (0..self.m()).map(|x| &self.values[player][x] - &prices[x]).collect();
        Ok(maximizing_bundles(&margins, k))
    }
}

/// All subsets of size at most `k` maximizing the sum of `margins`.
pub(crate) fn maximizing_bundles(margins: &[Rat], k: usize) -> Vec<Bundle> {
    let mut positive: Vec<usize> = (0..margins.len()).filter(|&x| margins[x].is_positive()).collect();
    let zero: Vec<usize> = (0..margins.len()).filter(|&x| margins[x].is_zero()).collect();
    positive.sort_by(|&a, &b| margins[b].cmp(&margins[a]).then(a.cmp(&b)));

    let mut out = Vec::new();
    if positive.len() >= k {
        if k == 0 {
            return vec![Bundle::new()];
        }
        let boundary = &margins[positive[k - 1]];
        let fixed: Bundle = positive.iter().copied().filter(|&x| &margins[x] > boundary).collect();
        let class: Vec<usize> = positive.iter().copied().filter(|&x| &margins[x] == boundary).collect();
        for pick in class.iter().copied().combinations(k - fixed.len()) {
            let mut b = fixed.clone();
            b.extend(pick);
            out.push(b);
        }
    } else {
        let base: Bundle = positive.iter().copied().collect();
        for extra in 0..=(k - positive.len()).min(zero.len()) {
            for pick in zero.iter().copied().combinations(extra) {
                let mut b = base.clone();
                b.extend(pick);
                out.push(b);
            }
        }
    }
    out.sort();
    out
}
