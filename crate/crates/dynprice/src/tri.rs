//! Markets where every player demands at most three items.
//!
//! The recursion prices a market so that a chosen item is strictly the
//! cheapest. It splits the market into a pair of submarkets when some
//! assignment of two or three items cannot be completed, and otherwise
//! removes a player or an item.

use std::collections::BTreeSet;

use itertools::Itertools;
use num::{BigInt, One};

use crate::error::{Error, Result};
use crate::legality::ForcedAssignment;
use crate::market::PriceVector;
use crate::pricing::{normalized, perturb_distinct};
use crate::rational::{ratio, Rat};
use crate::simplified::SimplifiedMarket;

/// A split of the market: the `B` side holds every item legal to its players
/// plus `slack` more, which only `C` players can take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmarketPair {
    pub b_players: BTreeSet<usize>,
    pub b_items: BTreeSet<usize>,
    pub c_players: BTreeSet<usize>,
    pub c_items: BTreeSet<usize>,
    /// Items of `B` legal to some `C` player.
    pub crossing: BTreeSet<usize>,
    /// 1 for a submarket pair, 2 for a generalized one.
    pub slack: usize,
}

/// A dynamic pricing with prices in `(0, 1)` for a market whose demands are
/// all at most three.
pub fn price_tridemand(s: &SimplifiedMarket) -> Result<PriceVector> {
    check_demands(s)?;
    normalized(s, &|t| fixed(t, 0))
}

/// A dynamic pricing in `(0, 1)` in which `item` is strictly the cheapest.
///
/// The market must be saturated and its legality sets must be exactly the
/// legal pairs of its 0/1 realization.
pub fn price_fixed_at(s: &SimplifiedMarket, item: usize) -> Result<PriceVector> {
    check_demands(s)?;
    if item >= s.m() {
        return Err(Error::InvalidReference(format!("item index {item}")));
    }
    if s.demand.iter().sum::<usize>() != s.m() {
        return Err(Error::Precondition("market is not saturated".into()));
    }
    if !s.satisfies_p() {
        return Err(Error::Precondition("legality sets differ from the legal pairs".into()));
    }
    fixed(s, item)
}

fn check_demands(s: &SimplifiedMarket) -> Result<()> {
    match s.demand.iter().max() {
        Some(&k) if k > 3 => Err(Error::UnsupportedRegime(format!("demand {k} exceeds 3"))),
        _ => Ok(()),
    }
}

/// A market on parent items and parent-indexed legality sets.
struct Piece {
    market: SimplifiedMarket,
    /// Parent index of each local item.
    items: Vec<usize>,
}

impl Piece {
    fn new(s: &SimplifiedMarket, items: &BTreeSet<usize>, players: Vec<(String, usize, BTreeSet<usize>)>) -> Piece {
        let items: Vec<usize> = items.iter().copied().collect();
        let local = |x: &usize| items.iter().position(|y| y == x);
        let market = SimplifiedMarket {
            items: items.iter().map(|&x| s.items[x].clone()).collect(),
            players: players.iter().map(|p| p.0.clone()).collect(),
            demand: players.iter().map(|p| p.1).collect(),
            legal: players.iter().map(|p| p.2.iter().filter_map(local).collect()).collect(),
        };
        Piece { market, items }
    }

    fn local(&self, x: usize) -> usize {
        self.items.iter().position(|&y| y == x).expect("item belongs to the piece")
    }

    /// Prices fixed at a parent item, keyed back to parent indices.
    ///
    /// A player may lose legal items here when it is the only taker of the
    /// crossing items; it then prices against what it can actually take.
    /// That is sound while its demand is at most `free`, the size up to which
    /// every assignment in the parent extends.
    fn fixed_at(&self, x: usize, free: usize) -> Result<Vec<(usize, Rat)>> {
        let market = if self.market.satisfies_p() {
            self.market.clone()
        } else {
            let legal = self
                .market
                .true_legality()
                .ok_or_else(|| Error::Internal(format!("submarket on {:?} has no legal allocation", self.market.items)))?;
            for (i, l) in legal.iter().enumerate() {
                if *l != self.market.legal[i] && self.market.demand[i] > free {
                    return Err(Error::Internal(format!(
                        "submarket on {:?} changes the legality of {}",
                        self.market.items, self.market.players[i]
                    )));
                }
            }
            SimplifiedMarket { legal, ..self.market.clone() }
        };
        let p = fixed(&market, self.local(x))?;
        Ok(self.items.iter().copied().zip(p).collect())
    }
}

fn player(s: &SimplifiedMarket, i: usize, demand: usize, items: &BTreeSet<usize>) -> (String, usize, BTreeSet<usize>) {
    (s.players[i].clone(), demand, s.legal[i].intersection(items).copied().collect())
}

fn aux_name(s: &SimplifiedMarket) -> String {
    (0..).map(|j| format!("~aux{j}")).find(|name| !s.players.contains(name)).expect("unbounded names")
}

fn fixed(s: &SimplifiedMarket, xf: usize) -> Result<PriceVector> {
    let p = fixed_raw(s, xf)?;
    Ok(perturb_distinct(&p, &BigInt::one()))
}

fn fixed_raw(s: &SimplifiedMarket, xf: usize) -> Result<PriceVector> {
    let (m, n) = (s.m(), s.n());
    let all: BTreeSet<usize> = (0..m).collect();
    let mut p = vec![Rat::default(); m];

    if n <= 2 {
        for (x, px) in p.iter_mut().enumerate() {
            let shared = (0..n).all(|i| s.legal[i].contains(&x));
            *px = if x == xf {
                ratio(1, 5)
            } else if shared && n == 2 {
                ratio(4, 5)
            } else {
                ratio(1, 2)
            };
        }
        return Ok(p);
    }
    if m <= 2 {
        for (x, px) in p.iter_mut().enumerate() {
            *px = if x == xf { ratio(1, 5) } else { ratio(4, 5) };
        }
        return Ok(p);
    }

    if let Some(unit) = (0..n).find(|&i| s.demand[i] == 1) {
        let others: Vec<_> = (0..n).filter(|&i| i != unit).collect();
        if s.legal[unit] == BTreeSet::from([xf]) {
            let rest: BTreeSet<usize> = all.iter().copied().filter(|&x| x != xf).collect();
            let piece = Piece::new(s, &rest, others.iter().map(|&i| player(s, i, s.demand[i], &rest)).collect());
            let first = *rest.first().expect("at least two items remain");
            p[xf] = ratio(1, 5);
            for (x, q) in piece.fixed_at(first, 1)? {
                p[x] = ratio(1, 5) + ratio(4, 5) * q;
            }
            return Ok(p);
        }
        let hat = *s.legal[unit].iter().find(|&&x| x != xf).expect("a second legal item");
        let rest: BTreeSet<usize> = all.iter().copied().filter(|&x| x != hat).collect();
        let piece = Piece::new(s, &rest, others.iter().map(|&i| player(s, i, s.demand[i], &rest)).collect());
        // Without the property, some pair with `hat` cannot be completed and
        // the pair split below applies.
        if piece.market.satisfies_p() {
            p[hat] = ratio(4, 5);
            for (x, q) in piece.fixed_at(xf, 1)? {
                p[x] = ratio(4, 5) * q;
            }
            return Ok(p);
        }
    }

    if let Some(witness) = stuck_assignments(s, None).next() {
        let pair = find_submarket_pair(s, &witness)?;
        crate::audit::emit(s, || crate::audit::Structure::Pair(pair.clone()));
        return split_two(s, &pair, xf);
    }
    if let Some(witness) = stuck_assignments(s, Some(xf)).next() {
        let pair = find_submarket_pair(s, &witness)?;
        crate::audit::emit(s, || crate::audit::Structure::Pair(pair.clone()));
        return split_three(s, &pair, xf);
    }

    let ix = *s.holders(xf).first().ok_or_else(|| Error::Internal(format!("item {xf} is legal to nobody")))?;
    let rest: BTreeSet<usize> = all.iter().copied().filter(|&x| x != xf).collect();
    let players = (0..n).map(|i| player(s, i, s.demand[i] - usize::from(i == ix), &rest)).collect();
    let piece = Piece::new(s, &rest, players);
    let first = *rest.first().expect("items remain");
    p[xf] = ratio(1, 5);
    for (x, q) in piece.fixed_at(first, 1)? {
        p[x] = ratio(1, 5) + ratio(4, 5) * q;
    }
    Ok(p)
}

/// Demand-respecting assignments of two items, or of three items starting
/// with `with`, that no legal allocation completes.
fn stuck_assignments(s: &SimplifiedMarket, with: Option<usize>) -> impl Iterator<Item = ForcedAssignment> + '_ {
    let m = s.m();
    let groups: Vec<Vec<usize>> = match with {
        None => (0..m).combinations(2).collect(),
        Some(xf) => (0..m).filter(|&x| x != xf).combinations(2).map(|c| vec![xf, c[0], c[1]]).collect(),
    };
    groups.into_iter().flat_map(move |items| {
        let choices: Vec<Vec<usize>> = items.iter().map(|&x| s.holders(x)).collect();
        choices
            .into_iter()
            .multi_cartesian_product()
            .filter(|owners| respects_demand(s, owners))
            .map(|owners| items.iter().copied().zip(owners).collect::<ForcedAssignment>())
            .filter(|forced| !s.is_extendable(forced))
            .collect::<Vec<_>>()
    })
}

fn respects_demand(s: &SimplifiedMarket, owners: &[usize]) -> bool {
    (0..s.n()).all(|i| owners.iter().filter(|&&o| o == i).count() <= s.demand[i])
}

impl SubmarketPair {
    /// The pair whose `B` players are `b_players`, if it meets every condition.
    ///
    /// `B` has to hold exactly the items legal to its players, so the player
    /// side determines the pair.
    pub fn from_players(s: &SimplifiedMarket, b_players: BTreeSet<usize>, slack: usize) -> Option<SubmarketPair> {
        let c_players: BTreeSet<usize> = (0..s.n()).filter(|i| !b_players.contains(i)).collect();
        if b_players.is_empty() || c_players.is_empty() {
            return None;
        }
        let b_items: BTreeSet<usize> = b_players.iter().flat_map(|&i| s.legal[i].iter().copied()).collect();
        let k_b: usize = b_players.iter().map(|&i| s.demand[i]).sum();
        let k_c: usize = c_players.iter().map(|&i| s.demand[i]).sum();
        let c_items: BTreeSet<usize> = (0..s.m()).filter(|x| !b_items.contains(x)).collect();
        if b_items.len() != k_b + slack || c_items.is_empty() || c_items.len() + slack != k_c {
            return None;
        }
        let crossing: BTreeSet<usize> =
            b_items.iter().copied().filter(|x| c_players.iter().any(|&i| s.legal[i].contains(x))).collect();
        if crossing.len() <= slack {
            return None;
        }
        let pair = SubmarketPair { b_players, b_items, c_players, c_items, crossing, slack };
        crossing_moves_freely(s, &pair).then_some(pair)
    }

    /// Whether two crossing items, rather than one, move to `C`.
    pub fn generalized(&self) -> bool {
        self.slack == 2
    }

    /// The pair read off the Hall certificate of a stuck assignment.
    fn from_witness(s: &SimplifiedMarket, witness: &ForcedAssignment) -> Result<SubmarketPair> {
        let cert = s
            .hall_violator(witness)?
            .ok_or_else(|| Error::Precondition("the assignment extends to a legal allocation".into()))?;
        SubmarketPair::from_players(s, cert.deficient_players, witness.len() - 1)
            .ok_or_else(|| Error::Internal(format!("Hall certificate of {witness:?} is not a submarket pair")))
    }
}

/// Largest player count for growing a submarket pair.
pub const PAIR_SEARCH_PLAYERS: usize = 16;

/// A maximal submarket pair containing the items of a stuck assignment.
///
/// Two items give a plain pair and three items a generalized one. The pair
/// from the Hall certificate grows by merging in sets of `C` players,
/// smallest first, while the union is still a pair.
pub fn find_submarket_pair(s: &SimplifiedMarket, witness: &ForcedAssignment) -> Result<SubmarketPair> {
    crate::legality::check_forced(s.n(), &s.demand, &s.legal, witness)?;
    if !(2..=3).contains(&witness.len()) {
        return Err(Error::Precondition(format!("witness of size {}", witness.len())));
    }
    if s.n() > PAIR_SEARCH_PLAYERS {
        return Err(Error::Size(format!("{} players exceeds the pair search bound {PAIR_SEARCH_PLAYERS}", s.n())));
    }
    let mut pair = SubmarketPair::from_witness(s, witness)?;
    'grow: loop {
        for size in 1..pair.c_players.len() {
            for added in pair.c_players.iter().copied().combinations(size) {
                let union: BTreeSet<usize> = pair.b_players.iter().copied().chain(added).collect();
                if let Some(bigger) = SubmarketPair::from_players(s, union, pair.slack) {
                    pair = bigger;
                    continue 'grow;
                }
            }
        }
        return Ok(pair);
    }
}

/// Every `slack`-subset of the crossing items can go to the `C` side.
fn crossing_moves_freely(s: &SimplifiedMarket, pair: &SubmarketPair) -> bool {
    let side = |players: &BTreeSet<usize>, items: &BTreeSet<usize>| {
        let piece = Piece::new(s, items, players.iter().map(|&i| player(s, i, s.demand[i], items)).collect());
        piece.market.legal_allocation().is_some()
    };
    pair.crossing.iter().copied().combinations(pair.slack).all(|moved| {
        let b: BTreeSet<usize> = pair.b_items.iter().copied().filter(|x| !moved.contains(x)).collect();
        let mut c = pair.c_items.clone();
        c.extend(moved);
        side(&pair.b_players, &b) && side(&pair.c_players, &c)
    })
}

/// `B` plus an artificial player who stands in for `C`.
fn b_prime(s: &SimplifiedMarket, pair: &SubmarketPair) -> Piece {
    let mut players: Vec<_> = pair.b_players.iter().map(|&i| player(s, i, s.demand[i], &pair.b_items)).collect();
    players.push((aux_name(s), pair.slack, pair.crossing.clone()));
    Piece::new(s, &pair.b_items, players)
}

/// `C` plus some crossing items.
fn c_prime(s: &SimplifiedMarket, pair: &SubmarketPair, extra: &[usize]) -> Piece {
    let mut items = pair.c_items.clone();
    items.extend(extra);
    Piece::new(s, &items, pair.c_players.iter().map(|&i| player(s, i, s.demand[i], &items)).collect())
}

fn split_two(s: &SimplifiedMarket, pair: &SubmarketPair, xf: usize) -> Result<PriceVector> {
    let bp = b_prime(s, pair);
    let mut p = vec![Rat::default(); s.m()];
    let half = ratio(1, 2);
    if pair.crossing.contains(&xf) {
        for (x, q) in bp.fixed_at(xf, 1)? {
            p[x] = &half + &half * q;
        }
        for (x, q) in c_prime(s, pair, &[xf]).fixed_at(xf, 1)? {
            p[x] = &half * q;
        }
    } else if pair.b_items.contains(&xf) {
        let pb = bp.fixed_at(xf, 1)?;
        let (y, py) = pb
            .iter()
            .filter(|(x, _)| pair.crossing.contains(x))
            .min_by(|a, b| a.1.cmp(&b.1))
            .cloned()
            .expect("crossing items exist");
        for (x, q) in pb {
            p[x] = if q <= py { ratio(2, 5) * q } else { ratio(4, 5) + ratio(1, 5) * q };
        }
        for (x, q) in c_prime(s, pair, &[y]).fixed_at(y, 1)? {
            if x != y {
                p[x] = ratio(2, 5) + ratio(2, 5) * q;
            }
        }
    } else {
        let y = *pair.crossing.first().expect("crossing items exist");
        for (x, q) in bp.fixed_at(y, 1)? {
            p[x] = &half + &half * q;
        }
        for (x, q) in c_prime(s, pair, &[y]).fixed_at(xf, 1)? {
            p[x] = &half * q;
        }
    }
    Ok(p)
}

fn split_three(s: &SimplifiedMarket, pair: &SubmarketPair, xf: usize) -> Result<PriceVector> {
    let pb = b_prime(s, pair).fixed_at(xf, 2)?;
    let mut crossing: Vec<(usize, Rat)> = pb.iter().filter(|(x, _)| pair.crossing.contains(x)).cloned().collect();
    crossing.sort_by(|a, b| a.1.cmp(&b.1));
    let (y1, y2) = (crossing[0].clone(), crossing[1].clone());
    let pc = c_prime(s, pair, &[y1.0, y2.0]).fixed_at(y1.0, 2)?;
    let pc_y2 = pc.iter().find(|(x, _)| *x == y2.0).map(|(_, q)| q.clone()).expect("y2 is priced in C");

    let fifth = ratio(1, 5);
    let mut p = vec![Rat::default(); s.m()];
    for (x, q) in pb {
        let base = if q <= y1.1 {
            ratio(0, 1)
        } else if q <= y2.1 {
            ratio(2, 5)
        } else {
            ratio(4, 5)
        };
        p[x] = base + &fifth * q;
    }
    for (x, q) in pc {
        if pair.c_items.contains(&x) {
            let base = if q < pc_y2 { ratio(1, 5) } else { ratio(3, 5) };
            p[x] = base + &fifth * q;
        }
    }
    Ok(p)
}
