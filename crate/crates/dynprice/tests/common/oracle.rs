//! Brute-force reference implementations.
//!
//! Nothing here calls the library's algorithms; only its data types are used.
//! Allocations are owner vectors: `owner[x]` is the player holding item `x`.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dynprice::rational::{int, Rat};
use dynprice::Market;
use itertools::Itertools;
use num::{Signed, Zero};
use proptest::prelude::*;

/// Every assignment giving each player exactly its demand.
pub fn all_full_allocations(values: &[Vec<Rat>], demand: &[usize]) -> Vec<Vec<usize>> {
    let m = values.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut owner = vec![0; m];
    let mut left = demand.to_vec();
    fill(0, &mut owner, &mut left, &mut out);
    out
}

fn fill(x: usize, owner: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if x == owner.len() {
        if left.iter().all(|&l| l == 0) {
            out.push(owner.clone());
        }
        return;
    }
    for i in 0..left.len() {
        if left[i] > 0 {
            left[i] -= 1;
            owner[x] = i;
            fill(x + 1, owner, left, out);
            left[i] += 1;
        }
    }
}

pub fn welfare(values: &[Vec<Rat>], owner: &[usize]) -> Rat {
    owner.iter().enumerate().map(|(x, &i)| values[i][x].clone()).sum()
}

pub fn brute_max_welfare(values: &[Vec<Rat>], demand: &[usize]) -> Rat {
    all_full_allocations(values, demand).iter().map(|a| welfare(values, a)).max().unwrap_or_else(Rat::zero)
}

pub fn brute_optimal(values: &[Vec<Rat>], demand: &[usize]) -> Vec<Vec<usize>> {
    let all = all_full_allocations(values, demand);
    let best = all.iter().map(|a| welfare(values, a)).max().unwrap_or_else(Rat::zero);
    all.into_iter().filter(|a| welfare(values, a) == best).collect()
}

pub fn brute_legality(values: &[Vec<Rat>], demand: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut legal = vec![BTreeSet::new(); demand.len()];
    for a in brute_optimal(values, demand) {
        for (x, &i) in a.iter().enumerate() {
            legal[i].insert(x);
        }
    }
    legal
}

/// Some optimal allocation gives an item to a player valuing it at zero.
pub fn violates_assumption(values: &[Vec<Rat>], demand: &[usize]) -> bool {
    brute_optimal(values, demand)
        .iter()
        .any(|a| a.iter().enumerate().any(|(x, &i)| values[i][x].is_zero()))
}

/// Utility-maximizing bundles among all subsets of size at most `k`.
pub fn brute_demand(row: &[Rat], prices: &[Rat], k: usize) -> Vec<BTreeSet<usize>> {
    let m = row.len();
    let subsets: Vec<Vec<usize>> = (0..=k.min(m)).flat_map(|s| (0..m).combinations(s)).collect();
    let util = |b: &Vec<usize>| b.iter().map(|&x| &row[x] - &prices[x]).sum::<Rat>();
    let best = subsets.iter().map(util).max().unwrap();
    subsets.iter().filter(|b| util(b) == best).map(|b| b.iter().copied().collect()).collect()
}

/// Every demand bundle of every player lies inside some optimal allocation.
pub fn brute_is_dynamic_pricing(values: &[Vec<Rat>], demand: &[usize], prices: &[Rat]) -> bool {
    let optimal = brute_optimal(values, demand);
    (0..demand.len()).all(|i| {
        brute_demand(&values[i], prices, demand[i])
            .iter()
            .all(|b| optimal.iter().any(|a| b.iter().all(|&x| a[x] == i)))
    })
}

/// 0/1 value table from legality sets.
pub fn unit_values(legal: &[BTreeSet<usize>], m: usize) -> Vec<Vec<Rat>> {
    legal.iter().map(|s| (0..m).map(|x| int(s.contains(&x) as i64)).collect()).collect()
}

/// Assignments in which every player holds only items from its legality set.
pub fn brute_legal_allocations(legal: &[BTreeSet<usize>], demand: &[usize]) -> Vec<Vec<usize>> {
    let m: usize = demand.iter().sum();
    let values = unit_values(legal, m);
    all_full_allocations(&values, demand)
        .into_iter()
        .filter(|a| a.iter().enumerate().all(|(x, &i)| legal[i].contains(&x)))
        .collect()
}

pub fn named(values: Vec<Vec<Rat>>, demand: Vec<usize>) -> Market {
    let m = values.first().map_or(0, |r| r.len());
    Market {
        items: (0..m).map(|x| format!("x{x}")).collect(),
        players: (0..demand.len()).map(|i| format!("p{i}")).collect(),
        demand,
        values,
    }
}

/// Random saturated markets with small integer values, about a third zeros.
pub fn arb_market(max_players: usize, max_demand: usize, max_items: usize) -> impl Strategy<Value = Market> {
    prop::collection::vec(1..=max_demand, 1..=max_players)
        .prop_map(move |mut demand| {
            while demand.iter().sum::<usize>() > max_items {
                demand.pop();
            }
            demand
        })
        .prop_flat_map(|demand| {
            let m: usize = demand.iter().sum();
            let n = demand.len();
            (Just(demand), prop::collection::vec(prop::collection::vec(prop_oneof![Just(0i64), 1i64..=4], m), n))
        })
        .prop_map(|(demand, raw)| named(raw.into_iter().map(|r| r.into_iter().map(int).collect()).collect(), demand))
}

/// True iff the prices are positive.
pub fn positive(prices: &[Rat]) -> bool {
    prices.iter().all(|p| p.is_positive())
}
