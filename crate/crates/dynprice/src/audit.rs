//! Opt-in record of the structures the pricing algorithms build, so that
//! each one can be checked against its defining conditions afterwards.

use std::cell::RefCell;
use std::collections::BTreeSet;

use crate::four::{is_removable, RemovableSet};
use crate::graph::build_legality_graph;
use crate::simplified::SimplifiedMarket;
use crate::tri::SubmarketPair;
use crate::two_alloc::{CycleKind, RemovableCycle};

/// Largest market on which pair maximality is checked against every player subset.
pub const EXHAUSTIVE_PLAYERS: usize = 6;
pub const EXHAUSTIVE_ITEMS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Removable(RemovableSet),
    Cycle(RemovableCycle),
    Pair(SubmarketPair),
}

/// A structure and the market it was built for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub market: SimplifiedMarket,
    pub structure: Structure,
}

thread_local! {
    static SINK: RefCell<Option<Vec<Record>>> = const { RefCell::new(None) };
}

/// Runs `f` and returns every structure built during it on this thread.
pub fn collect<T>(f: impl FnOnce() -> T) -> (T, Vec<Record>) {
    let outer = SINK.with(|s| s.borrow_mut().replace(Vec::new()));
    let out = f();
    let records = SINK.with(|s| std::mem::replace(&mut *s.borrow_mut(), outer)).unwrap_or_default();
    (out, records)
}

pub(crate) fn emit(market: &SimplifiedMarket, structure: impl FnOnce() -> Structure) {
    SINK.with(|s| {
        if let Some(records) = s.borrow_mut().as_mut() {
            records.push(Record { market: market.clone(), structure: structure() });
        }
    });
}

/// Checks a record against the conditions its structure is defined by.
pub fn check(record: &Record) -> Result<(), String> {
    let s = &record.market;
    match &record.structure {
        Structure::Removable(set) => {
            if is_removable(s, set) {
                Ok(())
            } else {
                Err(format!("{set:?} is not removable"))
            }
        }
        Structure::Cycle(rc) => {
            if !s.is_legal_allocation(&rc.allocation) {
                return Err("cycle allocation is not legal".into());
            }
            let g = build_legality_graph(s, &rc.allocation).map_err(|e| e.to_string())?;
            let c = g.cycle(rc.cycle.items.clone()).map_err(|e| e.to_string())?;
            let parity_ok = match rc.kind {
                CycleKind::TypeIII => c.len() % 2 == 0,
                CycleKind::TypeIV => c.len() % 2 == 1,
            };
            if c.uniquely_assigned && parity_ok {
                Ok(())
            } else {
                Err(format!("{rc:?} is not a uniquely assigned cycle of the right parity"))
            }
        }
        Structure::Pair(pair) => {
            if SubmarketPair::from_players(s, pair.b_players.clone(), pair.slack).as_ref() != Some(pair) {
                return Err(format!("{pair:?} is not a submarket pair"));
            }
            if s.n() <= EXHAUSTIVE_PLAYERS && s.m() <= EXHAUSTIVE_ITEMS {
                let rest: Vec<usize> = pair.c_players.iter().copied().collect();
                for mask in 1u32..(1 << rest.len()) {
                    let mut b: BTreeSet<usize> = pair.b_players.clone();
                    b.extend(rest.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &i)| i));
                    if SubmarketPair::from_players(s, b.clone(), pair.slack).is_some() {
                        return Err(format!("{pair:?} grows to B players {b:?}"));
                    }
                }
            }
            Ok(())
        }
    }
}

/// Whether the record's maximality was checked exhaustively.
pub fn exhaustive(record: &Record) -> bool {
    matches!(record.structure, Structure::Pair(_))
        && record.market.n() <= EXHAUSTIVE_PLAYERS
        && record.market.m() <= EXHAUSTIVE_ITEMS
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;

    fn pair_records() -> Vec<Record> {
        let s = SimplifiedMarket::new(
            ["x0", "x1", "x2", "x5", "x8"].map(String::from).to_vec(),
            ["1", "2", "3", "4"].map(String::from).to_vec(),
            vec![1, 2, 1, 1],
            vec![BTreeSet::from([1, 2, 3]), BTreeSet::from([0, 1, 4]), BTreeSet::from([0, 2, 3, 4]), BTreeSet::from([0, 2])],
        )
        .unwrap();
        let (p, records) = collect(|| crate::tri::price_tridemand(&s));
        p.unwrap();
        records
    }

    #[test]
    fn records_only_inside_collect() {
        let s = SimplifiedMarket::from_unit_values(&fixture("M2").unwrap()).unwrap();
        crate::tri::price_fixed_at(&s, 0).unwrap();
        let (_, none) = collect(|| ());
        assert!(none.is_empty());
        let records = pair_records();
        assert!(records.iter().any(|r| matches!(r.structure, Structure::Pair(_))));
        assert!(records.iter().all(|r| check(r).is_ok()));
    }

    #[test]
    fn flags_a_broken_pair() {
        let records = pair_records();
        let mut bad = records.into_iter().find(|r| matches!(r.structure, Structure::Pair(_))).unwrap();
        if let Structure::Pair(p) = &mut bad.structure {
            p.slack = 2;
        }
        assert!(check(&bad).is_err());
    }

    #[test]
    fn four_and_two_alloc_emit() {
        let s = SimplifiedMarket::from_unit_values(&fixture("C4").unwrap()).unwrap();
        let (_, records) = collect(|| crate::four::price_four_players(&s).unwrap());
        assert!(records.iter().any(|r| matches!(r.structure, Structure::Removable(_))));
        let (_, records) = collect(|| crate::two_alloc::price_two_allocations(&s).unwrap());
        assert!(records.iter().any(|r| matches!(r.structure, Structure::Cycle(_))));
        assert!(records.iter().all(|r| check(r).is_ok()));
    }
}
