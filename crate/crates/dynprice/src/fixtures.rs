//! Named markets used throughout the examples and tests.
//!
//! `M1` is a four-item, three-player market with two optimal allocations.
//! The others are small structural cases, stored as 0/1 markets where the
//! simplified view applies.

use crate::error::{Error, Result};
use crate::io::parse_market;
use crate::market::Market;

pub const FIXTURE_NAMES: [&str; 9] = ["M1", "M2", "M3", "C4", "odd_pair", "type4", "central_item", "disjoint", "single"];

fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "M1" => include_str!("../fixtures/M1.json"),
        "M2" => include_str!("../fixtures/M2.json"),
        "M3" => include_str!("../fixtures/M3.json"),
        "C4" => include_str!("../fixtures/C4.json"),
        "odd_pair" => include_str!("../fixtures/odd_pair.json"),
        "type4" => include_str!("../fixtures/type4.json"),
        "central_item" => include_str!("../fixtures/central_item.json"),
        "disjoint" => include_str!("../fixtures/disjoint.json"),
        "single" => include_str!("../fixtures/single.json"),
        _ => return None,
    })
}

/// Loads a named fixture as a valued market.
pub fn fixture(name: &str) -> Result<Market> {
    let text = source(name).ok_or_else(|| Error::InvalidReference(format!("unknown fixture {name:?}")))?;
    parse_market(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_load() {
        for name in FIXTURE_NAMES {
            fixture(name).unwrap();
        }
        assert!(fixture("nope").is_err());
    }
}
