//! Seeded random markets that meet the standing assumptions, optionally
//! restricted to one pricing regime.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::legality::{enumerate_optimal_allocations, legality};
use crate::market::Market;
use crate::rational::int;

/// Attempts before generation gives up.
pub const MAX_ATTEMPTS: usize = 10_000;

/// The regime a generated market must fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetRegime {
    /// At most four players.
    FourPlayer,
    /// At most two optimal allocations.
    TwoAlloc,
    /// Every demand at most three.
    TriDemand,
    Any,
}

impl fmt::Display for TargetRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetRegime::FourPlayer => "four",
            TargetRegime::TwoAlloc => "two-alloc",
            TargetRegime::TriDemand => "tri",
            TargetRegime::Any => "any",
        })
    }
}

impl FromStr for TargetRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "four" => TargetRegime::FourPlayer,
            "two-alloc" => TargetRegime::TwoAlloc,
            "tri" => TargetRegime::TriDemand,
            "any" => TargetRegime::Any,
            other => return Err(Error::Parse(format!("unknown regime {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenProfile {
    pub players: RangeInclusive<usize>,
    pub demand: RangeInclusive<usize>,
    /// Values are integers in `0..=value_bound`.
    pub value_bound: u32,
    pub regime: TargetRegime,
    pub seed: u64,
}

impl Default for GenProfile {
    fn default() -> Self {
        GenProfile { players: 1..=4, demand: 1..=3, value_bound: 10, regime: TargetRegime::Any, seed: 0 }
    }
}

impl GenProfile {
    pub fn validate(&self) -> Result<()> {
        if self.players.is_empty() || *self.players.start() == 0 {
            return Err(Error::Precondition(format!("player range {:?}", self.players)));
        }
        if self.demand.is_empty() || *self.demand.start() == 0 {
            return Err(Error::Precondition(format!("demand range {:?}", self.demand)));
        }
        if self.value_bound == 0 {
            return Err(Error::Precondition("value bound must be positive".into()));
        }
        Ok(())
    }

    fn admits(&self, market: &Market) -> Result<bool> {
        Ok(match self.regime {
            TargetRegime::FourPlayer => market.n() <= 4,
            TargetRegime::TriDemand => market.demand.iter().all(|&k| k <= 3),
            TargetRegime::TwoAlloc => match enumerate_optimal_allocations(market, 2) {
                Ok(_) => true,
                Err(Error::EnumerationOverflow { .. }) => false,
                Err(e) => return Err(e),
            },
            TargetRegime::Any => true,
        })
    }
}

/// A market drawn from the profile; the same profile gives the same market.
///
/// Draws are resampled until the market passes the assumption checks and
/// belongs to the target regime.
pub fn generate(profile: &GenProfile) -> Result<Market> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    for _ in 0..MAX_ATTEMPTS {
        let market = draw(profile, &mut rng);
        if legality(&market).is_ok() && profile.admits(&market)? {
            return Ok(market);
        }
    }
    Err(Error::Generation { attempts: MAX_ATTEMPTS })
}

/// Some items get one shared value for several players, which produces ties
/// between optimal allocations.
fn draw(profile: &GenProfile, rng: &mut ChaCha8Rng) -> Market {
    let n = rng.random_range(profile.players.clone());
    let demand: Vec<usize> = (0..n).map(|_| rng.random_range(profile.demand.clone())).collect();
    let m: usize = demand.iter().sum();
    let bound = profile.value_bound;
    let mut values = vec![vec![int(0); m]; n];
    for x in 0..m {
        let shared = rng.random_bool(0.4).then(|| rng.random_range(1..=bound));
        for row in values.iter_mut() {
            let v = match shared {
                Some(v) if rng.random_bool(0.6) => v,
                _ if rng.random_bool(0.3) => 0,
                _ => rng.random_range(1..=bound),
            };
            row[x] = int(i64::from(v));
        }
    }
    Market {
        items: (0..m).map(|x| format!("x{x}")).collect(),
        players: (1..=n).map(|i| i.to_string()).collect(),
        demand,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::market_to_json;

    fn profile(regime: TargetRegime, seed: u64) -> GenProfile {
        GenProfile { regime, seed, ..GenProfile::default() }
    }

    #[test]
    fn four_player_profile() {
        let p = GenProfile { players: 4..=4, ..profile(TargetRegime::FourPlayer, 7) };
        let m = generate(&p).unwrap();
        assert_eq!(m.n(), 4);
        assert!(m.demand.iter().all(|&k| k <= 3));
        legality(&m).unwrap();
    }

    #[test]
    fn two_allocation_profile() {
        let m = generate(&profile(TargetRegime::TwoAlloc, 11)).unwrap();
        assert!(enumerate_optimal_allocations(&m, 2).unwrap().len() <= 2);
    }

    #[test]
    fn one_player_profile() {
        let p = GenProfile { players: 1..=1, ..profile(TargetRegime::Any, 3) };
        let m = generate(&p).unwrap();
        assert_eq!(m.n(), 1);
        let priced = crate::pricing::price_market(&m, crate::pricing::Algo::Auto, None).unwrap();
        assert!(priced.residual.is_trivial());
    }

    #[test]
    fn same_seed_same_bytes() {
        for seed in 0..20 {
            let p = profile(TargetRegime::Any, seed);
            assert_eq!(market_to_json(&generate(&p).unwrap()), market_to_json(&generate(&p).unwrap()));
        }
        let a = generate(&profile(TargetRegime::Any, 1)).unwrap();
        let b = generate(&profile(TargetRegime::Any, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn impossible_profile_fails() {
        let p = GenProfile { players: 6..=6, ..profile(TargetRegime::FourPlayer, 0) };
        assert!(matches!(generate(&p), Err(Error::Generation { attempts: MAX_ATTEMPTS })));
        let p = GenProfile { demand: 0..=2, ..GenProfile::default() };
        assert!(matches!(generate(&p), Err(Error::Precondition(_))));
    }

    #[test]
    fn regime_names_round_trip() {
        for r in [TargetRegime::FourPlayer, TargetRegime::TwoAlloc, TargetRegime::TriDemand, TargetRegime::Any] {
            assert_eq!(r.to_string().parse::<TargetRegime>().unwrap(), r);
        }
    }
}
