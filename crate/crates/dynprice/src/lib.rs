//! Dynamic posted prices for multi-demand combinatorial markets.
//!
//! Players arrive one at a time and each buys a utility-maximizing bundle at
//! the posted prices. A *dynamic pricing* guarantees every such purchase is
//! part of some welfare-maximizing allocation, so any arrival order ends at
//! the optimum. Prices are built in two layers: rough prices from shortest
//! paths in an auxiliary graph settle every item with a clear owner, and a
//! fine pricing of the leftover 0/1 market breaks the remaining ties.
//!
//! All arithmetic is exact.

extern crate self as dynprice;

pub mod analysis;
pub mod audit;
pub mod error;
pub mod fixtures;
pub mod four;
pub mod gen;
pub mod graph;
pub mod io;
pub mod legality;
pub mod market;
pub mod matching;
pub mod pricing;
pub mod rational;
pub mod rough;
pub mod sim;
pub mod simplified;
pub mod tri;
pub mod two_alloc;
pub mod verify;

pub use error::{Error, Result};
pub use legality::{
    enumerate_optimal_allocations, is_extendable, legality, max_welfare, ForcedAssignment, LegalityInfo,
    WelfareOracle,
};
pub use market::{Allocation, Bundle, Market, PriceVector};
pub use pricing::{price_market, price_market_with, Algo, PricedMarket};
pub use rational::Rat;
pub use simplified::{HallCertificate, SimplifiedMarket};

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;
