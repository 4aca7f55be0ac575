//! Fine pricing when the market has at most two optimal allocations.
//!
//! Prices alternate along a uniquely assigned cycle of the legality graph.

use dynprice::audit::{self, Structure};
use dynprice::fixtures::fixture;
use dynprice::rational::fmt_rat;
use dynprice::two_alloc::{price_two_allocations, price_two_allocations_unchecked};
use dynprice::verify::is_dynamic_pricing_simplified;
use dynprice::{enumerate_optimal_allocations, Error, SimplifiedMarket};

fn show(name: &str, s: &SimplifiedMarket, unchecked: bool) -> dynprice::Result<()> {
    let count = match enumerate_optimal_allocations(&s.to_market(), 2) {
        Ok(all) => all.len().to_string(),
        Err(Error::EnumerationOverflow { .. }) => "more than 2".into(),
        Err(e) => return Err(e),
    };
    println!("{name}: {} items, {count} legal allocations", s.m());

    let run = || if unchecked { price_two_allocations_unchecked(s) } else { price_two_allocations(s) };
    let (prices, records) = audit::collect(run);
    let prices = prices?;
    for r in &records {
        if let Structure::Cycle(c) = &r.structure {
            let items: Vec<&str> = c.cycle.items.iter().map(|&x| r.market.items[x].as_str()).collect();
            println!("  {:?} cycle {items:?}", c.kind);
        }
    }
    let shown: Vec<String> = (0..s.m()).map(|x| format!("{}={}", s.items[x], fmt_rat(&prices[x]))).collect();
    println!("  {}", shown.join(" "));
    println!("  verified: {}", is_dynamic_pricing_simplified(s, &prices)?.accepted);
    Ok(())
}

pub fn run() -> dynprice::Result<()> {
    show("type4", &SimplifiedMarket::from_unit_values(&fixture("type4")?)?, false)?;

    // Too many allocations for the regime check, but the cycle construction still applies.
    let odd = SimplifiedMarket::from_unit_values(&fixture("odd_pair")?)?;
    if let Err(e) = price_two_allocations(&odd) {
        println!("odd_pair through the regime check: {e}");
    }
    show("odd_pair", &odd, true)
}

fn main() -> dynprice::Result<()> {
    run()
}
