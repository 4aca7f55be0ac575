//! Prices a three-player market and shows the rough and fine layers.
//!
//! `cargo run --example price_layers`

use dynprice::fixtures::fixture;
use dynprice::io::{market_hash, prices_to_json, PriceMetadata};
use dynprice::rational::fmt_rat;
use dynprice::verify::is_dynamic_pricing;
use dynprice::{price_market, Algo};

pub fn run() -> dynprice::Result<()> {
    let market = fixture("M1")?;
    let priced = price_market(&market, Algo::Auto, None)?;

    println!("{:<4} {:>8} {:>8}", "item", "rough", "final");
    for x in 0..market.m() {
        println!("{:<4} {:>8} {:>8}", market.items[x], fmt_rat(&priced.rough[x]), fmt_rat(&priced.prices[x]));
    }

    // Items with a clear owner are settled by the rough layer alone.
    let residual = &priced.residual;
    println!("\nresidual items: {:?}", residual.simplified.items);
    println!("residual players: {:?}", residual.simplified.players);
    println!("headroom: {}", fmt_rat(&residual.headroom));
    println!("fine layer ({}): {:?}", priced.algorithm, priced.fine.iter().map(fmt_rat).collect::<Vec<_>>());

    let report = is_dynamic_pricing(&market, &priced.prices)?;
    println!("\nverified: {}", report.accepted);

    let metadata = PriceMetadata { algorithm: priced.algorithm.to_string(), seed: None, market_hash: market_hash(&market) };
    println!("\n{}", prices_to_json(&market, &priced.prices, metadata));
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
