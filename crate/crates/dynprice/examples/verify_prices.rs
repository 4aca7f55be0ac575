//! Checks hand-written price vectors and prints the purchase that breaks one.

use dynprice::fixtures::fixture;
use dynprice::rational::{fmt_rat, ratio};
use dynprice::verify::is_dynamic_pricing;

pub fn run() -> dynprice::Result<()> {
    let market = fixture("M1")?;
    let candidates = [
        ("reference prices", vec![ratio(3, 2), ratio(1, 10), ratio(1, 2), ratio(9, 10)]),
        ("flat prices", vec![ratio(1, 2); 4]),
        ("cheap alpha", vec![ratio(1, 10), ratio(1, 5), ratio(1, 2), ratio(9, 10)]),
    ];
    for (label, prices) in candidates {
        let shown: Vec<String> = prices.iter().map(fmt_rat).collect();
        match is_dynamic_pricing(&market, &prices)?.counterexample {
            None => println!("{label} {shown:?}: accepted"),
            Some((player, bundle)) => println!(
                "{label} {shown:?}: player {} may buy {{{}}}, which no optimal allocation contains",
                market.players[player],
                market.item_names(&bundle).join(", ")
            ),
        }
    }

    let prices = vec![ratio(3, 2), ratio(1, 10), ratio(1, 2), ratio(9, 10)];
    for bundle in market.demand_bundles(0, &prices)? {
        let u = market.utility(0, &bundle, &prices)?;
        println!("player 1 demands {{{}}} at utility {}", market.item_names(&bundle).join(", "), fmt_rat(&u));
    }
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
