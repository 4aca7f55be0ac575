//! Fine pricing for at most four players by peeling off removable sets.

use dynprice::audit::{self, Structure};
use dynprice::fixtures::fixture;
use dynprice::four::price_four_players;
use dynprice::rational::fmt_rat;
use dynprice::verify::is_dynamic_pricing_simplified;
use dynprice::SimplifiedMarket;

pub fn run() -> dynprice::Result<()> {
    let s = SimplifiedMarket::from_unit_values(&fixture("C4")?)?;
    for (i, legal) in s.legal.iter().enumerate() {
        let names: Vec<&str> = legal.iter().map(|&x| s.items[x].as_str()).collect();
        println!("player {} wants {} of {:?}", s.players[i], s.demand[i], names);
    }

    let (prices, records) = audit::collect(|| price_four_players(&s));
    let prices = prices?;
    for r in &records {
        if let Structure::Removable(set) = &r.structure {
            let names: Vec<&str> = set.items.iter().map(|&x| r.market.items[x].as_str()).collect();
            println!("removed {:?} set {names:?} from a {}-item market", set.kind, r.market.m());
        }
    }
    for (name, p) in s.items.iter().zip(&prices) {
        println!("{name} = {}", fmt_rat(p));
    }
    println!("verified: {}", is_dynamic_pricing_simplified(&s, &prices)?.accepted);
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
