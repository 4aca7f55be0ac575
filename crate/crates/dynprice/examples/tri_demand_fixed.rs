//! Tri-demand pricing with a chosen item forced to be the cheapest.

use dynprice::fixtures::fixture;
use dynprice::rational::fmt_rat;
use dynprice::tri::price_fixed_at;
use dynprice::verify::is_dynamic_pricing_simplified;
use dynprice::SimplifiedMarket;

pub fn run() -> dynprice::Result<()> {
    for name in ["M2", "M3"] {
        let s = SimplifiedMarket::from_unit_values(&fixture(name)?)?;
        println!("{name}: items {:?}, demands {:?}", s.items, s.demand);
        for x in 0..s.m() {
            let p = price_fixed_at(&s, x)?;
            let mut order: Vec<usize> = (0..s.m()).collect();
            order.sort_by(|&a, &b| p[a].cmp(&p[b]));
            let ladder: Vec<String> = order.iter().map(|&y| format!("{}={}", s.items[y], fmt_rat(&p[y]))).collect();
            let ok = is_dynamic_pricing_simplified(&s, &p)?.accepted;
            println!("  fixed at {}: {}  [{}]", s.items[x], ladder.join(" < "), if ok { "ok" } else { "REJECTED" });
        }
    }
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
