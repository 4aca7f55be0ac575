//! Players arrive one by one and prices are recomputed for what is left.

use dynprice::fixtures::fixture;
use dynprice::rational::fmt_rat;
use dynprice::sim::{adversarial_sweep, explore, simulate, Orders, Ties, TiePolicy};

pub fn run() -> dynprice::Result<()> {
    let market = fixture("M1")?;

    let trace = simulate(&market, &[2, 0, 1], TiePolicy::Last)?;
    for step in &trace.steps {
        let offered: Vec<String> =
            step.offered.iter().zip(&step.prices).map(|(&x, p)| format!("{}={}", market.items[x], fmt_rat(p))).collect();
        println!(
            "player {} sees [{}] and buys {{{}}}",
            market.players[step.player],
            offered.join(" "),
            market.item_names(&step.bundle).join(", ")
        );
    }
    println!("welfare {}\n", fmt_rat(&trace.final_welfare));

    let run = explore(&market, Orders::All, Ties::All)?;
    println!(
        "{} branches over all orders and ties: welfare between {} and {}, optimum {}",
        run.branches.len(),
        run.min_welfare().map_or("-".into(), fmt_rat),
        run.max_welfare().map_or("-".into(), fmt_rat),
        fmt_rat(&run.optimum)
    );

    let sweep = adversarial_sweep(&market)?;
    println!("sweep: {} states, {} purchases, passed {}", sweep.states, sweep.branches, sweep.passed());
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
