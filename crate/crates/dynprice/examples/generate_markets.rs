//! Seeded random markets for each regime, priced and checked.

use dynprice::gen::{generate, GenProfile, TargetRegime};
use dynprice::sim::adversarial_sweep;
use dynprice::verify::is_dynamic_pricing;
use dynprice::{price_market, Algo};

pub fn run() -> dynprice::Result<()> {
    let profiles = [
        GenProfile { players: 4..=4, demand: 1..=4, value_bound: 2, regime: TargetRegime::FourPlayer, ..Default::default() },
        GenProfile { players: 2..=5, demand: 1..=4, value_bound: 3, regime: TargetRegime::TwoAlloc, ..Default::default() },
        GenProfile { players: 3..=5, demand: 1..=3, value_bound: 2, regime: TargetRegime::TriDemand, ..Default::default() },
    ];
    for profile in profiles {
        for seed in 0..3 {
            let market = generate(&GenProfile { seed, ..profile.clone() })?;
            let algo = match profile.regime {
                TargetRegime::FourPlayer => Algo::Four,
                TargetRegime::TwoAlloc => Algo::TwoAlloc,
                _ => Algo::Tri,
            };
            let priced = price_market(&market, algo, None)?;
            let ok = is_dynamic_pricing(&market, &priced.prices)?.accepted;
            let sweep = adversarial_sweep(&market)?;
            println!(
                "{:<9} seed {seed}: {} players, {:>2} items, residual {:>2}, verified {ok}, sweep {}",
                profile.regime.to_string(),
                market.n(),
                market.m(),
                priced.residual.simplified.m(),
                sweep.passed()
            );
        }
    }
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
