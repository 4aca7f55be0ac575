//! Optimum, legality and exclusive sets, and which pricing regimes apply.

use dynprice::analysis::analyze;
use dynprice::fixtures::{fixture, FIXTURE_NAMES};

pub fn run() -> dynprice::Result<()> {
    for name in FIXTURE_NAMES {
        println!("== {name}");
        print!("{}", analyze(&fixture(name)?)?);
    }
    Ok(())
}

fn main() -> dynprice::Result<()> {
    run()
}
