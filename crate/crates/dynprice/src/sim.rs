//! Arrival simulation: players come in some order, each buys a bundle in
//! demand, and the remaining items are repriced before the next arrival.

use std::collections::HashSet;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::legality::{legality, ForcedAssignment, WelfareOracle};
use crate::market::{Bundle, Market, PriceVector};
use crate::pricing::{price_market, Algo};
use crate::rational::Rat;

/// Anything that prices a market; the default is [`auto_prices`].
pub type Pricer<'a> = dyn Fn(&Market) -> Result<PriceVector> + 'a;

/// Default cap on the number of market states a sweep prices.
pub const SWEEP_BUDGET: usize = 100_000;

/// How a player picks among several bundles in demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TiePolicy {
    First,
    Last,
}

impl TiePolicy {
    fn choose(self, bundles: &[Bundle]) -> usize {
        match self {
            TiePolicy::First => 0,
            TiePolicy::Last => bundles.len() - 1,
        }
    }
}

/// One arrival. Item and player indices refer to the original market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub player: usize,
    /// Items on offer and their posted prices.
    pub offered: Vec<usize>,
    pub prices: PriceVector,
    pub bundle: Bundle,
    /// What is left after the purchase.
    pub residual: Market,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    pub steps: Vec<Step>,
    /// Total value of all purchases.
    pub final_welfare: Rat,
}

/// Outcome of an adversarial sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    /// No explored branch lost welfare.
    pub optimal: bool,
    /// Every order and tie branch was explored within the budget.
    pub complete: bool,
    /// Distinct remaining markets that were priced.
    pub states: usize,
    /// Purchases examined, counting each bundle in demand separately.
    pub branches: usize,
    /// Steps up to and including the first purchase no optimal allocation extends.
    pub witness: Option<SimulationTrace>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.optimal && self.complete
    }
}

/// Prices with the regime chosen from the residual market, falling back to
/// exhaustive search when no regime applies and the residual is small.
pub fn auto_prices(market: &Market) -> Result<PriceVector> {
    match price_market(market, Algo::Auto, None) {
        Err(Error::UnsupportedRegime(reason)) => match price_market(market, Algo::Brute, None) {
            Ok(priced) => Ok(priced.prices),
            Err(Error::Size(_)) => Err(Error::UnsupportedRegime(reason)),
            Err(e) => Err(e),
        },
        other => other.map(|priced| priced.prices),
    }
}

/// The market of the given original players and items.
fn restrict(market: &Market, players: &[usize], items: &[usize]) -> Market {
    Market {
        items: items.iter().map(|&x| market.items[x].clone()).collect(),
        players: players.iter().map(|&i| market.players[i].clone()).collect(),
        demand: players.iter().map(|&i| market.demand[i]).collect(),
        values: players.iter().map(|&i| items.iter().map(|&x| market.values[i][x].clone()).collect()).collect(),
    }
}

fn check_residual(residual: &Market) -> Result<()> {
    let diagnose = |e: Error| {
        Error::AssumptionViolation(format!("residual on items {:?} after a purchase: {e}", residual.items))
    };
    residual.validate().map_err(diagnose)?;
    if residual.n() > 0 {
        legality(residual).map_err(diagnose)?;
    }
    Ok(())
}

fn check_order(market: &Market, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; market.n()];
    for &i in order {
        if i >= market.n() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidReference(format!("order {order:?} is not a permutation of the players")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidReference(format!("order {order:?} misses a player")));
    }
    Ok(())
}

/// The world between arrivals: who and what is still in the market.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    players: Vec<usize>,
    items: Vec<usize>,
}

impl State {
    fn full(market: &Market) -> State {
        State { players: (0..market.n()).collect(), items: (0..market.m()).collect() }
    }

    fn market(&self, market: &Market) -> Market {
        restrict(market, &self.players, &self.items)
    }

    /// Prices and the demand bundles of `player`, in local item indices.
    fn offer(&self, market: &Market, pricer: &Pricer, player: usize) -> Result<(PriceVector, Vec<Bundle>)> {
        let here = self.market(market);
        let prices = if here.m() == 0 { Vec::new() } else { pricer(&here)? };
        let local = self.players.iter().position(|&i| i == player).expect("player is present");
        let bundles = here.demand_bundles(local, &prices)?;
        Ok((prices, bundles))
    }

    fn after(&self, player: usize, bundle: &Bundle) -> State {
        State {
            players: self.players.iter().copied().filter(|&i| i != player).collect(),
            items: self.items.iter().copied().filter(|x| !bundle.contains(x)).collect(),
        }
    }

    fn to_original(&self, local: &Bundle) -> Bundle {
        local.iter().map(|&x| self.items[x]).collect()
    }

    fn step(&self, market: &Market, player: usize, prices: PriceVector, bundle: Bundle) -> (Step, State) {
        let next = self.after(player, &bundle);
        let step = Step {
            player,
            offered: self.items.clone(),
            prices,
            bundle,
            residual: next.market(market),
        };
        (step, next)
    }
}

fn trace(market: &Market, steps: Vec<Step>) -> SimulationTrace {
    let final_welfare = steps
        .iter()
        .flat_map(|s| s.bundle.iter().map(move |&x| &market.values[s.player][x]))
        .sum();
    SimulationTrace { steps, final_welfare }
}

/// Runs one arrival order with a fixed tie policy and the default pricer.
pub fn simulate(market: &Market, order: &[usize], ties: TiePolicy) -> Result<SimulationTrace> {
    simulate_with(market, order, &auto_prices, &mut |bundles| ties.choose(bundles))
}

/// Runs one arrival order; `choose` picks the index of the bundle bought.
pub fn simulate_with(
    market: &Market,
    order: &[usize],
    pricer: &Pricer,
    choose: &mut dyn FnMut(&[Bundle]) -> usize,
) -> Result<SimulationTrace> {
    market.validate()?;
    check_order(market, order)?;
    let mut state = State::full(market);
    let mut steps = Vec::with_capacity(order.len());
    for &player in order {
        let (prices, bundles) = state.offer(market, pricer, player)?;
        let pick = choose(&bundles);
        let bundle = bundles
            .get(pick)
            .ok_or_else(|| Error::InvalidReference(format!("bundle choice {pick} of {}", bundles.len())))?;
        let (step, next) = state.step(market, player, prices, state.to_original(bundle));
        check_residual(&step.residual)?;
        steps.push(step);
        state = next;
    }
    Ok(trace(market, steps))
}

/// Every tie branch of one arrival order.
pub fn all_tie_branches(market: &Market, order: &[usize], pricer: &Pricer) -> Result<Vec<SimulationTrace>> {
    market.validate()?;
    check_order(market, order)?;
    let mut out = Vec::new();
    branch(market, order, pricer, State::full(market), &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn branch(
    market: &Market,
    order: &[usize],
    pricer: &Pricer,
    state: State,
    steps: &mut Vec<Step>,
    out: &mut Vec<SimulationTrace>,
) -> Result<()> {
    let Some((&player, rest)) = order.split_first() else {
        out.push(trace(market, steps.clone()));
        return Ok(());
    };
    let (prices, bundles) = state.offer(market, pricer, player)?;
    for bundle in &bundles {
        let (step, next) = state.step(market, player, prices.clone(), state.to_original(bundle));
        check_residual(&step.residual)?;
        steps.push(step);
        branch(market, rest, pricer, next, steps, out)?;
        steps.pop();
    }
    Ok(())
}

/// Whether every arrival order and every tie choice reaches the optimum,
/// repricing with [`auto_prices`] before each arrival.
pub fn adversarial_sweep(market: &Market) -> Result<SweepReport> {
    adversarial_sweep_with(market, &auto_prices, SWEEP_BUDGET)
}

/// The sweep with a custom pricer and a cap on the number of priced states.
///
/// Orders are explored as a tree over who arrives next. A remaining market
/// reached along different paths is explored once, since its prices and
/// continuations do not depend on the path.
pub fn adversarial_sweep_with(market: &Market, pricer: &Pricer, budget: usize) -> Result<SweepReport> {
    market.validate()?;
    let mut sweep = Sweep { market, pricer, budget, done: HashSet::new(), path: Vec::new(), report: None, states: 0, branches: 0, complete: true };
    sweep.explore(State::full(market))?;
    Ok(SweepReport {
        optimal: sweep.report.is_none(),
        complete: sweep.complete,
        states: sweep.states,
        branches: sweep.branches,
        witness: sweep.report,
    })
}

struct Sweep<'a> {
    market: &'a Market,
    pricer: &'a Pricer<'a>,
    budget: usize,
    done: HashSet<State>,
    path: Vec<Step>,
    report: Option<SimulationTrace>,
    states: usize,
    branches: usize,
    complete: bool,
}

impl Sweep<'_> {
    /// Explores `state`; returns false once a witness is found or the budget runs out.
    fn explore(&mut self, state: State) -> Result<bool> {
        if state.players.is_empty() || self.done.contains(&state) {
            return Ok(true);
        }
        if self.states == self.budget {
            self.complete = false;
            return Ok(false);
        }
        self.states += 1;
        let here = state.market(self.market);
        let oracle = WelfareOracle::new(&here)?;
        let prices = if here.m() == 0 { Vec::new() } else { (self.pricer)(&here)? };
        for (local, &player) in state.players.iter().enumerate() {
            for bundle in here.demand_bundles(local, &prices)? {
                self.branches += 1;
                let forced: ForcedAssignment = bundle.iter().map(|&x| (x, local)).collect();
                let (step, next) = state.step(self.market, player, prices.clone(), state.to_original(&bundle));
                let extends = oracle.extends(&forced);
                if extends {
                    check_residual(&step.residual)?;
                }
                self.path.push(step);
                if !extends {
                    self.report = Some(trace(self.market, self.path.clone()));
                    return Ok(false);
                }
                let go_on = self.explore(next)?;
                self.path.pop();
                if !go_on {
                    return Ok(false);
                }
            }
        }
        self.done.insert(state);
        Ok(true)
    }
}

/// Which arrival orders to explore.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orders {
    All,
    /// `count` uniformly random orders drawn from `seed`.
    Seeded { count: usize, seed: u64 },
}

impl Orders {
    pub fn list(self, n: usize) -> Vec<Vec<usize>> {
        match self {
            Orders::All => (0..n).permutations(n).collect(),
            Orders::Seeded { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let mut order: Vec<usize> = (0..n).collect();
                        order.shuffle(&mut rng);
                        order
                    })
                    .collect()
            }
        }
    }
}

/// Whether to follow every tie branch or always take the first bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ties {
    All,
    First,
}

/// Branches of a set of arrival orders, each a trace or the error that stopped it.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub optimum: Rat,
    pub branches: Vec<(Vec<usize>, Result<SimulationTrace>)>,
}

impl Exploration {
    pub fn min_welfare(&self) -> Option<&Rat> {
        self.finished().map(|t| &t.final_welfare).min()
    }

    pub fn max_welfare(&self) -> Option<&Rat> {
        self.finished().map(|t| &t.final_welfare).max()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Error> {
        self.branches.iter().filter_map(|(_, r)| r.as_ref().err())
    }

    /// Every branch finished at the optimum.
    pub fn all_optimal(&self) -> bool {
        self.branches.iter().all(|(_, r)| r.as_ref().is_ok_and(|t| t.final_welfare == self.optimum))
    }

    fn finished(&self) -> impl Iterator<Item = &SimulationTrace> {
        self.branches.iter().filter_map(|(_, r)| r.as_ref().ok())
    }
}

/// Simulates every chosen order with the default pricer.
pub fn explore(market: &Market, orders: Orders, ties: Ties) -> Result<Exploration> {
    market.validate()?;
    let optimum = WelfareOracle::new(market)?.max_welfare();
    let mut branches = Vec::new();
    for order in orders.list(market.n()) {
        match ties {
            Ties::First => {
                let t = simulate(market, &order, TiePolicy::First);
                branches.push((order, t));
            }
            Ties::All => match all_tie_branches(market, &order, &auto_prices) {
                Ok(traces) => branches.extend(traces.into_iter().map(|t| (order.clone(), Ok(t)))),
                Err(e) => branches.push((order, Err(e))),
            },
        }
    }
    Ok(Exploration { optimum, branches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::legality::max_welfare;
    use crate::rational::{int, ratio};

    #[test]
    fn m1_orders_reach_the_optimum() {
        let m1 = fixture("M1").unwrap();
        for order in [[0, 1, 2], [2, 1, 0]] {
            for ties in [TiePolicy::First, TiePolicy::Last] {
                let t = simulate(&m1, &order, ties).unwrap();
                assert_eq!(t.final_welfare, int(5));
                assert_eq!(t.steps.len(), 3);
                assert!(t.steps.last().unwrap().residual.m() == 0);
            }
        }
    }

    #[test]
    fn every_tie_branch_of_every_order() {
        let m1 = fixture("M1").unwrap();
        for order in (0..3).permutations(3) {
            let traces = all_tie_branches(&m1, &order, &auto_prices).unwrap();
            assert!(!traces.is_empty());
            assert!(traces.iter().all(|t| t.final_welfare == int(5)));
        }
    }

    #[test]
    fn sweep_of_m1() {
        let report = adversarial_sweep(&fixture("M1").unwrap()).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.branches >= 6);
    }

    #[test]
    fn single_player_buys_everything() {
        let m = fixture("single").unwrap();
        let t = simulate(&m, &[0], TiePolicy::First).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.final_welfare, max_welfare(&m).unwrap());
        assert!(adversarial_sweep(&m).unwrap().passed());
    }

    #[test]
    fn corrupted_pricing_is_caught() {
        let m1 = fixture("M1").unwrap();
        let bad = |m: &Market| {
            if *m == m1 {
                Ok(vec![ratio(1, 10), ratio(3, 2), ratio(1, 2), ratio(9, 10)])
            } else {
                auto_prices(m)
            }
        };
        let report = adversarial_sweep_with(&m1, &bad, SWEEP_BUDGET).unwrap();
        assert!(!report.passed());
        let witness = report.witness.unwrap();
        let last = witness.steps.last().unwrap();
        assert_eq!(last.player, 0);
        assert_eq!(m1.item_names(&last.bundle), ["α", "γ"]);
    }

    #[test]
    fn budget_is_reported() {
        let report = adversarial_sweep_with(&fixture("M1").unwrap(), &auto_prices, 1).unwrap();
        assert!(report.optimal && !report.complete);
        assert_eq!(report.states, 1);
    }

    #[test]
    fn rejects_bad_orders() {
        let m1 = fixture("M1").unwrap();
        assert!(matches!(simulate(&m1, &[0, 0, 1], TiePolicy::First), Err(Error::InvalidReference(_))));
        assert!(matches!(simulate(&m1, &[0, 1], TiePolicy::First), Err(Error::InvalidReference(_))));
    }

    #[test]
    fn exploring_m1() {
        let m1 = fixture("M1").unwrap();
        let all = explore(&m1, Orders::All, Ties::All).unwrap();
        assert!(all.branches.len() >= 6);
        assert_eq!(all.min_welfare(), Some(&int(5)));
        assert_eq!(all.max_welfare(), Some(&int(5)));
        assert!(all.all_optimal());
        let seeded = explore(&m1, Orders::Seeded { count: 4, seed: 9 }, Ties::First).unwrap();
        assert_eq!(seeded.branches.len(), 4);
        assert!(seeded.all_optimal());
        assert_eq!(Orders::Seeded { count: 4, seed: 9 }.list(3), Orders::Seeded { count: 4, seed: 9 }.list(3));
    }
}
