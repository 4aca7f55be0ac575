//! JSON market and price files.
//!
//! Rationals travel as `"p/q"` strings; bare integers are accepted on input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::market::{Market, PriceVector};
use crate::rational::{fmt_rat, parse_rat, Rat};
use crate::sim::SimulationTrace;

pub const MARKET_VERSION: &str = "dynprice-market/1";
pub const PRICES_VERSION: &str = "dynprice-prices/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatText {
    Int(i64),
    Text(String),
}

impl RatText {
    fn to_rat(&self) -> Result<Rat> {
        match self {
            RatText::Int(n) => Ok(crate::rational::int(*n)),
            RatText::Text(s) => parse_rat(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRecord {
    pub id: String,
    pub demand: usize,
    #[serde(default)]
    pub values: BTreeMap<String, RatText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketFile {
    pub version: String,
    pub items: Vec<String>,
    pub players: Vec<PlayerRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceMetadata {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub market_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceFile {
    pub version: String,
    pub prices: BTreeMap<String, String>,
    #[serde(default)]
    pub metadata: PriceMetadata,
}

impl MarketFile {
    pub fn from_market(market: &Market) -> Self {
        let players = market
            .players
            .iter()
            .enumerate()
            .map(|(i, id)| PlayerRecord {
                id: id.clone(),
                demand: market.demand[i],
                values: market
                    .items
                    .iter()
                    .zip(&market.values[i])
                    .filter(|(_, v)| !num::Zero::is_zero(*v))
                    .map(|(x, v)| (x.clone(), RatText::Text(fmt_rat(v))))
                    .collect(),
            })
            .collect();
        MarketFile { version: MARKET_VERSION.into(), items: market.items.clone(), players }
    }

    pub fn to_market(&self) -> Result<Market> {
        if self.version != MARKET_VERSION {
            return Err(Error::Parse(format!("unsupported market version {:?}", self.version)));
        }
        let mut values = Vec::with_capacity(self.players.len());
        for p in &self.players {
            let mut row = vec![crate::rational::zero(); self.items.len()];
            for (name, v) in &p.values {
                let x = self
                    .items
                    .iter()
                    .position(|it| it == name)
                    .ok_or_else(|| Error::InvalidReference(format!("player {} values unknown item {name:?}", p.id)))?;
                row[x] = v.to_rat()?;
            }
            values.push(row);
        }
        Market::new(
            self.items.clone(),
            self.players.iter().map(|p| p.id.clone()).collect(),
            self.players.iter().map(|p| p.demand).collect(),
            values,
        )
    }
}

pub fn parse_market(text: &str) -> Result<Market> {
    let file: MarketFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_market()
}

pub fn market_to_json(market: &Market) -> String {
    let mut s = serde_json::to_string_pretty(&MarketFile::from_market(market)).expect("serializable");
    s.push('\n');
    s
}

/// Hex SHA-256 of the canonical market serialization.
pub fn market_hash(market: &Market) -> String {
    let canonical = serde_json::to_string(&MarketFile::from_market(market)).expect("serializable");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

pub fn prices_to_json(market: &Market, prices: &[Rat], metadata: PriceMetadata) -> String {
    let file = PriceFile {
        version: PRICES_VERSION.into(),
        prices: market.items.iter().cloned().zip(prices.iter().map(fmt_rat)).collect(),
        metadata,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}

/// Reads a price file against a market; every item must be priced.
pub fn parse_prices(market: &Market, text: &str) -> Result<(PriceVector, PriceMetadata)> {
    let file: PriceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.version != PRICES_VERSION {
        return Err(Error::Parse(format!("unsupported price version {:?}", file.version)));
    }
    if let Some(extra) = file.prices.keys().find(|k| !market.items.contains(k)) {
        return Err(Error::Parse(format!("price for unknown item {extra:?}")));
    }
    let prices = market
        .items
        .iter()
        .map(|x| {
            let s = file.prices.get(x).ok_or_else(|| Error::Parse(format!("missing price for item {x:?}")))?;
            parse_rat(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((prices, file.metadata))
}

pub const TRACE_VERSION: &str = "dynprice-trace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub player: String,
    pub prices: BTreeMap<String, String>,
    pub bundle: Vec<String>,
    /// Items left after the purchase.
    pub remaining: Vec<String>,
}

/// One explored branch: a finished trace or the reason it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub order: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_welfare: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub version: String,
    pub market_hash: String,
    pub optimum: String,
    pub branches: Vec<BranchRecord>,
}

impl BranchRecord {
    pub fn from_trace(market: &Market, order: &[usize], trace: &SimulationTrace) -> Self {
        let steps = trace
            .steps
            .iter()
            .map(|step| StepRecord {
                player: market.players[step.player].clone(),
                prices: step.offered.iter().map(|&x| market.items[x].clone()).zip(step.prices.iter().map(fmt_rat)).collect(),
                bundle: market.item_names(&step.bundle).into_iter().map(String::from).collect(),
                remaining: step.residual.items.clone(),
            })
            .collect();
        BranchRecord {
            order: names(market, order),
            final_welfare: Some(fmt_rat(&trace.final_welfare)),
            steps,
            error: None,
        }
    }

    pub fn failed(market: &Market, order: &[usize], error: &Error) -> Self {
        BranchRecord { order: names(market, order), final_welfare: None, steps: Vec::new(), error: Some(error.to_string()) }
    }
}

fn names(market: &Market, players: &[usize]) -> Vec<String> {
    players.iter().map(|&i| market.players[i].clone()).collect()
}

pub fn trace_to_json(file: &TraceFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let file: TraceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.version != TRACE_VERSION {
        return Err(Error::Parse(format!("unsupported trace version {:?}", file.version)));
    }
    Ok(file)
}
