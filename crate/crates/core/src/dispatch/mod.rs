//! Multi-market dispatch of a battery across reservation markets and spot.
//!
//! Each interval the battery's power is partitioned between FCR-N, FCR-D up,
//! FCR-D down, FFR and spot trading on a discrete MW grid. The upward
//! direction (FCR-N, FCR-D up, FFR, spot sale) and the downward direction
//! (FCR-N, FCR-D down, spot purchase) are each bounded by rated power.
//!
//! Reserves must be backed by stored energy: upward reserves need
//! `MW × backing_hours` of stored energy, downward reserves the same amount of
//! free headroom, checked at both ends of the interval. Reservation payments
//! are `price × MW × hours`; spot energy is settled grid-side.

mod allocate;
mod oracle;
mod prices;
mod simulate;
pub mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

pub use allocate::{allocate_interval, check_allocation, step_soc};
pub use oracle::{exhaustive_oracle, feasible_allocations, OracleSolution, MAX_ORACLE_INTERVALS};
pub use prices::{parse_price_series, read_price_series, write_price_series};
pub use simulate::{simulate_horizon, DispatchRecord, RevenueReport, Simulation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispatchError {
    #[error("state of charge {soc} MWh is outside [0, {capacity}] MWh")]
    InfeasibleSoc { soc: f64, capacity: f64 },
    #[error("discretization step {step} MW does not divide rated power {power} MW")]
    StepDoesNotDivide { step: f64, power: f64 },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),
    #[error("price series is empty")]
    EmptySeries,
    #[error("interval {interval}: {column} price is not finite")]
    NonFinitePrice {
        interval: usize,
        column: &'static str,
    },
    #[error("exhaustive search is limited to {max} intervals, got {len}")]
    HorizonTooLong { len: usize, max: usize },
    #[error("exhaustive search is limited to {max} power levels per product, got {levels}")]
    GridTooFine { levels: u32, max: u32 },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MarketProduct {
    FcrN,
    FcrDUp,
    FcrDDown,
    Ffr,
    SpotBuy,
    SpotSell,
    Idle,
}

impl MarketProduct {
    pub const RESERVES: [MarketProduct; 4] = [
        MarketProduct::FcrN,
        MarketProduct::FcrDUp,
        MarketProduct::FcrDDown,
        MarketProduct::Ffr,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            MarketProduct::FcrN => "FCR-N",
            MarketProduct::FcrDUp => "FCR-D up",
            MarketProduct::FcrDDown => "FCR-D down",
            MarketProduct::Ffr => "FFR",
            MarketProduct::SpotBuy => "spot buy",
            MarketProduct::SpotSell => "spot sell",
            MarketProduct::Idle => "idle",
        }
    }
}

/// Prices for one interval. Reservation prices in EUR per MW per hour, spot in EUR per MWh.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalPrices {
    pub fcr_n: f64,
    pub fcr_d_up: f64,
    pub fcr_d_down: f64,
    pub ffr: f64,
    pub spot: f64,
}

impl IntervalPrices {
    pub fn reservation(&self, product: MarketProduct) -> f64 {
        match product {
            MarketProduct::FcrN => self.fcr_n,
            MarketProduct::FcrDUp => self.fcr_d_up,
            MarketProduct::FcrDDown => self.fcr_d_down,
            MarketProduct::Ffr => self.ffr,
            _ => 0.0,
        }
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            fcr_n: self.fcr_n * k,
            fcr_d_up: self.fcr_d_up * k,
            fcr_d_down: self.fcr_d_down * k,
            ffr: self.ffr * k,
            spot: self.spot * k,
        }
    }

    fn check(&self, interval: usize) -> Result<(), DispatchError> {
        let cols = [
            ("fcr_n", self.fcr_n),
            ("fcr_d_up", self.fcr_d_up),
            ("fcr_d_down", self.fcr_d_down),
            ("ffr", self.ffr),
            ("spot", self.spot),
        ];
        match cols.iter().find(|(_, v)| !v.is_finite()) {
            Some((column, _)) => Err(DispatchError::NonFinitePrice { interval, column }),
            None => Ok(()),
        }
    }
}

/// A non-empty run of equally long intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    intervals: Vec<IntervalPrices>,
    duration_h: f64,
}

impl PriceSeries {
    pub fn new(intervals: Vec<IntervalPrices>, duration_h: f64) -> Result<Self, DispatchError> {
        if intervals.is_empty() {
            return Err(DispatchError::EmptySeries);
        }
        if !(duration_h.is_finite() && duration_h > 0.0) {
            return Err(ModelError::InvalidDuration(duration_h).into());
        }
        for (i, p) in intervals.iter().enumerate() {
            p.check(i)?;
        }
        Ok(Self {
            intervals,
            duration_h,
        })
    }

    pub fn hourly(intervals: Vec<IntervalPrices>) -> Result<Self, DispatchError> {
        Self::new(intervals, crate::model::Interval::DEFAULT_DURATION_H)
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn duration_h(&self) -> f64 {
        self.duration_h
    }

    pub fn intervals(&self) -> &[IntervalPrices] {
        &self.intervals
    }

    pub fn iter(&self) -> impl Iterator<Item = (crate::model::Interval, &IntervalPrices)> {
        let d = self.duration_h;
        self.intervals.iter().enumerate().map(move |(i, p)| {
            (
                crate::model::Interval {
                    index: i as u32,
                    duration_h: d,
                },
                p,
            )
        })
    }

    /// Every price multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self, DispatchError> {
        Self::new(
            self.intervals.iter().map(|p| p.scaled(k)).collect(),
            self.duration_h,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocState {
    pub soc_mwh: f64,
    pub interval: u32,
}

/// Knobs of the greedy stacking strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    /// Power grid for every product, MW. Must divide rated power.
    pub step_mw: f64,
    /// Hours a committed reserve must be sustainable from stored energy (up) or headroom (down).
    pub backing_hours: f64,
    /// Expected share of each interval a committed reserve is fully activated.
    pub activation_fraction: f64,
    /// Initial state of charge as a fraction of capacity.
    pub initial_soc_fraction: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            step_mw: 0.25,
            backing_hours: 0.5,
            activation_fraction: 0.0,
            initial_soc_fraction: 0.5,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), DispatchError> {
        let bad = |m: String| Err(DispatchError::InvalidStrategy(m));
        if !(self.step_mw.is_finite() && self.step_mw > 0.0) {
            return bad(format!("step must be positive, got {} MW", self.step_mw));
        }
        if !(self.backing_hours.is_finite() && self.backing_hours >= 0.0) {
            return bad(format!(
                "backing duration must be non-negative, got {} h",
                self.backing_hours
            ));
        }
        if !(0.0..=1.0).contains(&self.activation_fraction) {
            return bad(format!(
                "activation fraction must lie in [0, 1], got {}",
                self.activation_fraction
            ));
        }
        if !(0.0..=1.0).contains(&self.initial_soc_fraction) {
            return bad(format!(
                "initial SoC fraction must lie in [0, 1], got {}",
                self.initial_soc_fraction
            ));
        }
        Ok(())
    }

    /// Number of grid steps in rated power.
    pub fn levels(&self, rated_power_mw: f64) -> Result<u32, DispatchError> {
        self.validate()?;
        let ratio = rated_power_mw / self.step_mw;
        let levels = ratio.round();
        if (ratio - levels).abs() > 1e-9 * ratio.max(1.0) || levels < 1.0 {
            return Err(DispatchError::StepDoesNotDivide {
                step: self.step_mw,
                power: rated_power_mw,
            });
        }
        Ok(levels as u32)
    }
}

/// Decision for one interval: committed MW per product plus the energy it moves.
///
/// Spot energies are grid-side and may be below `MW × hours` when stored
/// energy or headroom runs out part-way through the interval.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub fcr_n_mw: f64,
    pub fcr_d_up_mw: f64,
    pub fcr_d_down_mw: f64,
    pub ffr_mw: f64,
    pub spot_buy_mw: f64,
    pub spot_sell_mw: f64,
    pub spot_bought_mwh: f64,
    pub spot_sold_mwh: f64,
    /// Energy delivered to the grid by reserve activation.
    pub activation_export_mwh: f64,
    /// Energy absorbed from the grid by reserve activation.
    pub activation_import_mwh: f64,
}

impl Allocation {
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn committed_mw(&self, product: MarketProduct) -> f64 {
        match product {
            MarketProduct::FcrN => self.fcr_n_mw,
            MarketProduct::FcrDUp => self.fcr_d_up_mw,
            MarketProduct::FcrDDown => self.fcr_d_down_mw,
            MarketProduct::Ffr => self.ffr_mw,
            MarketProduct::SpotBuy => self.spot_buy_mw,
            MarketProduct::SpotSell => self.spot_sell_mw,
            MarketProduct::Idle => 0.0,
        }
    }

    pub fn total_committed_mw(&self) -> f64 {
        self.fcr_n_mw
            + self.fcr_d_up_mw
            + self.fcr_d_down_mw
            + self.ffr_mw
            + self.spot_buy_mw
            + self.spot_sell_mw
    }

    pub fn is_idle(&self) -> bool {
        self.total_committed_mw() == 0.0
    }

    pub fn upward_reserve_mw(&self) -> f64 {
        self.fcr_n_mw + self.fcr_d_up_mw + self.ffr_mw
    }

    pub fn downward_reserve_mw(&self) -> f64 {
        self.fcr_n_mw + self.fcr_d_down_mw
    }

    pub fn upward_mw(&self) -> f64 {
        self.upward_reserve_mw() + self.spot_sell_mw
    }

    pub fn downward_mw(&self) -> f64 {
        self.downward_reserve_mw() + self.spot_buy_mw
    }

    /// The product carrying the most MW, `Idle` when nothing is committed.
    pub fn dominant_product(&self) -> MarketProduct {
        [
            MarketProduct::FcrN,
            MarketProduct::FcrDUp,
            MarketProduct::FcrDDown,
            MarketProduct::Ffr,
            MarketProduct::SpotBuy,
            MarketProduct::SpotSell,
        ]
        .into_iter()
        .fold((MarketProduct::Idle, 0.0), |(best, mw), p| {
            let v = self.committed_mw(p);
            if v > mw {
                (p, v)
            } else {
                (best, mw)
            }
        })
        .0
    }
}

/// Cash flows of one interval, EUR.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct IntervalRevenue {
    pub fcr_n: f64,
    pub fcr_d_up: f64,
    pub fcr_d_down: f64,
    pub ffr: f64,
    pub export: f64,
    pub import_cost: f64,
}

impl IntervalRevenue {
    pub fn of(allocation: &Allocation, prices: &IntervalPrices, duration_h: f64) -> Self {
        Self {
            fcr_n: prices.fcr_n * allocation.fcr_n_mw * duration_h,
            fcr_d_up: prices.fcr_d_up * allocation.fcr_d_up_mw * duration_h,
            fcr_d_down: prices.fcr_d_down * allocation.fcr_d_down_mw * duration_h,
            ffr: prices.ffr * allocation.ffr_mw * duration_h,
            export: prices.spot * (allocation.spot_sold_mwh + allocation.activation_export_mwh),
            import_cost: prices.spot
                * (allocation.spot_bought_mwh + allocation.activation_import_mwh),
        }
    }

    pub fn net(&self) -> f64 {
        self.fcr_n + self.fcr_d_up + self.fcr_d_down + self.ffr + self.export - self.import_cost
    }
}
