//! Exhaustive search over allocation sequences, used to bound the greedy strategy.
//!
//! Every level tuple of the full six-product grid is tried in every interval
//! and filtered through [`check_allocation`], independently of the bounded
//! generator the greedy strategy uses. Sequences reaching a bit-identical
//! state of charge are merged, since the remaining horizon only depends on
//! that state.

use std::collections::BTreeMap;

use serde::Serialize;

use super::allocate::{check_soc, compare_revenue, resolve, Levels};
use super::{Allocation, DispatchError, IntervalRevenue, PriceSeries, StrategyConfig};
use crate::model::BatterySpec;

pub const MAX_ORACLE_INTERVALS: usize = 6;
const MAX_ORACLE_LEVELS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub net_revenue_eur: f64,
    pub schedule: Vec<Allocation>,
}

#[derive(Clone)]
struct Branch {
    value: f64,
    schedule: Vec<Allocation>,
}

fn all_levels(n: u32) -> impl Iterator<Item = Levels> {
    let base = n + 1;
    (0..base.pow(6)).map(move |mut code| {
        let mut levels = [0u32; 6];
        for slot in levels.iter_mut() {
            *slot = code % base;
            code /= base;
        }
        levels
    })
}

fn oracle_levels(battery: &BatterySpec, cfg: &StrategyConfig) -> Result<u32, DispatchError> {
    let n = cfg.levels(battery.rated_power_mw())?;
    if n > MAX_ORACLE_LEVELS {
        return Err(DispatchError::GridTooFine {
            levels: n,
            max: MAX_ORACLE_LEVELS,
        });
    }
    Ok(n)
}

/// Every allocation on the full grid that is feasible from `soc_mwh`.
/// Feasibility does not depend on prices, so one table serves any number of
/// price vectors at the same state.
pub fn feasible_allocations(
    battery: &BatterySpec,
    cfg: &StrategyConfig,
    soc_mwh: f64,
    duration_h: f64,
) -> Result<Vec<Allocation>, DispatchError> {
    let n = oracle_levels(battery, cfg)?;
    check_soc(battery, soc_mwh)?;
    Ok(all_levels(n)
        .filter_map(|levels| resolve(battery, cfg, soc_mwh, levels, duration_h))
        .collect())
}

/// Maximum total net revenue over all discrete allocation sequences, with one argmax schedule.
pub fn exhaustive_oracle(
    battery: &BatterySpec,
    prices: &PriceSeries,
    cfg: &StrategyConfig,
) -> Result<OracleSolution, DispatchError> {
    if prices.len() > MAX_ORACLE_INTERVALS {
        return Err(DispatchError::HorizonTooLong {
            len: prices.len(),
            max: MAX_ORACLE_INTERVALS,
        });
    }
    oracle_levels(battery, cfg)?;
    let initial = cfg.initial_soc_fraction * battery.energy_capacity_mwh();
    check_soc(battery, initial)?;
    let d = prices.duration_h();

    let mut frontier: BTreeMap<u64, (f64, Branch)> = BTreeMap::new();
    frontier.insert(
        initial.to_bits(),
        (
            initial,
            Branch {
                value: 0.0,
                schedule: Vec::new(),
            },
        ),
    );
    for interval_prices in prices.intervals() {
        let mut next: BTreeMap<u64, (f64, Branch)> = BTreeMap::new();
        for (soc, branch) in frontier.values() {
            for a in feasible_allocations(battery, cfg, *soc, d)? {
                let value = branch.value + IntervalRevenue::of(&a, interval_prices, d).net();
                let soc_next = super::allocate::soc_after(battery, *soc, &a)
                    .clamp(0.0, battery.energy_capacity_mwh());
                let improves = match next.get(&soc_next.to_bits()) {
                    None => true,
                    Some((_, existing)) => compare_revenue(value, existing.value).is_gt(),
                };
                if improves {
                    let mut schedule = branch.schedule.clone();
                    schedule.push(a);
                    next.insert(soc_next.to_bits(), (soc_next, Branch { value, schedule }));
                }
            }
        }
        frontier = next;
    }
    let best = frontier
        .into_values()
        .map(|(_, b)| b)
        .fold(None::<Branch>, |best, b| match best {
            Some(cur) if !compare_revenue(b.value, cur.value).is_gt() => Some(cur),
            _ => Some(b),
        })
        .expect("idle keeps at least one branch alive");
    Ok(OracleSolution {
        net_revenue_eur: best.value,
        schedule: best.schedule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{allocate_interval, IntervalPrices, SocState};

    fn spot(values: &[f64]) -> PriceSeries {
        PriceSeries::hourly(
            values
                .iter()
                .map(|s| IntervalPrices {
                    spot: *s,
                    ..Default::default()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn arbitrage_instance() {
        let battery = BatterySpec::new(1.0, 1.0, 0.81).unwrap();
        let cfg = StrategyConfig {
            initial_soc_fraction: 0.0,
            ..Default::default()
        };
        let sol = exhaustive_oracle(&battery, &spot(&[10.0, 50.0, 30.0]), &cfg).unwrap();
        assert!((sol.net_revenue_eur - 30.5).abs() < 1e-9);
        assert_eq!(sol.schedule.len(), 3);
        assert!((sol.schedule[0].spot_bought_mwh - 1.0).abs() < 1e-12);
        assert!((sol.schedule[1].spot_sold_mwh - 0.81).abs() < 1e-12);
    }

    #[test]
    fn zero_prices_stay_idle() {
        let battery = BatterySpec::new(1.0, 1.0, 0.9).unwrap();
        let sol =
            exhaustive_oracle(&battery, &spot(&[0.0, 0.0]), &StrategyConfig::default()).unwrap();
        assert_eq!(sol.net_revenue_eur, 0.0);
        assert_eq!(sol.schedule.len(), 2);
    }

    #[test]
    fn single_interval_matches_greedy() {
        let battery = BatterySpec::new(1.0, 1.0, 0.9).unwrap();
        let cfg = StrategyConfig::default();
        let prices = IntervalPrices {
            fcr_n: 12.0,
            fcr_d_up: 5.0,
            fcr_d_down: 9.0,
            ffr: 3.0,
            spot: 40.0,
        };
        let series = PriceSeries::hourly(vec![prices]).unwrap();
        let sol = exhaustive_oracle(&battery, &series, &cfg).unwrap();
        let (_, rev) = allocate_interval(
            &battery,
            &cfg,
            &SocState {
                soc_mwh: 0.5,
                interval: 0,
            },
            &prices,
            1.0,
        )
        .unwrap();
        assert!((sol.net_revenue_eur - rev.net()).abs() < 1e-9);
    }

    #[test]
    fn guards_horizon_and_grid() {
        let battery = BatterySpec::new(1.0, 1.0, 0.9).unwrap();
        assert!(matches!(
            exhaustive_oracle(&battery, &spot(&[0.0; 7]), &StrategyConfig::default()),
            Err(DispatchError::HorizonTooLong { len: 7, .. })
        ));
        let fine = StrategyConfig {
            step_mw: 0.05,
            ..Default::default()
        };
        assert!(matches!(
            exhaustive_oracle(&battery, &spot(&[0.0]), &fine),
            Err(DispatchError::GridTooFine { .. })
        ));
    }
}
