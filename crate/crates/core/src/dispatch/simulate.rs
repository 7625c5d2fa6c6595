use std::fmt::Write as _;

use serde::Serialize;

use super::allocate::check_soc;
use super::{
    allocate_interval, step_soc, Allocation, DispatchError, IntervalRevenue, PriceSeries, SocState,
    StrategyConfig,
};
use crate::model::{convert, money_sum, BatterySpec, Currency, ExchangeRate, ModelError, Money};

/// Annual (or horizon) result per revenue stream, EUR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueReport {
    pub fcr_n: Money,
    pub fcr_d_up: Money,
    pub fcr_d_down: Money,
    pub ffr: Money,
    pub export: Money,
    pub import_cost: Money,
    pub net: Money,
    pub energy_bought_mwh: f64,
    pub energy_sold_mwh: f64,
    pub intervals: usize,
}

impl RevenueReport {
    fn from_totals(
        t: &IntervalRevenue,
        bought: f64,
        sold: f64,
        intervals: usize,
    ) -> Result<Self, ModelError> {
        let eur = |v: f64| Money::from_major_f64(v, Currency::EUR);
        let mut report = Self {
            fcr_n: eur(t.fcr_n),
            fcr_d_up: eur(t.fcr_d_up),
            fcr_d_down: eur(t.fcr_d_down),
            ffr: eur(t.ffr),
            export: eur(t.export),
            import_cost: eur(t.import_cost),
            net: Money::zero(Currency::EUR),
            energy_bought_mwh: bought,
            energy_sold_mwh: sold,
            intervals,
        };
        report.net = report.recomputed_net()?;
        Ok(report)
    }

    pub fn services(&self) -> [(&'static str, Money); 4] {
        [
            ("FCR-N", self.fcr_n),
            ("FCR-D up", self.fcr_d_up),
            ("FCR-D down", self.fcr_d_down),
            ("FFR", self.ffr),
        ]
    }

    /// Services plus export minus import, from the rounded components.
    pub fn recomputed_net(&self) -> Result<Money, ModelError> {
        let services: Vec<Money> = self.services().iter().map(|(_, m)| *m).collect();
        money_sum(&services, Currency::EUR)?
            .checked_add(self.export)?
            .checked_sub(self.import_cost)
    }

    pub fn to_markdown(
        &self,
        battery: &BatterySpec,
        fx: ExchangeRate,
    ) -> Result<String, ModelError> {
        let mut out = String::new();
        let _ = writeln!(out, "# Operating result\n");
        let _ = writeln!(
            out,
            "Battery: {} MW / {} MWh, round-trip efficiency {}",
            battery.rated_power_mw(),
            battery.energy_capacity_mwh(),
            battery.round_trip_efficiency()
        );
        let _ = writeln!(out, "Intervals simulated: {}\n", self.intervals);
        let _ = writeln!(out, "| Stream | EUR |");
        let _ = writeln!(out, "|---|---:|");
        for (name, m) in self.services() {
            let _ = writeln!(out, "| {name} | {m} |");
        }
        let _ = writeln!(out, "| Export | {} |", self.export);
        let _ = writeln!(out, "| Import / energy cost | -{} |", self.import_cost);
        let _ = writeln!(out, "| **Net operating result** | **{}** |", self.net);
        let per_mw = self.net.as_major_f64() / battery.rated_power_mw() / 1000.0;
        let _ = writeln!(out, "\nNet per MW: {per_mw:.1} kEUR/MW");
        let _ = writeln!(
            out,
            "Net in DKK at {} DKK/EUR: {}",
            fx.dkk_per_eur(),
            convert(self.net, fx)?
        );
        let _ = writeln!(
            out,
            "Spot energy bought {:.3} MWh, sold {:.3} MWh",
            self.energy_bought_mwh, self.energy_sold_mwh
        );
        Ok(out)
    }
}

/// One row of the dispatch log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchRecord {
    pub interval: u32,
    pub soc_start_mwh: f64,
    pub allocation: Allocation,
    pub revenue: IntervalRevenue,
    pub soc_end_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub report: RevenueReport,
    /// State of charge before the first interval and after each one.
    pub trajectory: Vec<f64>,
    pub log: Vec<DispatchRecord>,
}

impl Simulation {
    pub fn dispatch_log_csv(&self) -> String {
        let mut out = String::from(
            "interval,soc_start_mwh,fcr_n_mw,fcr_d_up_mw,fcr_d_down_mw,ffr_mw,spot_buy_mw,spot_sell_mw,spot_bought_mwh,spot_sold_mwh,activation_export_mwh,activation_import_mwh,revenue_eur,soc_end_mwh\n",
        );
        for r in &self.log {
            let a = &r.allocation;
            let _ = writeln!(
                out,
                "{},{:.6},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.4},{:.6}",
                r.interval,
                r.soc_start_mwh,
                a.fcr_n_mw,
                a.fcr_d_up_mw,
                a.fcr_d_down_mw,
                a.ffr_mw,
                a.spot_buy_mw,
                a.spot_sell_mw,
                a.spot_bought_mwh,
                a.spot_sold_mwh,
                a.activation_export_mwh,
                a.activation_import_mwh,
                r.revenue.net(),
                r.soc_end_mwh
            );
        }
        out
    }
}

/// Runs the greedy per-interval strategy over the whole series.
pub fn simulate_horizon(
    battery: &BatterySpec,
    prices: &PriceSeries,
    cfg: &StrategyConfig,
) -> Result<Simulation, DispatchError> {
    cfg.levels(battery.rated_power_mw())?;
    let initial = cfg.initial_soc_fraction * battery.energy_capacity_mwh();
    check_soc(battery, initial)?;
    let d = prices.duration_h();

    let mut state = SocState {
        soc_mwh: initial,
        interval: 0,
    };
    let mut totals = IntervalRevenue::default();
    let mut bought = 0.0;
    let mut sold = 0.0;
    let mut trajectory = Vec::with_capacity(prices.len() + 1);
    let mut log = Vec::with_capacity(prices.len());
    trajectory.push(state.soc_mwh);

    for (interval, interval_prices) in prices.iter() {
        let (allocation, revenue) =
            allocate_interval(battery, cfg, &state, interval_prices, interval.duration_h)?;
        let next = step_soc(battery, &state, &allocation, d)?;
        totals.fcr_n += revenue.fcr_n;
        totals.fcr_d_up += revenue.fcr_d_up;
        totals.fcr_d_down += revenue.fcr_d_down;
        totals.ffr += revenue.ffr;
        totals.export += revenue.export;
        totals.import_cost += revenue.import_cost;
        bought += allocation.spot_bought_mwh;
        sold += allocation.spot_sold_mwh;
        log.push(DispatchRecord {
            interval: interval.index,
            soc_start_mwh: state.soc_mwh,
            allocation,
            revenue,
            soc_end_mwh: next.soc_mwh,
        });
        trajectory.push(next.soc_mwh);
        state = next;
    }

    let report = RevenueReport::from_totals(&totals, bought, sold, prices.len())?;
    Ok(Simulation {
        report,
        trajectory,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::IntervalPrices;

    #[test]
    fn constant_fcr_n_year() {
        let battery = BatterySpec::new(1.0, 1.0, 0.9).unwrap();
        let prices = PriceSeries::hourly(vec![
            IntervalPrices {
                fcr_n: 10.0,
                spot: 0.0,
                ..Default::default()
            };
            8760
        ])
        .unwrap();
        let sim = simulate_horizon(&battery, &prices, &StrategyConfig::default()).unwrap();
        assert_eq!(sim.report.fcr_n, Money::from_major(87_600, Currency::EUR));
        assert_eq!(sim.report.net, Money::from_major(87_600, Currency::EUR));
        assert_eq!(sim.trajectory.len(), 8761);
        assert!(sim.trajectory.iter().all(|s| *s == 0.5));
    }

    #[test]
    fn zero_prices_do_nothing() {
        let battery = BatterySpec::new(1.0, 1.0, 0.9).unwrap();
        let prices = PriceSeries::hourly(vec![IntervalPrices::default(); 24]).unwrap();
        let sim = simulate_horizon(&battery, &prices, &StrategyConfig::default()).unwrap();
        assert_eq!(sim.report.net.minor(), 0);
        assert!(sim.log.iter().all(|r| r.allocation.is_idle()));
        assert!(sim.trajectory.iter().all(|s| *s == 0.5));
    }

    #[test]
    fn myopic_greedy_never_pays_to_charge() {
        // the exhaustive optimum of this instance is 30.5 EUR; a per-interval
        // maximizer sees only the purchase cost in the first hour
        let battery = BatterySpec::new(1.0, 1.0, 0.81).unwrap();
        let cfg = StrategyConfig {
            initial_soc_fraction: 0.0,
            ..Default::default()
        };
        let prices = PriceSeries::hourly(
            [10.0, 50.0, 30.0]
                .iter()
                .map(|s| IntervalPrices {
                    spot: *s,
                    ..Default::default()
                })
                .collect(),
        )
        .unwrap();
        let sim = simulate_horizon(&battery, &prices, &cfg).unwrap();
        assert_eq!(sim.report.net.minor(), 0);
    }

    #[test]
    fn log_csv_has_one_row_per_interval() {
        let battery = BatterySpec::new(1.0, 1.0, 0.9).unwrap();
        let prices = PriceSeries::hourly(vec![
            IntervalPrices {
                fcr_d_down: 3.0,
                ..Default::default()
            };
            5
        ])
        .unwrap();
        let sim = simulate_horizon(&battery, &prices, &StrategyConfig::default()).unwrap();
        let csv = sim.dispatch_log_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("0,0.500000,0,0,1,0,"));
    }
}
