//! Simulates a year of revenue stacking on the bundled peak-like price profile.

use bess_epc::dispatch::{simulate_horizon, synthetic, StrategyConfig};
use bess_epc::model::{BatterySpec, ExchangeRate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let battery = BatterySpec::new(1.0, 1.0, 0.9)?;
    let prices = synthetic::peak_like_year();
    let sim = simulate_horizon(&battery, &prices, &StrategyConfig::default())?;
    print!(
        "{}",
        sim.report.to_markdown(&battery, ExchangeRate::default())?
    );

    let busiest = sim
        .log
        .iter()
        .max_by(|a, b| a.revenue.net().total_cmp(&b.revenue.net()))
        .expect("non-empty year");
    println!(
        "\nBest hour: interval {} earned {:.2} EUR with {:?}",
        busiest.interval,
        busiest.revenue.net(),
        busiest.allocation.dominant_product()
    );
    Ok(())
}
