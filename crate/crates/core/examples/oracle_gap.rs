//! Compares the per-interval greedy strategy with the exhaustive optimum on short horizons.

use bess_epc::dispatch::{
    exhaustive_oracle, simulate_horizon, IntervalPrices, PriceSeries, StrategyConfig,
};
use bess_epc::model::BatterySpec;

fn spot_only(spot: &[f64]) -> PriceSeries {
    PriceSeries::hourly(
        spot.iter()
            .map(|s| IntervalPrices {
                spot: *s,
                ..Default::default()
            })
            .collect(),
    )
    .expect("non-empty")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // an empty battery facing a cheap hour, an expensive hour and a middling one
    let battery = BatterySpec::new(1.0, 1.0, 0.81)?;
    let cfg = StrategyConfig {
        initial_soc_fraction: 0.0,
        ..Default::default()
    };
    let prices = spot_only(&[10.0, 50.0, 30.0]);

    let greedy = simulate_horizon(&battery, &prices, &cfg)?;
    let best = exhaustive_oracle(&battery, &prices, &cfg)?;
    println!("greedy  {}", greedy.report.net);
    println!("optimum {:.2} EUR", best.net_revenue_eur);
    for (i, a) in best.schedule.iter().enumerate() {
        println!(
            "  hour {i}: buy {:.2} MWh, sell {:.2} MWh",
            a.spot_bought_mwh, a.spot_sold_mwh
        );
    }

    // reserves and spot in the same horizon
    let mixed = PriceSeries::hourly(vec![
        IntervalPrices {
            fcr_n: 14.0,
            fcr_d_up: 6.0,
            fcr_d_down: 9.0,
            ffr: 2.0,
            spot: 35.0,
        },
        IntervalPrices {
            fcr_n: 9.0,
            fcr_d_up: 18.0,
            fcr_d_down: 4.0,
            ffr: 25.0,
            spot: 60.0,
        },
        IntervalPrices {
            fcr_n: 11.0,
            fcr_d_up: 7.0,
            fcr_d_down: 12.0,
            ffr: 1.0,
            spot: 20.0,
        },
    ])?;
    let cfg = StrategyConfig::default();
    let greedy = simulate_horizon(&battery, &mixed, &cfg)?;
    let best = exhaustive_oracle(&battery, &mixed, &cfg)?;
    println!(
        "\nreserve mix: greedy {}, optimum {:.2} EUR",
        greedy.report.net, best.net_revenue_eur
    );
    Ok(())
}
