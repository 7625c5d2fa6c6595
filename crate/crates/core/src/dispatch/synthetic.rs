//! Deterministic synthetic price years.
//!
//! These are invented profiles for demos and regression tests, not market data.

use std::f64::consts::TAU;

use super::{IntervalPrices, PriceSeries};

pub const HOURS_PER_YEAR: usize = 8760;

/// Every interval pays the same FCR-N price; everything else is zero except a flat spot price.
pub fn constant_fcr_n(price: f64, spot: f64, hours: usize) -> PriceSeries {
    PriceSeries::hourly(vec![
        IntervalPrices {
            fcr_n: price,
            spot,
            ..Default::default()
        };
        hours
    ])
    .expect("finite, non-empty")
}

/// A year of tight reserve markets: high FCR-D prices in both directions with
/// daily and seasonal swings, morning FFR spikes and a moderate spot curve.
pub fn peak_like_year() -> PriceSeries {
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    let intervals = (0..HOURS_PER_YEAR)
        .map(|h| {
            let day = (h / 24) as f64;
            let hour = (h % 24) as f64;
            let season = (TAU * day / 365.0).cos();
            let daily = |shift: f64| (TAU * (hour - shift) / 24.0).sin();
            let ffr = if (6.0..9.0).contains(&hour) && (h / 24) % 3 == 0 {
                120.0
            } else {
                4.0
            };
            IntervalPrices {
                fcr_n: round2(35.0 + 10.0 * season + 8.0 * daily(0.0)),
                fcr_d_up: round2(55.0 + 12.0 * season + 10.0 * daily(6.0)),
                fcr_d_down: round2(45.0 + 8.0 * season + 6.0 * daily(-6.0)),
                ffr,
                spot: round2(35.0 + 20.0 * daily(13.0) + 5.0 * season),
            }
        })
        .collect();
    PriceSeries::hourly(intervals).expect("finite, non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_like_year_shape() {
        let year = peak_like_year();
        assert_eq!(year.len(), HOURS_PER_YEAR);
        assert!(year
            .intervals()
            .iter()
            .all(|p| p.fcr_d_up > 30.0 && p.spot >= 0.0));
        assert_eq!(constant_fcr_n(10.0, 40.0, 3).len(), 3);
    }
}
