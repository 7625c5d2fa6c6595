//! Sizes the grid connection for a 1 MW battery and compares every tariff category.

use std::path::Path;

use bess_epc::connection::{
    compare_categories, fee_table_markdown, read_tariff, ConnectionCategory, SizingResult,
    VoltageMap, DEFAULT_OVERSIZE_FACTOR,
};
use bess_epc::model::ExchangeRate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tariff =
        read_tariff(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/rah_net_2024.toml"))?;

    let sizing = SizingResult::size(1.0, DEFAULT_OVERSIZE_FACTOR, 0.4)?;
    println!(
        "1 MW with {DEFAULT_OVERSIZE_FACTOR}x oversizing needs {} MVA, {} A at 0.4 kV\n",
        sizing.apparent_power_mva(),
        sizing.lv_current_rounded()
    );

    let rows = compare_categories(
        1.0,
        DEFAULT_OVERSIZE_FACTOR,
        &tariff,
        &VoltageMap::default(),
    )?;
    print!(
        "{}",
        fee_table_markdown(1.0, &rows, &tariff, ExchangeRate::default())?
    );

    // a 690 V low-voltage side lowers the current and the per-ampere fees
    let lv690 = VoltageMap::default()
        .with(ConnectionCategory::BLow, 0.69)
        .with(ConnectionCategory::C, 0.69);
    let cheapest_low = compare_categories(1.0, DEFAULT_OVERSIZE_FACTOR, &tariff, &lv690)?
        .into_iter()
        .find(|r| r.category == ConnectionCategory::BLow)
        .expect("all categories priced");
    println!("\nB-low at 0.69 kV: {}", cheapest_low.fee);
    Ok(())
}
