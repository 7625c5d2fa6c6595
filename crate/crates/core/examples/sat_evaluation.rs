//! Evaluates site acceptance evidence from a synthetic cycle log and recorded telemetry.

use std::path::Path;

use bess_epc::commissioning::{evaluate_sat, read_telemetry, SatThresholds, SyntheticCycles};
use bess_epc::model::BatterySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let battery = BatterySpec::new(1.0, 1.0, 0.9)?;
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let telemetry = read_telemetry(&data.join("sat_telemetry.csv"))?;

    let log = SyntheticCycles {
        efficiency: 0.91,
        ..Default::default()
    }
    .log(&battery)?;
    let report = evaluate_sat(&log, &telemetry, &battery, &SatThresholds::default())?;
    print!("{}", report.to_markdown());

    let slow = read_telemetry(&data.join("sat_telemetry_slow_failover.csv"))?;
    let report = evaluate_sat(&log, &slow, &battery, &SatThresholds::default())?;
    println!("\nwith a 250 ms failover: pass = {}", report.pass);
    Ok(())
}
