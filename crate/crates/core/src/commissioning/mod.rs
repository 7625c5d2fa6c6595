//! Site acceptance evidence: cycle-log efficiency, C-rate conformance and BMS telemetry.

mod cycles;
mod telemetry;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cycles::{
    check_c_rate, parse_cycle_log, read_cycle_log, round_trip_efficiency, write_cycle_log,
    CRateVerdict, CycleLog, Sample, SyntheticCycles, DEFAULT_MIN_CYCLES, POWER_TOLERANCE,
};
pub use telemetry::{
    parse_telemetry, read_telemetry, validate_telemetry, Check, TelemetrySnapshot,
    TelemetryThresholds, TelemetryVerdicts,
};

use crate::model::BatterySpec;

/// Items the report lists for manual sign-off; none are computed here.
pub const MANUAL_CHECKS: [&str; 3] = [
    "protection relay testing",
    "inverter synchronization",
    "SCADA integration",
];

#[derive(Debug, Error, PartialEq)]
pub enum CommissioningError {
    #[error("cycle log is empty")]
    EmptyLog,
    #[error("sample {index}: {message}")]
    BadSample { index: usize, message: String },
    #[error("log has {found} complete cycles, at least {required} required")]
    TooFewCycles { found: usize, required: usize },
    #[error("log contains no charging energy")]
    NoChargeEnergy,
    #[error("telemetry has no `{0}` values")]
    MissingTelemetry(&'static str),
    #[error("telemetry: {0}")]
    BadTelemetry(String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatThresholds {
    /// Inclusive floor on round-trip efficiency.
    pub efficiency_floor: f64,
    pub c_rate_tolerance: f64,
    pub min_cycles: usize,
    pub telemetry: TelemetryThresholds,
}

impl Default for SatThresholds {
    fn default() -> Self {
        Self {
            efficiency_floor: 0.85,
            c_rate_tolerance: 0.10,
            min_cycles: DEFAULT_MIN_CYCLES,
            telemetry: TelemetryThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatReport {
    pub round_trip_efficiency: f64,
    pub efficiency_floor: f64,
    pub efficiency_pass: bool,
    pub c_rate: CRateVerdict,
    pub telemetry: TelemetryVerdicts,
    pub manual_checks: Vec<&'static str>,
    pub pass: bool,
}

pub fn sat_report(
    efficiency: f64,
    c_rate: CRateVerdict,
    telemetry: TelemetryVerdicts,
    efficiency_floor: f64,
) -> SatReport {
    let efficiency_pass = efficiency >= efficiency_floor;
    SatReport {
        round_trip_efficiency: efficiency,
        efficiency_floor,
        efficiency_pass,
        pass: efficiency_pass && c_rate.pass && telemetry.pass(),
        c_rate,
        telemetry,
        manual_checks: MANUAL_CHECKS.to_vec(),
    }
}

/// Runs every check on the given evidence.
pub fn evaluate_sat(
    log: &CycleLog,
    snapshot: &TelemetrySnapshot,
    battery: &BatterySpec,
    thresholds: &SatThresholds,
) -> Result<SatReport, CommissioningError> {
    let eta = round_trip_efficiency(log, thresholds.min_cycles)?;
    let c_rate = check_c_rate(log, battery, thresholds.c_rate_tolerance)?;
    let telemetry = validate_telemetry(snapshot, &thresholds.telemetry);
    Ok(sat_report(
        eta,
        c_rate,
        telemetry,
        thresholds.efficiency_floor,
    ))
}

pub fn parse_sat_thresholds(text: &str) -> Result<SatThresholds, CommissioningError> {
    toml::from_str(text).map_err(|e| CommissioningError::Parse {
        line: 0,
        message: e.to_string(),
    })
}

pub fn read_sat_thresholds(path: &Path) -> Result<SatThresholds, CommissioningError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CommissioningError::Io(format!("{}: {e}", path.display())))?;
    parse_sat_thresholds(&text)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

impl SatReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Site acceptance test\n");
        let _ = writeln!(
            out,
            "Overall: **{}**\n",
            if self.pass { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(out, "| Check | Value | Threshold | Result |");
        let _ = writeln!(out, "|---|---:|---|---|");
        let _ = writeln!(
            out,
            "| round-trip efficiency | {:.4} | >= {} | {} |",
            self.round_trip_efficiency,
            self.efficiency_floor,
            verdict(self.efficiency_pass)
        );
        let c = &self.c_rate;
        let _ = writeln!(
            out,
            "| C/2 cycling power | {:.4} MW | {} MW ± {}% | {} |",
            c.mean_abs_power_mw,
            c.target_mw,
            c.tolerance * 100.0,
            verdict(c.pass)
        );
        for check in self.telemetry.all() {
            let _ = writeln!(
                out,
                "| {} | {:.3} {} | {} {} {} | {} |",
                check.name,
                check.value,
                check.unit,
                check.rule,
                check.limit,
                check.unit,
                verdict(check.pass)
            );
        }
        let _ = writeln!(out, "\n## Manual checklist\n");
        for item in &self.manual_checks {
            let _ = writeln!(out, "- [ ] {item}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
