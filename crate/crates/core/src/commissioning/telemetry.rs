//! BMS telemetry checks.
//!
//! Text form is `kind,value` rows where kind is `cell_voltage` (V),
//! `temperature_error` (°C, sensor minus reference) or `failover_ms`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CommissioningError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetrySnapshot {
    cell_voltages_v: Vec<f64>,
    temperature_errors_c: Vec<f64>,
    failover_ms: Vec<f64>,
}

impl TelemetrySnapshot {
    pub fn new(
        cell_voltages_v: Vec<f64>,
        temperature_errors_c: Vec<f64>,
        failover_ms: Vec<f64>,
    ) -> Result<Self, CommissioningError> {
        for (name, values) in [
            ("cell_voltage", &cell_voltages_v),
            ("temperature_error", &temperature_errors_c),
            ("failover_ms", &failover_ms),
        ] {
            if values.is_empty() {
                return Err(CommissioningError::MissingTelemetry(name));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(CommissioningError::BadTelemetry(format!(
                    "{name}: non-finite value"
                )));
            }
        }
        if failover_ms.iter().any(|v| *v < 0.0) {
            return Err(CommissioningError::BadTelemetry(
                "failover_ms: negative time".into(),
            ));
        }
        Ok(Self {
            cell_voltages_v,
            temperature_errors_c,
            failover_ms,
        })
    }

    pub fn voltage_spread_mv(&self) -> f64 {
        let (lo, hi) = self
            .cell_voltages_v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
        (hi - lo) * 1000.0
    }

    pub fn max_temperature_error_c(&self) -> f64 {
        self.temperature_errors_c
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn worst_failover_ms(&self) -> f64 {
        self.failover_ms.iter().fold(0.0, |m, v| m.max(*v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TelemetryThresholds {
    /// Inclusive.
    pub max_temperature_error_c: f64,
    /// Strict: the failover must finish in under this time.
    pub max_failover_ms: f64,
    /// Inclusive.
    pub max_voltage_spread_mv: f64,
}

impl Default for TelemetryThresholds {
    fn default() -> Self {
        Self {
            max_temperature_error_c: 2.0,
            max_failover_ms: 200.0,
            max_voltage_spread_mv: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub unit: &'static str,
    /// `<=` or `<`
    pub rule: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetryVerdicts {
    pub voltage_spread: Check,
    pub temperature: Check,
    pub failover: Check,
}

impl TelemetryVerdicts {
    pub fn all(&self) -> [&Check; 3] {
        [&self.voltage_spread, &self.temperature, &self.failover]
    }

    pub fn pass(&self) -> bool {
        self.all().iter().all(|c| c.pass)
    }
}

pub fn validate_telemetry(
    snapshot: &TelemetrySnapshot,
    thresholds: &TelemetryThresholds,
) -> TelemetryVerdicts {
    let spread = snapshot.voltage_spread_mv();
    let temp = snapshot.max_temperature_error_c();
    let failover = snapshot.worst_failover_ms();
    TelemetryVerdicts {
        voltage_spread: Check {
            name: "cell-voltage spread",
            value: spread,
            limit: thresholds.max_voltage_spread_mv,
            unit: "mV",
            rule: "<=",
            pass: spread <= thresholds.max_voltage_spread_mv,
        },
        temperature: Check {
            name: "temperature sensor error",
            value: temp,
            limit: thresholds.max_temperature_error_c,
            unit: "°C",
            rule: "<=",
            pass: temp <= thresholds.max_temperature_error_c,
        },
        failover: Check {
            name: "communication failover",
            value: failover,
            limit: thresholds.max_failover_ms,
            unit: "ms",
            rule: "<",
            pass: failover < thresholds.max_failover_ms,
        },
    }
}

pub fn parse_telemetry(text: &str) -> Result<TelemetrySnapshot, CommissioningError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let (mut volts, mut temps, mut failover) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| CommissioningError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty)
            || (record.get(0) == Some("kind") && record.get(1) == Some("value"))
        {
            continue;
        }
        let bad = |message: String| CommissioningError::Parse { line, message };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 columns, found {}", record.len())));
        }
        let value: f64 = record[1]
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", &record[1])))?;
        match &record[0] {
            "cell_voltage" => volts.push(value),
            "temperature_error" => temps.push(value),
            "failover_ms" => failover.push(value),
            other => return Err(bad(format!("unknown kind `{other}`"))),
        }
    }
    TelemetrySnapshot::new(volts, temps, failover)
}

pub fn read_telemetry(path: &Path) -> Result<TelemetrySnapshot, CommissioningError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CommissioningError::Io(format!("{}: {e}", path.display())))?;
    parse_telemetry(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(temp: f64, failover: f64) -> TelemetrySnapshot {
        TelemetrySnapshot::new(vec![3.30, 3.31, 3.32], vec![0.5, -temp], vec![failover]).unwrap()
    }

    #[test]
    fn temperature_is_inclusive() {
        let t = TelemetryThresholds::default();
        assert!(validate_telemetry(&snap(2.0, 100.0), &t).temperature.pass);
        assert!(!validate_telemetry(&snap(2.5, 100.0), &t).temperature.pass);
    }

    #[test]
    fn failover_is_strict() {
        let t = TelemetryThresholds::default();
        assert!(validate_telemetry(&snap(0.0, 150.0), &t).failover.pass);
        assert!(validate_telemetry(&snap(0.0, 199.0), &t).failover.pass);
        assert!(!validate_telemetry(&snap(0.0, 200.0), &t).failover.pass);
    }

    #[test]
    fn identical_cells_have_zero_spread() {
        let s = TelemetrySnapshot::new(vec![3.3; 8], vec![0.0], vec![10.0]).unwrap();
        let v = validate_telemetry(&s, &TelemetryThresholds::default());
        assert_eq!(v.voltage_spread.value, 0.0);
        assert!(v.pass());
    }

    #[test]
    fn spread_in_millivolts() {
        let v = validate_telemetry(&snap(0.0, 10.0), &TelemetryThresholds::default());
        assert!((v.voltage_spread.value - 20.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_malformed_snapshots() {
        assert_eq!(
            TelemetrySnapshot::new(vec![], vec![0.0], vec![1.0]),
            Err(CommissioningError::MissingTelemetry("cell_voltage"))
        );
        assert!(TelemetrySnapshot::new(vec![3.3], vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn parses_kind_value_rows() {
        let s = parse_telemetry("kind,value\ncell_voltage,3.30\ncell_voltage,3.34\ntemperature_error,-1.2\nfailover_ms,120\n").unwrap();
        assert!((s.voltage_spread_mv() - 40.0).abs() < 1e-9);
        assert_eq!(s.max_temperature_error_c(), 1.2);
        let err = parse_telemetry("cell_voltage,3.3\nhumidity,40\n").unwrap_err();
        assert!(matches!(err, CommissioningError::Parse { line: 2, .. }));
    }
}
