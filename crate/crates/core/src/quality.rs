//! Power-quality compliance checks for the grid-connection dossier.
//!
//! Every limit is a maximum and the comparison is inclusive: a measurement
//! equal to its limit passes.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const THD_MITIGATION: &str = "tuned passive filters, active filters, or ramp-rate limits";

/// Conditions a dossier must cover.
pub const REQUIRED_CONDITIONS: [&str; 2] = ["steady power", "full discharge"];

#[derive(Debug, Error, PartialEq)]
pub enum PqError {
    #[error("{condition}: {metric} measurement {value} must be finite and non-negative")]
    BadMeasurement {
        condition: String,
        metric: Metric,
        value: f64,
    },
    #[error("{metric} limit {value} must be finite and non-negative")]
    BadLimit { metric: Metric, value: f64 },
    #[error("missing required condition `{0}`")]
    MissingCondition(String),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Thd,
    Pst,
    Plt,
    DcInjection,
    Unbalance,
    RapidVoltageChange,
    Noise,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Thd,
        Metric::Pst,
        Metric::Plt,
        Metric::DcInjection,
        Metric::Unbalance,
        Metric::RapidVoltageChange,
        Metric::Noise,
    ];

    pub fn unit(&self) -> &'static str {
        match self {
            Metric::Thd | Metric::DcInjection | Metric::Unbalance | Metric::RapidVoltageChange => {
                "%"
            }
            Metric::Pst | Metric::Plt => "",
            Metric::Noise => "dB(A)",
        }
    }

    fn mitigation(&self) -> &'static str {
        match self {
            Metric::Thd => THD_MITIGATION,
            Metric::Pst | Metric::Plt | Metric::RapidVoltageChange => {
                "ramp-rate limits or soft energization"
            }
            Metric::DcInjection => "inverter DC offset control or isolation transformer",
            Metric::Unbalance => "phase-balanced inverter control",
            Metric::Noise => "acoustic enclosure or fan speed limits",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Thd => "THD",
            Metric::Pst => "Pst",
            Metric::Plt => "Plt",
            Metric::DcInjection => "DC injection",
            Metric::Unbalance => "current unbalance",
            Metric::RapidVoltageChange => "rapid voltage change",
            Metric::Noise => "noise",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PqLimits {
    pub thd_max_pct: f64,
    pub pst_max: f64,
    pub plt_max: f64,
    pub dc_injection_max_pct: f64,
    pub unbalance_max_pct: f64,
    pub rvc_max_pct: f64,
    pub noise_max_dba: f64,
}

impl Default for PqLimits {
    /// Editable placeholders; only the 45 dB(A) noise ceiling comes from a permit.
    fn default() -> Self {
        Self {
            thd_max_pct: 8.0,
            pst_max: 1.0,
            plt_max: 0.8,
            dc_injection_max_pct: 0.5,
            unbalance_max_pct: 2.0,
            rvc_max_pct: 5.0,
            noise_max_dba: 45.0,
        }
    }
}

impl PqLimits {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Thd => self.thd_max_pct,
            Metric::Pst => self.pst_max,
            Metric::Plt => self.plt_max,
            Metric::DcInjection => self.dc_injection_max_pct,
            Metric::Unbalance => self.unbalance_max_pct,
            Metric::RapidVoltageChange => self.rvc_max_pct,
            Metric::Noise => self.noise_max_dba,
        }
    }

    pub fn validate(&self) -> Result<(), PqError> {
        for metric in Metric::ALL {
            let value = self.get(metric);
            if !(value.is_finite() && value >= 0.0) {
                return Err(PqError::BadLimit { metric, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PqMeasurement {
    pub condition: String,
    pub thd_pct: f64,
    pub pst: f64,
    pub plt: f64,
    pub dc_injection_pct: f64,
    pub unbalance_pct: f64,
    pub rvc_pct: f64,
    pub noise_dba: f64,
}

impl PqMeasurement {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Thd => self.thd_pct,
            Metric::Pst => self.pst,
            Metric::Plt => self.plt,
            Metric::DcInjection => self.dc_injection_pct,
            Metric::Unbalance => self.unbalance_pct,
            Metric::RapidVoltageChange => self.rvc_pct,
            Metric::Noise => self.noise_dba,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricVerdict {
    pub metric: Metric,
    pub measured: f64,
    pub limit: f64,
    /// `limit − measured`; negative when failing.
    pub margin: f64,
    pub pass: bool,
    pub mitigation: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PqVerdict {
    pub condition: String,
    pub metrics: Vec<MetricVerdict>,
    pub pass: bool,
}

impl PqVerdict {
    pub fn failures(&self) -> impl Iterator<Item = &MetricVerdict> {
        self.metrics.iter().filter(|m| !m.pass)
    }
}

pub fn check(measurement: &PqMeasurement, limits: &PqLimits) -> Result<PqVerdict, PqError> {
    limits.validate()?;
    let mut metrics = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let measured = measurement.get(metric);
        if !(measured.is_finite() && measured >= 0.0) {
            return Err(PqError::BadMeasurement {
                condition: measurement.condition.clone(),
                metric,
                value: measured,
            });
        }
        let limit = limits.get(metric);
        let pass = measured <= limit;
        metrics.push(MetricVerdict {
            metric,
            measured,
            limit,
            margin: limit - measured,
            pass,
            mitigation: (!pass).then(|| metric.mitigation()),
        });
    }
    let pass = metrics.iter().all(|m| m.pass);
    Ok(PqVerdict {
        condition: measurement.condition.clone(),
        metrics,
        pass,
    })
}

fn normalize(condition: &str) -> String {
    condition
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dossier {
    pub verdicts: Vec<PqVerdict>,
    pub pass: bool,
    pub failing_conditions: Vec<String>,
}

/// Combines per-condition verdicts; both required conditions must be present.
pub fn dossier(verdicts: Vec<PqVerdict>) -> Result<Dossier, PqError> {
    for required in REQUIRED_CONDITIONS {
        if !verdicts.iter().any(|v| normalize(&v.condition) == required) {
            return Err(PqError::MissingCondition(required.to_string()));
        }
    }
    let failing_conditions: Vec<String> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.condition.clone())
        .collect();
    Ok(Dossier {
        pass: failing_conditions.is_empty(),
        verdicts,
        failing_conditions,
    })
}

impl Dossier {
    pub fn to_markdown(&self, limits: &PqLimits) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Power-quality compliance dossier\n");
        let _ = writeln!(
            out,
            "Overall: **{}**\n",
            if self.pass { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(out, "## Limits\n");
        let _ = writeln!(out, "| Metric | Limit |");
        let _ = writeln!(out, "|---|---:|");
        for metric in Metric::ALL {
            let _ = writeln!(
                out,
                "| {metric} | {} {} |",
                limits.get(metric),
                metric.unit()
            );
        }
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "\n## Condition: {} ({})\n",
                v.condition,
                if v.pass { "pass" } else { "FAIL" }
            );
            let _ = writeln!(out, "| Metric | Measured | Limit | Margin | Result |");
            let _ = writeln!(out, "|---|---:|---:|---:|---|");
            for m in &v.metrics {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.3} | {} |",
                    m.metric,
                    m.measured,
                    m.limit,
                    m.margin,
                    if m.pass { "pass" } else { "FAIL" }
                );
            }
            for m in v.failures() {
                if let Some(note) = m.mitigation {
                    let _ = writeln!(
                        out,
                        "\n- {} exceeds its limit; mitigation: {note}.",
                        m.metric
                    );
                }
            }
        }
        if !self.failing_conditions.is_empty() {
            let _ = writeln!(
                out,
                "\nFailing conditions: {}",
                self.failing_conditions.join(", ")
            );
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementFile {
    measurement: Vec<PqMeasurement>,
}

pub fn parse_limits(text: &str) -> Result<PqLimits, PqError> {
    let limits: PqLimits = toml::from_str(text).map_err(|e| PqError::Parse(e.to_string()))?;
    limits.validate()?;
    Ok(limits)
}

pub fn parse_measurements(text: &str) -> Result<Vec<PqMeasurement>, PqError> {
    let file: MeasurementFile = toml::from_str(text).map_err(|e| PqError::Parse(e.to_string()))?;
    Ok(file.measurement)
}

pub fn read_limits(path: &Path) -> Result<PqLimits, PqError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PqError::Parse(format!("{}: {e}", path.display())))?;
    parse_limits(&text)
}

pub fn read_measurements(path: &Path) -> Result<Vec<PqMeasurement>, PqError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PqError::Parse(format!("{}: {e}", path.display())))?;
    parse_measurements(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clean(condition: &str) -> PqMeasurement {
        PqMeasurement {
            condition: condition.into(),
            thd_pct: 3.0,
            pst: 0.4,
            plt: 0.3,
            dc_injection_pct: 0.1,
            unbalance_pct: 0.5,
            rvc_pct: 1.0,
            noise_dba: 40.0,
        }
    }

    fn metric(v: &PqVerdict, m: Metric) -> &MetricVerdict {
        v.metrics.iter().find(|x| x.metric == m).unwrap()
    }

    #[test]
    fn thd_below_limit_passes_with_margin() {
        let v = check(&clean("steady power"), &PqLimits::default()).unwrap();
        assert!(v.pass);
        assert_eq!(metric(&v, Metric::Thd).margin, 5.0);
    }

    #[test]
    fn boundary_is_inclusive() {
        let mut m = clean("steady power");
        m.thd_pct = 8.0;
        let v = check(&m, &PqLimits::default()).unwrap();
        assert!(metric(&v, Metric::Thd).pass);
        assert_eq!(metric(&v, Metric::Thd).margin, 0.0);
    }

    #[test]
    fn noise_above_45_fails() {
        let mut m = clean("steady power");
        m.noise_dba = 46.0;
        let v = check(&m, &PqLimits::default()).unwrap();
        assert!(!v.pass);
        let failed: Vec<_> = v.failures().map(|f| f.metric).collect();
        assert_eq!(failed, [Metric::Noise]);
    }

    #[test]
    fn thd_failure_carries_mitigation() {
        let mut m = clean("full discharge");
        m.thd_pct = 9.5;
        let v = check(&m, &PqLimits::default()).unwrap();
        assert_eq!(metric(&v, Metric::Thd).mitigation, Some(THD_MITIGATION));
    }

    #[test]
    fn rejects_bad_measurements() {
        let mut m = clean("steady power");
        m.pst = -0.1;
        assert!(matches!(
            check(&m, &PqLimits::default()),
            Err(PqError::BadMeasurement {
                metric: Metric::Pst,
                ..
            })
        ));
        m.pst = f64::INFINITY;
        assert!(check(&m, &PqLimits::default()).is_err());
    }

    #[test]
    fn dossier_conjunction() {
        let limits = PqLimits::default();
        let ok = dossier(vec![
            check(&clean("steady power"), &limits).unwrap(),
            check(&clean("Full  Discharge"), &limits).unwrap(),
        ])
        .unwrap();
        assert!(ok.pass);

        let mut bad = clean("full discharge");
        bad.thd_pct = 12.0;
        let d = dossier(vec![
            check(&clean("steady power"), &limits).unwrap(),
            check(&bad, &limits).unwrap(),
        ])
        .unwrap();
        assert!(!d.pass);
        assert_eq!(d.failing_conditions, ["full discharge"]);
        assert!(d.to_markdown(&limits).contains(THD_MITIGATION));
    }

    #[test]
    fn dossier_needs_both_conditions() {
        let v = check(&clean("steady power"), &PqLimits::default()).unwrap();
        assert_eq!(
            dossier(vec![v]),
            Err(PqError::MissingCondition("full discharge".into()))
        );
    }

    #[test]
    fn parses_files() {
        let limits = parse_limits(
            "thd_max_pct = 8.0\npst_max = 1.0\nplt_max = 0.8\ndc_injection_max_pct = 0.5\nunbalance_max_pct = 2.0\nrvc_max_pct = 5.0\nnoise_max_dba = 45.0\n",
        )
        .unwrap();
        assert_eq!(limits, PqLimits::default());
        let ms = parse_measurements(
            "[[measurement]]\ncondition = \"steady power\"\nthd_pct = 1\npst = 0\nplt = 0\ndc_injection_pct = 0\nunbalance_pct = 0\nrvc_pct = 0\nnoise_dba = 30\n",
        )
        .unwrap();
        assert_eq!(ms.len(), 1);
        assert!(parse_limits("thd_max_pct = 8.0\n").is_err());
    }

    fn measurement() -> impl Strategy<Value = PqMeasurement> {
        proptest::array::uniform7(0.0f64..60.0).prop_map(|v| PqMeasurement {
            condition: "steady power".into(),
            thd_pct: v[0],
            pst: v[1] / 20.0,
            plt: v[2] / 20.0,
            dc_injection_pct: v[3] / 50.0,
            unbalance_pct: v[4] / 10.0,
            rvc_pct: v[5] / 5.0,
            noise_dba: v[6],
        })
    }

    proptest! {
        #[test]
        fn loosening_never_flips_pass_to_fail(m in measurement(), which in 0usize..7, extra in 0.0f64..10.0) {
            let limits = PqLimits::default();
            let before = check(&m, &limits).unwrap();
            let mut looser = limits;
            match Metric::ALL[which] {
                Metric::Thd => looser.thd_max_pct += extra,
                Metric::Pst => looser.pst_max += extra,
                Metric::Plt => looser.plt_max += extra,
                Metric::DcInjection => looser.dc_injection_max_pct += extra,
                Metric::Unbalance => looser.unbalance_max_pct += extra,
                Metric::RapidVoltageChange => looser.rvc_max_pct += extra,
                Metric::Noise => looser.noise_max_dba += extra,
            }
            let after = check(&m, &looser).unwrap();
            prop_assert!(!before.pass || after.pass);
            for (b, a) in before.metrics.iter().zip(&after.metrics) {
                prop_assert!(!b.pass || a.pass);
            }
        }
    }
}
